use thiserror::Error;

/// Errors surfaced by the numerical machinery.
#[derive(Error, Debug, Clone)]
pub enum Error {
    #[error("point (t={t}, r={r}) lies outside the backward cone of T={t_blowup}")]
    OutsideCone { t: f64, r: f64, t_blowup: f64 },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("argument out of domain: {0}")]
    OutOfDomain(String),

    #[error("gamma pole at z = {re} + {im}i")]
    GammaPole { re: f64, im: f64 },

    #[error("degenerate spectral parameter: {0}")]
    Degenerate(String),

    #[error("logarithmic hypergeometric case (c-a-b integer) not supported")]
    LogarithmicCase,

    #[error("iteration did not converge: {0}")]
    NonConvergence(String),

    #[error("kernel integrability check failed: {0}")]
    KernelUnbounded(String),

    #[error("lambda too close to detected spectrum (distance {dist:.3e})")]
    NearSpectrum { dist: f64 },

    #[error("contour passes too close to a zero/pole of the scanned function")]
    ContourDegenerate,

    #[error("matching-point system nearly singular: {0}")]
    MatchingSingular(String),

    #[error("time integration unstable at tau = {tau:.4}")]
    Unstable { tau: f64 },

    #[error("eigenvalue cluster near 1 not isolated (gap {gap:.3e})")]
    ClusterNotIsolated { gap: f64 },

    #[error("no sign change over the blowup-time bracket [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error at {path}: {msg}")]
    Io { path: String, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
