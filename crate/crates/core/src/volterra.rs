//! Volterra integral equations and the perturbed fundamental system.
//!
//! The second-order spectral ODE in the first-order-free v-picture is solved
//! by Volterra iteration around the free solutions: h_0 = v_0/psi_0 from the
//! rho = 0 side, h_1 = v_1/psi_1 from the rho = 1 side. The two branches are
//! matched at rho = delta_0/<omega> through Wronskians, which also yields the
//! coupling function w_0.
//!
//! Oscillations of the free solutions live in the explicit factor
//! (1-s)^{i omega}/(1+s)^{i omega}; in the variable z = log((1+s)/(1-s)) the
//! phase is exactly linear, so Filon panels keep the node count independent
//! of omega while the slowly varying Volterra unknowns are interpolated.

use crate::error::{Error, Result};
use crate::quad::{filon_weights, gl_cached};
use crate::specfun::{
    bracket, psi0, psi0_deriv, psi1, psi1_deriv, psi1_tilde_deriv, v_weight, v_weight_logderiv,
    wronskian_free, SpectralParameter, ONE,
};
use num_complex::Complex64 as C;
use std::sync::Arc;

pub const DELTA0_DEFAULT: f64 = 0.5;
pub const DELTA1_DEFAULT: f64 = 0.25;

/// Potential of the spectral ODE (+V u on the left-hand side). The blowup
/// linearization is V = -35/4.
#[derive(Clone)]
pub struct PotentialSpec {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub is_zero: bool,
    pub label: String,
}

impl std::fmt::Debug for PotentialSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PotentialSpec({})", self.label)
    }
}

impl PotentialSpec {
    /// The blowup linearization potential V = -35/4.
    pub fn linearization() -> Self {
        PotentialSpec {
            f: Arc::new(|_| -35.0 / 4.0),
            is_zero: false,
            label: "-35/4".into(),
        }
    }

    pub fn zero() -> Self {
        PotentialSpec { f: Arc::new(|_| 0.0), is_zero: true, label: "0".into() }
    }

    pub fn custom<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F, label: &str) -> Self {
        PotentialSpec { f: Arc::new(f), is_zero: false, label: label.into() }
    }

    pub fn v(&self, s: f64) -> f64 {
        (self.f)(s)
    }

    /// a_1(rho) = -\int_rho^1 V(s) ds.
    pub fn a1(&self, rho: f64) -> f64 {
        let val = crate::quad::gauss_panel(|s| C::new(self.v(s), 0.0), rho, 1.0, 24);
        -val.re
    }
}

// ---------------------------------------------------------------------------
// Panel table: piecewise polynomial values on composite Gauss panels
// ---------------------------------------------------------------------------

/// Values at composite Gauss-Legendre nodes, interpolated per panel.
#[derive(Clone, Debug)]
pub struct PanelTable {
    pub breaks: Vec<f64>,
    pub nodes: Vec<f64>,
    pub values: Vec<C>,
    pub m: usize,
}

impl PanelTable {
    pub fn panel_of(&self, x: f64) -> usize {
        let p = self.breaks.partition_point(|b| *b < x);
        p.saturating_sub(1).min(self.breaks.len() - 2)
    }

    pub fn eval(&self, x: f64) -> C {
        let p = self.panel_of(x);
        let (lo, hi) = (self.breaks[p], self.breaks[p + 1]);
        let t = 2.0 * (x - lo) / (hi - lo) - 1.0;
        let (xs, _) = gl_cached(self.m);
        // barycentric on the reference Gauss nodes
        let mut num = C::new(0.0, 0.0);
        let mut den = 0.0;
        for (j, &xj) in xs.iter().enumerate() {
            let d = t - xj;
            if d.abs() < 1e-300 {
                return self.values[p * self.m + j];
            }
            let w = ref_bary(self.m)[j] / d;
            num += self.values[p * self.m + j] * w;
            den += w;
        }
        num / den
    }

    pub fn lo(&self) -> f64 {
        self.breaks[0]
    }

    pub fn hi(&self) -> f64 {
        *self.breaks.last().unwrap()
    }
}

fn ref_bary(m: usize) -> &'static [f64] {
    use std::sync::OnceLock;
    static CACHE: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        (0..=32)
            .map(|n| {
                if n == 0 {
                    return vec![];
                }
                let (xs, _) = crate::quad::gauss_legendre(n);
                let mut w = vec![1.0; n];
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            w[i] *= 2.0 * (xs[i] - xs[j]);
                        }
                    }
                    w[i] = 1.0 / w[i];
                }
                w
            })
            .collect()
    });
    &cache[m.min(32)]
}

// ---------------------------------------------------------------------------
// Generic Volterra solver - Nystrom discretization + fixed-point iteration
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// h(x) = g(x) + \int_{a}^{x} K(x, y) h(y) dy
    FromLeft,
    /// h(x) = g(x) + \int_{x}^{b} K(x, y) h(y) dy
    FromRight,
}

/// A generic second-kind Volterra problem on a composite panel structure.
pub struct VolterraProblem {
    pub kernel: Arc<dyn Fn(f64, f64) -> C + Send + Sync>,
    pub inhom: Arc<dyn Fn(f64) -> C + Send + Sync>,
    pub breaks: Vec<f64>,
    pub nodes_per_panel: usize,
    pub orientation: Orientation,
}

impl VolterraProblem {
    pub fn new(
        kernel: Arc<dyn Fn(f64, f64) -> C + Send + Sync>,
        breaks: Vec<f64>,
        orientation: Orientation,
    ) -> Self {
        VolterraProblem {
            kernel,
            inhom: Arc::new(|_| ONE),
            breaks,
            nodes_per_panel: 8,
            orientation,
        }
    }
}

/// Solve by building the Nystrom quadrature operator once and iterating the
/// Neumann series to a fixed point (one-sided kernels always converge).
pub fn volterra_solve(p: &VolterraProblem, tol: f64, max_iter: usize) -> Result<PanelTable> {
    let m = p.nodes_per_panel;
    let (xs, ws) = gl_cached(m).clone();
    let npan = p.breaks.len() - 1;
    let n = npan * m;
    let mut nodes = Vec::with_capacity(n);
    let mut node_w = Vec::with_capacity(n);
    for q in 0..npan {
        let (lo, hi) = (p.breaks[q], p.breaks[q + 1]);
        for j in 0..m {
            nodes.push(0.5 * (lo + hi) + 0.5 * (hi - lo) * xs[j]);
            node_w.push(0.5 * (hi - lo) * ws[j]);
        }
    }

    // integrability check: \int sup_x |K(x,y)| dy over the discretization
    let mut bound = 0.0;
    for (j, &y) in nodes.iter().enumerate() {
        let mut sup: f64 = 0.0;
        for &x in nodes.iter().step_by(4) {
            let valid = match p.orientation {
                Orientation::FromLeft => x >= y,
                Orientation::FromRight => x <= y,
            };
            if valid {
                sup = sup.max((p.kernel)(x, y).norm());
            }
        }
        bound += node_w[j] * sup;
    }
    if !bound.is_finite() {
        return Err(Error::KernelUnbounded(format!("discretized bound = {bound}")));
    }

    // quadrature operator: full panels on the integrated side plus the
    // clipped panel containing the target, with in-panel interpolation
    let mut op = vec![C::new(0.0, 0.0); n * n];
    let bw = ref_bary(m);
    for i in 0..n {
        let xi = nodes[i];
        let pi = i / m;
        match p.orientation {
            Orientation::FromLeft => {
                for q in 0..pi {
                    for j in 0..m {
                        let idx = q * m + j;
                        op[i * n + idx] += (p.kernel)(xi, nodes[idx]) * node_w[idx];
                    }
                }
                add_clip(&mut op, i, pi, p.breaks[pi], xi, p, &nodes, &xs, &ws, bw, m, n);
            }
            Orientation::FromRight => {
                for q in (pi + 1)..npan {
                    for j in 0..m {
                        let idx = q * m + j;
                        op[i * n + idx] += (p.kernel)(xi, nodes[idx]) * node_w[idx];
                    }
                }
                add_clip(&mut op, i, pi, xi, p.breaks[pi + 1], p, &nodes, &xs, &ws, bw, m, n);
            }
        }
    }

    let g: Vec<C> = nodes.iter().map(|&x| (p.inhom)(x)).collect();
    let mut h = g.clone();
    for it in 0..max_iter {
        let mut next = g.clone();
        for i in 0..n {
            let mut acc = C::new(0.0, 0.0);
            for j in 0..n {
                acc += op[i * n + j] * h[j];
            }
            next[i] += acc;
        }
        let change = next
            .iter()
            .zip(&h)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        h = next;
        if change < tol {
            return Ok(PanelTable { breaks: p.breaks.clone(), nodes, values: h, m });
        }
        if it == max_iter - 1 {
            return Err(Error::NonConvergence(format!(
                "volterra iteration stalled at change {change:.3e}"
            )));
        }
    }
    unreachable!()
}

#[allow(clippy::too_many_arguments)]
fn add_clip(
    op: &mut [C],
    i: usize,
    panel: usize,
    lo: f64,
    hi: f64,
    p: &VolterraProblem,
    nodes: &[f64],
    xs: &[f64],
    ws: &[f64],
    bw: &[f64],
    m: usize,
    n: usize,
) {
    if hi - lo < 1e-300 {
        return;
    }
    let xi = nodes[i];
    let (plo, phi) = (p.breaks[panel], p.breaks[panel + 1]);
    for q in 0..m {
        let yq = 0.5 * (lo + hi) + 0.5 * (hi - lo) * xs[q];
        let wq = 0.5 * (hi - lo) * ws[q];
        let kv = (p.kernel)(xi, yq) * wq;
        // distribute onto the panel's nodes via barycentric interpolation
        let t = 2.0 * (yq - plo) / (phi - plo) - 1.0;
        let mut den = 0.0;
        let mut coef = vec![0.0; m];
        let mut hit = None;
        for (j, &xj) in xs.iter().enumerate() {
            let d = t - xj;
            if d.abs() < 1e-14 {
                hit = Some(j);
                break;
            }
            coef[j] = bw[j] / d;
            den += coef[j];
        }
        match hit {
            Some(j) => op[i * n + panel * m + j] += kv,
            None => {
                for j in 0..m {
                    op[i * n + panel * m + j] += kv * (coef[j] / den);
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Oscillation-aware cumulative panel machinery for the specific kernels
// ---------------------------------------------------------------------------

/// Composite panels with plain and Filon weights for cumulative one-sided
/// integrals; nodes shared between oscillatory and smooth components.
struct CumPanels {
    breaks: Vec<f64>,
    nodes: Vec<f64>,
    m: usize,
    plain_w: Vec<f64>,
    /// Filon weights for frequency `freq` (integrals of e^{i freq z} l_j)
    filon_w: Vec<C>,
    /// per-node clipped weights over the node's own panel: FromRight keeps
    /// [x_i, panel_hi], FromLeft keeps [panel_lo, x_i]
    clip_plain: Vec<Vec<f64>>,
    clip_filon: Vec<Vec<C>>,
}

impl CumPanels {
    fn build(breaks: Vec<f64>, m: usize, freq: f64, orientation: Orientation) -> Self {
        let (xs, ws) = gl_cached(m).clone();
        let npan = breaks.len() - 1;
        let mut nodes = Vec::with_capacity(npan * m);
        let mut plain_w = Vec::with_capacity(npan * m);
        let mut filon_w = Vec::with_capacity(npan * m);
        for q in 0..npan {
            let (lo, hi) = (breaks[q], breaks[q + 1]);
            let (fn_nodes, fw) = filon_weights(lo, hi, freq, m);
            for j in 0..m {
                let x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * xs[j];
                debug_assert!((x - fn_nodes[j]).abs() < 1e-12);
                nodes.push(x);
                plain_w.push(0.5 * (hi - lo) * ws[j]);
                filon_w.push(fw[j]);
            }
        }
        let bw = ref_bary(m);
        let mut clip_plain = Vec::with_capacity(npan * m);
        let mut clip_filon = Vec::with_capacity(npan * m);
        for (i, &xi) in nodes.iter().enumerate() {
            let p = i / m;
            let (plo, phi) = (breaks[p], breaks[p + 1]);
            let (lo, hi) = match orientation {
                Orientation::FromRight => (xi, phi),
                Orientation::FromLeft => (plo, xi),
            };
            let (sub_nodes, sub_fw) = filon_weights(lo, hi, freq, m);
            let (_, sub_ws) = gl_cached(m).clone();
            let mut cp = vec![0.0; m];
            let mut cf = vec![C::new(0.0, 0.0); m];
            for q in 0..m {
                let yq = sub_nodes[q];
                let wq_plain = 0.5 * (hi - lo) * sub_ws[q];
                // interpolation of the panel basis at yq
                let t = 2.0 * (yq - plo) / (phi - plo) - 1.0;
                let mut den = 0.0;
                let mut coef = vec![0.0; m];
                let mut hit = None;
                for (j, &xj) in xs.iter().enumerate() {
                    let d = t - xj;
                    if d.abs() < 1e-14 {
                        hit = Some(j);
                        break;
                    }
                    coef[j] = bw[j] / d;
                    den += coef[j];
                }
                match hit {
                    Some(j) => {
                        cp[j] += wq_plain;
                        cf[j] += sub_fw[q];
                    }
                    None => {
                        for j in 0..m {
                            cp[j] += wq_plain * coef[j] / den;
                            cf[j] += sub_fw[q] * coef[j] / den;
                        }
                    }
                }
            }
            clip_plain.push(cp);
            clip_filon.push(cf);
        }
        CumPanels { breaks, nodes, m, plain_w, filon_w, clip_plain, clip_filon }
    }

    fn npanels(&self) -> usize {
        self.breaks.len() - 1
    }

    /// Cumulative integrals at every node: FromRight gives
    /// J(x_i) = \int_{x_i}^{top} g, FromLeft gives \int_{bottom}^{x_i} g.
    /// `filon` selects the oscillatory weights (slow part g given at nodes).
    fn cumulative(&self, g: &[C], filon: bool, orientation: Orientation) -> Vec<C> {
        let m = self.m;
        let npan = self.npanels();
        let full: Vec<C> = (0..npan)
            .map(|p| {
                let mut acc = C::new(0.0, 0.0);
                for j in 0..m {
                    let idx = p * m + j;
                    acc += if filon {
                        self.filon_w[idx] * g[idx]
                    } else {
                        C::new(self.plain_w[idx], 0.0) * g[idx]
                    };
                }
                acc
            })
            .collect();
        // suffix or prefix sums of whole panels
        let mut out = vec![C::new(0.0, 0.0); g.len()];
        match orientation {
            Orientation::FromRight => {
                let mut suffix = vec![C::new(0.0, 0.0); npan + 1];
                for p in (0..npan).rev() {
                    suffix[p] = suffix[p + 1] + full[p];
                }
                for i in 0..g.len() {
                    let p = i / m;
                    let mut acc = suffix[p + 1];
                    if filon {
                        for j in 0..m {
                            acc += self.clip_filon[i][j] * g[p * m + j];
                        }
                    } else {
                        for j in 0..m {
                            acc += g[p * m + j] * self.clip_plain[i][j];
                        }
                    }
                    out[i] = acc;
                }
            }
            Orientation::FromLeft => {
                let mut prefix = vec![C::new(0.0, 0.0); npan + 1];
                for p in 0..npan {
                    prefix[p + 1] = prefix[p] + full[p];
                }
                for i in 0..g.len() {
                    let p = i / m;
                    let mut acc = prefix[p];
                    if filon {
                        for j in 0..m {
                            acc += self.clip_filon[i][j] * g[p * m + j];
                        }
                    } else {
                        for j in 0..m {
                            acc += g[p * m + j] * self.clip_plain[i][j];
                        }
                    }
                    out[i] = acc;
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// The h_0 branch (regular at rho = 0)
// ---------------------------------------------------------------------------

/// Solution v_0 = psi_0 h_0 on (0, rho_match]; carries the cumulative
/// integrals needed for exact derivatives.
#[derive(Clone, Debug)]
pub struct V0Branch {
    pub lam: C,
    pub rho_match: f64,
    pub h: PanelTable,
    ib: PanelTable,
    id: PanelTable,
    /// normalized second-solution integral R(rho) = rho^3 \int_rho^{rho_m} v_0^{-2}
    rnorm: PanelTable,
}

impl V0Branch {
    pub fn h0(&self, rho: f64) -> C {
        if rho <= self.h.lo() {
            self.h.values[0]
        } else {
            self.h.eval(rho)
        }
    }

    pub fn v(&self, rho: f64) -> C {
        psi0(rho, self.lam) * self.h0(rho)
    }

    pub fn v_deriv(&self, rho: f64) -> C {
        let (ib, id) = if rho <= self.h.lo() {
            (self.ib.values[0], self.id.values[0])
        } else {
            (self.ib.eval(rho), self.id.eval(rho))
        };
        psi0_deriv(rho, self.lam) * (ONE - id) + psi1_deriv(rho, self.lam) * ib
    }

    /// second solution v_0~ = v_0 \int_rho^{rho_m} v_0^{-2} and derivative
    pub fn v_tilde(&self, rho: f64) -> C {
        self.v(rho) * self.integral_inv_sq(rho)
    }

    pub fn v_tilde_deriv(&self, rho: f64) -> C {
        self.v_deriv(rho) * self.integral_inv_sq(rho) - ONE / self.v(rho)
    }

    fn integral_inv_sq(&self, rho: f64) -> C {
        // the suffix integral vanishes at the matching radius by definition
        if rho >= self.rho_match * (1.0 - 1e-12) {
            return C::new(0.0, 0.0);
        }
        let r = if rho <= self.rnorm.lo() {
            self.rnorm.values[0]
        } else {
            self.rnorm.eval(rho)
        };
        r / rho.powi(3)
    }
}

fn reject_degenerate(lam: C) -> Result<()> {
    for p in [0.5, -0.5, 1.5] {
        if (lam - C::new(p, 0.0)).norm() < 1e-4 {
            return Err(Error::Degenerate(format!("lambda within 1e-4 of {p}")));
        }
    }
    Ok(())
}

// the companion family at 1 - lambda is parametrized by h = v/psi_1(.;1-lam),
// whose denominator has a real zero in (0,1) once Re lambda > 3/2 on the real
// axis; the matched pair is only constructed away from that line
fn reject_companion_singular(lam: C) -> Result<()> {
    if lam.im.abs() < 1e-3 && lam.re > 1.45 {
        return Err(Error::Degenerate(format!(
            "companion family singular for real lambda = {lam}"
        )));
    }
    Ok(())
}

/// Build v_0 on (0, delta_0/<omega>] by Volterra iteration from rho = 0.
pub fn build_v0(lam: SpectralParameter, pot: &PotentialSpec, delta0: f64) -> Result<V0Branch> {
    let l = lam.as_c();
    reject_degenerate(l)?;
    let rho_m = delta0 / bracket(lam.omega);
    let w = wronskian_free(l);
    let m = 12;
    // geometric panels toward 0; a gentle ratio keeps the s^{-4} integrand
    // of the second-solution integral interpolable per panel
    let mut breaks = crate::quad::geometric_breakpoints(rho_m, rho_m * 1e-7, 0.55);
    breaks.dedup();
    let cum = CumPanels::build(breaks.clone(), m, 0.0, Orientation::FromLeft);

    // kernel pieces: h(rho) = 1 + A(rho) I_B(rho) - I_D(rho)
    // A = psi1/psi0, B = psi0^2 V/(W (1-s^2)), D = psi0 psi1 V/(W (1-s^2))
    let n = cum.nodes.len();
    let mut a = vec![C::new(0.0, 0.0); n];
    let mut bfac = vec![C::new(0.0, 0.0); n];
    let mut dfac = vec![C::new(0.0, 0.0); n];
    for (i, &s) in cum.nodes.iter().enumerate() {
        let p0 = psi0(s, l);
        let p1 = psi1(s, l);
        let vt = C::new(pot.v(s) / (1.0 - s * s), 0.0);
        a[i] = p1 / p0;
        bfac[i] = p0 * p0 * vt / w;
        dfac[i] = p0 * p1 * vt / w;
    }
    let mut h = vec![ONE; n];
    let mut ib = vec![C::new(0.0, 0.0); n];
    let mut id = vec![C::new(0.0, 0.0); n];
    for it in 0..60 {
        let gb: Vec<C> = (0..n).map(|i| bfac[i] * h[i]).collect();
        let gd: Vec<C> = (0..n).map(|i| dfac[i] * h[i]).collect();
        ib = cum.cumulative(&gb, false, Orientation::FromLeft);
        id = cum.cumulative(&gd, false, Orientation::FromLeft);
        let mut change: f64 = 0.0;
        for i in 0..n {
            let next = ONE + a[i] * ib[i] - id[i];
            change = change.max((next - h[i]).norm());
            h[i] = next;
        }
        if change < 1e-13 {
            break;
        }
        if it == 59 && change > 1e-10 {
            return Err(Error::NonConvergence(format!("h0 iteration change {change:.2e}")));
        }
    }

    // normalized integral of v_0^{-2} up to the matching radius, for the
    // second solution; suffix integrals need their own FromRight clips
    // (prefix-complement would cancel the ~x^{-3} bulk catastrophically)
    let cum_r = CumPanels::build(breaks.clone(), m, 0.0, Orientation::FromRight);
    let ginv: Vec<C> = (0..n)
        .map(|i| {
            let v = psi0(cum.nodes[i], l) * h[i];
            ONE / (v * v)
        })
        .collect();
    let iinv = cum_r.cumulative(&ginv, false, Orientation::FromRight);
    let rnorm: Vec<C> = (0..n).map(|i| iinv[i] * cum.nodes[i].powi(3)).collect();

    let mk = |values: Vec<C>| PanelTable {
        breaks: breaks.clone(),
        nodes: cum.nodes.clone(),
        values,
        m,
    };
    Ok(V0Branch {
        lam: l,
        rho_match: rho_m,
        h: mk(h),
        ib: mk(ib),
        id: mk(id),
        rnorm: mk(rnorm),
    })
}

// ---------------------------------------------------------------------------
// The h_1 branch (regular at rho = 1)
// ---------------------------------------------------------------------------

/// Solution v_1 = psi_1 h_1 on [delta_1/<omega>, 1); tables live in the
/// variable z = log((1+s)/(1-s)) where the free-solution phase is linear.
#[derive(Clone, Debug)]
pub struct V1Branch {
    pub lam: C,
    pub rho_lo: f64,
    /// h_1 values in z-space
    h: PanelTable,
    j1: PanelTable,
    j2: PanelTable,
}

pub fn z_of_rho(rho: f64) -> f64 {
    ((1.0 + rho) / (1.0 - rho)).ln()
}

pub fn rho_of_z(z: f64) -> f64 {
    (z / 2.0).tanh()
}

impl V1Branch {
    pub fn h1(&self, rho: f64) -> C {
        let z = z_of_rho(rho).min(self.h.hi());
        self.h.eval(z)
    }

    pub fn v(&self, rho: f64) -> C {
        psi1(rho, self.lam) * self.h1(rho)
    }

    pub fn v_deriv(&self, rho: f64) -> C {
        let z = z_of_rho(rho).min(self.h.hi());
        let (j1, j2) = (self.j1.eval(z), self.j2.eval(z));
        let w = wronskian_free(self.lam);
        psi1_deriv(rho, self.lam) * (ONE + j1 / w) - psi1_tilde_deriv(rho, self.lam) * (j2 / w)
    }
}

/// Build v_1 on [delta_1/<omega>, 1) by backward Volterra from rho = 1.
/// `conjugate_family` builds the companion at 1 - lambda (v_1~).
pub fn build_v1(lam: SpectralParameter, pot: &PotentialSpec, delta1: f64) -> Result<V1Branch> {
    let l = lam.as_c();
    reject_degenerate(l)?;
    let rho_lo = delta1 / bracket(lam.omega);
    let w = wronskian_free(l);
    let m = 12;
    let z_lo = z_of_rho(rho_lo);
    let z_hi: f64 = 50.0;
    // geometric panels from z_lo up to width 0.4, then uniform
    let mut breaks = vec![z_lo];
    let mut z = z_lo;
    loop {
        let width = (z * 1.0).max(z_lo).min(0.4);
        z += width;
        if z >= z_hi {
            breaks.push(z_hi);
            break;
        }
        breaks.push(z);
    }
    // phase of psi_1(s)^2 in z is exactly -omega z
    let freq = -lam.omega;
    let cum = CumPanels::build(breaks.clone(), m, freq, Orientation::FromRight);

    // h(rho) = 1 + J1/W - (psi1~/psi1) J2/W with
    //   J1 = \int psi1 psi1~ V/(1-s^2) h ds   (no phase)
    //   J2 = \int psi1^2 V/(1-s^2) h ds       (phase -omega z)
    let n = cum.nodes.len();
    let mut fac1 = vec![C::new(0.0, 0.0); n];
    let mut fac2 = vec![C::new(0.0, 0.0); n];
    let mut ratio = vec![C::new(0.0, 0.0); n];
    for (i, &zi) in cum.nodes.iter().enumerate() {
        // everything is formed from z = log((1+s)/(1-s)) directly so that
        // 1 - s never cancels catastrophically deep in the endpoint tail
        let e = (-zi).exp();
        let one_minus = 2.0 * e / (1.0 + e);
        let one_plus = 2.0 / (1.0 + e);
        let s = (1.0 - e) / (1.0 + e);
        // the measure factor ds/dz = (1-s^2)/2 cancels the 1/(1-s^2) of the
        // kernel: vt = V(s)/2
        let vt = 0.5 * pot.v(s);
        // psi1 psi1~ = (1 - s^2)(4 - s^2 (1-2 lam)^2)/s^2, no oscillation
        let prod = C::new(one_minus * one_plus / (s * s), 0.0)
            * (C::new(4.0, 0.0) - (ONE - l * 2.0) * (ONE - l * 2.0) * (s * s));
        fac1[i] = prod * vt;
        // psi1^2 with the e^{-i omega z} carrier removed
        let amp = (C::new(one_minus.ln() * (0.5 + lam.eps) + one_plus.ln() * (1.5 - lam.eps), 0.0))
            .exp();
        let poly = C::new(2.0, 0.0) + (l * 2.0 - ONE) * s;
        fac2[i] = amp * poly * poly / (s * s) * vt;
        // psi1~/psi1 = e^{-z (1-2 lam)/2} (2+s(1-2 lam))/(2+s(-1+2 lam))
        ratio[i] = (-(ONE - l * 2.0) * (zi * 0.5)).exp()
            * (C::new(2.0, 0.0) + (ONE - l * 2.0) * s)
            / poly;
    }
    let mut h = vec![ONE; n];
    let mut j1 = vec![C::new(0.0, 0.0); n];
    let mut j2 = vec![C::new(0.0, 0.0); n];
    for it in 0..60 {
        let g1: Vec<C> = (0..n).map(|i| fac1[i] * h[i]).collect();
        let g2: Vec<C> = (0..n).map(|i| fac2[i] * h[i]).collect();
        j1 = cum.cumulative(&g1, false, Orientation::FromRight);
        j2 = cum.cumulative(&g2, true, Orientation::FromRight);
        let mut change: f64 = 0.0;
        for i in 0..n {
            let next = ONE + j1[i] / w - ratio[i] * j2[i] / w;
            change = change.max((next - h[i]).norm());
            h[i] = next;
        }
        if change < 1e-13 {
            break;
        }
        if it == 59 && change > 1e-10 {
            return Err(Error::NonConvergence(format!("h1 iteration change {change:.2e}")));
        }
    }
    // J2 above carries the pure carrier integral; the Wronskian-compatible
    // J2 in rho must also carry the carrier at the evaluation point:
    // \int_rho^1 psi1^2 .. ds = \int_z e^{-i omega z'} fac2 h dz', which is
    // exactly what the Filon weights computed. Stored as-is.
    let mk = |values: Vec<C>| PanelTable {
        breaks: breaks.clone(),
        nodes: cum.nodes.clone(),
        values,
        m,
    };
    Ok(V1Branch { lam: l, rho_lo, h: mk(h), j1: mk(j1), j2: mk(j2) })
}

// ---------------------------------------------------------------------------
// The fundamental pair
// ---------------------------------------------------------------------------

/// Matched fundamental system of the spectral ODE: u_0 regular at rho = 0,
/// u_1 regular at rho = 1, the coupling w_0, and connection coefficients
/// between the two branches.
#[derive(Clone, Debug)]
pub struct FundamentalPair {
    pub lam: SpectralParameter,
    pub pot: PotentialSpec,
    pub delta0: f64,
    pub delta1: f64,
    pub rho_match: f64,
    pub rho_lo1: f64,
    pub v0: V0Branch,
    pub v1: V1Branch,
    /// companion of v1 at 1 - lambda (the v_1~ family)
    pub v1t: V1Branch,
    /// v_0 = con_a v_1 + con_b v_1~ on the outer region
    pub con_a: C,
    pub con_b: C,
    /// v_1 = con_c v_0 + con_d v_0~ on the inner region
    pub con_c: C,
    pub con_d: C,
    pub w0: C,
    /// relative spread of the Wronskian over the matching overlap
    pub w0_spread: f64,
}

pub fn build_u_pair(lam: SpectralParameter, pot: &PotentialSpec) -> Result<FundamentalPair> {
    build_u_pair_with(lam, pot, DELTA0_DEFAULT, DELTA1_DEFAULT)
}

pub fn build_u_pair_with(
    lam: SpectralParameter,
    pot: &PotentialSpec,
    delta0: f64,
    delta1: f64,
) -> Result<FundamentalPair> {
    assert!(delta1 <= delta0 && delta0 < 1.0);
    let l = lam.as_c();
    reject_companion_singular(l)?;
    let v0 = build_v0(lam, pot, delta0)?;
    let v1 = build_v1(lam, pot, delta1)?;
    let v1t = build_v1(SpectralParameter::from_c(ONE - l), pot, delta1)?;
    let rho_m = v0.rho_match;

    // inner connection of v_1 over (v_0, v_0~): the 2x2 system at rho_m is
    // triangular because v_0~(rho_m) = 0 and v_0~'(rho_m) = -1/v_0(rho_m)
    let v0m = v0.v(rho_m);
    let v0pm = v0.v_deriv(rho_m);
    let v1m = v1.v(rho_m);
    let v1pm = v1.v_deriv(rho_m);
    if v0m.norm() < 1e-280 {
        return Err(Error::MatchingSingular("v_0 vanishes at the matching radius".into()));
    }
    let con_c = v1m / v0m;
    let con_d = v1m * v0pm - v1pm * v0m; // = W(v_1, v_0)(rho_m)

    // outer connection of v_0 over (v_1, v_1~)
    let v1tm = v1t.v(rho_m);
    let v1tpm = v1t.v_deriv(rho_m);
    let w11t = v1m * v1tpm - v1pm * v1tm;
    if w11t.norm() < 1e-10 * wronskian_free(l).norm().max(1.0) {
        return Err(Error::MatchingSingular(format!(
            "W(v1, v1~) = {w11t} too small at rho = {rho_m}"
        )));
    }
    let w0t = v0m * v1tpm - v0pm * v1tm; // W(v0, v1~)
    let w01 = v0m * v1pm - v0pm * v1m; // W(v0, v1)
    let con_a = w0t / w11t;
    let con_b = -w01 / w11t;

    // w_0 from the Wronskian over the matching overlap, with constancy check
    let wfree = wronskian_free(l);
    let lo = v1.rho_lo.max(rho_m * 0.2);
    let mut vals = Vec::new();
    for k in 0..5 {
        let r = lo * (rho_m / lo).powf((k as f64 + 0.5) / 5.0);
        let w = v0.v(r) * v1.v_deriv(r) - v0.v_deriv(r) * v1.v(r);
        vals.push(w / wfree);
    }
    let mean = vals.iter().sum::<C>() / vals.len() as f64;
    let spread = vals
        .iter()
        .map(|v| (v - mean).norm())
        .fold(0.0, f64::max)
        / mean.norm().max(1e-300);
    let w0 = mean;

    Ok(FundamentalPair {
        lam,
        pot: pot.clone(),
        delta0,
        delta1,
        rho_match: rho_m,
        rho_lo1: v1.rho_lo,
        v0,
        v1,
        v1t,
        con_a,
        con_b,
        con_c,
        con_d,
        w0,
        w0_spread: spread,
    })
}

impl FundamentalPair {
    /// v_0 valid on all of (0, 1): direct table below the matching radius,
    /// connection over (v_1, v_1~) above it.
    pub fn v0_any(&self, rho: f64) -> (C, C) {
        if rho <= self.rho_match {
            (self.v0.v(rho), self.v0.v_deriv(rho))
        } else {
            (
                self.con_a * self.v1.v(rho) + self.con_b * self.v1t.v(rho),
                self.con_a * self.v1.v_deriv(rho) + self.con_b * self.v1t.v_deriv(rho),
            )
        }
    }

    /// v_1 valid on all of (0, 1): direct table above the matching radius,
    /// glued over (v_0, v_0~) below it.
    pub fn v1_any(&self, rho: f64) -> (C, C) {
        if rho >= self.rho_match {
            (self.v1.v(rho), self.v1.v_deriv(rho))
        } else {
            (
                self.con_c * self.v0.v(rho) + self.con_d * self.v0.v_tilde(rho),
                self.con_c * self.v0.v_deriv(rho) + self.con_d * self.v0.v_tilde_deriv(rho),
            )
        }
    }

    pub fn u0(&self, rho: f64) -> C {
        self.v0_any(rho).0 / v_weight(rho, self.lam.as_c())
    }

    pub fn u1(&self, rho: f64) -> C {
        self.v1_any(rho).0 / v_weight(rho, self.lam.as_c())
    }

    /// (u, u') for the branch regular at 0.
    pub fn u0_with_deriv(&self, rho: f64) -> (C, C) {
        let l = self.lam.as_c();
        let (v, vp) = self.v0_any(rho);
        let w = v_weight(rho, l);
        (v / w, (vp - v_weight_logderiv(rho, l) * v) / w)
    }

    pub fn u1_with_deriv(&self, rho: f64) -> (C, C) {
        let l = self.lam.as_c();
        let (v, vp) = self.v1_any(rho);
        let w = v_weight(rho, l);
        (v / w, (vp - v_weight_logderiv(rho, l) * v) / w)
    }

    /// The companion branch u_1~ = phi_1~ h_1~ (direct representation,
    /// valid above the inner matching region).
    pub fn u1t_with_deriv(&self, rho: f64) -> (C, C) {
        let l = self.lam.as_c();
        let v = self.v1t.v(rho);
        let vp = self.v1t.v_deriv(rho);
        let w = v_weight(rho, l);
        (v / w, (vp - v_weight_logderiv(rho, l) * v) / w)
    }

    /// h-factors of the Green decomposition: u_0 = phi_0 h_0 inside the
    /// cutoff, u_1 = phi_1 h_1 / u_1~ = phi_1~ h_1~ outside.
    pub fn h0_at(&self, rho: f64) -> C {
        self.v0.h0(rho)
    }

    pub fn h1_at(&self, rho: f64) -> C {
        self.v1.h1(rho)
    }

    pub fn h1t_at(&self, rho: f64) -> C {
        self.v1t.h1(rho)
    }

    /// Rescaled Wronskian rho^4 (1-rho^2)^{1/2+lam} W(u_0, u_1)(rho), which
    /// is constant (= W(lam) w_0) when the construction is consistent.
    pub fn rescaled_wronskian(&self, rho: f64) -> C {
        let (v0, v0p) = self.v0_any(rho);
        let (v1, v1p) = self.v1_any(rho);
        v0 * v1p - v0p * v1
    }
}

/// w_0 = W(v_0, v_1)/W(lam) with a constancy check over the overlap.
pub fn compute_w0(lam: SpectralParameter, pot: &PotentialSpec) -> Result<C> {
    let pair = build_u_pair(lam, pot)?;
    Ok(pair.w0)
}
