//! Nonlinear evolution of perturbations around the ODE blowup in similarity
//! coordinates: the initial-data map across blowup times, bisection tuning
//! of the blowup time against the unstable mode, and the space-time
//! stability diagnostic.

use crate::coords::{RadialField, StatePair};
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::rng::CounterRng;
use crate::semigroup::{riesz_setup, Evolution, ProjectionData, Trajectory};
use crate::volterra::PotentialSpec;
use num_complex::Complex64 as C;
use std::sync::Arc;

/// c_5 = (15/4)^{3/4}, the amplitude of the ODE blowup profile.
pub const C5: f64 = 2.6948811404152884;

/// The space-homogeneous blowup u^T(t) = c_5 (T-t)^{-3/2}.
#[derive(Clone, Copy, Debug)]
pub struct BlowupProfile {
    pub c5: f64,
    pub t_blowup: f64,
}

impl BlowupProfile {
    pub fn new(t_blowup: f64) -> Self {
        BlowupProfile { c5: C5, t_blowup }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.c5 * (self.t_blowup - t).powf(-1.5)
    }
}

/// N(x) = |c5 + x|^{4/3}(c5 + x) - c5^{7/3} - (35/4) x, the nonlinearity
/// left after subtracting the linearization.
pub fn nonlinearity(x: f64) -> f64 {
    let y = C5 + x;
    let pow = y.abs().powf(4.0 / 3.0) * y;
    pow - C5.powf(7.0 / 3.0) - 8.75 * x
}

/// Band-limited radial perturbation shape on the ball of radius `radius`,
/// stored as Chebyshev coefficients in (r/radius)^2 so it is smooth, even,
/// and evaluable at any radius below `radius`.
#[derive(Clone, Debug)]
pub struct PerturbationShape {
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    pub radius: f64,
}

fn cheb_eval(c: &[f64], x: f64) -> f64 {
    if c.is_empty() {
        return 0.0;
    }
    if c.len() == 1 {
        return c[0];
    }
    let (mut t0, mut t1) = (1.0, x);
    let mut acc = c[0] + c[1] * x;
    for coef in &c[2..] {
        let t2 = 2.0 * x * t1 - t0;
        acc += coef * t2;
        t0 = t1;
        t1 = t2;
    }
    acc
}

impl PerturbationShape {
    pub fn eval1(&self, r: f64) -> f64 {
        cheb_eval(&self.c1, 2.0 * (r / self.radius).powi(2) - 1.0)
    }

    pub fn eval2(&self, r: f64) -> f64 {
        cheb_eval(&self.c2, 2.0 * (r / self.radius).powi(2) - 1.0)
    }

    pub fn zero(radius: f64) -> Self {
        PerturbationShape { c1: vec![], c2: vec![], radius }
    }

    /// Constant multiple of the unstable direction (2, 5).
    pub fn tangent(radius: f64) -> Self {
        PerturbationShape { c1: vec![2.0], c2: vec![5.0], radius }
    }

    pub fn random(rng: &mut CounterRng, radius: f64, bands: usize) -> Self {
        let mut c1 = vec![0.0; bands];
        let mut c2 = vec![0.0; bands];
        for k in 0..bands {
            let damp = (-(k as f64) / 3.0).exp();
            c1[k] = rng.normal() * damp;
            c2[k] = rng.normal() * damp;
        }
        PerturbationShape { c1, c2, radius }
    }

    /// H^1 x L^2 norm on the ball of radius `radius` (measure r^4 dr).
    pub fn h_norm(&self) -> f64 {
        let r = self.radius;
        let h = 1e-6 * r;
        let mut acc = 0.0;
        for p in 0..24 {
            let a = r * p as f64 / 24.0;
            let b = r * (p + 1) as f64 / 24.0;
            acc += crate::quad::gauss_panel(
                |x| {
                    let d1 = (self.eval1(x + h) - self.eval1((x - h).max(0.0))) / (2.0 * h);
                    C::new(
                        x.powi(4) * (d1 * d1 + self.eval1(x).powi(2) + self.eval2(x).powi(2)),
                        0.0,
                    )
                },
                a,
                b,
                12,
            )
            .re;
        }
        acc.sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.h_norm();
        if n == 0.0 {
            return self.clone();
        }
        PerturbationShape {
            c1: self.c1.iter().map(|v| v / n).collect(),
            c2: self.c2.iter().map(|v| v / n).collect(),
            radius: self.radius,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        PerturbationShape {
            c1: self.c1.iter().map(|v| v * s).collect(),
            c2: self.c2.iter().map(|v| v * s).collect(),
            radius: self.radius,
        }
    }

    /// Sampled as a state on a grid interpreted over [0, radius].
    pub fn as_state(&self, grid: &Arc<RadialGrid>) -> StatePair {
        let r = self.radius;
        StatePair::new(
            RadialField::from_real_fn(grid, |x| self.eval1(x * r)),
            RadialField::from_real_fn(grid, |x| self.eval2(x * r)),
        )
    }
}

/// Initial data map: cylinder state of the physical perturbation v around
/// the T-blowup,
/// U(T, v)(rho) = (T^{3/2} v1(T rho) + c5 (T^{3/2} - 1),
///                 T^{5/2} v2(T rho) + (3/2) c5 (T^{5/2} - 1)).
pub fn initial_from_physical(
    v: &PerturbationShape,
    t_blowup: f64,
    window: (f64, f64),
    grid: &Arc<RadialGrid>,
) -> Result<StatePair> {
    if t_blowup < window.0 || t_blowup > window.1 {
        return Err(Error::OutOfDomain(format!(
            "T = {t_blowup} outside the window [{}, {}]",
            window.0, window.1
        )));
    }
    if t_blowup > v.radius {
        return Err(Error::OutOfDomain(format!(
            "T = {t_blowup} exceeds the data radius {}",
            v.radius
        )));
    }
    let w1 = t_blowup.powf(1.5);
    let w2 = t_blowup.powf(2.5);
    Ok(StatePair::new(
        RadialField::from_real_fn(grid, |rho| w1 * v.eval1(t_blowup * rho) + C5 * (w1 - 1.0)),
        RadialField::from_real_fn(grid, |rho| {
            w2 * v.eval2(t_blowup * rho) + 1.5 * C5 * (w2 - 1.0)
        }),
    ))
}

/// Experiment configuration for the stability runs.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub amplitude: f64,
    pub t_window: (f64, f64),
    pub tau_max: f64,
    pub dt: Option<f64>,
    pub grid_order: usize,
    pub seed: u64,
    pub bands: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            amplitude: 1e-2,
            t_window: (0.9, 1.1),
            tau_max: 10.0,
            dt: None,
            grid_order: 64,
            seed: 7,
            bands: 8,
        }
    }
}

impl ExperimentConfig {
    pub fn data_radius(&self) -> f64 {
        self.t_window.1
    }
}

/// Outcome of a tuned stability run.
#[derive(Clone, Debug)]
pub struct StabilityReport {
    pub t_star: f64,
    pub strichartz_integral: f64,
    pub sup_h_norm: f64,
    pub projection_trace: Vec<(f64, f64)>,
    pub converged: bool,
}

/// Shared fixtures for the nonlinear experiments.
pub struct StabilityLab {
    pub grid: Arc<RadialGrid>,
    pub ev: Evolution,
    pub proj: ProjectionData,
}

impl StabilityLab {
    pub fn new(order: usize, dt: Option<f64>) -> Result<Self> {
        let grid = RadialGrid::new(order);
        let pot = PotentialSpec::linearization();
        let ev = Evolution::new(&grid, &pot, dt);
        let proj = riesz_setup(&grid, &pot)?;
        Ok(StabilityLab { grid, ev, proj })
    }

    /// Full nonlinear evolution of the perturbation system.
    pub fn evolve_nonlinear(&self, init: &StatePair, tau_max: f64, abort_norm: f64) -> Trajectory {
        let n = self.grid.len();
        let forcing = move |x: &[f64], out: &mut [f64]| {
            for i in 0..n {
                out[n + i] += nonlinearity(x[i]);
            }
        };
        self.ev
            .run(init, tau_max, Some(&forcing), Some(&self.proj), abort_norm, 64)
    }

    fn terminal_coefficient(&self, cfg: &ExperimentConfig, shape: &PerturbationShape, t: f64) -> Result<f64> {
        let init = initial_from_physical(shape, t, cfg.t_window, &self.grid)?;
        let traj = self.evolve_nonlinear(&init, cfg.tau_max, 10.0);
        Ok(*traj.proj_coefs.last().unwrap())
    }

    /// Bisection on the blowup time against the sign of the terminal
    /// unstable-mode coefficient.
    pub fn tune_blowup_time(
        &self,
        cfg: &ExperimentConfig,
        shape: &PerturbationShape,
    ) -> Result<(f64, StabilityReport, Trajectory)> {
        let (mut lo, mut hi) = cfg.t_window;
        let mut flo = self.terminal_coefficient(cfg, shape, lo)?;
        let fhi = self.terminal_coefficient(cfg, shape, hi)?;
        if flo == 0.0 && fhi == 0.0 {
            // zero data: the blowup time is exact
            let t_star = 1.0;
            let init = initial_from_physical(shape, t_star, cfg.t_window, &self.grid)?;
            let traj = self.evolve_nonlinear(&init, cfg.tau_max, 10.0);
            let report = self.report_for(t_star, &traj, true);
            return Ok((t_star, report, traj));
        }
        if flo.signum() == fhi.signum() {
            return Err(Error::NoBracket { lo, hi });
        }
        let mut t_star = 0.5 * (lo + hi);
        let mut best_coef = f64::INFINITY;
        for _ in 0..60 {
            t_star = 0.5 * (lo + hi);
            let f = self.terminal_coefficient(cfg, shape, t_star)?;
            if f.abs() < best_coef {
                best_coef = f.abs();
            }
            if f == 0.0 || f.abs() < 1e-6 || hi - lo < 1e-8 {
                break;
            }
            if f.signum() == flo.signum() {
                lo = t_star;
                flo = f;
            } else {
                hi = t_star;
            }
        }
        let init = initial_from_physical(shape, t_star, cfg.t_window, &self.grid)?;
        let traj = self.evolve_nonlinear(&init, cfg.tau_max, 10.0);
        let converged = !traj.meta.aborted && (best_coef < 1e-6 || hi - lo < 1e-8);
        let report = self.report_for(t_star, &traj, converged);
        Ok((t_star, report, traj))
    }

    fn report_for(&self, t_star: f64, traj: &Trajectory, converged: bool) -> StabilityReport {
        let trace: Vec<(f64, f64)> = traj
            .scalar_times
            .iter()
            .zip(&traj.proj_coefs)
            .step_by((traj.proj_coefs.len() / 200).max(1))
            .map(|(&t, &c)| (t, c))
            .collect();
        StabilityReport {
            t_star,
            strichartz_integral: strichartz_diagnostic(traj),
            sup_h_norm: traj.sup_h_norm(),
            projection_trace: trace,
            converged: converged && !traj.meta.aborted,
        }
    }

    /// Projection coefficient magnitude at a fixed comparison time for a
    /// de-tuned blowup time (diagnostic for the tuning sharpness).
    pub fn detuned_coefficient(
        &self,
        cfg: &ExperimentConfig,
        shape: &PerturbationShape,
        t: f64,
        tau_compare: f64,
    ) -> Result<f64> {
        let init = initial_from_physical(shape, t, cfg.t_window, &self.grid)?;
        let traj = self.evolve_nonlinear(&init, tau_compare, 1e6);
        Ok(traj.proj_coefs.last().copied().unwrap_or(f64::NAN).abs())
    }
}

/// \int_0^{tau_max} ||phi_1(tau)||^2_{L^5(B^5)} d tau by trapezoid over the
/// densely sampled trajectory scalars. By the change of variables this
/// equals the physical-cone space-time integral of Theorem-style runs.
pub fn strichartz_diagnostic(traj: &Trajectory) -> f64 {
    let t = &traj.scalar_times;
    let y = &traj.l5_norms;
    let mut acc = 0.0;
    for k in 1..t.len() {
        acc += 0.5 * (t[k] - t[k - 1]) * (y[k] * y[k] + y[k - 1] * y[k - 1]);
    }
    acc
}

/// H-norm of the correction functional P[u + \int_0^inf e^{-s} N(Phi(s)) ds]
/// truncated at tau_max, together with the e^{-tau_max} tail bound.
pub fn correction_norm(
    traj: &Trajectory,
    initial: &StatePair,
    proj: &ProjectionData,
) -> (f64, f64) {
    let grid = initial.grid();
    let n = grid.len();
    let mut integral = StatePair::zero(grid);
    let mut sup_n = 0.0f64;
    for k in 1..traj.times.len() {
        let dt = traj.times[k] - traj.times[k - 1];
        for (w, idx) in [(0.5, k - 1), (0.5, k)] {
            let tau = traj.times[idx];
            let damp = (-tau).exp() * w * dt;
            let phi1 = &traj.states[idx].first;
            let mut nn = 0.0f64;
            for i in 0..n {
                let nv = nonlinearity(phi1.values[i].re);
                integral.second.values[i] += C::new(damp * nv, 0.0);
                nn = nn.max(nv.abs());
            }
            sup_n = sup_n.max(nn);
        }
    }
    let arg = initial.add(&integral);
    let coef = proj.coefficient(&arg);
    let g_norm = crate::coords::norm_state_h(&proj.g);
    let tail = (-traj.times.last().unwrap()).exp() * sup_n;
    (coef.norm() * g_norm, tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coords::{norm_state_h, norm_lq};

    #[test]
    fn c5_matches_closed_form() {
        let exact = (15.0f64 / 4.0).powf(0.75);
        assert!((C5 - exact).abs() < 1e-14, "C5 {C5} vs {exact}");
        // and c5^{4/3} = 15/4 drives the linearization constant
        assert!((C5.powf(4.0 / 3.0) - 3.75).abs() < 1e-13);
    }

    #[test]
    fn nonlinearity_double_zero() {
        assert_eq!(nonlinearity(0.0), 0.0);
        // N'(0) = (7/3) c5^{4/3} - 35/4 = 0
        let h = 1e-6;
        let d = (nonlinearity(h) - nonlinearity(-h)) / (2.0 * h);
        assert!(d.abs() < 1e-8, "N'(0) = {d}");
    }

    #[test]
    fn nonlinearity_quadratic_bound() {
        let mut sup: f64 = 0.0;
        let mut x: f64 = -2.0;
        while x <= 10.0 {
            if x.abs() > 1e-12 {
                let ratio = nonlinearity(x).abs() / (x * x + x.abs().powf(7.0 / 3.0));
                sup = sup.max(ratio);
            }
            x += 0.01;
        }
        assert!(sup.is_finite() && sup < 10.0, "bound constant {sup}");
    }

    #[test]
    fn u_map_zero_data() {
        let grid = RadialGrid::new(24);
        let v = PerturbationShape::zero(1.1);
        let s = initial_from_physical(&v, 1.0, (0.9, 1.1), &grid).unwrap();
        assert!(norm_state_h(&s) < 1e-13);
        assert!(initial_from_physical(&v, 1.2, (0.9, 1.1), &grid).is_err());
    }

    #[test]
    fn u_map_tangent_direction() {
        // U(1+h, 0) = (3/4) c5 h g + O(h^2)
        let grid = RadialGrid::new(24);
        let v = PerturbationShape::zero(1.1);
        let h = 1e-4;
        let s = initial_from_physical(&v, 1.0 + h, (0.9, 1.1), &grid).unwrap();
        let g = StatePair::new(
            RadialField::constant(&grid, C::new(2.0, 0.0)),
            RadialField::constant(&grid, C::new(5.0, 0.0)),
        );
        let expected = g.scale(C::new(0.75 * C5 * h, 0.0));
        let err = norm_state_h(&s.sub(&expected));
        assert!(err < 20.0 * h * h, "tangent error {err} at h={h}");
    }

    #[test]
    fn u_map_continuity_in_t() {
        let grid = RadialGrid::new(24);
        let mut rng = CounterRng::new(3).stream("umap");
        let v = PerturbationShape::random(&mut rng, 1.1, 6).normalized();
        let t = 1.03;
        let s1 = initial_from_physical(&v, t, (0.9, 1.1), &grid).unwrap();
        let s2 = initial_from_physical(&v, t + 1e-6, (0.9, 1.1), &grid).unwrap();
        let d = norm_state_h(&s1.sub(&s2));
        assert!(d < 1e-4 * 1.0 + 1e-5, "continuity modulus {d}");
    }

    #[test]
    fn zero_perturbation_is_fixed_point() {
        let lab = StabilityLab::new(32, None).unwrap();
        let init = StatePair::zero(&lab.grid);
        let traj = lab.evolve_nonlinear(&init, 1.0, 10.0);
        assert!(traj.sup_h_norm() < 1e-12, "drift {}", traj.sup_h_norm());
    }

    #[test]
    fn tuned_zero_data_returns_one() {
        let lab = StabilityLab::new(32, None).unwrap();
        let cfg = ExperimentConfig { tau_max: 3.0, grid_order: 32, ..Default::default() };
        let shape = PerturbationShape::zero(cfg.data_radius());
        let (t_star, report, _) = lab.tune_blowup_time(&cfg, &shape).unwrap();
        assert_eq!(t_star, 1.0);
        assert!(report.converged);
        assert!(report.strichartz_integral < 1e-20);
    }

    #[test]
    fn untuned_projection_grows_exponentially() {
        let lab = StabilityLab::new(40, None).unwrap();
        let cfg = ExperimentConfig { grid_order: 40, ..Default::default() };
        let mut rng = CounterRng::new(12).stream("grow");
        let shape = PerturbationShape::random(&mut rng, cfg.data_radius(), 6)
            .normalized()
            .scale(1e-3);
        let init = initial_from_physical(&shape, 1.05, cfg.t_window, &lab.grid).unwrap();
        let traj = lab.evolve_nonlinear(&init, 5.0, 1e6);
        // fit the projection trace growth over the window where it dominates
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (i, &t) in traj.scalar_times.iter().enumerate() {
            if t >= 1.0 && traj.proj_coefs[i].abs() > 0.0 {
                xs.push(t);
                ys.push(traj.proj_coefs[i].abs().ln());
            }
        }
        let slope = crate::semigroup::fit_slope(&xs, &ys);
        assert!((slope - 1.0).abs() < 0.05, "projection growth slope {slope}");
    }

    #[test]
    fn tangent_tuning_matches_linearization() {
        let lab = StabilityLab::new(32, None).unwrap();
        let cfg = ExperimentConfig { tau_max: 8.0, grid_order: 32, ..Default::default() };
        let h = 1e-3;
        let shape = PerturbationShape::tangent(cfg.data_radius()).normalized().scale(h);
        let (t_star, report, _) = lab.tune_blowup_time(&cfg, &shape).unwrap();
        assert!(report.converged);
        // linearized prediction: h + (3/4) c5 (T-1) ||g||-normalized = 0
        let gnorm = PerturbationShape::tangent(cfg.data_radius()).h_norm();
        let pred = 1.0 - h * PerturbationShape::tangent(cfg.data_radius()).h_norm().recip().recip()
            / (0.75 * C5 * gnorm);
        // the two normalizations cancel into: T* = 1 - h/((3/4) c5 * gnorm_unit)
        // where gnorm_unit is the physical H-norm of the unit tangent state
        let _ = pred;
        let expected = 1.0 - h / (0.75 * C5 * gnorm / 29.0f64.sqrt() * 29.0f64.sqrt());
        let _ = expected;
        // empirical check against the first-order expansion directly:
        let coef_at = |t: f64| {
            let init = initial_from_physical(&shape, t, cfg.t_window, &lab.grid).unwrap();
            lab.proj.coefficient(&init).re
        };
        // root of the initial coefficient approximates T* to O(h^2)
        let (mut lo, mut hi) = (0.95, 1.05);
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if coef_at(mid).signum() == coef_at(lo).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t_lin = 0.5 * (lo + hi);
        assert!(
            (t_star - t_lin).abs() < 40.0 * h * h + 1e-6,
            "tuned {t_star} vs linearized root {t_lin}"
        );
    }

    #[test]
    fn strichartz_diagnostic_zero_for_exact_blowup() {
        let lab = StabilityLab::new(32, None).unwrap();
        let traj = lab.evolve_nonlinear(&StatePair::zero(&lab.grid), 2.0, 10.0);
        assert!(strichartz_diagnostic(&traj) < 1e-24);
    }

    #[test]
    fn correction_norm_zero_on_zero_run() {
        let lab = StabilityLab::new(32, None).unwrap();
        let init = StatePair::zero(&lab.grid);
        let traj = lab.evolve_nonlinear(&init, 2.0, 10.0);
        let (c, tail) = correction_norm(&traj, &init, &lab.proj);
        assert!(c < 1e-13 && tail < 1e-13);
    }

    #[test]
    fn correction_norm_untuned_linear_prediction() {
        // T = 1.05, v = 0: ||C|| ~ (3/4) c5 * 0.05 * ||g||_H within 20%
        let lab = StabilityLab::new(32, None).unwrap();
        let shape = PerturbationShape::zero(1.1);
        let init = initial_from_physical(&shape, 1.05, (0.9, 1.1), &lab.grid).unwrap();
        let traj = lab.evolve_nonlinear(&init, 10.0, 1e6);
        let (c, _) = correction_norm(&traj, &init, &lab.proj);
        let g_norm = norm_state_h(&lab.proj.g);
        let pred = 0.75 * C5 * 0.05 * g_norm;
        assert!(
            (c - pred).abs() < 0.2 * pred,
            "correction {c} vs linear prediction {pred}"
        );
    }

    #[test]
    fn l5_integrand_decays_on_average() {
        // tail half of the tuned-run integrand carries at most half the mass
        let lab = StabilityLab::new(40, None).unwrap();
        let cfg = ExperimentConfig { grid_order: 40, amplitude: 1e-2, ..Default::default() };
        let mut rng = CounterRng::new(77).stream("avg");
        let shape = PerturbationShape::random(&mut rng, cfg.data_radius(), 6)
            .normalized()
            .scale(cfg.amplitude);
        let (_, report, traj) = lab.tune_blowup_time(&cfg, &shape).unwrap();
        assert!(report.converged);
        let total = strichartz_diagnostic(&traj);
        let half = traj.scalar_times.last().unwrap() / 2.0;
        let mut tail = 0.0;
        for k in 1..traj.scalar_times.len() {
            if traj.scalar_times[k] >= half {
                tail += 0.5
                    * (traj.scalar_times[k] - traj.scalar_times[k - 1])
                    * (traj.l5_norms[k].powi(2) + traj.l5_norms[k - 1].powi(2));
            }
        }
        assert!(tail <= 0.5 * total, "tail {tail} vs total {total}");
        let _ = norm_lq;
    }
}
