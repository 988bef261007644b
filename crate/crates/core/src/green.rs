//! Green function of the spectral ODE, its six-piece cutoff decomposition,
//! resolvent application by singularity-aware quadrature, and an independent
//! collocation boundary-value solver used as the cross-check oracle.

use crate::coords::{RadialField, StatePair};
use crate::error::{Error, Result};
use crate::specfun::{bracket, phi0, phi1, phi1_tilde, wronskian_free, SpectralParameter, ONE};
use crate::volterra::{build_u_pair_with, FundamentalPair, PotentialSpec};
use nalgebra::DMatrix;
use num_complex::Complex64 as C;

/// Smooth cutoff: 1 on [0, delta1], 0 outside [0, delta0], quintic smoothstep
/// in between (C^2 with bounded derivative).
#[derive(Clone, Copy, Debug)]
pub struct CutoffSpec {
    pub delta0: f64,
    pub delta1: f64,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        CutoffSpec { delta0: crate::volterra::DELTA0_DEFAULT, delta1: crate::volterra::DELTA1_DEFAULT }
    }
}

impl CutoffSpec {
    pub fn new(delta0: f64, delta1: f64) -> Self {
        assert!(0.0 < delta1 && delta1 < delta0);
        CutoffSpec { delta0, delta1 }
    }

    pub fn chi(&self, x: f64) -> f64 {
        let x = x.abs();
        if x <= self.delta1 {
            1.0
        } else if x >= self.delta0 {
            0.0
        } else {
            let t = (x - self.delta1) / (self.delta0 - self.delta1);
            1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
        }
    }

    /// max |chi'| over the transition band (recorded in manifests)
    pub fn deriv_bound(&self) -> f64 {
        1.875 / (self.delta0 - self.delta1)
    }
}

/// Right-hand side F_lambda of the spectral ODE, sampled on the state grid.
#[derive(Clone, Debug)]
pub struct ResolventRhs {
    pub field: RadialField,
    pub lam: SpectralParameter,
    /// spectral derivative of the first state component (kept for the
    /// integration-by-parts route)
    pub f1: RadialField,
    pub df1: RadialField,
    pub f2: RadialField,
}

/// F_lambda(rho) = (lam + 5/2) f1 + rho f1' + f2 with a spectral derivative.
pub fn resolvent_rhs(state: &StatePair, lam: SpectralParameter) -> ResolventRhs {
    let l = lam.as_c();
    let df1 = state.first.deriv();
    let grid = state.grid();
    let values: Vec<C> = (0..grid.len())
        .map(|i| {
            (l + 2.5) * state.first.values[i]
                + df1.values[i] * grid.nodes[i]
                + state.second.values[i]
        })
        .collect();
    ResolventRhs {
        field: RadialField::new(grid.clone(), values),
        lam,
        f1: state.first.clone(),
        df1,
        f2: state.second.clone(),
    }
}

/// Green kernel of the full spectral ODE, assembled from a fundamental pair.
#[derive(Clone, Debug)]
pub struct GreenKernel {
    pub pair: FundamentalPair,
    pub cutoff: CutoffSpec,
}

fn gpref(s: f64, lam: C) -> C {
    // s^4 (1-s^2)^{-1/2+lam} / ((3-2 lam)(1+2 lam)(1-2 lam))
    let den = (C::new(3.0, 0.0) - lam * 2.0) * (ONE + lam * 2.0) * (ONE - lam * 2.0);
    (C::new((1.0 - s * s).ln(), 0.0) * (lam - 0.5)).exp() * s.powi(4) / den
}

/// Free Green function G_0 (V = 0), with the cancellation-aware phi_0.
pub fn green_free_eval(rho: f64, s: f64, lam: SpectralParameter) -> Result<C> {
    let l = lam.as_c();
    if wronskian_free(l).norm() < 1e-12 {
        return Err(Error::Degenerate("W(lambda) = 0".into()));
    }
    if !(0.0..1.0).contains(&rho) || !(0.0..1.0).contains(&s) || rho == 0.0 || s == 0.0 {
        return Err(Error::OutOfDomain(format!("(rho, s) = ({rho}, {s})")));
    }
    let branch = if rho <= s {
        phi0(rho, l) * phi1(s, l)
    } else {
        phi0(s, l) * phi1(rho, l)
    };
    Ok(gpref(s, l) * branch)
}

impl GreenKernel {
    pub fn build(lam: SpectralParameter, pot: &PotentialSpec, cutoff: CutoffSpec) -> Result<Self> {
        let pair = build_u_pair_with(lam, pot, cutoff.delta0, cutoff.delta1)?;
        if pair.w0.norm() < 0.05 {
            return Err(Error::Degenerate(format!("|w0| = {} too small", pair.w0.norm())));
        }
        Ok(GreenKernel { pair, cutoff })
    }

    pub fn lam(&self) -> C {
        self.pair.lam.as_c()
    }

    /// Full Green function from the matched pair.
    pub fn eval(&self, rho: f64, s: f64) -> C {
        let l = self.lam();
        let core = if rho <= s {
            self.pair.u0(rho) * self.pair.u1(s)
        } else {
            self.pair.u1(rho) * self.pair.u0(s)
        };
        gpref(s, l) * core / self.pair.w0
    }

    /// One of the six cutoff pieces of G - G_0. The split follows the
    /// branch representations, so the pieces reassemble exactly.
    pub fn component(&self, n: usize, rho: f64, s: f64) -> Result<C> {
        if !(1..=6).contains(&n) {
            return Err(Error::OutOfDomain(format!("component index {n}")));
        }
        if self.pair.pot.is_zero {
            return Ok(C::new(0.0, 0.0));
        }
        let l = self.lam();
        let lam = self.pair.lam;
        let br = bracket(lam.omega);
        let w0 = self.pair.w0;
        let pref = gpref(s, l);
        let rho_m = self.pair.rho_match;
        let val = match n {
            // s >= rho branch, split by chi(rho <omega>)
            1 | 2 | 3 => {
                if s < rho {
                    return Ok(C::new(0.0, 0.0));
                }
                let chi = self.cutoff.chi(rho * br);
                let h1s = self.h1_factor(s);
                match n {
                    1 => {
                        if chi == 0.0 {
                            return Ok(C::new(0.0, 0.0));
                        }
                        let g1 = self.pair.h0_at(rho) * h1s / w0 - ONE;
                        pref * chi * phi0(rho, l) * phi1(s, l) * g1
                    }
                    2 => {
                        if chi == 1.0 {
                            return Ok(C::new(0.0, 0.0));
                        }
                        let g2 = if rho <= rho_m {
                            self.pair.h0_at(rho) * h1s / w0 - ONE
                        } else {
                            self.pair.con_a * self.pair.h1_at(rho) * h1s / w0 - ONE
                        };
                        pref * (1.0 - chi) * phi1(rho, l) * phi1(s, l) * g2
                    }
                    _ => {
                        if chi == 1.0 {
                            return Ok(C::new(0.0, 0.0));
                        }
                        let g3 = if rho <= rho_m {
                            ONE - self.pair.h0_at(rho) * h1s / w0
                        } else {
                            self.pair.con_b * self.pair.h1t_at(rho) * h1s / w0 + ONE
                        };
                        pref * (1.0 - chi) * phi1_tilde(rho, l) * phi1(s, l) * g3
                    }
                }
            }
            // rho >= s branch, split by chi(s <omega>)
            _ => {
                if rho < s {
                    return Ok(C::new(0.0, 0.0));
                }
                let chi = self.cutoff.chi(s * br);
                let h1r = self.h1_factor(rho);
                match n {
                    4 => {
                        if chi == 0.0 {
                            return Ok(C::new(0.0, 0.0));
                        }
                        let g4 = h1r * self.pair.h0_at(s) / w0 - ONE;
                        pref * chi * phi1(rho, l) * phi0(s, l) * g4
                    }
                    5 => {
                        if chi == 1.0 {
                            return Ok(C::new(0.0, 0.0));
                        }
                        let g5 = if s <= rho_m {
                            h1r * self.pair.h0_at(s) / w0 - ONE
                        } else {
                            self.pair.con_a * h1r * self.pair.h1_at(s) / w0 - ONE
                        };
                        pref * (1.0 - chi) * phi1(rho, l) * phi1(s, l) * g5
                    }
                    _ => {
                        if chi == 1.0 {
                            return Ok(C::new(0.0, 0.0));
                        }
                        let g6 = if s <= rho_m {
                            ONE - h1r * self.pair.h0_at(s) / w0
                        } else {
                            self.pair.con_b * h1r * self.pair.h1t_at(s) / w0 + ONE
                        };
                        pref * (1.0 - chi) * phi1(rho, l) * phi1_tilde(s, l) * g6
                    }
                }
            }
        };
        Ok(val)
    }

    /// u_1/phi_1, the slowly varying factor of the regular-at-1 branch,
    /// valid on all of (0, 1) through the glued representation.
    fn h1_factor(&self, x: f64) -> C {
        if x >= self.pair.rho_match {
            self.pair.h1_at(x)
        } else {
            self.pair.u1(x) / phi1(x, self.lam())
        }
    }

    /// Free kernel at this lambda.
    pub fn free(&self, rho: f64, s: f64) -> C {
        let l = self.lam();
        let branch = if rho <= s {
            phi0(rho, l) * phi1(s, l)
        } else {
            phi0(s, l) * phi1(rho, l)
        };
        gpref(s, l) * branch
    }
}

/// Apply the resolvent through the Green function:
/// [R(lambda) f]_1(rho) = \int_0^1 G(rho, s; lambda) F_lambda(s) ds.
///
/// The branch kernels split into components with an explicit (1-s)^{i omega}
/// carrier, so the endpoint tail integrates exactly on Filon panels and the
/// node count stays flat in omega. An s-integration-by-parts variant for the
/// growing (lambda + 1/2) f_1 term was tried and dropped: it reassembles the
/// result from pieces omega times larger than the answer, losing digits the
/// direct split keeps.
pub fn resolvent_apply_with(
    kernel: &GreenKernel,
    rhs: &ResolventRhs,
    targets: &[f64],
) -> Vec<C> {
    use crate::oscquad::{cumulative_components, Component};
    let lam = kernel.pair.lam;
    let om = lam.omega;
    let l = lam.as_c();
    let pair = &kernel.pair;
    let w0 = pair.w0;
    let rho_m = pair.rho_match;
    let cg = move |s: f64| gpref(s, l) / w0;
    // carrier removal: e^{i omega y} = (1-s)^{-i omega}
    let eyw = move |s: f64| C::new(0.0, -om * (1.0 - s).ln()).exp();
    let f1 = |s: f64| rhs.f1.at(s);
    let df1 = |s: f64| rhs.df1.at(s);
    let f2 = |s: f64| rhs.f2.at(s);
    let zero = C::new(0.0, 0.0);
    let fval = move |s: f64| (l + 2.5) * f1(s) + df1(s) * s + f2(s);

    // inner: W u0 F, split at the matching radius; the outer-region
    // connection pieces get their carriers made explicit
    let inner: Vec<Component> = vec![
        Component {
            carrier: 0.0,
            slow: Box::new(move |s| if s <= rho_m { cg(s) * pair.u0(s) * fval(s) } else { zero }),
        },
        Component {
            carrier: -om,
            slow: Box::new(move |s| {
                if s > rho_m {
                    cg(s) * pair.con_a * pair.u1_with_deriv(s).0 * fval(s) * eyw(s)
                } else {
                    zero
                }
            }),
        },
        Component {
            carrier: 0.0,
            slow: Box::new(move |s| {
                if s > rho_m {
                    cg(s) * pair.con_b * pair.u1t_with_deriv(s).0 * fval(s)
                } else {
                    zero
                }
            }),
        },
    ];
    // outer: W u1 F
    let outer: Vec<Component> = vec![
        Component {
            carrier: 0.0,
            slow: Box::new(move |s| if s < rho_m { cg(s) * pair.u1(s) * fval(s) } else { zero }),
        },
        Component {
            carrier: -om,
            slow: Box::new(move |s| {
                if s >= rho_m {
                    cg(s) * pair.u1_with_deriv(s).0 * fval(s) * eyw(s)
                } else {
                    zero
                }
            }),
        },
    ];
    // the matching radius is a breakpoint of every component
    let mut targets_plus: Vec<f64> = targets.to_vec();
    if rho_m > 0.0 && rho_m < 1.0 && !targets_plus.iter().any(|t| (t - rho_m).abs() < 1e-14) {
        targets_plus.push(rho_m);
        targets_plus.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    let r = cumulative_components(&targets_plus, om, crate::oscquad::Y_MAX, 12, &inner, &outer);
    // map back to the requested targets
    let mut p = Vec::with_capacity(targets.len());
    let mut q = Vec::with_capacity(targets.len());
    let mut j = 0usize;
    for &t in targets {
        while (targets_plus[j] - t).abs() > 1e-15 {
            j += 1;
        }
        p.push(r.inner[j]);
        q.push(r.outer[j]);
    }
    targets
        .iter()
        .enumerate()
        .map(|(i, &rho)| pair.u1(rho) * p[i] + pair.u0(rho) * q[i])
        .collect()
}

/// Resolvent application on the state's own grid; lambda must be in the
/// resolvent set (right half-plane off the eigenvalue at 1).
pub fn resolvent_apply(
    state: &StatePair,
    lam: SpectralParameter,
    pot: &PotentialSpec,
) -> Result<RadialField> {
    if lam.eps <= 0.0 {
        return Err(Error::OutOfDomain("resolvent requires Re lambda > 0".into()));
    }
    if (lam.as_c() - ONE).norm() < 1e-3 {
        return Err(Error::NearSpectrum { dist: (lam.as_c() - ONE).norm() });
    }
    let kernel = GreenKernel::build(lam, pot, CutoffSpec::default())?;
    let rhs = resolvent_rhs(state, lam);
    let grid = state.grid();
    let vals = resolvent_apply_with(&kernel, &rhs, &grid.nodes);
    Ok(RadialField::new(grid.clone(), vals))
}

/// Independent oracle: direct collocation solve of the spectral ODE on the
/// interior nodes. No boundary rows are imposed; the polynomial basis
/// selects the solution regular at 0 and bounded at 1.
pub fn bvp_solve_direct(
    state: &StatePair,
    lam: SpectralParameter,
    pot: &PotentialSpec,
) -> Result<RadialField> {
    let grid = state.grid();
    let n = grid.len();
    let l = lam.as_c();
    let rhs = resolvent_rhs(state, lam);
    let mut a = DMatrix::<C>::zeros(n, n);
    for i in 0..n {
        let r = grid.nodes[i];
        let c2 = C::new(-(1.0 - r * r), 0.0);
        let c1 = C::new(-4.0 / r, 0.0) + (l * 2.0 + 5.0) * r;
        let c0 = (l + 2.5) * (l + 1.5) + C::new(pot.v(r), 0.0);
        for j in 0..n {
            a[(i, j)] = c2 * grid.diff2[(i, j)] + c1 * grid.diff[(i, j)];
        }
        a[(i, i)] += c0;
    }
    let lu = a.clone().lu();
    let b = nalgebra::DVector::<C>::from_iterator(n, rhs.field.values.iter().cloned());
    let sol = lu.solve(&b).ok_or_else(|| Error::NonConvergence("singular collocation matrix".into()))?;
    // cheap conditioning report through the solution of a probe system
    let probe = nalgebra::DVector::<C>::from_element(n, ONE);
    if let Some(x) = lu.solve(&probe) {
        let anorm = a.iter().map(|v| v.norm()).fold(0.0, f64::max) * n as f64;
        let cond_est = anorm * x.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if cond_est > 1e14 {
            return Err(Error::NonConvergence(format!(
                "collocation system ill-conditioned (estimate {cond_est:.2e})"
            )));
        }
    }
    Ok(RadialField::new(grid.clone(), sol.iter().cloned().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coords::{norm_l2_sq, StatePair};
    use crate::grid::RadialGrid;

    fn smooth_state(grid: &std::sync::Arc<RadialGrid>) -> StatePair {
        let f1 = RadialField::from_real_fn(grid, |r| (1.0 - r * r) * (0.3 + r * r).cos());
        let f2 = RadialField::from_real_fn(grid, |r| r * r * (-(r * r)).exp());
        StatePair::new(f1, f2)
    }

    #[test]
    fn cutoff_shape() {
        let c = CutoffSpec::default();
        assert_eq!(c.chi(0.1), 1.0);
        assert_eq!(c.chi(0.25), 1.0);
        assert_eq!(c.chi(0.5), 0.0);
        assert_eq!(c.chi(0.9), 0.0);
        let mid = c.chi(0.375);
        assert!(mid > 0.4 && mid < 0.6);
        // continuity of the derivative at the ends of the band
        let h = 1e-6;
        let d_lo = (c.chi(0.25 + h) - c.chi(0.25)) / h;
        let d_hi = (c.chi(0.5) - c.chi(0.5 - h)) / h;
        assert!(d_lo.abs() < 1e-4 && d_hi.abs() < 1e-4);
    }

    #[test]
    fn resolvent_rhs_examples() {
        let grid = RadialGrid::new(32);
        let one = RadialField::constant(&grid, ONE);
        let zero = RadialField::zero(&grid);
        // ((1),(0)) at lam=1: F = 7/2
        let r = resolvent_rhs(&StatePair::new(one.clone(), zero.clone()), SpectralParameter::new(1.0, 0.0));
        for v in &r.field.values {
            assert!((v - C::new(3.5, 0.0)).norm() < 1e-11);
        }
        // ((rho),(0)) at lam=0: F = (7/2) rho
        let rho_f = RadialField::from_real_fn(&grid, |x| x);
        let r = resolvent_rhs(&StatePair::new(rho_f, zero), SpectralParameter::new(0.0, 0.0));
        for (i, v) in r.field.values.iter().enumerate() {
            assert!((v.re - 3.5 * grid.nodes[i]).abs() < 1e-11);
        }
        // g = ((2),(5)) at lam=1: F = 12
        let g = StatePair::new(one.scale(C::new(2.0, 0.0)), one.scale(C::new(5.0, 0.0)));
        let r = resolvent_rhs(&g, SpectralParameter::new(1.0, 0.0));
        for v in &r.field.values {
            assert!((v - C::new(12.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn free_kernel_continuous_across_diagonal() {
        let lam = SpectralParameter::new(0.3, 2.0);
        for gap in [1e-3, 1e-4, 1e-5] {
            let lo = green_free_eval(0.5, 0.5 - gap, lam).unwrap();
            let hi = green_free_eval(0.5, 0.5 + gap, lam).unwrap();
            assert!((lo - hi).norm() < 30.0 * gap, "gap {gap}: {}", (lo - hi).norm());
        }
    }

    #[test]
    fn free_kernel_small_s_scaling() {
        // on the rho <= s branch the s^4 weight meets the s^{-3} blowup of
        // the branch solution: G_0(s/2, s) ~ s as s -> 0
        let lam = SpectralParameter::new(0.2, 1.0);
        let v1 = green_free_eval(0.5e-3, 1e-3, lam).unwrap().norm();
        let v2 = green_free_eval(1.0e-3, 2e-3, lam).unwrap().norm();
        let slope = (v2 / v1).ln() / 2.0f64.ln();
        assert!((0.9..=1.1).contains(&slope), "slope {slope}");
    }

    #[test]
    fn potential_free_kernel_matches_free_green() {
        let lam = SpectralParameter::new(0.2, 3.0);
        let k = GreenKernel::build(lam, &PotentialSpec::zero(), CutoffSpec::default()).unwrap();
        for &(r, s) in &[(0.3, 0.6), (0.8, 0.2), (0.5, 0.5)] {
            let g = k.eval(r, s);
            let g0 = green_free_eval(r, s, lam).unwrap();
            assert!((g - g0).norm() < 1e-8 * g0.norm().max(1e-10), "({r},{s}): {g} vs {g0}");
            for n in 1..=6 {
                assert!(k.component(n, r, s).unwrap().norm() < 1e-9);
            }
        }
    }

    #[test]
    fn decomposition_reassembles_exactly() {
        let lam = SpectralParameter::new(0.1, 10.0);
        let k = GreenKernel::build(lam, &PotentialSpec::linearization(), CutoffSpec::default())
            .unwrap();
        for &r in &[0.04, 0.2, 0.45, 0.9] {
            for &s in &[0.03, 0.3, 0.7, 0.95] {
                let g = k.eval(r, s);
                let mut sum = k.free(r, s);
                for n in 1..=6 {
                    sum += k.component(n, r, s).unwrap();
                }
                assert!(
                    (g - sum).norm() < 1e-8 * g.norm().max(1e-8),
                    "({r},{s}): {g} vs {sum}"
                );
            }
        }
    }

    #[test]
    fn resolvent_matches_bvp_oracle() {
        let grid = RadialGrid::new(48);
        let state = smooth_state(&grid);
        let pot = PotentialSpec::linearization();
        for lam in [
            SpectralParameter::new(0.5, 3.0),
            SpectralParameter::new(0.5, -3.0),
            SpectralParameter::new(0.1, 10.0),
        ] {
            let via_green = resolvent_apply(&state, lam, &pot).unwrap();
            let via_bvp = bvp_solve_direct(&state, lam, &pot).unwrap();
            let diff = norm_l2_sq(&via_green.sub(&via_bvp)).sqrt();
            let scale = norm_l2_sq(&via_bvp).sqrt();
            assert!(diff < 1e-6 * scale, "lam={lam:?}: rel diff {}", diff / scale);
        }
    }

    #[test]
    fn resolvent_linearity() {
        let grid = RadialGrid::new(32);
        let state = smooth_state(&grid);
        let lam = SpectralParameter::new(0.5, 3.0);
        let pot = PotentialSpec::linearization();
        let r1 = resolvent_apply(&state, lam, &pot).unwrap();
        let r2 = resolvent_apply(&state.scale(C::new(2.5, 0.0)), lam, &pot).unwrap();
        for i in 0..grid.len() {
            assert!((r2.values[i] - r1.values[i] * 2.5).norm() < 1e-12 * r1.values[i].norm().max(1e-12));
        }
    }

    #[test]
    fn resolvent_rejects_near_eigenvalue() {
        let grid = RadialGrid::new(16);
        let state = smooth_state(&grid);
        let e = resolvent_apply(&state, SpectralParameter::new(1.0004, 0.0), &PotentialSpec::linearization());
        assert!(matches!(e, Err(Error::NearSpectrum { .. })));
    }

    #[test]
    fn bvp_operator_residual() {
        // apply the discretized ODE back to the bvp output: residual small
        let grid = RadialGrid::new(48);
        let state = smooth_state(&grid);
        let lam = SpectralParameter::new(2.0, 0.0);
        let l = lam.as_c();
        let pot = PotentialSpec::linearization();
        let u = bvp_solve_direct(&state, lam, &pot).unwrap();
        let rhs = resolvent_rhs(&state, lam);
        let du = u.deriv();
        let d2u = RadialField::new(grid.clone(), grid.deriv2(&u.values));
        let mut worst: f64 = 0.0;
        for i in 0..grid.len() {
            let r = grid.nodes[i];
            let lhs = C::new(-(1.0 - r * r), 0.0) * d2u.values[i]
                + (C::new(-4.0 / r, 0.0) + (l * 2.0 + 5.0) * r) * du.values[i]
                + ((l + 2.5) * (l + 1.5) + C::new(pot.v(r), 0.0)) * u.values[i];
            worst = worst.max((lhs - rhs.field.values[i]).norm());
        }
        assert!(worst < 1e-7, "max residual {worst}");
    }

    #[test]
    fn bvp_pole_growth_near_eigenvalue() {
        // data with a g-component blows up like 1/(lam - 1) as lam -> 1
        let grid = RadialGrid::new(32);
        let one = RadialField::constant(&grid, ONE);
        let g = StatePair::new(one.scale(C::new(2.0, 0.0)), one.scale(C::new(5.0, 0.0)));
        let pot = PotentialSpec::linearization();
        let n1 = norm_l2_sq(&bvp_solve_direct(&g, SpectralParameter::new(1.01, 0.0), &pot).unwrap()).sqrt();
        let n2 = norm_l2_sq(&bvp_solve_direct(&g, SpectralParameter::new(1.001, 0.0), &pot).unwrap()).sqrt();
        let rate = (n2 / n1).ln() / 10.0f64.ln();
        assert!((0.8..=1.2).contains(&rate), "pole rate {rate}");
    }

    #[test]
    fn diagonal_jump_of_derivative() {
        // d/drho G jumps by -1/(1-s^2) across the diagonal
        let lam = SpectralParameter::new(0.3, 4.0);
        let k = GreenKernel::build(lam, &PotentialSpec::linearization(), CutoffSpec::default())
            .unwrap();
        let s = 0.55;
        let h = 1e-5;
        let d_above = (k.eval(s + 2.0 * h, s) - k.eval(s + h, s)) / h;
        let d_below = (k.eval(s - h, s) - k.eval(s - 2.0 * h, s)) / h;
        let jump = d_above - d_below;
        let exact = C::new(-1.0 / (1.0 - s * s), 0.0);
        assert!(
            (jump - exact).norm() < 0.05 * exact.norm(),
            "jump {jump} vs {exact}"
        );
    }

    #[test]
    fn gamma_pieces_decay_in_omega() {
        // sup |gamma_n| over a small (rho, s) grid decays at least like 1/omega
        let pot = PotentialSpec::linearization();
        let mut sups = Vec::new();
        for &om in &[10.0, 40.0, 160.0] {
            let k = GreenKernel::build(SpectralParameter::new(0.0, om), &pot, CutoffSpec::default())
                .unwrap();
            let mut sup: f64 = 0.0;
            for n in 1..=6 {
                for &r in &[0.1, 0.4, 0.8] {
                    for &s in &[0.15, 0.5, 0.9] {
                        // normalize out the displayed leading structure
                        let piece = k.component(n, r, s).unwrap();
                        let l = k.lam();
                        let lead = match n {
                            1 => phi0(r, l) * phi1(s, l),
                            2 | 5 => phi1(r, l) * phi1(s, l),
                            3 => phi1_tilde(r, l) * phi1(s, l),
                            4 => phi1(r, l) * phi0(s, l),
                            _ => phi1(r, l) * phi1_tilde(s, l),
                        } * gpref(s, l);
                        if lead.norm() > 1e-12 {
                            sup = sup.max(piece.norm() / lead.norm());
                        }
                    }
                }
            }
            sups.push(sup);
        }
        let slope = (sups[2] / sups[0]).ln() / (16.0f64).ln();
        assert!(slope <= -0.7, "gamma decay exponent {slope}, sups {sups:?}");
    }
}
