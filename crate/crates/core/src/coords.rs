//! Similarity coordinates between the physical backward lightcone and the
//! cylinder, plus the weighted radial norms and inner products used
//! throughout.
//!
//! The cone {0 <= t < T, r <= T - t} maps to the cylinder by
//! tau = log(T/(T-t)), rho = r/(T-t); the field transforms with the weight
//! (T e^{-tau})^{3/2}.

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use num_complex::Complex64 as C;
use std::sync::Arc;

/// Backward lightcone configuration: the blowup time T > 0.
#[derive(Clone, Copy, Debug)]
pub struct ConeConfig {
    pub t_blowup: f64,
}

impl ConeConfig {
    pub fn new(t_blowup: f64) -> Self {
        assert!(t_blowup > 0.0, "blowup time must be positive");
        ConeConfig { t_blowup }
    }
}

/// A point on the cylinder: tau >= 0, rho in [0, 1].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimilarityPoint {
    pub tau: f64,
    pub rho: f64,
}

impl SimilarityPoint {
    pub fn new(tau: f64, rho: f64) -> Self {
        assert!(tau >= 0.0 && (0.0..=1.0).contains(&rho));
        SimilarityPoint { tau, rho }
    }
}

/// Map a cone point (t, r) to cylinder coordinates.
pub fn to_similarity(t: f64, r: f64, cfg: ConeConfig) -> Result<SimilarityPoint> {
    let tt = cfg.t_blowup;
    if t < 0.0 || t >= tt || r < 0.0 || r > tt - t {
        return Err(Error::OutsideCone { t, r, t_blowup: tt });
    }
    Ok(SimilarityPoint {
        tau: (tt / (tt - t)).ln(),
        rho: r / (tt - t),
    })
}

/// Inverse map: t = T(1 - e^{-tau}), r = T e^{-tau} rho.
pub fn from_similarity(pt: SimilarityPoint, cfg: ConeConfig) -> (f64, f64) {
    let tt = cfg.t_blowup;
    let e = (-pt.tau).exp();
    (tt * (1.0 - e), tt * e * pt.rho)
}

/// Scalar radial samples on a shared grid.
#[derive(Clone, Debug)]
pub struct RadialField {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<C>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<C>) -> Self {
        assert_eq!(grid.len(), values.len());
        RadialField { grid, values }
    }

    pub fn from_fn<F: Fn(f64) -> C>(grid: &Arc<RadialGrid>, f: F) -> Self {
        let values = grid.nodes.iter().map(|&r| f(r)).collect();
        RadialField { grid: grid.clone(), values }
    }

    pub fn from_real_fn<F: Fn(f64) -> f64>(grid: &Arc<RadialGrid>, f: F) -> Self {
        Self::from_fn(grid, |r| C::new(f(r), 0.0))
    }

    pub fn zero(grid: &Arc<RadialGrid>) -> Self {
        RadialField { grid: grid.clone(), values: vec![C::new(0.0, 0.0); grid.len()] }
    }

    pub fn constant(grid: &Arc<RadialGrid>, c: C) -> Self {
        RadialField { grid: grid.clone(), values: vec![c; grid.len()] }
    }

    pub fn same_grid(&self, other: &RadialField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid.nodes == other.grid.nodes
    }

    /// Interpolated value anywhere in [0, 1] (or just outside, for traces).
    pub fn at(&self, r: f64) -> C {
        self.grid.eval_at(&self.values, r)
    }

    /// Value at rho = 1 by barycentric extrapolation.
    pub fn boundary_value(&self) -> C {
        self.at(1.0)
    }

    pub fn deriv(&self) -> RadialField {
        RadialField { grid: self.grid.clone(), values: self.grid.deriv(&self.values) }
    }

    pub fn scale(&self, c: C) -> RadialField {
        RadialField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &RadialField) -> RadialField {
        assert!(self.same_grid(other));
        RadialField {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &RadialField) -> RadialField {
        assert!(self.same_grid(other));
        RadialField {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Two-component state (H^1 slot, L^2 slot) on one grid.
#[derive(Clone, Debug)]
pub struct StatePair {
    pub first: RadialField,
    pub second: RadialField,
}

impl StatePair {
    pub fn new(first: RadialField, second: RadialField) -> Self {
        assert!(first.same_grid(&second), "state components on different grids");
        StatePair { first, second }
    }

    pub fn zero(grid: &Arc<RadialGrid>) -> Self {
        StatePair { first: RadialField::zero(grid), second: RadialField::zero(grid) }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.first.grid
    }

    pub fn scale(&self, c: C) -> StatePair {
        StatePair { first: self.first.scale(c), second: self.second.scale(c) }
    }

    pub fn add(&self, other: &StatePair) -> StatePair {
        StatePair { first: self.first.add(&other.first), second: self.second.add(&other.second) }
    }

    pub fn sub(&self, other: &StatePair) -> StatePair {
        StatePair { first: self.first.sub(&other.first), second: self.second.sub(&other.second) }
    }
}

/// Strichartz exponent pair (p, q) on the admissible line 1/p + 5/q = 3/2.
#[derive(Clone, Copy, Debug)]
pub struct NormSpec {
    pub p: f64,
    pub q: f64,
}

impl NormSpec {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(2.0..=f64::INFINITY).contains(&p) || !(10.0 / 3.0..=5.0).contains(&q) {
            return Err(Error::OutOfDomain(format!("(p,q)=({p},{q}) outside the admissible ranges")));
        }
        let lhs = 1.0 / p + 5.0 / q;
        if (lhs - 1.5).abs() > 1e-12 {
            return Err(Error::OutOfDomain(format!("1/p + 5/q = {lhs}, expected 3/2")));
        }
        Ok(NormSpec { p, q })
    }
}

/// Transform physical cone cross-section samples into the cylinder state.
/// `u_slice` and `du_slice` hold u and d_t u sampled at r_i = (T-t) rho_i.
/// The output is (psi_1, psi_2) = ((T-t)^{3/2} u, (T-t)^{5/2} d_t u).
pub fn physical_to_cylinder(
    u_slice: &RadialField,
    du_slice: &RadialField,
    tau: f64,
    cfg: ConeConfig,
) -> Result<StatePair> {
    if !u_slice.same_grid(du_slice) {
        return Err(Error::GridMismatch);
    }
    let mu = cfg.t_blowup * (-tau).exp(); // = T - t
    let w1 = mu.powf(1.5);
    let w2 = mu.powf(2.5);
    Ok(StatePair::new(
        u_slice.scale(C::new(w1, 0.0)),
        du_slice.scale(C::new(w2, 0.0)),
    ))
}

/// Composite quadrature of g(r) dr over [0, R] using the interpolant of the
/// field; panels keep the rule exact for the collocation degree.
fn integrate_radial<F: Fn(C) -> f64>(f: &RadialField, g: F, weight_pow: i32, hi: f64) -> f64 {
    let grid = &f.grid;
    let npanels = 8.max(grid.len() / 8);
    let pts = 16;
    let mut acc = 0.0;
    for k in 0..npanels {
        let a = hi * k as f64 / npanels as f64;
        let b = hi * (k + 1) as f64 / npanels as f64;
        let v = crate::quad::gauss_panel(
            |r| C::new(g(f.at(r)) * r.powi(weight_pow), 0.0),
            a,
            b,
            pts,
        );
        acc += v.re;
    }
    acc
}

/// L^q norm with measure r^4 dr over [0, R]: (\int_0^R |f|^q r^4 dr)^{1/q}.
pub fn norm_lq(f: &RadialField, q: f64, hi: f64) -> Result<f64> {
    if q < 1.0 {
        return Err(Error::OutOfDomain(format!("q = {q} < 1")));
    }
    if !(0.0..=1.0).contains(&hi) || hi == 0.0 {
        return Err(Error::OutOfDomain(format!("R = {hi} outside (0, 1]")));
    }
    let v = integrate_radial(f, |z| z.norm().powf(q), 4, hi);
    Ok(v.max(0.0).powf(1.0 / q))
}

/// Squared H^1(B^5) norm: \int_0^1 (|f'|^2 + |f|^2) r^4 dr.
pub fn norm_h1_sq(f: &RadialField) -> f64 {
    let df = f.deriv();
    let grid = &f.grid;
    let mut acc = 0.0;
    for i in 0..grid.len() {
        let r4 = grid.nodes[i].powi(4);
        acc += grid.weights[i] * r4 * (df.values[i].norm_sqr() + f.values[i].norm_sqr());
    }
    acc
}

pub fn norm_h1(f: &RadialField) -> f64 {
    norm_h1_sq(f).sqrt()
}

/// Squared L^2(B^5) norm.
pub fn norm_l2_sq(f: &RadialField) -> f64 {
    let grid = &f.grid;
    let mut acc = 0.0;
    for i in 0..grid.len() {
        acc += grid.weights[i] * grid.nodes[i].powi(4) * f.values[i].norm_sqr();
    }
    acc
}

/// State norm on H = H^1 x L^2: quadrature combination of the components.
pub fn norm_state_h(s: &StatePair) -> f64 {
    (norm_h1_sq(&s.first) + norm_l2_sq(&s.second)).sqrt()
}

/// H inner product (f|g)_H = (f1|g1)_{H^1} + (f2|g2)_{L^2}.
pub fn inner_h(f: &StatePair, g: &StatePair) -> C {
    assert!(f.first.same_grid(&g.first));
    let grid = f.grid();
    let df = f.first.deriv();
    let dg = g.first.deriv();
    let mut acc = C::new(0.0, 0.0);
    for i in 0..grid.len() {
        let w = grid.weights[i] * grid.nodes[i].powi(4);
        acc += (df.values[i] * dg.values[i].conj()
            + f.first.values[i] * g.first.values[i].conj()
            + f.second.values[i] * g.second.values[i].conj())
            * w;
    }
    acc
}

/// Energy inner product:
/// (f|g)_E = \int f1' conj(g1') r^4 + \int f2 conj(g2) r^4 + f1(1) conj(g1(1)).
pub fn inner_energy(f: &StatePair, g: &StatePair) -> Result<C> {
    if !f.first.same_grid(&g.first) {
        return Err(Error::GridMismatch);
    }
    let grid = f.grid();
    let df = f.first.deriv();
    let dg = g.first.deriv();
    let mut acc = C::new(0.0, 0.0);
    for i in 0..grid.len() {
        let w = grid.weights[i] * grid.nodes[i].powi(4);
        acc += (df.values[i] * dg.values[i].conj()
            + f.second.values[i] * g.second.values[i].conj())
            * w;
    }
    acc += f.first.boundary_value() * g.first.boundary_value().conj();
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<RadialGrid> {
        RadialGrid::new(48)
    }

    #[test]
    fn similarity_base_of_cone() {
        let p = to_similarity(0.0, 0.0, ConeConfig::new(1.0)).unwrap();
        assert_eq!(p.tau, 0.0);
        assert_eq!(p.rho, 0.0);
    }

    #[test]
    fn similarity_forced_values() {
        let p = to_similarity(1.0 - (-1.0_f64).exp(), (-1.0_f64).exp() / 2.0, ConeConfig::new(1.0))
            .unwrap();
        assert!((p.tau - 1.0).abs() < 1e-14);
        assert!((p.rho - 0.5).abs() < 1e-14);
    }

    #[test]
    fn similarity_cone_boundary() {
        let p = to_similarity(1.0, 1.0, ConeConfig::new(2.0)).unwrap();
        assert!((p.tau - 2.0_f64.ln()).abs() < 1e-14);
        assert!((p.rho - 1.0).abs() < 1e-14);
    }

    #[test]
    fn similarity_rejects_outside_cone() {
        assert!(to_similarity(1.0, 0.0, ConeConfig::new(1.0)).is_err());
        assert!(to_similarity(0.5, 0.6, ConeConfig::new(1.0)).is_err());
    }

    #[test]
    fn from_similarity_trivial() {
        let (t, r) = from_similarity(SimilarityPoint::new(0.0, 0.0), ConeConfig::new(1.0));
        assert_eq!((t, r), (0.0, 0.0));
        let (t, r) = from_similarity(SimilarityPoint::new(2.0_f64.ln(), 1.0), ConeConfig::new(2.0));
        assert!((t - 1.0).abs() < 1e-14 && (r - 1.0).abs() < 1e-14);
    }

    #[test]
    fn blowup_profile_maps_to_constant_state() {
        // u = c5 (T-t)^{-3/2}, d_t u = (3/2) c5 (T-t)^{-5/2}
        let g = grid();
        let c5 = crate::evolve::C5;
        let cfg = ConeConfig::new(1.3);
        for tau in [0.0, 0.7, 2.1] {
            let mu = cfg.t_blowup * (-tau as f64).exp();
            let u = RadialField::from_real_fn(&g, |_| c5 * mu.powf(-1.5));
            let du = RadialField::from_real_fn(&g, |_| 1.5 * c5 * mu.powf(-2.5));
            let s = physical_to_cylinder(&u, &du, tau, cfg).unwrap();
            for v in &s.first.values {
                assert!((v.re - c5).abs() < 1e-12);
            }
            for v in &s.second.values {
                assert!((v.re - 1.5 * c5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_data_zero_state() {
        let g = grid();
        let z = RadialField::zero(&g);
        let s = physical_to_cylinder(&z, &z, 0.5, ConeConfig::new(1.0)).unwrap();
        assert_eq!(s.first.max_abs(), 0.0);
        assert_eq!(s.second.max_abs(), 0.0);
    }

    #[test]
    fn lq_norm_monomials() {
        let g = grid();
        let one = RadialField::constant(&g, C::new(1.0, 0.0));
        assert!((norm_lq(&one, 2.0, 1.0).unwrap() - (1.0f64 / 5.0).sqrt()).abs() < 1e-12);
        let r = RadialField::from_real_fn(&g, |x| x);
        assert!((norm_lq(&r, 2.0, 1.0).unwrap() - (1.0f64 / 7.0).sqrt()).abs() < 1e-12);
        let v = norm_lq(&one, 5.0, 0.5).unwrap();
        let exact = (0.5f64.powi(5) / 5.0).powf(0.2);
        assert!((v - exact).abs() < 1e-12);
        assert!(norm_lq(&one, 0.5, 1.0).is_err());
    }

    #[test]
    fn h1_norms() {
        let g = grid();
        let one = RadialField::constant(&g, C::new(1.0, 0.0));
        assert!((norm_h1(&one) - (0.2f64).sqrt()).abs() < 1e-12);
        let r = RadialField::from_real_fn(&g, |x| x);
        assert!((norm_h1_sq(&r) - 12.0 / 35.0).abs() < 1e-12);
        // the eigen direction (2, 5): 4/5 + 25/5 = 29/5
        let s = StatePair::new(one.scale(C::new(2.0, 0.0)), one.scale(C::new(5.0, 0.0)));
        assert!((norm_state_h(&s).powi(2) - 29.0 / 5.0).abs() < 1e-11);
    }

    #[test]
    fn energy_inner_product_examples() {
        let g = grid();
        let one = RadialField::constant(&g, C::new(1.0, 0.0));
        let zero = RadialField::zero(&g);
        let f = StatePair::new(one.clone(), zero.clone());
        let v = inner_energy(&f, &f).unwrap();
        assert!((v.re - 1.0).abs() < 1e-11 && v.im.abs() < 1e-13);

        let r = RadialField::from_real_fn(&g, |x| x);
        let f = StatePair::new(r, zero);
        let v = inner_energy(&f, &f).unwrap();
        assert!((v.re - 6.0 / 5.0).abs() < 1e-11);
    }

    #[test]
    fn norm_spec_validation() {
        assert!(NormSpec::new(2.0, 5.0).is_ok());
        assert!(NormSpec::new(f64::INFINITY, 10.0 / 3.0).is_ok());
        assert!(NormSpec::new(3.0, 5.0).is_err());
        assert!(NormSpec::new(1.5, 5.0).is_err());
    }
}

impl RadialField {
    /// Resample onto another grid through the interpolant.
    pub fn clone_to(&self, grid: &Arc<RadialGrid>) -> RadialField {
        RadialField::from_fn(grid, |r| self.at(r))
    }
}

impl StatePair {
    pub fn clone_to(&self, grid: &Arc<RadialGrid>) -> StatePair {
        StatePair::new(self.first.clone_to(grid), self.second.clone_to(grid))
    }
}
