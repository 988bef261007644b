//! The experiment suites. Each suite returns its report rows; `run_experiment`
//! orchestrates them, writes per-suite CSVs and the JSON manifest atomically,
//! and keeps wall-clock timings in a sidecar so the manifest stays
//! deterministic.

use super::config::RunConfig;
use super::manifest::{
    manifest_to_json, rows_to_csv, write_atomic, ReportRow, RunManifest,
};
use crate::coords::{
    inner_energy, norm_l2_sq, norm_lq, norm_state_h, RadialField, StatePair,
};
use crate::error::{Error, Result};
use crate::evolve::{
    correction_norm, initial_from_physical, strichartz_diagnostic, ExperimentConfig,
    PerturbationShape, StabilityLab, C5,
};
use crate::green::{bvp_solve_direct, resolvent_apply, CutoffSpec, GreenKernel};
use crate::grid::RadialGrid;
use crate::quad::gauss_panel;
use crate::radialwave::FreeWaveSolver;
use crate::rng::CounterRng;
use crate::semigroup::{
    fit_slope, generator_matrix, kernel_bound_ratio, kernel_cache, laplace_invert_multi,
    linear_evolve, osc_decay_check, riesz_setup, weighted_norm_inequalities, ContourSpec,
    SymbolFamily,
};
use crate::specfun::{
    bracket, connection_coefficient, connection_coefficient_regular, hyp2f1, locate_zeros,
    phi0_via_representation, spectrum_scan, HypergeometricParams, Phi0Rep, Rect,
    SpectralParameter, ZeroHit, ONE,
};
use crate::volterra::{build_u_pair, PotentialSpec};
use nalgebra::DVector;
use num_complex::Complex64 as C;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

/// Deterministic band-limited random state on a grid (Chebyshev in rho^2
/// with decaying coefficients).
pub fn random_band_limited(grid: &Arc<RadialGrid>, rng: &mut CounterRng, bands: usize) -> StatePair {
    let shape = PerturbationShape::random(rng, 1.0, bands);
    shape.as_state(grid)
}

// ---------------------------------------------------------------------------
// spectrum-scan (criterion A)
// ---------------------------------------------------------------------------

pub fn suite_spectrum_scan(cfg: &RunConfig) -> Result<Vec<ReportRow>> {
    let sec = "spectrum-scan";
    let re_lo = cfg.get_f64(sec, "re-lo", 0.05)?;
    let re_hi = cfg.get_f64(sec, "re-hi", 2.0)?;
    let im_lo = cfg.get_f64(sec, "im-lo", -10.0)?;
    let im_hi = cfg.get_f64(sec, "im-hi", 10.0)?;
    let tol = cfg.get_f64(sec, "tol", 1e-6)?;
    let mut rows = Vec::new();

    let hits = spectrum_scan(Rect::new(re_lo, re_hi, im_lo, im_hi), tol)?;
    let total: i32 = hits.iter().map(|h| h.multiplicity).sum();
    rows.push(ReportRow::check(
        "A.spectrum.zero_count",
        &format!("rect=[{re_lo},{re_hi}]x[{im_lo},{im_hi}]"),
        total as f64,
        "= 1",
        total == 1 && hits.len() == 1,
    ));
    let loc_err = hits
        .first()
        .map(|h: &ZeroHit| (h.location - ONE).norm())
        .unwrap_or(f64::INFINITY);
    rows.push(ReportRow::check(
        "A.spectrum.zero_location",
        "expected lambda = 1",
        loc_err,
        "<= 1e-6",
        loc_err <= 1e-6,
    ));

    // validator self-test: winding of (lambda - 1)^2
    let f = |z: C| Ok((z - ONE) * (z - ONE));
    let self_hits = locate_zeros(&f, Rect::new(re_lo, re_hi, im_lo, im_hi), 1e-4)?;
    let mult: i32 = self_hits.iter().map(|h| h.multiplicity).sum();
    rows.push(ReportRow::check(
        "A.spectrum.winding_selftest",
        "(lambda-1)^2",
        mult as f64,
        "= 2",
        mult == 2,
    ));

    let empty = spectrum_scan(Rect::new(1.5, 2.0, -5.0, 5.0), tol)?;
    rows.push(ReportRow::check(
        "A.spectrum.clean_rectangle",
        "rect=[1.5,2]x[-5,5]",
        empty.len() as f64,
        "= 0",
        empty.is_empty(),
    ));
    Ok(rows)
}

// ---------------------------------------------------------------------------
// green-verify (criteria C, D, E, F)
// ---------------------------------------------------------------------------

pub fn suite_green_verify(cfg: &RunConfig) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    rows.extend(criterion_c_wronskian(cfg)?);
    rows.extend(criterion_d_connection(cfg)?);
    rows.extend(criterion_e_phi0(cfg)?);
    rows.extend(criterion_f_green_resolvent(cfg)?);
    Ok(rows)
}

pub fn criterion_c_wronskian(cfg: &RunConfig) -> Result<Vec<ReportRow>> {
    let pot = PotentialSpec::linearization();
    let mut rng = CounterRng::new(cfg.seed).stream("wronskian-lambdas");
    let mut lams = Vec::new();
    while lams.len() < 30 {
        let eps = rng.uniform_in(0.0, 0.25);
        let om = rng.uniform_in(-50.0, 50.0);
        let l = C::new(eps, om);
        if [0.5, -0.5, 1.5].iter().any(|p| (l - C::new(*p, 0.0)).norm() < 2e-4) {
            continue;
        }
        lams.push(SpectralParameter::new(eps, om));
    }
    let mut max_var: f64 = 0.0;
    let mut min_w0 = f64::INFINITY;
    for lam in &lams {
        let pair = build_u_pair(*lam, &pot)?;
        let base = pair.rescaled_wronskian(0.5);
        let mut var: f64 = 0.0;
        for k in 0..12 {
            let r = 0.05 + 0.9 * k as f64 / 11.0;
            var = var.max((pair.rescaled_wronskian(r) - base).norm() / base.norm());
        }
        max_var = max_var.max(var);
        min_w0 = min_w0.min(pair.w0.norm());
    }
    let mut rows = vec![
        ReportRow::check(
            "C.wronskian.constancy",
            "30 lambdas, eps in [0,1/4], |omega| <= 50, rho in [0.05,0.95]",
            max_var,
            "<= 1e-6 relative",
            max_var <= 1e-6,
        ),
        ReportRow::check("C.wronskian.w0_min", "same sample", min_w0, ">= 0.5", min_w0 >= 0.5),
    ];

    // |w0 - 1| decay in omega at eps = 1/4
    let omegas = [5.0, 20.0, 80.0];
    let mut x = Vec::new();
    let mut y = Vec::new();
    for &om in &omegas {
        let pair = build_u_pair(SpectralParameter::new(0.25, om), &pot)?;
        x.push(bracket(om).ln());
        y.push((pair.w0 - ONE).norm().ln());
    }
    let slope = fit_slope(&x, &y);
    rows.push(ReportRow::check(
        "C.wronskian.w0_decay_exponent",
        "eps=0.25, omega in {5,20,80}",
        slope,
        "in [-1.3,-0.7]",
        (-1.3..=-0.7).contains(&slope),
    ));
    Ok(rows)
}

pub fn criterion_d_connection(cfg: &RunConfig) -> Result<Vec<ReportRow>> {
    let mut rng = CounterRng::new(cfg.seed).stream("connection-lambdas");
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let lam = C::new(rng.uniform_in(0.05, 0.25), rng.uniform_in(-5.0, 5.0));
        let p = HypergeometricParams::from_lambda(lam);
        let c_sing = connection_coefficient(lam)?;
        let c_reg = connection_coefficient_regular(lam)?;
        for &z in &[0.3, 0.5, 0.7] {
            let zc = C::new(z, 0.0);
            let h1 = hyp2f1(
                HypergeometricParams::new(p.a, p.b, p.a + p.b + ONE - p.c),
                ONE - zc,
            )?;
            let h0 = hyp2f1(HypergeometricParams::new(p.a, p.b, p.c), zc)?;
            let h0t = zc.powc(ONE - p.c)
                * hyp2f1(
                    HypergeometricParams::new(
                        p.a - p.c + ONE,
                        p.b - p.c + ONE,
                        C::new(2.0, 0.0) - p.c,
                    ),
                    zc,
                )?;
            let rhs = c_reg * h0 + c_sing * h0t;
            worst = worst.max((h1 - rhs).norm() / h1.norm());
        }
    }
    Ok(vec![ReportRow::check(
        "D.connection.identity",
        "20 lambdas, z in {0.3,0.5,0.7}",
        worst,
        "<= 1e-8 relative",
        worst <= 1e-8,
    )])
}

pub fn criterion_e_phi0(_cfg: &RunConfig) -> Result<Vec<ReportRow>> {
    let rhos = [0.1, 0.3, 0.5, 0.7, 0.9];
    let lams = [
        C::new(1.0, 0.0),
        C::new(2.0, 0.0),
        C::new(0.25, 1.0),
        C::new(0.1, 5.0),
        C::new(0.05, 20.0),
    ];
    let mut worst: f64 = 0.0;
    for &rho in &rhos {
        for &lam in &lams {
            let d = phi0_via_representation(rho, lam, Phi0Rep::Direct);
            let s = phi0_via_representation(rho, lam, Phi0Rep::SingleIntegral);
            let dd = phi0_via_representation(rho, lam, Phi0Rep::DoubleIntegral);
            let scale = d.norm().max(s.norm()).max(1e-6);
            worst = worst.max((d - s).norm() / scale);
            worst = worst.max((d - dd).norm() / scale);
            worst = worst.max((s - dd).norm() / scale);
        }
    }
    Ok(vec![ReportRow::check(
        "E.phi0.representations",
        "5x5 (rho, lambda) grid, three forms pairwise",
        worst,
        "<= 1e-9 relative",
        worst <= 1e-9,
    )])
}

pub fn criterion_f_green_resolvent(cfg: &RunConfig) -> Result<Vec<ReportRow>> {
    let grid = RadialGrid::new(cfg.grid_order);
    let pot = PotentialSpec::linearization();
    let mut rng = CounterRng::new(cfg.seed).stream("resolvent-states");
    let lams = [
        SpectralParameter::new(0.5, 3.0),
        SpectralParameter::new(0.5, -3.0),
        SpectralParameter::new(0.1, 10.0),
    ];
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let state = random_band_limited(&grid, &mut rng, 8);
        for lam in lams {
            let via_green = resolvent_apply(&state, lam, &pot)?;
            let via_bvp = bvp_solve_direct(&state, lam, &pot)?;
            let rel = (norm_l2_sq(&via_green.sub(&via_bvp)) / norm_l2_sq(&via_bvp)).sqrt();
            worst = worst.max(rel);
        }
    }
    let mut rows = vec![ReportRow::check(
        "F.green.resolvent_vs_bvp",
        "5 smooth states x 3 lambdas",
        worst,
        "<= 1e-6 relative L2",
        worst <= 1e-6,
    )];

    // exact reassembly of the six-piece decomposition
    let kernel = GreenKernel::build(
        SpectralParameter::new(0.1, 10.0),
        &pot,
        CutoffSpec::default(),
    )?;
    let mut reasm: f64 = 0.0;
    for &r in &[0.04, 0.2, 0.45, 0.7, 0.9] {
        for &s in &[0.03, 0.3, 0.55, 0.8, 0.95] {
            let g = kernel.eval(r, s);
            let mut sum = kernel.free(r, s);
            for n in 1..=6 {
                sum += kernel.component(n, r, s)?;
            }
            reasm = reasm.max((g - sum).norm() / g.norm().max(1e-8));
        }
    }
    rows.push(ReportRow::check(
        "F.green.reassembly",
        "lambda = 0.1+10i, 5x5 (rho,s) grid",
        reasm,
        "<= 1e-8",
        reasm <= 1e-8,
    ));
    Ok(rows)
}

// ---------------------------------------------------------------------------
// semigroup-verify (criteria B, G, H, L)
// ---------------------------------------------------------------------------

pub fn suite_semigroup_verify(cfg: &RunConfig) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    rows.extend(criterion_b_eigenpair(cfg)?);
    rows.extend(criterion_g_consistency(cfg)?);
    rows.extend(criterion_h_improved_energy(cfg)?);
    rows.extend(criterion_l_norm_machinery(cfg)?);
    Ok(rows)
}

pub fn criterion_b_eigenpair(cfg: &RunConfig) -> Result<Vec<ReportRow>> {
    let orders = [cfg.grid_order, cfg.grid_order * 2];
    let pot = PotentialSpec::linearization();
    let mut devs = Vec::new();
    let mut rows = Vec::new();
    for order in orders {
        let grid = RadialGrid::new(order);
        let proj = riesz_setup(&grid, &pot)?;
        let dev_val = (proj.eigenvalue - ONE).norm();
        // right eigenvector by inverse iteration, compared to g after
        // H-normalization and sign alignment
        let l = generator_matrix(&grid, &pot);
        let n2 = 2 * grid.len();
        let shifted = &l - nalgebra::DMatrix::<f64>::identity(n2, n2) * (proj.eigenvalue.re + 1e-9);
        let lu = shifted.lu();
        let mut v = DVector::from_element(n2, 1.0);
        for _ in 0..6 {
            v = lu.solve(&v).ok_or_else(|| Error::NonConvergence("inverse iteration".into()))?;
            v /= v.norm();
        }
        let vs = crate::semigroup::vec_to_state(&grid, v.as_slice());
        let vn = norm_state_h(&vs);
        let g = StatePair::new(
            RadialField::constant(&grid, C::new(2.0, 0.0)),
            RadialField::constant(&grid, C::new(5.0, 0.0)),
        );
        let gn = norm_state_h(&g);
        let sign = if vs.first.values[0].re >= 0.0 { 1.0 } else { -1.0 };
        let dev_vec =
            norm_state_h(&vs.scale(C::new(sign / vn, 0.0)).sub(&g.scale(C::new(1.0 / gn, 0.0))));
        let dev = dev_val.max(dev_vec);
        devs.push(dev);
        rows.push(ReportRow::check(
            &format!("B.eigenpair.deviation_order_{order}"),
            "eigenvalue vs 1 and eigenvector vs (2,5)",
            dev,
            "<= 1e-6",
            dev <= 1e-6,
        ));
        rows.push(ReportRow::info(
            &format!("B.eigenpair.gap_order_{order}"),
            "distance to the rest of the discrete spectrum",
            proj.gap,
            "isolation radius",
        ));
    }
    // the constant eigenvector is represented exactly by the collocation
    // basis, so both deviations sit at the rounding floor; the refinement
    // clause is met a fortiori when both are below 1e-10
    let ratio = devs[1] / devs[0].max(1e-300);
    let floor = devs[0].max(devs[1]) <= 1e-10;
    rows.push(ReportRow::check(
        "B.eigenpair.refinement",
        &format!("orders {} -> {}", orders[0], orders[1]),
        ratio,
        "<= 1/100, or both at the 1e-10 floor",
        ratio <= 0.01 || floor,
    ));
    Ok(rows)
}

pub fn criterion_g_consistency(cfg: &RunConfig) -> Result<Vec<ReportRow>> {
    let grid = RadialGrid::new(cfg.grid_order);
    let pot = PotentialSpec::linearization();
    let proj = riesz_setup(&grid, &pot)?;
    let mut rng = CounterRng::new(cfg.seed).stream("semigroup-data");
    let f = proj.apply_q(&random_band_limited(&grid, &mut rng, 8));
    let omega_max = cfg.get_f64("semigroup-verify", "omega-max", 200.0)?;
    let contour = ContourSpec { omega_max, ..Default::default() };
    let mut rows = Vec::new();

    // tau = 0 identity
    let out0 = laplace_invert_multi(&f, &[0.0], contour, &pot)?;
    let rel0 = (norm_l2_sq(&out0[0].sub(&f.first)) / norm_l2_sq(&f.first)).sqrt();
    rows.push(ReportRow::check(
        "G.semigroup.tau0_identity",
        "stable-subspace datum",
        rel0,
        "<= 1e-3 relative L2",
        rel0 <= 1e-3,
    ));

    // inversion against time stepping
    let taus = [0.5, 1.0, 2.0];
    let inverted = laplace_invert_multi(&f, &taus, contour, &pot)?;
    let traj = linear_evolve(&f, 2.0, None, &pot);
    for (k, &tau) in taus.iter().enumerate() {
        let (idx, _) = traj
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - tau).abs().partial_cmp(&(b.1 - tau).abs()).unwrap())
            .unwrap();
        let stepped = &traj.states[idx].first;
        let rel = (norm_l2_sq(&inverted[k].sub(stepped)) / norm_l2_sq(stepped)).sqrt();
        rows.push(ReportRow::check(
            &format!("G.semigroup.inversion_vs_stepping_tau_{tau}"),
            "stable-subspace datum",
            rel,
            "<= 1e-3 relative L2",
            rel <= 1e-3,
        ));
    }

    // free case (V = 0): inversion and stepping against the rescaled
    // physical free wave of globally defined data
    let free = PotentialSpec::zero();
    let shape1 = PerturbationShape::random(&mut rng, 3.0, 6);
    let win = |r: f64| (-(r * r)).exp();
    let f1 = {
        let s = shape1.clone();
        move |r: f64| s.eval1(r.min(2.9)) * win(r)
    };
    let f2 = {
        let s = shape1;
        move |r: f64| s.eval2(r.min(2.9)) * win(r)
    };
    let data = StatePair::new(
        RadialField::from_real_fn(&grid, &f1),
        RadialField::from_real_fn(&grid, &f2),
    );
    let taus = [0.5, 1.0];
    let inv_free = laplace_invert_multi(&data, &taus, contour, &free)?;
    let traj_free = linear_evolve(&data, 1.0, None, &free);
    let mut fd = FreeWaveSolver::new(&f1, &f2, 3.0, 3000);
    for (k, &tau) in taus.iter().enumerate() {
        let t_phys = 1.0 - (-tau).exp();
        fd.advance_to(t_phys);
        let scale = (-1.5 * tau).exp();
        let phys = RadialField::from_real_fn(&grid, |rho| {
            scale * fd.sample_u((-tau).exp() * rho)
        });
        let rel_inv = (norm_l2_sq(&inv_free[k].sub(&phys)) / norm_l2_sq(&phys)).sqrt();
        rows.push(ReportRow::check(
            &format!("G.semigroup.free_inversion_vs_physical_tau_{tau}"),
            "V=0, extended data",
            rel_inv,
            "<= 1e-3 relative L2",
            rel_inv <= 1e-3,
        ));
        let (idx, _) = traj_free
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - tau).abs().partial_cmp(&(b.1 - tau).abs()).unwrap())
            .unwrap();
        let rel_step =
            (norm_l2_sq(&traj_free.states[idx].first.sub(&phys)) / norm_l2_sq(&phys)).sqrt();
        rows.push(ReportRow::check(
            &format!("G.semigroup.free_stepping_vs_physical_tau_{tau}"),
            "V=0, extended data",
            rel_step,
            "<= 1e-3 relative L2",
            rel_step <= 1e-3,
        ));
    }
    Ok(rows)
}

pub fn criterion_h_improved_energy(cfg: &RunConfig) -> Result<Vec<ReportRow>> {
    let grid = RadialGrid::new(cfg.grid_order);
    let pot = PotentialSpec::linearization();
    let proj = riesz_setup(&grid, &pot)?;
    let mut rng = CounterRng::new(cfg.seed).stream("improved-energy");
    let mut worst_slope = f64::NEG_INFINITY;
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..20 {
        let f = proj.apply_q(&random_band_limited(&grid, &mut rng, 8));
        let traj = linear_evolve(&f, 10.0, None, &pot);
        if traj.meta.aborted {
            worst_ratio = f64::INFINITY;
            break;
        }
        let h0 = traj.h_norms[0];
        worst_ratio = worst_ratio.max(traj.sup_h_norm() / h0);
        let logs: Vec<f64> = traj.h_norms.iter().map(|v| v.ln()).collect();
        worst_slope = worst_slope.max(fit_slope(&traj.scalar_times, &logs));
    }
    Ok(vec![
        ReportRow::check(
            "H.energy.growth_slope",
            "20 stable-subspace data, tau in [0,10]",
            worst_slope,
            "<= 0.01",
            worst_slope <= 0.01,
        ),
        ReportRow::check(
            "H.energy.sup_ratio",
            "same sample",
            worst_ratio,
            "<= 5",
            worst_ratio <= 5.0,
        ),
    ])
}

pub fn criterion_l_norm_machinery(cfg: &RunConfig) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    // norm-equivalence envelope stable under refinement
    let g64 = RadialGrid::new(cfg.grid_order);
    let g128 = RadialGrid::new(cfg.grid_order * 2);
    let mut env = Vec::new();
    for grid in [&g64, &g128] {
        let mut rng = CounterRng::new(cfg.seed).stream("envelope-corpus");
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for _ in 0..50 {
            let f = random_band_limited(grid, &mut rng, 8);
            let e = inner_energy(&f, &f)?.re;
            let h = norm_state_h(&f).powi(2);
            let ratio = e / h;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        env.push((lo, hi));
    }
    let drift_lo = (env[1].0 / env[0].0 - 1.0).abs();
    let drift_hi = (env[1].1 / env[0].1 - 1.0).abs();
    rows.push(ReportRow::check(
        "L.norms.envelope_drift",
        &format!(
            "ratio E/H^2 in [{:.4},{:.4}] at order {}, [{:.4},{:.4}] at {}",
            env[0].0,
            env[0].1,
            cfg.grid_order,
            env[1].0,
            env[1].1,
            cfg.grid_order * 2
        ),
        drift_lo.max(drift_hi),
        "< 5% under order doubling",
        drift_lo.max(drift_hi) < 0.05,
    ));

    // weighted-norm inequalities over the corpus
    let mut rng = CounterRng::new(cfg.seed).stream("weighted-corpus");
    let mut max_l2: f64 = 0.0;
    let mut max_l5: f64 = 0.0;
    for _ in 0..50 {
        let f = random_band_limited(&g64, &mut rng, 8).first;
        let rep = weighted_norm_inequalities(&f);
        max_l2 = max_l2.max(rep.ratio_l2);
        max_l5 = max_l5.max(rep.ratio_l5);
    }
    rows.push(ReportRow::check(
        "L.norms.weighted_l2_ratio",
        "50 band-limited fields",
        max_l2,
        "finite",
        max_l2.is_finite(),
    ));
    rows.push(ReportRow::check(
        "L.norms.weighted_l5_ratio",
        "50 band-limited fields",
        max_l5,
        "finite",
        max_l5.is_finite(),
    ));
    // rough near-extremal probe
    let rough = RadialField::from_real_fn(&g64, |r| r.powf(-0.25));
    let rep = weighted_norm_inequalities(&rough);
    rows.push(ReportRow::info(
        "L.norms.near_extremal_probe",
        "f = r^{-1/4}",
        rep.ratio_l2.max(rep.ratio_l5),
        "finite at fixed grid; near-extremal",
    ));

    // change-of-variables identity between the cylinder and the cone
    let cov = change_of_variables_defect();
    rows.push(ReportRow::check(
        "L.norms.change_of_variables",
        "synthetic cylinder field, tau_max = 3",
        cov,
        "<= 1e-8 relative",
        cov <= 1e-8,
    ));

    // quadrature exactness for monomials
    let mut worst: f64 = 0.0;
    for (k, q) in [(1usize, 2.0), (2, 2.0), (3, 5.0), (1, 5.0)] {
        let f = RadialField::from_real_fn(&g64, |r| r.powi(k as i32));
        for &r_hi in &[1.0, 0.5] {
            let v = norm_lq(&f, q, r_hi)?;
            let exact = (r_hi.powf(k as f64 * q + 5.0) / (k as f64 * q + 5.0)).powf(1.0 / q);
            worst = worst.max((v - exact).abs() / exact);
        }
    }
    rows.push(ReportRow::check(
        "L.norms.quadrature_exactness",
        "monomials r^k, q in {2,5}, R in {1/2,1}",
        worst,
        "<= 1e-12",
        worst <= 1e-12,
    ));
    Ok(rows)
}

/// Cylinder-vs-cone identity defect for a synthetic smooth field:
/// int_0^{tau_max} ||psi_1(tau) - c5||^2_{L^5(B^5)} d tau computed on the
/// cylinder must match the physical cone integral after the change of
/// variables (both by independent quadratures).
pub fn change_of_variables_defect() -> f64 {
    let tau_max = 3.0;
    let t_blowup = 1.0;
    let psi1 =
        |tau: f64, rho: f64| C5 + (-tau).exp() * 0.1 * (rho * rho - 0.3) * (1.0 + 0.5 * tau).cos();
    // cylinder side: Gauss panels in tau, radial panels for the L^5 norm
    let l5_sq = |tau: f64| {
        let mut acc = 0.0;
        for p in 0..12 {
            let a = p as f64 / 12.0;
            let b = (p + 1) as f64 / 12.0;
            acc += gauss_panel(
                |rho| C::new((psi1(tau, rho) - C5).abs().powi(5) * rho.powi(4), 0.0),
                a,
                b,
                12,
            )
            .re;
        }
        acc.powf(0.4)
    };
    let mut cyl = 0.0;
    for p in 0..24 {
        let a = tau_max * p as f64 / 24.0;
        let b = tau_max * (p + 1) as f64 / 24.0;
        cyl += gauss_panel(|tau| C::new(l5_sq(tau), 0.0), a, b, 12).re;
    }
    // physical side: u(t, r) = (T-t)^{-3/2} psi_1(tau(t), r/(T-t))
    let t_end = t_blowup * (1.0 - (-tau_max).exp());
    let phys_norm_sq = |t: f64| {
        let mu = t_blowup - t;
        let tau = (t_blowup / mu).ln();
        let mut acc = 0.0;
        for p in 0..12 {
            let a = mu * p as f64 / 12.0;
            let b = mu * (p + 1) as f64 / 12.0;
            acc += gauss_panel(
                |r| {
                    let u = mu.powf(-1.5) * psi1(tau, r / mu);
                    let ut = C5 * mu.powf(-1.5);
                    C::new((u - ut).abs().powi(5) * r.powi(4), 0.0)
                },
                a,
                b,
                12,
            )
            .re;
        }
        acc.powf(0.4)
    };
    let mut phys = 0.0;
    for p in 0..32 {
        let a = t_end * p as f64 / 32.0;
        let b = t_end * (p + 1) as f64 / 32.0;
        phys += gauss_panel(|t| C::new(phys_norm_sq(t), 0.0), a, b, 12).re;
    }
    (cyl - phys).abs() / cyl.abs().max(1e-300)
}

// ---------------------------------------------------------------------------
// kernel-bounds (criterion I)
// ---------------------------------------------------------------------------

pub fn suite_kernel_bounds(cfg: &RunConfig) -> Result<Vec<ReportRow>> {
    let sec = "kernel-bounds";
    let omega_max = cfg.get_f64(sec, "omega-max", 160.0)?;
    let d_omega = cfg.get_f64(sec, "d-omega", 0.08)?;
    let pot = PotentialSpec::linearization();
    let grid = RadialGrid::new(cfg.grid_order.min(48));
    let taus = [0.5, 1.0, 2.0, 4.0];
    let ss = [0.1, 0.5, 0.9];

    let coarse = kernel_cache(omega_max, d_omega, &pot)?;
    let fine = kernel_cache(omega_max, d_omega / 2.0, &pot)?;

    let mut max_ratio: f64 = 0.0;
    let mut max_change: f64 = 0.0;
    let mut all_finite = true;
    let mut norms_s05 = vec![Vec::new(); 7];
    for n in 1..=6 {
        for &tau in &taus {
            for &s in &ss {
                let r1 = kernel_bound_ratio(&coarse, n, tau, s, &grid)?;
                let r2 = kernel_bound_ratio(&fine, n, tau, s, &grid)?;
                all_finite &= r1.is_finite() && r2.is_finite();
                max_ratio = max_ratio.max(r2);
                if r2.abs() > 1e-12 {
                    max_change = max_change.max((r1 - r2).abs() / r2.abs());
                }
                if (s - 0.5).abs() < 1e-12 && tau >= 1.0 {
                    // un-normalized kernel norm for the decay fit
                    norms_s05[n]
                        .push((tau, r2 * crate::semigroup::kernel_bound_reference(tau, s)));
                }
            }
        }
    }
    let mut rows = vec![
        ReportRow::check(
            "I.kernels.ratios_finite",
            "n in 1..6, tau in {0.5,1,2,4}, s in {0.1,0.5,0.9}",
            max_ratio,
            "all finite; max recorded",
            all_finite,
        ),
        ReportRow::check(
            "I.kernels.refinement_change",
            "omega-step halved",
            max_change,
            "< 1%",
            max_change < 0.01,
        ),
    ];
    let mut worst_fit = f64::NEG_INFINITY;
    for n in 1..=6 {
        let pts = &norms_s05[n];
        let x: Vec<f64> = pts.iter().map(|(t, _)| t.ln()).collect();
        let y: Vec<f64> = pts.iter().map(|(_, v)| v.max(1e-300).ln()).collect();
        worst_fit = worst_fit.max(fit_slope(&x, &y));
    }
    rows.push(ReportRow::check(
        "I.kernels.tau_decay_fit",
        "s = 0.5, tau in {1,2,4}, worst piece",
        worst_fit,
        "<= -1",
        worst_fit <= -1.0,
    ));
    Ok(rows)
}

// ---------------------------------------------------------------------------
// osc-check (criterion J)
// ---------------------------------------------------------------------------

pub fn suite_osc_check(_cfg: &RunConfig) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    let a_grid: Vec<f64> = (0..13).map(|k| 10f64.powf(-2.0 + 4.0 * k as f64 / 12.0)).collect();
    let families: [(&str, SymbolFamily); 7] = [
        ("odd_rational_squared", SymbolFamily::OddRationalSquared),
        ("odd_rational", SymbolFamily::OddRational),
        ("even_alpha_0.3", SymbolFamily::EvenAlpha(0.3)),
        ("even_alpha_0.9", SymbolFamily::EvenAlpha(0.9)),
        ("cutoff_n1", SymbolFamily::CutoffWeighted(1)),
        ("cutoff_n2", SymbolFamily::CutoffWeighted(2)),
        ("cutoff_critical_n2", SymbolFamily::CutoffWeightedCritical(2)),
    ];
    for (name, fam) in families {
        let mut max_ratio: f64 = 0.0;
        for &a in &a_grid {
            let r = osc_decay_check(fam, a)?;
            max_ratio = max_ratio.max(r);
        }
        rows.push(ReportRow::check(
            &format!("J.osc.bounded_{name}"),
            "a in [1e-2, 1e2] log grid",
            max_ratio,
            "bounded (finite)",
            max_ratio.is_finite() && max_ratio < 1e3,
        ));
    }
    // small-a exponent of the even-symbol family
    for alpha in [0.3, 0.9] {
        let a_small = [0.01, 0.021544346900318832, 0.046415888336127774, 0.1];
        let mut x = Vec::new();
        let mut y = Vec::new();
        for &a in &a_small {
            let ratio = osc_decay_check(SymbolFamily::EvenAlpha(alpha), a)?;
            let integral = ratio * a.powf(-1.0 + alpha) * bracket(a).powi(-2);
            x.push(a.ln());
            y.push(integral.ln());
        }
        let slope = fit_slope(&x, &y);
        rows.push(ReportRow::check(
            &format!("J.osc.small_a_exponent_alpha_{alpha}"),
            "fit over a in [1e-2, 1e-1]",
            slope,
            &format!("{} +- 0.03", -(1.0 - alpha)),
            (slope + (1.0 - alpha)).abs() <= 0.03,
        ));
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// stability-sweep (criterion K)
// ---------------------------------------------------------------------------

pub struct SweepPoint {
    pub delta: f64,
    pub t_star: f64,
    pub strichartz: f64,
    pub sup_ratio: f64,
    pub converged: bool,
}

pub fn stability_sweep_points(cfg: &RunConfig) -> Result<(Vec<SweepPoint>, Vec<ReportRow>)> {
    let sec = "stability-sweep";
    let deltas = cfg.get_f64_list(sec, "delta", &[2e-2, 1e-2, 5e-3])?;
    let tau_max = cfg.get_f64(sec, "tau-max", 10.0)?;
    let lab = StabilityLab::new(cfg.grid_order, None)?;
    let mut rng = CounterRng::new(cfg.seed).stream("stability-shape");
    let base = PerturbationShape::random(&mut rng, 1.1, 8).normalized();
    let mut points = Vec::new();
    let mut rows = Vec::new();
    let mut tuned_1e2 = None;
    for &delta in &deltas {
        let cfg_e = ExperimentConfig {
            amplitude: delta,
            tau_max,
            grid_order: cfg.grid_order,
            ..Default::default()
        };
        let shape = base.scale(delta);
        let (t_star, report, traj) = lab.tune_blowup_time(&cfg_e, &shape)?;
        let h0 = traj.h_norms[0].max(1e-300);
        let sup_ratio = report.sup_h_norm / h0;
        rows.push(ReportRow::check(
            &format!("K.stability.t_star_delta_{delta:e}"),
            "tuned blowup time",
            t_star,
            "in [0.9, 1.1], converged",
            report.converged && (0.9..=1.1).contains(&t_star),
        ));
        rows.push(ReportRow::info(
            &format!("K.stability.strichartz_delta_{delta:e}"),
            "space-time diagnostic of the tuned run",
            report.strichartz_integral,
            "recorded",
        ));
        rows.push(ReportRow::check(
            &format!("K.stability.boundedness_delta_{delta:e}"),
            "sup H-norm over initial",
            sup_ratio,
            "<= 5",
            sup_ratio <= 5.0,
        ));
        if (delta - 1e-2).abs() < 1e-12 {
            tuned_1e2 = Some((t_star, shape.clone()));
            let init = initial_from_physical(&shape, t_star, cfg_e.t_window, &lab.grid)?;
            let (cnorm, tail) = correction_norm(&traj, &init, &lab.proj);
            rows.push(ReportRow::check(
                "K.stability.correction_norm",
                &format!("tuned run at delta=1e-2 (tail bound {tail:.1e})"),
                cnorm,
                "< 1e-4",
                cnorm < 1e-4,
            ));
            // averaged decay of the integrand
            let total = strichartz_diagnostic(&traj);
            let half = traj.scalar_times.last().unwrap() / 2.0;
            let mut tail_mass = 0.0;
            for k in 1..traj.scalar_times.len() {
                if traj.scalar_times[k] >= half {
                    tail_mass += 0.5
                        * (traj.scalar_times[k] - traj.scalar_times[k - 1])
                        * (traj.l5_norms[k].powi(2) + traj.l5_norms[k - 1].powi(2));
                }
            }
            rows.push(ReportRow::check(
                "K.stability.tail_mass_fraction",
                "upper-half tau mass of the L5 integrand",
                tail_mass / total.max(1e-300),
                "<= 0.5",
                tail_mass <= 0.5 * total,
            ));
        }
        points.push(SweepPoint {
            delta,
            t_star,
            strichartz: report.strichartz_integral,
            sup_ratio,
            converged: report.converged,
        });
    }
    // quadratic smallness between consecutive deltas
    for w in points.windows(2) {
        let ratio = w[0].strichartz / w[1].strichartz.max(1e-300);
        let expect = (w[0].delta / w[1].delta).powi(2);
        rows.push(ReportRow::check(
            &format!("K.stability.ratio_{:e}_over_{:e}", w[0].delta, w[1].delta),
            &format!("theoretical {expect}"),
            ratio,
            "in [2.5, 6]",
            (2.5..=6.0).contains(&ratio),
        ));
    }
    // constancy of the quadratic constant
    let consts: Vec<f64> = points.iter().map(|p| p.strichartz / (p.delta * p.delta)).collect();
    let cmid = consts[consts.len() / 2];
    let cdrift = consts.iter().map(|c| (c / cmid - 1.0).abs()).fold(0.0, f64::max);
    rows.push(ReportRow::check(
        "K.stability.quadratic_constant_drift",
        &format!("C(delta) over {deltas:?}"),
        cdrift,
        "<= 30% around the middle delta",
        cdrift <= 0.3,
    ));

    // de-tuned runs grow a much larger terminal projection coefficient
    if let Some((t_star, shape)) = tuned_1e2 {
        let cfg_e = ExperimentConfig {
            amplitude: 1e-2,
            tau_max,
            grid_order: cfg.grid_order,
            ..Default::default()
        };
        let tuned = lab.detuned_coefficient(&cfg_e, &shape, t_star, 5.0)?;
        let minus = lab.detuned_coefficient(&cfg_e, &shape, t_star - 0.02, 5.0)?;
        let plus = lab.detuned_coefficient(&cfg_e, &shape, t_star + 0.02, 5.0)?;
        let ratio = minus.min(plus) / tuned.max(1e-300);
        rows.push(ReportRow::check(
            "K.stability.detuned_projection_ratio",
            "T* +- 0.02 vs tuned at tau = 5",
            ratio,
            ">= 10",
            ratio >= 10.0,
        ));
    }
    Ok((points, rows))
}

pub fn suite_stability_sweep(cfg: &RunConfig) -> Result<Vec<ReportRow>> {
    Ok(stability_sweep_points(cfg)?.1)
}

/// Four-column summary of the sweep (delta, T*, diagnostic, ratio to the
/// next smaller delta).
pub fn sweep_summary_csv(points: &[SweepPoint]) -> String {
    let mut s = String::from("delta,T_star,strichartz_integral,ratio\r\n");
    for (i, p) in points.iter().enumerate() {
        let ratio = if i + 1 < points.len() {
            super::manifest::fmt_f64(p.strichartz / points[i + 1].strichartz.max(1e-300))
        } else {
            String::new()
        };
        let _ = write!(
            s,
            "{},{},{},{}\r\n",
            super::manifest::fmt_f64(p.delta),
            super::manifest::fmt_f64(p.t_star),
            super::manifest::fmt_f64(p.strichartz),
            ratio
        );
    }
    s
}

// ---------------------------------------------------------------------------
// orchestration
// ---------------------------------------------------------------------------

pub fn run_suite(name: &str, cfg: &RunConfig) -> Result<Vec<ReportRow>> {
    match name {
        "spectrum-scan" => suite_spectrum_scan(cfg),
        "green-verify" => suite_green_verify(cfg),
        "semigroup-verify" => suite_semigroup_verify(cfg),
        "kernel-bounds" => suite_kernel_bounds(cfg),
        "osc-check" => suite_osc_check(cfg),
        "stability-sweep" => suite_stability_sweep(cfg),
        other => Err(Error::Config(format!("unknown suite {other}"))),
    }
}

/// Execute the configured suites and write `<out>/manifest.json`,
/// `<out>/<suite>.csv` (plus the stability-sweep summary), and a timing
/// sidecar. Returns the manifest.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunManifest> {
    let out = Path::new(&cfg.out_dir);
    std::fs::create_dir_all(out).map_err(|e| Error::Io {
        path: cfg.out_dir.clone(),
        msg: e.to_string(),
    })?;
    let suites = cfg.resolved_suites();
    let mut manifest = RunManifest::new(
        cfg.seed,
        vec![cfg.grid_order as u64, (cfg.grid_order * 2) as u64],
        suites.clone(),
    );
    manifest.config_snapshot = cfg.snapshot();
    let mut timings = Vec::new();
    for suite in &suites {
        let t0 = std::time::Instant::now();
        let rows = if suite == "stability-sweep" {
            let (points, rows) = stability_sweep_points(cfg)?;
            write_atomic(
                &out.join("stability-sweep-summary.csv"),
                &sweep_summary_csv(&points),
            )?;
            rows
        } else {
            run_suite(suite, cfg)?
        };
        timings.push((suite.clone(), t0.elapsed().as_secs_f64()));
        let mut sorted = rows.clone();
        sorted.sort_by(|a, b| a.id.cmp(&b.id).then(a.inputs.cmp(&b.inputs)));
        write_atomic(&out.join(format!("{suite}.csv")), &rows_to_csv(&sorted))?;
        manifest.rows.extend(rows);
    }
    manifest.sort_rows();
    write_atomic(&out.join("manifest.json"), &manifest_to_json(&manifest))?;
    // wall-clock sidecar (non-deterministic, deliberately outside the manifest)
    let mut t = String::from("suite,seconds\r\n");
    for (name, secs) in &timings {
        let _ = write!(t, "{name},{secs:.3}\r\n");
    }
    write_atomic(&out.join("timing.csv"), &t)?;
    Ok(manifest)
}
