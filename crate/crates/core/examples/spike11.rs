use conelab_core::grid::RadialGrid;
use conelab_core::green::{bvp_solve_direct, resolvent_rhs, GreenKernel, CutoffSpec};
use conelab_core::harness::suites::random_band_limited;
use conelab_core::quad::adaptive_gauss;
use conelab_core::rng::CounterRng;
use conelab_core::semigroup::riesz_setup;
use conelab_core::specfun::{psi0, SpectralParameter};
use conelab_core::volterra::{build_v0, PotentialSpec, DELTA0_DEFAULT};
use num_complex::Complex64 as C;

fn main() {
    // accuracy of the v0~ integral table in the free case
    let lam = SpectralParameter::new(0.12, 1.7);
    let l = lam.as_c();
    let v0 = build_v0(lam, &PotentialSpec::zero(), DELTA0_DEFAULT).unwrap();
    let rm = v0.rho_match;
    for frac in [0.2, 0.5, 0.8, 0.95] {
        let r = rm * frac;
        let got = v0.v_tilde(r);
        let iex = adaptive_gauss(&|s: f64| {
            let p = psi0(s, l);
            C::new(1.0, 0.0) / (p * p)
        }, r, rm, 1e-13);
        let want = psi0(r, l) * iex;
        println!("v0~({r:.4}): rel dev {:.3e}", (got - want).norm() / want.norm());
    }
    // bvp self-convergence at high omega
    let pot = PotentialSpec::linearization();
    for om in [100.0, 200.0] {
        let lam = SpectralParameter::new(0.05, om);
        let g48 = RadialGrid::new(48);
        let g96 = RadialGrid::new(96);
        let mut rng = CounterRng::new(3).stream("laplace");
        let proj = riesz_setup(&g48, &pot).unwrap();
        let f48 = proj.apply_q(&random_band_limited(&g48, &mut rng, 8));
        // same analytic state on the finer grid
        let mut rng2 = CounterRng::new(3).stream("laplace");
        let shape = conelab_core::evolve::PerturbationShape::random(&mut rng2, 1.0, 8);
        let raw96 = shape.as_state(&g96);
        // project with the coarse projector coefficient (same functional value)
        let coef = proj.coefficient(&raw96.clone_to(&g48));
        let f96 = raw96.sub(&proj.g.clone_to(&g96).scale(coef));
        let b48 = bvp_solve_direct(&f48, lam, &pot).unwrap();
        let b96 = bvp_solve_direct(&f96, lam, &pot).unwrap();
        let kernel = GreenKernel::build(lam, &pot, CutoffSpec::default()).unwrap();
        let rhs96 = resolvent_rhs(&f96, lam);
        let green96 = conelab_core::green::resolvent_apply_with(&kernel, &rhs96, &g96.nodes);
        let mut d48 = 0.0; let mut dg = 0.0; let mut s2 = 0.0;
        for (i, &r) in g96.nodes.iter().enumerate() {
            let w = g96.weights[i] * r.powi(4);
            let ref96 = b96.values[i];
            d48 += (b48.at(r) - ref96).norm_sqr() * w;
            dg += (green96[i] - ref96).norm_sqr() * w;
            s2 += ref96.norm_sqr() * w;
        }
        println!("om={om}: bvp48 vs bvp96 rel {:.3e}; green(96-grid) vs bvp96 rel {:.3e}",
                 (d48/s2).sqrt(), (dg/s2).sqrt());
    }
}
