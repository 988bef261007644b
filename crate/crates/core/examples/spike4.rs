use conelab_core::grid::RadialGrid;
use conelab_core::green::{bvp_solve_direct, resolvent_rhs, GreenKernel, CutoffSpec};
use conelab_core::harness::suites::random_band_limited;
use conelab_core::oscquad::cumulative_split;
use conelab_core::rng::CounterRng;
use conelab_core::semigroup::riesz_setup;
use conelab_core::specfun::SpectralParameter;
use conelab_core::volterra::PotentialSpec;
use num_complex::Complex64 as C;

fn main() {
    let grid = RadialGrid::new(48);
    let pot = PotentialSpec::linearization();
    let proj = riesz_setup(&grid, &pot).unwrap();
    let mut rng = CounterRng::new(3).stream("laplace");
    let f = proj.apply_q(&random_band_limited(&grid, &mut rng, 8));
    for om in [3.0f64, 10.0, 40.0] {
        let lam = SpectralParameter::new(0.05, om);
        let l = lam.as_c();
        let kernel = GreenKernel::build(lam, &pot, CutoffSpec::default()).unwrap();
        let rhs = resolvent_rhs(&f, lam);
        let pair = &kernel.pair;
        // fully brute path with plain integrands (reference)
        let f1v = |s: f64| rhs.f1.at(s);
        let df1 = |s: f64| rhs.df1.at(s);
        let f2v = |s: f64| rhs.f2.at(s);
        let fval = |s: f64| (l + 2.5) * f1v(s) + df1(s) * s + f2v(s);
        let den = (C::new(3.0,0.0) - l*2.0) * (C::new(1.0,0.0) + l*2.0) * (C::new(1.0,0.0) - l*2.0);
        let cg = |s: f64| (C::new((1.0 - s*s).ln(), 0.0) * (l - 0.5)).exp() * s.powi(4) / den / pair.w0;
        let r = cumulative_split(
            &grid.nodes,
            om,
            33.0,
            12,
            |s| cg(s) * pair.u0(s) * fval(s),
            |s| cg(s) * pair.u1(s) * fval(s),
        );
        let brute: Vec<C> = grid.nodes.iter().enumerate()
            .map(|(i, &rho)| pair.u1(rho) * r.inner[i] + pair.u0(rho) * r.outer[i]).collect();
        let comp = conelab_core::green::resolvent_apply_with(&kernel, &rhs, &grid.nodes);
        let bvp = bvp_solve_direct(&f, lam, &pot).unwrap();
        let rel = |a: &Vec<C>| {
            let mut d = 0.0; let mut s2 = 0.0;
            for i in 0..grid.len() {
                let w = grid.weights[i] * grid.nodes[i].powi(4);
                d += (a[i] - bvp.values[i]).norm_sqr() * w;
                s2 += bvp.values[i].norm_sqr() * w;
            }
            (d / s2).sqrt()
        };
        println!("omega={om}: brute rel {:.3e} ({} panels), component rel {:.3e}", rel(&brute), r.panels_used, rel(&comp));
    }
}
