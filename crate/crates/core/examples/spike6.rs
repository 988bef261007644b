use conelab_core::grid::RadialGrid;
use conelab_core::green::{bvp_solve_direct, resolvent_rhs, GreenKernel, CutoffSpec};
use conelab_core::harness::suites::random_band_limited;
use conelab_core::oscquad::cumulative_split;
use conelab_core::rng::CounterRng;
use conelab_core::semigroup::riesz_setup;
use conelab_core::specfun::SpectralParameter;
use conelab_core::volterra::PotentialSpec;
use num_complex::Complex64 as C;

fn rel_err(grid: &std::sync::Arc<RadialGrid>, a: &[C], b: &[C]) -> f64 {
    let mut d = 0.0;
    let mut s2 = 0.0;
    for i in 0..grid.len() {
        let w = grid.weights[i] * grid.nodes[i].powi(4);
        d += (a[i] - b[i]).norm_sqr() * w;
        s2 += b[i].norm_sqr() * w;
    }
    (d / s2).sqrt()
}

fn main() {
    let grid = RadialGrid::new(48);
    let pot = PotentialSpec::linearization();
    let proj = riesz_setup(&grid, &pot).unwrap();
    let mut rng = CounterRng::new(3).stream("laplace");
    let f = proj.apply_q(&random_band_limited(&grid, &mut rng, 8));
    for (eps, om) in [(0.5, 3.0), (0.2, 3.0), (0.05, 3.0), (0.05, 0.5), (0.5, 10.0), (0.05, 10.0)] {
        let lam = SpectralParameter::new(eps, om);
        let l = lam.as_c();
        let kernel = GreenKernel::build(lam, &pot, CutoffSpec::default()).unwrap();
        let rhs = resolvent_rhs(&f, lam);
        let pair = &kernel.pair;
        let f1v = |s: f64| rhs.f1.at(s);
        let df1 = |s: f64| rhs.df1.at(s);
        let f2v = |s: f64| rhs.f2.at(s);
        let fval = |s: f64| (l + 2.5) * f1v(s) + df1(s) * s + f2v(s);
        let den = (C::new(3.0,0.0) - l*2.0) * (C::new(1.0,0.0) + l*2.0) * (C::new(1.0,0.0) - l*2.0);
        let cg = |s: f64| (C::new((1.0 - s*s).ln(), 0.0) * (l - 0.5)).exp() * s.powi(4) / den / pair.w0;
        let bvp = bvp_solve_direct(&f, lam, &pot).unwrap();
        for pts in [12usize, 20] {
            let r = cumulative_split(&grid.nodes, om, 33.0, pts,
                |s| cg(s) * pair.u0(s) * fval(s),
                |s| cg(s) * pair.u1(s) * fval(s));
            let brute: Vec<C> = grid.nodes.iter().enumerate()
                .map(|(i, &rho)| pair.u1(rho) * r.inner[i] + pair.u0(rho) * r.outer[i]).collect();
            println!("eps={eps} om={om} pts={pts}: rel {:.3e}", rel_err(&grid, &brute, &bvp.values));
        }
        // piecewise error profile: where is it largest?
        let r = cumulative_split(&grid.nodes, om, 33.0, 12,
            |s| cg(s) * pair.u0(s) * fval(s),
            |s| cg(s) * pair.u1(s) * fval(s));
        let mut worst = (0.0f64, 0.0f64);
        for (i, &rho) in grid.nodes.iter().enumerate() {
            let v = pair.u1(rho) * r.inner[i] + pair.u0(rho) * r.outer[i];
            let e = (v - bvp.values[i]).norm() / bvp.values[i].norm().max(1e-12);
            if e > worst.1 { worst = (rho, e); }
        }
        println!("   worst pointwise at rho={:.4}: {:.3e}", worst.0, worst.1);
    }
}
