use conelab_core::grid::RadialGrid;
use conelab_core::green::{bvp_solve_direct, resolvent_rhs, GreenKernel, CutoffSpec};
use conelab_core::harness::suites::random_band_limited;
use conelab_core::oscquad::{cumulative_components, Component};
use conelab_core::rng::CounterRng;
use conelab_core::semigroup::riesz_setup;
use conelab_core::specfun::{SpectralParameter, ONE};
use conelab_core::volterra::PotentialSpec;
use num_complex::Complex64 as C;

fn main() {
    let grid = RadialGrid::new(48);
    let pot = PotentialSpec::linearization();
    let proj = riesz_setup(&grid, &pot).unwrap();
    let mut rng = CounterRng::new(3).stream("laplace");
    let f = proj.apply_q(&random_band_limited(&grid, &mut rng, 8));
    for om in [40.0, 100.0, 200.0] {
        let lam = SpectralParameter::new(0.05, om);
        let l = lam.as_c();
        let kernel = GreenKernel::build(lam, &pot, CutoffSpec::default()).unwrap();
        let pair = &kernel.pair;
        let rhs = resolvent_rhs(&f, lam);
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
        // current component path (with IBP since om > 20)
        let with_ibp = conelab_core::green::resolvent_apply_with(&kernel, &rhs, &grid.nodes);
        // non-IBP component path, hand-rolled here
        let rho_m = pair.rho_match;
        let w0 = pair.w0;
        let den = (C::new(3.0,0.0) - l*2.0) * (ONE + l*2.0) * (ONE - l*2.0);
        let cg = move |s: f64| (C::new((1.0 - s*s).ln(), 0.0) * (l - 0.5)).exp() * s.powi(4) / den / w0;
        let f1v = |s: f64| rhs.f1.at(s);
        let df1 = |s: f64| rhs.df1.at(s);
        let f2v = |s: f64| rhs.f2.at(s);
        let fval = move |s: f64| (l + 2.5) * f1v(s) + df1(s) * s + f2v(s);
        let eyw = move |s: f64| C::new(0.0, -om * (1.0 - s).ln()).exp();
        let zero = C::new(0.0, 0.0);
        let inner: Vec<Component> = vec![
            Component { carrier: 0.0, slow: Box::new(move |s| if s <= rho_m { cg(s) * pair.u0(s) * fval(s) } else { zero }) },
            Component { carrier: -om, slow: Box::new(move |s| if s > rho_m { cg(s) * pair.con_a * pair.u1_with_deriv(s).0 * fval(s) * eyw(s) } else { zero }) },
            Component { carrier: 0.0, slow: Box::new(move |s| if s > rho_m { cg(s) * pair.con_b * pair.u1t_with_deriv(s).0 * fval(s) } else { zero }) },
        ];
        let outer: Vec<Component> = vec![
            Component { carrier: 0.0, slow: Box::new(move |s| if s < rho_m { cg(s) * pair.u1(s) * fval(s) } else { zero }) },
            Component { carrier: -om, slow: Box::new(move |s| if s >= rho_m { cg(s) * pair.u1_with_deriv(s).0 * fval(s) * eyw(s) } else { zero }) },
        ];
        let mut tp: Vec<f64> = grid.nodes.clone();
        tp.push(rho_m);
        tp.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let r = cumulative_components(&tp, om, 33.0, 12, &inner, &outer);
        let mut no_ibp = Vec::new();
        let mut j = 0;
        for &t in &grid.nodes {
            while (tp[j] - t).abs() > 1e-15 { j += 1; }
            no_ibp.push(pair.u1(t) * r.inner[j] + pair.u0(t) * r.outer[j]);
        }
        println!("om={om}: with IBP rel {:.3e}, without IBP rel {:.3e}", rel(&with_ibp), rel(&no_ibp));
    }
}
