use conelab_core::coords::norm_l2_sq;
use conelab_core::grid::RadialGrid;
use conelab_core::green::{resolvent_apply, bvp_solve_direct, resolvent_rhs, resolvent_apply_with, GreenKernel, CutoffSpec};
use conelab_core::harness::suites::random_band_limited;
use conelab_core::rng::CounterRng;
use conelab_core::semigroup::riesz_setup;
use conelab_core::specfun::SpectralParameter;
use conelab_core::volterra::PotentialSpec;
use std::time::Instant;

fn main() {
    let grid = RadialGrid::new(48);
    let pot = PotentialSpec::linearization();
    let proj = riesz_setup(&grid, &pot).unwrap();
    let mut rng = CounterRng::new(3).stream("laplace");
    let f = proj.apply_q(&random_band_limited(&grid, &mut rng, 8));
    // compare green resolvent vs bvp across omega
    for om in [3.0, 10.0, 19.0, 21.0, 40.0, 100.0, 200.0] {
        let lam = SpectralParameter::new(0.05, om);
        let t0 = Instant::now();
        let kernel = GreenKernel::build(lam, &pot, CutoffSpec::default()).unwrap();
        let rhs = resolvent_rhs(&f, lam);
        let via_green = resolvent_apply_with(&kernel, &rhs, &grid.nodes);
        let dt = t0.elapsed();
        let via_bvp = bvp_solve_direct(&f, lam, &pot).unwrap();
        let mut diff = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..grid.len() {
            diff += (via_green[i] - via_bvp.values[i]).norm_sqr() * grid.weights[i] * grid.nodes[i].powi(4);
            scale += via_bvp.values[i].norm_sqr() * grid.weights[i] * grid.nodes[i].powi(4);
        }
        println!("omega={om}: rel diff {:.3e}, time {:?}", (diff/scale).sqrt(), dt);
    }
    let _ = (norm_l2_sq(&f.first), resolvent_apply);
}
