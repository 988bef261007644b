use conelab_core::grid::RadialGrid;
use conelab_core::semigroup::generator_matrix;
use conelab_core::specfun::SpectralParameter;
use conelab_core::volterra::{build_u_pair, PotentialSpec};
use std::time::Instant;

fn main() {
    for order in [32usize, 48, 64] {
        let grid = RadialGrid::new(order);
        let pot = PotentialSpec::linearization();
        let l = generator_matrix(&grid, &pot);
        let t0 = Instant::now();
        let eigs = l.complex_eigenvalues();
        let mut max_mod = 0.0f64;
        let mut max_re = f64::NEG_INFINITY;
        let mut near_one = f64::INFINITY;
        for e in eigs.iter() {
            let m = (e.re * e.re + e.im * e.im).sqrt();
            if m > max_mod { max_mod = m; }
            // ignore the known eigenvalue at 1 for the max-Re scan
            if (e.re - 1.0).abs() + e.im.abs() < near_one { near_one = (e.re - 1.0).abs() + e.im.abs(); }
        }
        for e in eigs.iter() {
            let m = (e.re * e.re + e.im * e.im).sqrt();
            if (e.re - 1.0).abs() + e.im.abs() > 1e-6 && e.re > max_re { max_re = e.re; let _ = m; }
        }
        println!(
            "order {order}: rho(L) = {max_mod:.1}, max Re(spec\\{{1}}) = {max_re:.4}, |eig-1| = {near_one:.2e}, min spacing = {:.3e}, eig time {:?}",
            grid.min_spacing(), t0.elapsed()
        );
    }
    // pair build timing
    let pot = PotentialSpec::linearization();
    for om in [5.0, 50.0, 200.0] {
        let t0 = Instant::now();
        let p = build_u_pair(SpectralParameter::new(0.05, om), &pot).unwrap();
        println!("pair at omega={om}: {:?} (w0 = {})", t0.elapsed(), p.w0);
    }
}
