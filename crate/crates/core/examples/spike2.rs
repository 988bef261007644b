use conelab_core::specfun::SpectralParameter;
use conelab_core::volterra::{build_v0, build_v1, PotentialSpec, DELTA0_DEFAULT, DELTA1_DEFAULT};

fn main() {
    let lam = SpectralParameter::new(0.05, 5.0);
    let pot = PotentialSpec::linearization();
    let v0 = build_v0(lam, &pot, DELTA0_DEFAULT).unwrap();
    println!("rho_match = {}", v0.rho_match);
    for r in [1e-4, 1e-3, 0.01, 0.05, v0.rho_match * 0.5, v0.rho_match] {
        println!("  h0({r:.3e}) = {}", v0.h0(r));
        println!("  v0({r:.3e}) = {} v0'={}", v0.v(r), v0.v_deriv(r));
    }
    let v1 = build_v1(lam, &pot, DELTA1_DEFAULT).unwrap();
    println!("rho_lo = {}", v1.rho_lo);
    for r in [v1.rho_lo, 0.1, 0.3, 0.7, 0.95] {
        println!("  h1({r:.3e}) = {}", v1.h1(r));
        println!("  v1({r:.3e}) = {} v1'={}", v1.v(r), v1.v_deriv(r));
    }
}
