use conelab_core::specfun::{phi0, phi1, wronskian_free, SpectralParameter};
use conelab_core::volterra::{build_u_pair, build_v0, build_v1, PotentialSpec, DELTA0_DEFAULT, DELTA1_DEFAULT};
use num_complex::Complex64 as C;

fn main() {
    // free potential: everything has closed forms
    let lam = SpectralParameter::new(0.12, 1.7);
    let l = lam.as_c();
    let pot = PotentialSpec::zero();
    let pair = build_u_pair(lam, &pot).unwrap();
    println!("w0 = {} (want 1), spread {:.2e}", pair.w0, pair.w0_spread);
    println!("con_a = {} (want 1)", pair.con_a);
    println!("con_b = {} (want -1... scaled)", pair.con_b);
    println!("con_c = {}, con_d = {}", pair.con_c, pair.con_d);
    println!("W(lam) = {}", wronskian_free(l));
    // in the free case u0 = phi0, u1 = phi1 exactly
    for r in [0.05, 0.1, 0.2, 0.5, 0.9] {
        let u0 = pair.u0(r);
        let u1 = pair.u1(r);
        println!("r={r}: u0/phi0-1 = {:.2e}  u1/phi1-1 = {:.2e}",
            (u0 / phi0(r, l) - C::new(1.0,0.0)).norm(),
            (u1 / phi1(r, l) - C::new(1.0,0.0)).norm());
    }
    // v0/v1 directly at the matching radius
    let v0 = build_v0(lam, &pot, DELTA0_DEFAULT).unwrap();
    let v1 = build_v1(lam, &pot, DELTA1_DEFAULT).unwrap();
    let rm = v0.rho_match;
    println!("rho_m = {rm}");
    println!("v0(rm) = {} deriv {}", v0.v(rm), v0.v_deriv(rm));
    println!("v1(rm) = {} deriv {}", v1.v(rm), v1.v_deriv(rm));
    // free-case exact values: v0 = psi0, v1 = psi1
    use conelab_core::specfun::{psi0, psi0_deriv, psi1, psi1_deriv};
    println!("psi0(rm) = {} deriv {}", psi0(rm, l), psi0_deriv(rm, l));
    println!("psi1(rm) = {} deriv {}", psi1(rm, l), psi1_deriv(rm, l));
    // Wronskian of (v0, v1) at rm vs W(lam)
    let w = v0.v(rm) * v1.v_deriv(rm) - v0.v_deriv(rm) * v1.v(rm);
    println!("W(v0,v1)(rm) = {} want {}", w, wronskian_free(l));
    // and v0~ Wronskian
    let wt = v0.v(rm*0.6) * v0.v_tilde_deriv(rm*0.6) - v0.v_deriv(rm*0.6) * v0.v_tilde(rm*0.6);
    println!("W(v0,v0~)(0.6 rm) = {} want -1", wt);
}
