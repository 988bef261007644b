use conelab_core::specfun::{hyp2f1, HypergeometricParams, SpectralParameter, ONE};
use conelab_core::volterra::{build_u_pair, PotentialSpec};
use num_complex::Complex64 as C;

fn main() {
    let pot = PotentialSpec::linearization();
    for om in [0.5f64, 3.0, 10.0] {
        let lam = SpectralParameter::new(0.05, om);
        let l = lam.as_c();
        let pair = build_u_pair(lam, &pot).unwrap();
        let p = HypergeometricParams::from_lambda(l);
        // u0 against the regular-at-0 hypergeometric solution
        let h0 = |rho: f64| hyp2f1(HypergeometricParams::new(p.a, p.b, p.c), C::new(rho * rho, 0.0)).unwrap();
        let r_ref = 0.05;
        let scale0 = pair.u0(r_ref) / h0(r_ref);
        println!("omega={om} (rho_m={:.4}):", pair.rho_match);
        for r in [0.01, 0.1, 0.2, 0.4, 0.7] {
            let got = pair.u0(r);
            let want = scale0 * h0(r);
            println!("  u0({r}): rel dev {:.3e}", (got - want).norm() / want.norm());
        }
        // u1 against the regular-at-1 solution
        let h1 = |rho: f64| {
            hyp2f1(
                HypergeometricParams::new(p.a, p.b, p.a + p.b + ONE - p.c),
                C::new(1.0 - rho * rho, 0.0),
            )
            .unwrap()
        };
        let scale1 = pair.u1(0.9) / h1(0.9);
        for r in [0.05, 0.15, 0.4, 0.7, 0.95] {
            let got = pair.u1(r);
            let want = scale1 * h1(r);
            println!("  u1({r}): rel dev {:.3e}", (got - want).norm() / want.norm());
        }
    }
}
