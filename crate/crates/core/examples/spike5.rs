use conelab_core::specfun::{SpectralParameter, wronskian_free};
use conelab_core::volterra::{build_u_pair, PotentialSpec};
use num_complex::Complex64 as C;

fn main() {
    let pot = PotentialSpec::linearization();
    for om in [3.0f64, 10.0, 40.0] {
        let lam = SpectralParameter::new(0.05, om);
        let pair = build_u_pair(lam, &pot).unwrap();
        println!("omega={om}: rho_m={:.4} w0={} spread={:.2e}", pair.rho_match, pair.w0, pair.w0_spread);
        // Wronskian constancy across the full interval
        let base = pair.rescaled_wronskian(0.5);
        for r in [0.01, 0.05, pair.rho_match * 0.99, pair.rho_match * 1.01, 0.3, 0.7, 0.95] {
            let w = pair.rescaled_wronskian(r);
            println!("   W({r:.4})/W(0.5)-1 = {:.3e}", (w - base).norm() / base.norm());
        }
        // ODE residual of u0 and u1 via central differences in v-space
        let l = lam.as_c();
        let h = 1e-5;
        for r in [0.08, 0.3, 0.6] {
            for (name, v) in [("v0", 0), ("v1", 1)] {
                let f = |x: f64| if v == 0 { pair.v0_any(x).0 } else { pair.v1_any(x).0 };
                let d2 = (f(r + h) - f(r) * 2.0 + f(r - h)) / (h * h);
                let ucoef = (C::new(-2.0, 0.0) + (C::new(11.0, 0.0) + l * 4.0 - l * l * 4.0) * (r * r / 4.0))
                    / C::new(r * r * (1.0 - r * r).powi(2), 0.0);
                let res = d2 + ucoef * f(r) - C::new(pot.v(r) / (1.0 - r * r), 0.0) * f(r);
                println!("   {name} residual at {r}: {:.3e} (|v|={:.3e})", res.norm(), f(r).norm());
            }
        }
        let _ = wronskian_free(l);
    }
}
