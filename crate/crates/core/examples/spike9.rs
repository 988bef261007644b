use conelab_core::specfun::{psi1, psi1_tilde, wronskian_free};
use num_complex::Complex64 as C;

fn main() {
    for (eps, om) in [(0.7, 1.9), (0.12, 1.7), (0.05, 3.0)] {
        let l = C::new(eps, om);
        let w_exact = wronskian_free(l);
        println!("lam = {l}: W(lam) = {w_exact}");
        for rho in [0.05, 0.15, 0.2535, 0.3, 0.5, 0.8] {
            let h = 1e-6;
            let d1 = (psi1(rho + h, l) - psi1(rho - h, l)) / (2.0 * h);
            let d2 = (psi1_tilde(rho + h, l) - psi1_tilde(rho - h, l)) / (2.0 * h);
            let w = psi1(rho, l) * d2 - d1 * psi1_tilde(rho, l);
            println!("   rho={rho}: W_fd = {w}  rel dev {:.3e}", (w - w_exact).norm() / w_exact.norm());
        }
        // ODE residual of psi1: v'' + U v = 0 with U = (-2 + (1/4) rho^2 (11+4l-4l^2))/(rho^2(1-rho^2)^2)
        for rho in [0.3f64, 0.6] {
            let h = 1e-4;
            let d2v = (psi1(rho + h, l) - psi1(rho, l) * 2.0 + psi1(rho - h, l)) / (h * h);
            let ucoef = (C::new(-2.0, 0.0) + (C::new(11.0, 0.0) + l * 4.0 - l * l * 4.0) * (rho * rho / 4.0))
                / C::new(rho * rho * (1.0 - rho * rho).powi(2), 0.0);
            let res = d2v + ucoef * psi1(rho, l);
            println!("   psi1 ODE residual at rho={rho}: {:.3e} (|psi1''|={:.3e})", res.norm(), d2v.norm());
        }
    }
}
