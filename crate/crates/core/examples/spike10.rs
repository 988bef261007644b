use conelab_core::specfun::*;
use num_complex::Complex64 as C;

fn main() {
    let l = C::new(0.12, 1.7);
    let rho = 0.2535100632816969;
    let h = 1e-7;
    let fd = |f: &dyn Fn(f64) -> C| (f(rho + h) - f(rho - h)) / (2.0 * h);
    let checks: [(&str, C, C); 4] = [
        ("psi1", fd(&|r| psi1(r, l)), psi1_deriv(rho, l)),
        ("psi1t", fd(&|r| psi1_tilde(r, l)), psi1_tilde_deriv(rho, l)),
        ("psi0", fd(&|r| psi0(r, l)), psi0_deriv(rho, l)),
        ("phi0", fd(&|r| phi0(r, l)), phi0_deriv(rho, l)),
    ];
    for (name, f, a) in checks {
        println!("{name}: fd={f} analytic={a} rel dev {:.3e}", (f - a).norm() / f.norm());
    }
    // psi0 value: direct difference vs the psi0() function
    let direct = psi1(rho, l) - psi1_tilde(rho, l);
    println!("psi0 value: fn={} direct={} rel {:.3e}", psi0(rho, l), direct, (psi0(rho, l) - direct).norm() / direct.norm());
    // at a smaller rho where the integral representation engages
    let rho2 = 0.1;
    let direct2 = psi1(rho2, l) - psi1_tilde(rho2, l);
    println!("psi0(0.1): fn={} direct={} rel {:.3e}", psi0(rho2, l), direct2, (psi0(rho2, l) - direct2).norm() / direct2.norm());
}
