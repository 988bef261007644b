//! Quadrature building blocks: Gauss-Legendre rules, adaptive panels,
//! and Filon weights for integrals with a linear oscillatory phase.

use num_complex::Complex64 as C;
use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Tricomi-style initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_and_deriv(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_deriv(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        let (_, d) = legendre_and_deriv(n, 0.0);
        nodes[n / 2] = 0.0;
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached rules for the panel sizes we use in hot loops.
pub fn gl_cached(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<Vec<(Vec<f64>, Vec<f64>)>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| (0..=32).map(|k| gauss_legendre(k.max(1))).collect());
    &cache[n.min(32)]
}

/// Integrate a real->complex function over [a, b] with an n-point Gauss rule.
pub fn gauss_panel<F: FnMut(f64) -> C>(mut f: F, a: f64, b: f64, n: usize) -> C {
    let (xs, ws) = gl_cached(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = C::new(0.0, 0.0);
    for (x, w) in xs.iter().zip(ws) {
        acc += f(c + h * x) * *w;
    }
    acc * h
}

/// Adaptive Gauss quadrature: compares a 10-point rule against its bisection
/// and recurses until the panel agrees to `tol` (absolute + relative mix).
pub fn adaptive_gauss<F: Fn(f64) -> C>(f: &F, a: f64, b: f64, tol: f64) -> C {
    fn rec<F: Fn(f64) -> C>(f: &F, a: f64, b: f64, tol: f64, whole: C, depth: usize) -> C {
        let m = 0.5 * (a + b);
        let left = gauss_panel(|x| f(x), a, m, 10);
        let right = gauss_panel(|x| f(x), m, b, 10);
        let err = (left + right - whole).norm();
        if depth >= 48 || err <= tol * (1.0 + (left + right).norm()) {
            left + right
        } else {
            rec(f, a, m, 0.5 * tol, left, depth + 1) + rec(f, m, b, 0.5 * tol, right, depth + 1)
        }
    }
    let whole = gauss_panel(|x| f(x), a, b, 10);
    rec(f, a, b, tol, whole, 0)
}

/// Spherical Bessel functions j_0..j_kmax at real argument x >= 0.
/// Downward (Miller) recursion for small x, upward where it is stable.
pub fn sph_bessel_j(kmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if x < 1e-8 {
        // series: j_k(x) ~ x^k / (2k+1)!!
        let mut dfact = 1.0;
        for k in 0..=kmax {
            if k > 0 {
                dfact *= 2.0 * k as f64 + 1.0;
            }
            out[k] = if k == 0 { 1.0 - x * x / 6.0 } else { x.powi(k as i32) / dfact };
        }
        return out;
    }
    if x > kmax as f64 + 10.0 {
        // upward recursion is stable when x dominates the order
        let j0 = x.sin() / x;
        out[0] = j0;
        if kmax >= 1 {
            out[1] = x.sin() / (x * x) - x.cos() / x;
            for k in 1..kmax {
                out[k + 1] = (2.0 * k as f64 + 1.0) / x * out[k] - out[k - 1];
            }
        }
        return out;
    }
    // Miller downward recursion with normalization by j_0
    let start = kmax + 16 + (x as usize);
    let mut jp = 0.0_f64;
    let mut j = 1e-30_f64;
    let mut tmp = vec![0.0; kmax + 1];
    for k in (0..start).rev() {
        let jm = (2.0 * k as f64 + 3.0) / x * j - jp;
        jp = j;
        j = jm;
        if k <= kmax {
            tmp[k] = j;
        }
        if j.abs() > 1e250 {
            // rescale to avoid overflow
            jp /= 1e250;
            j /= 1e250;
            for v in tmp.iter_mut() {
                *v /= 1e250;
            }
        }
    }
    let scale = (x.sin() / x) / j;
    for k in 0..=kmax {
        out[k] = tmp[k] * scale;
    }
    out
}

/// Legendre moments mu_k(c) = \int_{-1}^{1} e^{icy} P_k(y) dy = 2 i^k j_k(c).
pub fn legendre_osc_moments(kmax: usize, c: f64) -> Vec<C> {
    let sign = if c < 0.0 { -1.0 } else { 1.0 };
    let j = sph_bessel_j(kmax, c.abs());
    let mut out = Vec::with_capacity(kmax + 1);
    let mut ik = C::new(1.0, 0.0);
    for k in 0..=kmax {
        // for negative c, j_k(c) = (-1)^k j_k(|c|); combined with i^k this
        // conjugates the moment, consistent with mu_k(-c) = conj(mu_k(c)) for real P_k
        let jk = if sign < 0.0 { j[k] * (-1.0_f64).powi(k as i32) } else { j[k] };
        out.push(ik * 2.0 * jk);
        ik *= C::new(0.0, 1.0);
    }
    out
}

/// Nodal Legendre-projection coefficients (2k+1)/2 * w_q * P_k(x_q) for the
/// n-point rule, cached (they depend only on n).
fn filon_proj(n: usize) -> &'static Vec<f64> {
    static CACHE: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        (0..=32)
            .map(|n| {
                let n = n.max(1);
                let (xs, ws) = gauss_legendre(n);
                let mut a = vec![0.0; n * n];
                for (q, (&xq, &wq)) in xs.iter().zip(ws.iter()).enumerate() {
                    let mut p0 = 1.0;
                    let mut p1 = xq;
                    for k in 0..n {
                        let pk = if k == 0 {
                            1.0
                        } else if k == 1 {
                            xq
                        } else {
                            let kf = k as f64;
                            let p2 = ((2.0 * kf - 1.0) * xq * p1 - (kf - 1.0) * p0) / kf;
                            p0 = p1;
                            p1 = p2;
                            p2
                        };
                        a[q * n + k] = (2.0 * k as f64 + 1.0) / 2.0 * wq * pk;
                    }
                }
                a
            })
            .collect()
    });
    &cache[n.min(32)]
}

/// Weights w_q such that \int_a^b e^{i*omega*y} g(y) dy ~= sum_q w_q g(y_q),
/// where y_q are the n-point Gauss-Legendre nodes mapped to [a, b] and the
/// interpolant of g on those nodes is integrated exactly against the phase.
pub fn filon_weights(a: f64, b: f64, omega: f64, n: usize) -> (Vec<f64>, Vec<C>) {
    let (xs, _) = gl_cached(n);
    let proj = filon_proj(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let c = omega * half;
    let mu = legendre_osc_moments(n - 1, c);
    let carrier = C::new(0.0, omega * mid).exp() * half;
    let mut weights = Vec::with_capacity(n);
    for q in 0..n {
        let mut acc = C::new(0.0, 0.0);
        for (k, m) in mu.iter().enumerate() {
            acc += m * proj[q * n + k];
        }
        weights.push(acc * carrier);
    }
    let nodes = xs.iter().map(|x| mid + half * x).collect();
    (nodes, weights)
}

/// Composite integration of f over [a,b] with panels refined so each one is
/// smooth on its own scale; plain Gauss per panel.
pub fn integrate_graded<F: FnMut(f64) -> C>(
    mut f: F,
    breakpoints: &[f64],
    pts: usize,
) -> C {
    let mut acc = C::new(0.0, 0.0);
    for w in breakpoints.windows(2) {
        acc += gauss_panel(&mut f, w[0], w[1], pts);
    }
    acc
}

/// Geometric breakpoints from a down to a*ratio^k >= floor, then the floor.
pub fn geometric_breakpoints(hi: f64, floor: f64, ratio: f64) -> Vec<f64> {
    assert!(hi > floor && floor > 0.0 && ratio < 1.0);
    let mut pts = vec![hi];
    let mut x = hi;
    while x * ratio > floor {
        x *= ratio;
        pts.push(x);
    }
    pts.push(floor);
    pts.reverse();
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        let (xs, ws) = gauss_legendre(8);
        // degree 15 polynomial must be exact
        let exact = 2.0 / 16.0 * 0.0 + 2.0 / 13.0; // \int x^15 = 0, \int x^12 = 2/13
        let num: f64 = xs.iter().zip(&ws).map(|(x, w)| w * (x.powi(15) + x.powi(12))).sum();
        assert!((num - exact).abs() < 1e-14);
    }

    #[test]
    fn gl_weights_sum_to_two() {
        for n in [1, 2, 5, 16, 31] {
            let (_, ws) = gauss_legendre(n);
            let s: f64 = ws.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n} sum={s}");
        }
    }

    #[test]
    fn adaptive_handles_sqrt_singularity() {
        // \int_0^1 (1-x)^(-1/2) dx = 2
        let f = |x: f64| C::new((1.0 - x).max(1e-300).powf(-0.5), 0.0);
        let v = adaptive_gauss(&f, 0.0, 1.0 - 1e-12, 1e-10);
        assert!((v.re - 2.0).abs() < 1e-5, "got {}", v.re);
    }

    #[test]
    fn sph_bessel_matches_closed_forms() {
        for &x in &[0.3, 1.7, 9.4, 45.0] {
            let j = sph_bessel_j(6, x);
            assert!((j[0] - x.sin() / x).abs() < 1e-12);
            let j1 = x.sin() / (x * x) - x.cos() / x;
            assert!((j[1] - j1).abs() < 1e-12, "x={x}: {} vs {}", j[1], j1);
        }
    }

    #[test]
    fn filon_matches_direct_quadrature() {
        // \int_0^2 e^{i w y} cos(y) dy with w = 37.3 against dense Gauss
        let omega = 37.3;
        let (nodes, ws) = filon_weights(0.0, 2.0, omega, 12);
        let filon: C = nodes.iter().zip(&ws).map(|(y, w)| w * y.cos()).sum();
        let mut dense = C::new(0.0, 0.0);
        let m = 400;
        for k in 0..m {
            let a = 2.0 * k as f64 / m as f64;
            let b = 2.0 * (k + 1) as f64 / m as f64;
            dense += gauss_panel(
                |y| C::new(0.0, omega * y).exp() * y.cos(),
                a,
                b,
                8,
            );
        }
        assert!((filon - dense).norm() < 1e-10, "filon={} dense={}", filon, dense);
    }

    #[test]
    fn filon_zero_frequency_reduces_to_gauss() {
        let (nodes, ws) = filon_weights(-1.0, 3.0, 0.0, 10);
        let v: C = nodes.iter().zip(&ws).map(|(y, w)| w * (y * y)).sum();
        assert!((v.re - (27.0 + 1.0) / 3.0).abs() < 1e-12);
        assert!(v.im.abs() < 1e-14);
    }
}
