use conelab_core::specfun::connection_coefficient;
use num_complex::Complex64 as C;

fn main() {
    // dense uniform traversal of the rectangle boundary
    let (a, b, c, d) = (0.05, 2.0, -10.0, 10.0);
    let n = 200_000;
    let mut pts = Vec::new();
    for k in 0..n { pts.push(C::new(a + (b - a) * k as f64 / n as f64, c)); }
    for k in 0..n { pts.push(C::new(b, c + (d - c) * k as f64 / n as f64)); }
    for k in 0..n { pts.push(C::new(b - (b - a) * k as f64 / n as f64, d)); }
    for k in 0..n { pts.push(C::new(a, d - (d - c) * k as f64 / n as f64)); }
    pts.push(pts[0]);
    let mut total = 0.0;
    let mut prev = connection_coefficient(pts[0]).unwrap();
    let mut min_mod = f64::INFINITY;
    let mut max_step: f64 = 0.0;
    let mut max_step_at = C::new(0.0, 0.0);
    for &z in &pts[1..] {
        let v = connection_coefficient(z).unwrap();
        let dd = (v / prev).arg();
        if dd.abs() > max_step { max_step = dd.abs(); max_step_at = z; }
        total += dd;
        min_mod = min_mod.min(v.norm());
        prev = v;
    }
    println!("dense winding = {:.6} turns; min |c| on boundary = {:.3e}; max step {:.4} at {}",
             total / (2.0 * std::f64::consts::PI), min_mod, max_step, max_step_at);
}
