use conelab_core::specfun::connection_coefficient;
use num_complex::Complex64 as C;

fn edge_rec(z0: C, z1: C, f0: C, f1: C, depth: usize) -> f64 {
    let zm = (z0 + z1) * 0.5;
    let fm = connection_coefficient(zm).unwrap();
    let d0 = (fm / f0).arg();
    let d1 = (f1 / fm).arg();
    if d0.abs() <= std::f64::consts::FRAC_PI_4 && d1.abs() <= std::f64::consts::FRAC_PI_4 {
        d0 + d1
    } else {
        edge_rec(z0, zm, f0, fm, depth + 1) + edge_rec(zm, z1, fm, f1, depth + 1)
    }
}

fn dense_edge(z0: C, z1: C) -> f64 {
    let n = 100_000;
    let mut total = 0.0;
    let mut prev = connection_coefficient(z0).unwrap();
    for k in 1..=n {
        let z = z0 + (z1 - z0) * (k as f64 / n as f64);
        let v = connection_coefficient(z).unwrap();
        total += (v / prev).arg();
        prev = v;
    }
    total
}

fn main() {
    let corners = [
        C::new(0.05, -10.0),
        C::new(2.0, -10.0),
        C::new(2.0, 10.0),
        C::new(0.05, 10.0),
    ];
    for k in 0..4 {
        let z0 = corners[k];
        let z1 = corners[(k + 1) % 4];
        let f0 = connection_coefficient(z0).unwrap();
        let f1 = connection_coefficient(z1).unwrap();
        let adaptive = edge_rec(z0, z1, f0, f1, 0);
        let dense = dense_edge(z0, z1);
        println!("edge {k}: adaptive {adaptive:.6} dense {dense:.6}  (diff {:.4} turns)",
                 (adaptive - dense) / (2.0 * std::f64::consts::PI));
    }
}
