use conelab_core::specfun::{connection_coefficient, winding_number, Rect};
use num_complex::Complex64 as C;

fn rec(rect: Rect, w: i32, tol: f64, depth: usize) {
    if w == 0 { return; }
    if rect.size() < tol {
        println!("zero at {:?} mult {w}", rect.center());
        return;
    }
    const FRACS: [(f64, f64); 5] = [(0.5,0.5),(0.5,0.611),(0.611,0.5),(0.563,0.437),(0.437,0.563)];
    let f = |z: C| connection_coefficient(z);
    'fracs: for (i, (fx, fy)) in FRACS.iter().enumerate() {
        let rm = rect.re_lo + fx * (rect.re_hi - rect.re_lo);
        let im = rect.im_lo + fy * (rect.im_hi - rect.im_lo);
        let quads = [
            Rect::new(rect.re_lo, rm, rect.im_lo, im),
            Rect::new(rm, rect.re_hi, rect.im_lo, im),
            Rect::new(rect.re_lo, rm, im, rect.im_hi),
            Rect::new(rm, rect.re_hi, im, rect.im_hi),
        ];
        let mut ws = [0i32; 4];
        for (k, q) in quads.iter().enumerate() {
            match winding_number(&f, *q) {
                Ok(wq) => ws[k] = wq,
                Err(e) => {
                    println!("depth {depth} frac {i}: quad {k} [{:.6},{:.6}]x[{:.6},{:.6}] err {e}",
                             q.re_lo, q.re_hi, q.im_lo, q.im_hi);
                    continue 'fracs;
                }
            }
        }
        if ws.iter().sum::<i32>() != w {
            println!("depth {depth} frac {i}: sum {} != {w} (ws {ws:?})", ws.iter().sum::<i32>());
            continue 'fracs;
        }
        for (k, q) in quads.into_iter().enumerate() {
            rec(q, ws[k], tol, depth + 1);
        }
        return;
    }
    println!("EXHAUSTED at depth {depth}: [{:.8},{:.8}]x[{:.8},{:.8}]",
             rect.re_lo, rect.re_hi, rect.im_lo, rect.im_hi);
}

fn main() {
    let rect = Rect::new(0.05, 2.0, -10.0, 10.0);
    let f = |z: C| connection_coefficient(z);
    let w = winding_number(&f, rect).unwrap();
    println!("top winding {w}");
    let t0 = std::time::Instant::now();
    rec(rect, w, 1e-6, 0);
    println!("elapsed {:?}", t0.elapsed());
}
