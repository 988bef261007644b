//! Radial collocation grid on (0, 1).
//!
//! Gauss-Legendre interior nodes: nothing sits at rho = 0 or rho = 1, so the
//! 4/rho term and the degenerate (1 - rho^2) coefficient are never evaluated
//! at their bad points. Radial functions are restrictions of even functions;
//! smooth ones are resolved spectrally by polynomial interpolation. Boundary
//! traces come from barycentric extrapolation.

use nalgebra::DMatrix;
use std::sync::Arc;

#[derive(Debug)]
pub struct RadialGrid {
    /// strictly increasing interior nodes in (0, 1)
    pub nodes: Vec<f64>,
    /// Gauss weights for \int_0^1 f(r) dr ~= sum w_i f(r_i)
    pub weights: Vec<f64>,
    /// polynomial degree of the collocation (= number of nodes)
    pub order: usize,
    /// barycentric weights of the node set
    pub bary: Vec<f64>,
    /// first-derivative collocation matrix
    pub diff: DMatrix<f64>,
    /// second-derivative collocation matrix (diff * diff)
    pub diff2: DMatrix<f64>,
}

impl RadialGrid {
    pub fn new(order: usize) -> Arc<Self> {
        let (xs, ws) = crate::quad::gauss_legendre(order);
        let nodes: Vec<f64> = xs.iter().map(|x| 0.5 * (x + 1.0)).collect();
        let weights: Vec<f64> = ws.iter().map(|w| 0.5 * w).collect();
        let bary = bary_weights(&nodes);
        let diff = diff_matrix(&nodes, &bary);
        let diff2 = &diff * &diff;
        Arc::new(RadialGrid { nodes, weights, order, bary, diff, diff2 })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Smallest spacing between adjacent nodes (sets explicit time steps).
    pub fn min_spacing(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
            .min(self.nodes[0])
    }

    /// Barycentric evaluation of the interpolant of `values` at x (x may lie
    /// outside the node hull, e.g. the boundary trace at x = 1).
    pub fn eval_at<T>(&self, values: &[T], x: f64) -> T
    where
        T: Copy
            + std::ops::Mul<f64, Output = T>
            + std::ops::Add<Output = T>
            + std::ops::Div<f64, Output = T>
            + Default,
    {
        let mut num = T::default();
        let mut den = 0.0;
        for i in 0..self.nodes.len() {
            let dx = x - self.nodes[i];
            if dx.abs() < 1e-300 {
                return values[i];
            }
            let c = self.bary[i] / dx;
            num = num + values[i] * c;
            den += c;
        }
        num / den
    }

    /// Row of interpolation weights at x: p(x) = dot(row, values).
    pub fn interp_row(&self, x: f64) -> Vec<f64> {
        let n = self.nodes.len();
        let mut row = vec![0.0; n];
        for i in 0..n {
            if (x - self.nodes[i]).abs() < 1e-300 {
                row[i] = 1.0;
                return row;
            }
        }
        let mut den = 0.0;
        for i in 0..n {
            let c = self.bary[i] / (x - self.nodes[i]);
            row[i] = c;
            den += c;
        }
        for r in row.iter_mut() {
            *r /= den;
        }
        row
    }

    /// Derivative values at the nodes.
    pub fn deriv<T>(&self, values: &[T]) -> Vec<T>
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + Default,
    {
        matvec(&self.diff, values)
    }

    pub fn deriv2<T>(&self, values: &[T]) -> Vec<T>
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + Default,
    {
        matvec(&self.diff2, values)
    }
}

pub fn matvec<T>(m: &DMatrix<f64>, v: &[T]) -> Vec<T>
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + Default,
{
    let n = m.nrows();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = T::default();
        for j in 0..v.len() {
            acc = acc + v[j] * m[(i, j)];
        }
        out.push(acc);
    }
    out
}

fn bary_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    // scale factor keeps the running products near unity
    let c = 4.0 / (nodes[n - 1] - nodes[0]);
    let mut w = vec![1.0; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                w[i] *= c * (nodes[i] - nodes[j]);
            }
        }
        w[i] = 1.0 / w[i];
    }
    w
}

fn diff_matrix(nodes: &[f64], bary: &[f64]) -> DMatrix<f64> {
    let n = nodes.len();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if i != j {
                let v = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
                d[(i, j)] = v;
                row_sum += v;
            }
        }
        // negative-sum trick: constants differentiate to exactly zero
        d[(i, i)] = -row_sum;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_strictly_interior_and_increasing() {
        let g = RadialGrid::new(64);
        assert!(g.nodes[0] > 0.0);
        assert!(*g.nodes.last().unwrap() < 1.0);
        assert!(g.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(g.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn quadrature_exact_for_monomials() {
        let g = RadialGrid::new(16);
        for k in 0..=27 {
            let num: f64 = g
                .nodes
                .iter()
                .zip(&g.weights)
                .map(|(x, w)| w * x.powi(k))
                .sum();
            let exact = 1.0 / (k as f64 + 1.0);
            assert!((num - exact).abs() < 1e-13, "k={k}: {num} vs {exact}");
        }
    }

    #[test]
    fn differentiation_is_spectrally_accurate() {
        let g = RadialGrid::new(32);
        let f: Vec<f64> = g.nodes.iter().map(|x| (3.0 * x).sin()).collect();
        let df = g.deriv(&f);
        for (i, x) in g.nodes.iter().enumerate() {
            assert!((df[i] - 3.0 * (3.0 * x).cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn constants_differentiate_to_zero_exactly() {
        let g = RadialGrid::new(64);
        let f = vec![1.0; g.len()];
        let df = g.deriv(&f);
        for v in df {
            assert!(v.abs() < 1e-12, "residual {v}");
        }
    }

    #[test]
    fn boundary_extrapolation() {
        let g = RadialGrid::new(24);
        let f: Vec<f64> = g.nodes.iter().map(|x| x * x * x - 2.0 * x + 5.0).collect();
        let v1 = g.eval_at(&f, 1.0);
        assert!((v1 - 4.0).abs() < 1e-12);
        let v0 = g.eval_at(&f, 0.0);
        assert!((v0 - 5.0).abs() < 1e-12);
    }
}
