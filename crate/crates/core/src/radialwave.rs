//! Finite-difference solver for the free radial wave equation on R^5,
//! used as the physical-space oracle for the similarity-coordinate
//! machinery: u_tt = u_rr + (4/r) u_r.
//!
//! Second-order central differences with the even reflection at r = 0
//! (the Laplacian of a smooth radial function at the origin is 5 u'').

/// Method-of-lines state for the physical free wave.
pub struct FreeWaveSolver {
    pub dr: f64,
    pub r_max: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
}

impl FreeWaveSolver {
    pub fn new<F, G>(f: F, g: G, r_max: f64, nr: usize) -> Self
    where
        F: Fn(f64) -> f64,
        G: Fn(f64) -> f64,
    {
        let dr = r_max / nr as f64;
        let u: Vec<f64> = (0..=nr).map(|i| f(i as f64 * dr)).collect();
        let v: Vec<f64> = (0..=nr).map(|i| g(i as f64 * dr)).collect();
        FreeWaveSolver { dr, r_max, u, v, t: 0.0 }
    }

    fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let dr2 = self.dr * self.dr;
        let mut out = vec![0.0; n];
        // r = 0: even extension, Delta_5 u(0) = 5 u''(0)
        out[0] = 10.0 * (u[1] - u[0]) / dr2;
        for i in 1..n - 1 {
            let r = i as f64 * self.dr;
            out[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / dr2
                + (4.0 / r) * (u[i + 1] - u[i - 1]) / (2.0 * self.dr);
        }
        // far boundary pinned; waves never return to the cone in our runs
        out[n - 1] = 0.0;
        out
    }

    pub fn step(&mut self, dt: f64) {
        // classical RK4 on (u, v)
        let (u0, v0) = (self.u.clone(), self.v.clone());
        let k1u = v0.clone();
        let k1v = self.laplacian(&u0);
        let add = |a: &[f64], b: &[f64], h: f64| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| x + h * y).collect()
        };
        let k2u = add(&v0, &k1v, 0.5 * dt);
        let k2v = self.laplacian(&add(&u0, &k1u, 0.5 * dt));
        let k3u = add(&v0, &k2v, 0.5 * dt);
        let k3v = self.laplacian(&add(&u0, &k2u, 0.5 * dt));
        let k4u = add(&v0, &k3v, dt);
        let k4v = self.laplacian(&add(&u0, &k3u, dt));
        for i in 0..self.u.len() {
            self.u[i] = u0[i] + dt / 6.0 * (k1u[i] + 2.0 * k2u[i] + 2.0 * k3u[i] + k4u[i]);
            self.v[i] = v0[i] + dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
        self.t += dt;
    }

    pub fn advance_to(&mut self, t_end: f64) {
        let dt = 0.4 * self.dr;
        while self.t + dt < t_end {
            self.step(dt);
        }
        let rem = t_end - self.t;
        if rem > 1e-15 {
            self.step(rem);
        }
    }

    /// Linear interpolation of u at radius r.
    pub fn sample_u(&self, r: f64) -> f64 {
        let x = (r / self.dr).clamp(0.0, (self.u.len() - 1) as f64);
        let i = (x as usize).min(self.u.len() - 2);
        let f = x - i as f64;
        self.u[i] * (1.0 - f) + self.u[i + 1] * f
    }

    pub fn sample_v(&self, r: f64) -> f64 {
        let x = (r / self.dr).clamp(0.0, (self.v.len() - 1) as f64);
        let i = (x as usize).min(self.v.len() - 2);
        let f = x - i as f64;
        self.v[i] * (1.0 - f) + self.v[i + 1] * f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_zero() {
        let mut s = FreeWaveSolver::new(|_| 0.0, |_| 0.0, 3.0, 300);
        s.advance_to(0.5);
        assert!(s.u.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn matches_separable_solution() {
        // u(t, r) = cos(k t) j(k r) with j the 5d radial wave profile
        // j(x) = 3 (sin x - x cos x)/x^3 solves j'' + (4/x) j' + j = 0
        let j = |x: f64| {
            if x.abs() < 1e-4 {
                1.0 - x * x / 10.0
            } else {
                3.0 * (x.sin() - x * x.cos()) / x.powi(3)
            }
        };
        let k = 2.0;
        let mut s = FreeWaveSolver::new(|r| j(k * r), |_| 0.0, 8.0, 2400);
        let t_end = 0.8;
        s.advance_to(t_end);
        let mut worst: f64 = 0.0;
        for i in 0..600 {
            let r = i as f64 * s.dr;
            let exact = (k * t_end).cos() * j(k * r);
            worst = worst.max((s.u[i] - exact).abs());
        }
        assert!(worst < 2e-4, "max error {worst}");
    }
}
