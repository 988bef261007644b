//! Oscillation-resolving cumulative quadrature on (0, 1).
//!
//! The resolvent kernels carry phases omega*log(1 -+ s) and an endpoint
//! weight (1-s)^{-1/2+eps}. In the variable y = -log(1-s) the dominant
//! phase is exactly linear, so the endpoint tail integrates with Filon
//! panels of O(1) width; the remaining phases have decaying rate there.
//! Near s = 0 the panels brute-force the oscillation, which is cheap
//! because the total phase of that region is only omega * log-bounded.

use crate::quad::{filon_weights, gl_cached};
use num_complex::Complex64 as C;

/// One additive piece of an integrand: value = slow(s) * e^{i carrier y(s)}
/// with y = -log(1-s) and `slow` of bounded derivative in y.
pub struct Component<'a> {
    pub carrier: f64,
    pub slow: Box<dyn Fn(f64) -> C + 'a>,
}

/// Cumulative integrals of a sum of components against sorted targets:
/// inner[i] = int_0^{t_i}, outer[i] = int_{t_i}^{1} (truncated at
/// 1 - e^{-y_max}).
pub struct CumulativeSplit {
    pub inner: Vec<C>,
    pub outer: Vec<C>,
    pub panels_used: usize,
}

fn y_of(s: f64) -> f64 {
    -(1.0 - s).ln()
}

// cap keeps 1 - s representable well above rounding so that downstream
// evaluators can recover it by subtraction
fn s_of(y: f64) -> f64 {
    (1.0 - (-y).exp()).min(1.0 - 6e-15)
}

/// Largest usable y-truncation for the endpoint tail (1 - s stays far
/// enough from the rounding floor of f64 around 1).
pub const Y_MAX: f64 = 33.0;

/// Integrate the component sum over one panel [a, b] (in s).
fn panel_value(comps: &[Component<'_>], a: f64, b: f64, pts: usize, filon_ok: bool) -> C {
    let ya = y_of(a);
    let yb = y_of(b);
    let mut acc = C::new(0.0, 0.0);
    for comp in comps {
        if comp.carrier != 0.0 && filon_ok {
            // integrate in y with the exact linear carrier
            let (nodes, ws) = filon_weights(ya, yb, comp.carrier, pts);
            for (y, w) in nodes.iter().zip(&ws) {
                let s = s_of(*y);
                // ds = e^{-y} dy
                acc += w * (comp.slow)(s) * (-y).exp();
            }
        } else {
            let (xs, gw) = gl_cached(pts);
            let mid = 0.5 * (a + b);
            let half = 0.5 * (b - a);
            for (x, w) in xs.iter().zip(gw) {
                let s = mid + half * x;
                let phase = C::new(0.0, comp.carrier * y_of(s)).exp();
                acc += (comp.slow)(s) * phase * (w * half);
            }
        }
    }
    acc
}

/// Cumulative quadrature of component sums. `inner_comps` build the
/// from-zero integrals, `outer_comps` the to-one integrals; both share the
/// panel structure. `omega` sets the oscillation scale of all carriers and
/// of the secondary log(1+s) phase.
pub fn cumulative_components(
    targets: &[f64],
    omega: f64,
    y_max: f64,
    pts: usize,
    inner_comps: &[Component<'_>],
    outer_comps: &[Component<'_>],
) -> CumulativeSplit {
    let s_top = s_of(y_max);
    let mut anchors = vec![0.0];
    for &t in targets {
        if t > 0.0 && t < s_top {
            anchors.push(t);
        }
    }
    anchors.push(s_top);

    // Filon panels become valid once the secondary phase rate
    // omega (1-s)/(1+s) has dropped below ~1/2 per unit y
    let y_filon = (1.0 + 2.0 * omega.abs()).ln();

    let mut panels = 0usize;
    let mut seg_in = vec![C::new(0.0, 0.0); anchors.len() - 1];
    let mut seg_out = vec![C::new(0.0, 0.0); anchors.len() - 1];
    for k in 0..anchors.len() - 1 {
        let (a, b) = (anchors[k], anchors[k + 1]);
        let mut stack = vec![(a, b, 0usize)];
        while let Some((lo, hi, depth)) = stack.pop() {
            let (ylo, yhi) = (y_of(lo), y_of(hi));
            let in_tail = ylo >= y_filon;
            let split = if in_tail {
                // Filon handles any carrier; только resolve the slow scale
                depth < 40 && (yhi - ylo) > 0.5
            } else {
                let phase = omega.abs()
                    * ((yhi - ylo) + ((1.0 + hi) / (1.0 + lo)).ln());
                depth < 40
                    && (phase > std::f64::consts::FRAC_PI_2
                        || (hi - lo) > 0.03
                        || (yhi - ylo) > 0.5)
            };
            if split {
                let mid = if yhi - ylo > 0.6 {
                    s_of(0.5 * (ylo + yhi))
                } else {
                    0.5 * (lo + hi)
                };
                if mid > lo && mid < hi {
                    stack.push((lo, mid, depth + 1));
                    stack.push((mid, hi, depth + 1));
                    continue;
                }
            }
            panels += 1;
            seg_in[k] += panel_value(inner_comps, lo, hi, pts, in_tail);
            seg_out[k] += panel_value(outer_comps, lo, hi, pts, in_tail);
        }
    }

    // prefix the inner sums at the target anchors
    let mut inner = Vec::with_capacity(targets.len());
    let mut running = C::new(0.0, 0.0);
    let mut ti = 0usize;
    for k in 0..anchors.len() - 1 {
        running += seg_in[k];
        while ti < targets.len() && (targets[ti] - anchors[k + 1]).abs() < 1e-15 {
            inner.push(running);
            ti += 1;
        }
    }
    while inner.len() < targets.len() {
        inner.push(running);
    }
    // suffix the outer sums
    let mut outer = vec![C::new(0.0, 0.0); targets.len()];
    let mut suffix = C::new(0.0, 0.0);
    let mut idx = targets.len();
    for k in (0..anchors.len() - 1).rev() {
        while idx > 0 && (targets[idx - 1] - anchors[k]).abs() < 1e-15 {
            idx -= 1;
            outer[idx] = suffix + seg_out[k];
        }
        suffix += seg_out[k];
    }
    while idx > 0 {
        idx -= 1;
        outer[idx] = C::new(0.0, 0.0);
    }
    CumulativeSplit { inner, outer, panels_used: panels }
}

/// Convenience wrapper for a single plain integrand per side (used by the
/// low-frequency paths and tests).
pub fn cumulative_split<FI, FO>(
    targets: &[f64],
    omega: f64,
    y_max: f64,
    pts: usize,
    g_inner: FI,
    g_outer: FO,
) -> CumulativeSplit
where
    FI: Fn(f64) -> C,
    FO: Fn(f64) -> C,
{
    // carrier 0 disables Filon; the brute path must resolve all phases, so
    // keep the brute grading active through the whole range
    let s_top = s_of(y_max);
    let mut anchors = vec![0.0];
    for &t in targets {
        if t > 0.0 && t < s_top {
            anchors.push(t);
        }
    }
    anchors.push(s_top);
    let mut panels = 0usize;
    let mut seg_in = vec![C::new(0.0, 0.0); anchors.len() - 1];
    let mut seg_out = vec![C::new(0.0, 0.0); anchors.len() - 1];
    for k in 0..anchors.len() - 1 {
        let (a, b) = (anchors[k], anchors[k + 1]);
        let mut stack = vec![(a, b, 0usize)];
        while let Some((lo, hi, depth)) = stack.pop() {
            let (ylo, yhi) = (y_of(lo), y_of(hi));
            let phase = omega.abs() * ((yhi - ylo) + ((1.0 + hi) / (1.0 + lo)).ln());
            let split = depth < 44
                && (phase > std::f64::consts::FRAC_PI_2
                    || (hi - lo) > 0.03
                    || (yhi - ylo) > 0.4);
            if split {
                let mid = if yhi - ylo > 0.5 {
                    s_of(0.5 * (ylo + yhi))
                } else {
                    0.5 * (lo + hi)
                };
                if mid > lo && mid < hi {
                    stack.push((lo, mid, depth + 1));
                    stack.push((mid, hi, depth + 1));
                    continue;
                }
            }
            panels += 1;
            seg_in[k] += crate::quad::gauss_panel(|s| g_inner(s), lo, hi, pts);
            seg_out[k] += crate::quad::gauss_panel(|s| g_outer(s), lo, hi, pts);
        }
    }
    let mut inner = Vec::with_capacity(targets.len());
    let mut running = C::new(0.0, 0.0);
    let mut ti = 0usize;
    for k in 0..anchors.len() - 1 {
        running += seg_in[k];
        while ti < targets.len() && (targets[ti] - anchors[k + 1]).abs() < 1e-15 {
            inner.push(running);
            ti += 1;
        }
    }
    while inner.len() < targets.len() {
        inner.push(running);
    }
    let mut outer = vec![C::new(0.0, 0.0); targets.len()];
    let mut suffix = C::new(0.0, 0.0);
    let mut idx = targets.len();
    for k in (0..anchors.len() - 1).rev() {
        while idx > 0 && (targets[idx - 1] - anchors[k]).abs() < 1e-15 {
            idx -= 1;
            outer[idx] = suffix + seg_out[k];
        }
        suffix += seg_out[k];
    }
    while idx > 0 {
        idx -= 1;
        outer[idx] = C::new(0.0, 0.0);
    }
    CumulativeSplit { inner, outer, panels_used: panels }
}

/// Oscillatory integral over omega in R with algebraic-decay integrand:
/// \int e^{i a w} f(w) dw, truncated at |w| = cap with a two-term
/// integration-by-parts tail correction on each side.
pub fn osc_integral_line<F>(f: F, a: f64, cap: f64, rel_step: f64) -> C
where
    F: Fn(f64) -> C,
{
    let step = (std::f64::consts::FRAC_PI_2 / a.abs().max(1e-3)).min(rel_step.max(1e-3));
    let mut acc = C::new(0.0, 0.0);
    let mut w = -cap;
    while w < cap {
        let hi = (w + step).min(cap);
        acc += crate::quad::gauss_panel(|x| C::new(0.0, a * x).exp() * f(x), w, hi, 10);
        w = hi;
    }
    if a.abs() > 1e-12 {
        let ia = C::new(0.0, a);
        let h = cap * 1e-4;
        for sgn in [1.0f64, -1.0] {
            let c0 = sgn * cap;
            let fc = f(c0);
            let fp = (f(c0 + h) - f(c0 - h)) / (2.0 * h);
            let e = C::new(0.0, a * c0).exp();
            acc += e * (fc / ia + fp / (ia * ia)) * (-sgn);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cumulative_split_polynomial() {
        let targets = vec![0.2, 0.5, 0.8];
        let r = cumulative_split(&targets, 0.0, 33.0, 10, |s| C::new(s * s, 0.0), |s| C::new(s, 0.0));
        for (i, &t) in targets.iter().enumerate() {
            assert!((r.inner[i].re - t * t * t / 3.0).abs() < 1e-12);
            assert!((r.outer[i].re - (0.5 - t * t / 2.0)).abs() < 1e-10, "outer at {t}");
        }
    }

    #[test]
    fn cumulative_split_oscillatory_endpoint_weight() {
        // (1-s)^{-1/2+i w}: exact antiderivative available
        let om = 40.0;
        let lam = C::new(0.5, om);
        let g = |s: f64| (C::new((1.0 - s).ln(), 0.0) * C::new(-0.5, om)).exp();
        let targets = vec![0.3, 0.9];
        let r = cumulative_split(&targets, om, 33.0, 10, |s| g(s), |s| g(s));
        let anti = |s: f64| -(C::new((1.0 - s).ln(), 0.0) * lam).exp() / lam;
        let s_top = s_of(33.0);
        for (i, &t) in targets.iter().enumerate() {
            let exact = anti(t) - anti(0.0);
            assert!((r.inner[i] - exact).norm() < 1e-9, "inner at {t}");
            let exact_out = anti(s_top) - anti(t);
            assert!((r.outer[i] - exact_out).norm() < 1e-9, "outer at {t}");
        }
    }

    #[test]
    fn component_filon_matches_brute() {
        // same oscillatory integrand through the component path with the
        // carrier made explicit: slow = (1-s)^{-1/2+eps}, carrier = -omega
        let om = 60.0;
        let eps = 0.05;
        let lam = C::new(0.5 + eps, om);
        let slow = move |s: f64| C::new((1.0 - s).powf(-0.5 + eps), 0.0);
        let targets = vec![0.25, 0.7];
        let comps_i = [Component { carrier: -om, slow: Box::new(slow) }];
        let comps_o = [Component { carrier: -om, slow: Box::new(slow) }];
        let r = cumulative_components(&targets, om, 33.0, 12, &comps_i, &comps_o);
        let anti = |s: f64| -(C::new((1.0 - s).ln(), 0.0) * lam).exp() / lam;
        for (i, &t) in targets.iter().enumerate() {
            let exact = anti(t) - anti(0.0);
            assert!(
                (r.inner[i] - exact).norm() < 1e-9,
                "inner at {t}: {} vs {exact}",
                r.inner[i]
            );
            let exact_out = anti(1.0 - 1e-30) - anti(t);
            assert!((r.outer[i] - exact_out).norm() < 1e-9, "outer at {t}");
        }
    }

    #[test]
    fn component_mixed_carriers() {
        // f = (1-s)^{i w} + (1+s)^{i w}: second piece has no (1-s) carrier
        let om = 50.0;
        let targets = vec![0.5];
        let c1 = move |s: f64| C::new(1.0, 0.0) * C::new((1.0 - s).powf(0.3), 0.0);
        let c2 = move |s: f64| (C::new(0.0, om * (1.0 + s).ln())).exp() * (1.0 - s).powf(0.3);
        let comps_i: [Component; 2] = [
            Component { carrier: -om, slow: Box::new(c1) },
            Component { carrier: 0.0, slow: Box::new(c2) },
        ];
        let comps_o: [Component; 2] = [
            Component { carrier: -om, slow: Box::new(c1) },
            Component { carrier: 0.0, slow: Box::new(c2) },
        ];
        let r = cumulative_components(&targets, om, 40.0, 12, &comps_i, &comps_o);
        // dense reference
        let f = |s: f64| {
            (C::new(0.0, om * (1.0 - s).ln())).exp() * (1.0 - s).powf(0.3)
                + (C::new(0.0, om * (1.0 + s).ln())).exp() * (1.0 - s).powf(0.3)
        };
        let dense = cumulative_split(&targets, om, 40.0, 10, f, f);
        assert!(
            (r.inner[0] - dense.inner[0]).norm() < 1e-8,
            "{} vs {}",
            r.inner[0],
            dense.inner[0]
        );
        assert!((r.outer[0] - dense.outer[0]).norm() < 1e-8);
    }

    #[test]
    fn line_integral_lorentzian() {
        for &a in &[0.5, 2.0, -1.3] {
            let v = osc_integral_line(|w| C::new(1.0, 0.0) / C::new(1.0 + w * w, 0.0), a, 400.0, 0.5);
            let exact = std::f64::consts::PI * (-(a as f64).abs()).exp();
            assert!((v.re - exact).abs() < 1e-6, "a={a}: {} vs {exact}", v.re);
            assert!(v.im.abs() < 1e-6);
        }
    }
}
