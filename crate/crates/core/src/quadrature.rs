//! Gauss–Legendre rules: fixed, composite and adaptive.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Nodes per panel of the composite rules.
pub const PANEL_NODES: usize = 16;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Builds the `n`-point rule by Newton iteration on the Legendre polynomial.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss-Legendre rule needs at least one node");
        // Roots are computed in f64 and then polished in T so that f32 and f64
        // rules agree to their own precision.
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let half = n.div_ceil(2);
        for i in 0..half {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_f64(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_f64(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = T::lit(-x);
            nodes[n - 1 - i] = T::lit(x);
            weights[i] = T::lit(w);
            weights[n - 1 - i] = T::lit(w);
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += *w * f(mid + half * *x);
        }
        acc * half
    }

    /// Pushes the mapped nodes and weights for `[a, b]` onto the given buffers.
    pub fn map_into(&self, a: T, b: T, xs: &mut Vec<T>, ws: &mut Vec<T>) {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            xs.push(mid + half * *x);
            ws.push(*w * half);
        }
    }
}

fn legendre_f64(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule with `ceil(order / PANEL_NODES)` equal panels of
/// [`PANEL_NODES`] points each on `[a, b]`.
pub fn composite_nodes<T: Real>(rule: &GaussLegendre<T>, a: T, b: T, order: usize) -> (Vec<T>, Vec<T>) {
    let panels = order.div_ceil(rule.len()).max(1);
    let mut xs = Vec::with_capacity(panels * rule.len());
    let mut ws = Vec::with_capacity(panels * rule.len());
    let width = (b - a) / T::from_usize_lossy(panels);
    for p in 0..panels {
        let lo = a + width * T::from_usize_lossy(p);
        let hi = if p + 1 == panels { b } else { lo + width };
        rule.map_into(lo, hi, &mut xs, &mut ws);
    }
    (xs, ws)
}

/// Adaptive bisection driven by a Gauss–Legendre rule.
///
/// A panel is accepted when the rule on the whole panel and the sum over its
/// two halves agree within the panel's share of `abs_tol`.
#[derive(Debug, Clone)]
pub struct Adaptive<T> {
    rule: GaussLegendre<T>,
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_depth: usize,
}

impl<T: Real> Adaptive<T> {
    pub fn new(abs_tol: T) -> Self {
        Self {
            rule: GaussLegendre::new(12),
            abs_tol,
            rel_tol: T::EPSILON * T::lit(64.0),
            max_depth: 48,
        }
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> Result<T> {
        if a == b {
            return Ok(T::zero());
        }
        let total = (b - a).abs();
        let mut stack = vec![(a, b, self.rule.integrate(a, b, &mut f), 0usize)];
        let mut acc = T::zero();
        while let Some((lo, hi, whole, depth)) = stack.pop() {
            let mid = (lo + hi) * T::lit(0.5);
            let left = self.rule.integrate(lo, mid, &mut f);
            let right = self.rule.integrate(mid, hi, &mut f);
            let refined = left + right;
            // Proportional share, with a floor so that integrable endpoint
            // singularities (which refine along a single path) terminate.
            let share = (self.abs_tol * (hi - lo).abs() / total).max(self.abs_tol / T::lit(64.0));
            let err = (refined - whole).abs();
            if err <= share.max(self.rel_tol * refined.abs()) {
                acc += refined;
            } else if depth >= self.max_depth {
                return Err(Error::QuadratureNonconvergence(format!(
                    "adaptive rule exceeded depth {} near [{}, {}]",
                    self.max_depth, lo, hi
                )));
            } else {
                // Right first so the left half is summed first.
                stack.push((mid, hi, right, depth + 1));
                stack.push((lo, mid, left, depth + 1));
            }
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 16, 33] {
            let r = GaussLegendre::<f64>::new(n);
            let s: f64 = r.weights().iter().sum();
            assert!((s - 2.0).abs() < 1e-14, "n={n}: {s}");
        }
    }

    #[test]
    fn exact_for_polynomials() {
        let r = GaussLegendre::<f64>::new(8);
        // degree 15 is the highest exactly integrated
        let v = r.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-9);
    }

    #[test]
    fn f32_rule_is_usable() {
        let r = GaussLegendre::<f32>::new(16);
        let v = r.integrate(0.0, std::f32::consts::PI, |x| x.sin());
        assert!((v - 2.0).abs() < 1e-5);
    }

    #[test]
    fn composite_covers_interval() {
        let r = GaussLegendre::<f64>::new(PANEL_NODES);
        let (xs, ws) = composite_nodes(&r, -3.0, 3.0, 40);
        assert_eq!(xs.len(), 48);
        let s: f64 = ws.iter().sum();
        assert!((s - 6.0).abs() < 1e-13);
        let v: f64 = xs.iter().zip(&ws).map(|(x, w)| w * (3.0 * x).cos()).sum();
        assert!((v - 2.0 * (9.0f64).sin() / 3.0).abs() < 1e-13);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let q = Adaptive::new(1e-12);
        let v = q.integrate(0.0, 1.0, |x: f64| x.sqrt()).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
        let v = q.integrate(-1.0, 1.0, |x: f64| 1.0 / (1.0 + 1e4 * x * x)).unwrap();
        let exact = 2.0 * (100.0f64).atan() / 100.0;
        assert!((v - exact).abs() < 1e-11);
    }
}
