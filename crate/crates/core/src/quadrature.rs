use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::uniform_nodes;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("rule needs at least 3 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("composite Simpson needs an odd node count, got {0}")]
    EvenSimpson(usize),
    #[error("invalid interval [{0}, {1}]")]
    Interval(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Trapezoid,
    Simpson,
}

/// A composite rule on uniform nodes of `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub lo: f64,
    pub hi: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn new(kind: RuleKind, lo: f64, hi: f64, n: usize) -> Result<Self, QuadratureError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(QuadratureError::Interval(lo, hi));
        }
        if n < 3 {
            return Err(QuadratureError::TooFewNodes(n));
        }
        let h = (hi - lo) / (n - 1) as f64;
        let weights = match kind {
            RuleKind::Trapezoid => segment_weights(n - 1, h, SegmentScheme::Trapezoid),
            RuleKind::Simpson => {
                if n % 2 == 0 {
                    return Err(QuadratureError::EvenSimpson(n));
                }
                segment_weights(n - 1, h, SegmentScheme::Simpson)
            }
        };
        Ok(Self { lo, hi, nodes: uniform_nodes(lo, hi, n), weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

#[derive(Clone, Copy)]
enum SegmentScheme {
    Trapezoid,
    Simpson,
}

/// Weights for `m` panels of width `h`. Simpson falls back to a closing 3/8
/// panel triple when `m` is odd, and to the trapezoid rule when `m = 1`.
fn segment_weights(m: usize, h: f64, scheme: SegmentScheme) -> Vec<f64> {
    let mut w = vec![0.0; m + 1];
    match (scheme, m) {
        (_, 0) => {}
        (SegmentScheme::Trapezoid, _) | (_, 1) => {
            w.iter_mut().for_each(|x| *x = h);
            w[0] = h / 2.0;
            w[m] = h / 2.0;
        }
        (SegmentScheme::Simpson, _) if m % 2 == 0 => {
            for (k, x) in w.iter_mut().enumerate() {
                *x = if k % 2 == 1 { 4.0 } else { 2.0 } * h / 3.0;
            }
            w[0] = h / 3.0;
            w[m] = h / 3.0;
        }
        (SegmentScheme::Simpson, _) => {
            let head = segment_weights(m - 3, h, SegmentScheme::Simpson);
            for (x, y) in w.iter_mut().zip(head) {
                *x += y;
            }
            for (k, c) in [3.0, 9.0, 9.0, 3.0].into_iter().enumerate() {
                w[m - 3 + k] += c * h / 8.0;
            }
        }
    }
    w
}

/// Row weights that split the integral at node `j`: Simpson-type weights on
/// `[lo, t_j]` and on `[t_j, hi]`, as `(node, weight)` pairs.
///
/// Kernels with a derivative jump on the diagonal are smooth on each side, so
/// the split keeps the composite rule at full order. A one-panel segment next
/// to the boundary borrows the neighbouring node across `t_j` (weights
/// `(5, 8, -1) h / 12`); callers must evaluate the integrand there through the
/// branch of the segment it belongs to.
pub fn split_weights(n: usize, h: f64, j: usize) -> (Vec<(usize, f64)>, Vec<(usize, f64)>) {
    let one_panel = |near: usize, far: usize, extra: usize| vec![(near, 5.0 * h / 12.0), (far, 8.0 * h / 12.0), (extra, -h / 12.0)];
    let left = if j == 1 && n >= 3 {
        one_panel(0, 1, 2)
    } else {
        segment_weights(j, h, SegmentScheme::Simpson).into_iter().enumerate().collect()
    };
    let right = if n - 1 - j == 1 && n >= 3 {
        one_panel(n - 1, n - 2, n - 3)
    } else {
        segment_weights(n - 1 - j, h, SegmentScheme::Simpson).into_iter().enumerate().map(|(k, w)| (j + k, w)).collect()
    };
    (left, right)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_node_rules() {
        let t = QuadratureRule::new(RuleKind::Trapezoid, 0.0, 1.0, 3).unwrap();
        assert_eq!(t.weights, vec![0.25, 0.5, 0.25]);
        let s = QuadratureRule::new(RuleKind::Simpson, 0.0, 1.0, 3).unwrap();
        for (w, e) in s.weights.iter().zip([1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0]) {
            assert!((w - e).abs() < 1e-16);
        }
        assert!((s.integrate(|x| x * (1.0 - x)) - 1.0 / 6.0).abs() < 1e-16);
    }

    #[test]
    fn simpson_rejects_even_counts() {
        assert_eq!(QuadratureRule::new(RuleKind::Simpson, 0.0, 1.0, 4), Err(QuadratureError::EvenSimpson(4)));
        assert_eq!(QuadratureRule::new(RuleKind::Trapezoid, 0.0, 1.0, 2), Err(QuadratureError::TooFewNodes(2)));
    }

    #[test]
    fn weights_sum_to_length() {
        for n in [3, 5, 51, 201] {
            for kind in [RuleKind::Trapezoid, RuleKind::Simpson] {
                let r = QuadratureRule::new(kind, 0.25, 0.75, n).unwrap();
                assert!((r.weights.iter().sum::<f64>() - 0.5).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn split_rows_are_exact_on_quadratics() {
        let n = 12;
        let h = 1.0 / (n - 1) as f64;
        let f = |x: f64| 1.0 - 2.0 * x + 3.0 * x * x;
        let exact = |x: f64| x - x * x + x.powi(3);
        for j in 0..n {
            let (l, r) = split_weights(n, h, j);
            let t = j as f64 * h;
            let left: f64 = l.iter().map(|&(k, w)| w * f(k as f64 * h)).sum();
            let right: f64 = r.iter().map(|&(k, w)| w * f(k as f64 * h)).sum();
            assert!((left - exact(t)).abs() < 1e-13, "left j={j}");
            assert!((right - (exact(1.0) - exact(t))).abs() < 1e-13, "right j={j}");
        }
    }
}
