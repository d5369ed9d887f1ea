use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid needs at least 3 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("invalid grid interval [{lo}, {hi}]")]
    BadInterval { lo: f64, hi: f64 },
    #[error("derivative array has {found} entries, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("non-finite value at node {0}")]
    NonFinite(usize),
}

/// A function sampled on the uniform grid `t_j = lo + j h`, `h = (hi - lo)/(N - 1)`,
/// together with derivative values at the same nodes.
///
/// Derivatives either come from the producer (e.g. a kernel-derivative
/// quadrature) or from finite differences of the values: centered at interior
/// nodes, second-order one-sided at the two endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    lo: f64,
    hi: f64,
    values: Vec<f64>,
    derivative: Vec<f64>,
}

impl GridFunction {
    pub fn new(lo: f64, hi: f64, values: Vec<f64>, derivative: Vec<f64>) -> Result<Self, GridError> {
        if values.len() < 3 {
            return Err(GridError::TooFewNodes(values.len()));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(GridError::BadInterval { lo, hi });
        }
        if derivative.len() != values.len() {
            return Err(GridError::LengthMismatch { expected: values.len(), found: derivative.len() });
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite(j));
        }
        Ok(Self { lo, hi, values, derivative })
    }

    pub fn from_values(lo: f64, hi: f64, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() < 3 {
            return Err(GridError::TooFewNodes(values.len()));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(GridError::BadInterval { lo, hi });
        }
        let derivative = finite_difference(&values, (hi - lo) / (values.len() - 1) as f64);
        Self::new(lo, hi, values, derivative)
    }

    /// Samples `f` on `n` nodes of `[0, 1]`, derivatives by finite differences.
    pub fn sample(n: usize, f: impl Fn(f64) -> f64) -> Result<Self, GridError> {
        Self::sample_on(0.0, 1.0, n, f)
    }

    pub fn sample_on(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self, GridError> {
        let values = uniform_nodes(lo, hi, n).into_iter().map(f).collect();
        Self::from_values(lo, hi, values)
    }

    /// Samples `f` and its exact derivative `df` on `n` nodes of `[0, 1]`.
    pub fn sample_with_derivative(
        n: usize,
        f: impl Fn(f64) -> f64,
        df: impl Fn(f64) -> f64,
    ) -> Result<Self, GridError> {
        let nodes = uniform_nodes(0.0, 1.0, n);
        let values = nodes.iter().map(|&t| f(t)).collect();
        let derivative = nodes.iter().map(|&t| df(t)).collect();
        Self::new(0.0, 1.0, values, derivative)
    }

    pub fn zeros(n: usize) -> Result<Self, GridError> {
        Self::new(0.0, 1.0, vec![0.0; n], vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.len() - 1) as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        if j + 1 == self.len() {
            self.hi
        } else {
            self.lo + j as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        uniform_nodes(self.lo, self.hi, self.len())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn derivative(&self) -> &[f64] {
        &self.derivative
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.values, self.derivative)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `max_j |self_j - other_j|` over values only.
    pub fn distance(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Linear combination `alpha * self + shift`, derivative `alpha * self'`.
    pub fn affine(&self, alpha: f64, shift: f64) -> GridFunction {
        GridFunction {
            lo: self.lo,
            hi: self.hi,
            values: self.values.iter().map(|v| alpha * v + shift).collect(),
            derivative: self.derivative.iter().map(|d| alpha * d).collect(),
        }
    }
}

pub fn uniform_nodes(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let h = (hi - lo) / (n.max(2) - 1) as f64;
    (0..n).map(|j| if j + 1 == n { hi } else { lo + j as f64 * h }).collect()
}

fn finite_difference(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let mut d = vec![0.0; n];
    for j in 1..n - 1 {
        d[j] = (values[j + 1] - values[j - 1]) / (2.0 * h);
    }
    d[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
    d[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
    d
}
