//! Principal characteristic values `μ(L) = 1 / r(L)` of the linear Hammerstein
//! operators `L_i u(t) = ∫_0^1 k_i(t, s) u(s) ds` and of their restrictions
//! `L̄_i u(t) = ∫_a^b k_i(t, s) u(s) ds`, `t ∈ [a, b]`.
//!
//! The production path is a Nyström discretisation followed by power
//! iteration from the all-ones vector. Two independent references are reported
//! next to it: the textbook closed forms and a shooting oracle built from the
//! boundary relations the restricted operators satisfy after differentiating
//! twice, `(L̄u)'' = -u` with
//!
//! ```text
//! L̄u(a) = a (L̄u)'(a)                       (both kernels)
//! L̄₁u(b) = -(1 - b) (L̄₁u)'(b),   (L̄₂u)'(b) = 0.
//! ```

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{uniform_nodes, GridError, GridFunction};
use crate::kernels::{Kernel, Side};
use crate::quadrature::{split_weights, QuadratureRule};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("operator {op} expects the interval [{lo}, {hi}], rule is on [{got_lo}, {got_hi}]")]
    WrongInterval { op: String, lo: f64, hi: f64, got_lo: f64, got_hi: f64 },
    #[error("restricted window [{0}, {1}] must satisfy 0 <= a < b <= 1")]
    Window(f64, f64),
    #[error("matrix has a negative entry at ({0}, {1})")]
    NegativeEntry(usize, usize),
    #[error("matrix maps the start vector to zero")]
    ZeroRadius,
    #[error("power iteration did not converge in {iterations} steps (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("no sign change of the boundary mismatch in [{0:e}, {1:e}]")]
    NoRoot(f64, f64),
    #[error("need at least 3 nodes, got {0}")]
    TooFewNodes(usize),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// One of the four linear operators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "operator", rename_all = "snake_case")]
pub enum LinearOperator {
    L1,
    L2,
    L1Bar { a: f64, b: f64 },
    L2Bar { a: f64, b: f64 },
}

impl LinearOperator {
    pub fn kernel(&self) -> Kernel {
        match self {
            LinearOperator::L1 | LinearOperator::L1Bar { .. } => Kernel::K1,
            LinearOperator::L2 | LinearOperator::L2Bar { .. } => Kernel::K2,
        }
    }

    pub fn interval(&self) -> (f64, f64) {
        match *self {
            LinearOperator::L1 | LinearOperator::L2 => (0.0, 1.0),
            LinearOperator::L1Bar { a, b } | LinearOperator::L2Bar { a, b } => (a, b),
        }
    }

    pub fn restricted(kernel: Kernel, a: f64, b: f64) -> Self {
        match kernel {
            Kernel::K1 => LinearOperator::L1Bar { a, b },
            Kernel::K2 => LinearOperator::L2Bar { a, b },
        }
    }

    pub fn full(kernel: Kernel) -> Self {
        match kernel {
            Kernel::K1 => LinearOperator::L1,
            Kernel::K2 => LinearOperator::L2,
        }
    }

    pub fn name(&self) -> String {
        match *self {
            LinearOperator::L1 => "L1".into(),
            LinearOperator::L2 => "L2".into(),
            LinearOperator::L1Bar { a, b } => format!("L1bar[{a}, {b}]"),
            LinearOperator::L2Bar { a, b } => format!("L2bar[{a}, {b}]"),
        }
    }

    fn validate(&self) -> Result<(), SpectralError> {
        let (a, b) = self.interval();
        if 0.0 <= a && a < b && b <= 1.0 {
            Ok(())
        } else {
            Err(SpectralError::Window(a, b))
        }
    }

    /// Reference closed forms: `π²`, `π²/4`, `π²/(b-a)²`, `π²/(4(b-a)²)`.
    ///
    /// For the restricted operators these are the pure Dirichlet and
    /// Dirichlet-Neumann values; the shooting oracle shows they are exact only
    /// when `a = 0` (and `b = 1` for `L̄₁`).
    pub fn closed_form(&self) -> f64 {
        let (a, b) = self.interval();
        let len2 = (b - a) * (b - a);
        match self {
            LinearOperator::L1 => PI * PI,
            LinearOperator::L2 => PI * PI / 4.0,
            LinearOperator::L1Bar { .. } => PI * PI / len2,
            LinearOperator::L2Bar { .. } => PI * PI / (4.0 * len2),
        }
    }
}

/// Nyström matrix `A[j][l] = w_l k(t_j, s_l)` for a fixed rule.
pub fn nystrom_matrix(op: LinearOperator, rule: &QuadratureRule) -> Result<DMatrix<f64>, SpectralError> {
    op.validate()?;
    let (lo, hi) = op.interval();
    if (rule.lo - lo).abs() > 1e-14 || (rule.hi - hi).abs() > 1e-14 {
        return Err(SpectralError::WrongInterval {
            op: op.name(),
            lo,
            hi,
            got_lo: rule.lo,
            got_hi: rule.hi,
        });
    }
    let k = op.kernel();
    let n = rule.len();
    Ok(DMatrix::from_fn(n, n, |j, l| rule.weights[l] * k.value(rule.nodes[j], rule.nodes[l])))
}

/// Nyström matrix whose row `j` integrates separately on both sides of the
/// kink at `s = t_j` (composite Simpson with a closing 3/8 panel).
pub fn split_nystrom_matrix(op: LinearOperator, n: usize) -> Result<DMatrix<f64>, SpectralError> {
    op.validate()?;
    if n < 3 {
        return Err(SpectralError::TooFewNodes(n));
    }
    let (lo, hi) = op.interval();
    let k = op.kernel();
    let nodes = uniform_nodes(lo, hi, n);
    let h = (hi - lo) / (n - 1) as f64;
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let (left, right) = split_weights(n, h, j);
        let t = nodes[j];
        for (l, w) in left {
            m[(j, l)] += w * k.branch_value(t, nodes[l], Side::Below);
        }
        for (l, w) in right {
            m[(j, l)] += w * k.branch_value(t, nodes[l], Side::Above);
        }
    }
    Ok(m)
}

/// Matrix of `∂k/∂t` quadrature on `[0, 1]`, split at the diagonal so that each
/// side uses its own one-sided branch.
pub(crate) fn split_derivative_matrix(kernel: Kernel, n: usize) -> DMatrix<f64> {
    let nodes = uniform_nodes(0.0, 1.0, n);
    let h = 1.0 / (n - 1) as f64;
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let (left, right) = split_weights(n, h, j);
        for (l, w) in left {
            m[(j, l)] += w * kernel.dt_side(nodes[l], Side::Below);
        }
        for (l, w) in right {
            m[(j, l)] += w * kernel.dt_side(nodes[l], Side::Above);
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerIteration {
    pub radius: f64,
    /// Nonnegative, `‖v‖∞ = 1`.
    pub vector: Vec<f64>,
    /// `‖A v - radius v‖∞`.
    pub residual: f64,
    pub iterations: usize,
}

/// Power iteration for the Perron root of a nonnegative matrix.
///
/// Stops once `‖A v - r v‖∞ <= tol · r` with `r = ‖A v‖∞`.
pub fn power_iteration(matrix: &DMatrix<f64>, tol: f64, maxit: usize) -> Result<PowerIteration, SpectralError> {
    for (idx, x) in matrix.iter().enumerate() {
        if *x < 0.0 {
            return Err(SpectralError::NegativeEntry(idx % matrix.nrows(), idx / matrix.nrows()));
        }
    }
    let mut v = nalgebra::DVector::from_element(matrix.ncols(), 1.0);
    let mut residual = f64::INFINITY;
    for it in 1..=maxit {
        let y = matrix * &v;
        let r = y.amax();
        if r == 0.0 {
            return Err(SpectralError::ZeroRadius);
        }
        residual = (&y - r * &v).amax();
        if residual <= tol * r {
            return Ok(PowerIteration { radius: r, vector: v.iter().copied().collect(), residual, iterations: it });
        }
        v = y / r;
    }
    Err(SpectralError::NotConverged { iterations: maxit, residual })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub operator: LinearOperator,
    pub nodes: usize,
    pub mu_numeric: f64,
    pub eigenfunction: GridFunction,
    /// `‖μ L v - v‖∞` on the grid.
    pub residual: f64,
    pub mu_closed_form: Option<f64>,
    pub mu_shooting: Option<f64>,
}

impl SpectralResult {
    /// Relative deviation of the closed form from the numeric value.
    pub fn closed_form_deviation(&self) -> Option<f64> {
        self.mu_closed_form.map(|c| (c - self.mu_numeric) / self.mu_numeric)
    }
}

pub const POWER_TOL: f64 = 1e-13;
pub const POWER_MAXIT: usize = 100_000;
pub const SHOOTING_TOL: f64 = 1e-14;

/// Principal characteristic value from the kink-aware Nyström matrix on `n` nodes.
pub fn principal_char_value(op: LinearOperator, n: usize) -> Result<SpectralResult, SpectralError> {
    let matrix = split_nystrom_matrix(op, n)?;
    let pi = power_iteration(&matrix, POWER_TOL, POWER_MAXIT)?;
    let (lo, hi) = op.interval();
    let eigenfunction = GridFunction::from_values(lo, hi, pi.vector)?;
    Ok(SpectralResult {
        operator: op,
        nodes: n,
        mu_numeric: 1.0 / pi.radius,
        eigenfunction,
        residual: pi.residual / pi.radius,
        mu_closed_form: Some(op.closed_form()),
        mu_shooting: Some(shooting_mu(op, SHOOTING_TOL)?),
    })
}

/// Smallest `μ > 0` for which `-φ'' = μ φ` meets the boundary relations of the
/// restricted operator on `[a, b]` (the full operators are the case `[0, 1]`).
///
/// With `k = √μ` and `φ(t) = sin(k(t - a)) + a k cos(k(t - a))` the left
/// relation holds identically; the right one gives a scalar mismatch whose
/// first positive root is bracketed by scanning and refined by bisection.
pub fn shooting_mu(op: LinearOperator, tol: f64) -> Result<f64, SpectralError> {
    op.validate()?;
    let (a, b) = op.interval();
    let len = b - a;
    let mismatch = |k: f64| -> f64 {
        let (s, c) = (k * len).sin_cos();
        match op.kernel() {
            // (φ(b) + (1 - b) φ'(b)) / k
            Kernel::K1 => s / k + a * c + (1.0 - b) * (c - a * k * s),
            // φ'(b) / k
            Kernel::K2 => c - a * k * s,
        }
    };
    let mu_lo = PI * PI / (4.0 * len * len) * 1e-2;
    let mu_hi = PI * PI / (len * len) * 1e2;
    let (k_lo, k_hi) = (mu_lo.sqrt(), mu_hi.sqrt());
    let steps = 4000;
    let dk = (k_hi - k_lo) / steps as f64;
    let mut left = k_lo;
    let mut f_left = mismatch(left);
    for i in 1..=steps {
        let right = k_lo + i as f64 * dk;
        let f_right = mismatch(right);
        if f_left == 0.0 {
            return Ok(left * left);
        }
        if f_left.signum() != f_right.signum() {
            let (mut lo, mut hi, mut f_lo) = (left, right, f_left);
            while hi - lo > 0.5 * tol * hi {
                let mid = 0.5 * (lo + hi);
                let f_mid = mismatch(mid);
                if f_mid == 0.0 {
                    return Ok(mid * mid);
                }
                if f_mid.signum() == f_lo.signum() {
                    lo = mid;
                    f_lo = f_mid;
                } else {
                    hi = mid;
                }
            }
            let k = 0.5 * (lo + hi);
            return Ok(k * k);
        }
        left = right;
        f_left = f_right;
    }
    Err(SpectralError::NoRoot(mu_lo, mu_hi))
}
