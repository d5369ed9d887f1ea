//! Discretised Hammerstein operator and its fixed points.
//!
//! On `N` uniform nodes the state is `x = (u, v, u', v')`. With
//! `g_i = p(t) f_i(r(t), u, v, |u'|/|r'|, |v'|/|r'|)` evaluated node by node,
//!
//! ```text
//! T(x) = (K1 g1, K2 g2, D1 g1, D2 g2)
//! ```
//!
//! where `K_i` are kink-aware Nyström matrices of `k_i` and `D_i` those of
//! `∂k_i/∂t`. Fixed points of `T` are discrete radial solutions. Boundary
//! values `u(0) = u(1) = v(0) = v'(1) = 0` are rows of `T` that vanish
//! identically, so they hold for every iterate.
//!
//! Negative values of `u, v` are replaced by `0` inside `f_i`, the usual
//! extension of a nonlinearity given only on the positive cone.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::cone::{cone_membership, ConeVerdict, WeightedSpaceTag};
use crate::expr::EvalError;
use crate::geometry::{AnnulusGeometry, GeometryError};
use crate::grid::{GridError, GridFunction};
use crate::kernels::{Kernel, WindowPair};
use crate::par;
use crate::problem::ProblemSpec;
use crate::spectral::{split_derivative_matrix, split_nystrom_matrix, LinearOperator};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("evaluating g at node {node} (t = {t}): {source}")]
    Eval { node: usize, t: f64, source: EvalError },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("need at least 3 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("grids do not conform: expected {expected} nodes on [0, 1], got {got}")]
    Mismatch { expected: usize, got: usize },
    #[error("singular Jacobian at Newton iteration {iteration}")]
    Singular { iteration: usize },
    #[error("iteration {iteration} diverged (norm {norm:e})")]
    Diverged { iteration: usize, norm: f64 },
}

/// Right-hand sides `(g1, g2)` of the radial system at one node.
pub trait Source: Sync {
    /// `state = (u, v, u', v')` at `t`.
    fn g(&self, t: f64, state: [f64; 4]) -> Result<[f64; 2], EvalError>;
}

/// `g_i = p(t) f_i(r(t), u⁺, v⁺, |u'|/|r'(t)|, |v'|/|r'(t)|)`.
impl Source for ProblemSpec {
    fn g(&self, t: f64, s: [f64; 4]) -> Result<[f64; 2], EvalError> {
        let geo: &AnnulusGeometry = &self.geometry;
        let r = geo.radial_map_unchecked(t);
        let rp = geo.radial_derivative_unchecked(t).abs();
        let p = geo.weight_p_unchecked(t);
        let point = [r, s[0].max(0.0), s[1].max(0.0), s[2].abs() / rp, s[3].abs() / rp];
        Ok([p * self.f[0].expr.evaluate(&point)?, p * self.f[1].expr.evaluate(&point)?])
    }
}

/// A state-independent source `t -> (g1(t), g2(t))`.
pub struct FixedSource<F>(pub F);

impl<F: Fn(f64) -> [f64; 2] + Sync> Source for FixedSource<F> {
    fn g(&self, t: f64, _: [f64; 4]) -> Result<[f64; 2], EvalError> {
        Ok((self.0)(t))
    }
}

/// `(g1, g2)` of a problem at a single point; `t` must lie in `[0, 1]`.
pub fn transform_g(problem: &ProblemSpec, t: f64, u: f64, v: f64, du: f64, dv: f64) -> Result<(f64, f64), SolveError> {
    problem.geometry.radial_map(t)?;
    let [g1, g2] = problem.g(t, [u, v, du, dv]).map_err(|source| SolveError::Eval { node: 0, t, source })?;
    Ok((g1, g2))
}

/// Quadrature matrices of `T` on `N` nodes of `[0, 1]`.
#[derive(Debug, Clone)]
pub struct HammersteinOperator {
    nodes: Vec<f64>,
    k: [DMatrix<f64>; 2],
    d: [DMatrix<f64>; 2],
}

impl HammersteinOperator {
    pub fn new(n: usize) -> Result<Self, SolveError> {
        if n < 3 {
            return Err(SolveError::TooFewNodes(n));
        }
        let k1 = split_nystrom_matrix(LinearOperator::L1, n).map_err(|_| SolveError::TooFewNodes(n))?;
        let k2 = split_nystrom_matrix(LinearOperator::L2, n).map_err(|_| SolveError::TooFewNodes(n))?;
        Ok(Self {
            nodes: crate::grid::uniform_nodes(0.0, 1.0, n),
            k: [k1, k2],
            d: [split_derivative_matrix(Kernel::K1, n), split_derivative_matrix(Kernel::K2, n)],
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    fn spacing(&self) -> f64 {
        1.0 / (self.len() - 1) as f64
    }

    /// The matrix producing component `c` of `T(x)` (0: u, 1: v, 2: u', 3: v').
    fn matrix(&self, c: usize) -> &DMatrix<f64> {
        if c < 2 {
            &self.k[c]
        } else {
            &self.d[c - 2]
        }
    }

    /// `g` at every node of the flat state `x`.
    pub fn source_values<S: Source + ?Sized>(&self, source: &S, x: &[f64]) -> Result<[Vec<f64>; 2], SolveError> {
        let n = self.len();
        let mut g = [vec![0.0; n], vec![0.0; n]];
        for j in 0..n {
            let t = self.nodes[j];
            let s = [x[j], x[n + j], x[2 * n + j], x[3 * n + j]];
            let [a, b] = source.g(t, s).map_err(|source| SolveError::Eval { node: j, t, source })?;
            g[0][j] = a;
            g[1][j] = b;
        }
        Ok(g)
    }

    /// `T(x)` and the node values of `g` it used.
    pub fn apply_flat<S: Source + ?Sized>(&self, source: &S, x: &[f64]) -> Result<(Vec<f64>, [Vec<f64>; 2]), SolveError> {
        let n = self.len();
        let g = self.source_values(source, x)?;
        let gv = [DVector::from_column_slice(&g[0]), DVector::from_column_slice(&g[1])];
        let mut out = Vec::with_capacity(4 * n);
        for c in 0..4 {
            out.extend((self.matrix(c) * &gv[c % 2]).iter());
        }
        Ok((out, g))
    }

    /// Unknowns of the Newton system: everything not pinned by a boundary
    /// condition.
    fn active(&self) -> Vec<usize> {
        let n = self.len();
        let mut idx = Vec::with_capacity(4 * n - 4);
        idx.extend(1..n - 1);
        idx.extend(n + 1..2 * n);
        idx.extend(2 * n..3 * n);
        idx.extend(3 * n..4 * n - 1);
        idx
    }

    /// `∂g_i(t_j)/∂x_c(t_j)` by central differences, indexed `[i][c][j]`.
    fn source_jacobian<S: Source + ?Sized>(&self, source: &S, x: &[f64]) -> Result<[[Vec<f64>; 4]; 2], SolveError> {
        let n = self.len();
        let rows = par::map_range(n, |j| -> Result<[[f64; 4]; 2], SolveError> {
            let t = self.nodes[j];
            let s = [x[j], x[n + j], x[2 * n + j], x[3 * n + j]];
            let mut out = [[0.0; 4]; 2];
            for c in 0..4 {
                let h = 1e-6 * s[c].abs().max(1.0);
                let (mut sp, mut sm) = (s, s);
                sp[c] += h;
                sm[c] -= h;
                let eval = |st| source.g(t, st).map_err(|source| SolveError::Eval { node: j, t, source });
                let (gp, gm) = (eval(sp)?, eval(sm)?);
                for i in 0..2 {
                    out[i][c] = (gp[i] - gm[i]) / (2.0 * h);
                }
            }
            Ok(out)
        });
        let mut dg: [[Vec<f64>; 4]; 2] = Default::default();
        for row in dg.iter_mut() {
            for col in row.iter_mut() {
                *col = vec![0.0; n];
            }
        }
        for (j, r) in rows.into_iter().enumerate() {
            let r = r?;
            for i in 0..2 {
                for c in 0..4 {
                    dg[i][c][j] = r[i][c];
                }
            }
        }
        Ok(dg)
    }
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn sup(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// `T(u, v)`; the derivative arrays of `u, v` feed the gradient arguments.
pub fn apply_t<S: Source + ?Sized>(source: &S, u: &GridFunction, v: &GridFunction) -> Result<(GridFunction, GridFunction), SolveError> {
    let n = u.len();
    for w in [u, v] {
        if w.len() != n || w.lo() != 0.0 || w.hi() != 1.0 {
            return Err(SolveError::Mismatch { expected: n, got: w.len() });
        }
    }
    let op = HammersteinOperator::new(n)?;
    let x = flatten(u, v);
    let (tx, _) = op.apply_flat(source, &x)?;
    split(&tx, n)
}

fn flatten(u: &GridFunction, v: &GridFunction) -> Vec<f64> {
    [u.values(), v.values(), u.derivative(), v.derivative()].concat()
}

fn split(x: &[f64], n: usize) -> Result<(GridFunction, GridFunction), SolveError> {
    Ok((
        GridFunction::new(0.0, 1.0, x[..n].to_vec(), x[2 * n..3 * n].to_vec())?,
        GridFunction::new(0.0, 1.0, x[n..2 * n].to_vec(), x[3 * n..].to_vec())?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Picard,
    Newton,
}

/// Certification of a discrete solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certification {
    pub nonnegative: bool,
    pub cone_u: ConeVerdict,
    pub cone_v: ConeVerdict,
    pub residual_fp: f64,
    pub fp_tol: f64,
    pub residual_ode: f64,
    pub ode_threshold: f64,
    /// `(component, node)` of the largest ODE residual; component 0 is `u`.
    pub ode_worst: Option<(usize, usize)>,
    /// `‖u‖∞ = ‖v‖∞ = 0`.
    pub trivial: bool,
    pub violations: Vec<String>,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    pub u: GridFunction,
    pub v: GridFunction,
    pub g: [Vec<f64>; 2],
    /// `‖(u, v) - T(u, v)‖∞` on node values.
    pub residual_fp: f64,
    /// Same for the derivative components.
    pub residual_deriv: f64,
    /// Largest `|-(w_{j-1} - 2 w_j + w_{j+1})/h² - g_j|` over interior nodes.
    pub residual_ode: f64,
    pub iterations: usize,
    pub converged: bool,
    pub method: Method,
    /// Total magnitude removed by clipping negative values (Picard only).
    pub clipped: f64,
    pub amplitude: Option<f64>,
    pub certification: Option<Certification>,
}

impl SolveResult {
    pub fn norms(&self) -> (f64, f64) {
        (self.u.sup_norm(), self.v.sup_norm())
    }

    pub fn is_trivial(&self) -> bool {
        self.u.sup_norm() == 0.0 && self.v.sup_norm() == 0.0
    }

    /// Profile table `t,u,v,du,dv,g1,g2`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,u,v,du,dv,g1,g2\n");
        for j in 0..self.u.len() {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                self.u.node(j),
                self.u.values()[j],
                self.v.values()[j],
                self.u.derivative()[j],
                self.v.derivative()[j],
                self.g[0][j],
                self.g[1][j]
            ));
        }
        s
    }
}

fn ode_residual(values: [&[f64]; 2], g: &[Vec<f64>; 2], h: f64) -> (f64, Option<(usize, usize)>) {
    let mut worst = (0.0, None);
    for c in 0..2 {
        let w = values[c];
        for j in 1..w.len() - 1 {
            let r = (-(w[j - 1] - 2.0 * w[j] + w[j + 1]) / (h * h) - g[c][j]).abs();
            if r > worst.0 || worst.1.is_none() {
                worst = (r, Some((c, j)));
            }
        }
    }
    worst
}

fn build_result<S: Source + ?Sized>(
    op: &HammersteinOperator,
    source: &S,
    x: Vec<f64>,
    iterations: usize,
    converged: bool,
    method: Method,
    clipped: f64,
) -> Result<SolveResult, SolveError> {
    let n = op.len();
    let (tx, g) = op.apply_flat(source, &x)?;
    let residual_fp = sup_diff(&x[..2 * n], &tx[..2 * n]);
    let residual_deriv = sup_diff(&x[2 * n..], &tx[2 * n..]);
    let (residual_ode, _) = ode_residual([&x[..n], &x[n..2 * n]], &g, op.spacing());
    let (u, v) = split(&x, n)?;
    Ok(SolveResult {
        u,
        v,
        g,
        residual_fp,
        residual_deriv,
        residual_ode,
        iterations,
        converged,
        method,
        clipped,
        amplitude: None,
        certification: None,
    })
}

const DIVERGENCE_NORM: f64 = 1e6;

/// Damped successive approximation `x <- (1 - d) x + d T(x)`.
///
/// Negative node values of `u, v` are clipped to zero after each step and the
/// clipped amount is accumulated. Reaching `maxit` returns an unconverged
/// result; a state norm above `1e6` is an error.
pub fn picard_solve<S: Source + ?Sized>(
    source: &S,
    initial: (&GridFunction, &GridFunction),
    damping: f64,
    tol: f64,
    maxit: usize,
) -> Result<SolveResult, SolveError> {
    let (u0, v0) = initial;
    let n = u0.len();
    if v0.len() != n {
        return Err(SolveError::Mismatch { expected: n, got: v0.len() });
    }
    let op = HammersteinOperator::new(n)?;
    let mut x = flatten(u0, v0);
    let mut clipped = 0.0;
    for it in 0..=maxit {
        let (tx, _) = op.apply_flat(source, &x)?;
        if sup_diff(&x, &tx) <= tol {
            return build_result(&op, source, x, it, true, Method::Picard, clipped);
        }
        if it == maxit {
            break;
        }
        for (a, b) in x.iter_mut().zip(&tx) {
            *a = (1.0 - damping) * *a + damping * b;
        }
        for a in x[..2 * n].iter_mut() {
            if *a < 0.0 {
                clipped += -*a;
                *a = 0.0;
            }
        }
        let norm = sup(&x);
        if !norm.is_finite() || norm > DIVERGENCE_NORM {
            return Err(SolveError::Diverged { iteration: it + 1, norm });
        }
    }
    build_result(&op, source, x, maxit, false, Method::Picard, clipped)
}

/// Newton's method on `R(x) = x - T(x)` over the `4N - 4` unpinned unknowns.
///
/// The Jacobian is `I - M diag(∂g)`, with the node-local partial derivatives
/// of `g` taken by central differences (step `1e-6` relative). Each step is
/// halved up to 30 times until `‖R‖∞` decreases.
pub fn newton_solve<S: Source + ?Sized>(
    source: &S,
    initial: (&GridFunction, &GridFunction),
    tol: f64,
    maxit: usize,
) -> Result<SolveResult, SolveError> {
    let (u0, v0) = initial;
    let n = u0.len();
    if v0.len() != n {
        return Err(SolveError::Mismatch { expected: n, got: v0.len() });
    }
    let op = HammersteinOperator::new(n)?;
    let active = op.active();
    let m = active.len();
    let mut x = flatten(u0, v0);
    // pinned components start (and stay) at their boundary values
    for (k, xk) in x.iter_mut().enumerate() {
        if !active.contains(&k) {
            *xk = 0.0;
        }
    }
    let residual = |x: &[f64]| -> Result<Vec<f64>, SolveError> {
        let (tx, _) = op.apply_flat(source, x)?;
        Ok(x.iter().zip(&tx).map(|(a, b)| a - b).collect())
    };
    let mut r = residual(&x)?;
    let mut rn = sup(&r);
    for it in 0..maxit {
        if rn <= tol {
            return build_result(&op, source, x, it, true, Method::Newton, 0.0);
        }
        let dg = op.source_jacobian(source, &x)?;
        let mut jac = DMatrix::<f64>::identity(m, m);
        for (a, &ka) in active.iter().enumerate() {
            let (c, j) = (ka / n, ka % n);
            let mat = op.matrix(c);
            let i = c % 2;
            for (b, &kb) in active.iter().enumerate() {
                let (c2, l) = (kb / n, kb % n);
                let d = dg[i][c2][l];
                if d != 0.0 {
                    jac[(a, b)] -= mat[(j, l)] * d;
                }
            }
        }
        let rhs = DVector::from_iterator(m, active.iter().map(|&k| -r[k]));
        let delta = jac.lu().solve(&rhs).ok_or(SolveError::Singular { iteration: it })?;
        if delta.iter().any(|d| !d.is_finite()) {
            return Err(SolveError::Singular { iteration: it });
        }
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=30 {
            let mut trial = x.clone();
            for (a, &k) in active.iter().enumerate() {
                trial[k] += lambda * delta[a];
            }
            if let Ok(rt) = residual(&trial) {
                let rtn = sup(&rt);
                if rtn < rn {
                    x = trial;
                    r = rt;
                    rn = rtn;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        let norm = sup(&x);
        if !norm.is_finite() || norm > DIVERGENCE_NORM {
            return Err(SolveError::Diverged { iteration: it + 1, norm });
        }
        if !accepted {
            return build_result(&op, source, x, it + 1, false, Method::Newton, 0.0);
        }
    }
    let converged = rn <= tol;
    build_result(&op, source, x, maxit, converged, Method::Newton, 0.0)
}

/// Checks nonnegativity, both cone memberships, the fixed-point residual and
/// the second-difference ODE residual of `(u, v)`.
pub fn verify_with<S: Source + ?Sized>(
    source: &S,
    windows: &WindowPair,
    u: &GridFunction,
    v: &GridFunction,
    fp_tol: f64,
    cone_tol: f64,
) -> Result<Certification, SolveError> {
    let n = u.len();
    if v.len() != n {
        return Err(SolveError::Mismatch { expected: n, got: v.len() });
    }
    let op = HammersteinOperator::new(n)?;
    let x = flatten(u, v);
    let (tx, g) = op.apply_flat(source, &x)?;
    let residual_fp = sup_diff(&x[..2 * n], &tx[..2 * n]);
    let h = op.spacing();
    let (residual_ode, ode_worst) = ode_residual([u.values(), v.values()], &g, h);
    let gmax = sup(&g[0]).max(sup(&g[1]));
    let ode_threshold = 1e3 * h * h * gmax.max(1.0);
    let cone_u = cone_membership(u, &WeightedSpaceTag::for_component(windows, Kernel::K1), cone_tol);
    let cone_v = cone_membership(v, &WeightedSpaceTag::for_component(windows, Kernel::K2), cone_tol);
    let nonnegative = cone_u.nonnegative.pass && cone_v.nonnegative.pass;
    let trivial = cone_u.trivial && cone_v.trivial;

    let mut violations = Vec::new();
    if !nonnegative {
        violations.push("negative values".to_string());
    }
    for (name, verdict) in [("u", &cone_u), ("v", &cone_v)] {
        if !verdict.member {
            for (what, check) in [("window", &verdict.window), ("derivative", &verdict.derivative)] {
                if !check.pass {
                    violations.push(format!(
                        "{name}: {what} inequality fails by {:e} at node {}",
                        -check.margin,
                        check.worst_node.map_or("-".into(), |j| j.to_string())
                    ));
                }
            }
        }
    }
    if residual_fp > fp_tol {
        violations.push(format!("fixed-point residual {residual_fp:e} exceeds {fp_tol:e}"));
    }
    if residual_ode > ode_threshold {
        let (c, j) = ode_worst.unwrap_or((0, 0));
        violations.push(format!(
            "ODE residual {residual_ode:e} exceeds {ode_threshold:e} for {} at node {j}",
            if c == 0 { "u" } else { "v" }
        ));
    }
    Ok(Certification {
        nonnegative,
        cone_u,
        cone_v,
        residual_fp,
        fp_tol,
        residual_ode,
        ode_threshold,
        ode_worst,
        trivial,
        verified: violations.is_empty(),
        violations,
    })
}

/// [`verify_with`] for a problem, at the problem's solver tolerance and cone
/// tolerance `1e-6`.
pub fn verify_solution(result: &SolveResult, problem: &ProblemSpec) -> Result<Certification, SolveError> {
    verify_with(problem, &problem.windows, &result.u, &result.v, problem.solver.tol, 1e-6)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StartFailure {
    pub amplitude: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiStart {
    /// Distinct converged solutions, each certified.
    pub solutions: Vec<SolveResult>,
    pub failures: Vec<StartFailure>,
}

impl MultiStart {
    /// Verified solutions with `‖u‖∞ + ‖v‖∞ > 0`.
    pub fn nontrivial(&self) -> impl Iterator<Item = &SolveResult> {
        self.solutions
            .iter()
            .filter(|s| !s.is_trivial() && s.certification.as_ref().is_some_and(|c| c.verified))
    }
}

/// Initial profile `(amp sin(πt), amp sin(πt/2))` with exact derivatives.
pub fn initial_guess(n: usize, amplitude: f64) -> Result<(GridFunction, GridFunction), SolveError> {
    use std::f64::consts::PI;
    let u = GridFunction::sample_with_derivative(n, |t| amplitude * (PI * t).sin(), |t| amplitude * PI * (PI * t).cos())?;
    let v = GridFunction::sample_with_derivative(
        n,
        |t| amplitude * (0.5 * PI * t).sin(),
        |t| amplitude * 0.5 * PI * (0.5 * PI * t).cos(),
    )?;
    Ok((u, v))
}

const DISTINCT: f64 = 1e-4;

/// Newton from each amplitude in parallel; converged results are certified
/// and merged when closer than `1e-4` in the sup norm. The zero state is added
/// when it is itself a fixed point.
pub fn multi_start(problem: &ProblemSpec, amplitudes: &[f64]) -> Result<MultiStart, SolveError> {
    let cfg = &problem.solver;
    let n = cfg.nodes;
    let runs = par::map_slice(amplitudes, |&amp| -> Result<SolveResult, String> {
        let (u, v) = initial_guess(n, amp).map_err(|e| e.to_string())?;
        let mut res = newton_solve(problem, (&u, &v), cfg.tol, cfg.maxit).map_err(|e| e.to_string())?;
        res.amplitude = Some(amp);
        if !res.converged {
            return Err(format!("not converged after {} iterations (residual {:e})", res.iterations, res.residual_fp));
        }
        Ok(res)
    });

    let mut candidates = Vec::new();
    let mut failures = Vec::new();
    for (&amplitude, run) in amplitudes.iter().zip(runs) {
        match run {
            Ok(r) => candidates.push(r),
            Err(reason) => failures.push(StartFailure { amplitude, reason }),
        }
    }
    let zero = GridFunction::zeros(n)?;
    let zero_run = build_result(&HammersteinOperator::new(n)?, problem, flatten(&zero, &zero), 0, true, Method::Newton, 0.0)?;
    if zero_run.residual_fp.max(zero_run.residual_deriv) <= cfg.tol {
        candidates.push(zero_run);
    }

    let mut solutions: Vec<SolveResult> = Vec::new();
    for mut c in candidates {
        let distinct = solutions
            .iter()
            .all(|s| s.u.distance(&c.u).max(s.v.distance(&c.v)) > DISTINCT);
        if distinct {
            c.certification = Some(verify_solution(&c, problem)?);
            solutions.push(c);
        }
    }
    Ok(MultiStart { solutions, failures })
}
