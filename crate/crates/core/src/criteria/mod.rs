//! Existence and fixed-point index criteria.
//!
//! Each check builds the stripe sets of its theorem, estimates the relevant
//! sup/inf of `f_i` (or of `f_i / w_i`) and compares with thresholds built from
//! `sup p`, `inf p`, the constants `m_i, M_i` and principal characteristic
//! values. The pointwise conditions `f_i <= κ w_i` are tested in the
//! equivalent form `sup f_i / w_i < κ`.

mod extremum;

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use extremum::{extremum_over_box, ratio_extremum, Certificate, Extremum, Interval, Mode, SetId, StripeBox, Upper};

use crate::expr::{EvalError, Var};
use crate::geometry::GeometryError;
use crate::kernels::{Kernel, KernelError};
use crate::problem::ProblemSpec;
use crate::spectral::{principal_char_value, shooting_mu, split_nystrom_matrix, LinearOperator, SpectralError, SHOOTING_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CriteriaError {
    #[error("evaluation failed at ({point}): {source}")]
    Eval { point: String, source: EvalError },
    #[error("parameters for {set:?}: {message}")]
    Params { set: SetId, message: String },
    #[error("missing parameters: {0}")]
    Missing(&'static str),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Source of the principal characteristic values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MuMode {
    /// `π²`, `π²/4` and the interval analogues `π²/(b-a)²`, `π²/(4(b-a)²)`.
    Paper,
    /// Nyström discretisation with power iteration.
    #[default]
    Numeric,
    /// Shooting on the equivalent boundary value problem.
    Shooting,
}

impl fmt::Display for MuMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MuMode::Paper => "paper",
            MuMode::Numeric => "numeric",
            MuMode::Shooting => "shooting",
        })
    }
}

impl FromStr for MuMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "paper" => Ok(MuMode::Paper),
            "numeric" => Ok(MuMode::Numeric),
            "shooting" => Ok(MuMode::Shooting),
            _ => Err(format!("unknown mu mode `{s}` (expected paper, numeric or shooting)")),
        }
    }
}

/// `μ(op)` under `mode`; `nodes` is the Nyström size for `Numeric`.
pub fn mu_value(op: LinearOperator, mode: MuMode, nodes: usize) -> Result<f64, CriteriaError> {
    Ok(match mode {
        MuMode::Paper => op.closed_form(),
        MuMode::Numeric => principal_char_value(op, nodes)?.mu_numeric,
        MuMode::Shooting => shooting_mu(op, SHOOTING_TOL)?,
    })
}

/// Builds a stripe set.
///
/// `params` are `(ρ1, ρ2)` for `Omega` and `B_i`, `(θ1, θ2)` for `E` and
/// `D_i`, `(s1, s2)` for `A_i`. Unbounded sides carry the sampling cap.
pub fn build_box(set: SetId, problem: &ProblemSpec, params: [f64; 2]) -> Result<StripeBox, CriteriaError> {
    if params.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
        return Err(CriteriaError::Params { set, message: format!("parameters must be positive, got {params:?}") });
    }
    let cap = problem.sampling.cap;
    let g = &problem.geometry;
    let w = &problem.windows;
    let full_r = Interval::bounded(g.inner_radius(), g.outer_radius());
    let r_of = |k: Kernel| -> Result<Interval, CriteriaError> {
        let (a, b) = w.window(k);
        let (lo, hi) = g.radial_range(a, b)?;
        Ok(Interval::bounded(lo, hi))
    };
    let inf = |lo: f64| Interval::unbounded(lo, cap);
    let b = Interval::bounded;
    let [p1, p2] = params;
    let (c1, c2) = (w.c(Kernel::K1), w.c(Kernel::K2));
    let dims = match set {
        SetId::Omega => [full_r, b(0.0, p1), b(0.0, p2), inf(0.0), inf(0.0)],
        SetId::E => [full_r, inf(p1), inf(p2), inf(p1), inf(p2)],
        SetId::B1 => [r_of(Kernel::K1)?, b(0.0, p1), b(0.0, p2), inf(0.0), inf(0.0)],
        SetId::B2 => [r_of(Kernel::K2)?, b(0.0, p1), b(0.0, p2), inf(0.0), inf(0.0)],
        SetId::D1 => [r_of(Kernel::K1)?, inf(c1 * p1), inf(0.0), inf(0.0), inf(0.0)],
        SetId::D2 => [r_of(Kernel::K2)?, inf(0.0), inf(c2 * p2), inf(0.0), inf(0.0)],
        SetId::A1 => [r_of(Kernel::K1)?, b(p1, p1 / c1), b(0.0, p2 / c2), inf(0.0), inf(0.0)],
        SetId::A2 => [r_of(Kernel::K2)?, b(0.0, p1 / c1), b(p2, p2 / c2), inf(0.0), inf(0.0)],
    };
    Ok(StripeBox { set, dims })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TheoremId {
    /// Existence via the constants `m_i, M_i`.
    #[serde(rename = "3.1")]
    Constants,
    #[serde(rename = "5.1")]
    Index1Small,
    #[serde(rename = "5.2")]
    Index1Large,
    #[serde(rename = "5.3")]
    Index0Small,
    #[serde(rename = "5.4")]
    Index0Large,
    /// Existence via principal characteristic values.
    #[serde(rename = "5.5")]
    Existence,
}

impl TheoremId {
    pub fn code(self) -> &'static str {
        match self {
            TheoremId::Constants => "3.1",
            TheoremId::Index1Small => "5.1",
            TheoremId::Index1Large => "5.2",
            TheoremId::Index0Small => "5.3",
            TheoremId::Index0Large => "5.4",
            TheoremId::Existence => "5.5",
        }
    }
}

impl FromStr for TheoremId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "3.1" => TheoremId::Constants,
            "5.1" => TheoremId::Index1Small,
            "5.2" => TheoremId::Index1Large,
            "5.3" => TheoremId::Index0Small,
            "5.4" => TheoremId::Index0Large,
            "5.5" => TheoremId::Existence,
            _ => return Err(format!("unknown theorem `{s}` (expected 3.1 or 5.1 to 5.5)")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Less,
    #[serde(rename = ">")]
    Greater,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuUsed {
    pub operator: LinearOperator,
    pub value: f64,
    pub mode: MuMode,
}

/// Comparison of a recomputed value with a reference value from the problem
/// file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceCheck {
    pub key: String,
    pub reference: f64,
    pub recomputed: f64,
    pub discrepancy: bool,
}

/// Relative deviation above which a reference value is flagged.
pub const REFERENCE_TOL: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityLine {
    /// `"sup1"`, `"inf2"`, ...
    pub id: String,
    pub description: String,
    pub component: usize,
    pub relation: Relation,
    pub left: f64,
    pub right: f64,
    /// `right - left` for `<`, `left - right` for `>`.
    pub margin: f64,
    pub pass: bool,
    pub mu: Option<MuUsed>,
    /// The largest admissible `ε_i` (sup lines) or `η_i` (inf lines).
    pub achieved: Option<f64>,
    /// `ρ_i` or `c_i θ_i`: the factor that turns ratio bounds into values of
    /// `f_i` at the edge of the stripe.
    pub scale: Option<f64>,
    pub scaled_left: Option<f64>,
    pub scaled_right: Option<f64>,
    pub certificate: Certificate,
    pub set: StripeBox,
    pub references: Vec<ReferenceCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreconditionLine {
    pub description: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriteriaReport {
    pub theorem: TheoremId,
    pub preconditions: Vec<PreconditionLine>,
    pub lines: Vec<InequalityLine>,
    /// `τ_i` of the large-shell index-one criterion.
    pub tau: Option<[f64; 2]>,
    pub verdict: bool,
    pub conclusion: String,
    pub notes: Vec<String>,
}

impl CriteriaReport {
    pub fn line(&self, id: &str) -> Option<&InequalityLine> {
        self.lines.iter().find(|l| l.id == id)
    }

    /// All reference values that disagree with the recomputation.
    pub fn discrepancies(&self) -> impl Iterator<Item = &ReferenceCheck> {
        self.lines.iter().flat_map(|l| l.references.iter()).filter(|r| r.discrepancy)
    }
}

fn strict(relation: Relation, left: f64, right: f64, tol: f64) -> (f64, bool) {
    let margin = match relation {
        Relation::Less => right - left,
        Relation::Greater => left - right,
    };
    let scale = left.abs().max(right.abs());
    let pass = if margin.is_nan() {
        false
    } else if margin == f64::INFINITY {
        true
    } else {
        margin.is_finite() && margin > tol * scale
    };
    (margin, pass)
}

struct LineSpec {
    id: String,
    description: String,
    component: usize,
    relation: Relation,
    left: Extremum,
    right: f64,
    mu: Option<MuUsed>,
    achieved: Option<f64>,
    scale: Option<f64>,
    set: StripeBox,
}

fn finish_line(theorem: TheoremId, spec: LineSpec, problem: &ProblemSpec) -> InequalityLine {
    let (margin, pass) = strict(spec.relation, spec.left.value, spec.right, problem.sampling.strictness);
    let scaled_left = spec.scale.map(|s| spec.left.value * s);
    let scaled_right = spec.scale.map(|s| spec.right * s);
    let mut references = Vec::new();
    for (side, plain, scaled) in [("lhs", spec.left.value, scaled_left), ("rhs", spec.right, scaled_right)] {
        let key = format!("{}:{}:{}", theorem.code(), spec.id, side);
        if let Some(&reference) = problem.references.get(&key) {
            let recomputed = scaled.unwrap_or(plain);
            let discrepancy = !((recomputed - reference).abs() <= REFERENCE_TOL * reference.abs());
            references.push(ReferenceCheck { key, reference, recomputed, discrepancy });
        }
    }
    InequalityLine {
        id: spec.id,
        description: spec.description,
        component: spec.component,
        relation: spec.relation,
        left: spec.left.value,
        right: spec.right,
        margin,
        pass,
        mu: spec.mu,
        achieved: spec.achieved,
        scale: spec.scale,
        scaled_left,
        scaled_right,
        certificate: spec.left.certificate,
        set: spec.set,
        references,
    }
}

fn w_var(k: Kernel) -> Var {
    match k {
        Kernel::K1 => Var::U,
        Kernel::K2 => Var::V,
    }
}

fn pair_or(p: Option<[f64; 2]>, what: &'static str) -> Result<[f64; 2], CriteriaError> {
    p.ok_or(CriteriaError::Missing(what))
}

/// `sup_Ω f_i / w_i < μ(L_i) / sup p` for both `i`.
fn small_sup_lines(theorem: TheoremId, problem: &ProblemSpec, rho: [f64; 2], set: SetId) -> Result<Vec<InequalityLine>, CriteriaError> {
    let (_, sup_p) = problem.geometry.p_extrema(0.0, 1.0)?;
    let mode = problem.spectral.mu_mode;
    let mut lines = Vec::new();
    let theta_like = set == SetId::E;
    let bx = build_box(set, problem, rho)?;
    for k in Kernel::ALL {
        let i = k.index();
        let f = problem.nonlinearity(k);
        let op = LinearOperator::full(k);
        let mu = mu_value(op, mode, problem.spectral.nodes)?;
        let w = w_var(k);
        let left = ratio_extremum(&f.expr, &bx, &f.hints, w, Mode::Sup, &problem.sampling)?;
        let achieved = mu - sup_p * left.value;
        lines.push(finish_line(
            theorem,
            LineSpec {
                id: format!("sup{}", i + 1),
                description: format!("sup f{}/{} over {:?}  <  μ({})/sup p", i + 1, w, set, op.name()),
                component: i + 1,
                relation: Relation::Less,
                right: mu / sup_p,
                left,
                mu: Some(MuUsed { operator: op, value: mu, mode }),
                achieved: Some(achieved),
                scale: if theta_like { None } else { Some(rho[i]) },
                set: bx.clone(),
            },
            problem,
        ));
    }
    Ok(lines)
}

/// `inf f_i / w_i > μ(L̄_i) / inf_{[a_i, b_i]} p` over `B_i` or `D_i`.
fn inf_lines(theorem: TheoremId, problem: &ProblemSpec, params: [f64; 2], far: bool) -> Result<(Vec<InequalityLine>, Vec<String>), CriteriaError> {
    let mode = problem.spectral.mu_mode;
    let mut lines = Vec::new();
    let mut notes = Vec::new();
    for k in Kernel::ALL {
        let i = k.index();
        let (a, b) = problem.windows.window(k);
        let (inf_p, _) = problem.geometry.p_extrema(a, b)?;
        let set = match (far, k) {
            (true, Kernel::K1) => SetId::D1,
            (true, Kernel::K2) => SetId::D2,
            (false, Kernel::K1) => SetId::B1,
            (false, Kernel::K2) => SetId::B2,
        };
        let bx = build_box(set, problem, params)?;
        let f = problem.nonlinearity(k);
        let op = LinearOperator::restricted(k, a, b);
        let mu = mu_value(op, mode, problem.spectral.nodes)?;
        let w = w_var(k);
        let left = ratio_extremum(&f.expr, &bx, &f.hints, w, Mode::Inf, &problem.sampling)?;
        let scale = far.then(|| problem.windows.c(k) * params[i]);
        let dirichlet = std::f64::consts::PI.powi(2) / ((b - a) * (b - a));
        if (dirichlet - mu).abs() > 1e-9 * mu {
            let alt = dirichlet / inf_p * scale.unwrap_or(1.0);
            notes.push(format!(
                "{}: with μ = π²/(b{n}-a{n})² = {dirichlet:.6} in place of μ({}) the right side would be {alt:.6}{}",
                format_args!("inf{}", i + 1),
                op.name(),
                if scale.is_some() { " (scaled)" } else { "" },
                n = i + 1,
            ));
        }
        lines.push(finish_line(
            theorem,
            LineSpec {
                id: format!("inf{}", i + 1),
                description: format!("inf f{}/{} over {:?}  >  μ({})/inf p[{a}, {b}]", i + 1, w, set, op.name()),
                component: i + 1,
                relation: Relation::Greater,
                right: mu / inf_p,
                achieved: Some(inf_p * left.value - mu),
                left,
                mu: Some(MuUsed { operator: op, value: mu, mode }),
                scale,
                set: bx,
            },
            problem,
        ));
    }
    Ok((lines, notes))
}

/// Existence through `sup_Ω f_i/w_i < μ(L_i)/sup p` and
/// `inf_{D_i} f_i/w_i > μ(L̄_i)/inf_{[a_i,b_i]} p`, with `ρ_i ≤ c_i θ_i`.
pub fn check_eigen_existence(problem: &ProblemSpec) -> Result<CriteriaReport, CriteriaError> {
    let rho = pair_or(problem.params.rho, "rho1, rho2")?;
    let theta = pair_or(problem.params.theta, "theta1, theta2")?;
    let theorem = TheoremId::Existence;
    let preconditions: Vec<PreconditionLine> = Kernel::ALL
        .iter()
        .map(|&k| {
            let i = k.index();
            let ct = problem.windows.c(k) * theta[i];
            PreconditionLine {
                description: format!("ρ{n} = {} ≤ c{n}θ{n} = {}", rho[i], ct, n = i + 1),
                pass: rho[i] <= ct,
            }
        })
        .collect();
    let mut lines = small_sup_lines(theorem, problem, rho, SetId::Omega)?;
    let (inf, notes) = inf_lines(theorem, problem, theta, true)?;
    lines.extend(inf);
    let verdict = preconditions.iter().all(|p| p.pass) && lines.iter().all(|l| l.pass);
    Ok(CriteriaReport {
        theorem,
        preconditions,
        lines,
        tau: None,
        verdict,
        conclusion: if verdict {
            "at least one positive radial solution, with norms between the ρ and θ shells".into()
        } else {
            "hypotheses not verified; no conclusion".into()
        },
        notes,
    })
}

/// Existence through `sup_Ω f_i < m_i ρ_i / sup p` and
/// `inf_{A_i} f_i > M_i s_i / inf_{[a_i,b_i]} p`, with `ρ_i < c_i s_i`.
pub fn check_ellyptic(problem: &ProblemSpec, s: [f64; 2], rho: [f64; 2]) -> Result<CriteriaReport, CriteriaError> {
    let theorem = TheoremId::Constants;
    let (_, sup_p) = problem.geometry.p_extrema(0.0, 1.0)?;
    let preconditions: Vec<PreconditionLine> = Kernel::ALL
        .iter()
        .map(|&k| {
            let i = k.index();
            let cs = problem.windows.c(k) * s[i];
            PreconditionLine { description: format!("ρ{n} = {} < c{n}s{n} = {}", rho[i], cs, n = i + 1), pass: rho[i] < cs }
        })
        .collect();
    let omega = build_box(SetId::Omega, problem, rho)?;
    let mut lines = Vec::new();
    for k in Kernel::ALL {
        let i = k.index();
        let f = problem.nonlinearity(k);
        let left = extremum_over_box(&f.expr, &omega, &f.hints, Mode::Sup, &problem.sampling)?;
        lines.push(finish_line(
            theorem,
            LineSpec {
                id: format!("sup{}", i + 1),
                description: format!("sup f{} over Omega  <  m{}ρ{}/sup p", i + 1, i + 1, i + 1),
                component: i + 1,
                relation: Relation::Less,
                left,
                right: k.m_constant() * rho[i] / sup_p,
                mu: None,
                achieved: None,
                scale: None,
                set: omega.clone(),
            },
            problem,
        ));
    }
    for k in Kernel::ALL {
        let i = k.index();
        let (a, b) = problem.windows.window(k);
        let (inf_p, _) = problem.geometry.p_extrema(a, b)?;
        let set = if k == Kernel::K1 { SetId::A1 } else { SetId::A2 };
        let bx = build_box(set, problem, s)?;
        let f = problem.nonlinearity(k);
        let left = extremum_over_box(&f.expr, &bx, &f.hints, Mode::Inf, &problem.sampling)?;
        lines.push(finish_line(
            theorem,
            LineSpec {
                id: format!("inf{}", i + 1),
                description: format!("inf f{} over {:?}  >  M{}s{}/inf p[{a}, {b}]", i + 1, set, i + 1, i + 1),
                component: i + 1,
                relation: Relation::Greater,
                left,
                right: problem.windows.big_m(k) * s[i] / inf_p,
                mu: None,
                achieved: None,
                scale: None,
                set: bx,
            },
            problem,
        ));
    }
    let verdict = preconditions.iter().all(|p| p.pass) && lines.iter().all(|l| l.pass);
    Ok(CriteriaReport {
        theorem,
        preconditions,
        lines,
        tau: None,
        verdict,
        conclusion: if verdict {
            "at least one positive radial solution".into()
        } else {
            "hypotheses not verified; no conclusion".into()
        },
        notes: vec!["A2 is taken with u ∈ [0, s1/c1] (the printed set repeats s2/c2 in that slot)".into()],
    })
}

/// `‖Σ_k (λ A)^k c‖∞` for the constant vector `c`, truncated once a term is
/// below `1e-12` of the partial sum. Infinite when the series does not settle.
fn neumann_sup(matrix: &nalgebra::DMatrix<f64>, lambda: f64, c: f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    let n = matrix.nrows();
    let mut term = DVector::from_element(n, c);
    let mut sum = term.clone();
    for _ in 0..1_000_000 {
        term = lambda * (matrix * &term);
        sum += &term;
        let t = term.amax();
        if !t.is_finite() {
            return f64::INFINITY;
        }
        if t <= 1e-12 * sum.amax() {
            return sum.amax();
        }
    }
    f64::INFINITY
}

/// One of the four index criteria, over its own sets.
///
/// `params` are `(ρ1, ρ2)` for 5.1 and 5.3 and `(θ1, θ2)` for 5.2 and 5.4.
pub fn check_index_condition(theorem: TheoremId, problem: &ProblemSpec, params: [f64; 2]) -> Result<CriteriaReport, CriteriaError> {
    let mut notes = Vec::new();
    let mut tau = None;
    let (lines, verdict, conclusion) = match theorem {
        TheoremId::Index1Small => {
            let lines = small_sup_lines(theorem, problem, params, SetId::Omega)?;
            let ok = lines.iter().all(|l| l.pass);
            (lines, ok, format!("index 1 on K_σ for σ_i ≤ ρ_i = {params:?}"))
        }
        TheoremId::Index1Large => {
            let lines = small_sup_lines(theorem, problem, params, SetId::E)?;
            let ok = lines.iter().all(|l| l.pass);
            if ok {
                let (_, sup_p) = problem.geometry.p_extrema(0.0, 1.0)?;
                let g = &problem.geometry;
                let bounded = StripeBox {
                    set: SetId::E,
                    dims: [
                        Interval::bounded(g.inner_radius(), g.outer_radius()),
                        Interval::bounded(0.0, params[0]),
                        Interval::bounded(0.0, params[1]),
                        Interval::bounded(0.0, params[0]),
                        Interval::bounded(0.0, params[1]),
                    ],
                };
                let mut t = [0.0; 2];
                for k in Kernel::ALL {
                    let i = k.index();
                    let f = problem.nonlinearity(k);
                    let sup_f = extremum_over_box(&f.expr, &bounded, &f.hints, Mode::Sup, &problem.sampling)?.value.max(0.0);
                    let c = sup_p * sup_f * k.phi_integral();
                    let lambda = sup_p * lines[i].left.max(0.0);
                    let a = split_nystrom_matrix(LinearOperator::full(k), problem.spectral.nodes)?;
                    t[i] = neumann_sup(&a, lambda, c);
                }
                tau = Some(t);
                (lines, ok, format!("index 1 on K_σ for σ_i > τ_i = [{}, {}]", t[0], t[1]))
            } else {
                (lines, ok, "hypotheses not verified; no conclusion".into())
            }
        }
        TheoremId::Index0Small | TheoremId::Index0Large => {
            let far = theorem == TheoremId::Index0Large;
            let (lines, n) = inf_lines(theorem, problem, params, far)?;
            notes.extend(n);
            let ok = if far { lines.iter().all(|l| l.pass) } else { lines.iter().any(|l| l.pass) };
            let conclusion = if far {
                format!("index 0 on K_s for s_i ≥ θ_i = {params:?}")
            } else {
                format!("index 0 on K_σ for σ_i ≤ ρ_i = {params:?}")
            };
            (lines, ok, conclusion)
        }
        TheoremId::Constants | TheoremId::Existence => {
            return Err(CriteriaError::Params { set: SetId::Omega, message: format!("{} is not an index criterion", theorem.code()) })
        }
    };
    Ok(CriteriaReport {
        theorem,
        preconditions: Vec::new(),
        lines,
        tau,
        verdict,
        conclusion: if verdict { conclusion } else { "hypotheses not verified; no conclusion".into() },
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Hints, Monotonicity};
    use crate::geometry::AnnulusGeometry;
    use crate::kernels::WindowPair;
    use crate::problem::{CriteriaParams, Nonlinearity};
    use std::f64::consts::{E, PI};

    fn problem(f1: &str, h1: Hints, f2: &str, h2: Hints) -> ProblemSpec {
        let mut p = ProblemSpec::new(
            AnnulusGeometry::new(3, 1.0, E).unwrap(),
            WindowPair::new(0.25, 0.75, 0.5, 1.0).unwrap(),
            Nonlinearity::new(f1, h1).unwrap(),
            Nonlinearity::new(f2, h2).unwrap(),
        );
        p.params = CriteriaParams { rho: Some([0.1, 0.04]), theta: Some([200.0, 50.0]), s: Some([200.0, 50.0]) };
        p.spectral.nodes = 201;
        p
    }

    fn example() -> ProblemSpec {
        use Monotonicity::Increasing as I;
        problem(
            "(1 + (2/pi)*atan(r^2 + gv^2)) * u^2",
            Hints::new().with(Var::R, I).with(Var::U, I).with(Var::Gv, I),
            "(4/pi)*atan(1 + gu^2 + gv^2)*v^2",
            Hints::new().with(Var::V, I).with(Var::Gu, I).with(Var::Gv, I),
        )
    }

    #[test]
    fn boxes() {
        let p = example();
        let o = build_box(SetId::Omega, &p, [0.1, 0.04]).unwrap();
        assert_eq!(o.dims[0], Interval::bounded(1.0, E));
        assert_eq!(o.dims[1], Interval::bounded(0.0, 0.1));
        assert_eq!(o.dims[2], Interval::bounded(0.0, 0.04));
        assert!(o.dims[3].is_unbounded() && o.dims[4].is_unbounded());
        let d1 = build_box(SetId::D1, &p, [200.0, 50.0]).unwrap();
        let r = |t| p.geometry.radial_map(t).unwrap();
        assert_eq!(d1.dims[0], Interval::bounded(r(0.25), r(0.75)));
        assert_eq!(d1.dims[1].lo, 50.0);
        assert!(d1.dims[1].is_unbounded());
        let d2 = build_box(SetId::D2, &p, [200.0, 50.0]).unwrap();
        assert_eq!((d2.dims[1].lo, d2.dims[2].lo), (0.0, 25.0));
        let a2 = build_box(SetId::A2, &p, [200.0, 50.0]).unwrap();
        assert_eq!(a2.dims[1], Interval::bounded(0.0, 800.0));
        assert_eq!(a2.dims[2], Interval::bounded(50.0, 100.0));
        assert!(build_box(SetId::E, &p, [0.0, 1.0]).is_err());
    }

    #[test]
    fn zero_nonlinearities() {
        let mut p = problem("0", Hints::new(), "0", Hints::new());
        p.spectral.mu_mode = MuMode::Paper;
        let r = check_eigen_existence(&p).unwrap();
        assert!(r.line("sup1").unwrap().pass && r.line("sup2").unwrap().pass);
        assert!(!r.line("inf1").unwrap().pass && !r.line("inf2").unwrap().pass);
        assert!(!r.verdict);
        let r = check_ellyptic(&p, [200.0, 50.0], [0.1, 0.04]).unwrap();
        assert!(r.line("sup1").unwrap().pass && !r.line("inf1").unwrap().pass);
        let r = check_index_condition(TheoremId::Index0Small, &p, [0.1, 0.04]).unwrap();
        assert!(!r.verdict);
    }

    #[test]
    fn strictness_boundary() {
        // ratio f1/u equals μ(L1)/sup p exactly
        let sup_p = E * E * (E - 1.0) * (E - 1.0);
        let k = PI * PI / sup_p;
        let mut p = problem(&format!("{k:?}*u"), Hints::new(), "0", Hints::new());
        p.spectral.mu_mode = MuMode::Paper;
        let r = check_index_condition(TheoremId::Index1Small, &p, [0.1, 0.04]).unwrap();
        let l = r.line("sup1").unwrap();
        assert!(!l.pass, "margin {}", l.margin);
        assert!(!r.verdict);
    }

    #[test]
    fn ellyptic_boundary() {
        // m1 ρ1 / sup p with f1 = κ u at u = ρ1
        let sup_p = E * E * (E - 1.0) * (E - 1.0);
        let kappa = 8.0 / sup_p;
        let p = problem(&format!("{kappa:?}*u"), Hints::new().with(Var::U, Monotonicity::Increasing), "0", Hints::new());
        let r = check_ellyptic(&p, [200.0, 50.0], [0.1, 0.04]).unwrap();
        let l = r.line("sup1").unwrap();
        assert!((l.left - l.right).abs() <= 1e-15 * l.right);
        assert!(!l.pass);
    }

    #[test]
    fn example_existence_in_paper_mode() {
        let mut p = example();
        p.spectral.mu_mode = MuMode::Paper;
        let r = check_eigen_existence(&p).unwrap();
        assert!(r.verdict);
        let s1 = r.line("sup1").unwrap();
        assert!((s1.scaled_left.unwrap() - 0.02).abs() < 1e-15);
        assert!((s1.scaled_right.unwrap() - 0.045_239_94).abs() < 1e-8);
        let i1 = r.line("inf1").unwrap();
        assert!((i1.scaled_right.unwrap() - 2482.653_4).abs() < 1e-3);
        let i2 = r.line("inf2").unwrap();
        assert!((i2.scaled_left.unwrap() - 625.0).abs() < 1e-9);
    }

    #[test]
    fn neumann_matches_closed_form() {
        // (I - λ L1)^{-1} c has sup c / cos(√λ/2)
        let a = split_nystrom_matrix(LinearOperator::L1, 401).unwrap();
        for lambda in [1.0, 5.0, 9.0] {
            let got = neumann_sup(&a, lambda, 2.0);
            let want = 2.0 / (lambda.sqrt() / 2.0).cos();
            assert!((got - want).abs() < 1e-7 * want, "λ = {lambda}: {got} vs {want}");
        }
    }

    #[test]
    fn large_shell_index_one() {
        let p = problem("0.1*u + 1", Hints::new().with(Var::U, Monotonicity::Increasing), "0.01*v", Hints::new().with(Var::V, Monotonicity::Increasing));
        let r = check_index_condition(TheoremId::Index1Large, &p, [200.0, 50.0]).unwrap();
        assert!(r.verdict, "{:?}", r.lines);
        let tau = r.tau.unwrap();
        assert!(tau[0].is_finite() && tau[0] > 0.0);
        assert!(tau[1].is_finite() && tau[1] > 0.0);
    }
}
