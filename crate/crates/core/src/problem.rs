//! Problem files: a JSON document describing the annulus, the windows, the two
//! nonlinearities and the numerical settings.
//!
//! ```json
//! {
//!   "geometry": {"dimension": 3, "inner_radius": 1, "outer_radius": "e"},
//!   "windows": {"a1": "1/4", "b1": "3/4", "a2": "1/2", "b2": 1},
//!   "f1": {"expr": "(1 + (2/pi)*atan(r^2 + gv^2)) * u^2", "hints": {"u": "increasing"}},
//!   "f2": {"expr": "(4/pi)*atan(1 + gu^2 + gv^2) * v^2"},
//!   "params": {"rho1": 0.1, "rho2": 0.04, "theta1": 200, "theta2": 50}
//! }
//! ```
//!
//! Every numeric field accepts either a number or a constant expression such
//! as `"1/4"` or `"e"`. The `sampling`, `spectral`, `solver` and `references`
//! sections are optional.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::criteria::MuMode;
use crate::expr::{parse, validate_hints, Expr, HintCheck, Hints, ParseError, Var};
use crate::geometry::AnnulusGeometry;
use crate::kernels::{Kernel, WindowPair};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed problem file at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("field `{field}`, offset {}: {source}", source.offset())]
    Expression { field: String, source: ParseError },
    #[error("field `{field}`: hint `{var}: {claimed}` is contradicted: f({at}) = {value_at:e} but f({bumped}) = {value_bumped:e}")]
    Hint {
        field: String,
        var: String,
        claimed: String,
        at: String,
        bumped: String,
        value_at: f64,
        value_bumped: f64,
    },
    #[error("precondition failed: {0}")]
    Precondition(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Scalar {
    Num(f64),
    Text(String),
}

impl Scalar {
    fn resolve(&self, field: &str) -> Result<f64, ProblemError> {
        match self {
            Scalar::Num(x) => Ok(*x),
            Scalar::Text(s) => constant_value(s, field),
        }
    }
}

/// Value of a constant expression (no variables).
pub fn constant_value(text: &str, field: &str) -> Result<f64, ProblemError> {
    let e = parse(text).map_err(|source| ProblemError::Expression { field: field.into(), source })?;
    if let Some(v) = Var::ALL.into_iter().find(|v| e.depends_on(*v)) {
        return Err(ProblemError::Field { field: field.into(), message: format!("`{text}` is not constant (uses {v})") });
    }
    e.evaluate(&[0.0; 5]).map_err(|err| ProblemError::Field { field: field.into(), message: err.to_string() })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    dimension: u32,
    inner_radius: Scalar,
    outer_radius: Scalar,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWindows {
    a1: Scalar,
    b1: Scalar,
    a2: Scalar,
    b2: Scalar,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNonlinearity {
    expr: String,
    #[serde(default)]
    hints: Hints,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    rho1: Option<Scalar>,
    rho2: Option<Scalar>,
    theta1: Option<Scalar>,
    theta2: Option<Scalar>,
    s1: Option<Scalar>,
    s2: Option<Scalar>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    geometry: RawGeometry,
    windows: RawWindows,
    f1: RawNonlinearity,
    f2: RawNonlinearity,
    #[serde(default)]
    params: RawParams,
    #[serde(default)]
    sampling: SamplingConfig,
    #[serde(default)]
    spectral: SpectralConfig,
    #[serde(default)]
    solver: SolverConfig,
    #[serde(default)]
    references: BTreeMap<String, f64>,
}

/// Settings of the sup/inf estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    /// Points per dimension of each sampling grid.
    pub grid: usize,
    /// Number of local refinements after the coarse grid.
    pub depth: usize,
    /// Finite stand-in for `+∞` in unbounded dimensions.
    pub cap: f64,
    /// Refinement stops once the relative change drops below this.
    pub rel_tol: f64,
    /// Random comparisons per hint validation.
    pub hint_samples: usize,
    pub seed: u64,
    /// Relative margin a strict inequality must clear.
    pub strictness: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { grid: 17, depth: 4, cap: 1e3, rel_tol: 1e-6, hint_samples: 2000, seed: 0x5eed, strictness: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralConfig {
    pub nodes: usize,
    pub mu_mode: MuMode,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self { nodes: 401, mu_mode: MuMode::Numeric }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub nodes: usize,
    pub tol: f64,
    pub maxit: usize,
    pub damping: f64,
    pub amplitudes: Vec<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { nodes: 201, tol: 1e-8, maxit: 100, damping: 0.5, amplitudes: vec![1.0, 10.0, 50.0, 100.0, 200.0] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity {
    pub source: String,
    pub expr: Expr,
    pub hints: Hints,
}

impl Nonlinearity {
    pub fn new(source: &str, hints: Hints) -> Result<Self, ParseError> {
        Ok(Self { source: source.to_string(), expr: parse(source)?, hints })
    }
}

/// Parameter pairs of the criteria; each is optional.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct CriteriaParams {
    pub rho: Option<[f64; 2]>,
    pub theta: Option<[f64; 2]>,
    pub s: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub geometry: AnnulusGeometry,
    pub windows: WindowPair,
    pub f: [Nonlinearity; 2],
    pub params: CriteriaParams,
    pub sampling: SamplingConfig,
    pub spectral: SpectralConfig,
    pub solver: SolverConfig,
    /// Values printed elsewhere (e.g. in a publication) keyed by report line
    /// id; reports flag any that disagree with the recomputed numbers.
    pub references: BTreeMap<String, f64>,
}

impl ProblemSpec {
    /// A spec with default settings and no criteria parameters.
    pub fn new(geometry: AnnulusGeometry, windows: WindowPair, f1: Nonlinearity, f2: Nonlinearity) -> Self {
        Self {
            geometry,
            windows,
            f: [f1, f2],
            params: CriteriaParams::default(),
            sampling: SamplingConfig::default(),
            spectral: SpectralConfig::default(),
            solver: SolverConfig::default(),
            references: BTreeMap::new(),
        }
    }

    pub fn nonlinearity(&self, kernel: Kernel) -> &Nonlinearity {
        &self.f[kernel.index()]
    }

    /// `ρ_i ≤ c_i θ_i`, needed before the existence theorem can be checked.
    pub fn require_existence_params(&self) -> Result<([f64; 2], [f64; 2]), ProblemError> {
        let rho = self.params.rho.ok_or_else(|| ProblemError::Precondition("rho1, rho2 are required".into()))?;
        let theta = self.params.theta.ok_or_else(|| ProblemError::Precondition("theta1, theta2 are required".into()))?;
        for k in Kernel::ALL {
            let i = k.index();
            let ct = self.windows.c(k) * theta[i];
            if rho[i] > ct {
                return Err(ProblemError::Precondition(format!(
                    "with ρ_i ≤ c_i θ_i: ρ{} = {} exceeds c{}·θ{} = {}",
                    i + 1,
                    rho[i],
                    i + 1,
                    i + 1,
                    ct
                )));
            }
        }
        Ok((rho, theta))
    }

    /// Domain used to validate hints: `[R0, R1] × [0, cap]^4`.
    pub fn hint_domain(&self) -> [(f64, f64); 5] {
        let cap = self.sampling.cap;
        let g = &self.geometry;
        [(g.inner_radius(), g.outer_radius()), (0.0, cap), (0.0, cap), (0.0, cap), (0.0, cap)]
    }

    /// Fails on the first hint contradicted by random sampling.
    pub fn validate_hints(&self) -> Result<(), ProblemError> {
        let domain = self.hint_domain();
        for (i, f) in self.f.iter().enumerate() {
            if let HintCheck::Fail(c) = validate_hints(&f.expr, &f.hints, &domain, self.sampling.hint_samples, self.sampling.seed) {
                let fmt = |p: &[f64; 5]| p.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(", ");
                return Err(ProblemError::Hint {
                    field: format!("f{}.hints", i + 1),
                    var: c.var.to_string(),
                    claimed: format!("{:?}", c.claimed).to_lowercase(),
                    at: fmt(&c.at),
                    bumped: fmt(&c.bumped),
                    value_at: c.value_at,
                    value_bumped: c.value_bumped,
                });
            }
        }
        Ok(())
    }
}

fn field<T>(name: &str, r: Result<T, impl std::fmt::Display>) -> Result<T, ProblemError> {
    r.map_err(|e| ProblemError::Field { field: name.into(), message: e.to_string() })
}

fn pair(a: &Option<Scalar>, b: &Option<Scalar>, na: &str, nb: &str) -> Result<Option<[f64; 2]>, ProblemError> {
    match (a, b) {
        (None, None) => Ok(None),
        (Some(x), Some(y)) => {
            let v = [x.resolve(&format!("params.{na}"))?, y.resolve(&format!("params.{nb}"))?];
            for (x, n) in v.iter().zip([na, nb]) {
                if !(x.is_finite() && *x > 0.0) {
                    return Err(ProblemError::Field { field: format!("params.{n}"), message: format!("must be positive, got {x}") });
                }
            }
            Ok(Some(v))
        }
        _ => Err(ProblemError::Field { field: format!("params.{na}"), message: format!("`{na}` and `{nb}` must be given together") }),
    }
}

/// Parses and validates problem-file text.
pub fn parse_problem(text: &str) -> Result<ProblemSpec, ProblemError> {
    let raw: RawProblem = serde_json::from_str(text)
        .map_err(|e| ProblemError::Json { line: e.line(), column: e.column(), message: e.to_string() })?;

    let g = &raw.geometry;
    let geometry = field(
        "geometry",
        AnnulusGeometry::new(g.dimension, g.inner_radius.resolve("geometry.inner_radius")?, g.outer_radius.resolve("geometry.outer_radius")?),
    )?;
    let w = &raw.windows;
    let windows = field(
        "windows",
        WindowPair::new(w.a1.resolve("windows.a1")?, w.b1.resolve("windows.b1")?, w.a2.resolve("windows.a2")?, w.b2.resolve("windows.b2")?),
    )?;
    let nl = |r: &RawNonlinearity, name: &str| -> Result<Nonlinearity, ProblemError> {
        let expr = parse(&r.expr).map_err(|source| ProblemError::Expression { field: format!("{name}.expr"), source })?;
        Ok(Nonlinearity { source: r.expr.clone(), expr, hints: r.hints })
    };
    let f = [nl(&raw.f1, "f1")?, nl(&raw.f2, "f2")?];
    let p = &raw.params;
    let params = CriteriaParams {
        rho: pair(&p.rho1, &p.rho2, "rho1", "rho2")?,
        theta: pair(&p.theta1, &p.theta2, "theta1", "theta2")?,
        s: pair(&p.s1, &p.s2, "s1", "s2")?,
    };

    let s = &raw.sampling;
    if s.grid < 2 {
        return Err(ProblemError::Field { field: "sampling.grid".into(), message: "need at least 2 points".into() });
    }
    if !(s.cap.is_finite() && s.cap > 0.0) {
        return Err(ProblemError::Field { field: "sampling.cap".into(), message: format!("must be positive, got {}", s.cap) });
    }
    if !(s.rel_tol > 0.0 && s.strictness >= 0.0) {
        return Err(ProblemError::Field { field: "sampling".into(), message: "rel_tol must be positive, strictness nonnegative".into() });
    }
    if raw.spectral.nodes < 3 {
        return Err(ProblemError::Field { field: "spectral.nodes".into(), message: "need at least 3 nodes".into() });
    }
    let sv = &raw.solver;
    if sv.nodes < 3 {
        return Err(ProblemError::Field { field: "solver.nodes".into(), message: "need at least 3 nodes".into() });
    }
    if !(sv.damping > 0.0 && sv.damping <= 1.0) {
        return Err(ProblemError::Field { field: "solver.damping".into(), message: format!("must lie in (0, 1], got {}", sv.damping) });
    }
    if !(sv.tol > 0.0) {
        return Err(ProblemError::Field { field: "solver.tol".into(), message: "must be positive".into() });
    }
    if let Some(a) = sv.amplitudes.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return Err(ProblemError::Field { field: "solver.amplitudes".into(), message: format!("amplitudes must be positive, got {a}") });
    }

    let spec = ProblemSpec {
        geometry,
        windows,
        f,
        params,
        sampling: raw.sampling,
        spectral: raw.spectral,
        solver: raw.solver,
        references: raw.references,
    };
    spec.validate_hints()?;
    Ok(spec)
}

/// Reads, parses and validates a problem file.
pub fn load_problem(path: impl AsRef<Path>) -> Result<ProblemSpec, ProblemError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| ProblemError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_problem(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "geometry": {"dimension": 3, "inner_radius": 1, "outer_radius": "e"},
        "windows": {"a1": "1/4", "b1": "3/4", "a2": "1/2", "b2": 1},
        "f1": {"expr": "(1 + (2/pi)*atan(r^2 + gv^2)) * u^2", "hints": {"u": "increasing", "r": "increasing"}},
        "f2": {"expr": "(4/pi)*atan(1 + gu^2 + gv^2)*v^2"},
        "params": {"rho1": 0.1, "rho2": "1/25", "theta1": 200, "theta2": 50}
    }"#;

    #[test]
    fn parses_constants_and_defaults() {
        let p = parse_problem(BASE).unwrap();
        assert_eq!(p.geometry.outer_radius(), std::f64::consts::E);
        assert_eq!(p.windows.window(Kernel::K1), (0.25, 0.75));
        assert_eq!(p.params.rho, Some([0.1, 0.04]));
        assert_eq!(p.params.s, None);
        assert_eq!(p.sampling, SamplingConfig::default());
        assert_eq!(p.solver.nodes, 201);
        assert!(p.require_existence_params().is_ok());
    }

    #[test]
    fn radii_invariant_named() {
        let text = BASE.replace(r#""inner_radius": 1"#, r#""inner_radius": 3"#);
        match parse_problem(&text) {
            Err(ProblemError::Field { field, message }) => {
                assert_eq!(field, "geometry");
                assert!(message.contains("R0"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn existence_precondition() {
        let text = BASE.replace(r#""rho1": 0.1"#, r#""rho1": 51"#);
        let p = parse_problem(&text).unwrap();
        let err = p.require_existence_params().unwrap_err();
        assert!(err.to_string().contains("with ρ_i ≤ c_i θ_i"));
    }

    #[test]
    fn expression_errors_carry_field_and_offset() {
        let text = BASE.replace("* u^2\"", "* u^^2\"");
        match parse_problem(&text) {
            Err(ProblemError::Expression { field, source }) => {
                assert_eq!(field, "f1.expr");
                assert_eq!(source.offset(), 34);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn json_errors_carry_position() {
        match parse_problem("{\n  \"geometry\": ,\n}") {
            Err(ProblemError::Json { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_hint_is_rejected() {
        let text = BASE.replace(r#""u": "increasing""#, r#""u": "decreasing""#);
        assert!(matches!(parse_problem(&text), Err(ProblemError::Hint { .. })));
    }

    #[test]
    fn non_constant_scalar_rejected() {
        let text = BASE.replace(r#""a1": "1/4""#, r#""a1": "u/4""#);
        assert!(matches!(parse_problem(&text), Err(ProblemError::Field { field, .. }) if field == "windows.a1"));
    }

    #[test]
    fn unpaired_params_rejected() {
        let text = BASE.replace(r#", "theta2": 50"#, "");
        assert!(parse_problem(&text).is_err());
    }
}
