//! Sup/inf of an expression, or of the ratio `f/w`, over a box of
//! `(r, u, v, gu, gv)`.
//!
//! When every variable the expression uses carries a monotonicity hint that
//! survives random falsification inside the box, only the extremal corner is
//! evaluated ("corner-exact"). Corners at `+∞` (or at `w -> 0+` for ratios)
//! are evaluated as limits along `z_k = Z 10^(3k)` until two consecutive
//! values agree to `1e-15` relative. Otherwise a nested grid is sampled and
//! refined around the best point; such estimates are not rigorous.

use serde::Serialize;

use super::CriteriaError;
use crate::expr::{validate_hints, BinOp, EvalError, Expr, HintCheck, Hints, Monotonicity, Point, Var};
use crate::par;
use crate::problem::SamplingConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Upper {
    Finite(f64),
    /// `+∞`, sampled up to `cap`.
    Unbounded { cap: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: Upper,
}

impl Interval {
    pub fn bounded(lo: f64, hi: f64) -> Self {
        Self { lo, hi: Upper::Finite(hi) }
    }

    /// `[lo, +∞)`; the cap is raised to `10 lo` when `lo` already exceeds it.
    pub fn unbounded(lo: f64, cap: f64) -> Self {
        let cap = if lo < cap { cap } else { 10.0 * lo.max(1.0) };
        Self { lo, hi: Upper::Unbounded { cap } }
    }

    /// Upper end used for sampling.
    pub fn sample_hi(&self) -> f64 {
        match self.hi {
            Upper::Finite(h) => h,
            Upper::Unbounded { cap } => cap,
        }
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self.hi, Upper::Unbounded { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SetId {
    Omega,
    E,
    B1,
    B2,
    D1,
    D2,
    A1,
    A2,
}

/// A product of five intervals over `(r, u, v, gu, gv)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StripeBox {
    pub set: SetId,
    pub dims: [Interval; 5],
}

impl StripeBox {
    pub fn interval(&self, var: Var) -> Interval {
        self.dims[var.index()]
    }

    /// `[lo, sample_hi]` per dimension.
    pub fn sampling_domain(&self) -> [(f64, f64); 5] {
        self.dims.map(|d| (d.lo, d.sample_hi()))
    }

    /// Same box with `var` frozen to `value`.
    pub fn with_fixed(&self, var: Var, value: f64) -> Self {
        let mut b = self.clone();
        b.dims[var.index()] = Interval::bounded(value, value);
        b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Sup,
    Inf,
}

impl Mode {
    fn better(self, a: f64, b: f64) -> bool {
        match self {
            Mode::Sup => a > b,
            Mode::Inf => a < b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// Evaluated at the extremal corner; `limit_dims` were pushed to `+∞`
    /// (or the ratio variable to `0+`) and `value_at_cap` is the first term of
    /// that sequence.
    CornerExact { corner: Point, limit_dims: Vec<Var>, value_at_cap: f64 },
    /// Grid sampling with local refinement; not a proof.
    Sampled { evaluations: usize, refinements: usize, rejected_hint: Option<Var> },
    /// `f > 0` somewhere on the face `w = 0`, so `sup f/w = +∞`.
    ZeroFace { w: Var, f_value: f64, at: Point },
}

impl Certificate {
    pub fn is_corner_exact(&self) -> bool {
        matches!(self, Certificate::CornerExact { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extremum {
    pub value: f64,
    pub at: Point,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum End {
    Lo,
    Hi,
}

fn pick_end(m: Monotonicity, mode: Mode) -> End {
    match (m, mode) {
        (Monotonicity::Increasing, Mode::Sup) | (Monotonicity::Decreasing, Mode::Inf) => End::Hi,
        _ => End::Lo,
    }
}

fn eval_err(p: &Point, source: EvalError) -> CriteriaError {
    CriteriaError::Eval { point: format_point(p), source }
}

pub(crate) fn format_point(p: &Point) -> String {
    let parts: Vec<String> = Var::ALL.iter().zip(p).map(|(v, x)| format!("{v}={x}")).collect();
    parts.join(", ")
}

/// Keeps the hints of variables `expr` uses when they survive validation over
/// the box; returns the first rejected variable otherwise.
fn validated_hints(expr: &Expr, hints: &Hints, bx: &StripeBox, cfg: &SamplingConfig) -> Result<Hints, Var> {
    let mut used = Hints::new();
    for v in Var::ALL {
        if expr.depends_on(v) {
            used.set(v, hints.get(v));
        }
    }
    match validate_hints(expr, &used, &bx.sampling_domain(), cfg.hint_samples, cfg.seed) {
        HintCheck::Pass { .. } => Ok(used),
        HintCheck::Fail(c) => Err(c.var),
    }
}

/// Evaluates along the corner sequence. `up` coordinates start at their cap
/// and grow by `10^3` per step; `down` coordinates start at `10^-3` of their
/// upper end and shrink by `10^3`.
fn corner_limit(
    eval: &(dyn Fn(&Point) -> Result<f64, EvalError> + Sync),
    base: Point,
    up: &[usize],
    down: &[usize],
) -> Result<(f64, f64, Point), CriteriaError> {
    if up.is_empty() && down.is_empty() {
        let v = eval(&base).map_err(|e| eval_err(&base, e))?;
        return Ok((v, v, base));
    }
    let start = base;
    let mut values: Vec<f64> = Vec::new();
    let mut last_point = base;
    for k in 0..=100 {
        let grow = 10f64.powi(3 * k);
        let mut p = start;
        for &d in up {
            p[d] = start[d] * grow;
        }
        for &d in down {
            p[d] = start[d] / grow;
        }
        if p.iter().any(|x| !x.is_finite()) || down.iter().any(|&d| p[d] == 0.0) {
            break;
        }
        match eval(&p) {
            Ok(v) => {
                last_point = p;
                if let Some(&prev) = values.last() {
                    let scale = v.abs().max(f64::abs(prev));
                    if (v - prev).abs() <= 1e-15 * scale {
                        values.push(v);
                        return Ok((v, values[0], p));
                    }
                }
                values.push(v);
            }
            Err(EvalError::Overflow { .. }) | Err(EvalError::Input { .. }) => break,
            Err(e) => return Err(eval_err(&p, e)),
        }
    }
    match values.as_slice() {
        [] => Err(CriteriaError::Eval {
            point: format_point(&start),
            source: EvalError::Overflow { node: "limit sequence".into() },
        }),
        [.., prev, last] if last.abs() > prev.abs() * (1.0 + 1e-3) => {
            Ok((f64::INFINITY.copysign(*last), values[0], last_point))
        }
        [.., last] => Ok((*last, values[0], last_point)),
    }
}

/// Nested grid search over the `free` dimensions, others pinned at `base`.
/// `eval` may return `None` to skip a point.
fn sampled(
    eval: &(dyn Fn(&Point) -> Result<Option<f64>, EvalError> + Sync),
    bx: &StripeBox,
    free: &[usize],
    base: Point,
    mode: Mode,
    cfg: &SamplingConfig,
) -> Result<(f64, Point, usize, usize), CriteriaError> {
    let g = cfg.grid.max(2);
    let domain = bx.sampling_domain();
    let mut ranges: Vec<(f64, f64)> = free.iter().map(|&d| domain[d]).collect();
    let mut best: Option<(f64, Point)> = None;
    let mut evaluations = 0;
    let mut refinements = 0;
    for level in 0..=cfg.depth {
        let total = g.pow(free.len() as u32);
        let point_of = |mut idx: usize| -> Point {
            let mut p = base;
            for (k, &d) in free.iter().enumerate() {
                let (lo, hi) = ranges[k];
                let i = idx % g;
                idx /= g;
                p[d] = if i + 1 == g { hi } else { lo + (hi - lo) * i as f64 / (g - 1) as f64 };
            }
            p
        };
        let results = par::map_range(total, |idx| {
            let p = point_of(idx);
            eval(&p).map(|v| v.map(|x| (x, p))).map_err(|e| eval_err(&p, e))
        });
        evaluations += total;
        let mut level_best: Option<(f64, Point)> = None;
        for r in results {
            if let Some((v, p)) = r? {
                if level_best.is_none_or(|(b, _)| mode.better(v, b)) {
                    level_best = Some((v, p));
                }
            }
        }
        let previous = best.map(|b| b.0);
        if let Some(lb) = level_best {
            if best.is_none_or(|(b, _)| mode.better(lb.0, b)) {
                best = Some(lb);
            }
        }
        if level > 0 {
            refinements += 1;
            if let (Some(old), Some((new, _))) = (previous, best) {
                if (new - old).abs() <= cfg.rel_tol * old.abs().max(f64::MIN_POSITIVE) {
                    break;
                }
            }
        }
        let Some((_, centre)) = best else { break };
        for (k, &d) in free.iter().enumerate() {
            let (lo, hi) = ranges[k];
            let cell = (hi - lo) / (g - 1) as f64;
            ranges[k] = ((centre[d] - cell).max(domain[d].0), (centre[d] + cell).min(domain[d].1));
        }
        if free.is_empty() {
            break;
        }
    }
    let (v, p) = best.ok_or_else(|| CriteriaError::Eval {
        point: "whole box".into(),
        source: EvalError::Domain { node: "sampling".into(), reason: "no admissible sample point" },
    })?;
    Ok((v, p, evaluations, refinements))
}

fn lower_corner(bx: &StripeBox) -> Point {
    bx.dims.map(|d| d.lo)
}

/// Sup or inf of `expr` over `bx`.
pub fn extremum_over_box(
    expr: &Expr,
    bx: &StripeBox,
    hints: &Hints,
    mode: Mode,
    cfg: &SamplingConfig,
) -> Result<Extremum, CriteriaError> {
    let eval = |p: &Point| expr.evaluate(p);
    let rejected = match validated_hints(expr, hints, bx, cfg) {
        Ok(h) => {
            if let Some(ext) = corner_path(&eval, expr, &h, None, bx, mode)? {
                return Ok(ext);
            }
            None
        }
        Err(v) => Some(v),
    };
    let free: Vec<usize> = Var::ALL.iter().filter(|v| expr.depends_on(**v)).map(|v| v.index()).collect();
    let eval_opt = |p: &Point| expr.evaluate(p).map(Some);
    let (value, at, evaluations, refinements) = sampled(&eval_opt, bx, &free, lower_corner(bx), mode, cfg)?;
    Ok(Extremum { value, at, certificate: Certificate::Sampled { evaluations, refinements, rejected_hint: rejected } })
}

/// Corner evaluation when every used variable has a direction. `ratio_var`
/// marks the denominator of a ratio, whose lower end `0` is approached as a
/// limit.
fn corner_path(
    eval: &(dyn Fn(&Point) -> Result<f64, EvalError> + Sync),
    expr: &Expr,
    hints: &Hints,
    ratio_var: Option<Var>,
    bx: &StripeBox,
    mode: Mode,
) -> Result<Option<Extremum>, CriteriaError> {
    let mut base = lower_corner(bx);
    let mut up = Vec::new();
    let mut down = Vec::new();
    for v in Var::ALL {
        if !expr.depends_on(v) {
            continue;
        }
        let Some(m) = hints.get(v) else { return Ok(None) };
        let d = v.index();
        let iv = bx.dims[d];
        match pick_end(m, mode) {
            End::Hi => {
                base[d] = iv.sample_hi();
                if iv.is_unbounded() {
                    up.push(d);
                }
            }
            End::Lo => {
                if Some(v) == ratio_var && iv.lo == 0.0 {
                    base[d] = 1e-3 * iv.sample_hi();
                    down.push(d);
                }
            }
        }
    }
    let (value, value_at_cap, at) = corner_limit(eval, base, &up, &down)?;
    let limit_dims = up.iter().chain(&down).map(|&d| Var::ALL[d]).collect();
    Ok(Some(Extremum { value, at, certificate: Certificate::CornerExact { corner: base, limit_dims, value_at_cap } }))
}

/// Sup or inf of `f / w` over `bx`, `w ∈ {u, v}`.
///
/// If the box touches `w = 0` and `f > 0` somewhere on that face, the sup is
/// `+∞`. Points with `w = 0` are otherwise excluded and the face is reached as
/// a limit.
pub fn ratio_extremum(
    expr: &Expr,
    bx: &StripeBox,
    hints: &Hints,
    w: Var,
    mode: Mode,
    cfg: &SamplingConfig,
) -> Result<Extremum, CriteriaError> {
    let wi = w.index();
    if mode == Mode::Sup && bx.dims[wi].lo == 0.0 {
        let face = bx.with_fixed(w, 0.0);
        let on_face = extremum_over_box(expr, &face, hints, Mode::Sup, cfg)?;
        if on_face.value > 0.0 {
            return Ok(Extremum {
                value: f64::INFINITY,
                at: on_face.at,
                certificate: Certificate::ZeroFace { w, f_value: on_face.value, at: on_face.at },
            });
        }
    }

    let ratio = Expr::binary(BinOp::Div, expr.clone(), Expr::Var(w));
    let eval = |p: &Point| ratio.evaluate(p);

    let mut rejected = None;
    match validated_hints(expr, hints, bx, cfg) {
        Ok(mut h) => {
            h.set(w, None);
            let mut found = None;
            for m in [Monotonicity::Increasing, Monotonicity::Decreasing] {
                let probe = Hints::new().with(w, m);
                if validate_hints(&ratio, &probe, &bx.sampling_domain(), cfg.hint_samples, cfg.seed).passed() {
                    found = Some(m);
                    break;
                }
            }
            if let Some(m) = found {
                h.set(w, Some(m));
                if let Some(ext) = corner_path(&eval, &ratio, &h, Some(w), bx, mode)? {
                    return Ok(ext);
                }
            } else {
                rejected = Some(w);
            }
        }
        Err(v) => rejected = Some(v),
    }

    let mut free: Vec<usize> = Var::ALL.iter().filter(|v| ratio.depends_on(**v)).map(|v| v.index()).collect();
    free.sort_unstable();
    let eval_opt = |p: &Point| -> Result<Option<f64>, EvalError> {
        if p[wi] == 0.0 {
            return Ok(None);
        }
        ratio.evaluate(p).map(Some)
    };
    let (value, at, evaluations, refinements) = sampled(&eval_opt, bx, &free, lower_corner(bx), mode, cfg)?;
    Ok(Extremum { value, at, certificate: Certificate::Sampled { evaluations, refinements, rejected_hint: rejected } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use std::f64::consts::E;

    fn omega() -> StripeBox {
        let cap = 1e3;
        StripeBox {
            set: SetId::Omega,
            dims: [
                Interval::bounded(1.0, E),
                Interval::bounded(0.0, 0.1),
                Interval::bounded(0.0, 0.04),
                Interval::unbounded(0.0, cap),
                Interval::unbounded(0.0, cap),
            ],
        }
    }

    fn cfg() -> SamplingConfig {
        SamplingConfig::default()
    }

    #[test]
    fn constant_is_corner_exact() {
        let e = parse("3").unwrap();
        for mode in [Mode::Sup, Mode::Inf] {
            let x = extremum_over_box(&e, &omega(), &Hints::new(), mode, &cfg()).unwrap();
            assert_eq!(x.value, 3.0);
            assert!(x.certificate.is_corner_exact());
        }
    }

    #[test]
    fn limit_at_infinity() {
        let e = parse("atan(gv)").unwrap();
        let h = Hints::new().with(Var::Gv, Monotonicity::Increasing);
        let x = extremum_over_box(&e, &omega(), &h, Mode::Sup, &cfg()).unwrap();
        assert_eq!(x.value, std::f64::consts::FRAC_PI_2);
        match x.certificate {
            Certificate::CornerExact { limit_dims, value_at_cap, .. } => {
                assert_eq!(limit_dims, vec![Var::Gv]);
                assert_eq!(value_at_cap, 1e3f64.atan());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unbounded_growth_is_infinite() {
        let e = parse("gu^2").unwrap();
        let h = Hints::new().with(Var::Gu, Monotonicity::Increasing);
        let x = extremum_over_box(&e, &omega(), &h, Mode::Sup, &cfg()).unwrap();
        assert_eq!(x.value, f64::INFINITY);
    }

    #[test]
    fn sampling_without_hints() {
        let e = parse("-(u - 0.03)^2").unwrap();
        let x = extremum_over_box(&e, &omega(), &Hints::new(), Mode::Sup, &cfg()).unwrap();
        assert!(x.value.abs() < 1e-9, "{}", x.value);
        assert!(matches!(x.certificate, Certificate::Sampled { .. }));
    }

    #[test]
    fn wrong_hint_falls_back() {
        let e = parse("sin(10*u)").unwrap();
        let h = Hints::new().with(Var::U, Monotonicity::Decreasing);
        let x = extremum_over_box(&e, &omega(), &h, Mode::Sup, &cfg()).unwrap();
        assert!(matches!(x.certificate, Certificate::Sampled { rejected_hint: Some(Var::U), .. }));
        assert!((x.value - 1.0f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn identity_ratio() {
        let e = parse("u").unwrap();
        let mut bx = omega();
        bx.dims[1] = Interval::bounded(0.5, 3.0);
        for mode in [Mode::Sup, Mode::Inf] {
            let x = ratio_extremum(&e, &bx, &Hints::new(), Var::U, mode, &cfg()).unwrap();
            assert_eq!(x.value, 1.0);
        }
    }

    #[test]
    fn ratio_zero_face() {
        let e = parse("u + 1").unwrap();
        let x = ratio_extremum(&e, &omega(), &Hints::new().with(Var::U, Monotonicity::Increasing), Var::U, Mode::Sup, &cfg()).unwrap();
        assert_eq!(x.value, f64::INFINITY);
        assert!(matches!(x.certificate, Certificate::ZeroFace { .. }));
    }

    #[test]
    fn ratio_limit_towards_zero() {
        // sin(u)/u -> 1 as u -> 0+
        let e = parse("sin(u)").unwrap();
        let h = Hints::new().with(Var::U, Monotonicity::Increasing);
        let x = ratio_extremum(&e, &omega(), &h, Var::U, Mode::Sup, &cfg()).unwrap();
        assert!((x.value - 1.0).abs() < 1e-12, "{}", x.value);
        assert!(x.certificate.is_corner_exact());
    }
}
