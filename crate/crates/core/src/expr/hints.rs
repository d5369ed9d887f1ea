use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Expr, Point, Var};

/// Claimed (non-strict) monotone direction of an expression in one variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

/// Per-variable monotonicity hints.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "BTreeMap<Var, Monotonicity>", into = "BTreeMap<Var, Monotonicity>")]
pub struct Hints([Option<Monotonicity>; 5]);

impl From<BTreeMap<Var, Monotonicity>> for Hints {
    fn from(map: BTreeMap<Var, Monotonicity>) -> Self {
        let mut h = Hints::default();
        for (v, m) in map {
            h.0[v.index()] = Some(m);
        }
        h
    }
}

impl From<Hints> for BTreeMap<Var, Monotonicity> {
    fn from(h: Hints) -> Self {
        Var::ALL.into_iter().filter_map(|v| h.get(v).map(|m| (v, m))).collect()
    }
}

impl Hints {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: Var, m: Monotonicity) -> Self {
        self.0[var.index()] = Some(m);
        self
    }

    pub fn get(&self, var: Var) -> Option<Monotonicity> {
        self.0[var.index()]
    }

    pub fn set(&mut self, var: Var, m: Option<Monotonicity>) {
        self.0[var.index()] = m;
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(Option::is_none)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub var: Var,
    pub claimed: Monotonicity,
    pub at: Point,
    pub bumped: Point,
    pub value_at: f64,
    pub value_bumped: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum HintCheck {
    Pass { comparisons: usize },
    Fail(Counterexample),
}

impl HintCheck {
    pub fn passed(&self) -> bool {
        matches!(self, HintCheck::Pass { .. })
    }
}

const RELATIVE_SLACK: f64 = 1e-12;

/// Random falsification of monotonicity hints over a bounded box.
///
/// Each sample draws a point, raises one hinted coordinate towards the upper
/// edge of its interval and checks the claimed direction. Points where the
/// expression cannot be evaluated are skipped. Sampling is deterministic for a
/// given `seed`.
pub fn validate_hints(expr: &Expr, hints: &Hints, domain: &[(f64, f64); 5], samples: usize, seed: u64) -> HintCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut comparisons = 0;
    let draw = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| -> f64 {
        let x: f64 = rng.gen();
        // half the draws are skewed towards the lower edge
        let x = if rng.gen_bool(0.5) { x } else { x * x * x };
        lo + (hi - lo) * x
    };
    for _ in 0..samples.max(1) {
        let mut at = [0.0; 5];
        for (k, (lo, hi)) in domain.iter().enumerate() {
            at[k] = draw(&mut rng, *lo, *hi);
        }
        for var in Var::ALL {
            let Some(claimed) = hints.get(var) else { continue };
            let k = var.index();
            let mut bumped = at;
            let (_, hi) = domain[k];
            let step: f64 = rng.gen();
            bumped[k] = at[k] + step * (hi - at[k]);
            let (Ok(fa), Ok(fb)) = (expr.evaluate(&at), expr.evaluate(&bumped)) else { continue };
            comparisons += 1;
            let slack = RELATIVE_SLACK * fa.abs().max(fb.abs());
            let ok = match claimed {
                Monotonicity::Increasing => fb >= fa - slack,
                Monotonicity::Decreasing => fb <= fa + slack,
            };
            if !ok {
                return HintCheck::Fail(Counterexample { var, claimed, at, bumped, value_at: fa, value_bumped: fb });
            }
        }
    }
    HintCheck::Pass { comparisons }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn domain(u_hi: f64) -> [(f64, f64); 5] {
        [(1.0, std::f64::consts::E), (0.0, u_hi), (0.0, 10.0), (0.0, 10.0), (0.0, 10.0)]
    }

    #[test]
    fn example_f1_increasing_in_u() {
        let f1 = parse("(1 + (2/pi)*atan(r^2 + gv^2)) * u^2").unwrap();
        let h = Hints::new().with(Var::U, Monotonicity::Increasing).with(Var::R, Monotonicity::Increasing);
        assert!(validate_hints(&f1, &h, &domain(10.0), 500, 7).passed());
    }

    #[test]
    fn wrong_direction_is_caught() {
        let e = parse("1 - u").unwrap();
        let h = Hints::new().with(Var::U, Monotonicity::Increasing);
        match validate_hints(&e, &h, &domain(10.0), 50, 1) {
            HintCheck::Fail(c) => {
                assert_eq!(c.var, Var::U);
                assert!(c.value_bumped < c.value_at);
            }
            HintCheck::Pass { .. } => panic!("hint should fail"),
        }
    }

    #[test]
    fn constants_pass_any_hint() {
        let e = parse("3").unwrap();
        let h = Hints::new().with(Var::U, Monotonicity::Decreasing).with(Var::Gv, Monotonicity::Increasing);
        assert!(validate_hints(&e, &h, &domain(10.0), 50, 3).passed());
    }

    #[test]
    fn hints_serde_as_map() {
        let h: Hints = serde_json::from_str(r#"{"u": "increasing", "gv": "decreasing"}"#).unwrap();
        assert_eq!(h.get(Var::U), Some(Monotonicity::Increasing));
        assert_eq!(h.get(Var::Gv), Some(Monotonicity::Decreasing));
        assert_eq!(h.get(Var::R), None);
    }
}
