//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::f64::consts::{E, PI};
use std::path::PathBuf;

use annulus_core::problem::{load_problem, ProblemSpec};

pub fn example_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/paper_example.problem")
}

pub fn example() -> ProblemSpec {
    load_problem(example_path()).expect("bundled example loads")
}

/// Composite Simpson on `[a, b]` with `2m` panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let n = 2 * m;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// Golden-section search for the maximiser of a unimodal `f` on `[a, b]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > 1e-12 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Green's kernels written out independently of the library.
pub fn k1(t: f64, s: f64) -> f64 {
    if s <= t { s * (1.0 - t) } else { t * (1.0 - s) }
}

pub fn k2(t: f64, s: f64) -> f64 {
    if s <= t { s } else { t }
}

/// `∫_a^b k(t, s) ds`, exact for the piecewise linear kernels since Simpson
/// integrates each linear piece exactly.
pub fn kernel_integral(k: fn(f64, f64) -> f64, t: f64, a: f64, b: f64) -> f64 {
    let mid = t.clamp(a, b);
    simpson(|s| k(t, s), a, mid, 2) + simpson(|s| k(t, s), mid, b, 2)
}

pub type Native = fn(f64, f64, f64, f64, f64) -> f64;

pub const POINTS: [[f64; 5]; 3] = [[1.5, 2.0, 0.5, 3.0, 0.25], [1.0, 0.3, 1.7, 0.0, 2.0], [2.6, 5.0, 0.1, 1.25, 0.75]];

pub fn valid_cases() -> Vec<(&'static str, Native)> {
    vec![
        ("(1 + (2/pi)*atan(r^2 + gv^2)) * u^2", |r, u, _, _, gv| (1.0 + 2.0 / PI * (r * r + gv * gv).atan()) * u * u),
        ("(4/pi)*atan(1 + gu^2 + gv^2)*v^2", |_, _, v, gu, gv| 4.0 / PI * (1.0 + gu * gu + gv * gv).atan() * v * v),
        ("0", |_, _, _, _, _| 0.0),
        ("42", |_, _, _, _, _| 42.0),
        ("3.25", |_, _, _, _, _| 3.25),
        ("1e3", |_, _, _, _, _| 1000.0),
        ("2.5E-2", |_, _, _, _, _| 0.025),
        (".5", |_, _, _, _, _| 0.5),
        ("pi", |_, _, _, _, _| PI),
        ("e", |_, _, _, _, _| E),
        ("r", |r, _, _, _, _| r),
        ("gu + gv", |_, _, _, gu, gv| gu + gv),
        ("u - v - r", |r, u, v, _, _| u - v - r),
        ("u / v / r", |r, u, v, _, _| u / v / r),
        ("u + v * r", |r, u, v, _, _| u + v * r),
        ("(u + v) * r", |r, u, v, _, _| (u + v) * r),
        ("2^3^2", |_, _, _, _, _| 512.0),
        ("-u^2", |_, u, _, _, _| -(u * u)),
        ("(-u)^2", |_, u, _, _, _| u * u),
        ("u^-1", |_, u, _, _, _| 1.0 / u),
        ("--u", |_, u, _, _, _| u),
        ("-u * -v", |_, u, v, _, _| u * v),
        ("2 * -3", |_, _, _, _, _| -6.0),
        ("u^0.5", |_, u, _, _, _| u.sqrt()),
        ("r^r", |r, _, _, _, _| r.powf(r)),
        ("sin(pi*r)", |r, _, _, _, _| (PI * r).sin()),
        ("cos(u) + tan(v)", |_, u, v, _, _| u.cos() + v.tan()),
        ("atan(gu)", |_, _, _, gu, _| gu.atan()),
        ("tanh(u - v)", |_, u, v, _, _| (u - v).tanh()),
        ("exp(-r)", |r, _, _, _, _| (-r).exp()),
        ("log(1 + u^2)", |_, u, _, _, _| (1.0 + u * u).ln()),
        ("sqrt(gu^2 + gv^2)", |_, _, _, gu, gv| (gu * gu + gv * gv).sqrt()),
        ("abs(u - gu)", |_, u, _, gu, _| (u - gu).abs()),
        ("min(u, v)", |_, u, v, _, _| u.min(v)),
        ("max(u, 2*v)", |_, u, v, _, _| u.max(2.0 * v)),
        ("min(max(u, v), r)", |r, u, v, _, _| u.max(v).min(r)),
        ("  u\t*\n v ", |_, u, v, _, _| u * v),
        ("u*v", |_, u, v, _, _| u * v),
        ("((((u))))", |_, u, _, _, _| u),
        ("1 - 2 - 3", |_, _, _, _, _| -4.0),
        ("8 / 4 / 2", |_, _, _, _, _| 1.0),
        ("u^2 * v^3", |_, u, v, _, _| u.powi(2) * v.powi(3)),
        ("exp(log(r))", |r, _, _, _, _| r),
        ("e^r", |r, _, _, _, _| r.exp()),
        ("(1 + gu^2)^(-1/2)", |_, _, _, gu, _| 1.0 / (1.0 + gu * gu).sqrt()),
    ]
}

