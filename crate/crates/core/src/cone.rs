//! Weighted `C¹` norms, the cone
//!
//! ```text
//! K_ω = { w >= 0,  min_[a,b] w >= c ‖w‖∞,  ‖w'‖_ω <= ‖w‖∞ },   ‖w'‖_ω = sup_(0,1) ω|w'|,
//! ```
//!
//! the splitting of a nonnegative function into a difference of two cone
//! elements, and mollifier smoothing used to approximate arbitrary functions by
//! such differences.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{GridError, GridFunction};
use crate::kernels::{Kernel, WindowPair};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConeError {
    #[error("window [{a}, {b}] with c = {c} is invalid (need 0 <= a < b <= 1, 0 < c < 1)")]
    Tag { a: f64, b: f64, c: f64 },
    #[error("profile is negative at node {node} (value {value:e})")]
    Negative { node: usize, value: f64 },
    #[error("profile must live on [0, 1], got [{0}, {1}]")]
    Interval(f64, f64),
    #[error("grid with {nodes} nodes is too coarse for mollifier index {n} (need N - 1 >= 8n)")]
    CoarseGrid { nodes: usize, n: u32 },
    #[error("mollifier index must be >= 1")]
    ZeroIndex,
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Weight, window and Harnack constant identifying a cone `K_ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedSpaceTag {
    /// `K1` selects `ω₁(t) = t(1 - t)`, `K2` selects `ω₂(t) = t`.
    pub weight: Kernel,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl WeightedSpaceTag {
    pub fn new(weight: Kernel, a: f64, b: f64, c: f64) -> Result<Self, ConeError> {
        if !(0.0 <= a && a < b && b <= 1.0 && c > 0.0 && c < 1.0) {
            return Err(ConeError::Tag { a, b, c });
        }
        Ok(Self { weight, a, b, c })
    }

    /// The tag of component `kernel` of the product cone.
    pub fn for_component(windows: &WindowPair, kernel: Kernel) -> Self {
        let (a, b) = windows.window(kernel);
        Self { weight: kernel, a, b, c: windows.c(kernel) }
    }

    pub fn omega(&self, t: f64) -> f64 {
        self.weight.weight(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Norms {
    pub sup: f64,
    pub weighted_deriv: f64,
    /// `max(sup, weighted_deriv)`.
    pub space: f64,
}

/// Sup norm over all nodes, weighted derivative norm over interior nodes.
pub fn norms(w: &GridFunction, tag: &WeightedSpaceTag) -> Norms {
    let sup = w.sup_norm();
    let weighted_deriv = weighted_deriv_norm(w, tag).0;
    Norms { sup, weighted_deriv, space: sup.max(weighted_deriv) }
}

fn weighted_deriv_norm(w: &GridFunction, tag: &WeightedSpaceTag) -> (f64, Option<usize>) {
    let d = w.derivative();
    let mut best = (0.0, None);
    for j in 1..w.len() - 1 {
        let x = tag.omega(w.node(j)) * d[j].abs();
        if x > best.0 || best.1.is_none() {
            best = (x, Some(j));
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeCheck {
    pub pass: bool,
    /// Slack of the inequality; negative means violated.
    pub margin: f64,
    pub worst_node: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeVerdict {
    pub nonnegative: ConeCheck,
    pub window: ConeCheck,
    pub derivative: ConeCheck,
    pub member: bool,
    /// `‖w‖∞ = 0`: membership holds trivially.
    pub trivial: bool,
}

/// Checks the three cone inequalities. Each passes when its margin is at least
/// `-tol · ‖w‖∞`.
pub fn cone_membership(w: &GridFunction, tag: &WeightedSpaceTag, tol: f64) -> ConeVerdict {
    let sup = w.sup_norm();
    let slack = tol * sup;
    let values = w.values();

    let (min_j, min_v) = values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (j, &v)| if v < acc.1 { (j, v) } else { acc });
    let nonnegative = ConeCheck { pass: min_v >= -slack, margin: min_v, worst_node: Some(min_j) };

    let eps = 1e-12;
    let mut window_min: Option<(usize, f64)> = None;
    for (j, &v) in values.iter().enumerate() {
        let t = w.node(j);
        if t >= tag.a - eps && t <= tag.b + eps && window_min.is_none_or(|(_, m)| v < m) {
            window_min = Some((j, v));
        }
    }
    let window = match window_min {
        Some((j, m)) => {
            let margin = m - tag.c * sup;
            ConeCheck { pass: margin >= -slack, margin, worst_node: Some(j) }
        }
        None => ConeCheck { pass: true, margin: 0.0, worst_node: None },
    };

    let (wd, wd_node) = weighted_deriv_norm(w, tag);
    let margin = sup - wd;
    let derivative = ConeCheck { pass: margin >= -slack, margin, worst_node: wd_node };

    let trivial = sup == 0.0;
    ConeVerdict {
        nonnegative,
        window,
        derivative,
        member: trivial || (nonnegative.pass && window.pass && derivative.pass),
        trivial,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub phi: GridFunction,
    pub psi: GridFunction,
    pub beta: f64,
    pub gamma: f64,
    pub trivial: bool,
}

/// Writes a nonnegative `w` as `φ - ψ` with `φ, ψ ∈ K_ω`:
///
/// ```text
/// β = 1                      if ‖w'‖_ω <= ‖w‖∞,   ‖w'‖_ω / ‖w‖∞ otherwise
/// γ = β max{‖w'‖_ω/‖w‖∞ - 1, c/(1 - c)}
/// φ = β w + γ ‖w‖∞,          ψ = (β - 1) w + γ ‖w‖∞
/// ```
pub fn decompose(w: &GridFunction, tag: &WeightedSpaceTag) -> Result<Decomposition, ConeError> {
    if let Some((node, &value)) = w.values().iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(ConeError::Negative { node, value });
    }
    let n = norms(w, tag);
    if n.sup == 0.0 {
        return Ok(Decomposition { phi: w.clone(), psi: w.clone(), beta: 1.0, gamma: 0.0, trivial: true });
    }
    let q = n.weighted_deriv / n.sup;
    let beta = if q <= 1.0 { 1.0 } else { q };
    let gamma = beta * (q - 1.0).max(tag.c / (1.0 - tag.c));
    let shift = gamma * n.sup;
    Ok(Decomposition {
        phi: w.affine(beta, shift),
        psi: w.affine(beta - 1.0, shift),
        beta,
        gamma,
        trivial: false,
    })
}

/// Base bump `ρ(x) = exp(-1/(x(1 - x)))` on `(0, 1)`, zero elsewhere.
pub fn bump(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        (-1.0 / (x * (1.0 - x))).exp()
    }
}

/// `∫ρ`, by the trapezoid rule (spectrally accurate for a flat-ended bump).
pub fn bump_integral() -> f64 {
    static INTEGRAL: OnceLock<f64> = OnceLock::new();
    *INTEGRAL.get_or_init(|| {
        let m = 4096;
        let h = 1.0 / m as f64;
        (1..m).map(|k| bump(k as f64 * h)).sum::<f64>() * h
    })
}

/// `ρ_n(x) = n ρ(n x) / ∫ρ`, supported in `[0, 1/n]`.
pub fn mollifier_eval(n: u32, x: f64) -> f64 {
    n as f64 * bump(n as f64 * x) / bump_integral()
}

/// One-sided convolution `w_n(t) = ∫_0^t w(t - y) ρ_n(y) dy` on the grid of `w`.
///
/// When `w(0) ≠ 0` the profile is shifted to `w - w(0)`, convolved and shifted
/// back. The discrete kernel is renormalised to unit mass, so constants are
/// reproduced exactly. Derivatives use `w_n' = ∫_0^t w'(t - y) ρ_n(y) dy`.
pub fn mollify(w: &GridFunction, n: u32) -> Result<GridFunction, ConeError> {
    if n == 0 {
        return Err(ConeError::ZeroIndex);
    }
    if w.lo() != 0.0 || w.hi() != 1.0 {
        return Err(ConeError::Interval(w.lo(), w.hi()));
    }
    let nodes = w.len();
    if nodes - 1 < 8 * n as usize {
        return Err(ConeError::CoarseGrid { nodes, n });
    }
    let h = w.spacing();
    let support = ((1.0 / n as f64) / h + 1e-9).floor() as usize;
    let mut kernel: Vec<f64> = (0..=support).map(|k| mollifier_eval(n, k as f64 * h)).collect();
    let mass: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|x| *x /= mass);

    let w0 = w.values()[0];
    let values = w.values();
    let deriv = w.derivative();
    let mut out_v = vec![0.0; nodes];
    let mut out_d = vec![0.0; nodes];
    for j in 0..nodes {
        let last = j.min(support);
        let mut acc_v = 0.0;
        let mut acc_d = 0.0;
        for (k, &rk) in kernel.iter().enumerate().take(last + 1) {
            // truncated rows end at y = t: half trapezoid weight there
            let wk = if k == j && j <= support { 0.5 * rk } else { rk };
            acc_v += wk * (values[j - k] - w0);
            acc_d += wk * deriv[j - k];
        }
        out_v[j] = acc_v + w0;
        out_d[j] = acc_d;
    }
    Ok(GridFunction::new(0.0, 1.0, out_v, out_d)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: u32,
    pub sup_error: f64,
    pub weighted_deriv_error: f64,
}

/// `‖w_n - w‖∞` and `‖w_n' - w'‖_ω` for each mollifier index.
pub fn convergence_report(w: &GridFunction, weight: Kernel, n_list: &[u32]) -> Result<Vec<ConvergenceRow>, ConeError> {
    n_list
        .iter()
        .map(|&n| {
            let wn = mollify(w, n)?;
            let sup_error = w.distance(&wn);
            let mut weighted = 0.0_f64;
            for j in 1..w.len() - 1 {
                let e = weight.weight(w.node(j)) * (wn.derivative()[j] - w.derivative()[j]).abs();
                weighted = weighted.max(e);
            }
            Ok(ConvergenceRow { n, sup_error, weighted_deriv_error: weighted })
        })
        .collect()
}

/// Cone elements `φ_n, ψ_n` with `φ_n - ψ_n` equal to the mollified `w`.
///
/// The shifted profile `w - w(0)` is split into positive and negative parts,
/// each part is mollified and decomposed, and `w(0)` is added back to `φ_n`
/// (if positive) or subtracted from `ψ_n` (if negative).
pub fn approximate_by_difference(
    w: &GridFunction,
    tag: &WeightedSpaceTag,
    n: u32,
) -> Result<(GridFunction, GridFunction), ConeError> {
    let w0 = w.values()[0];
    let shifted = w.affine(1.0, -w0);
    let part = |sign: f64| -> Result<GridFunction, ConeError> {
        let vals = shifted.values().iter().map(|v| (sign * v).max(0.0)).collect();
        let ders = shifted
            .values()
            .iter()
            .zip(shifted.derivative())
            .map(|(v, d)| if sign * v > 0.0 { sign * d } else { 0.0 })
            .collect();
        mollify(&GridFunction::new(0.0, 1.0, vals, ders)?, n)
    };
    let plus = decompose(&part(1.0)?, tag)?;
    let minus = decompose(&part(-1.0)?, tag)?;
    let sum = |a: &GridFunction, b: &GridFunction, shift: f64| -> Result<GridFunction, ConeError> {
        let vals = a.values().iter().zip(b.values()).map(|(x, y)| x + y + shift).collect();
        let ders = a.derivative().iter().zip(b.derivative()).map(|(x, y)| x + y).collect();
        Ok(GridFunction::new(0.0, 1.0, vals, ders)?)
    };
    let (phi_shift, psi_shift) = if w0 > 0.0 { (w0, 0.0) } else { (0.0, -w0) };
    Ok((sum(&plus.phi, &minus.psi, phi_shift)?, sum(&plus.psi, &minus.phi, psi_shift)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tag1() -> WeightedSpaceTag {
        WeightedSpaceTag::new(Kernel::K1, 0.25, 0.75, 0.25).unwrap()
    }

    #[test]
    fn norms_of_simple_profiles() {
        let one = GridFunction::sample(101, |_| 1.0).unwrap();
        let n = norms(&one, &tag1());
        assert_eq!((n.sup, n.weighted_deriv, n.space), (1.0, 0.0, 1.0));

        let t2 = WeightedSpaceTag::new(Kernel::K2, 0.5, 1.0, 0.5).unwrap();
        let lin = GridFunction::sample(101, |t| t).unwrap();
        let n = norms(&lin, &t2);
        assert!((n.sup - 1.0).abs() < 1e-15);
        assert!((n.weighted_deriv - 0.99).abs() < 1e-12); // last interior node
        assert!((n.space - 1.0).abs() < 1e-15);

        let s = GridFunction::sample_with_derivative(2001, |t| (PI * t).sin(), |t| PI * (PI * t).cos()).unwrap();
        let n = norms(&s, &tag1());
        let fine = (1..100_000)
            .map(|k| {
                let t = k as f64 / 100_000.0;
                PI * t * (1.0 - t) * (PI * t).cos().abs()
            })
            .fold(0.0, f64::max);
        assert!((n.weighted_deriv - fine).abs() < 1e-5);
        assert!(n.weighted_deriv < PI / 4.0 && n.weighted_deriv < 1.0);
    }

    #[test]
    fn membership_examples() {
        let one = GridFunction::sample(11, |_| 1.0).unwrap();
        assert!(cone_membership(&one, &tag1(), 0.0).member);
        let bump = GridFunction::sample_with_derivative(401, |t| t * (1.0 - t), |t| 1.0 - 2.0 * t).unwrap();
        let v = cone_membership(&bump, &tag1(), 1e-12);
        assert!((v.window.margin - (3.0 / 16.0 - 1.0 / 16.0)).abs() < 1e-12);
        assert!(v.member);
        let lin = GridFunction::sample(401, |t| t).unwrap();
        let v = cone_membership(&lin, &tag1(), 1e-12);
        assert!(v.window.pass && v.derivative.pass && v.member);
        assert!(v.window.margin.abs() < 1e-12);
        let zero = GridFunction::zeros(11).unwrap();
        assert!(cone_membership(&zero, &tag1(), 0.0).trivial);
    }

    #[test]
    fn decompose_branches() {
        let one = GridFunction::sample(51, |_| 1.0).unwrap();
        let d = decompose(&one, &tag1()).unwrap();
        assert_eq!(d.beta, 1.0);
        assert!((d.gamma - 1.0 / 3.0).abs() < 1e-15);
        assert!(d.phi.values().iter().all(|v| (v - 4.0 / 3.0).abs() < 1e-15));
        assert!(d.psi.values().iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));

        let s = GridFunction::sample_with_derivative(201, |t| (PI * t).sin(), |t| PI * (PI * t).cos()).unwrap();
        let d = decompose(&s, &tag1()).unwrap();
        assert_eq!(d.beta, 1.0);
        assert!((d.gamma - 1.0 / 3.0).abs() < 1e-15);
        assert!(d.psi.values().iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));

        // ‖w'‖_ω = ‖w‖∞ = 1 for w = t on ω₂ with an exact derivative at t = 1
        let t2 = WeightedSpaceTag::new(Kernel::K2, 0.5, 1.0, 0.5).unwrap();
        let lin = GridFunction::new(0.0, 1.0, vec![0.0, 0.5, 1.0], vec![1.0, 2.0, 1.0]).unwrap();
        let d = decompose(&lin, &t2).unwrap();
        assert_eq!(d.beta, 1.0);
        assert_eq!(d.gamma, 0.5 / 0.5);
    }

    #[test]
    fn decompose_rejects_negative_and_flags_zero() {
        let w = GridFunction::sample(11, |t| t - 0.5).unwrap();
        assert!(matches!(decompose(&w, &tag1()), Err(ConeError::Negative { node: 0, .. })));
        assert!(decompose(&GridFunction::zeros(5).unwrap(), &tag1()).unwrap().trivial);
    }

    #[test]
    fn mollifier_support_and_mass() {
        for n in [1, 4, 32] {
            assert_eq!(mollifier_eval(n, 0.0), 0.0);
            assert_eq!(mollifier_eval(n, 1.0 / n as f64), 0.0);
            assert_eq!(mollifier_eval(n, 2.0 / n as f64), 0.0);
            let m = 200_000;
            let h = 1.0 / (n as f64 * m as f64);
            let mass: f64 = (1..m).map(|k| mollifier_eval(n, k as f64 * h)).sum::<f64>() * h;
            assert!((mass - 1.0).abs() < 1e-10, "n = {n}: {mass}");
        }
    }

    #[test]
    fn mollify_constants_and_lines() {
        let k = GridFunction::sample(1025, |_| 2.5).unwrap();
        let kn = mollify(&k, 16).unwrap();
        assert!(kn.values().iter().all(|v| (v - 2.5).abs() < 1e-14));

        let lin = GridFunction::sample(1025, |t| t).unwrap();
        let ln = mollify(&lin, 16).unwrap();
        let shift = lin.values()[900] - ln.values()[900];
        assert!(shift > 0.0 && shift < 1.0 / 16.0);
        for j in 100..1025 {
            assert!((lin.values()[j] - ln.values()[j] - shift).abs() < 1e-12);
        }
    }

    #[test]
    fn mollify_needs_fine_grid() {
        let w = GridFunction::sample(65, |t| t).unwrap();
        assert!(mollify(&w, 8).is_ok());
        assert_eq!(mollify(&w, 9), Err(ConeError::CoarseGrid { nodes: 65, n: 9 }));
    }

    #[test]
    fn mollified_bump_is_close() {
        let w = GridFunction::sample_with_derivative(2049, |t| t * (1.0 - t), |t| 1.0 - 2.0 * t).unwrap();
        let wn = mollify(&w, 64).unwrap();
        assert!(w.distance(&wn) <= 2.0 / 64.0);
    }

    #[test]
    fn difference_approximation_lands_in_cone() {
        let w = GridFunction::sample(2049, |t| (3.0 * PI * t).cos() + 0.2).unwrap();
        let tag = tag1();
        let (phi, psi) = approximate_by_difference(&w, &tag, 32).unwrap();
        assert!(cone_membership(&phi, &tag, 1e-10).member);
        assert!(cone_membership(&psi, &tag, 1e-10).member);
        let wn = mollify(&w, 32).unwrap();
        for j in 0..w.len() {
            assert!((phi.values()[j] - psi.values()[j] - wn.values()[j]).abs() < 1e-12);
        }
    }
}
