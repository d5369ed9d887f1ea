//! Green's kernels of the two transformed boundary value problems.
//!
//! `k1` inverts `-w''` with `w(0) = w(1) = 0`, `k2` with `w(0) = w'(1) = 0`:
//!
//! ```text
//! k1(t, s) = s (1 - t)  for s <= t,    t (1 - s)  for t <= s
//! k2(t, s) = s          for s <= t,    t          for t <= s
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("kernel derivative is discontinuous on the diagonal t = s = {0}; pick a side")]
    Diagonal(f64),
    #[error("({t}, {s}) is outside the unit square")]
    Domain { t: f64, s: f64 },
    #[error("window [{a}, {b}] violates {rule}")]
    Window { a: f64, b: f64, rule: &'static str },
}

/// Which Green's kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    /// `k1`, Dirichlet at both ends.
    K1,
    /// `k2`, Dirichlet at 0, Neumann at 1.
    K2,
}

/// Which one-sided branch of `∂k/∂t` to use at `t = s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// The `s < t` branch.
    Below,
    /// The `t < s` branch.
    Above,
}

impl Kernel {
    pub const ALL: [Kernel; 2] = [Kernel::K1, Kernel::K2];

    pub fn index(self) -> usize {
        match self {
            Kernel::K1 => 0,
            Kernel::K2 => 1,
        }
    }

    #[inline]
    pub fn value(self, t: f64, s: f64) -> f64 {
        match self {
            Kernel::K1 => {
                if s <= t {
                    s * (1.0 - t)
                } else {
                    t * (1.0 - s)
                }
            }
            Kernel::K2 => t.min(s),
        }
    }

    /// The `s < t` (`Below`) or `t < s` (`Above`) formula of `k`, evaluated
    /// at any `(t, s)`.
    #[inline]
    pub fn branch_value(self, t: f64, s: f64, side: Side) -> f64 {
        match (self, side) {
            (Kernel::K1, Side::Below) => s * (1.0 - t),
            (Kernel::K1, Side::Above) => t * (1.0 - s),
            (Kernel::K2, Side::Below) => s,
            (Kernel::K2, Side::Above) => t,
        }
    }

    /// `∂k/∂t (t, s)`; undefined on the diagonal.
    pub fn dt(self, t: f64, s: f64) -> Result<f64, KernelError> {
        if !((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&s)) {
            return Err(KernelError::Domain { t, s });
        }
        if t == s {
            return Err(KernelError::Diagonal(t));
        }
        Ok(self.dt_side(s, if s < t { Side::Below } else { Side::Above }))
    }

    /// One-sided `∂k/∂t`; the value only depends on `s` and the side.
    #[inline]
    pub fn dt_side(self, s: f64, side: Side) -> f64 {
        match (self, side) {
            (Kernel::K1, Side::Below) => -s,
            (Kernel::K1, Side::Above) => 1.0 - s,
            (Kernel::K2, Side::Below) => 0.0,
            (Kernel::K2, Side::Above) => 1.0,
        }
    }

    /// `φ_i(s) = sup_t k_i(t, s)`.
    pub fn phi(self, s: f64) -> f64 {
        match self {
            Kernel::K1 => s * (1.0 - s),
            Kernel::K2 => s,
        }
    }

    /// `ψ_i(s)`, a bound on `|∂k_i/∂t (·, s)|`.
    pub fn psi(self, s: f64) -> f64 {
        match self {
            Kernel::K1 => s.max(1.0 - s),
            Kernel::K2 => 1.0,
        }
    }

    /// `ω_1(t) = t(1 - t)`, `ω_2(t) = t`.
    pub fn weight(self, t: f64) -> f64 {
        match self {
            Kernel::K1 => t * (1.0 - t),
            Kernel::K2 => t,
        }
    }

    /// `∫_0^1 φ_i(s) ds`.
    pub fn phi_integral(self) -> f64 {
        match self {
            Kernel::K1 => 1.0 / 6.0,
            Kernel::K2 => 0.5,
        }
    }

    /// `m_i = (sup_t ∫_0^1 k_i(t, s) ds)^-1`.
    ///
    /// `∫ k1(t, s) ds = t(1 - t)/2` peaks at 1/8; `∫ k2(t, s) ds = t - t²/2` at 1/2.
    pub fn m_constant(self) -> f64 {
        match self {
            Kernel::K1 => 8.0,
            Kernel::K2 => 2.0,
        }
    }

    pub fn check_window(self, a: f64, b: f64) -> Result<(), KernelError> {
        let ok = match self {
            Kernel::K1 => 0.0 < a && a < b && b < 1.0,
            Kernel::K2 => 0.0 < a && a < b && b <= 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(KernelError::Window {
                a,
                b,
                rule: match self {
                    Kernel::K1 => "0 < a1 < b1 < 1",
                    Kernel::K2 => "0 < a2 < b2 <= 1",
                },
            })
        }
    }

    /// `M_i(a, b) = (inf_{t ∈ [a,b]} ∫_a^b k_i(t, s) ds)^-1`.
    pub fn big_m(self, a: f64, b: f64) -> Result<f64, KernelError> {
        self.check_window(a, b)?;
        Ok(match self {
            Kernel::K1 => {
                if a + b <= 1.0 {
                    2.0 / (a * (b - a) * (2.0 - a - b))
                } else {
                    2.0 / ((1.0 - b) * (b * b - a * a))
                }
            }
            Kernel::K2 => 1.0 / (a * (b - a)),
        })
    }

    /// Harnack constant: `c_1 = min{a1, 1 - b1}`, `c_2 = a2`.
    pub fn c_constant(self, a: f64, b: f64) -> Result<f64, KernelError> {
        self.check_window(a, b)?;
        Ok(match self {
            Kernel::K1 => a.min(1.0 - b),
            Kernel::K2 => a,
        })
    }
}

/// The two windows `[a1, b1] ⊂ (0, 1)` and `[a2, b2] ⊂ (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWindows", into = "RawWindows")]
pub struct WindowPair {
    a: [f64; 2],
    b: [f64; 2],
}

#[derive(Serialize, Deserialize)]
struct RawWindows {
    a1: f64,
    b1: f64,
    a2: f64,
    b2: f64,
}

impl TryFrom<RawWindows> for WindowPair {
    type Error = KernelError;
    fn try_from(raw: RawWindows) -> Result<Self, KernelError> {
        WindowPair::new(raw.a1, raw.b1, raw.a2, raw.b2)
    }
}

impl From<WindowPair> for RawWindows {
    fn from(w: WindowPair) -> Self {
        RawWindows { a1: w.a[0], b1: w.b[0], a2: w.a[1], b2: w.b[1] }
    }
}

impl WindowPair {
    pub fn new(a1: f64, b1: f64, a2: f64, b2: f64) -> Result<Self, KernelError> {
        Kernel::K1.check_window(a1, b1)?;
        Kernel::K2.check_window(a2, b2)?;
        Ok(Self { a: [a1, a2], b: [b1, b2] })
    }

    pub fn window(&self, kernel: Kernel) -> (f64, f64) {
        let i = kernel.index();
        (self.a[i], self.b[i])
    }

    pub fn c(&self, kernel: Kernel) -> f64 {
        let (a, b) = self.window(kernel);
        kernel.c_constant(a, b).expect("validated window")
    }

    pub fn big_m(&self, kernel: Kernel) -> f64 {
        let (a, b) = self.window(kernel);
        kernel.big_m(a, b).expect("validated window")
    }
}
