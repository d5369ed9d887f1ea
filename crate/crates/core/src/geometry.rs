//! Radial reduction of the annulus `R0 < |x| < R1` in `R^n` onto `t ∈ [0, 1]`.
//!
//! For `n = 2` the change of variables is `r(t) = R1^(1-t) R0^t` (decreasing);
//! for `n >= 3` it is `r(t) = (A / (B - t))^(1/(n-2))` (increasing) with
//!
//! ```text
//! A = (R0 R1)^(n-2) / (R1^(n-2) - R0^(n-2)),   B = R1^(n-2) / (R1^(n-2) - R0^(n-2)).
//! ```
//!
//! The weight `p(t)` multiplies the nonlinearities in the transformed system.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension must be an integer >= 2, got {0}")]
    Dimension(u32),
    #[error("radii must satisfy 0 < R0 < R1 < inf, got R0 = {inner}, R1 = {outer}")]
    Radii { inner: f64, outer: f64 },
    #[error("t = {0} lies outside [0, 1]")]
    Domain(f64),
    #[error("interval [{lo}, {hi}] is not a subinterval of [0, 1]")]
    Interval { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGeometry", into = "RawGeometry")]
pub struct AnnulusGeometry {
    dim: u32,
    inner: f64,
    outer: f64,
    // Only meaningful for dim >= 3.
    a: f64,
    b: f64,
}

#[derive(Serialize, Deserialize)]
struct RawGeometry {
    dimension: u32,
    inner_radius: f64,
    outer_radius: f64,
}

impl TryFrom<RawGeometry> for AnnulusGeometry {
    type Error = GeometryError;
    fn try_from(raw: RawGeometry) -> Result<Self, GeometryError> {
        AnnulusGeometry::new(raw.dimension, raw.inner_radius, raw.outer_radius)
    }
}

impl From<AnnulusGeometry> for RawGeometry {
    fn from(g: AnnulusGeometry) -> Self {
        RawGeometry { dimension: g.dim, inner_radius: g.inner, outer_radius: g.outer }
    }
}

impl AnnulusGeometry {
    pub fn new(dim: u32, inner: f64, outer: f64) -> Result<Self, GeometryError> {
        if dim < 2 {
            return Err(GeometryError::Dimension(dim));
        }
        if !(inner > 0.0 && inner < outer && outer.is_finite()) {
            return Err(GeometryError::Radii { inner, outer });
        }
        let (a, b) = if dim >= 3 {
            let k = (dim - 2) as i32;
            let r0k = inner.powi(k);
            let r1k = outer.powi(k);
            let gap = r1k - r0k;
            ((inner * outer).powi(k) / gap, r1k / gap)
        } else {
            (f64::NAN, f64::NAN)
        };
        Ok(Self { dim, inner, outer, a, b })
    }

    pub fn dimension(&self) -> u32 {
        self.dim
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer
    }

    /// `(A, B)` for `n >= 3`, `None` in the plane.
    pub fn a_b(&self) -> Option<(f64, f64)> {
        (self.dim >= 3).then_some((self.a, self.b))
    }

    fn check(t: f64) -> Result<(), GeometryError> {
        if (0.0..=1.0).contains(&t) {
            Ok(())
        } else {
            Err(GeometryError::Domain(t))
        }
    }

    /// `r(t)`, a value in `[R0, R1]`.
    pub fn radial_map(&self, t: f64) -> Result<f64, GeometryError> {
        Self::check(t)?;
        Ok(self.radial_map_unchecked(t))
    }

    pub(crate) fn radial_map_unchecked(&self, t: f64) -> f64 {
        let r = if self.dim == 2 {
            self.outer.powf(1.0 - t) * self.inner.powf(t)
        } else {
            (self.a / (self.b - t)).powf(1.0 / (self.dim - 2) as f64)
        };
        r.clamp(self.inner, self.outer)
    }

    /// `r'(t)`.
    ///
    /// n = 2: d/dt [R1^(1-t) R0^t] = r(t) ln(R0/R1), always negative.
    /// n >= 3: r = (A/(B-t))^(1/(n-2)), so
    ///   r' = (1/(n-2)) (A/(B-t))^(1/(n-2)) / (B - t) = r(t) / ((n-2)(B-t)) > 0,
    /// with B > 1 keeping B - t away from zero on [0, 1].
    pub fn radial_derivative(&self, t: f64) -> Result<f64, GeometryError> {
        Self::check(t)?;
        Ok(self.radial_derivative_unchecked(t))
    }

    pub(crate) fn radial_derivative_unchecked(&self, t: f64) -> f64 {
        let r = self.radial_map_unchecked(t);
        if self.dim == 2 {
            r * (self.inner / self.outer).ln()
        } else {
            r / ((self.dim - 2) as f64 * (self.b - t))
        }
    }

    /// The weight `p(t) > 0`.
    pub fn weight_p(&self, t: f64) -> Result<f64, GeometryError> {
        Self::check(t)?;
        Ok(self.weight_p_unchecked(t))
    }

    pub(crate) fn weight_p_unchecked(&self, t: f64) -> f64 {
        if self.dim == 2 {
            let r = self.radial_map_unchecked(t);
            let l = (self.outer / self.inner).ln();
            r * r * l * l
        } else {
            let k = (self.dim - 2) as i32;
            let kf = k as f64;
            let r1k = self.outer.powi(k);
            let gap = r1k - self.inner.powi(k);
            let num = self.inner * self.outer * gap / kf;
            let exponent = 2.0 * (self.dim - 1) as f64 / kf;
            num * num / (r1k - gap * t).powf(exponent)
        }
    }

    /// `(inf, sup)` of `p` on `[lo, hi]`.
    ///
    /// `p` is increasing for `n >= 3` (the denominator decreases in `t`) and
    /// decreasing for `n = 2` (`r` decreases), so both extrema sit at endpoints.
    pub fn p_extrema(&self, lo: f64, hi: f64) -> Result<(f64, f64), GeometryError> {
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(GeometryError::Interval { lo, hi });
        }
        let (p_lo, p_hi) = (self.weight_p_unchecked(lo), self.weight_p_unchecked(hi));
        Ok(if self.dim == 2 { (p_hi, p_lo) } else { (p_lo, p_hi) })
    }

    /// Dense-sampling estimate of `(inf, sup)` of `p` on `[lo, hi]`.
    pub fn p_extrema_sampled(&self, lo: f64, hi: f64, samples: usize) -> Result<(f64, f64), GeometryError> {
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(GeometryError::Interval { lo, hi });
        }
        let m = samples.max(2);
        let mut inf = f64::INFINITY;
        let mut sup = f64::NEG_INFINITY;
        for j in 0..m {
            let t = if j + 1 == m { hi } else { lo + (hi - lo) * j as f64 / (m - 1) as f64 };
            let p = self.weight_p_unchecked(t);
            inf = inf.min(p);
            sup = sup.max(p);
        }
        Ok((inf, sup))
    }

    /// `[min{r(a), r(b)}, max{r(a), r(b)}]`.
    pub fn radial_range(&self, a: f64, b: f64) -> Result<(f64, f64), GeometryError> {
        let ra = self.radial_map(a)?;
        let rb = self.radial_map(b)?;
        Ok((ra.min(rb), ra.max(rb)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn space() -> AnnulusGeometry {
        AnnulusGeometry::new(3, 1.0, E).unwrap()
    }

    fn plane() -> AnnulusGeometry {
        AnnulusGeometry::new(2, 1.0, E).unwrap()
    }

    #[test]
    fn radial_map_endpoints_and_midpoint() {
        let g = space();
        assert!((g.radial_map(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((g.radial_map(1.0).unwrap() - E).abs() < 1e-14);
        assert!((plane().radial_map(0.5).unwrap() - 1.648_721_270_700_128).abs() < 1e-12);
        assert_eq!(g.radial_map(1.5), Err(GeometryError::Domain(1.5)));
    }

    #[test]
    fn radial_derivative_values() {
        assert!((plane().radial_derivative(0.5).unwrap() + 1.648_721_270_700_128).abs() < 1e-12);
        assert!((space().radial_derivative(0.0).unwrap() - (E - 1.0) / E).abs() < 1e-12);
        assert!((space().radial_derivative(1.0).unwrap() - E * (E - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn derived_constants_for_space() {
        let (a, b) = space().a_b().unwrap();
        assert!((a - E / (E - 1.0)).abs() < 1e-14);
        assert!((b - E / (E - 1.0)).abs() < 1e-14);
        assert!(b > 1.0);
        assert!(plane().a_b().is_none());
    }

    #[test]
    fn weight_values() {
        let sup = E * E * (E - 1.0) * (E - 1.0);
        assert!((space().weight_p(1.0).unwrap() - sup).abs() < 1e-12);
        assert!((sup - 21.816_132).abs() < 1e-6);
        let quarter = sup / (E - (E - 1.0) / 4.0).powi(4);
        assert!((space().weight_p(0.25).unwrap() - quarter).abs() < 1e-12);
        assert!((quarter - 0.795_085).abs() < 1e-5);
        assert!((plane().weight_p(0.0).unwrap() - E * E).abs() < 1e-12);
    }

    #[test]
    fn extrema_at_endpoints() {
        let g = space();
        let (_, sup) = g.p_extrema(0.0, 1.0).unwrap();
        assert!((sup - 21.816_132).abs() < 1e-6);
        let (inf, _) = g.p_extrema(0.5, 1.0).unwrap();
        assert!((inf - E * E * (E - 1.0).powi(2) / (E - (E - 1.0) / 2.0).powi(4)).abs() < 1e-12);
        assert!((inf - 1.826_117).abs() < 1e-5);
        let p = plane();
        let (inf, sup) = p.p_extrema(0.0, 1.0).unwrap();
        assert_eq!(sup, p.weight_p(0.0).unwrap());
        assert_eq!(inf, p.weight_p(1.0).unwrap());
    }

    #[test]
    fn rejects_bad_radii_and_dimension() {
        assert!(matches!(AnnulusGeometry::new(3, 2.0, 1.0), Err(GeometryError::Radii { .. })));
        assert!(matches!(AnnulusGeometry::new(3, 0.0, 1.0), Err(GeometryError::Radii { .. })));
        assert_eq!(AnnulusGeometry::new(1, 1.0, 2.0), Err(GeometryError::Dimension(1)));
    }
}
