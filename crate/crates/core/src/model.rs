//! Domain types and the closed-form relations between the observed pair
//! `(rho_xy, sigma_y / sigma_x)` and a sensitivity tuple
//! `(R^2_wx, R^2_wy, rho_xhat_yhat)`.
//!
//! Square roots of the coefficients of determination are always taken as
//! the nonnegative root; sign information lives in `rho_hxhy`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used for feasibility checks unless a caller picks
/// another one.
pub const DEFAULT_TOL: f64 = 1e-12;

/// The measured correlation and standard-deviation ratio of `x` and `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub rho_xy: f64,
    pub sigma_ratio: f64,
}

impl SummaryStats {
    pub fn new(rho_xy: f64, sigma_ratio: f64) -> Result<Self> {
        let stats = Self {
            rho_xy,
            sigma_ratio,
        };
        stats.validate()?;
        Ok(stats)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho_xy > -1.0 && self.rho_xy < 1.0) {
            return Err(Error::Domain(format!(
                "rho_xy must lie in (-1, 1), got {}",
                self.rho_xy
            )));
        }
        if !(self.sigma_ratio > 0.0 && self.sigma_ratio.is_finite()) {
            return Err(Error::Domain(format!(
                "sigma ratio must be positive and finite, got {}",
                self.sigma_ratio
            )));
        }
        Ok(())
    }

    /// Slope of the unadjusted regression of `y` on `x`.
    pub fn unadjusted_slope(&self) -> f64 {
        self.sigma_ratio * self.rho_xy
    }
}

/// Six interval endpoints constraining a sensitivity tuple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSpec {
    pub l_x2: f64,
    pub u_x2: f64,
    pub l_y2: f64,
    pub u_y2: f64,
    pub l_rho: f64,
    pub u_rho: f64,
}

impl BoundSpec {
    pub fn new(r2x: (f64, f64), r2y: (f64, f64), rho: (f64, f64)) -> Result<Self> {
        let spec = Self {
            l_x2: r2x.0,
            u_x2: r2x.1,
            l_y2: r2y.0,
            u_y2: r2y.1,
            l_rho: rho.0,
            u_rho: rho.1,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Bounds on the two coefficients of determination with the default
    /// `[-1, 1]` range on the fitted-value correlation.
    pub fn with_default_rho(r2x: (f64, f64), r2y: (f64, f64)) -> Result<Self> {
        Self::new(r2x, r2y, (-1.0, 1.0))
    }

    pub fn validate(&self) -> Result<()> {
        check_r2_bounds("r2x", self.l_x2, self.u_x2)?;
        check_r2_bounds("r2y", self.l_y2, self.u_y2)?;
        if !(self.l_rho.is_finite() && self.u_rho.is_finite()) {
            return Err(Error::InvalidBounds(
                "rho-hxhy bounds must be finite".into(),
            ));
        }
        if self.l_rho > self.u_rho {
            return Err(Error::InvalidBounds(format!(
                "rho-hxhy: lower bound exceeds upper ({} > {})",
                self.l_rho, self.u_rho
            )));
        }
        if self.l_rho < -1.0 || self.u_rho > 1.0 {
            return Err(Error::InvalidBounds(format!(
                "rho-hxhy: bounds must lie in [-1, 1], got [{}, {}]",
                self.l_rho, self.u_rho
            )));
        }
        Ok(())
    }

    /// True if `self` lies componentwise inside `outer`.
    pub fn is_within(&self, outer: &BoundSpec) -> bool {
        self.l_x2 >= outer.l_x2
            && self.u_x2 <= outer.u_x2
            && self.l_y2 >= outer.l_y2
            && self.u_y2 <= outer.u_y2
            && self.l_rho >= outer.l_rho
            && self.u_rho <= outer.u_rho
    }

    pub fn contains_box(&self, t: &SensitivityTuple, tol: f64) -> bool {
        t.r2wx >= self.l_x2 - tol
            && t.r2wx <= self.u_x2 + tol
            && t.r2wy >= self.l_y2 - tol
            && t.r2wy <= self.u_y2 + tol
            && t.rho_hxhy >= self.l_rho - tol
            && t.rho_hxhy <= self.u_rho + tol
    }
}

fn check_r2_bounds(name: &str, lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidBounds(format!(
            "{name}: bounds must be finite"
        )));
    }
    if lo > hi {
        return Err(Error::InvalidBounds(format!(
            "{name}: lower bound exceeds upper ({lo} > {hi})"
        )));
    }
    if lo < 0.0 {
        return Err(Error::InvalidBounds(format!(
            "{name}: lower bound must be nonnegative, got {lo}"
        )));
    }
    if hi >= 1.0 {
        return Err(Error::InvalidBounds(format!(
            "{name}: upper bound must be below 1, got {hi}"
        )));
    }
    Ok(())
}

/// A point `(R^2_wx, R^2_wy, rho_xhat_yhat)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityTuple {
    pub r2wx: f64,
    pub r2wy: f64,
    pub rho_hxhy: f64,
}

impl SensitivityTuple {
    pub fn new(r2wx: f64, r2wy: f64, rho_hxhy: f64) -> Result<Self> {
        let t = Self {
            r2wx,
            r2wy,
            rho_hxhy,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.r2wx) {
            return Err(Error::Domain(format!(
                "R^2_wx must lie in [0, 1), got {}",
                self.r2wx
            )));
        }
        if !(0.0..1.0).contains(&self.r2wy) {
            return Err(Error::Domain(format!(
                "R^2_wy must lie in [0, 1), got {}",
                self.r2wy
            )));
        }
        if !(-1.0..=1.0).contains(&self.rho_hxhy) {
            return Err(Error::Domain(format!(
                "rho_hxhy must lie in [-1, 1], got {}",
                self.rho_hxhy
            )));
        }
        Ok(())
    }

    pub fn r_wx(&self) -> f64 {
        self.r2wx.sqrt()
    }

    pub fn r_wy(&self) -> f64 {
        self.r2wy.sqrt()
    }

    /// Max-norm distance between two tuples.
    pub fn distance(&self, other: &SensitivityTuple) -> f64 {
        (self.r2wx - other.r2wx)
            .abs()
            .max((self.r2wy - other.r2wy).abs())
            .max((self.rho_hxhy - other.rho_hxhy).abs())
    }
}

/// The closed interval of attainable adjusted slopes with the tuples that
/// attain each endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfoundingInterval {
    pub lower: f64,
    pub upper: f64,
    pub argmin_tuple: SensitivityTuple,
    pub argmax_tuple: SensitivityTuple,
}

impl ConfoundingInterval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, beta: f64, tol: f64) -> bool {
        beta >= self.lower - tol && beta <= self.upper + tol
    }
}

/// The range of fitted-value correlations realizable for fixed
/// coefficients of determination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoBand {
    pub lower: f64,
    pub upper: f64,
}

/// Adjusted slope of `x` in the regression of `y` on `x` and the
/// confounders, as a function of the sensitivity tuple.
pub fn beta_adjusted(stats: &SummaryStats, t: &SensitivityTuple) -> Result<f64> {
    if t.r2wx.is_nan() || t.r2wx >= 1.0 {
        return Err(Error::Domain(format!(
            "R^2_wx must be below 1 for the adjusted slope, got {}",
            t.r2wx
        )));
    }
    if t.r2wx < 0.0 || t.r2wy < 0.0 {
        return Err(Error::Domain(
            "coefficients of determination must be nonnegative".into(),
        ));
    }
    let numerator = stats.rho_xy - t.r_wx() * t.r_wy() * t.rho_hxhy;
    Ok(stats.sigma_ratio * numerator / (1.0 - t.r2wx))
}

fn check_unit_interval(r2wx: f64, r2wy: f64) -> Result<()> {
    if !(0.0..1.0).contains(&r2wx) || !(0.0..1.0).contains(&r2wy) {
        return Err(Error::Domain(format!(
            "coefficients of determination must lie in [0, 1), got ({r2wx}, {r2wy})"
        )));
    }
    Ok(())
}

/// Unclipped edges `(alpha_minus, alpha_plus)` of the realizability band,
/// or `None` when `R_wx * R_wy = 0` and the constraint is vacuous.
pub fn band_edges(stats: &SummaryStats, r2wx: f64, r2wy: f64) -> Result<Option<(f64, f64)>> {
    check_unit_interval(r2wx, r2wy)?;
    let product = r2wx.sqrt() * r2wy.sqrt();
    if product == 0.0 {
        return Ok(None);
    }
    let spread = (1.0 - r2wx).sqrt() * (1.0 - r2wy).sqrt();
    Ok(Some((
        (stats.rho_xy - spread) / product,
        (stats.rho_xy + spread) / product,
    )))
}

/// Realizable range of `rho_hxhy`, clipped to `[-1, 1]`.
pub fn feasible_rho_range(stats: &SummaryStats, r2wx: f64, r2wy: f64) -> Result<RhoBand> {
    Ok(match band_edges(stats, r2wx, r2wy)? {
        None => RhoBand {
            lower: -1.0,
            upper: 1.0,
        },
        Some((lo, hi)) => RhoBand {
            lower: lo.max(-1.0),
            upper: hi.min(1.0),
        },
    })
}

/// Membership in the feasible set: box constraints plus the realizability
/// band, each relaxed by `tol`.
pub fn is_feasible(stats: &SummaryStats, spec: &BoundSpec, t: &SensitivityTuple, tol: f64) -> bool {
    if !(t.r2wx.is_finite() && t.r2wy.is_finite() && t.rho_hxhy.is_finite()) {
        return false;
    }
    if !spec.contains_box(t, tol) {
        return false;
    }
    // The box relaxation may step just outside the domain; clamp before
    // taking roots.
    let r2wx = t.r2wx.max(0.0);
    let r2wy = t.r2wy.max(0.0);
    if r2wx >= 1.0 || r2wy >= 1.0 {
        return false;
    }
    match band_edges(stats, r2wx, r2wy) {
        Ok(None) => true,
        Ok(Some((lo, hi))) => t.rho_hxhy >= lo - tol && t.rho_hxhy <= hi + tol,
        Err(_) => false,
    }
}

/// Correlation between the residual vectors `x - xhat` and `y - yhat`.
pub fn residual_correlation(stats: &SummaryStats, t: &SensitivityTuple) -> Result<f64> {
    check_unit_interval(t.r2wx, t.r2wy)?;
    let spread = (1.0 - t.r2wx).sqrt() * (1.0 - t.r2wy).sqrt();
    Ok((stats.rho_xy - t.r_wx() * t.r_wy() * t.rho_hxhy) / spread)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(r: f64, s: f64) -> SummaryStats {
        SummaryStats::new(r, s).unwrap()
    }

    fn tuple(x: f64, y: f64, p: f64) -> SensitivityTuple {
        SensitivityTuple::new(x, y, p).unwrap()
    }

    #[test]
    fn beta_case_study_lower_witness() {
        let b = beta_adjusted(&stats(-0.11, 42.94), &tuple(0.5, 0.2, 1.0)).unwrap();
        assert!((b - (-36.60)).abs() < 0.01, "{b}");
    }

    #[test]
    fn beta_without_confounding_is_unadjusted_slope() {
        for rho in [-1.0, 0.0, 0.3, 1.0] {
            let b = beta_adjusted(&stats(0.5, 2.0), &tuple(0.0, 0.0, rho)).unwrap();
            assert_eq!(b, 1.0);
        }
    }

    #[test]
    fn beta_zero_numerator() {
        let b = beta_adjusted(&stats(0.3, 1.0), &tuple(0.36, 0.25, 1.0)).unwrap();
        assert!(b.abs() < 1e-15, "{b}");
    }

    #[test]
    fn beta_rejects_full_r2wx() {
        let t = SensitivityTuple {
            r2wx: 1.0,
            r2wy: 0.2,
            rho_hxhy: 0.0,
        };
        assert!(matches!(
            beta_adjusted(&stats(0.1, 1.0), &t),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn rho_range_examples() {
        let band = feasible_rho_range(&stats(0.0, 1.0), 0.5, 0.5).unwrap();
        assert!((band.lower + 1.0).abs() < 1e-15 && (band.upper - 1.0).abs() < 1e-15);

        let band = feasible_rho_range(&stats(0.5, 1.0), 0.0, 0.3).unwrap();
        assert_eq!((band.lower, band.upper), (-1.0, 1.0));

        let (lo, hi) = band_edges(&stats(-0.11, 1.0), 0.5, 0.2).unwrap().unwrap();
        // (-0.11 -/+ sqrt(0.5 * 0.8)) / sqrt(0.1)
        assert!((lo - (-2.347850542618522)).abs() < 1e-12, "{lo}");
        assert!((hi - 1.6521494573814783).abs() < 1e-12, "{hi}");
        let band = feasible_rho_range(&stats(-0.11, 1.0), 0.5, 0.2).unwrap();
        assert_eq!((band.lower, band.upper), (-1.0, 1.0));
    }

    #[test]
    fn rho_range_rejects_out_of_domain() {
        assert!(feasible_rho_range(&stats(0.0, 1.0), 1.0, 0.5).is_err());
        assert!(feasible_rho_range(&stats(0.0, 1.0), 0.5, -0.1).is_err());
    }

    #[test]
    fn feasibility_examples() {
        let s = stats(-0.11, 42.94);
        let spec = BoundSpec::with_default_rho((0.1, 0.5), (0.0, 0.2)).unwrap();
        assert!(is_feasible(&s, &spec, &tuple(0.5, 0.2, 1.0), 1e-12));
        assert!(!is_feasible(&s, &spec, &tuple(0.1 - 1e-6, 0.2, 1.0), 1e-12));

        let s = stats(0.9, 1.0);
        let wide = BoundSpec::new((0.0, 0.95), (0.0, 0.95), (-1.0, 1.0)).unwrap();
        // alpha_minus = (0.9 - 0.1) / 0.9
        assert!(!is_feasible(&s, &wide, &tuple(0.9, 0.9, -1.0), 1e-12));
        assert!(is_feasible(&s, &wide, &tuple(0.9, 0.9, 0.9), 1e-12));
    }

    #[test]
    fn residual_correlation_reduces_without_confounding() {
        let r = residual_correlation(&stats(0.5, 3.0), &tuple(0.0, 0.0, 0.7)).unwrap();
        assert_eq!(r, 0.5);
    }

    #[test]
    fn residual_correlation_is_unit_at_band_edges() {
        let s = stats(0.35, 1.0);
        let (lo, hi) = band_edges(&s, 0.6, 0.7).unwrap().unwrap();
        let at_lo = residual_correlation(
            &s,
            &SensitivityTuple {
                r2wx: 0.6,
                r2wy: 0.7,
                rho_hxhy: lo,
            },
        )
        .unwrap();
        let at_hi = residual_correlation(
            &s,
            &SensitivityTuple {
                r2wx: 0.6,
                r2wy: 0.7,
                rho_hxhy: hi,
            },
        )
        .unwrap();
        assert!((at_lo - 1.0).abs() < 1e-12, "{at_lo}");
        assert!((at_hi + 1.0).abs() < 1e-12, "{at_hi}");
    }

    #[test]
    fn bound_spec_validation_messages() {
        let err = BoundSpec::with_default_rho((0.6, 0.5), (0.0, 0.2)).unwrap_err();
        assert!(err.to_string().contains("lower bound exceeds upper"));
        assert!(BoundSpec::with_default_rho((0.0, 1.0), (0.0, 0.2)).is_err());
        assert!(BoundSpec::new((0.0, 0.5), (0.0, 0.2), (-1.5, 1.0)).is_err());
        assert!(SummaryStats::new(1.0, 1.0).is_err());
        assert!(SummaryStats::new(0.2, 0.0).is_err());
    }
}
