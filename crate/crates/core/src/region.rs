//! Realizable tuples that would push the adjusted slope outside a declared
//! range of practically significant values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{band_edges, BoundSpec, SensitivityTuple, SummaryStats};
use crate::oracle::{axis, GridConfig};

/// Default lattice resolution for region sweeps.
pub const DEFAULT_REGION_RESOLUTION: usize = 101;

/// Closed range of slope values; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignificanceRange {
    pub lower: f64,
    pub upper: f64,
}

impl SignificanceRange {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(Error::InvalidBounds(format!(
                "significance range: lower bound exceeds upper ({lower} > {upper})"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn contains(&self, beta: f64) -> bool {
        beta >= self.lower && beta <= self.upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionPoint {
    pub tuple: SensitivityTuple,
    pub beta: f64,
}

/// Every feasible lattice node whose adjusted slope falls outside `sig`.
/// An empty result means no realizable tuple in the box explains the
/// association away.
pub fn necessary_region(
    stats: &SummaryStats,
    spec: &BoundSpec,
    sig: &SignificanceRange,
    cfg: &GridConfig,
) -> Result<Vec<RegionPoint>> {
    stats.validate()?;
    spec.validate()?;
    cfg.validate()?;
    let n = cfg.resolution;
    let xs = axis(spec.l_x2, spec.u_x2, n);
    let ys = axis(spec.l_y2, spec.u_y2, n);
    let ps = axis(spec.l_rho, spec.u_rho, n);
    let mut cloud = Vec::new();
    for &x2 in &xs {
        let rx = x2.sqrt();
        for &y2 in &ys {
            let rr = rx * y2.sqrt();
            let band = band_edges(stats, x2, y2)?;
            for &p in &ps {
                if let Some((lo, hi)) = band {
                    if p < lo - cfg.tol || p > hi + cfg.tol {
                        continue;
                    }
                }
                let beta = stats.sigma_ratio * (stats.rho_xy - rr * p) / (1.0 - x2);
                if !sig.contains(beta) {
                    cloud.push(RegionPoint {
                        tuple: SensitivityTuple {
                            r2wx: x2,
                            r2wy: y2,
                            rho_hxhy: p,
                        },
                        beta,
                    });
                }
            }
        }
    }
    Ok(cloud)
}
