//! Raw observations and the summary statistics derived from them.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lsq::{with_intercept, ThinQr};
use crate::model::{SensitivityTuple, SummaryStats};

/// Fitted-value vectors whose explained fraction of variance falls below
/// this are treated as constant.
const DEGENERATE_R2: f64 = 1e-24;

/// Columns `x`, `y` and confounders `w_1..w_p`, one value per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Confounder columns, each of length `n`.
    pub w: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new(x: Vec<f64>, y: Vec<f64>, w: Vec<Vec<f64>>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Domain(format!(
                "x has {} values but y has {}",
                x.len(),
                y.len()
            )));
        }
        if let Some((j, col)) = w.iter().enumerate().find(|(_, c)| c.len() != x.len()) {
            return Err(Error::Domain(format!(
                "confounder column {} has {} values, expected {}",
                j + 1,
                col.len(),
                x.len()
            )));
        }
        if x.len() < 2 {
            return Err(Error::Domain("need at least two observations".into()));
        }
        Ok(Self { x, y, w })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn p(&self) -> usize {
        self.w.len()
    }
}

/// Everything `summarize` extracts from a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DataSummary {
    pub stats: SummaryStats,
    /// May carry `R^2` values at (or numerically near) 1 for perfect fits;
    /// callers decide whether that is acceptable.
    pub tuple: SensitivityTuple,
    /// Population standard deviations (divisor `n`).
    pub sigma_x: f64,
    pub sigma_y: f64,
    /// Set when at least one fitted-value vector is constant, in which case
    /// the matching `R^2` and `rho_hxhy` are reported as 0.
    pub degenerate_fit: bool,
}

fn centered(v: &[f64]) -> DVector<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    DVector::from_iterator(v.len(), v.iter().map(|a| a - mean))
}

fn is_constant(centered: &DVector<f64>, raw: &[f64]) -> bool {
    let scale = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    centered.norm() <= 64.0 * f64::EPSILON * scale
}

pub fn summarize(d: &Dataset) -> Result<DataSummary> {
    let n = d.n();
    let xc = centered(&d.x);
    let yc = centered(&d.y);
    if is_constant(&xc, &d.x) {
        return Err(Error::DegenerateVariance("x is constant".into()));
    }
    if is_constant(&yc, &d.y) {
        return Err(Error::DegenerateVariance("y is constant".into()));
    }
    let (nx, ny) = (xc.norm(), yc.norm());
    let stats = SummaryStats {
        rho_xy: (xc.dot(&yc) / (nx * ny)).clamp(-1.0, 1.0),
        sigma_ratio: ny / nx,
    };
    let sigma_x = nx / (n as f64).sqrt();
    let sigma_y = ny / (n as f64).sqrt();

    if d.p() == 0 {
        return Ok(DataSummary {
            stats,
            tuple: SensitivityTuple {
                r2wx: 0.0,
                r2wy: 0.0,
                rho_hxhy: 0.0,
            },
            sigma_x,
            sigma_y,
            degenerate_fit: true,
        });
    }

    let cols: Vec<&[f64]> = d.w.iter().map(Vec::as_slice).collect();
    let qr = ThinQr::new(with_intercept(n, &cols))?;
    // The span contains the ones vector, so projecting the centered vector
    // gives the centered fitted values directly.
    let xh = qr.project(&xc);
    let yh = qr.project(&yc);
    let mut r2wx = xh.norm_squared() / (nx * nx);
    let mut r2wy = yh.norm_squared() / (ny * ny);
    let mut degenerate = false;
    if r2wx <= DEGENERATE_R2 {
        r2wx = 0.0;
        degenerate = true;
    }
    if r2wy <= DEGENERATE_R2 {
        r2wy = 0.0;
        degenerate = true;
    }
    let rho_hxhy = if degenerate {
        0.0
    } else {
        (xh.dot(&yh) / (xh.norm() * yh.norm())).clamp(-1.0, 1.0)
    };
    Ok(DataSummary {
        stats,
        tuple: SensitivityTuple {
            r2wx,
            r2wy,
            rho_hxhy,
        },
        sigma_x,
        sigma_y,
        degenerate_fit: degenerate,
    })
}
