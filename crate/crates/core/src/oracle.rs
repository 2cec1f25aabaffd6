//! Independent checks for the exact solver: a brute-force lattice search
//! over the feasible set, a constructive data generator that realizes any
//! feasible tuple, and a least-squares fit of the full model.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::lsq::{with_intercept, ThinQr};
use crate::model::{
    band_edges, beta_adjusted, residual_correlation, BoundSpec, ConfoundingInterval,
    SensitivityTuple, SummaryStats, DEFAULT_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConfig {
    /// Nodes per axis, endpoints included.
    pub resolution: usize,
    pub tol: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            resolution: 201,
            tol: DEFAULT_TOL,
        }
    }
}

impl GridConfig {
    pub fn with_resolution(resolution: usize) -> Self {
        Self {
            resolution,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 2 {
            return Err(Error::Domain(format!(
                "grid resolution must be at least 2, got {}",
                self.resolution
            )));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(Error::Domain("grid tolerance must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Lattice coordinates along one axis; the last node is exactly `hi`.
pub(crate) fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|k| if k + 1 == n { hi } else { lo + step * k as f64 })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridResult {
    pub interval: ConfoundingInterval,
    pub feasible_count: usize,
}

/// Visits every lattice node of the box, keeps the feasible ones and
/// returns the extreme adjusted slopes among them.
pub fn grid_min_max(
    stats: &SummaryStats,
    spec: &BoundSpec,
    cfg: &GridConfig,
) -> Result<GridResult> {
    stats.validate()?;
    spec.validate()?;
    cfg.validate()?;
    let n = cfg.resolution;
    let xs = axis(spec.l_x2, spec.u_x2, n);
    let ys = axis(spec.l_y2, spec.u_y2, n);
    let ps = axis(spec.l_rho, spec.u_rho, n);

    let mut count = 0usize;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut arg_lo, mut arg_hi) = ((0, 0, 0), (0, 0, 0));
    for (i, &x2) in xs.iter().enumerate() {
        let rx = x2.sqrt();
        let denom = 1.0 - x2;
        for (j, &y2) in ys.iter().enumerate() {
            let rr = rx * y2.sqrt();
            let (band_lo, band_hi) = match band_edges(stats, x2, y2)? {
                None => (f64::NEG_INFINITY, f64::INFINITY),
                Some((a, b)) => (a - cfg.tol, b + cfg.tol),
            };
            for (k, &p) in ps.iter().enumerate() {
                if p < band_lo || p > band_hi {
                    continue;
                }
                count += 1;
                let beta = stats.sigma_ratio * (stats.rho_xy - rr * p) / denom;
                if beta < lo {
                    lo = beta;
                    arg_lo = (i, j, k);
                }
                if beta > hi {
                    hi = beta;
                    arg_hi = (i, j, k);
                }
            }
        }
    }
    if count == 0 {
        return Err(Error::EmptyGrid);
    }
    let node = |(i, j, k): (usize, usize, usize)| SensitivityTuple {
        r2wx: xs[i],
        r2wy: ys[j],
        rho_hxhy: ps[k],
    };
    Ok(GridResult {
        interval: ConfoundingInterval {
            lower: lo,
            upper: hi,
            argmin_tuple: node(arg_lo),
            argmax_tuple: node(arg_hi),
        },
        feasible_count: count,
    })
}

/// Smallest admissible sample size for `p` confounders.
pub fn min_sample_size(p: usize) -> usize {
    p + 3
}

fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Builds a dataset with `n` rows and `p` confounder columns whose summary
/// statistics are exactly `stats` and `t` (up to rounding).
///
/// The centered fitted values live in a random `p`-dimensional subspace
/// orthogonal to the ones vector and the residuals in two further
/// orthonormal directions, so every inner product is set directly.
pub fn synthesize_data(
    stats: &SummaryStats,
    t: &SensitivityTuple,
    n: usize,
    p: usize,
    seed: u64,
) -> Result<Dataset> {
    stats.validate()?;
    t.validate()?;
    if n <= p + 2 {
        return Err(Error::Domain(format!(
            "need n > p + 2 observations, got n = {n}, p = {p}"
        )));
    }
    let mut rc = residual_correlation(stats, t)?;
    if rc.abs() > 1.0 + 1e-12 {
        return Err(Error::NotRealizable(format!(
            "residual correlation {rc} lies outside [-1, 1]"
        )));
    }
    rc = rc.clamp(-1.0, 1.0);
    let (rx, ry) = (t.r_wx(), t.r_wy());
    let confounded = rx * ry > 0.0;
    if p == 0 && (t.r2wx > 0.0 || t.r2wy > 0.0) {
        return Err(Error::NotRealizable(
            "without confounder columns both R^2 must be 0".into(),
        ));
    }
    if p == 1 && confounded && t.rho_hxhy.abs() < 1.0 - 1e-12 {
        return Err(Error::NotRealizable(
            "a single confounder forces rho_hxhy = +-1 when both R^2 are positive".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut frame = gaussian_matrix(&mut rng, n, p + 3);
    frame.column_mut(0).fill(1.0);
    let q = frame.qr().q();
    let col = |j: usize| -> DVector<f64> { q.column(j).into_owned() };

    let sigma_x: f64 = rng.random_range(0.5..2.0);
    let sigma_y = stats.sigma_ratio * sigma_x;
    let mean_x: f64 = rng.random_range(-5.0..5.0);
    let mean_y: f64 = rng.random_range(-5.0..5.0);
    let root_n = (n as f64).sqrt();

    let zero = DVector::zeros(n);
    let (fit_x, fit_y) = if p == 0 {
        (zero.clone(), zero.clone())
    } else {
        let u1 = col(1);
        let dir_y = if p == 1 {
            let sign = if t.rho_hxhy < 0.0 && confounded {
                -1.0
            } else {
                1.0
            };
            &u1 * sign
        } else {
            let rho = t.rho_hxhy.clamp(-1.0, 1.0);
            &u1 * rho + col(2) * (1.0 - rho * rho).sqrt()
        };
        (
            &u1 * (rx * sigma_x * root_n),
            dir_y * (ry * sigma_y * root_n),
        )
    };
    let v1 = col(p + 1);
    let v2 = col(p + 2);
    let res_x = &v1 * ((1.0 - t.r2wx).sqrt() * sigma_x * root_n);
    let res_y =
        (&v1 * rc + &v2 * (1.0 - rc * rc).sqrt()) * ((1.0 - t.r2wy).sqrt() * sigma_y * root_n);

    let x: Vec<f64> = (fit_x + res_x).iter().map(|v| v + mean_x).collect();
    let y: Vec<f64> = (fit_y + res_y).iter().map(|v| v + mean_y).collect();

    // Any well-conditioned basis of span(ones, u_1..u_p) works for W: mix
    // the directions with a random rotation and scaling, then shift.
    let mut w = Vec::with_capacity(p);
    if p > 0 {
        let rotation = gaussian_matrix(&mut rng, p, p).qr().q();
        let basis = q.columns(1, p);
        for j in 0..p {
            let scale: f64 = rng.random_range(0.5..2.0);
            let offset: f64 = rng.random_range(-3.0..3.0);
            let column = basis * rotation.column(j) * scale;
            w.push(column.iter().map(|v| v + offset).collect());
        }
    }
    Dataset::new(x, y, w)
}

/// Coefficient on `x` in the least-squares fit of `y` on `[1 | x | W]`.
pub fn ols_beta(d: &Dataset) -> Result<f64> {
    let mut cols: Vec<&[f64]> = Vec::with_capacity(d.p() + 1);
    cols.push(&d.x);
    cols.extend(d.w.iter().map(Vec::as_slice));
    let qr = ThinQr::new(with_intercept(d.n(), &cols))?;
    let coef = qr.solve(&DVector::from_column_slice(&d.y));
    Ok(coef[1])
}

/// Correlation of the residuals of `x` and `y` after projecting onto
/// `[1 | W]`, computed from the raw vectors.
pub fn raw_residual_correlation(d: &Dataset) -> Result<f64> {
    let cols: Vec<&[f64]> = d.w.iter().map(Vec::as_slice).collect();
    let qr = ThinQr::new(with_intercept(d.n(), &cols))?;
    let x = DVector::from_column_slice(&d.x);
    let y = DVector::from_column_slice(&d.y);
    let ex = &x - qr.project(&x);
    let ey = &y - qr.project(&y);
    Ok(ex.dot(&ey) / (ex.norm() * ey.norm()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeCheck {
    pub ols: f64,
    pub formula: f64,
    pub discrepancy: f64,
}

/// Synthesizes data for `t` and compares the fitted slope against the
/// closed-form value.
pub fn check_slope_identity(
    stats: &SummaryStats,
    t: &SensitivityTuple,
    n: usize,
    p: usize,
    seed: u64,
) -> Result<SlopeCheck> {
    let d = synthesize_data(stats, t, n, p, seed)?;
    let ols = ols_beta(&d)?;
    let formula = beta_adjusted(stats, t)?;
    Ok(SlopeCheck {
        ols,
        formula,
        discrepancy: (ols - formula).abs(),
    })
}
