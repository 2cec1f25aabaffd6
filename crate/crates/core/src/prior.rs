//! Monte Carlo propagation of a prior on the sensitivity tuple through the
//! adjusted-slope formula.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    beta_adjusted, is_feasible, BoundSpec, SensitivityTuple, SummaryStats, DEFAULT_TOL,
};

/// Draws in the initial batch used to detect priors that essentially never
/// land in the feasible set.
pub const PROBE_DRAWS: usize = 10_000;

/// Minimum acceptance rate over the probe batch.
pub const MIN_ACCEPTANCE: f64 = 1e-4;

/// Marginal distribution of one tuple component over its bound range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Marginal {
    Uniform,
    /// Beta distribution mapped affinely onto `[lower, upper]`.
    Beta {
        alpha: f64,
        beta: f64,
    },
    PointMass {
        value: f64,
    },
}

impl Marginal {
    fn validate(&self, name: &str, lo: f64, hi: f64) -> Result<()> {
        match *self {
            Marginal::Uniform => Ok(()),
            Marginal::Beta { alpha, beta } => {
                if alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Domain(format!(
                        "{name}: beta parameters must be positive, got ({alpha}, {beta})"
                    )))
                }
            }
            Marginal::PointMass { value } => {
                if (lo..=hi).contains(&value) {
                    Ok(())
                } else {
                    Err(Error::Domain(format!(
                        "{name}: point mass {value} lies outside [{lo}, {hi}]"
                    )))
                }
            }
        }
    }

    fn sampler(&self, lo: f64, hi: f64) -> Sampler {
        match *self {
            Marginal::Uniform => Sampler::Uniform { lo, width: hi - lo },
            Marginal::Beta { alpha, beta } => Sampler::Beta {
                lo,
                width: hi - lo,
                dist: Beta::new(alpha, beta).expect("validated parameters"),
            },
            Marginal::PointMass { value } => Sampler::Point(value),
        }
    }
}

enum Sampler {
    Uniform {
        lo: f64,
        width: f64,
    },
    Beta {
        lo: f64,
        width: f64,
        dist: Beta<f64>,
    },
    Point(f64),
}

impl Sampler {
    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Uniform { lo, width } => lo + width * rng.random::<f64>(),
            Sampler::Beta { lo, width, dist } => lo + width * dist.sample(rng),
            Sampler::Point(v) => *v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub r2wx: Marginal,
    pub r2wy: Marginal,
    pub rho_hxhy: Marginal,
    pub sample_count: usize,
    pub seed: u64,
}

impl PriorSpec {
    pub fn uniform(sample_count: usize, seed: u64) -> Self {
        Self {
            r2wx: Marginal::Uniform,
            r2wy: Marginal::Uniform,
            rho_hxhy: Marginal::Uniform,
            sample_count,
            seed,
        }
    }

    pub fn validate(&self, spec: &BoundSpec) -> Result<()> {
        if self.sample_count == 0 {
            return Err(Error::Domain("sample count must be positive".into()));
        }
        self.r2wx.validate("r2x", spec.l_x2, spec.u_x2)?;
        self.r2wy.validate("r2y", spec.l_y2, spec.u_y2)?;
        self.rho_hxhy.validate("rho-hxhy", spec.l_rho, spec.u_rho)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub q025: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q975: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriorResult {
    pub samples: Vec<f64>,
    /// Accepted draws over total draws.
    pub acceptance_rate: f64,
    pub draws: usize,
    pub quantiles: Quantiles,
    pub min: f64,
    pub max: f64,
}

/// Linear interpolation between order statistics (Hyndman and Fan type 7).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 >= sorted.len() {
        sorted[sorted.len() - 1]
    } else {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    }
}

/// Rejection-samples feasible tuples from the prior and maps each through
/// the adjusted-slope formula. Deterministic for a fixed seed.
pub fn propagate_prior(
    stats: &SummaryStats,
    spec: &BoundSpec,
    prior: &PriorSpec,
) -> Result<PriorResult> {
    stats.validate()?;
    spec.validate()?;
    prior.validate(spec)?;

    let sx = prior.r2wx.sampler(spec.l_x2, spec.u_x2);
    let sy = prior.r2wy.sampler(spec.l_y2, spec.u_y2);
    let sr = prior.rho_hxhy.sampler(spec.l_rho, spec.u_rho);
    let mut rng = ChaCha8Rng::seed_from_u64(prior.seed);

    let max_draws = PROBE_DRAWS.max((prior.sample_count as f64 / MIN_ACCEPTANCE).ceil() as usize);
    let mut samples = Vec::with_capacity(prior.sample_count);
    let mut draws = 0usize;
    while samples.len() < prior.sample_count {
        if draws == PROBE_DRAWS || draws >= max_draws {
            let rate = samples.len() as f64 / draws as f64;
            if rate < MIN_ACCEPTANCE || draws >= max_draws {
                return Err(Error::PriorIncompatible { rate, draws });
            }
        }
        draws += 1;
        let t = SensitivityTuple {
            r2wx: sx.draw(&mut rng),
            r2wy: sy.draw(&mut rng),
            rho_hxhy: sr.draw(&mut rng),
        };
        if is_feasible(stats, spec, &t, DEFAULT_TOL) {
            samples.push(beta_adjusted(stats, &t)?);
        }
    }

    let mut sorted = samples.clone();
    sorted.sort_by(f64::total_cmp);
    let quantiles = Quantiles {
        q025: quantile(&sorted, 0.025),
        q25: quantile(&sorted, 0.25),
        q50: quantile(&sorted, 0.5),
        q75: quantile(&sorted, 0.75),
        q975: quantile(&sorted, 0.975),
    };
    Ok(PriorResult {
        acceptance_rate: samples.len() as f64 / draws as f64,
        draws,
        quantiles,
        min: sorted[0],
        max: sorted[sorted.len() - 1],
        samples,
    })
}
