//! Confounding intervals for a regression slope under unmeasured
//! confounding.
//!
//! Given the observed correlation of `x` and `y`, their standard-deviation
//! ratio, and bounds on three sensitivity parameters (the coefficients of
//! determination of the confounders for `x` and for `y`, and the
//! correlation between the two fitted-value vectors), [`solver`] computes
//! the exact range of slopes the fully adjusted regression could produce.
//! [`oracle`] carries independent checks of that computation and
//! [`region`] answers the inverse question.

pub mod cli;
pub mod data;
pub mod error;
mod lsq;
pub mod model;
pub mod oracle;
pub mod prior;
pub mod region;
pub mod sampling;
pub mod solver;

pub use data::{summarize, DataSummary, Dataset};
pub use error::{Error, Result};
pub use model::{
    band_edges, beta_adjusted, feasible_rho_range, is_feasible, residual_correlation, BoundSpec,
    ConfoundingInterval, RhoBand, SensitivityTuple, SummaryStats, DEFAULT_TOL,
};
pub use oracle::{check_slope_identity, grid_min_max, ols_beta, synthesize_data, GridConfig};
pub use prior::{propagate_prior, Marginal, PriorSpec};
pub use region::{necessary_region, SignificanceRange};
pub use solver::{enumerate_candidates, q_pm_squared, solve_interval, Candidate, Family};
