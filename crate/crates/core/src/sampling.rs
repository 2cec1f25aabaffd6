//! Random problem instances for property checks and the `verify` command.

use rand::Rng;

use crate::model::{feasible_rho_range, BoundSpec, SensitivityTuple, SummaryStats};
use crate::solver::solve_interval;

/// `rho_xy` uniform in `(-0.95, 0.95)`, sigma ratio log-uniform in
/// `[0.1, 10]`.
pub fn random_stats<R: Rng>(rng: &mut R) -> SummaryStats {
    SummaryStats {
        rho_xy: rng.random_range(-0.95..0.95),
        sigma_ratio: 10f64.powf(rng.random_range(-1.0..1.0)),
    }
}

/// A tuple with both `R^2` uniform in `[0, max_r2)` and `rho_hxhy`
/// uniform over its realizable range. `R^2` pairs with an empty band are
/// redrawn.
pub fn random_feasible_tuple<R: Rng>(
    rng: &mut R,
    stats: &SummaryStats,
    max_r2: f64,
) -> SensitivityTuple {
    loop {
        let r2wx = rng.random_range(0.0..max_r2);
        let r2wy = rng.random_range(0.0..max_r2);
        let band = feasible_rho_range(stats, r2wx, r2wy).expect("R^2 drawn inside [0, 1)");
        if band.lower > band.upper {
            continue;
        }
        let rho_hxhy = if band.upper > band.lower {
            rng.random_range(band.lower..band.upper)
        } else {
            band.lower
        };
        return SensitivityTuple {
            r2wx,
            r2wy,
            rho_hxhy,
        };
    }
}

fn sorted_pair<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> (f64, f64) {
    let a = rng.random_range(lo..hi);
    let b = rng.random_range(lo..hi);
    (a.min(b), a.max(b))
}

/// A box with `R^2` bounds inside `[0, max_r2]` and `rho` bounds inside
/// `[-1, 1]`. The feasible set may be empty.
pub fn random_spec<R: Rng>(rng: &mut R, max_r2: f64) -> BoundSpec {
    let (l_x2, u_x2) = sorted_pair(rng, 0.0, max_r2);
    let (l_y2, u_y2) = sorted_pair(rng, 0.0, max_r2);
    let (l_rho, u_rho) = sorted_pair(rng, -1.0, 1.0);
    BoundSpec {
        l_x2,
        u_x2,
        l_y2,
        u_y2,
        l_rho,
        u_rho,
    }
}

/// Redraws until the solver accepts the pair, i.e. the feasible set is
/// nonempty.
pub fn random_valid_instance<R: Rng>(rng: &mut R, max_r2: f64) -> (SummaryStats, BoundSpec) {
    loop {
        let stats = random_stats(rng);
        let spec = random_spec(rng, max_r2);
        if solve_interval(&stats, &spec).is_ok() {
            return (stats, spec);
        }
    }
}
