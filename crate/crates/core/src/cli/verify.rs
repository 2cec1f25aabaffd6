use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::commands::{deliver, load_config, output_format, rounded_interval, Cell, Table};
use super::{CliError, Format, Outcome, VerifyArgs, EXIT_FAILURE, EXIT_OK};
use crate::data::summarize;
use crate::model::{is_feasible, BoundSpec, SummaryStats};
use crate::oracle::{
    check_slope_identity, grid_min_max, min_sample_size, synthesize_data, GridConfig,
};
use crate::sampling::{random_feasible_tuple, random_stats, random_valid_instance};
use crate::solver::solve_interval;

const CONTAINMENT_TOL: f64 = 1e-9;
const SLOPE_TOL: f64 = 1e-8;
const ROUND_TRIP_TOL: f64 = 1e-10;
const PUBLISHED_TOL: f64 = 0.01;
const MAX_R2: f64 = 0.95;

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn case_study_bounds() -> Result<Check, CliError> {
    let stats = SummaryStats::new(-0.11, 42.94)?;
    let published = [
        ((-1.0, 1.0), (-36.60, 17.71)),
        ((0.0, 1.0), (-36.60, -5.25)),
    ];
    let mut reproducing = Vec::new();
    let mut detail = Vec::new();
    for u_y2 in [0.2, 0.5] {
        let mut all = true;
        let mut got = Vec::new();
        for &(rho, (lo, hi)) in &published {
            let iv = solve_interval(&stats, &BoundSpec::new((0.1, 0.5), (0.0, u_y2), rho)?)?;
            let (a, b) = rounded_interval(&iv);
            all &= (a - lo).abs() <= PUBLISHED_TOL && (b - hi).abs() <= PUBLISHED_TOL;
            got.push(format!("[{a:.2}, {b:.2}]"));
        }
        if all {
            reproducing.push(u_y2);
        }
        detail.push(format!("u_y2={u_y2}: {}", got.join(" ")));
    }
    let which = if reproducing.is_empty() {
        "no bound set reproduces the published intervals".to_string()
    } else {
        format!("reproduced by u_y2={:?}", reproducing)
    };
    Ok(Check {
        name: "case-study",
        passed: reproducing.contains(&0.2),
        detail: format!("{which}; {}", detail.join("; ")),
    })
}

fn grid_equivalence<R: Rng>(
    rng: &mut R,
    cases: usize,
    resolution: usize,
) -> Result<Check, CliError> {
    let cfg = GridConfig::with_resolution(resolution);
    let mut worst_gap = 0.0f64;
    let mut failures = 0;
    for _ in 0..cases {
        let (stats, spec) = random_valid_instance(rng, MAX_R2);
        let exact = solve_interval(&stats, &spec)?;
        let grid = match grid_min_max(&stats, &spec, &cfg) {
            Ok(g) => g.interval,
            // A thin feasible sliver can fall between lattice nodes.
            Err(crate::Error::EmptyGrid) => continue,
            Err(e) => return Err(e.into()),
        };
        let excess = (exact.lower - grid.lower).max(grid.upper - exact.upper);
        worst_gap = worst_gap.max((grid.lower - exact.lower).max(exact.upper - grid.upper));
        if excess > CONTAINMENT_TOL {
            failures += 1;
        }
    }
    Ok(Check {
        name: "grid-equivalence",
        passed: failures == 0,
        detail: format!(
            "{cases} specs at resolution {resolution}: {failures} outside exact interval, max gap {worst_gap:.3e}"
        ),
    })
}

fn slope_identity<R: Rng>(rng: &mut R, cases: usize) -> Result<Check, CliError> {
    let mut worst = 0.0f64;
    for k in 0..cases {
        let p = [2, 3, 5][k % 3];
        let stats = random_stats(rng);
        let t = random_feasible_tuple(rng, &stats, MAX_R2);
        let rep = check_slope_identity(&stats, &t, min_sample_size(p), p, rng.random())?;
        worst = worst.max(rep.discrepancy);
    }
    Ok(Check {
        name: "slope-identity",
        passed: worst < SLOPE_TOL,
        detail: format!("{cases} tuples: max |ols - formula| = {worst:.3e}"),
    })
}

fn round_trip<R: Rng>(rng: &mut R, cases: usize) -> Result<Check, CliError> {
    let mut worst = 0.0f64;
    let mut band_violations = 0;
    let full = BoundSpec::new((0.0, 0.999_999), (0.0, 0.999_999), (-1.0, 1.0))?;
    for k in 0..cases {
        let p = [2, 3, 5][k % 3];
        let stats = random_stats(rng);
        let t = random_feasible_tuple(rng, &stats, MAX_R2);
        let d = synthesize_data(&stats, &t, min_sample_size(p), p, rng.random())?;
        let s = summarize(&d)?;
        let errs = [
            s.stats.rho_xy - stats.rho_xy,
            s.stats.sigma_ratio - stats.sigma_ratio,
            s.tuple.r2wx - t.r2wx,
            s.tuple.r2wy - t.r2wy,
            s.tuple.rho_hxhy - t.rho_hxhy,
        ];
        worst = errs.iter().fold(worst, |m, e| m.max(e.abs()));
        if !is_feasible(&s.stats, &full, &s.tuple, CONTAINMENT_TOL) {
            band_violations += 1;
        }
    }
    Ok(Check {
        name: "round-trip",
        passed: worst < ROUND_TRIP_TOL && band_violations == 0,
        detail: format!(
            "{cases} datasets: max parameter error {worst:.3e}, {band_violations} outside the band"
        ),
    })
}

pub fn run(a: &VerifyArgs) -> Result<Outcome, CliError> {
    let cfg = load_config(a.output.config.as_deref())?;
    let fmt = output_format(&a.output, &cfg)?;
    let seed = match a.seed {
        Some(s) => s,
        None => cfg.number("seed")?.unwrap_or(1),
    };
    let resolution = match a.resolution {
        Some(r) => r,
        None => cfg.number("resolution")?.unwrap_or(101),
    };
    if resolution < 2 {
        return Err(CliError::invalid(format!(
            "resolution: need at least 2, got {resolution}"
        )));
    }
    let cases = a.cases.unwrap_or(25);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let checks = [
        case_study_bounds()?,
        grid_equivalence(&mut rng, cases, resolution)?,
        slope_identity(&mut rng, cases * 8)?,
        round_trip(&mut rng, cases * 4)?,
    ];
    let ok = checks.iter().all(|c| c.passed);
    let status = |c: &Check| if c.passed { "PASS" } else { "FAIL" };

    let text = match fmt {
        Format::Table => checks
            .iter()
            .map(|c| format!("{} {:<17} {}\n", status(c), c.name, c.detail))
            .collect(),
        Format::Csv => {
            let mut t = Table::new(&["check", "status", "detail"]);
            for c in &checks {
                t.rows.push(vec![
                    Cell::Text(c.name.into()),
                    Cell::Text(status(c).into()),
                    Cell::Text(c.detail.clone()),
                ]);
            }
            t.csv()
        }
        Format::Json => {
            let list: Vec<Value> = checks
                .iter()
                .map(|c| json!({"check": c.name, "status": status(c), "detail": c.detail}))
                .collect();
            serde_json::to_string_pretty(&Value::Array(list)).expect("serializable report") + "\n"
        }
    };
    let mut out = deliver(text, &a.output, &cfg)?;
    out.code = if ok { EXIT_OK } else { EXIT_FAILURE };
    Ok(out)
}
