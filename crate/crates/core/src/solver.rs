//! Exact confounding intervals by candidate enumeration.
//!
//! The adjusted slope is optimized over the feasible set by listing every
//! point where a combination of active constraints admits a stationary
//! point (or a vertex), discarding the infeasible ones, and taking the
//! extremes of the slope over what remains.
//!
//! With `R_wx = sin a`, `R_wy = sin b` and the residual correlation pinned
//! at `s = +-1`, the band constraint reads
//! `b_rho * sin a * sin b + s * cos a * cos b = rho_xy` and the slope is
//! `s * ratio * cos b / cos a`. Stationary points of the slope along that
//! curve satisfy `A sin^2(a - b) = B sin^2(a + b)` and
//! `A cos(a - b) + B cos(a + b) = 2 rho_xy` with `A = b_rho + s`,
//! `B = s - b_rho`; eliminating `cos(a + b)` leaves a quadratic in
//! `cos(a - b)`. Those points form [`Family::BandEdgeStationary`].

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    beta_adjusted, is_feasible, BoundSpec, ConfoundingInterval, SensitivityTuple, SummaryStats,
    DEFAULT_TOL,
};

/// Leading coefficients at or below this are treated as zero.
pub const DEGENERATE_EPS: f64 = 1e-14;

/// Candidates closer than this in max-norm are merged.
pub const DEDUP_TOL: f64 = 1e-12;

/// Upper bound on the number of raw candidates generated for one spec.
pub const MAX_CANDIDATES: usize = 88;

/// Which active-constraint combination produced a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `R^2_wy` and `rho_hxhy` at bounds, `R_wx` a stationary point of the
    /// slope.
    ProfileX,
    /// `rho_hxhy` at a bound and equal coefficients of determination on the
    /// band edge with residual correlation -1.
    EqualStrengthLower,
    /// As above with residual correlation +1.
    EqualStrengthUpper,
    /// `rho_hxhy` at a bound, band edge active, slope stationary along the
    /// edge curve.
    BandEdgeStationary,
    /// All three box constraints active.
    Corner,
    /// Both `R^2` at bounds with `rho_hxhy` on a band edge.
    CornerBandEdge,
    /// `R^2_wx` and `rho_hxhy` at bounds, `R^2_wy` solved from the band edge.
    BandEdgeY,
    /// `R^2_wy` and `rho_hxhy` at bounds, `R^2_wx` solved from the band edge.
    BandEdgeX,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::ProfileX => "profile_x",
            Family::EqualStrengthLower => "equal_strength_lower",
            Family::EqualStrengthUpper => "equal_strength_upper",
            Family::BandEdgeStationary => "band_edge_stationary",
            Family::Corner => "corner",
            Family::CornerBandEdge => "corner_band_edge",
            Family::BandEdgeY => "band_edge_y",
            Family::BandEdgeX => "band_edge_x",
        }
    }
}

/// Root or sign branch within a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Single,
    Plus,
    Minus,
    /// Branch of [`Family::BandEdgeStationary`]: residual correlation sign,
    /// quadratic root, and whether `R_wx >= R_wy`.
    Edge {
        residual_positive: bool,
        root_plus: bool,
        x_dominant: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Candidate {
    pub tuple: SensitivityTuple,
    pub family: Family,
    pub branch: Branch,
}

/// Feasible, deduplicated candidates plus counters for diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateSet {
    pub candidates: Vec<Candidate>,
    /// Candidates materialized before any filtering.
    pub generated: usize,
    /// Candidates that passed the feasibility filter, before merging.
    pub feasible: usize,
}

/// Real roots of `a x^2 + b x + c = 0`, falling back to the linear
/// equation when `|a|` is negligible.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a.abs() <= DEGENERATE_EPS {
        if b.abs() > DEGENERATE_EPS {
            return vec![-c / b];
        }
        return Vec::new();
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 || !disc.is_finite() {
        return Vec::new();
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        // b = 0 and disc = 0, hence c = 0.
        return vec![0.0, 0.0];
    }
    let (r1, r2) = (q / a, c / q);
    if r1 >= r2 {
        vec![r1, r2]
    } else {
        vec![r2, r1]
    }
}

/// Squares of the real roots of `a x^2 + b x + c = 0`, with coincident
/// squares reported once.
pub fn q_pm_squared(a: f64, b: f64, c: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(2);
    for r in quadratic_roots(a, b, c) {
        let sq = r * r;
        if !out.iter().any(|s| (s - sq).abs() <= 1e-15 * s.max(1.0)) {
            out.push(sq);
        }
    }
    out
}

fn distinct(a: f64, b: f64) -> Vec<f64> {
    if a == b {
        vec![a]
    } else {
        vec![a, b]
    }
}

fn plus_minus(i: usize) -> Branch {
    if i == 0 {
        Branch::Plus
    } else {
        Branch::Minus
    }
}

struct Generator {
    raw: Vec<Candidate>,
}

impl Generator {
    fn push(&mut self, r2wx: f64, r2wy: f64, rho_hxhy: f64, family: Family, branch: Branch) {
        self.raw.push(Candidate {
            tuple: SensitivityTuple {
                r2wx,
                r2wy,
                rho_hxhy,
            },
            family,
            branch,
        });
    }
}

/// Stationary points of the slope along the band edge at a fixed bound of
/// `rho_hxhy`, as `(R^2_wx, R^2_wy)` pairs with their branch tags.
fn band_edge_stationary(rho_xy: f64, b_rho: f64) -> Vec<(f64, f64, Branch)> {
    let mut out = Vec::new();
    for s in [1.0, -1.0] {
        let a_coef = b_rho + s;
        let b_coef = s - b_rho;
        if b_coef.abs() <= DEGENERATE_EPS {
            continue;
        }
        let roots = quadratic_roots(
            a_coef * a_coef - a_coef * b_coef,
            -4.0 * rho_xy * a_coef,
            a_coef * b_coef - b_coef * b_coef + 4.0 * rho_xy * rho_xy,
        );
        for (i, cos_diff) in roots.into_iter().enumerate() {
            let cos_sum = (2.0 * rho_xy - a_coef * cos_diff) / b_coef;
            let (Some(cos_diff), Some(cos_sum)) = (unit_cosine(cos_diff), unit_cosine(cos_sum))
            else {
                continue;
            };
            let sum = cos_sum.acos();
            let diff = cos_diff.acos();
            for (x_dominant, d) in [(true, diff), (false, -diff)] {
                if !x_dominant && diff == 0.0 {
                    break;
                }
                let a = 0.5 * (sum + d);
                let b = 0.5 * (sum - d);
                if (0.0..FRAC_PI_2).contains(&a) && (0.0..FRAC_PI_2).contains(&b) {
                    let (sa, sb) = (a.sin(), b.sin());
                    out.push((
                        sa * sa,
                        sb * sb,
                        Branch::Edge {
                            residual_positive: s > 0.0,
                            root_plus: i == 0,
                            x_dominant,
                        },
                    ));
                }
            }
        }
    }
    out
}

fn unit_cosine(v: f64) -> Option<f64> {
    if !v.is_finite() || v.abs() > 1.0 + 1e-12 {
        None
    } else {
        Some(v.clamp(-1.0, 1.0))
    }
}

fn generate(stats: &SummaryStats, spec: &BoundSpec) -> Vec<Candidate> {
    let rho = stats.rho_xy;
    let xs = distinct(spec.l_x2, spec.u_x2);
    let ys = distinct(spec.l_y2, spec.u_y2);
    let rhos = distinct(spec.l_rho, spec.u_rho);
    let mut g = Generator {
        raw: Vec::with_capacity(64),
    };

    for &by2 in &ys {
        for &b_rho in &rhos {
            let k = by2.sqrt() * b_rho;
            // A vanishing leading coefficient makes the slope monotone in
            // R_wx; the box corners already cover that case.
            if k.abs() <= DEGENERATE_EPS {
                continue;
            }
            for (i, r) in quadratic_roots(-k, 2.0 * rho, -k).into_iter().enumerate() {
                g.push(r * r, by2, b_rho, Family::ProfileX, plus_minus(i));
            }
        }
    }

    for &b_rho in &rhos {
        if (b_rho + 1.0).abs() > DEGENERATE_EPS {
            let v = (rho + 1.0) / (b_rho + 1.0);
            g.push(v, v, b_rho, Family::EqualStrengthLower, Branch::Single);
        }
        if (b_rho - 1.0).abs() > DEGENERATE_EPS {
            let v = (rho - 1.0) / (b_rho - 1.0);
            g.push(v, v, b_rho, Family::EqualStrengthUpper, Branch::Single);
        }
        for (x2, y2, branch) in band_edge_stationary(rho, b_rho) {
            g.push(x2, y2, b_rho, Family::BandEdgeStationary, branch);
        }
    }

    for &bx2 in &xs {
        for &by2 in &ys {
            for &b_rho in &rhos {
                g.push(bx2, by2, b_rho, Family::Corner, Branch::Single);
            }
        }
    }

    for &bx2 in &xs {
        for &by2 in &ys {
            let prod = bx2.sqrt() * by2.sqrt();
            if prod <= DEGENERATE_EPS {
                continue;
            }
            let spread = (1.0 - bx2).sqrt() * (1.0 - by2).sqrt();
            g.push(
                bx2,
                by2,
                (rho + spread) / prod,
                Family::CornerBandEdge,
                Branch::Plus,
            );
            g.push(
                bx2,
                by2,
                (rho - spread) / prod,
                Family::CornerBandEdge,
                Branch::Minus,
            );
        }
    }

    // With one R^2 and rho_hxhy fixed, the band edge squared is a quadratic
    // in the other R.
    let edge_quadratic = |b2: f64, b_rho: f64| {
        let b = b2.sqrt();
        quadratic_roots(
            b2 * b_rho * b_rho + 1.0 - b2,
            -2.0 * b * b_rho * rho,
            b2 - 1.0 + rho * rho,
        )
    };
    for &bx2 in &xs {
        for &b_rho in &rhos {
            for (i, r) in edge_quadratic(bx2, b_rho).into_iter().enumerate() {
                g.push(bx2, r * r, b_rho, Family::BandEdgeY, plus_minus(i));
            }
        }
    }
    for &by2 in &ys {
        for &b_rho in &rhos {
            for (i, r) in edge_quadratic(by2, b_rho).into_iter().enumerate() {
                g.push(r * r, by2, b_rho, Family::BandEdgeX, plus_minus(i));
            }
        }
    }

    g.raw
}

fn in_domain(t: &SensitivityTuple) -> bool {
    t.r2wx.is_finite()
        && t.r2wy.is_finite()
        && t.rho_hxhy.is_finite()
        && (0.0..1.0).contains(&t.r2wx)
        && (0.0..1.0).contains(&t.r2wy)
        && (-1.0..=1.0).contains(&t.rho_hxhy)
}

fn clamp_to_box(t: SensitivityTuple, spec: &BoundSpec) -> SensitivityTuple {
    SensitivityTuple {
        r2wx: t.r2wx.clamp(spec.l_x2, spec.u_x2),
        r2wy: t.r2wy.clamp(spec.l_y2, spec.u_y2),
        rho_hxhy: t.rho_hxhy.clamp(spec.l_rho, spec.u_rho),
    }
}

/// Coarse lattice probe for any feasible point, used to tell an empty
/// feasible set apart from a gap in the candidate families.
fn probe_feasible(stats: &SummaryStats, spec: &BoundSpec, steps: usize) -> bool {
    let axis = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (steps - 1) as f64;
    for i in 0..steps {
        for j in 0..steps {
            for k in 0..steps {
                let t = SensitivityTuple {
                    r2wx: axis(spec.l_x2, spec.u_x2, i),
                    r2wy: axis(spec.l_y2, spec.u_y2, j),
                    rho_hxhy: axis(spec.l_rho, spec.u_rho, k),
                };
                if is_feasible(stats, spec, &t, DEFAULT_TOL) {
                    return true;
                }
            }
        }
    }
    false
}

pub fn enumerate_candidates(stats: &SummaryStats, spec: &BoundSpec) -> Result<CandidateSet> {
    stats.validate()?;
    spec.validate()?;
    let raw = generate(stats, spec);
    let generated = raw.len();
    debug_assert!(generated <= MAX_CANDIDATES);

    let mut feasible = 0;
    let mut candidates: Vec<Candidate> = Vec::with_capacity(raw.len());
    for c in raw {
        if !in_domain(&c.tuple) || !is_feasible(stats, spec, &c.tuple, DEFAULT_TOL) {
            continue;
        }
        feasible += 1;
        let tuple = clamp_to_box(c.tuple, spec);
        if candidates
            .iter()
            .any(|k| k.tuple.distance(&tuple) < DEDUP_TOL)
        {
            continue;
        }
        candidates.push(Candidate { tuple, ..c });
    }

    if candidates.is_empty() {
        if probe_feasible(stats, spec, 11) {
            return Err(Error::CandidateSetExhausted);
        }
        return Err(Error::EmptyFeasibleSet(
            "no tuple in the box satisfies the realizability band".into(),
        ));
    }
    Ok(CandidateSet {
        candidates,
        generated,
        feasible,
    })
}

/// Interval together with the candidate set it was computed from.
pub fn solve_with_candidates(
    stats: &SummaryStats,
    spec: &BoundSpec,
) -> Result<(ConfoundingInterval, CandidateSet)> {
    let set = enumerate_candidates(stats, spec)?;
    let mut best: Option<ConfoundingInterval> = None;
    for c in &set.candidates {
        let beta = beta_adjusted(stats, &c.tuple)?;
        best = Some(match best {
            None => ConfoundingInterval {
                lower: beta,
                upper: beta,
                argmin_tuple: c.tuple,
                argmax_tuple: c.tuple,
            },
            Some(mut iv) => {
                if beta < iv.lower {
                    iv.lower = beta;
                    iv.argmin_tuple = c.tuple;
                }
                if beta > iv.upper {
                    iv.upper = beta;
                    iv.argmax_tuple = c.tuple;
                }
                iv
            }
        });
    }
    // enumerate_candidates never returns an empty set.
    Ok((best.expect("nonempty candidate set"), set))
}

pub fn solve_interval(stats: &SummaryStats, spec: &BoundSpec) -> Result<ConfoundingInterval> {
    solve_with_candidates(stats, spec).map(|(iv, _)| iv)
}
