use confounding_interval::data::summarize;
use confounding_interval::model::{
    band_edges, beta_adjusted, is_feasible, residual_correlation, BoundSpec, SensitivityTuple,
    SummaryStats, DEFAULT_TOL,
};
use confounding_interval::oracle::{
    grid_min_max, ols_beta, raw_residual_correlation, synthesize_data, GridConfig,
};
use confounding_interval::solver::{enumerate_candidates, solve_interval, MAX_CANDIDATES};
use confounding_interval::Error;
use proptest::prelude::*;

fn stats() -> impl Strategy<Value = SummaryStats> {
    (-0.95..0.95f64, -1.0..1.0f64).prop_map(|(r, e)| SummaryStats {
        rho_xy: r,
        sigma_ratio: 10f64.powf(e),
    })
}

fn ordered(lo: f64, hi: f64) -> impl Strategy<Value = (f64, f64)> {
    (lo..hi, lo..hi).prop_map(|(a, b)| (a.min(b), a.max(b)))
}

fn spec() -> impl Strategy<Value = BoundSpec> {
    (ordered(0.0, 0.95), ordered(0.0, 0.95), ordered(-1.0, 1.0)).prop_map(|(x, y, r)| BoundSpec {
        l_x2: x.0,
        u_x2: x.1,
        l_y2: y.0,
        u_y2: y.1,
        l_rho: r.0,
        u_rho: r.1,
    })
}

/// A realizable tuple, with `rho_hxhy` placed at fraction `f` of the band.
fn feasible_tuple() -> impl Strategy<Value = (SummaryStats, SensitivityTuple)> {
    (stats(), 0.0..0.95f64, 0.0..0.95f64, 0.0..=1.0f64).prop_filter_map(
        "empty band",
        |(s, x, y, f)| {
            let (lo, hi) = band_edges(&s, x, y).unwrap().unwrap_or((-1.0, 1.0));
            let (lo, hi) = (lo.max(-1.0), hi.min(1.0));
            let t = SensitivityTuple {
                r2wx: x,
                r2wy: y,
                rho_hxhy: lo + f * (hi - lo),
            };
            (lo <= hi).then_some((s, t))
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn interval_brackets_every_feasible_tuple((s, t) in feasible_tuple(), pad in 0.0..0.2f64) {
        let spec = BoundSpec {
            l_x2: (t.r2wx - pad).max(0.0),
            u_x2: (t.r2wx + pad).min(0.95),
            l_y2: (t.r2wy - pad).max(0.0),
            u_y2: (t.r2wy + pad).min(0.95),
            l_rho: (t.rho_hxhy - pad).max(-1.0),
            u_rho: (t.rho_hxhy + pad).min(1.0),
        };
        let iv = solve_interval(&s, &spec).unwrap();
        let b = beta_adjusted(&s, &t).unwrap();
        let tol = 1e-9 * (1.0 + b.abs());
        prop_assert!(iv.lower <= b + tol && b <= iv.upper + tol);
    }

    #[test]
    fn witnesses_are_feasible_and_attain_the_endpoints(s in stats(), spec in spec()) {
        match solve_interval(&s, &spec) {
            Ok(iv) => {
                prop_assert!(is_feasible(&s, &spec, &iv.argmin_tuple, DEFAULT_TOL));
                prop_assert!(is_feasible(&s, &spec, &iv.argmax_tuple, DEFAULT_TOL));
                prop_assert_eq!(beta_adjusted(&s, &iv.argmin_tuple).unwrap(), iv.lower);
                prop_assert_eq!(beta_adjusted(&s, &iv.argmax_tuple).unwrap(), iv.upper);
                prop_assert!(iv.lower <= iv.upper);
            }
            Err(e) => prop_assert!(matches!(e, Error::EmptyFeasibleSet(_)), "unexpected {e:?}"),
        }
    }

    #[test]
    fn candidate_count_is_bounded(s in stats(), spec in spec()) {
        if let Ok(set) = enumerate_candidates(&s, &spec) {
            prop_assert!(set.generated <= MAX_CANDIDATES);
            prop_assert!(set.candidates.len() <= set.feasible);
            for c in &set.candidates {
                prop_assert!(spec.contains_box(&c.tuple, 0.0));
            }
        }
    }

    #[test]
    fn coarse_grid_stays_inside_exact_interval(s in stats(), spec in spec()) {
        if let Ok(iv) = solve_interval(&s, &spec) {
            if let Ok(g) = grid_min_max(&s, &spec, &GridConfig::with_resolution(21)) {
                prop_assert!(g.interval.lower >= iv.lower - 1e-9);
                prop_assert!(g.interval.upper <= iv.upper + 1e-9);
            }
        }
    }

    #[test]
    fn synthesized_data_reproduces_slope_and_residuals((s, t) in feasible_tuple(), p in 2usize..5, seed in any::<u64>()) {
        let d = synthesize_data(&s, &t, p + 4, p, seed).unwrap();
        let b = beta_adjusted(&s, &t).unwrap();
        prop_assert!((ols_beta(&d).unwrap() - b).abs() < 1e-8 * (1.0 + b.abs()));
        let rc = residual_correlation(&s, &t).unwrap();
        prop_assert!((raw_residual_correlation(&d).unwrap() - rc).abs() < 1e-9);
        let out = summarize(&d).unwrap();
        prop_assert!((out.tuple.r2wx - t.r2wx).abs() < 1e-10);
        prop_assert!((out.tuple.r2wy - t.r2wy).abs() < 1e-10);
        prop_assert!((out.stats.rho_xy - s.rho_xy).abs() < 1e-10);
    }

    #[test]
    fn unconfounded_tuple_gives_unadjusted_slope(s in stats(), rho in -1.0..1.0f64) {
        let t = SensitivityTuple { r2wx: 0.0, r2wy: 0.0, rho_hxhy: rho };
        let b = beta_adjusted(&s, &t).unwrap();
        prop_assert!((b - s.unadjusted_slope()).abs() <= 1e-15 * (1.0 + b.abs()));
    }

    #[test]
    fn band_edges_bound_the_residual_correlation((s, t) in feasible_tuple()) {
        let rc = residual_correlation(&s, &t).unwrap();
        prop_assert!(rc.abs() <= 1.0 + 1e-9);
    }
}
