//! Grid diagnostics against closed-form oracles and evolved fields.

use tailwave::analysis::{le_norms, second_derivative_bound_check, AnalysisError, RegionSpec};
use tailwave::coefficients::{CoefficientProfile, ProfileKind};
use tailwave::evolution::{
    evolve_grid, DataProfile, EvolveSpec, GridSpec, InitialData, NullGrid, StoreWindow,
};
use tailwave::geometry::{CoordinateMap, MetricParams};
use tailwave::jbracket;

fn schwarzschild() -> MetricParams {
    MetricParams::schwarzschild(1.0).unwrap()
}

#[test]
fn le_norm_matches_closed_form_for_unit_field() {
    // phi = 1 on C_T^R with T = 64, R = 8: the squared norm is
    // 4 pi T int_8^16 rho^2/<rho> drho with antiderivative
    // (rho sqrt(1+rho^2) - asinh rho)/2.
    let du = 0.125;
    let map = CoordinateMap::new(schwarzschild(), 100.0).unwrap();
    let grid = NullGrid::synthetic(schwarzschild(), du, (0.0, 130.0), (60.0, 260.0), |u, v| {
        // psi = r phi with phi = 1.
        let rstar = 0.5 * (v - u);
        map.areal_from_tortoise(rstar).unwrap()
    })
    .unwrap();
    let report = le_norms(&grid, 64.0).unwrap();
    let piece = report
        .regions
        .iter()
        .find(|r| r.region.contains("C_T^R") && r.region.ends_with("R=8"))
        .expect("R=8 region present");

    let anti = |x: f64| 0.5 * (x * (1.0 + x * x).sqrt() - x.asinh());
    let oracle_sq = 4.0 * std::f64::consts::PI * 64.0 * (anti(16.0) - anti(8.0));
    let got_sq = piece.value * piece.value;
    let rel = (got_sq - oracle_sq).abs() / oracle_sq;
    assert!(
        rel < 0.01,
        "norm^2 {got_sq} vs oracle {oracle_sq} (rel {rel:.4})"
    );
}

#[test]
fn le_norm_zero_field_and_union_additivity() {
    let grid = NullGrid::synthetic(
        schwarzschild(),
        0.25,
        (0.0, 130.0),
        (60.0, 260.0),
        |_, _| 0.0,
    )
    .unwrap();
    let report = le_norms(&grid, 64.0).unwrap();
    assert!(report.regions.is_empty());
    assert_eq!(report.union_below_three_quarters, 0.0);

    // A nontrivial field: union over R < 3T/8 equals the l2 sum of its
    // constituent pieces to round-off.
    let grid = NullGrid::synthetic(
        schwarzschild(),
        0.25,
        (0.0, 130.0),
        (60.0, 260.0),
        |u, v| ((v - u) * 0.05).sin() * (1.0 + 0.01 * u),
    )
    .unwrap();
    let report = le_norms(&grid, 64.0).unwrap();
    let cut = 3.0 * 64.0 / 8.0;
    let sum_sq: f64 = report
        .regions
        .iter()
        .filter_map(|r| {
            let tag = r.region.rsplit("R=").next()?.parse::<f64>().ok()?;
            if r.region.contains("C_T^R") && tag < cut {
                Some(r.value * r.value)
            } else {
                None
            }
        })
        .sum();
    let union_sq = report.union_below_three_quarters.powi(2);
    assert!(
        (sum_sq - union_sq).abs() <= 1e-12 * union_sq.max(1e-300),
        "additivity: {sum_sq} vs {union_sq}"
    );
}

#[test]
fn le_norm_coverage_error_when_slab_missing() {
    let grid =
        NullGrid::synthetic(schwarzschild(), 0.25, (0.0, 20.0), (10.0, 60.0), |_, _| 1.0).unwrap();
    assert!(matches!(
        le_norms(&grid, 64.0),
        Err(AnalysisError::Coverage(_))
    ));
}

#[test]
fn prop_ratio_bounded_across_dyadic_times_on_evolved_run() {
    let spec = EvolveSpec::new(
        schwarzschild(),
        CoefficientProfile::new(0.5, 0.0, ProfileKind::LbarLbarOnly, 0.0).unwrap(),
        InitialData::new(1e-3, 30.0, 8.0, DataProfile::GaussianBump).unwrap(),
        GridSpec {
            du: 0.5,
            u_max: 520.0,
            v0: -120.0,
            v_max: 1060.0,
        },
        vec![],
    );
    let keep = StoreWindow {
        u_lo: 0.0,
        u_hi: 520.0,
        v_lo: 55.0,
        v_hi: 1035.0,
    };
    let (grid, _) = evolve_grid(&spec, keep).unwrap();
    let mut ratios = Vec::new();
    for t_dyadic in [64.0, 128.0, 256.0] {
        let report = le_norms(&grid, t_dyadic).unwrap();
        assert!(report.prop_ratio.is_finite(), "T = {t_dyadic}");
        ratios.push(report.prop_ratio);
    }
    let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
    assert!(
        max / min < 10.0,
        "prop ratio not uniformly bounded across T: {ratios:?}"
    );
}

#[test]
fn second_derivative_constant_vanishes_for_linear_field() {
    // phi = r*: all second derivatives vanish, so the fitted constant is
    // floating-point noise.
    let map = CoordinateMap::new(schwarzschild(), 100.0).unwrap();
    let grid = NullGrid::synthetic(
        schwarzschild(),
        0.25,
        (0.0, 120.0),
        (290.0, 720.0),
        |u, v| {
            let rstar = 0.5 * (v - u);
            rstar * map.areal_from_tortoise(rstar).unwrap()
        },
    )
    .unwrap();
    let region = RegionSpec {
        t_range: (200.0, 400.0),
        rstar_range: (150.0, 300.0),
    };
    let report = second_derivative_bound_check(&grid, region, 50.0).unwrap();
    assert!(report.c2 < 1e-6, "C2 = {} should be fp noise", report.c2);
    assert!(report.samples > 1000);
}

#[test]
fn second_derivative_region_must_respect_r1() {
    let grid = NullGrid::synthetic(schwarzschild(), 0.5, (0.0, 60.0), (100.0, 300.0), |u, v| {
        u + v
    })
    .unwrap();
    let region = RegionSpec {
        t_range: (100.0, 140.0),
        rstar_range: (80.0, 120.0),
    };
    assert!(matches!(
        second_derivative_bound_check(&grid, region, 50.0),
        Err(AnalysisError::Region(_))
    ));
}

#[test]
fn jbracket_is_the_smoothed_absolute_value() {
    assert_eq!(jbracket(0.0), 1.0);
    assert!((jbracket(3.0) - 10.0f64.sqrt()).abs() < 1e-15);
    assert_eq!(jbracket(-5.0), jbracket(5.0));
}
