//! Quasilinear runs: smallness persistence and cell-rule behaviour.

use tailwave::coefficients::{CoefficientProfile, ProfileKind};
use tailwave::evolution::{evolve, DataProfile, EvolveSpec, GridSpec, InitialData};
use tailwave::geometry::MetricParams;

fn spec(delta: f64, h0: f64, cubic: f64, kind: ProfileKind) -> EvolveSpec {
    EvolveSpec::new(
        MetricParams::schwarzschild(1.0).unwrap(),
        CoefficientProfile::new(delta, h0, kind, cubic).unwrap(),
        InitialData::new(1e-3, 20.0, 2.0, DataProfile::GaussianBump).unwrap(),
        GridSpec {
            du: 0.125,
            u_max: 120.0,
            v0: -60.0,
            v_max: 160.0,
        },
        vec![10.0],
    )
}

#[test]
fn smallness_persists_across_profiles() {
    for delta in [0.3, 1.0, 2.0] {
        for (h0, cubic) in [(1.0, 0.0), (0.5, 0.5), (1.0, 1.0)] {
            let s = spec(delta, h0, cubic, ProfileKind::LbarLbarOnly);
            let out = evolve(&s).expect("quasilinear run completes");
            assert!(
                out.meta.sup_phi <= 2.0 * 1e-3,
                "delta={delta} h0={h0} cubic={cubic}: sup phi = {}",
                out.meta.sup_phi
            );
            assert_eq!(out.meta.one_sided_rows, 2);
            assert!(out.meta.max_psi.is_finite() && out.meta.min_psi.is_finite());
        }
    }
}

#[test]
fn quasilinear_correction_is_small_but_nonzero() {
    let linear = evolve(&spec(0.5, 0.0, 0.0, ProfileKind::LbarLbarOnly)).unwrap();
    let quasi = evolve(&spec(0.5, 1.0, 0.0, ProfileKind::LbarLbarOnly)).unwrap();
    let a = &linear.series[0].samples;
    let b = &quasi.series[0].samples;
    assert_eq!(a.len(), b.len());
    let mut max_diff: f64 = 0.0;
    let mut max_amp: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        max_diff = max_diff.max((x.phi - y.phi).abs());
        max_amp = max_amp.max(x.phi.abs());
    }
    assert!(max_diff > 0.0, "source must change the field");
    assert!(
        max_diff < 0.05 * max_amp,
        "perturbative regime: diff {max_diff} vs amplitude {max_amp}"
    );
}

#[test]
fn full_tensor_profile_runs_with_the_same_slow_slot() {
    // The reduced cell rule consumes the slow frame slot, which is the same
    // scalar for both kinds; the runs agree.
    let a = evolve(&spec(0.5, 1.0, 0.0, ProfileKind::LbarLbarOnly)).unwrap();
    let b = evolve(&spec(0.5, 1.0, 0.0, ProfileKind::FullTensor)).unwrap();
    for (x, y) in a.series[0].samples.iter().zip(&b.series[0].samples) {
        assert_eq!(x.phi, y.phi);
    }
}
