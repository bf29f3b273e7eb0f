#![allow(clippy::needless_range_loop)] // symmetric-tensor fills use explicit indices

//! Property tests for the geometry layer.

use proptest::prelude::*;
use tailwave::geometry::{
    frame_decompose, kerr_horizons, kerr_metric_components, null_frame_at, CoordinateMap,
    MetricParams,
};

fn unit_direction() -> impl Strategy<Value = [f64; 3]> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_filter_map("nonzero direction", |(x, y, z)| {
        let n = (x * x + y * y + z * z).sqrt();
        if n > 0.1 {
            Some([x / n, y / n, z / n])
        } else {
            None
        }
    })
}

proptest! {
    #[test]
    fn tortoise_round_trip(m in 0.5..2.0f64, rstar in -15.0..1.0e4f64) {
        let map = CoordinateMap::new(MetricParams::schwarzschild(m).unwrap(), 100.0 * m).unwrap();
        let r = map.areal_from_tortoise(rstar).unwrap();
        prop_assert!(r > 2.0 * m);
        let back = map.tortoise(r).unwrap();
        prop_assert!((back - rstar).abs() < 1e-10 * rstar.abs().max(1.0));
    }

    #[test]
    fn normalized_radius_monotone_pairs(
        m in 0.5..2.0f64,
        r1_scale in 7.0..40.0f64,
        a in 0.001..1.0f64,
        gap in 1e-6..0.5f64,
    ) {
        let r1 = r1_scale * m;
        let map = CoordinateMap::new(MetricParams::schwarzschild(m).unwrap(), r1).unwrap();
        let lo = 2.0 * m * (1.0 + 1e-9);
        let hi = 10.0 * r1;
        let ra = lo + a * (hi - lo);
        let rb = (ra * (1.0 + gap)).min(hi * 2.0);
        let va = map.normalized_radius(ra).unwrap();
        let vb = map.normalized_radius(rb).unwrap();
        prop_assert!(vb > va, "not increasing: ({ra}, {va}) vs ({rb}, {vb})");
    }

    #[test]
    fn kerr_tables_contract_to_identity(
        m in 0.5..2.0f64,
        spin_frac in 0.0..0.95f64,
        dr in 0.05..40.0f64,
        theta in 0.05..3.09f64,
    ) {
        let p = MetricParams::new(m, m * spin_frac).unwrap();
        let (_, rp) = kerr_horizons(&p).unwrap();
        let k = kerr_metric_components(&p, rp + dr, theta).unwrap();
        prop_assert!(k.inverse_identity_defect() < 1e-12);
    }

    #[test]
    fn frame_contractions_and_round_trip(
        r in 2.2..150.0f64,
        w in unit_direction(),
        entries in proptest::array::uniform10(-1.0..1.0f64),
    ) {
        let p = MetricParams::schwarzschild(1.0).unwrap();
        let frame = null_frame_at(&p, r, w).unwrap();
        for d in frame.contraction_defects(&p) {
            prop_assert!(d < 1e-12);
        }

        // Symmetric tensor from the 10 free entries.
        let mut h = [[0.0; 4]; 4];
        let mut k = 0;
        for a in 0..4 {
            for b in a..4 {
                h[a][b] = entries[k];
                h[b][a] = entries[k];
                k += 1;
            }
        }
        let (comps, frame) = frame_decompose(&p, r, w, &h).unwrap();
        let back = comps.reassemble(&frame);
        for a in 0..4 {
            for b in 0..4 {
                prop_assert!((back[a][b] - h[a][b]).abs() < 1e-10);
            }
        }
    }
}
