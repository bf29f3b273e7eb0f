//! Scratch: effect of scaling the reduction potential on the late-time
//! local power index (verification-suite mutation probe).
//! Run: cargo run -p tailwave --example mutation_probe --release

use tailwave::analysis::power_index_profile;
use tailwave::coefficients::{CoefficientProfile, ProfileKind};
use tailwave::evolution::{evolve, DataProfile, EvolveSpec, GridSpec, InitialData};
use tailwave::geometry::MetricParams;

fn main() {
    for scale in [1.0, 1.1] {
        let mut spec = EvolveSpec::new(
            MetricParams::schwarzschild(1.0).unwrap(),
            CoefficientProfile::new(0.5, 0.0, ProfileKind::LbarLbarOnly, 0.0).unwrap(),
            InitialData::new(1e-3, 20.0, 2.0, DataProfile::GaussianBump).unwrap(),
            GridSpec {
                du: 0.0625,
                u_max: 2490.0,
                v0: -120.0,
                v_max: 2520.0,
            },
            vec![10.0],
        );
        spec.potential_scale = scale;
        let out = evolve(&spec).unwrap();
        let profile = power_index_profile(&out.series[0], (800.0, 1400.0), 25, 1e-16).unwrap();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(_, p) in &profile {
            lo = lo.min(p);
            hi = hi.max(p);
        }
        println!("scale {scale}: index range [{lo:.4}, {hi:.4}]");
    }
}
