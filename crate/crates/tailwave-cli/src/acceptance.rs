//! The verification suite: eight quantitative criteria with pinned
//! tolerances, runnable as `tailwave accept` and as an integration test.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;
use tailwave::analysis::{
    self, bound_verification, hardy_check, power_index_profile, second_derivative_bound_check,
    RadialSlice, RegionSpec,
};
use tailwave::coefficients::{
    check_symbol_class, check_symbol_class_of, CoefficientProfile, GridSpec as CoeffGrid,
    ProfileKind,
};
use tailwave::evolution::{
    evolve, evolve_grid, DataProfile, EvolveSpec, GridSpec, InitialData, StoreWindow,
};
use tailwave::geometry::{
    frame_decompose, kerr_horizons, null_frame_at, CoordinateMap, MetricParams,
};
use tailwave::iteration::{run_iteration, ConeStepAt, Exponent, OperatorKind as IterKind};
use tailwave::lightcone::{fit_cone_exponents, predicted_exponents, ConeWeight, SamplePath};

#[derive(Debug, Clone)]
pub struct Criterion {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Criterion {
    fn line(&self) -> String {
        format!(
            "{}  {}. {} ({:.1}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

pub fn print_table(criteria: &[Criterion]) {
    for c in criteria {
        println!("{}", c.line());
    }
    let failed: Vec<_> = criteria.iter().filter(|c| !c.passed).collect();
    if failed.is_empty() {
        println!("all {} criteria passed", criteria.len());
    } else {
        println!(
            "{} of {} criteria FAILED (first: {}. {})",
            failed.len(),
            criteria.len(),
            failed[0].id,
            failed[0].name
        );
    }
}

fn timed(id: usize, name: &'static str, f: impl FnOnce() -> (bool, String)) -> Criterion {
    let start = Instant::now();
    let (passed, detail) = f();
    Criterion {
        id,
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn schwarzschild() -> MetricParams {
    MetricParams::schwarzschild(1.0).unwrap()
}

fn linear_profile() -> CoefficientProfile {
    CoefficientProfile::new(0.5, 0.0, ProfileKind::LbarLbarOnly, 0.0).unwrap()
}

/// Criterion 1: linear l=0 tail exponent at r* = 10 sits in [-3.2, -2.8]
/// across t in [800, 1400]. The march runs past t = 2500 so the half-decade
/// index stencil covers the window's upper end.
pub fn price_tail(potential_scale: f64) -> Criterion {
    timed(1, "price-law tail", move || {
        let mut spec = EvolveSpec::new(
            schwarzschild(),
            linear_profile(),
            InitialData::new(1e-3, 20.0, 2.0, DataProfile::GaussianBump).unwrap(),
            GridSpec {
                du: 0.0625,
                u_max: 2490.0,
                v0: -120.0,
                v_max: 2520.0,
            },
            vec![10.0],
        );
        spec.potential_scale = potential_scale;
        let out = match evolve(&spec) {
            Ok(o) => o,
            Err(e) => return (false, format!("run failed: {e}")),
        };
        let floor = 1e-13 * 1e-3;
        let profile = match power_index_profile(&out.series[0], (800.0, 1400.0), 25, floor) {
            Ok(p) => p,
            Err(e) => return (false, format!("index extraction failed: {e}")),
        };
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(_, p) in &profile {
            lo = lo.min(p);
            hi = hi.max(p);
        }
        let ok = lo >= -3.2 && hi <= -2.8;
        (
            ok,
            format!("local index range [{lo:.3}, {hi:.3}] vs [-3.2, -2.8]"),
        )
    })
}

/// Criterion 2: quasilinear runs at delta in {0.3, 0.5, 1.5} report a
/// stabilized weighted sup for kappa = min(delta, 1).
pub fn quasilinear_bound() -> Criterion {
    timed(2, "quasilinear upper bound", || {
        use rayon::prelude::*;
        let results: Vec<Result<(bool, String), String>> = [0.3, 0.5, 1.5]
            .par_iter()
            .map(|&delta| {
                let profile =
                    CoefficientProfile::new(delta, 1.0, ProfileKind::LbarLbarOnly, 0.0).unwrap();
                let spec = EvolveSpec::new(
                    schwarzschild(),
                    profile,
                    InitialData::new(1e-3, 20.0, 2.0, DataProfile::GaussianBump).unwrap(),
                    GridSpec {
                        du: 0.0625,
                        u_max: 790.0,
                        v0: -120.0,
                        v_max: 810.0,
                    },
                    vec![10.0],
                );
                let out = evolve(&spec).map_err(|e| format!("delta = {delta}: run failed: {e}"))?;
                if out.meta.sup_phi > 2.0 * 1e-3 {
                    return Ok((
                        false,
                        format!("delta={delta}: sup|phi|={} above 2 eps", out.meta.sup_phi),
                    ));
                }
                let kappa = delta.min(1.0);
                let check = bound_verification(&out.series[0], kappa, (50.0, 795.0))
                    .map_err(|e| format!("delta = {delta}: {e}"))?;
                Ok((
                    check.bounded,
                    format!(
                        "delta={delta}: kappa={kappa} C*={:.3e} bounded={}",
                        check.c_star, check.bounded
                    ),
                ))
            })
            .collect();
        let mut details = Vec::new();
        let mut all = true;
        for r in results {
            match r {
                Ok((ok, line)) => {
                    all &= ok;
                    details.push(line);
                }
                Err(e) => return (false, e),
            }
        }
        (all, details.join("; "))
    })
}

/// Criterion 3: fitted cone exponents match the conversion table within 0.1
/// for the five listed weights.
///
/// The table exponent is realized by the integral only under the
/// integrability condition `alpha + beta + eta > 3`; the last two listed
/// weights violate it (the integral then grows in the cone radius instead of
/// scaling), so they fail the stated tolerance for structural reasons. The
/// criterion is evaluated as stated and reports the split.
pub fn conversion_table() -> Criterion {
    timed(3, "cone conversion exponent table", || {
        let weights = [
            (2.5, 0.0, 2.0),
            (2.5, 0.5, 0.5),
            (2.9, 0.0, 2.0),
            (2.75, 0.0, -0.5),
            (2.5, 0.0, 0.5),
        ];
        let results: Vec<Result<String, String>> = {
            use rayon::prelude::*;
            weights
                .par_iter()
                .map(|&(a, b, e)| {
                    let w =
                        ConeWeight::new(a, b, e).map_err(|err| format!("({a},{b},{e}): {err}"))?;
                    let (_, pu_pred) = predicted_exponents(&w).unwrap();
                    let path = SamplePath::for_weight(&w);
                    let fit = fit_cone_exponents(&w, &path)
                        .map_err(|err| format!("({a},{b},{e}): {err}"))?;
                    let du = (fit.p_u - pu_pred).abs();
                    let dr = (fit.p_r - 1.0).abs();
                    let integrable = a + b + e > 3.0;
                    let line = format!(
                        "({a},{b},{e}): p_u {:.3} vs {pu_pred:.2}, p_r {:.3}{}",
                        fit.p_u,
                        fit.p_r,
                        if integrable {
                            ""
                        } else {
                            " [outside integrability window]"
                        }
                    );
                    if du <= 0.1 && dr <= 0.1 {
                        Ok(line)
                    } else {
                        Err(line)
                    }
                })
                .collect()
        };
        let mut details = Vec::new();
        let mut ok = true;
        for r in results {
            match r {
                Ok(line) => details.push(line),
                Err(line) => {
                    ok = false;
                    details.push(format!("MISS {line}"));
                }
            }
        }
        (ok, details.join("; "))
    })
}

/// Criterion 4: the exponent engine returns p_u = min(delta, 1) exactly for
/// 20 rationals in (0, 3], within 3 passes, with deterministic traces.
pub fn kappa_law() -> Criterion {
    timed(4, "iteration-engine kappa law", || {
        let mut worst_passes = 0;
        for k in 1..=20i64 {
            let delta = Ratio::new(3 * k, 20);
            let expect = delta.min(Ratio::from_integer(1));
            let out = match run_iteration(delta, IterKind::P, 8) {
                Ok(o) => o,
                Err(e) => return (false, format!("delta = {delta}: {e}")),
            };
            if out.bound.p_u != Exponent::exact(expect) {
                return (
                    false,
                    format!(
                        "delta = {delta}: p_u = {} instead of {expect}",
                        out.bound.p_u
                    ),
                );
            }
            if out.passes > 3 {
                return (false, format!("delta = {delta}: {} passes", out.passes));
            }
            worst_passes = worst_passes.max(out.passes);
            let again = run_iteration(delta, IterKind::P, 8).unwrap();
            if again.trace != out.trace {
                return (false, format!("delta = {delta}: trace replay differs"));
            }
        }
        // Both cone-rule orderings agree (exercised here at the boundary).
        for delta in [Ratio::new(1, 2), Ratio::new(1, 1), Ratio::new(3, 2)] {
            let p2 = tailwave::iteration::run_iteration_from(
                tailwave::iteration::initial_pointwise_bound(),
                delta,
                IterKind::PPrime,
                8,
                ConeStepAt::Pass2,
            )
            .unwrap();
            let p3 = tailwave::iteration::run_iteration_from(
                tailwave::iteration::initial_pointwise_bound(),
                delta,
                IterKind::PPrime,
                8,
                ConeStepAt::Pass3,
            )
            .unwrap();
            if p2.bound != p3.bound {
                return (false, format!("delta = {delta}: cone orderings disagree"));
            }
        }
        (
            true,
            format!("20 deltas exact, fixed point in <= {worst_passes} passes"),
        )
    })
}

/// Criterion 5: linear self-convergence order 2.0 +- 0.2 across du in
/// {0.25, 0.125, 0.0625}.
pub fn convergence() -> Criterion {
    timed(5, "self-convergence order", || {
        let mut series = Vec::new();
        for du in [0.25, 0.125, 0.0625] {
            let spec = EvolveSpec::new(
                schwarzschild(),
                linear_profile(),
                InitialData::new(1e-3, 30.0, 4.0, DataProfile::GaussianBump).unwrap(),
                GridSpec {
                    du,
                    u_max: 400.0,
                    v0: -120.0,
                    v_max: 440.0,
                },
                vec![10.0],
            );
            match evolve(&spec) {
                Ok(out) => series.push(out.series.into_iter().next().unwrap()),
                Err(e) => return (false, format!("du = {du}: run failed: {e}")),
            }
        }
        match analysis::self_convergence_ratio(&series[0], &series[1], &series[2], (50.0, 380.0)) {
            Ok(ratio) => {
                let order = ratio.log2();
                let ok = (1.8..=2.2).contains(&order);
                (
                    ok,
                    format!("ratio {ratio:.3}, order {order:.3} vs 2.0 +- 0.2"),
                )
            }
            Err(e) => (false, e.to_string()),
        }
    })
}

/// Criterion 6: geometry invariants at their stated tolerances.
pub fn geometry_invariants(seed: u64) -> Criterion {
    timed(6, "geometry invariants", move || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        // Tortoise round trips at f64-representable depths.
        for (m, deepest) in [(0.5, -15.0), (1.0, -30.0), (2.0, -60.0)] {
            let map =
                CoordinateMap::new(MetricParams::schwarzschild(m).unwrap(), 100.0 * m).unwrap();
            for _ in 0..200 {
                let rstar = rng.gen_range(deepest..1.0e4);
                let r = match map.areal_from_tortoise(rstar) {
                    Ok(r) => r,
                    Err(e) => return (false, format!("inverse failed at {rstar}: {e}")),
                };
                let back = map.tortoise(r).unwrap();
                if (back - rstar).abs() > 1e-10 * rstar.abs().max(1.0) {
                    return (false, format!("round trip m={m} rstar={rstar}: {back}"));
                }
            }
        }

        // Kerr horizon roots.
        for _ in 0..100 {
            let m = rng.gen_range(0.5..2.0);
            let a = m * rng.gen_range(0.0..0.99);
            let p = MetricParams::new(m, a).unwrap();
            let (rm, rp) = kerr_horizons(&p).unwrap();
            for r in [rm, rp] {
                let delta = r * (r - 2.0 * m) + a * a;
                if delta.abs() > 1e-13 {
                    return (false, format!("Delta(r={r}) = {delta} at m={m}, a={a}"));
                }
            }
        }

        // Null-frame contractions and frame-decomposition round trips.
        let p = schwarzschild();
        for _ in 0..1000 {
            let r = rng.gen_range(2.05..200.0);
            let w = random_direction(&mut rng);
            let frame = null_frame_at(&p, r, w).unwrap();
            for d in frame.contraction_defects(&p) {
                if d > 1e-12 {
                    return (false, format!("frame defect {d} at r = {r}"));
                }
            }
        }
        for _ in 0..1000 {
            let r = rng.gen_range(2.2..50.0);
            let w = random_direction(&mut rng);
            let mut h = [[0.0; 4]; 4];
            for a in 0..4 {
                for b in a..4 {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    h[a][b] = v;
                    h[b][a] = v;
                }
            }
            let (comps, frame) = frame_decompose(&p, r, w, &h).unwrap();
            let back = comps.reassemble(&frame);
            let mut defect: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    defect = defect.max((back[a][b] - h[a][b]).abs());
                    scale = scale.max(h[a][b].abs());
                }
            }
            if defect > 1e-10 * scale.max(1.0) {
                return (
                    false,
                    format!("decomposition round trip defect {defect} at r = {r}"),
                );
            }
        }
        (
            true,
            "round trips, horizons, frames, decompositions all in tolerance".into(),
        )
    })
}

fn random_direction(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.1 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// Criterion 7: symbol-class checker separates the canonical profiles from
/// the adversarial constant profile.
pub fn symbol_class() -> Criterion {
    timed(7, "symbol-class checker", || {
        let grid = CoeffGrid::new(1.0e4, 50, 80).unwrap();
        let mut details = Vec::new();
        for delta in [0.3, 1.0, 2.0] {
            let profile =
                CoefficientProfile::new(delta, 1.0, ProfileKind::LbarLbarOnly, 0.0).unwrap();
            let report = check_symbol_class(&profile, &grid).unwrap();
            if !report.pass() {
                return (
                    false,
                    format!(
                        "canonical delta={delta} failed: ratios ({:.3}, {:.3}, {:.3})",
                        report.max_ratio_h, report.max_ratio_hll, report.max_ratio_dh
                    ),
                );
            }
            details.push(format!(
                "delta={delta}: ratios ({:.2}, {:.2}, {:.2})",
                report.max_ratio_h, report.max_ratio_hll, report.max_ratio_dh
            ));
        }
        let grid = CoeffGrid::new(1.0e3, 40, 60).unwrap();
        let adversarial = check_symbol_class_of(&|_, _| 1.0, 1.0, 1.0, &grid).unwrap();
        if adversarial.pass() {
            return (
                false,
                "adversarial constant profile passed the checker".into(),
            );
        }
        details.push(format!(
            "adversarial hll ratio {:.1} > 2",
            adversarial.max_ratio_hll
        ));
        (true, details.join("; "))
    })
}

/// Criterion 8: diagnostics stability -- the second-derivative constant is
/// refinement-stable to 10% (and finite), and the Hardy check reproduces the
/// constant-field closed forms while flagging the anomaly.
pub fn diagnostics_stability() -> Criterion {
    timed(8, "diagnostics stability", || {
        let region = RegionSpec {
            t_range: (200.0, 400.0),
            rstar_range: (150.0, 300.0),
        };
        let keep = StoreWindow {
            u_lo: 0.0,
            u_hi: 260.0,
            v_lo: 320.0,
            v_hi: 710.0,
        };
        let mut c2 = Vec::new();
        for du in [0.25, 0.125] {
            let spec = EvolveSpec::new(
                schwarzschild(),
                linear_profile(),
                InitialData::new(1e-3, 30.0, 4.0, DataProfile::GaussianBump).unwrap(),
                GridSpec {
                    du,
                    u_max: 260.0,
                    v0: -120.0,
                    v_max: 710.0,
                },
                vec![],
            );
            let (grid, _) = match evolve_grid(&spec, keep) {
                Ok(g) => g,
                Err(e) => return (false, format!("du = {du}: run failed: {e}")),
            };
            match second_derivative_bound_check(&grid, region, 50.0) {
                Ok(rep) => c2.push(rep.c2),
                Err(e) => return (false, format!("du = {du}: {e}")),
            }
        }
        let change = (c2[1] - c2[0]).abs() / c2[1];
        let stable = change < 0.10 && c2.iter().all(|c| c.is_finite() && *c <= 50.0);

        let t = 1.0e3;
        let slice = RadialSlice::from_fn(t / 4.0 - 2.0, 7.0 * t / 4.0 + 2.0, 60_000, |_| 1.0);
        let hardy = match hardy_check(&slice, t) {
            Ok(h) => h,
            Err(e) => return (false, e.to_string()),
        };
        let lhs_ok = (hardy.lhs - std::f64::consts::PI).abs() / std::f64::consts::PI < 0.01;
        let rhs_ok = (hardy.rhs - 1.0 / (2.0 * t)).abs() * 2.0 * t < 0.01;
        let ok = stable && lhs_ok && rhs_ok && hardy.anomalous;
        (
            ok,
            format!(
                "C2 = {:.3} -> {:.3} (change {:.1}%); hardy LHS {:.4} ~ pi, RHS {:.3e} ~ {:.3e}, anomaly flagged = {}",
                c2[0],
                c2[1],
                100.0 * change,
                hardy.lhs,
                hardy.rhs,
                1.0 / (2.0 * t),
                hardy.anomalous
            ),
        )
    })
}

/// Run the full suite (or the symbolic-only fast subset).
pub fn run_all(fast: bool, seed: u64) -> Vec<Criterion> {
    if fast {
        return vec![kappa_law()];
    }
    vec![
        price_tail(1.0),
        quasilinear_bound(),
        conversion_table(),
        kappa_law(),
        convergence(),
        geometry_invariants(seed),
        symbol_class(),
        diagnostics_stability(),
    ]
}
