//! Schwarzschild/Kerr metric data and coordinate maps.
//!
//! Everything here is exact closed-form geometry: the Regge-Wheeler tortoise
//! coordinate and its numerical inverse, the normalized radial coordinate
//! that blends areal radius into tortoise radius far out, Kerr horizons and
//! Boyer-Lindquist metric component tables, and the null frame
//! `{L, Lbar, A, A*}` on Schwarzschild together with the frame decomposition
//! of symmetric 2-tensors.
//!
//! All values are immutable after construction and safe to share across
//! threads.

mod frame;
mod kerr;

pub use frame::{frame_decompose, null_frame_at, FrameComponents, NullFrame};
pub use kerr::{kerr_horizons, kerr_metric_components, KerrComponents};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from geometry operations.
#[derive(Debug, Error)]
pub enum GeometryError {
    /// Input outside the admissible domain (e.g. `r <= 2M`, spinning metric
    /// passed to a Schwarzschild-only map).
    #[error("domain error: {0}")]
    Domain(String),
    /// Root finder exhausted its iteration budget.
    #[error("convergence error: {0}")]
    Convergence(String),
    /// No real horizon roots: requires `a < M`.
    #[error("no horizon: a = {a} >= M = {m}")]
    NoHorizon { a: f64, m: f64 },
    /// Metric component table is singular at the requested point.
    #[error("degenerate point: {0}")]
    Degenerate(String),
}

/// Black-hole mass and specific angular momentum, geometric units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricParams {
    /// Mass `M > 0`.
    pub mass: f64,
    /// Specific angular momentum `a >= 0`. Kerr operations additionally
    /// require `a < M`; Schwarzschild-only operations require `a = 0`.
    pub spin: f64,
}

impl MetricParams {
    pub fn new(mass: f64, spin: f64) -> Result<Self, GeometryError> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(GeometryError::Domain(format!(
                "mass must be > 0, got {mass}"
            )));
        }
        if !(spin >= 0.0) || !spin.is_finite() {
            return Err(GeometryError::Domain(format!(
                "spin must be >= 0, got {spin}"
            )));
        }
        Ok(Self { mass, spin })
    }

    /// Schwarzschild with mass `m`.
    pub fn schwarzschild(m: f64) -> Result<Self, GeometryError> {
        Self::new(m, 0.0)
    }

    fn require_schwarzschild(&self, op: &str) -> Result<(), GeometryError> {
        if self.spin != 0.0 {
            return Err(GeometryError::Domain(format!(
                "{op} requires a = 0, got a = {}",
                self.spin
            )));
        }
        Ok(())
    }

    /// Lapse factor `1 - 2M/r`.
    #[inline]
    pub fn lapse(&self, r: f64) -> f64 {
        1.0 - 2.0 * self.mass / r
    }
}

/// Tortoise and normalized radial coordinate maps for a Schwarzschild
/// exterior, with transition radius `r1` for the normalized blend.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CoordinateMap {
    pub params: MetricParams,
    /// Transition radius: the normalized coordinate equals `r` below `r1`
    /// and the tortoise coordinate above `2 r1`.
    pub r1: f64,
}

impl CoordinateMap {
    pub fn new(params: MetricParams, r1: f64) -> Result<Self, GeometryError> {
        if !(r1 > 6.0 * params.mass) {
            return Err(GeometryError::Domain(format!(
                "transition radius r1 = {r1} must exceed 6M = {}",
                6.0 * params.mass
            )));
        }
        Ok(Self { params, r1 })
    }

    /// Regge-Wheeler tortoise coordinate
    /// `r* = r + 2M ln(r - 2M) - 3M - 2M ln M`, normalized so `r*(3M) = 0`.
    pub fn tortoise(&self, r: f64) -> Result<f64, GeometryError> {
        self.params.require_schwarzschild("tortoise")?;
        let m = self.params.mass;
        if !(r > 2.0 * m) {
            return Err(GeometryError::Domain(format!(
                "r = {r} must exceed 2M = {}",
                2.0 * m
            )));
        }
        Ok(tortoise_raw(m, r))
    }

    /// Numerical inverse of [`CoordinateMap::tortoise`].
    ///
    /// Safeguarded Newton iteration on `x = ln(r - 2M)`; the substitution
    /// makes the map strictly monotone with derivative `e^x + 2M`, so the
    /// iteration is stiff nowhere, including deep in the `r* -> -inf` tail.
    pub fn areal_from_tortoise(&self, rstar: f64) -> Result<f64, GeometryError> {
        self.params.require_schwarzschild("areal_from_tortoise")?;
        invert_tortoise(self.params.mass, rstar)
    }

    /// Normalized radial coordinate: identity below `r1`, tortoise above
    /// `2 r1`, quintic-smoothstep blend in between (`C^2` and, as verified
    /// numerically, strictly increasing).
    pub fn normalized_radius(&self, r: f64) -> Result<f64, GeometryError> {
        let m = self.params.mass;
        if !(r > 2.0 * m) {
            return Err(GeometryError::Domain(format!(
                "r = {r} must exceed 2M = {}",
                2.0 * m
            )));
        }
        if r <= self.r1 {
            return Ok(r);
        }
        let rs = tortoise_raw(m, r);
        if r >= 2.0 * self.r1 {
            return Ok(rs);
        }
        let s = (r - self.r1) / self.r1;
        let w = s * s * s * (6.0 * s * s - 15.0 * s + 10.0);
        Ok((1.0 - w) * r + w * rs)
    }
}

#[inline]
fn tortoise_raw(m: f64, r: f64) -> f64 {
    r + 2.0 * m * (r - 2.0 * m).ln() - 3.0 * m - 2.0 * m * m.ln()
}

/// Solve `tortoise(r) = rstar` for `r > 2M`.
///
/// Works in `x = ln(r - 2M)`: the residual `g(x) = e^x + 2Mx - M - 2M ln M - rstar`
/// is strictly increasing with `g' = e^x + 2M`, so Newton steps are damped by
/// a bisection bracket and cannot escape.
pub(crate) fn invert_tortoise(m: f64, rstar: f64) -> Result<f64, GeometryError> {
    let c = m + 2.0 * m * m.ln() + rstar;
    let g = |x: f64| x.exp() + 2.0 * m * x - c;

    // Initial guess: far branch r ~ rstar, near branch e^x negligible.
    let mut x = if rstar > 4.0 * m {
        (rstar - 2.0 * m).max(m).ln()
    } else {
        (c - 1.0) / (2.0 * m)
    };

    // Expand to a sign-changing bracket around the guess.
    let mut lo = x - 1.0;
    let mut hi = x + 1.0;
    let mut step = 1.0;
    for _ in 0..200 {
        if g(lo) < 0.0 {
            break;
        }
        step *= 2.0;
        lo -= step;
    }
    step = 1.0;
    for _ in 0..200 {
        if g(hi) > 0.0 {
            break;
        }
        step *= 2.0;
        hi += step;
    }
    if !(g(lo) < 0.0 && g(hi) > 0.0) {
        return Err(GeometryError::Convergence(format!(
            "failed to bracket tortoise inverse at rstar = {rstar}"
        )));
    }

    x = x.clamp(lo, hi);
    for _ in 0..200 {
        let gx = g(x);
        if gx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let dg = x.exp() + 2.0 * m;
        let mut next = x - gx / dg;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) {
            let r = 2.0 * m + next.exp();
            return Ok(r);
        }
        x = next;
    }
    Err(GeometryError::Convergence(format!(
        "tortoise inverse did not converge at rstar = {rstar}"
    )))
}

/// Inverse tortoise map together with the lapse `1 - 2M/r`, computed from the
/// log-radius directly so the horizon limit underflows to `(2M, 0)` instead
/// of losing digits to cancellation.
pub(crate) fn areal_and_lapse(m: f64, rstar: f64) -> Result<(f64, f64), GeometryError> {
    let r = invert_tortoise(m, rstar)?;
    let x = r - 2.0 * m; // exact under the hood: r was built as 2M + e^x
    Ok((r, x / r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn map(m: f64) -> CoordinateMap {
        CoordinateMap::new(MetricParams::schwarzschild(m).unwrap(), 100.0 * m).unwrap()
    }

    /// Independent oracle: integrate dr*/dr = 1/(1 - 2M/r) from r = 3M by
    /// adaptive Simpson, never touching the closed form.
    fn tortoise_by_quadrature(m: f64, r: f64) -> f64 {
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
            (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
        }
        fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, depth: u32) -> f64 {
            let mid = 0.5 * (a + b);
            let left = simpson(f, a, mid);
            let right = simpson(f, mid, b);
            if depth == 0 || (left + right - whole).abs() < 1e-12 * (1.0 + whole.abs()) {
                left + right
            } else {
                adapt(f, a, mid, left, depth - 1) + adapt(f, mid, b, right, depth - 1)
            }
        }
        let f = move |x: f64| 1.0 / (1.0 - 2.0 * m / x);
        let (a, b) = (3.0 * m, r);
        adapt(&f, a, b, simpson(&f, a, b), 48)
    }

    #[test]
    fn tortoise_closed_form_values() {
        let map = map(1.0);
        assert_relative_eq!(map.tortoise(3.0).unwrap(), 0.0, epsilon = 1e-14);
        assert_relative_eq!(
            map.tortoise(4.0).unwrap(),
            1.0 + 2.0 * 2.0_f64.ln(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn tortoise_matches_quadrature_oracle_near_horizon() {
        let map = map(1.0);
        let got = map.tortoise(2.001).unwrap();
        let oracle = tortoise_by_quadrature(1.0, 2.001);
        assert_relative_eq!(got, oracle, epsilon = 1e-8);
        // Frozen from the oracle: 2.001 + 2 ln(0.001) - 3.
        assert_relative_eq!(got, -14.814510557964, epsilon = 1e-9);
    }

    #[test]
    fn tortoise_rejects_horizon_and_spin() {
        let map = map(1.0);
        assert!(map.tortoise(2.0).is_err());
        assert!(map.tortoise(1.5).is_err());
        let spun = CoordinateMap::new(MetricParams::new(1.0, 0.5).unwrap(), 100.0).unwrap();
        assert!(spun.tortoise(3.0).is_err());
    }

    #[test]
    fn inverse_tortoise_examples() {
        let map = map(1.0);
        assert_relative_eq!(map.areal_from_tortoise(0.0).unwrap(), 3.0, epsilon = 1e-12);
        // Root-finding oracle on the closed form (bisection, independent of Newton).
        let target = 1.0 + 2.0 * 2.0_f64.ln();
        let mut lo = 2.000001;
        let mut hi = 100.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if tortoise_raw(1.0, mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert_relative_eq!(map.areal_from_tortoise(target).unwrap(), lo, epsilon = 1e-9);
        assert_relative_eq!(
            map.areal_from_tortoise(target).unwrap(),
            4.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn inverse_tortoise_asymptotes_to_horizon() {
        let map = map(1.0);
        let r = map.areal_from_tortoise(-50.0).unwrap();
        let eta = r - 2.0;
        assert!(eta > 0.0 && eta < 1e-9, "eta = {eta}");
    }

    #[test]
    fn tortoise_round_trip_across_masses() {
        // The depth limit per mass is set by f64: r - 2M is stored relative
        // to the ulp of 2M, and re-tortoising amplifies that granularity by
        // (r - 2M)^-1. Below these depths a 1e-10 round trip is not
        // representable (e.g. M = 1, r* = -60 leaves ~350 ulps in r - 2M).
        for (m, deepest) in [(0.5, -15.0), (1.0, -30.0), (2.0, -60.0)] {
            let map = map(m);
            let mut rstar = deepest;
            while rstar <= 1.0e4 {
                let r = map.areal_from_tortoise(rstar).unwrap();
                assert!(r > 2.0 * m, "m={m} rstar={rstar} r={r}");
                let back = map.tortoise(r).unwrap();
                assert!(
                    (back - rstar).abs() < 1e-10 * rstar.abs().max(1.0),
                    "m={m} rstar={rstar} back={back}"
                );
                rstar += 7.37;
            }
        }
    }

    #[test]
    fn normalized_radius_blend_and_monotonicity() {
        let map = map(1.0);
        assert_relative_eq!(map.normalized_radius(50.0).unwrap(), 50.0);
        assert_relative_eq!(
            map.normalized_radius(300.0).unwrap(),
            map.tortoise(300.0).unwrap()
        );
        // At r = 150 the tortoise value exceeds r (the log term dominates
        // the -3M shift), so the blend lies strictly between them above r.
        let mid = map.normalized_radius(150.0).unwrap();
        let ts = map.tortoise(150.0).unwrap();
        assert!(ts > 150.0);
        assert!(mid > 150.0 && mid < ts, "mid = {mid}, tortoise = {ts}");

        // Strictly increasing over 1e4 sorted samples in (2M, 10 r1).
        let n = 10_000;
        let mut prev = f64::NEG_INFINITY;
        for i in 0..n {
            let r = 2.0 + 1e-6 + (10.0 * map.r1 - 2.0) * (i as f64) / (n as f64);
            let v = map.normalized_radius(r).unwrap();
            assert!(v > prev, "not increasing at r = {r}");
            prev = v;
        }
    }

    #[test]
    fn lapse_from_log_radius_is_clean_at_extreme_depth() {
        let (r, f) = areal_and_lapse(1.0, -700.0).unwrap();
        assert_eq!(r, 2.0); // underflows to the horizon value
        assert_eq!(f, 0.0);
        let (r, f) = areal_and_lapse(1.0, -40.0).unwrap();
        assert!(r > 2.0);
        assert!(f > 0.0 && f < 1e-8);
    }
}
