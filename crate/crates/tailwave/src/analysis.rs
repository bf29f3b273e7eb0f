//! Decay-rate extraction and pointwise-inequality diagnostics on evolved
//! fields.
//!
//! Rate extraction works on observer time series: the local power index
//! `p(t) = d ln|phi| / d ln t` by centred log-log differencing over a
//! half-decade stencil, a least-squares fit over a full window as
//! cross-check, and a weighted-sup boundedness verdict for upper bounds of
//! the form `<t>^-(1+kappa)`.
//!
//! Grid diagnostics evaluate inequality ratios numerically: the
//! second-derivative bound constant, a radial Hardy-type inequality (whose
//! constant-function anomaly is flagged, never asserted), and discrete
//! local-energy norms over dyadic spacetime regions. Diagnostics report
//! fitted constants only; pass/fail judgements are left to refinement
//! stability.
//!
//! Radial coordinate convention: all regions, weights and measures below use
//! the grid's tortoise coordinate, which is the normalized radial coordinate
//! in the far region where these diagnostics apply.

use crate::evolution::{NullGrid, ObserverSeries};
use crate::jbracket;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    /// Field magnitude below the noise floor: the fit is refused, not
    /// fabricated.
    #[error(
        "floor error: |phi| = {value:.3e} at t = {t:.3} is within 10x the noise floor {floor:.3e}"
    )]
    Floor { t: f64, value: f64, floor: f64 },
    #[error("window error: {0}")]
    Window(String),
    #[error("region error: {0}")]
    Region(String),
    #[error("coverage error: {0}")]
    Coverage(String),
}

/// How a decay exponent was extracted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FitMethod {
    #[serde(rename = "log-log-ls")]
    LogLogLs,
    #[serde(rename = "local-index")]
    LocalIndex,
}

/// A fitted local power law `|phi| ~ t^exponent` on a window.
#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub window: (f64, f64),
    /// Maximum deviation of `ln|phi|` from the fit line (log-log-ls), or the
    /// spread of the local index across the window (local-index).
    pub residual: f64,
    pub method: FitMethod,
}

/// Discrete norm value on one dyadic region.
#[derive(Debug, Clone, Serialize)]
pub struct RegionNorm {
    pub region: String,
    pub value: f64,
}

fn interp_log_abs(series: &ObserverSeries, t: f64, floor_abs: f64) -> Result<f64, AnalysisError> {
    let samples = &series.samples;
    if samples.len() < 2 || t < samples[0].t || t > samples[samples.len() - 1].t {
        return Err(AnalysisError::Window(format!(
            "t = {t} outside the sampled range [{}, {}]",
            samples.first().map(|s| s.t).unwrap_or(f64::NAN),
            samples.last().map(|s| s.t).unwrap_or(f64::NAN)
        )));
    }
    let idx = samples
        .partition_point(|s| s.t < t)
        .min(samples.len() - 1)
        .max(1);
    let (a, b) = (&samples[idx - 1], &samples[idx]);
    for s in [a, b] {
        if s.phi.abs() <= 10.0 * floor_abs {
            return Err(AnalysisError::Floor {
                t: s.t,
                value: s.phi.abs(),
                floor: floor_abs,
            });
        }
    }
    let w = if b.t > a.t {
        (t - a.t) / (b.t - a.t)
    } else {
        0.0
    };
    Ok((1.0 - w) * a.phi.abs().ln() + w * b.phi.abs().ln())
}

/// Local power index `p(t) = d ln|phi| / d ln t`, centred over a stencil
/// spanning half a decade in `t`.
pub fn local_power_index(
    series: &ObserverSeries,
    t: f64,
    floor_abs: f64,
) -> Result<f64, AnalysisError> {
    let h = 10.0_f64.powf(0.25);
    let (t1, t2) = (t / h, t * h);
    let l1 = interp_log_abs(series, t1, floor_abs)?;
    let l2 = interp_log_abs(series, t2, floor_abs)?;
    Ok((l2 - l1) / (t2.ln() - t1.ln()))
}

/// Local index sampled at `n` log-spaced times inside the window.
pub fn power_index_profile(
    series: &ObserverSeries,
    window: (f64, f64),
    n: usize,
    floor_abs: f64,
) -> Result<Vec<(f64, f64)>, AnalysisError> {
    let (lo, hi) = window;
    if !(hi > lo && lo > 0.0) || n < 2 {
        return Err(AnalysisError::Window(format!("bad window [{lo}, {hi}]")));
    }
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let t = lo * (hi / lo).powf(k as f64 / (n - 1) as f64);
        out.push((t, local_power_index(series, t, floor_abs)?));
    }
    Ok(out)
}

/// Least-squares power-law fit of `ln|phi|` versus `ln t` over a window.
pub fn fit_loglog(
    series: &ObserverSeries,
    window: (f64, f64),
    floor_abs: f64,
) -> Result<DecayFit, AnalysisError> {
    let pts: Vec<(f64, f64)> = series
        .samples
        .iter()
        .filter(|s| s.t >= window.0 && s.t <= window.1 && s.t > 0.0)
        .map(|s| (s.t, s.phi.abs()))
        .collect();
    if pts.len() < 8 {
        return Err(AnalysisError::Window(format!(
            "only {} samples inside [{}, {}]",
            pts.len(),
            window.0,
            window.1
        )));
    }
    let below = pts.iter().filter(|(_, a)| *a <= 10.0 * floor_abs).count();
    if below * 5 > pts.len() {
        let worst = pts
            .iter()
            .cloned()
            .fold((window.0, f64::INFINITY), |acc, (t, a)| {
                if a < acc.1 {
                    (t, a)
                } else {
                    acc
                }
            });
        return Err(AnalysisError::Floor {
            t: worst.0,
            value: worst.1,
            floor: floor_abs,
        });
    }
    let data: Vec<(f64, f64)> = pts
        .iter()
        .filter(|(_, a)| *a > 10.0 * floor_abs)
        .map(|(t, a)| (t.ln(), a.ln()))
        .collect();
    let n = data.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in &data {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let icept = (sy - slope * sx) / n;
    let mut residual: f64 = 0.0;
    for &(x, y) in &data {
        residual = residual.max((y - slope * x - icept).abs());
    }
    Ok(DecayFit {
        exponent: slope,
        window,
        residual,
        method: FitMethod::LogLogLs,
    })
}

/// Local-index summary over a window: the median index over log-spaced
/// samples, with the spread as residual.
pub fn fit_local_index(
    series: &ObserverSeries,
    window: (f64, f64),
    floor_abs: f64,
) -> Result<DecayFit, AnalysisError> {
    let profile = power_index_profile(series, window, 9, floor_abs)?;
    let mut ps: Vec<f64> = profile.iter().map(|&(_, p)| p).collect();
    ps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = ps[ps.len() / 2];
    let spread = ps.iter().map(|p| (p - median).abs()).fold(0.0f64, f64::max);
    Ok(DecayFit {
        exponent: median,
        window,
        residual: spread,
        method: FitMethod::LocalIndex,
    })
}

/// Outcome of an upper-bound verification `|phi| <~ <t>^-(1+kappa)`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    /// `sup` of the weighted field over the window.
    pub c_star: f64,
    /// Running sup at the three-quarter point of the window.
    pub sup_three_quarter: f64,
    /// Stabilization verdict: the running sup grew by at most 5% over the
    /// last quarter of the window.
    pub bounded: bool,
    pub kappa: f64,
    pub window: (f64, f64),
}

/// Track `sup <t>^(1+kappa) |phi|` over a window and flag whether the
/// running sup has stabilized.
pub fn bound_verification(
    series: &ObserverSeries,
    kappa: f64,
    window: (f64, f64),
) -> Result<BoundCheck, AnalysisError> {
    let (lo, hi) = window;
    let t_three_quarter = lo + 0.75 * (hi - lo);
    let mut running: f64 = 0.0;
    let mut at_three_quarter: f64 = 0.0;
    let mut count = 0usize;
    for s in &series.samples {
        if s.t < lo || s.t > hi {
            continue;
        }
        count += 1;
        let w = jbracket(s.t).powf(1.0 + kappa) * s.phi.abs();
        if w > running {
            running = w;
        }
        if s.t <= t_three_quarter {
            at_three_quarter = running;
        }
    }
    if count < 50 {
        return Err(AnalysisError::Window(format!(
            "bound verification needs >= 50 samples in the window, got {count}"
        )));
    }
    let bounded = running <= 1.05 * at_three_quarter && at_three_quarter > 0.0;
    Ok(BoundCheck {
        c_star: running,
        sup_three_quarter: at_three_quarter,
        bounded,
        kappa,
        window,
    })
}

/// Spacetime region in grid coordinates for the diagnostics below.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RegionSpec {
    pub t_range: (f64, f64),
    pub rstar_range: (f64, f64),
}

/// Fitted constant of the second-derivative pointwise bound
/// `|d^2 phi| <= C2 [ mu^-1 |d phi_{<=1}| + mu^-1 <r>^-1 |phi_{<=2}| ]`,
/// `mu = min(<r>, <u>)`, with vector fields `{S}` (rotations vanish in
/// spherical symmetry) and derivatives by grid differencing.
#[derive(Debug, Clone, Serialize)]
pub struct SecondDerivReport {
    pub c2: f64,
    pub region: RegionSpec,
    pub samples: usize,
    pub max_at: (f64, f64),
}

pub fn second_derivative_bound_check(
    grid: &NullGrid,
    region: RegionSpec,
    r1: f64,
) -> Result<SecondDerivReport, AnalysisError> {
    if region.rstar_range.0 < 2.0 * r1 {
        return Err(AnalysisError::Region(format!(
            "region starts at r* = {} inside 2 R1 = {}",
            region.rstar_range.0,
            2.0 * r1
        )));
    }
    let (rows, cols) = (grid.stored_rows(), grid.stored_cols());
    // S phi needs +-1 nodes and d(S phi) another +-1.
    let margin = 2usize;
    let mut c2: f64 = 0.0;
    let mut max_at = (f64::NAN, f64::NAN);
    let mut samples = 0usize;

    for i in rows.0 + margin..rows.1.saturating_sub(margin) {
        for j in cols.0 + margin..cols.1.saturating_sub(margin) {
            let t = grid.t(i, j);
            let rho = grid.rstar(i, j);
            if t < region.t_range.0
                || t > region.t_range.1
                || rho < region.rstar_range.0
                || rho > region.rstar_range.1
            {
                continue;
            }
            let (ptt, ptr, prr) = grid.phi_second_derivs(i, j);
            let num = ptt.abs().max(ptr.abs()).max(prr.abs());

            let (pt, prs) = grid.phi_derivs(i, j);
            let d_phi = pt.abs() + prs.abs();

            // First derivatives of S phi by centred differences of the
            // S phi field.
            let s_t = (grid.s_phi(i + 1, j) - grid.s_phi(i - 1, j)) / (2.0 * grid.du)
                + (grid.s_phi(i, j + 1) - grid.s_phi(i, j - 1)) / (2.0 * grid.dv);
            let s_r = (grid.s_phi(i, j + 1) - grid.s_phi(i, j - 1)) / (2.0 * grid.dv)
                - (grid.s_phi(i + 1, j) - grid.s_phi(i - 1, j)) / (2.0 * grid.du);
            let d_sphi = s_t.abs() + s_r.abs();

            // phi_{<=2} via repeated scaling fields.
            let sphi = grid.s_phi(i, j);
            let ss = {
                let wt = (grid.s_phi(i + 1, j) - grid.s_phi(i - 1, j)) / (2.0 * grid.du)
                    + (grid.s_phi(i, j + 1) - grid.s_phi(i, j - 1)) / (2.0 * grid.dv);
                let wr = (grid.s_phi(i, j + 1) - grid.s_phi(i, j - 1)) / (2.0 * grid.dv)
                    - (grid.s_phi(i + 1, j) - grid.s_phi(i - 1, j)) / (2.0 * grid.du);
                t * wt + grid.r(i, j) * wr / grid.lapse(i, j)
            };
            let low_order = grid.phi(i, j).abs() + sphi.abs() + ss.abs();

            let u = t - rho;
            let mu = jbracket(rho).min(jbracket(u));
            let den = (d_phi + d_sphi) / mu + low_order / (mu * jbracket(rho));
            samples += 1;
            if den > 0.0 {
                let ratio = num / den;
                if ratio > c2 {
                    c2 = ratio;
                    max_at = (t, rho);
                }
            }
        }
    }
    if samples == 0 {
        return Err(AnalysisError::Region(
            "region contains no stored grid nodes".into(),
        ));
    }
    Ok(SecondDerivReport {
        c2,
        region,
        samples,
        max_at,
    })
}

/// Field values along a constant-`t` radial line.
#[derive(Debug, Clone)]
pub struct RadialSlice {
    pub r: Vec<f64>,
    pub f: Vec<f64>,
}

impl RadialSlice {
    pub fn from_fn(r_lo: f64, r_hi: f64, n: usize, f: impl Fn(f64) -> f64) -> Self {
        let mut rv = Vec::with_capacity(n);
        let mut fv = Vec::with_capacity(n);
        for k in 0..n {
            let r = r_lo + (r_hi - r_lo) * k as f64 / (n - 1) as f64;
            rv.push(r);
            fv.push(f(r));
        }
        Self { r: rv, f: fv }
    }
}

/// Both sides of the radial Hardy-type comparison at time `t`:
///
/// ```text
/// LHS = int_{t/2}^{3t/2} f^2 / <t - r>^2 dr
/// RHS = int_{t/4}^{7t/4} (d_r f)^2 dr
///     + <t>^-2 ( int_{t/4}^{t/2} f^2 dr + int_{3t/2}^{7t/4} f^2 dr )
/// ```
///
/// The ratio is reported, never asserted: for constant fields the printed
/// inequality fails by orders of magnitude (see `anomalous`), which is the
/// recorded open anomaly of this diagnostic.
#[derive(Debug, Clone, Serialize)]
pub struct HardyCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: Option<f64>,
    pub empty: bool,
    pub anomalous: bool,
}

/// Ratio above which the `<~` reading is flagged as anomalous.
pub const HARDY_ANOMALY_RATIO: f64 = 100.0;

fn trapz_clipped(r: &[f64], g: &[f64], a: f64, b: f64) -> f64 {
    let mut total = 0.0;
    for k in 0..r.len() - 1 {
        let (r0, r1) = (r[k], r[k + 1]);
        if r1 <= a || r0 >= b {
            continue;
        }
        let (g0, g1) = (g[k], g[k + 1]);
        let lo = r0.max(a);
        let hi = r1.min(b);
        let gv = |x: f64| {
            let w = if r1 > r0 { (x - r0) / (r1 - r0) } else { 0.0 };
            (1.0 - w) * g0 + w * g1
        };
        total += 0.5 * (gv(lo) + gv(hi)) * (hi - lo);
    }
    total
}

pub fn hardy_check(slice: &RadialSlice, t: f64) -> Result<HardyCheck, AnalysisError> {
    let n = slice.r.len();
    if n < 8 || slice.f.len() != n {
        return Err(AnalysisError::Coverage("slice too short".into()));
    }
    let (lo, hi) = (slice.r[0], slice.r[n - 1]);
    if lo > t / 4.0 || hi < 7.0 * t / 4.0 {
        return Err(AnalysisError::Coverage(format!(
            "slice [{lo}, {hi}] does not cover [t/4, 7t/4] = [{}, {}]",
            t / 4.0,
            7.0 * t / 4.0
        )));
    }
    if slice.f.iter().all(|&x| x == 0.0) {
        return Ok(HardyCheck {
            lhs: 0.0,
            rhs: 0.0,
            ratio: None,
            empty: true,
            anomalous: false,
        });
    }

    let weighted: Vec<f64> = slice
        .r
        .iter()
        .zip(&slice.f)
        .map(|(&r, &f)| f * f / (jbracket(t - r) * jbracket(t - r)))
        .collect();
    let lhs = trapz_clipped(&slice.r, &weighted, t / 2.0, 3.0 * t / 2.0);

    let mut dsq = vec![0.0; n];
    for k in 1..n - 1 {
        let d = (slice.f[k + 1] - slice.f[k - 1]) / (slice.r[k + 1] - slice.r[k - 1]);
        dsq[k] = d * d;
    }
    dsq[0] = dsq[1];
    dsq[n - 1] = dsq[n - 2];
    let fsq: Vec<f64> = slice.f.iter().map(|&f| f * f).collect();

    let rhs = trapz_clipped(&slice.r, &dsq, t / 4.0, 7.0 * t / 4.0)
        + (trapz_clipped(&slice.r, &fsq, t / 4.0, t / 2.0)
            + trapz_clipped(&slice.r, &fsq, 3.0 * t / 2.0, 7.0 * t / 4.0))
            / (jbracket(t) * jbracket(t));

    let ratio = if rhs > 0.0 { Some(lhs / rhs) } else { None };
    let anomalous = ratio.map(|x| x > HARDY_ANOMALY_RATIO).unwrap_or(lhs > 0.0);
    Ok(HardyCheck {
        lhs,
        rhs,
        ratio,
        empty: false,
        anomalous,
    })
}

/// Discrete local-energy norms over the dyadic regions at time scale `T`.
#[derive(Debug, Clone, Serialize)]
pub struct LeNormReport {
    /// `<r>^-1/2 phi` L2 pieces on each nonempty `C_T^R` and `C_T^U`.
    pub regions: Vec<RegionNorm>,
    /// Same piece on the union region `C_T^{<3T/4}`.
    pub union_below_three_quarters: f64,
    /// `sup_R ||<r>^-1/2 d phi|| + sup_R ||<r>^-3/2 phi||`.
    pub le1_aggregate: f64,
    /// `sup |phi| <v> / <u>^1/2` over the slab divided by the aggregate.
    pub prop_ratio: f64,
    pub t_dyadic: f64,
}

/// Dyadic base for the regions. Exponent extraction is base-independent;
/// base 2 keeps the ladder aligned with the lattice.
pub const DYADIC_BASE: f64 = 2.0;

pub fn le_norms(grid: &NullGrid, t_dyadic: f64) -> Result<LeNormReport, AnalysisError> {
    let a = DYADIC_BASE;
    let (rows, cols) = (grid.stored_rows(), grid.stored_cols());
    if rows.1 - rows.0 < 3 || cols.1 - cols.0 < 3 {
        return Err(AnalysisError::Coverage("grid window too small".into()));
    }
    // Coverage: the slab {T <= t <= aT, 0 <= r* <= t} must be stored with a
    // one-node margin for derivatives.
    let need_u = (0.0, a * t_dyadic);
    let need_v = (t_dyadic, 2.0 * a * t_dyadic);
    let have_u = (grid.u(rows.0), grid.u(rows.1 - 1));
    let have_v = (grid.v(cols.0), grid.v(cols.1 - 1));
    if have_u.0 > need_u.0 || have_u.1 < need_u.1 || have_v.0 > need_v.0 || have_v.1 < need_v.1 {
        return Err(AnalysisError::Coverage(format!(
            "stored window u in [{:.1}, {:.1}], v in [{:.1}, {:.1}] does not cover the slab at T = {t_dyadic}",
            have_u.0, have_u.1, have_v.0, have_v.1
        )));
    }

    let measure = grid.du * grid.dv / 2.0 * 4.0 * std::f64::consts::PI;
    let bin_of = |x: f64| -> Option<usize> {
        // index 0: (0, a); index k: (a^k, a^(k+1)).
        if x <= 0.0 {
            return None;
        }
        if x < a {
            return Some(0);
        }
        Some(x.ln().div_euclid(a.ln()) as usize)
    };

    let mut r_half: Vec<f64> = Vec::new(); // sum of w phi^2 / <rho> per R-bin
    let mut r_grad: Vec<f64> = Vec::new(); // sum of w |dphi|^2 / <rho>
    let mut r_low: Vec<f64> = Vec::new(); // sum of w phi^2 / <rho>^3
    let mut u_half: Vec<f64> = Vec::new();
    let mut sup_weighted: f64 = 0.0;

    let bump = |v: &mut Vec<f64>, k: usize, add: f64| {
        if v.len() <= k {
            v.resize(k + 1, 0.0);
        }
        v[k] += add;
    };

    for i in rows.0 + 1..rows.1 - 1 {
        for j in cols.0 + 1..cols.1 - 1 {
            let t = grid.t(i, j);
            if t < t_dyadic || t > a * t_dyadic {
                continue;
            }
            let rho = grid.rstar(i, j);
            let u = t - rho;
            let phi = grid.phi(i, j);
            let w = measure * rho * rho;

            sup_weighted = sup_weighted.max(phi.abs() * jbracket(t + rho) / jbracket(u).sqrt());

            if rho > 0.0 && rho <= t {
                if let Some(k) = bin_of(rho) {
                    let jb = jbracket(rho);
                    bump(&mut r_half, k, w * phi * phi / jb);
                    let (pt, prs) = grid.phi_derivs(i, j);
                    bump(&mut r_grad, k, w * (pt * pt + prs * prs) / jb);
                    bump(&mut r_low, k, w * phi * phi / (jb * jb * jb));
                }
            }
            if let Some(k) = bin_of(u.abs()) {
                bump(&mut u_half, k, w * phi * phi / jbracket(rho));
            }
        }
    }

    let mut regions = Vec::new();
    for (k, &s) in r_half.iter().enumerate() {
        if s > 0.0 {
            regions.push(RegionNorm {
                region: format!("C_T^R T={t_dyadic} R={}", a.powi(k as i32)),
                value: s.sqrt(),
            });
        }
    }
    for (k, &s) in u_half.iter().enumerate() {
        if s > 0.0 {
            regions.push(RegionNorm {
                region: format!("C_T^U T={t_dyadic} U={}", a.powi(k as i32)),
                value: s.sqrt(),
            });
        }
    }

    // Union over R < 3T/8: the additive pieces sum in squares.
    let r_cut = 3.0 * t_dyadic / 8.0;
    let union_sq: f64 = r_half
        .iter()
        .enumerate()
        .filter(|(k, _)| a.powi(*k as i32) < r_cut)
        .map(|(_, &s)| s)
        .sum();

    let sup_or_zero = |v: &[f64]| v.iter().cloned().fold(0.0f64, f64::max).sqrt();
    let le1 = sup_or_zero(&r_grad) + sup_or_zero(&r_low);
    let prop_ratio = if le1 > 0.0 {
        sup_weighted / le1
    } else {
        f64::INFINITY
    };

    Ok(LeNormReport {
        regions,
        union_below_three_quarters: union_sq.sqrt(),
        le1_aggregate: le1,
        prop_ratio,
        t_dyadic,
    })
}

/// Richardson triple: `||coarse - medium|| / ||medium - fine||` over shared
/// times in the window, using RMS of the pointwise differences at the coarse
/// sample times. A second-order scheme gives a ratio near 4 for halved steps.
pub fn self_convergence_ratio(
    coarse: &ObserverSeries,
    medium: &ObserverSeries,
    fine: &ObserverSeries,
    window: (f64, f64),
) -> Result<f64, AnalysisError> {
    let interp = |s: &ObserverSeries, t: f64| -> Option<f64> {
        let n = s.samples.len();
        if n < 2 || t < s.samples[0].t || t > s.samples[n - 1].t {
            return None;
        }
        let idx = s.samples.partition_point(|x| x.t < t).min(n - 1).max(1);
        let (a, b) = (&s.samples[idx - 1], &s.samples[idx]);
        let w = if b.t > a.t {
            (t - a.t) / (b.t - a.t)
        } else {
            0.0
        };
        Some((1.0 - w) * a.phi + w * b.phi)
    };
    let mut d12 = 0.0;
    let mut d23 = 0.0;
    let mut count = 0usize;
    for s in &coarse.samples {
        if s.t < window.0 || s.t > window.1 {
            continue;
        }
        let (Some(m), Some(f)) = (interp(medium, s.t), interp(fine, s.t)) else {
            continue;
        };
        d12 += (s.phi - m) * (s.phi - m);
        d23 += (m - f) * (m - f);
        count += 1;
    }
    if count < 16 {
        return Err(AnalysisError::Window(format!(
            "convergence window holds only {count} shared samples"
        )));
    }
    if d23 == 0.0 {
        return Err(AnalysisError::Window(
            "medium and fine runs identical".into(),
        ));
    }
    Ok((d12 / count as f64).sqrt() / ((d23 / count as f64).sqrt()))
}
