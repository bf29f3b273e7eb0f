//! Backward-light-cone integral calculus.
//!
//! The object of interest is the weighted area integral
//!
//! ```text
//! I(t, r) = (4 pi r)^-1  integral over D_tr of  rho h(s, rho) ds drho,
//! h(s, rho) = <rho>^-alpha <s + rho>^-beta <s - rho>^-eta,
//! ```
//!
//! where `D_tr` is the backward light cone (a diamond in `(s, rho)`) with
//! apex `(t, r)`. The source-to-solution conversion table predicts
//! `I ~ <r>^-1 <u>^-(alpha + beta + eta~ - 1)` for `u = t - r` large, with
//! the case split `eta~ = eta - 2` (`eta < 1`) / `-1` (`eta > 1`).
//! [`cone_quadrature`] evaluates `I` by a midpoint rule on a uniform
//! `(s, rho)` lattice with exact clipped areas on boundary cells, and
//! [`fit_cone_exponents`] extracts the observed exponents along sample paths.

use crate::jbracket;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LightconeError {
    /// The exponent table is defined for `eta < 1` and `eta > 1` only.
    #[error("ambiguous eta: the conversion table defines no branch at eta = 1")]
    AmbiguousEta,
    #[error("invalid cone weight: {0}")]
    InvalidWeight(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Refinement did not stabilize within the cell budget.
    #[error("resolution error: change {change:.3e} still above {tol:.1e} at {cells} cells")]
    Resolution { change: f64, tol: f64, cells: usize },
}

/// Decay exponents of the cone weight `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeWeight {
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
}

impl ConeWeight {
    pub fn new(alpha: f64, beta: f64, eta: f64) -> Result<Self, LightconeError> {
        if !(alpha > 2.0 && alpha < 3.0) {
            return Err(LightconeError::InvalidWeight(format!(
                "alpha = {alpha} outside (2, 3)"
            )));
        }
        if !(beta >= 0.0) {
            return Err(LightconeError::InvalidWeight(format!(
                "beta = {beta} must be >= 0"
            )));
        }
        if !(eta >= -0.5) {
            return Err(LightconeError::InvalidWeight(format!(
                "eta = {eta} must be >= -1/2"
            )));
        }
        if eta == 1.0 {
            return Err(LightconeError::AmbiguousEta);
        }
        Ok(Self { alpha, beta, eta })
    }

    #[inline]
    pub fn eval(&self, s: f64, rho: f64) -> f64 {
        let a = jbracket(rho).powf(-self.alpha);
        let b = if self.beta == 0.0 {
            1.0
        } else {
            jbracket(s + rho).powf(-self.beta)
        };
        let e = jbracket(s - rho).powf(-self.eta);
        a * b * e
    }
}

/// Case-split exponent `eta~`: `eta - 2` for `eta < 1`, `-1` for `eta > 1`.
/// The value `eta = 1` belongs to neither branch and must be perturbed by
/// the caller.
pub fn eta_tilde(eta: f64) -> Result<f64, LightconeError> {
    if eta == 1.0 {
        Err(LightconeError::AmbiguousEta)
    } else if eta < 1.0 {
        Ok(eta - 2.0)
    } else {
        Ok(-1.0)
    }
}

/// Exponent pair `(p_r, p_u) = (1, alpha + beta + eta~ - 1)` predicted by the
/// conversion table.
pub fn predicted_exponents(w: &ConeWeight) -> Result<(f64, f64), LightconeError> {
    Ok((1.0, w.alpha + w.beta + eta_tilde(w.eta)? - 1.0))
}

/// A converged quadrature value at one apex.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConeIntegral {
    pub t: f64,
    pub r: f64,
    pub value: f64,
    /// Total lattice cells of the accepted refinement level.
    pub cells: usize,
    /// Relative change at the accepted refinement step.
    pub last_change: f64,
}

const REFINE_TOL: f64 = 5e-3;
const MAX_CELLS: usize = 1 << 30;

/// Midpoint quadrature of `I(t, r)` on a uniform lattice over the bounding
/// box (equal spacing in `s` and `rho`), refined by quadrupling the cell
/// count until consecutive values agree to 0.5%.
///
/// `cells` is the initial cell budget (at least `256^2`); the spacing is
/// `h = sqrt(t (t + r) / cells)` in both directions. Equal spacing makes the
/// thin `<s - rho>`-ridge of large-`eta` weights a lattice-aligned Poisson
/// sum, which converges exponentially once `h` resolves it.
pub fn cone_quadrature(
    w: &ConeWeight,
    t: f64,
    r: f64,
    cells: usize,
) -> Result<ConeIntegral, LightconeError> {
    if !(t > r && r >= 1.0) {
        return Err(LightconeError::InvalidInput(format!(
            "need t > r >= 1, got t = {t}, r = {r}"
        )));
    }
    if cells < 256 * 256 {
        return Err(LightconeError::InvalidInput(format!(
            "need at least 256^2 cells, got {cells}"
        )));
    }
    let mut h = (t * (t + r) / cells as f64).sqrt();
    let mut prev = lattice_pass(w, t, r, h);
    loop {
        let next_h = 0.5 * h;
        let next_cells = (t / next_h) as usize * ((t + r) / next_h) as usize;
        let cur = lattice_pass(w, t, r, next_h);
        let change = if cur != 0.0 {
            ((cur - prev) / cur).abs()
        } else {
            (cur - prev).abs()
        };
        if change < REFINE_TOL {
            return Ok(ConeIntegral {
                t,
                r,
                value: cur,
                cells: next_cells,
                last_change: change,
            });
        }
        if 4 * next_cells > MAX_CELLS {
            return Err(LightconeError::Resolution {
                change,
                tol: REFINE_TOL,
                cells: next_cells,
            });
        }
        h = next_h;
        prev = cur;
    }
}

/// One midpoint pass at spacing `h` in both axes.
fn lattice_pass(w: &ConeWeight, t: f64, r: f64, h: f64) -> f64 {
    // Bounding box of the diamond: s in [0, t], rho in [0, t + r].
    let n_s = (t / h).ceil() as usize;
    let n_rho = ((t + r) / h).ceil() as usize;
    let hs = h;
    let hrho = h;
    let cell_area = hs * hrho;

    // Half-planes a*s + b*rho <= c cutting the diamond out of the box.
    let planes = [
        (1.0, -1.0, t - r),  // s - rho <= t - r
        (-1.0, 1.0, t + r),  // rho - s <= t + r
        (1.0, 1.0, t + r),   // s + rho <= t + r
        (-1.0, -1.0, r - t), // -(s + rho) <= -(t - r)
    ];

    // Rows are independent; evaluate them in parallel and reduce in a fixed
    // order so the value is deterministic.
    let row_totals: Vec<f64> = (0..n_rho)
        .into_par_iter()
        .map(|j| {
            let rho_c = (j as f64 + 0.5) * hrho;
            let rho_pow = rho_c * jbracket(rho_c).powf(-w.alpha);
            let (rho0, rho1) = (j as f64 * hrho, (j as f64 + 1.0) * hrho);
            let mut row = 0.0;
            for i in 0..n_s {
                let s_c = (i as f64 + 0.5) * hs;
                let (s0, s1) = (i as f64 * hs, (i as f64 + 1.0) * hs);

                // Corner classification against each half-plane.
                let mut fully_inside = true;
                let mut area = cell_area;
                for &(a, b, c) in &planes {
                    let vals = [
                        a * s0 + b * rho0,
                        a * s1 + b * rho0,
                        a * s0 + b * rho1,
                        a * s1 + b * rho1,
                    ];
                    let all_in = vals.iter().all(|&v| v <= c);
                    let all_out = vals.iter().all(|&v| v > c);
                    if all_out {
                        area = 0.0;
                        break;
                    }
                    if !all_in {
                        fully_inside = false;
                    }
                }
                if area == 0.0 {
                    continue;
                }
                if !fully_inside {
                    area = clipped_area(s0, s1, rho0, rho1, &planes);
                    if area == 0.0 {
                        continue;
                    }
                }

                let b = if w.beta == 0.0 {
                    1.0
                } else {
                    jbracket(s_c + rho_c).powf(-w.beta)
                };
                let e = jbracket(s_c - rho_c).powf(-w.eta);
                row += area * b * e;
            }
            row * rho_pow
        })
        .collect();
    row_totals.iter().sum::<f64>() / (4.0 * PI * r)
}

/// Exact area of a cell clipped by the half-planes (Sutherland-Hodgman).
fn clipped_area(s0: f64, s1: f64, rho0: f64, rho1: f64, planes: &[(f64, f64, f64); 4]) -> f64 {
    let mut poly: Vec<(f64, f64)> = vec![(s0, rho0), (s1, rho0), (s1, rho1), (s0, rho1)];
    let mut next: Vec<(f64, f64)> = Vec::with_capacity(8);
    for &(a, b, c) in planes {
        next.clear();
        let m = poly.len();
        if m == 0 {
            return 0.0;
        }
        for k in 0..m {
            let p = poly[k];
            let q = poly[(k + 1) % m];
            let fp = a * p.0 + b * p.1 - c;
            let fq = a * q.0 + b * q.1 - c;
            if fp <= 0.0 {
                next.push(p);
            }
            if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
                let w = fp / (fp - fq);
                next.push((p.0 + w * (q.0 - p.0), p.1 + w * (q.1 - p.1)));
            }
        }
        std::mem::swap(&mut poly, &mut next);
    }
    let m = poly.len();
    if m < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for k in 0..m {
        let p = poly[k];
        let q = poly[(k + 1) % m];
        twice += p.0 * q.1 - q.0 * p.1;
    }
    0.5 * twice.abs()
}

/// Sample path for the exponent fits: a `u`-sweep at fixed `r` and an
/// `r`-sweep at fixed `u = t - r`.
#[derive(Debug, Clone, Serialize)]
pub struct SamplePath {
    pub fixed_r: f64,
    pub u_values: Vec<f64>,
    pub fixed_u: f64,
    pub r_values: Vec<f64>,
    /// Initial lattice cells per `u`-sweep quadrature.
    pub cells_u: usize,
    /// Initial lattice cells per `r`-sweep quadrature.
    pub cells_r: usize,
}

impl SamplePath {
    /// Path for the exponent-table verification of one weight. The
    /// `u`-sweep sits at large fixed `r` so the sweep stays inside the
    /// regime `u <~ r` where the conversion-table exponent is sharp (the
    /// finite-cone correction `(u/(u+2r))^(alpha+beta-2)` decays slowest
    /// for small `alpha+beta`, hence the larger radius for ridge weights);
    /// the `r`-sweep hugs the cone. Initial budgets put the lattice spacing
    /// near the unit scale of the integrand's `rho ~ 1` and `s - rho ~ 1`
    /// features.
    pub fn for_weight(w: &ConeWeight) -> Self {
        let fixed_r: f64 = if w.eta > 1.0 { 8192.0 } else { 4096.0 };
        let u_max: f64 = 512.0;
        let t = fixed_r + u_max;
        // Initial spacing h = 2 for ridge weights (the gate walks it down),
        // h = 1 for corner-dominated ones.
        let h0 = if w.eta > 1.0 { 2.0 } else { 1.0 };
        let cells_u = ((t * (t + fixed_r)) / (h0 * h0)) as usize;
        Self {
            fixed_r,
            u_values: vec![32.0, 80.0, 203.0, 512.0],
            fixed_u: 4.0,
            r_values: vec![32.0, 64.0, 128.0, 256.0, 512.0],
            cells_u: cells_u.max(256 * 256),
            cells_r: 1 << 22,
        }
    }
}

/// Least-squares fit of the cone exponents along a sample path.
#[derive(Debug, Clone, Serialize)]
pub struct ConeExponentFit {
    pub weight: ConeWeight,
    /// Fitted `u`-exponent of `<r> I` at fixed `r` (sign convention: decay
    /// `<u>^-p_u` gives positive `p_u`).
    pub p_u: f64,
    pub p_u_residual: f64,
    /// Fitted `r`-exponent of `I` at fixed `u`.
    pub p_r: f64,
    pub p_r_residual: f64,
}

fn loglog_slope(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let mut residual: f64 = 0.0;
    for &(x, y) in points {
        residual = residual.max((y - slope * x - intercept).abs());
    }
    (slope, residual)
}

/// Fit `(p_r, p_u)` by log-log least squares over the sample path.
pub fn fit_cone_exponents(
    w: &ConeWeight,
    path: &SamplePath,
) -> Result<ConeExponentFit, LightconeError> {
    if path.u_values.len() < 2 || path.r_values.len() < 2 {
        return Err(LightconeError::InvalidInput(
            "sample path needs at least two points per sweep".into(),
        ));
    }
    let mut upoints = Vec::with_capacity(path.u_values.len());
    for &u in &path.u_values {
        let r = path.fixed_r;
        let integral = cone_quadrature(w, r + u, r, path.cells_u)?;
        upoints.push((jbracket(u).ln(), (jbracket(r) * integral.value).ln()));
    }
    let (slope_u, res_u) = loglog_slope(&upoints);

    let mut rpoints = Vec::with_capacity(path.r_values.len());
    for &r in &path.r_values {
        let integral = cone_quadrature(w, r + path.fixed_u, r, path.cells_r)?;
        rpoints.push((jbracket(r).ln(), integral.value.ln()));
    }
    let (slope_r, res_r) = loglog_slope(&rpoints);

    Ok(ConeExponentFit {
        weight: *w,
        p_u: -slope_u,
        p_u_residual: res_u,
        p_r: -slope_r,
        p_r_residual: res_r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eta_tilde_table() {
        assert_relative_eq!(eta_tilde(2.0).unwrap(), -1.0);
        assert_relative_eq!(eta_tilde(0.5).unwrap(), -1.5);
        assert!(matches!(eta_tilde(1.0), Err(LightconeError::AmbiguousEta)));
    }

    #[test]
    fn predicted_exponent_arithmetic() {
        let cases = [
            ((2.5, 0.0, 2.0), 0.5),
            ((2.5, 0.5, 0.5), 0.5),
            ((2.75, 0.0, -0.5), -0.75),
            ((2.9, 0.0, 2.0), 0.9),
            ((2.5, 0.0, 0.5), 0.0),
        ];
        for ((a, b, e), want) in cases {
            let w = ConeWeight::new(a, b, e).unwrap();
            let (pr, pu) = predicted_exponents(&w).unwrap();
            assert_relative_eq!(pr, 1.0);
            assert_relative_eq!(pu, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn weight_invariants_enforced() {
        assert!(ConeWeight::new(2.0, 0.0, 2.0).is_err());
        assert!(ConeWeight::new(3.0, 0.0, 2.0).is_err());
        assert!(ConeWeight::new(2.5, -0.1, 2.0).is_err());
        assert!(ConeWeight::new(2.5, 0.0, -0.6).is_err());
        assert!(matches!(
            ConeWeight::new(2.5, 0.0, 1.0),
            Err(LightconeError::AmbiguousEta)
        ));
    }

    /// Independent oracle: adaptive Simpson in the rotated coordinates
    /// (xi, zeta) = (s - rho, s + rho), where the diamond is a rectangle
    /// intersected with {xi + zeta >= 0}.
    fn adaptive_oracle(w: &ConeWeight, t: f64, r: f64) -> f64 {
        fn simpson1d(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
            fn s(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
                (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
            }
            fn rec(
                f: &dyn Fn(f64) -> f64,
                a: f64,
                b: f64,
                whole: f64,
                tol: f64,
                depth: u32,
            ) -> f64 {
                let m = 0.5 * (a + b);
                let (l, r) = (s(f, a, m), s(f, m, b));
                if depth == 0 || (l + r - whole).abs() <= tol {
                    l + r
                } else {
                    rec(f, a, m, l, 0.5 * tol, depth - 1) + rec(f, m, b, r, 0.5 * tol, depth - 1)
                }
            }
            rec(f, a, b, s(f, a, b), tol, depth)
        }

        let (alpha, beta, eta) = (w.alpha, w.beta, w.eta);
        let inner = move |zeta: f64| {
            let lo = (-(t + r)).max(-zeta);
            let hi = t - r;
            if hi <= lo {
                return 0.0;
            }
            let f = move |xi: f64| {
                let rho = 0.5 * (zeta - xi);
                rho * jbracket(rho).powf(-alpha)
                    * jbracket(zeta).powf(-beta)
                    * jbracket(xi).powf(-eta)
            };
            simpson1d(&f, lo, hi, 1e-11, 28)
        };
        // Jacobian ds drho = dxi dzeta / 2.
        let outer = simpson1d(&|z| inner(z), t - r, t + r, 1e-10, 24);
        outer * 0.5 / (4.0 * PI * r)
    }

    #[test]
    fn quadrature_matches_adaptive_oracle() {
        let w = ConeWeight::new(2.5, 0.0, 2.0).unwrap();
        let (r, t) = (64.0, 192.0);
        let got = cone_quadrature(&w, t, r, 512 * 512).unwrap();
        let oracle = adaptive_oracle(&w, t, r);
        assert_relative_eq!(got.value, oracle, max_relative = 0.01);
    }

    #[test]
    fn quadrature_oracle_beta_and_negative_eta() {
        for w in [
            ConeWeight::new(2.5, 0.5, 0.5).unwrap(),
            ConeWeight::new(2.75, 0.0, -0.5).unwrap(),
        ] {
            let (r, t) = (48.0, 120.0);
            let got = cone_quadrature(&w, t, r, 256 * 256).unwrap();
            let oracle = adaptive_oracle(&w, t, r);
            assert_relative_eq!(got.value, oracle, max_relative = 0.01);
        }
    }

    #[test]
    fn near_cone_apex_stays_positive_and_accurate() {
        // The backward cone of an apex hugging the light cone (t = r + 1/2)
        // is still a fat diamond; the integral stays positive and matches
        // the independent oracle. (It does not vanish: the domain area is
        // O((t + r)^2) however small t - r gets.)
        let w = ConeWeight::new(2.5, 0.0, 2.0).unwrap();
        let sliver = cone_quadrature(&w, 64.5, 64.0, 256 * 256).unwrap().value;
        assert!(sliver > 0.0);
        let oracle = adaptive_oracle(&w, 64.5, 64.0);
        assert_relative_eq!(sliver, oracle, max_relative = 0.01);
    }

    #[test]
    fn positivity_and_monotonicity_in_exponents() {
        let base = ConeWeight::new(2.5, 0.2, 0.5).unwrap();
        let (t, r) = (100.0, 40.0);
        let v0 = cone_quadrature(&base, t, r, 256 * 256).unwrap().value;
        assert!(v0 > 0.0);
        for bumped in [
            ConeWeight::new(2.7, 0.2, 0.5).unwrap(),
            ConeWeight::new(2.5, 0.4, 0.5).unwrap(),
            ConeWeight::new(2.5, 0.2, 0.8).unwrap(),
        ] {
            let v = cone_quadrature(&bumped, t, r, 256 * 256).unwrap().value;
            assert!(v <= v0 * (1.0 + 1e-9), "{bumped:?}: {v} > {v0}");
        }
    }

    #[test]
    fn r_scaling_near_prediction() {
        // p_r = 1: <r> I at fixed u is nearly flat in r. The prediction is
        // sharp in the regime u <~ r, so the fixed u hugs the cone.
        let w = ConeWeight::new(2.5, 0.0, 2.0).unwrap();
        let u = 4.0;
        let a = cone_quadrature(&w, 128.0 + u, 128.0, 256 * 256)
            .unwrap()
            .value
            * jbracket(128.0);
        let b = cone_quadrature(&w, 256.0 + u, 256.0, 256 * 256)
            .unwrap()
            .value
            * jbracket(256.0);
        assert!((a - b).abs() / b.abs() < 0.10, "a = {a}, b = {b}");
    }
}
