//! Kerr metric in Boyer-Lindquist coordinates: horizon roots and covariant /
//! contravariant component tables.

use super::{GeometryError, MetricParams};
use serde::Serialize;

/// Horizon radii `(r_minus, r_plus) = M -+ sqrt(M^2 - a^2)`, the two roots of
/// `Delta(r) = r(r - 2M) + a^2`.
pub fn kerr_horizons(params: &MetricParams) -> Result<(f64, f64), GeometryError> {
    let (m, a) = (params.mass, params.spin);
    if a >= m {
        return Err(GeometryError::NoHorizon { a, m });
    }
    let root = (m * m - a * a).sqrt();
    Ok((m - root, m + root))
}

/// Covariant and contravariant Boyer-Lindquist component tables at `(r, theta)`,
/// index order `(t, r, theta, phi)`.
#[derive(Debug, Clone, Serialize)]
pub struct KerrComponents {
    pub g_cov: [[f64; 4]; 4],
    pub g_inv: [[f64; 4]; 4],
    pub delta: f64,
    pub rho2: f64,
}

impl KerrComponents {
    /// Coefficient of `dt dphi` in the line element, i.e. `2 g_{t phi}`.
    ///
    /// Some references quote the line element with this combined coefficient
    /// rather than the matrix entry; the matrix entry used here is fixed by
    /// requiring `g . g^{-1} = Id` against the standard inverse table.
    pub fn dtdphi_line_element_coefficient(&self) -> f64 {
        2.0 * self.g_cov[0][3]
    }

    /// `max |g . g^{-1} - Id|` over all 16 entries.
    pub fn inverse_identity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let mut dot = 0.0;
                for k in 0..4 {
                    dot += self.g_cov[i][k] * self.g_inv[k][j];
                }
                let id = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - id).abs());
            }
        }
        worst
    }
}

/// Evaluate the Boyer-Lindquist tables. Fails on `Delta = 0` (horizon) and on
/// the axis `sin theta = 0`, where the inverse `phi phi` component is singular.
pub fn kerr_metric_components(
    params: &MetricParams,
    r: f64,
    theta: f64,
) -> Result<KerrComponents, GeometryError> {
    let (m, a) = (params.mass, params.spin);
    let sin = theta.sin();
    let cos = theta.cos();
    let sin2 = sin * sin;
    let delta = r * (r - 2.0 * m) + a * a;
    let rho2 = r * r + a * a * cos * cos;
    if delta == 0.0 {
        return Err(GeometryError::Degenerate(format!("Delta(r = {r}) = 0")));
    }
    if sin2 == 0.0 {
        return Err(GeometryError::Degenerate(format!("axis theta = {theta}")));
    }
    if rho2 == 0.0 {
        return Err(GeometryError::Degenerate(
            "rho^2 = 0 (ring singularity)".into(),
        ));
    }

    let r2a2 = r * r + a * a;
    let big_a = r2a2 * r2a2 - a * a * delta * sin2;

    let mut g = [[0.0; 4]; 4];
    g[0][0] = -(delta - a * a * sin2) / rho2;
    g[0][3] = -2.0 * a * m * r * sin2 / rho2;
    g[3][0] = g[0][3];
    g[1][1] = rho2 / delta;
    g[2][2] = rho2;
    g[3][3] = big_a * sin2 / rho2;

    let mut ginv = [[0.0; 4]; 4];
    ginv[0][0] = -big_a / (rho2 * delta);
    ginv[0][3] = -2.0 * a * m * r / (rho2 * delta);
    ginv[3][0] = ginv[0][3];
    ginv[1][1] = delta / rho2;
    ginv[2][2] = 1.0 / rho2;
    ginv[3][3] = (delta - a * a * sin2) / (rho2 * delta * sin2);

    Ok(KerrComponents {
        g_cov: g,
        g_inv: ginv,
        delta,
        rho2,
    })
}
