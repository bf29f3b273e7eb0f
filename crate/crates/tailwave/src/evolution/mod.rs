//! Double-null characteristic evolution of the spherically reduced wave
//! equation on a Schwarzschild exterior.
//!
//! The field is evolved as `psi = r phi` on the null lattice
//! `u = t - r*`, `v = t + r*` (square cells, `du = dv`). One cell update is
//! the standard second-order diamond rule
//!
//! ```text
//! psi_N = psi_W + psi_E - psi_S - (du dv / 8) V_c (psi_W + psi_E)
//!                              + (du dv / 4) G_c
//! ```
//!
//! with the potential and source evaluated at the cell centre. Initial data
//! live on the ingoing segment `{u = 0}` as a profile in `v`; the left
//! boundary `{v = v0}` carries constant continuation. The march is
//! unconditionally stable (no CFL restriction arises on a characteristic
//! grid) and runs in `O(n_v)` memory with a three-row rolling window;
//! [`evolve_grid`] additionally stores a rectangular window of the field
//! for the diagnostics in [`crate::analysis`].
//!
//! The quasilinear source couples the damped coefficient profile to the
//! slowest-decaying derivative pair:
//! `G_c = r [H phi (LbarLbar phi) + c phi^2 (dtt phi)]` with `Lbar = 2 d_u`
//! on this grid convention, second derivatives by lagged centred
//! differences, and a short fixed-point refinement of each cell value.

use crate::coefficients::CoefficientProfile;
use crate::geometry::{areal_and_lapse, GeometryError, MetricParams};
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("invalid run spec: {0}")]
    InvalidSpec(String),
    #[error("domain error: {0}")]
    Domain(String),
    /// Initial data too narrow for the grid step.
    #[error("resolution error: sigma/dv = {ratio:.2} below the minimum 16")]
    Resolution { ratio: f64 },
    /// Non-finite field value; the last good row is carried for dumping.
    #[error(
        "blowup at row {i_u} (u = {u:.3}): last good row range [{min_psi:.3e}, {max_psi:.3e}]"
    )]
    Blowup {
        i_u: usize,
        u: f64,
        min_psi: f64,
        max_psi: f64,
        last_good_row: Vec<f64>,
    },
    /// Source stencil requested at a node that is not the north corner of
    /// an interior cell.
    #[error("stencil error: ({i}, {j}) is not an interior cell corner")]
    Stencil { i: usize, j: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Effective potential of the spherical-harmonic reduction:
/// `V_l = (1 - 2M/r)(l(l+1)/r^2 + 2M/r^3)`.
pub fn rw_potential(params: &MetricParams, r: f64, l: u32) -> Result<f64, EvolveError> {
    if params.spin != 0.0 {
        return Err(EvolveError::Domain("potential requires a = 0".into()));
    }
    if !(r > 2.0 * params.mass) {
        return Err(EvolveError::Domain(format!(
            "r = {r} must exceed 2M = {}",
            2.0 * params.mass
        )));
    }
    Ok(rw_potential_raw(params.mass, r, l))
}

/// Closed form of the reduction potential, also valid in the flat limit
/// `m = 0` where only the centrifugal term survives.
#[inline]
pub fn rw_potential_raw(m: f64, r: f64, l: u32) -> f64 {
    let ll1 = (l * (l + 1)) as f64;
    (1.0 - 2.0 * m / r) * (ll1 / (r * r) + 2.0 * m / (r * r * r))
}

/// One diamond-cell update. Pure arithmetic; the caller aborts on NaN.
#[inline]
pub fn diamond_step(
    psi_s: f64,
    psi_w: f64,
    psi_e: f64,
    v_c: f64,
    g_c: f64,
    du: f64,
    dv: f64,
) -> f64 {
    let we = psi_w + psi_e;
    we - psi_s - du * dv / 8.0 * v_c * we + du * dv / 4.0 * g_c
}

/// Shape of the initial pulse on `{u = 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DataProfile {
    #[serde(rename = "gaussian-bump")]
    GaussianBump,
    /// Smooth bump with exact support `[v_c - 3 sigma, v_c + 3 sigma]`.
    #[serde(rename = "compact-bump")]
    CompactBump,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub epsilon: f64,
    pub v_c: f64,
    pub sigma: f64,
    pub profile: DataProfile,
}

impl InitialData {
    pub fn new(
        epsilon: f64,
        v_c: f64,
        sigma: f64,
        profile: DataProfile,
    ) -> Result<Self, EvolveError> {
        if !(epsilon >= 0.0) {
            return Err(EvolveError::InvalidSpec(format!(
                "epsilon must be >= 0, got {epsilon}"
            )));
        }
        if !(sigma > 0.0) {
            return Err(EvolveError::InvalidSpec(format!(
                "sigma must be > 0, got {sigma}"
            )));
        }
        Ok(Self {
            epsilon,
            v_c,
            sigma,
            profile,
        })
    }

    pub fn eval(&self, v: f64) -> f64 {
        match self.profile {
            DataProfile::GaussianBump => {
                let x = (v - self.v_c) / self.sigma;
                self.epsilon * (-0.5 * x * x).exp()
            }
            DataProfile::CompactBump => {
                let x = (v - self.v_c) / (3.0 * self.sigma);
                if x.abs() < 1.0 {
                    self.epsilon * (1.0 - 1.0 / (1.0 - x * x)).exp()
                } else {
                    0.0
                }
            }
        }
    }
}

/// Null-lattice extents. `du = dv` by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub du: f64,
    pub u_max: f64,
    pub v0: f64,
    pub v_max: f64,
}

impl GridSpec {
    fn validate(&self) -> Result<(usize, usize), EvolveError> {
        if !(self.du > 0.0) {
            return Err(EvolveError::InvalidSpec(format!(
                "du must be > 0, got {}",
                self.du
            )));
        }
        if !(self.u_max > 0.0 && self.v_max > self.v0) {
            return Err(EvolveError::InvalidSpec("empty null domain".into()));
        }
        let n_u = (self.u_max / self.du).round() as usize;
        let n_v = ((self.v_max - self.v0) / self.du).round() as usize;
        if n_u < 4 || n_v < 4 {
            return Err(EvolveError::InvalidSpec(format!(
                "lattice too small: {n_u} x {n_v} cells"
            )));
        }
        Ok((n_u, n_v))
    }
}

/// Full description of one evolution run.
#[derive(Debug, Clone)]
pub struct EvolveSpec {
    pub params: MetricParams,
    pub profile: CoefficientProfile,
    pub data: InitialData,
    pub grid: GridSpec,
    /// Multipole index of the reduction; nonzero values are linear-only.
    pub multipole: u32,
    /// Tortoise radii of fixed observers.
    pub observers: Vec<f64>,
    /// Test hook: multiplies the reduction potential. Production value 1.
    pub potential_scale: f64,
    /// Fixed-point sweeps per quasilinear cell.
    pub source_passes: usize,
    /// Relative tolerance ending the fixed point early.
    pub source_rel_tol: f64,
}

impl EvolveSpec {
    pub fn new(
        params: MetricParams,
        profile: CoefficientProfile,
        data: InitialData,
        grid: GridSpec,
        observers: Vec<f64>,
    ) -> Self {
        Self {
            params,
            profile,
            data,
            grid,
            multipole: 0,
            observers,
            potential_scale: 1.0,
            source_passes: 2,
            source_rel_tol: 1e-10,
        }
    }

    fn is_linear(&self) -> bool {
        self.profile.h0 == 0.0 && self.profile.cubic_c == 0.0
    }
}

/// One observer sample.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Sample {
    pub t: f64,
    pub phi: f64,
    pub dt_phi: f64,
    pub s_phi: f64,
}

/// Time series of `(t, phi, d_t phi, S phi)` at fixed tortoise radius.
#[derive(Debug, Clone, Serialize)]
pub struct ObserverSeries {
    pub rstar_obs: f64,
    pub samples: Vec<Sample>,
}

/// Run facts recorded alongside the series.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub sup_phi: f64,
    pub min_psi: f64,
    pub max_psi: f64,
    pub wall_seconds: f64,
    pub n_u: usize,
    pub n_v: usize,
    /// Leading rows whose quasilinear stencils are one-sided or degraded.
    pub one_sided_rows: usize,
}

#[derive(Debug, Clone)]
pub struct EvolveOutput {
    pub series: Vec<ObserverSeries>,
    pub meta: RunMetadata,
}

/// Rectangular sub-window of the lattice kept in memory by [`evolve_grid`].
#[derive(Debug, Clone, Copy)]
pub struct StoreWindow {
    pub u_lo: f64,
    pub u_hi: f64,
    pub v_lo: f64,
    pub v_hi: f64,
}

impl StoreWindow {
    pub fn all() -> Self {
        Self {
            u_lo: f64::NEG_INFINITY,
            u_hi: f64::INFINITY,
            v_lo: f64::NEG_INFINITY,
            v_hi: f64::INFINITY,
        }
    }
}

/// The stored field on (a window of) the null lattice.
///
/// Node `(i, j)` sits at `u = i du`, `v = v0 + j dv`. With square cells the
/// tortoise radius depends only on the diagonal `k = j - i`, so `(r, lapse)`
/// are cached once per diagonal, solved in log-radius so deep-tail diagonals
/// degrade smoothly to the horizon values.
#[derive(Debug, Clone)]
pub struct NullGrid {
    pub params: MetricParams,
    pub du: f64,
    pub dv: f64,
    pub u_max: f64,
    pub v_max: f64,
    pub v0: f64,
    n_u: usize,
    n_v: usize,
    i0: usize,
    j0: usize,
    n_i: usize,
    n_j: usize,
    psi: Vec<f64>,
    r_diag: Vec<f64>,
    lapse_diag: Vec<f64>,
}

impl NullGrid {
    /// Full lattice size `(n_u, n_v)` in cells.
    pub fn lattice_size(&self) -> (usize, usize) {
        (self.n_u, self.n_v)
    }

    /// Stored row range as absolute row indices `[lo, hi)`.
    pub fn stored_rows(&self) -> (usize, usize) {
        (self.i0, self.i0 + self.n_i)
    }

    /// Stored column range as absolute column indices `[lo, hi)`.
    pub fn stored_cols(&self) -> (usize, usize) {
        (self.j0, self.j0 + self.n_j)
    }

    #[inline]
    pub fn u(&self, i: usize) -> f64 {
        i as f64 * self.du
    }

    #[inline]
    pub fn v(&self, j: usize) -> f64 {
        self.v0 + j as f64 * self.dv
    }

    #[inline]
    pub fn t(&self, i: usize, j: usize) -> f64 {
        0.5 * (self.u(i) + self.v(j))
    }

    #[inline]
    pub fn rstar(&self, i: usize, j: usize) -> f64 {
        0.5 * (self.v(j) - self.u(i))
    }

    #[inline]
    fn diag(&self, i: usize, j: usize) -> usize {
        j + self.n_u - i
    }

    #[inline]
    pub fn r(&self, i: usize, j: usize) -> f64 {
        self.r_diag[self.diag(i, j)]
    }

    /// Lapse `1 - 2M/r` on the node's diagonal.
    #[inline]
    pub fn lapse(&self, i: usize, j: usize) -> f64 {
        self.lapse_diag[self.diag(i, j)]
    }

    #[inline]
    pub fn psi(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i >= self.i0 && i < self.i0 + self.n_i);
        debug_assert!(j >= self.j0 && j < self.j0 + self.n_j);
        self.psi[(i - self.i0) * self.n_j + (j - self.j0)]
    }

    #[inline]
    pub fn phi(&self, i: usize, j: usize) -> f64 {
        self.psi(i, j) / self.r(i, j)
    }

    /// Centered first derivatives `(d_t phi, d_r* phi)` at an interior node.
    pub fn phi_derivs(&self, i: usize, j: usize) -> (f64, f64) {
        let pu = (self.phi(i + 1, j) - self.phi(i - 1, j)) / (2.0 * self.du);
        let pv = (self.phi(i, j + 1) - self.phi(i, j - 1)) / (2.0 * self.dv);
        (pu + pv, pv - pu)
    }

    /// Scaling-field value `S phi = t d_t phi + r d_r phi`.
    pub fn s_phi(&self, i: usize, j: usize) -> f64 {
        let (pt, prs) = self.phi_derivs(i, j);
        self.t(i, j) * pt + self.r(i, j) * prs / self.lapse(i, j)
    }

    /// Centered second derivatives `(phi_tt, phi_tr*, phi_r*r*)`.
    pub fn phi_second_derivs(&self, i: usize, j: usize) -> (f64, f64, f64) {
        let duu = self.du * self.du;
        let puu = (self.phi(i + 1, j) - 2.0 * self.phi(i, j) + self.phi(i - 1, j)) / duu;
        let pvv = (self.phi(i, j + 1) - 2.0 * self.phi(i, j) + self.phi(i, j - 1)) / duu;
        let puv = (self.phi(i + 1, j + 1) - self.phi(i + 1, j - 1) - self.phi(i - 1, j + 1)
            + self.phi(i - 1, j - 1))
            / (4.0 * duu);
        (puu + 2.0 * puv + pvv, pvv - puu, puu - 2.0 * puv + pvv)
    }

    /// Quasilinear source at the cell whose north corner is `(i, j)`,
    /// evaluated from stored values. Returns the source and a flag marking
    /// one-sided (degraded) stencils near the data rows.
    pub fn quasilinear_source(
        &self,
        profile: &CoefficientProfile,
        i: usize,
        j: usize,
    ) -> Result<(f64, bool), EvolveError> {
        if i < self.i0 + 1 || j < self.j0 + 1 || i >= self.i0 + self.n_i || j >= self.j0 + self.n_j
        {
            return Err(EvolveError::Stencil { i, j });
        }
        let t_c = self.t(i, j) - 0.5 * self.du;
        let h = profile.eval_h(t_c, self.rstar(i, j));
        Ok(source_stencil(
            |ii, jj| self.phi(ii, jj),
            i,
            j,
            i - self.i0,
            j - self.j0,
            self.du,
            h,
            profile.cubic_c,
            self.r(i, j),
        ))
    }

    /// Build a grid from a closure `psi(u, v)`; for tests and diagnostics.
    pub fn synthetic(
        params: MetricParams,
        du: f64,
        u_range: (f64, f64),
        v_range: (f64, f64),
        psi_fn: impl Fn(f64, f64) -> f64,
    ) -> Result<Self, EvolveError> {
        let (u_lo, u_hi) = u_range;
        let (v_lo, v_hi) = v_range;
        if !(du > 0.0 && u_hi > u_lo && v_hi > v_lo && u_lo >= 0.0) {
            return Err(EvolveError::InvalidSpec("bad synthetic range".into()));
        }
        let i0 = (u_lo / du).round() as usize;
        let n_u = (u_hi / du).round() as usize;
        let n_i = n_u - i0 + 1;
        let n_j = ((v_hi - v_lo) / du).round() as usize + 1;
        let n_v = n_j - 1;
        if n_i.saturating_mul(n_j) > 1 << 28 {
            return Err(EvolveError::InvalidSpec("synthetic grid too large".into()));
        }
        let mut r_diag = Vec::new();
        let mut lapse_diag = Vec::new();
        build_diag_cache(&mut r_diag, &mut lapse_diag, params, n_u, n_v, v_lo, du)?;
        let mut grid = NullGrid {
            params,
            du,
            dv: du,
            u_max: n_u as f64 * du,
            v_max: v_lo + n_v as f64 * du,
            v0: v_lo,
            n_u,
            n_v,
            i0,
            j0: 0,
            n_i,
            n_j,
            psi: vec![0.0; n_i * n_j],
            r_diag,
            lapse_diag,
        };
        for i in i0..=n_u {
            for j in 0..n_j {
                grid.psi[(i - i0) * n_j + j] = psi_fn(grid.u(i), grid.v(j));
            }
        }
        Ok(grid)
    }
}

fn build_diag_cache(
    r_diag: &mut Vec<f64>,
    lapse_diag: &mut Vec<f64>,
    params: MetricParams,
    n_u: usize,
    n_v: usize,
    v0: f64,
    du: f64,
) -> Result<(), EvolveError> {
    let count = n_u + n_v + 1;
    r_diag.clear();
    lapse_diag.clear();
    r_diag.reserve(count);
    lapse_diag.reserve(count);
    for k in 0..count {
        let rstar = 0.5 * (v0 + (k as f64 - n_u as f64) * du);
        let (r, f) = areal_and_lapse(params.mass, rstar)?;
        r_diag.push(r);
        lapse_diag.push(f);
    }
    Ok(())
}

/// Shared quasilinear stencil. `phi` resolves absolute node indices;
/// `rel_i`/`rel_j` say how many rows/columns of history exist below `(i, j)`
/// in the resolvable window. Degraded (one-sided) stencils on the first two
/// rows/columns zero the corresponding curvature term and set the flag.
/// `h` is the damped coefficient at the cell centre and `cubic` the cubic
/// term's amplitude.
#[allow(clippy::too_many_arguments)]
fn source_stencil<F: Fn(usize, usize) -> f64>(
    phi: F,
    i: usize,
    j: usize,
    rel_i: usize,
    rel_j: usize,
    du: f64,
    h: f64,
    cubic: f64,
    r_c: f64,
) -> (f64, bool) {
    let duu = du * du;
    let mut one_sided = false;

    let puu = if rel_i >= 2 {
        let col = |jj: usize| (phi(i, jj) - 2.0 * phi(i - 1, jj) + phi(i - 2, jj)) / duu;
        0.5 * (col(j) + col(j - 1))
    } else {
        one_sided = true;
        0.0
    };

    let pvv = if rel_j >= 2 {
        let row = |ii: usize| (phi(ii, j) - 2.0 * phi(ii, j - 1) + phi(ii, j - 2)) / duu;
        0.5 * (row(i) + row(i - 1))
    } else {
        one_sided = true;
        0.0
    };

    // Mixed derivative is exactly centred on the cell.
    let puv = (phi(i, j) - phi(i, j - 1) - phi(i - 1, j) + phi(i - 1, j - 1)) / duu;

    let phi_c = 0.25 * (phi(i, j) + phi(i, j - 1) + phi(i - 1, j) + phi(i - 1, j - 1));
    let lbar2 = 4.0 * puu;
    let dtt = puu + 2.0 * puv + pvv;
    let g = r_c * (h * phi_c * lbar2 + cubic * phi_c * phi_c * dtt);
    (g, one_sided)
}

/// Rolling three-row view used by the marcher's source evaluation. Row `i`
/// is `cur` (filled through column `j - 1`, with the running estimate at
/// `(i, j)`), rows `i-1` and `i-2` are `prev` and `prev2`.
struct WindowField<'a> {
    prev2: &'a [f64],
    prev: &'a [f64],
    cur: &'a [f64],
    i: usize,
    j: usize,
    est_phi: f64,
    r_diag: &'a [f64],
    n_u: usize,
}

impl WindowField<'_> {
    #[inline]
    fn phi(&self, ii: usize, jj: usize) -> f64 {
        if ii == self.i && jj == self.j {
            return self.est_phi;
        }
        let psi = if ii == self.i {
            self.cur[jj]
        } else if ii + 1 == self.i {
            self.prev[jj]
        } else {
            self.prev2[jj]
        };
        psi / self.r_diag[jj + self.n_u - ii]
    }
}

/// March the lattice, streaming observer samples; `O(n_v)` memory.
pub fn evolve(spec: &EvolveSpec) -> Result<EvolveOutput, EvolveError> {
    let mut sink = NoStore;
    march(spec, &mut sink)
}

/// March the lattice and keep the field on `keep` for diagnostics.
pub fn evolve_grid(
    spec: &EvolveSpec,
    keep: StoreWindow,
) -> Result<(NullGrid, EvolveOutput), EvolveError> {
    let (n_u, n_v) = spec.grid.validate()?;
    let du = spec.grid.du;
    let i_lo = ((keep.u_lo / du).ceil().max(0.0) as usize).min(n_u);
    let i_hi = ((keep.u_hi / du).floor().min(n_u as f64).max(0.0)) as usize;
    let j_lo = (((keep.v_lo - spec.grid.v0) / du).ceil().max(0.0) as usize).min(n_v);
    let j_hi = (((keep.v_hi - spec.grid.v0) / du)
        .floor()
        .min(n_v as f64)
        .max(0.0)) as usize;
    if i_hi < i_lo || j_hi < j_lo {
        return Err(EvolveError::InvalidSpec("empty storage window".into()));
    }
    let n_i = i_hi - i_lo + 1;
    let n_j = j_hi - j_lo + 1;
    if n_i.saturating_mul(n_j) > 1 << 28 {
        return Err(EvolveError::InvalidSpec(format!(
            "storage window too large: {n_i} x {n_j} nodes"
        )));
    }

    let mut r_diag = Vec::new();
    let mut lapse_diag = Vec::new();
    build_diag_cache(
        &mut r_diag,
        &mut lapse_diag,
        spec.params,
        n_u,
        n_v,
        spec.grid.v0,
        du,
    )?;
    let mut grid = NullGrid {
        params: spec.params,
        du,
        dv: du,
        u_max: n_u as f64 * du,
        v_max: spec.grid.v0 + n_v as f64 * du,
        v0: spec.grid.v0,
        n_u,
        n_v,
        i0: i_lo,
        j0: j_lo,
        n_i,
        n_j,
        psi: vec![0.0; n_i * n_j],
        r_diag,
        lapse_diag,
    };

    struct GridStore<'a> {
        grid: &'a mut NullGrid,
    }
    impl RowSink for GridStore<'_> {
        fn on_row(&mut self, i: usize, row: &[f64]) {
            let g = &mut *self.grid;
            if i >= g.i0 && i < g.i0 + g.n_i {
                let dst = (i - g.i0) * g.n_j;
                g.psi[dst..dst + g.n_j].copy_from_slice(&row[g.j0..g.j0 + g.n_j]);
            }
        }
    }

    let output = {
        let mut sink = GridStore { grid: &mut grid };
        march(spec, &mut sink)?
    };
    Ok((grid, output))
}

trait RowSink {
    fn on_row(&mut self, i: usize, row: &[f64]);
}

struct NoStore;
impl RowSink for NoStore {
    fn on_row(&mut self, _i: usize, _row: &[f64]) {}
}

fn march(spec: &EvolveSpec, sink: &mut dyn RowSink) -> Result<EvolveOutput, EvolveError> {
    let start = Instant::now();
    let (n_u, n_v) = spec.grid.validate()?;
    let du = spec.grid.du;
    let v0 = spec.grid.v0;

    if spec.data.sigma / du < 16.0 {
        return Err(EvolveError::Resolution {
            ratio: spec.data.sigma / du,
        });
    }
    let linear = spec.is_linear();
    if spec.multipole > 0 && !linear {
        return Err(EvolveError::InvalidSpec(
            "multipoles l > 0 are supported in the linear solver only".into(),
        ));
    }
    if !spec.potential_scale.is_finite() {
        return Err(EvolveError::InvalidSpec(
            "potential_scale must be finite".into(),
        ));
    }
    for &ro in &spec.observers {
        if 2.0 * ro < v0 || spec.grid.u_max + 2.0 * ro > spec.grid.v_max {
            return Err(EvolveError::InvalidSpec(format!(
                "observer r* = {ro} leaves the computational diamond"
            )));
        }
        let (_, f) = areal_and_lapse(spec.params.mass, ro)?;
        if f <= 0.0 {
            return Err(EvolveError::InvalidSpec(format!(
                "observer r* = {ro} is numerically at the horizon"
            )));
        }
    }

    let mut r_diag = Vec::new();
    let mut lapse_diag = Vec::new();
    build_diag_cache(&mut r_diag, &mut lapse_diag, spec.params, n_u, n_v, v0, du)?;
    let m = spec.params.mass;
    let ll1 = (spec.multipole * (spec.multipole + 1)) as f64;
    let pot: Vec<f64> = r_diag
        .iter()
        .zip(&lapse_diag)
        .map(|(&r, &f)| spec.potential_scale * f * (ll1 / (r * r) + 2.0 * m / (r * r * r)))
        .collect();

    let cols = n_v + 1;
    let mut prev2 = vec![0.0f64; cols];
    let mut prev = vec![0.0f64; cols];
    let mut cur = vec![0.0f64; cols];

    for (j, p) in prev.iter_mut().enumerate() {
        *p = spec.data.eval(v0 + j as f64 * du);
    }
    sink.on_row(0, &prev);

    let mut min_psi = f64::INFINITY;
    let mut max_psi = f64::NEG_INFINITY;
    let mut sup_phi: f64 = 0.0;
    for (j, &p) in prev.iter().enumerate() {
        min_psi = min_psi.min(p);
        max_psi = max_psi.max(p);
        sup_phi = sup_phi.max((p / r_diag[j + n_u]).abs());
    }

    let mut observers: Vec<(f64, Vec<Sample>)> =
        spec.observers.iter().map(|&ro| (ro, Vec::new())).collect();

    let quarter = 0.25 * du * du;
    let eighth = 0.125 * du * du;
    let tiny = 1e-300;

    for i in 1..=n_u {
        cur[0] = prev[0];
        let base_diag = n_u - i;
        for j in 1..=n_v {
            let k = base_diag + j;
            let s = prev[j - 1];
            let e = prev[j];
            let w = cur[j - 1];
            let lin = (w + e) * (1.0 - eighth * pot[k]) - s;
            let psi = if linear {
                lin
            } else {
                let r_c = r_diag[k];
                let t_c = 0.5 * (i as f64 * du + v0 + j as f64 * du) - 0.5 * du;
                let rstar_c = 0.5 * (v0 + (k as f64 - n_u as f64) * du);
                let h_c = spec.profile.eval_h(t_c, rstar_c);
                let mut est = lin;
                for _ in 0..spec.source_passes.max(1) {
                    let window = WindowField {
                        prev2: &prev2,
                        prev: &prev,
                        cur: &cur,
                        i,
                        j,
                        est_phi: est / r_c,
                        r_diag: &r_diag,
                        n_u,
                    };
                    let (g, _) = source_stencil(
                        |ii, jj| window.phi(ii, jj),
                        i,
                        j,
                        i,
                        j,
                        du,
                        h_c,
                        spec.profile.cubic_c,
                        r_c,
                    );
                    let next = lin + quarter * g;
                    let done = (next - est).abs() <= spec.source_rel_tol * est.abs().max(tiny);
                    est = next;
                    if done {
                        break;
                    }
                }
                est
            };
            if !psi.is_finite() {
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for &p in prev.iter() {
                    lo = lo.min(p);
                    hi = hi.max(p);
                }
                return Err(EvolveError::Blowup {
                    i_u: i,
                    u: i as f64 * du,
                    min_psi: lo,
                    max_psi: hi,
                    last_good_row: prev.clone(),
                });
            }
            min_psi = min_psi.min(psi);
            max_psi = max_psi.max(psi);
            let ap = (psi / r_diag[k]).abs();
            if ap > sup_phi {
                sup_phi = ap;
            }
            cur[j] = psi;
        }
        sink.on_row(i, &cur);

        // Observer samples for row i-1: centred u-derivatives need rows
        // i-2 (prev2) and i (cur).
        if i >= 2 {
            let im = i - 1;
            for (ro, samples) in observers.iter_mut() {
                let vline = im as f64 * du + 2.0 * *ro;
                let jf = (vline - v0) / du;
                let j_lo = jf.floor() as isize;
                if j_lo < 1 || (j_lo + 1) as usize + 1 > n_v {
                    continue;
                }
                let frac = jf - j_lo as f64;
                let node = |jj: usize| {
                    sample_at_node(
                        &prev2,
                        &prev,
                        &cur,
                        im,
                        jj,
                        du,
                        v0,
                        n_u,
                        &r_diag,
                        &lapse_diag,
                    )
                };
                let a = node(j_lo as usize);
                let b = node(j_lo as usize + 1);
                let lerp = |x: f64, y: f64| x + frac * (y - x);
                samples.push(Sample {
                    t: 0.5 * (im as f64 * du + vline),
                    phi: lerp(a.0, b.0),
                    dt_phi: lerp(a.1, b.1),
                    s_phi: lerp(a.2, b.2),
                });
            }
        }

        std::mem::swap(&mut prev2, &mut prev);
        std::mem::swap(&mut prev, &mut cur);
    }

    let series = observers
        .into_iter()
        .map(|(rstar_obs, samples)| ObserverSeries { rstar_obs, samples })
        .collect();

    Ok(EvolveOutput {
        series,
        meta: RunMetadata {
            sup_phi,
            min_psi,
            max_psi,
            wall_seconds: start.elapsed().as_secs_f64(),
            n_u,
            n_v,
            one_sided_rows: if linear { 0 } else { 2 },
        },
    })
}

/// `(phi, d_t phi, S phi)` at node `(im, jj)` from the three-row window
/// (`prev2`, `prev`, `cur` are rows `im-1`, `im`, `im+1`).
#[allow(clippy::too_many_arguments)]
fn sample_at_node(
    prev2: &[f64],
    prev: &[f64],
    cur: &[f64],
    im: usize,
    jj: usize,
    du: f64,
    v0: f64,
    n_u: usize,
    r_diag: &[f64],
    lapse_diag: &[f64],
) -> (f64, f64, f64) {
    let k = jj + n_u - im;
    let r = r_diag[k];
    let f = lapse_diag[k];
    let rstar = 0.5 * (v0 + (k as f64 - n_u as f64) * du);
    let t = im as f64 * du + rstar;
    let phi_here = prev[jj] / r;
    let phi_um = prev2[jj] / r_diag[k + 1];
    let phi_up = cur[jj] / r_diag[k - 1];
    let phi_vm = prev[jj - 1] / r_diag[k - 1];
    let phi_vp = prev[jj + 1] / r_diag[k + 1];
    let pu = (phi_up - phi_um) / (2.0 * du);
    let pv = (phi_vp - phi_vm) / (2.0 * du);
    let pt = pu + pv;
    let prs = pv - pu;
    (phi_here, pt, t * pt + r * prs / f)
}
