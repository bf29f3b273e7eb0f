//! Null frame `{L, Lbar, A, A*}` on the Schwarzschild exterior and the frame
//! decomposition of symmetric contravariant 2-tensors.
//!
//! Components are given in `(t, x1, x2, x3)` coordinates where the spatial
//! metric is `delta_ij + (1/f - 1) w_i w_j`, `f = 1 - 2M/r`, `w` the unit
//! radial direction. The frame satisfies
//!
//! ```text
//! g(L, L) = g(Lbar, Lbar) = 0,   g(L, Lbar) = -2 f,
//! g(A, A) = g(A*, A*) = 1,       g(A, A*) = 0,
//! ```
//!
//! and `A`, `A*` are tangent to the constant-`r` spheres.

use super::{GeometryError, MetricParams};
use serde::Serialize;

/// The four frame vectors at an evaluation point `(r, w)`.
#[derive(Debug, Clone, Serialize)]
pub struct NullFrame {
    pub l: [f64; 4],
    pub lbar: [f64; 4],
    pub a: [f64; 4],
    pub astar: [f64; 4],
    pub r: f64,
    pub omega: [f64; 3],
    /// Lapse `f = 1 - 2M/r` at the evaluation radius.
    pub lapse: f64,
}

/// Schwarzschild metric components at `(r, w)` in `(t, x)` coordinates.
pub(crate) fn schwarzschild_metric_at(
    params: &MetricParams,
    r: f64,
    omega: [f64; 3],
) -> [[f64; 4]; 4] {
    let f = params.lapse(r);
    let mut g = [[0.0; 4]; 4];
    g[0][0] = -f;
    let c = 1.0 / f - 1.0;
    for i in 0..3 {
        for j in 0..3 {
            g[i + 1][j + 1] = if i == j { 1.0 } else { 0.0 } + c * omega[i] * omega[j];
        }
    }
    g
}

#[inline]
fn contract(g: &[[f64; 4]; 4], x: &[f64; 4], y: &[f64; 4]) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            s += g[i][j] * x[i] * y[j];
        }
    }
    s
}

/// Build the null frame at `(r, w)`. The sphere-tangent pair is fixed
/// deterministically: project out of the coordinate axis least aligned with
/// `w`, then complete with the cross product.
pub fn null_frame_at(
    params: &MetricParams,
    r: f64,
    omega: [f64; 3],
) -> Result<NullFrame, GeometryError> {
    params.require_schwarzschild("null_frame_at")?;
    let m = params.mass;
    if !(r > 2.0 * m) {
        return Err(GeometryError::Domain(format!(
            "r = {r} must exceed 2M = {}",
            2.0 * m
        )));
    }
    let norm = (omega[0] * omega[0] + omega[1] * omega[1] + omega[2] * omega[2]).sqrt();
    if norm == 0.0 {
        return Err(GeometryError::Domain(
            "omega must be a nonzero direction".into(),
        ));
    }
    let w = [omega[0] / norm, omega[1] / norm, omega[2] / norm];
    let f = params.lapse(r);

    // d/dr* = f w^i d_i, so L = d_t + d_r*, Lbar = d_t - d_r*.
    let l = [1.0, f * w[0], f * w[1], f * w[2]];
    let lbar = [1.0, -f * w[0], -f * w[1], -f * w[2]];

    // Axis least aligned with w, smallest index breaking ties.
    let mut k = 0;
    for i in 1..3 {
        if w[i].abs() < w[k].abs() {
            k = i;
        }
    }
    let mut e = [0.0; 3];
    e[k] = 1.0;
    let dot = e[0] * w[0] + e[1] * w[1] + e[2] * w[2];
    let mut a3 = [e[0] - dot * w[0], e[1] - dot * w[1], e[2] - dot * w[2]];
    let an = (a3[0] * a3[0] + a3[1] * a3[1] + a3[2] * a3[2]).sqrt();
    for c in &mut a3 {
        *c /= an;
    }
    let astar3 = [
        w[1] * a3[2] - w[2] * a3[1],
        w[2] * a3[0] - w[0] * a3[2],
        w[0] * a3[1] - w[1] * a3[0],
    ];

    Ok(NullFrame {
        l,
        lbar,
        a: [0.0, a3[0], a3[1], a3[2]],
        astar: [0.0, astar3[0], astar3[1], astar3[2]],
        r,
        omega: w,
        lapse: f,
    })
}

impl NullFrame {
    /// The six contraction identities, returned as absolute defects:
    /// `g(L,L)`, `g(Lbar,Lbar)`, `g(L,Lbar) + 2f`, `g(A,A) - 1`,
    /// `g(A*,A*) - 1`, `g(A,A*)`.
    pub fn contraction_defects(&self, params: &MetricParams) -> [f64; 6] {
        let g = schwarzschild_metric_at(params, self.r, self.omega);
        [
            contract(&g, &self.l, &self.l).abs(),
            contract(&g, &self.lbar, &self.lbar).abs(),
            (contract(&g, &self.l, &self.lbar) + 2.0 * self.lapse).abs(),
            (contract(&g, &self.a, &self.a) - 1.0).abs(),
            (contract(&g, &self.astar, &self.astar) - 1.0).abs(),
            contract(&g, &self.a, &self.astar).abs(),
        ]
    }

    /// Orthogonality of the null pair against the sphere-tangent pair.
    pub fn tangency_defects(&self, params: &MetricParams) -> [f64; 4] {
        let g = schwarzschild_metric_at(params, self.r, self.omega);
        [
            contract(&g, &self.l, &self.a).abs(),
            contract(&g, &self.l, &self.astar).abs(),
            contract(&g, &self.lbar, &self.a).abs(),
            contract(&g, &self.lbar, &self.astar).abs(),
        ]
    }
}

/// Frame components of a symmetric contravariant 2-tensor:
///
/// ```text
/// h = c_LbarLbar Lbar Lbar + sum_T c_LbarT (Lbar T + T Lbar) + sum_{U<=T} c_UT (U T + T U)/sym
/// ```
///
/// with `T, U` ranging over the tangential triple `{L, A, A*}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FrameComponents {
    pub lbar_lbar: f64,
    pub lbar_l: f64,
    pub lbar_a: f64,
    pub lbar_astar: f64,
    pub l_l: f64,
    pub l_a: f64,
    pub l_astar: f64,
    pub a_a: f64,
    pub a_astar: f64,
    pub astar_astar: f64,
}

impl FrameComponents {
    fn as_matrix(&self) -> [[f64; 4]; 4] {
        // Basis order (Lbar, L, A, A*), symmetric coefficient matrix.
        [
            [self.lbar_lbar, self.lbar_l, self.lbar_a, self.lbar_astar],
            [self.lbar_l, self.l_l, self.l_a, self.l_astar],
            [self.lbar_a, self.l_a, self.a_a, self.a_astar],
            [
                self.lbar_astar,
                self.l_astar,
                self.a_astar,
                self.astar_astar,
            ],
        ]
    }

    /// Reassemble the coordinate components `h^{ab} = sum c^{cd} e_c^a e_d^b`.
    pub fn reassemble(&self, frame: &NullFrame) -> [[f64; 4]; 4] {
        let basis = [frame.lbar, frame.l, frame.a, frame.astar];
        let c = self.as_matrix();
        let mut h = [[0.0; 4]; 4];
        for (ci, ei) in c.iter().zip(basis.iter()) {
            for (cij, ej) in ci.iter().zip(basis.iter()) {
                for a in 0..4 {
                    for b in 0..4 {
                        h[a][b] += cij * ei[a] * ej[b];
                    }
                }
            }
        }
        h
    }
}

/// Decompose a symmetric contravariant 2-tensor on the frame at `(r, w)`.
///
/// With `G` the frame Gram matrix and `M_<cd> = h(g e_c, g e_d)`, the
/// coefficient matrix is `C = G^-1 M G^-1`; `G` is the fixed block form
/// `[[0, -2f], [-2f, 0]] (+) Id_2`, inverted explicitly.
pub fn frame_decompose(
    params: &MetricParams,
    r: f64,
    omega: [f64; 3],
    h: &[[f64; 4]; 4],
) -> Result<(FrameComponents, NullFrame), GeometryError> {
    let frame = null_frame_at(params, r, omega)?;
    let g = schwarzschild_metric_at(params, r, frame.omega);
    let basis = [frame.lbar, frame.l, frame.a, frame.astar];

    // Lowered basis vectors w_c = g e_c.
    let mut lowered = [[0.0; 4]; 4];
    for (c, e) in basis.iter().enumerate() {
        for a in 0..4 {
            for b in 0..4 {
                lowered[c][a] += g[a][b] * e[b];
            }
        }
    }

    // M_cd = h^{ab} (w_c)_a (w_d)_b.
    let mut mm = [[0.0; 4]; 4];
    for c in 0..4 {
        for d in 0..4 {
            let mut s = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    s += h[a][b] * lowered[c][a] * lowered[d][b];
                }
            }
            mm[c][d] = s;
        }
    }

    // G^-1 for basis order (Lbar, L, A, A*).
    let q = -1.0 / (2.0 * frame.lapse);
    let ginv = [
        [0.0, q, 0.0, 0.0],
        [q, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ];

    let mut tmp = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut s = 0.0;
            for k in 0..4 {
                s += ginv[i][k] * mm[k][j];
            }
            tmp[i][j] = s;
        }
    }
    let mut c = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut s = 0.0;
            for k in 0..4 {
                s += tmp[i][k] * ginv[k][j];
            }
            c[i][j] = s;
        }
    }

    Ok((
        FrameComponents {
            lbar_lbar: c[0][0],
            lbar_l: c[0][1],
            lbar_a: c[0][2],
            lbar_astar: c[0][3],
            l_l: c[1][1],
            l_a: c[1][2],
            l_astar: c[1][3],
            a_a: c[2][2],
            a_astar: c[2][3],
            astar_astar: c[3][3],
        },
        frame,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn params() -> MetricParams {
        MetricParams::schwarzschild(1.0).unwrap()
    }

    fn random_direction(rng: &mut impl Rng) -> [f64; 3] {
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

    #[test]
    fn stated_normalization_at_r_three() {
        let frame = null_frame_at(&params(), 3.0, [1.0, 0.0, 0.0]).unwrap();
        let g = schwarzschild_metric_at(&params(), 3.0, frame.omega);
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                s += g[i][j] * frame.l[i] * frame.lbar[j];
            }
        }
        assert_relative_eq!(s, -2.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn asymptotically_minkowski() {
        let frame = null_frame_at(&params(), 1.0e9, [0.0, 1.0, 0.0]).unwrap();
        assert_relative_eq!(frame.l[0], 1.0);
        assert_relative_eq!(frame.l[2], 1.0, epsilon = 1e-8);
        assert_relative_eq!(frame.lbar[2], -1.0, epsilon = 1e-8);
    }

    #[test]
    fn contraction_identities_at_axis_direction() {
        let frame = null_frame_at(&params(), 5.0, [0.0, 0.0, 1.0]).unwrap();
        for d in frame.contraction_defects(&params()) {
            assert!(d < 1e-12);
        }
        for d in frame.tangency_defects(&params()) {
            assert!(d < 1e-12);
        }
    }

    #[test]
    fn contraction_identities_randomized() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let r = rng.gen_range(2.05..200.0);
            let w = random_direction(&mut rng);
            let frame = null_frame_at(&params(), r, w).unwrap();
            for d in frame.contraction_defects(&params()) {
                assert!(d < 1e-12, "defect {d} at r = {r}");
            }
            for d in frame.tangency_defects(&params()) {
                assert!(d < 1e-12);
            }
        }
    }

    #[test]
    fn basis_tensor_recovers_unit_component() {
        let p = params();
        let frame = null_frame_at(&p, 4.0, [0.6, 0.0, 0.8]).unwrap();
        let mut h = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                h[a][b] = frame.lbar[a] * frame.lbar[b];
            }
        }
        let (comps, _) = frame_decompose(&p, 4.0, [0.6, 0.0, 0.8], &h).unwrap();
        assert_relative_eq!(comps.lbar_lbar, 1.0, epsilon = 1e-12);
        for v in [
            comps.lbar_l,
            comps.lbar_a,
            comps.lbar_astar,
            comps.l_l,
            comps.l_a,
            comps.l_astar,
            comps.a_a,
            comps.a_astar,
            comps.astar_astar,
        ] {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn zero_tensor_decomposes_to_zero() {
        let (comps, frame) =
            frame_decompose(&params(), 6.0, [0.0, 1.0, 0.0], &[[0.0; 4]; 4]).unwrap();
        let back = comps.reassemble(&frame);
        for row in back {
            for v in row {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn round_trip_randomized() {
        let p = params();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..1000 {
            let r = rng.gen_range(2.2..50.0);
            let w = random_direction(&mut rng);
            let mut h = [[0.0; 4]; 4];
            for a in 0..4 {
                for b in a..4 {
                    let v = rng.gen_range(-1.0..1.0);
                    h[a][b] = v;
                    h[b][a] = v;
                }
            }
            let (comps, frame) = frame_decompose(&p, r, w, &h).unwrap();
            let back = comps.reassemble(&frame);
            let mut scale: f64 = 0.0;
            let mut defect: f64 = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    scale = scale.max(h[a][b].abs());
                    defect = defect.max((back[a][b] - h[a][b]).abs());
                }
            }
            assert!(
                defect <= 1e-10 * scale.max(1.0),
                "round-trip defect {defect} at r = {r}"
            );
        }
    }
}
