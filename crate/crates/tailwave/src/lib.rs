//! Numerical laboratory for late-time tails of linear and quasilinear waves
//! on Schwarzschild-type backgrounds.
//!
//! The crate is organised around the pipeline
//!
//! * [`geometry`] — exact Schwarzschild/Kerr metric data, tortoise and
//!   normalized radial coordinates, null frames and frame decomposition of
//!   symmetric 2-tensors;
//! * [`coefficients`] — concrete quasilinear coefficient profiles with a
//!   near-cone damping exponent `delta`, plus a numerical symbol-class
//!   checker;
//! * [`evolution`] — second-order double-null characteristic evolution of the
//!   spherically reduced wave equation, producing observer time series;
//! * [`analysis`] — decay-rate extraction (local power index, weighted-sup
//!   boundedness) and pointwise-inequality diagnostics on evolved fields;
//! * [`lightcone`] — quadrature over backward light cones and empirical
//!   verification of the source-to-solution exponent table;
//! * [`iteration`] — exact-rational bookkeeping engine that iterates the
//!   decay-exponent rules to their fixed point `kappa = min(delta, 1)`.
//!
//! All physical quantities are in geometric units (`G = c = 1`) with the
//! black-hole mass `M` setting the scale.

// Validations use `!(x > 0.0)` deliberately: the negation also rejects NaN,
// which the suggested `x <= 0.0` would let through. Tensor contractions use
// explicit index loops for symmetry with the math.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod coefficients;
pub mod evolution;
pub mod geometry;
pub mod iteration;
pub mod lightcone;

/// Japanese bracket `<x> = sqrt(1 + x^2)`, the smoothed absolute value used
/// in all decay weights.
#[inline]
pub fn jbracket(x: f64) -> f64 {
    x.hypot(1.0)
}
