//! Library surface of the command-line front end: configuration schema,
//! artifact emission, run/sweep orchestration and the verification suite.

// `!(x > 0.0)` in validations also rejects NaN; `x <= 0.0` would not.
// Symmetric-tensor fills use explicit index loops.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod acceptance;
pub mod config;
pub mod output;
pub mod runner;
