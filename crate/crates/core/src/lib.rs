//! Numerical laboratory for the short-path style quantum optimization
//! algorithm built around the transformed transverse-field operator
//!
//! ```text
//! H_b = -X/n + b * g_eta(H / |E*|)
//! ```
//!
//! The crate is organised bottom-up:
//!
//! * [`cost`] — cost functions over `{+1,-1}^n`, seeded ensembles and
//!   exhaustive spectrum tables;
//! * [`transform`] — the scalar functions and closed-form parameter formulas;
//! * [`spectral`] — the implicit `H_b` operator, dense and Lanczos
//!   eigensolvers, overlaps and the `P_l` power operator;
//! * [`conditions`] — spectral-condition checkers and tail bounds;
//! * [`statmech`] — cumulative state functions and Gibbs thermodynamics;
//! * [`bounds`] — overlap / runtime lower bounds and speedup constants;
//! * [`algo`] — the idealized end-to-end algorithm and its cost model;
//! * [`experiments`] — scans, the scaling study and CSV output.
//!
//! Assignments are encoded as `u64` bit masks: bit `i` set means `z_i = -1`.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algo;
pub mod bounds;
pub mod conditions;
pub mod cost;
pub mod error;
pub mod experiments;
pub mod rng;
pub mod spectral;
pub mod statmech;
pub mod transform;

pub use error::{Error, Result};
