//! Numerical core for the 2D unsteady Prandtl boundary-layer equations
//!
//! ```text
//! u_t + u u_x + v u_y + p_x = u_yy,   u_x + v_y = 0
//! (u_y - beta u)|_{y=0} = 0   or   u|_{y=0} = 0
//! u -> U(t, x) as y -> infinity
//! ```
//!
//! on an x-periodic strip truncated at `y = y_max`. Solutions are built by a
//! Picard iteration whose linear sub-problems are marched with a
//! semi-implicit finite-difference step. The [`diagnostics`] module measures
//! the weighted energy quantities used in the well-posedness theory.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, the CLI and
//! thread pools live in the companion `prandtl-cli` crate.

#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod calculus;
pub mod diagnostics;
pub mod error;
pub mod euler;
pub mod experiments;
pub mod field;
pub mod grid;
pub mod identity_family;
pub mod initial;
pub mod linear_step;
pub mod mms;
pub mod picard;
pub mod wall;

pub use error::{Error, Result};
pub use euler::{EulerData, Shape};
pub use field::Field;
pub use grid::{Grid, MultiIndex, WeightParams};
pub use wall::Wall;
