//! Numerical laboratory for the phases picked up when identical particles
//! and anyons are physically exchanged.
//!
//! The crate splits an observable exchange phase into its intrinsic
//! exchange part and the extrinsic dynamical, geometric and topological
//! contributions, and computes non-abelian Berry holonomies of degenerate
//! subspaces to probe how robust the topological part is.
//!
//! Units: ħ = 1 throughout, every phase is in radians, and phases are
//! compared modulo 2π using the principal value in (−π, π].

// `!(x > 0.0)` deliberately rejects NaN alongside non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anyon;
pub mod berry;
pub mod braid;
pub mod error;
pub mod exec;
pub mod holomorphic;
pub mod linalg;
pub mod ring;
pub mod spin;

pub use error::{Error, Result};
pub use exec::Exec;
pub use linalg::{CMat, CVec, TimeGrid};
