//! Numerics for the biharmonic Lane-Emden equation `Δ²u = |u|^{p-1}u` in the
//! supercritical range: critical exponents, radial solutions, the
//! monotonicity energy, blow-down diagnostics and the Navier branch on the
//! unit ball.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod blowdown;
pub mod energy;
pub mod error;
pub mod exponents;
pub mod ext;
pub mod field;
pub mod navierbvp;
pub mod nonlinearity;
pub mod numerics;
pub mod ode;
pub mod radialode;

pub use error::{Error, Result};
pub use exponents::{DerivedConstants, ProblemParams};
pub use ext::ExtReal;
pub use field::{FieldColumns, RadialField, Sample};
pub use nonlinearity::Nonlinearity;
