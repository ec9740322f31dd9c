//! Trust-region optimization with Birkhoff interpolation models.
//!
//! Models are quadratics fitted to a mix of function values and whatever
//! partial derivatives the oracle can supply, with the interpolation set kept
//! well poised by greedy pivot-polynomial completion.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod bounds;
pub mod data;
pub mod error;
pub mod instances;
pub mod interp;
pub mod linalg;
pub mod oracle;
pub mod pivot;
pub mod poise;
pub mod solver;

pub use basis::{AvailableSet, MultiIndex, Order, Quadratic};
pub use data::{DataSet, Datum, QuadraticModel};
pub use error::{Error, Result};
