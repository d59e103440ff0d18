//! Robust counterparts of linear and mixed-integer programs under data
//! uncertainty, with an embedded solver and feasibility validation.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod model;
pub mod robustify;
pub mod sitesel;
pub mod solver;
pub mod uncertainty;
pub mod validate;

pub use error::{Error, Result};
