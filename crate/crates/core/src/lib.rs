//! Exact workbench for crystal sets, dyadic rectangle families and the
//! maximal operators they generate.
//!
//! Everything is computed with exact dyadic arithmetic on cell grids. The
//! maximal operator is evaluated over cell-aligned translates only, which
//! gives pointwise lower bounds for the true operator; every superlevel
//! measure reported here is therefore a certified lower bound.

pub mod crystal;
pub mod dyadic;
pub mod error;
pub mod evaluator;
pub mod family;
pub mod verify;

pub use error::{Error, Result};
