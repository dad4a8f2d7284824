//! Exact dyadic arithmetic and one-dimensional dyadic set algebra.

mod bits;
mod rational;
mod set1d;

pub use bits::Bits;
pub use rational::{DyadicRational, ExactRatio};
pub use set1d::{interval_set, oscillation_set, DyadicInterval, DyadicSet1D, MAX_LEVELS_1D};
