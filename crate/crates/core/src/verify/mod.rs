//! End-to-end certification of the resonant crystal construction.
//!
//! For an arithmetic progression `u_0 < ... < u_{m-1}` the set `E` is a
//! product of crystals whose superlevel set `{M 1_E >= 2^-(m-1)}` under the
//! family `B_{A^(n-1)}` contains the union of the suffix crystals `Y(i)`.
//! The checks here rebuild every piece on a cell grid and compare exact
//! measures:
//!
//! * homogeneity: each `Y(i)` sits in the superlevel set of the single-shape
//!   operator for its primitive rectangle `R(i)`;
//! * disjointness: the private part of each `R(i)` and the overlap ratio of
//!   the `Y(i)`;
//! * the superlevel measure of the full aligned maximal field against
//!   `m^(n-1) 2^m |E|`.
//!
//! Note on the independence hypothesis for anchored rectangles: the union in
//! `|R_i - U R_j|` runs over `j != i`.

mod checks;
mod instance;
mod report;
mod theorem;

pub use checks::{
    check_disjointness, check_homogeneity, DisjointnessCheck, HomogeneityCheck, Rasters,
};
pub use instance::{binomial, simplex_indices, TheoremInstance};
pub use report::{
    write_csv, write_series, CheckOutcome, ReportKind, SuperlevelEntry, SweepRow, ThresholdChoice,
    VerificationReport, CSV_COLUMNS, DECIMAL_DIGITS, EVALUATION_NOTE, REPORT_SCHEMA_VERSION,
};
pub use theorem::{
    cube_counterexample, cube_counterexample_with, cube_shapes, growth_scale, sweep,
    verify_theorem, VerifyOptions,
};
