use std::io::Write;

use serde::Serialize;

use super::checks::{DisjointnessCheck, HomogeneityCheck};
use crate::dyadic::{DyadicRational, ExactRatio};
use crate::error::Result;
use crate::evaluator::Comparison;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Digits used for every decimal rendering of a ratio.
pub const DECIMAL_DIGITS: usize = 12;

pub const CSV_COLUMNS: [&str; 11] = [
    "n",
    "m",
    "measure_E_mantissa",
    "measure_E_exp",
    "superlevel_mantissa",
    "superlevel_exp",
    "ratio_decimal",
    "index_count",
    "min_delta",
    "runtime_ms",
    "status",
];

/// Which of the two reported thresholds a summary refers to.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdChoice {
    /// `2^-(m-1)`, the exact average on the resonant rectangles.
    #[default]
    Resonant,
    /// `2^-m`, the threshold in the statement being certified.
    Stated,
}

impl ThresholdChoice {
    pub fn value(self, m: usize) -> DyadicRational {
        match self {
            ThresholdChoice::Resonant => DyadicRational::pow2(1 - m as i64),
            ThresholdChoice::Stated => DyadicRational::pow2(-(m as i64)),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuperlevelEntry {
    pub threshold: DyadicRational,
    pub comparison: Comparison,
    pub measure: DyadicRational,
    /// `measure / (m^(n-1) 2^m |E|)`.
    pub ratio: ExactRatio,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    Theorem,
    Cube,
}

/// Everything one run certifies, with exact values throughout.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub kind: ReportKind,
    pub n: usize,
    pub m: usize,
    /// The integer set the family is generated from (empty for cube runs).
    pub set: Vec<i64>,
    pub progression: Vec<i64>,
    pub grid_resolutions: Vec<i64>,
    pub grid_extents: Vec<i64>,
    pub evaluation: &'static str,
    /// `|E|`, or `|Q|` for cube runs.
    pub measure_e: DyadicRational,
    pub index_count: usize,
    pub shapes_evaluated: usize,
    pub shapes_outside_grid: usize,
    pub sum_y: Option<DyadicRational>,
    pub union_y: Option<DyadicRational>,
    pub rho: Option<ExactRatio>,
    pub min_delta: Option<ExactRatio>,
    /// Superlevel sets at `2^-(m-1)` (theorem runs only) and `2^-m`.
    pub superlevels: Vec<SuperlevelEntry>,
    pub checks: Vec<CheckOutcome>,
    pub homogeneity: Vec<HomogeneityCheck>,
    pub disjointness: Option<DisjointnessCheck>,
    pub pass: bool,
    pub runtime_ms: u64,
}

pub const EVALUATION_NOTE: &str =
    "cell-aligned translates only; every field value and superlevel measure is a lower bound";

impl VerificationReport {
    pub fn superlevel(&self, threshold: &DyadicRational) -> Option<&SuperlevelEntry> {
        self.superlevels.iter().find(|s| &s.threshold == threshold)
    }

    /// The entry for the chosen threshold; cube runs only carry `2^-m`.
    pub fn summary(&self, choice: ThresholdChoice) -> Option<&SuperlevelEntry> {
        self.superlevel(&choice.value(self.m))
            .or_else(|| self.superlevels.last())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn csv_record(&self, choice: ThresholdChoice) -> Vec<String> {
        let s = self.summary(choice);
        vec![
            self.n.to_string(),
            self.m.to_string(),
            self.measure_e.mantissa().to_string(),
            self.measure_e.exponent().to_string(),
            s.map(|s| s.measure.mantissa().to_string())
                .unwrap_or_default(),
            s.map(|s| s.measure.exponent().to_string())
                .unwrap_or_default(),
            s.map(|s| s.ratio.decimal(DECIMAL_DIGITS))
                .unwrap_or_default(),
            self.index_count.to_string(),
            self.min_delta
                .as_ref()
                .map(|d| d.decimal(DECIMAL_DIGITS))
                .unwrap_or_default(),
            self.runtime_ms.to_string(),
            if self.pass { "pass" } else { "fail" }.to_string(),
        ]
    }
}

/// One sweep row: a report, or the error that prevented it.
pub type SweepRow = (usize, usize, Result<VerificationReport>);

/// Writes sweep rows as CSV with [`CSV_COLUMNS`]. Failed rows keep `n` and `m`
/// and carry the error message in `status`.
pub fn write_csv(out: impl Write, rows: &[SweepRow], choice: ThresholdChoice) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for (n, m, row) in rows {
        match row {
            Ok(report) => w.write_record(report.csv_record(choice))?,
            Err(e) => {
                let mut rec = vec![String::new(); CSV_COLUMNS.len()];
                rec[0] = n.to_string();
                rec[1] = m.to_string();
                rec[CSV_COLUMNS.len() - 1] = format!("error: {e}");
                w.write_record(rec)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Plot-ready `m ratio` pairs, one per line.
pub fn write_series(mut out: impl Write, rows: &[SweepRow], choice: ThresholdChoice) -> Result<()> {
    writeln!(out, "# m ratio")?;
    for (_, m, row) in rows {
        if let Some(s) = row.as_ref().ok().and_then(|r| r.summary(choice)) {
            writeln!(out, "{m} {}", s.ratio.decimal(DECIMAL_DIGITS))?;
        }
    }
    Ok(())
}
