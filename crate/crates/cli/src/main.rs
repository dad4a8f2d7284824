//! `crystal`: build crystals, certify the resonant construction, and sweep
//! superlevel ratios over `m`.
//!
//! Exit codes: 0 pass, 1 I/O failure, 2 usage, 3 no progression of the
//! requested length, 4 grid budget exceeded, 5 a check failed.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use crystal_core::crystal::{parse_int_list, Crystal1D, ScaleSet, Shape};
use crystal_core::dyadic::DyadicRational;
use crystal_core::evaluator::{Budget, Comparison, BUDGET_ENV};
use crystal_core::family::FamilySpec;
use crystal_core::verify::{
    cube_counterexample_with, sweep, verify_theorem, write_csv, write_series, ThresholdChoice,
    VerificationReport, VerifyOptions, DECIMAL_DIGITS,
};
use crystal_core::Error;

const EXIT_IO: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_UNSATISFIABLE: u8 = 3;
const EXIT_BUDGET: u8 = 4;
const EXIT_CHECK_FAILED: u8 = 5;

#[derive(Parser)]
#[command(
    name = "crystal",
    version,
    about = "Dyadic crystals and aligned strong maximal superlevel sets"
)]
struct Cli {
    /// Maximum number of grid cells any single raster may use.
    #[arg(long, global = true, env = BUDGET_ENV)]
    budget: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a one-dimensional crystal and print its cells and measure.
    Crystal {
        /// Strictly increasing scales, e.g. `0,2,3`.
        #[arg(long, allow_hyphen_values = true)]
        scales: String,
    },
    /// Certify the construction for one progression and write a JSON report.
    Verify {
        #[arg(long)]
        n: usize,
        /// Integer set generating the family; must contain a progression of length `m`.
        #[arg(long, allow_hyphen_values = true)]
        set: String,
        #[arg(long)]
        m: usize,
        /// Report path; the summary goes to stdout either way.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        eval: EvalArgs,
    },
    /// Run `verify` over a range of `m` and emit CSV plus a plot series.
    Sweep {
        #[arg(long)]
        n: usize,
        /// Inclusive range such as `2..8`, or a single value.
        #[arg(long, value_parser = parse_range)]
        m: RangeInclusive<usize>,
        /// Fixed generating set; defaults to `0,...,m-1` per row.
        #[arg(long, allow_hyphen_values = true)]
        set: Option<String>,
        /// CSV destination (stdout when omitted).
        #[arg(long)]
        csv: Option<PathBuf>,
        /// `m ratio` series for plotting.
        #[arg(long)]
        series: Option<PathBuf>,
        #[command(flatten)]
        eval: EvalArgs,
    },
    /// Superlevel set of the maximal function of a unit cube at `2^-m`.
    Cube {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Smallest shape exponent on each axis.
        #[arg(long, default_value_t = 0)]
        lo: i64,
        /// Largest shape exponent on each axis (defaults to `m`).
        #[arg(long)]
        hi: Option<i64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        eval: EvalArgs,
    },
    /// List the shapes of a product family, or test one for membership.
    Family {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        set: String,
        /// Close the family under dilation by powers of two.
        #[arg(long)]
        dilation_closed: bool,
        /// Exponent vector to test, e.g. `1,-1`.
        #[arg(long, allow_hyphen_values = true)]
        shape: Option<String>,
    },
}

#[derive(Args)]
struct EvalArgs {
    /// Threshold summarized in CSV and stdout output.
    #[arg(long, value_enum, default_value_t = ThresholdArg::Resonant)]
    threshold: ThresholdArg,
    /// Count only cells strictly above the threshold.
    #[arg(long)]
    strict: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ThresholdArg {
    /// 2^-(m-1)
    Resonant,
    /// 2^-m
    Stated,
}

impl From<ThresholdArg> for ThresholdChoice {
    fn from(t: ThresholdArg) -> Self {
        match t {
            ThresholdArg::Resonant => ThresholdChoice::Resonant,
            ThresholdArg::Stated => ThresholdChoice::Stated,
        }
    }
}

fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
        None => {
            let v = parse(s)?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(format!("empty range {s}"));
    }
    Ok(lo..=hi)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Unsatisfiable { .. } => EXIT_UNSATISFIABLE,
        Error::Budget { .. } => EXIT_BUDGET,
        Error::Construction(_) => EXIT_CHECK_FAILED,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> crystal_core::Result<u8> {
    let budget = match cli.budget {
        Some(cells) => Budget::new(cells)?,
        None => Budget::default(),
    };
    match cli.command {
        Command::Crystal { scales } => cmd_crystal(&scales),
        Command::Verify {
            n,
            set,
            m,
            out,
            eval,
        } => {
            let set = parse_int_list(&set)?;
            let report = verify_theorem(n, &set, m, &options(budget, &eval))?;
            emit_report(&report, out.as_deref(), eval.threshold.into())
        }
        Command::Sweep {
            n,
            m,
            set,
            csv,
            series,
            eval,
        } => {
            let set = set.as_deref().map(parse_int_list).transpose()?;
            let rows = sweep(n, m, set.as_deref(), &options(budget, &eval));
            let choice = eval.threshold.into();
            match csv {
                Some(p) => write_csv(BufWriter::new(File::create(p)?), &rows, choice)?,
                None => write_csv(io::stdout().lock(), &rows, choice)?,
            }
            if let Some(p) = series {
                let mut w = BufWriter::new(File::create(p)?);
                write_series(&mut w, &rows, choice)?;
                w.flush()?;
            }
            let worst = rows
                .iter()
                .map(|(n, m, r)| match r {
                    Ok(rep) if rep.pass => 0,
                    Ok(_) => EXIT_CHECK_FAILED,
                    Err(e) => {
                        eprintln!("n={n} m={m}: {e}");
                        exit_code(e)
                    }
                })
                .max()
                .unwrap_or(0);
            Ok(worst)
        }
        Command::Cube {
            n,
            m,
            lo,
            hi,
            out,
            eval,
        } => {
            let hi = hi.unwrap_or(m as i64);
            let report = cube_counterexample_with(n, m, lo, hi, &options(budget, &eval))?;
            emit_report(&report, out.as_deref(), ThresholdChoice::Stated)
        }
        Command::Family {
            n,
            set,
            dilation_closed,
            shape,
        } => {
            let set = parse_int_list(&set)?;
            let family = FamilySpec::new(n, vec![set; n.saturating_sub(1)], dilation_closed)?;
            match shape {
                Some(s) => {
                    let shape = Shape::new(parse_int_list(&s)?);
                    if shape.dim() != n {
                        return Err(Error::Parameter(format!(
                            "shape {shape} is not {n}-dimensional"
                        )));
                    }
                    let member = family.is_member(&shape);
                    println!("{shape}: {member:?}");
                    Ok(if member.is_member() {
                        0
                    } else {
                        EXIT_CHECK_FAILED
                    })
                }
                None => {
                    let mut out = BufWriter::new(io::stdout().lock());
                    for s in family.generate_shapes() {
                        writeln!(out, "{s}")?;
                    }
                    out.flush()?;
                    Ok(0)
                }
            }
        }
    }
}

fn options(budget: Budget, eval: &EvalArgs) -> VerifyOptions {
    VerifyOptions {
        budget,
        comparison: if eval.strict {
            Comparison::Above
        } else {
            Comparison::AtLeast
        },
    }
}

fn cmd_crystal(scales: &str) -> crystal_core::Result<u8> {
    let scales: ScaleSet = scales.parse()?;
    let c = Crystal1D::build(scales)?;
    let set = c.set();
    let r = set.resolution();
    let mut out = BufWriter::new(io::stdout().lock());
    writeln!(out, "scales: {}", c.scales())?;
    writeln!(
        out,
        "grid: {} cells of length 2^{r} in [0, 2^{}]",
        set.cell_count(),
        set.extent()
    )?;
    // maximal runs of occupied cells
    let cell = |k: usize| DyadicRational::from(k as u64).mul_pow2(r);
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for k in set.cells() {
        match runs.last_mut() {
            Some((_, end)) if *end == k => *end += 1,
            _ => runs.push((k, k + 1)),
        }
    }
    writeln!(out, "cells: {} in {} intervals", set.popcount(), runs.len())?;
    for (a, b) in &runs {
        writeln!(out, "  [{}, {})", cell(*a), cell(*b))?;
    }
    let m = c.measure();
    writeln!(out, "measure {} = {}", m, m.to_scientific())?;
    out.flush()?;
    Ok(0)
}

fn emit_report(
    report: &VerificationReport,
    out: Option<&Path>,
    choice: ThresholdChoice,
) -> crystal_core::Result<u8> {
    if let Some(p) = out {
        let mut f = BufWriter::new(File::create(p)?);
        f.write_all(report.to_json()?.as_bytes())?;
        f.write_all(b"\n")?;
        f.flush()?;
    }
    let mut o = io::stdout().lock();
    writeln!(
        o,
        "n={} m={} |E| = {} = {}",
        report.n,
        report.m,
        report.measure_e,
        report.measure_e.to_scientific()
    )?;
    for s in &report.superlevels {
        writeln!(
            o,
            "M 1_E {} {}: measure {} = {}, ratio {}",
            s.comparison.symbol(),
            s.threshold,
            s.measure,
            s.measure.to_scientific(),
            s.ratio.decimal(DECIMAL_DIGITS)
        )?;
    }
    if let Some(s) = report.summary(choice) {
        writeln!(o, "summary ratio: {}", s.ratio.decimal(DECIMAL_DIGITS))?;
    }
    for c in &report.checks {
        writeln!(
            o,
            "[{}] {}: {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        )?;
    }
    Ok(if report.pass { 0 } else { EXIT_CHECK_FAILED })
}
