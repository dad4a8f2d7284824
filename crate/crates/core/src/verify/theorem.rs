use std::time::Instant;

use rayon::prelude::*;

use super::checks::{disjointness_with, homogeneity_with, Rasters};
use super::instance::{binomial, TheoremInstance};
use super::report::{
    CheckOutcome, ReportKind, SuperlevelEntry, SweepRow, VerificationReport, EVALUATION_NOTE,
    REPORT_SCHEMA_VERSION,
};
use crate::crystal::Shape;
use crate::dyadic::{DyadicRational, ExactRatio};
use crate::error::{Error, Result};
use crate::evaluator::{
    maximal_field, superlevel_mask, AverageField, Budget, Comparison, GridSpec, Mask,
};
use crate::family::find_progression;

#[derive(Clone, Copy, Debug, Default)]
pub struct VerifyOptions {
    pub budget: Budget,
    /// Comparison used for the reported superlevel measures. The certified
    /// inclusion is always checked with `>=`.
    pub comparison: Comparison,
}

/// `m^(n-1) 2^m |E|`.
pub fn growth_scale(n: usize, m: usize, measure_e: &DyadicRational) -> DyadicRational {
    let m_pow = num_bigint::BigInt::from(m).pow((n - 1) as u32);
    DyadicRational::from_int(m_pow).mul_pow2(m as i64) * measure_e
}

/// Runs the full construction for a length-`m` progression found in `set`:
/// both propositions on every index, the maximal field over every shape of the
/// family that fits the grid, and the superlevel measures at `2^-(m-1)` and
/// `2^-m`.
pub fn verify_theorem(
    n: usize,
    set: &[i64],
    m: usize,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let started = Instant::now();
    if n < 2 || m < 2 {
        return Err(Error::Parameter(format!(
            "need n >= 2 and m >= 2, got n={n}, m={m}"
        )));
    }
    let progression = find_progression(set, m).ok_or_else(|| Error::Unsatisfiable {
        m,
        set: set.to_vec(),
    })?;
    let instance = TheoremInstance::with_family_set(n, progression, set)?;
    let budget = opts.budget;
    let rasters = Rasters::new(&instance, budget)?;

    let homogeneity = instance
        .indices()
        .par_iter()
        .zip(rasters.ys.par_iter())
        .map(|(i, y)| homogeneity_with(&instance, i, &rasters.e, y))
        .collect::<Result<Vec<_>>>()?;
    let disjointness = disjointness_with(&instance, &rasters, budget)?;

    let grid = instance.grid();
    let all_shapes = instance.family().generate_shapes();
    let shapes: Vec<Shape> = all_shapes
        .iter()
        .filter(|s| grid.admits(s))
        .cloned()
        .collect();
    let field = maximal_field(&rasters.e, &shapes)?;

    let measure_e = rasters.e.measure();
    let scale = growth_scale(n, m, &measure_e);
    let resonant = DyadicRational::pow2(1 - m as i64);
    let stated = DyadicRational::pow2(-(m as i64));
    let superlevels = vec![
        superlevel_entry(&field, &resonant, opts.comparison, &scale)?,
        superlevel_entry(&field, &stated, opts.comparison, &scale)?,
    ];

    let union_mask = rasters.union_y()?;
    let certified = superlevel_mask(&field, &resonant, Comparison::AtLeast)?;
    let outside = union_mask.first_outside(&certified)?;

    let expected_indices = binomial((m - 1 + n - 1) as u64, (n - 1) as u64) as usize;
    let failed: Vec<String> = homogeneity
        .iter()
        .filter(|h| !h.pass)
        .map(|h| format!("{:?}", h.index))
        .collect();
    let checks = vec![
        CheckOutcome {
            name: "membership".into(),
            pass: true,
            detail: format!("all {} R(i) belong to the family", instance.indices().len()),
        },
        CheckOutcome {
            name: "index_count".into(),
            pass: instance.indices().len() == expected_indices,
            detail: format!(
                "{} indices, binomial({}, {}) = {expected_indices}",
                instance.indices().len(),
                m + n - 2,
                n - 1
            ),
        },
        CheckOutcome {
            name: "homogeneity".into(),
            pass: failed.is_empty(),
            detail: if failed.is_empty() {
                format!("every Y(i) lies in {{M_R(i) 1_E >= 2^-{}}}", m - 1)
            } else {
                format!("failing indices: {}", failed.join(" "))
            },
        },
        CheckOutcome {
            name: "disjointness".into(),
            pass: disjointness.pass,
            detail: format!(
                "min delta = {}, rho = {}",
                disjointness.min_delta.decimal(6),
                disjointness.rho.decimal(6)
            ),
        },
        CheckOutcome {
            name: "certified_inclusion".into(),
            pass: outside.is_none(),
            detail: match &outside {
                None => format!("union of Y(i) lies in {{M 1_E >= 2^-{}}}", m - 1),
                Some(c) => format!("cell {c:?} of the union is below 2^-{}", m - 1),
            },
        },
        CheckOutcome {
            name: "union_lower_bound".into(),
            pass: union_mask.measure() <= superlevels[0].measure,
            detail: format!(
                "|U Y(i)| = {} <= S = {}",
                union_mask.measure(),
                superlevels[0].measure
            ),
        },
        CheckOutcome {
            name: "nested_thresholds".into(),
            pass: superlevels[1].measure >= superlevels[0].measure,
            detail: "S(2^-m) >= S(2^-(m-1))".into(),
        },
    ];
    let pass = checks.iter().all(|c| c.pass);

    Ok(VerificationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        kind: ReportKind::Theorem,
        n,
        m,
        set: sorted(set),
        progression: instance.progression().terms().to_vec(),
        grid_resolutions: grid.resolutions().to_vec(),
        grid_extents: grid.extents().to_vec(),
        evaluation: EVALUATION_NOTE,
        measure_e,
        index_count: instance.indices().len(),
        shapes_evaluated: shapes.len(),
        shapes_outside_grid: all_shapes.len() - shapes.len(),
        sum_y: Some(disjointness.sum_y.clone()),
        union_y: Some(disjointness.union_y.clone()),
        rho: Some(disjointness.rho.clone()),
        min_delta: Some(disjointness.min_delta.clone()),
        superlevels,
        checks,
        homogeneity,
        disjointness: Some(disjointness),
        pass,
        runtime_ms: started.elapsed().as_millis() as u64,
    })
}

fn sorted(set: &[i64]) -> Vec<i64> {
    let mut v = set.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

fn superlevel_entry(
    field: &AverageField,
    threshold: &DyadicRational,
    comparison: Comparison,
    scale: &DyadicRational,
) -> Result<SuperlevelEntry> {
    let measure = superlevel_mask(field, threshold, comparison)?.measure();
    let ratio = ratio(&measure, scale)?;
    Ok(SuperlevelEntry {
        threshold: threshold.clone(),
        comparison,
        measure,
        ratio,
    })
}

fn ratio(a: &DyadicRational, b: &DyadicRational) -> Result<ExactRatio> {
    a.ratio(b)
        .ok_or_else(|| Error::Construction("zero normalization".into()))
}

/// Superlevel set of the aligned strong maximal function of the unit cube
/// at `2^-m`, over every rectangle with exponents in `[0, m]^n`.
pub fn cube_counterexample(n: usize, m: usize, opts: &VerifyOptions) -> Result<VerificationReport> {
    cube_counterexample_with(n, m, 0, m as i64, opts)
}

/// As [`cube_counterexample`], with shape exponents restricted to `[lo, hi]`
/// on every axis (`0 <= lo <= hi <= m`).
pub fn cube_counterexample_with(
    n: usize,
    m: usize,
    lo: i64,
    hi: i64,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let started = Instant::now();
    if n == 0 || m == 0 {
        return Err(Error::Parameter(format!(
            "need n >= 1 and m >= 1, got n={n}, m={m}"
        )));
    }
    if !(0 <= lo && lo <= hi && hi <= m as i64) {
        return Err(Error::Parameter(format!(
            "shape exponent range [{lo}, {hi}] must lie in [0, {m}]"
        )));
    }
    let grid = GridSpec::new(vec![0; n], vec![m as i64; n])?;
    let mut q = Mask::empty(grid.clone(), opts.budget)?;
    q.set(0);
    let shapes = cube_shapes(n, lo, hi);
    let field = maximal_field(&q, &shapes)?;
    let measure_q = q.measure();
    let scale = growth_scale(n, m, &measure_q);
    let stated = DyadicRational::pow2(-(m as i64));
    let entry = superlevel_entry(&field, &stated, opts.comparison, &scale)?;
    let checks = vec![CheckOutcome {
        name: "positive_ratio".into(),
        pass: entry.ratio.is_positive(),
        detail: format!("S / (m^(n-1) 2^m |Q|) = {}", entry.ratio.decimal(6)),
    }];
    let pass = checks.iter().all(|c| c.pass);
    Ok(VerificationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        kind: ReportKind::Cube,
        n,
        m,
        set: Vec::new(),
        progression: Vec::new(),
        grid_resolutions: grid.resolutions().to_vec(),
        grid_extents: grid.extents().to_vec(),
        evaluation: EVALUATION_NOTE,
        measure_e: measure_q,
        index_count: 0,
        shapes_evaluated: shapes.len(),
        shapes_outside_grid: 0,
        sum_y: None,
        union_y: None,
        rho: None,
        min_delta: None,
        superlevels: vec![entry],
        checks,
        homogeneity: Vec::new(),
        disjointness: None,
        pass,
        runtime_ms: started.elapsed().as_millis() as u64,
    })
}

/// Every exponent vector in `[lo, hi]^n`.
pub fn cube_shapes(n: usize, lo: i64, hi: i64) -> Vec<Shape> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p: Vec<i64>| {
                (lo..=hi).map(move |a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    out.into_iter().map(Shape::new).collect()
}

/// Runs [`verify_theorem`] for each `m` in the range. Without an explicit set,
/// row `m` uses `{0, ..., m-1}`.
pub fn sweep(
    n: usize,
    ms: std::ops::RangeInclusive<usize>,
    set: Option<&[i64]>,
    opts: &VerifyOptions,
) -> Vec<SweepRow> {
    ms.map(|m| {
        let default: Vec<i64> = (0..m as i64).collect();
        let set = set.unwrap_or(&default);
        (n, m, verify_theorem(n, set, m, opts))
    })
    .collect()
}
