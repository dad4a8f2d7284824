use num_bigint::BigInt;

use super::{Budget, GridSpec};
use crate::crystal::Shape;
use crate::dyadic::{DyadicRational, ExactRatio};
use crate::error::{param, Result};

/// Above this many rectangles the union is measured on a grid instead of by
/// inclusion-exclusion.
pub const INCLUSION_EXCLUSION_LIMIT: usize = 20;

/// Measures of a union of anchored rectangles and of each rectangle's
/// private part `R_i \ U_{j != i} R_j`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AnchoredUnion {
    pub shapes: Vec<Shape>,
    pub union: DyadicRational,
    pub exclusive: Vec<DyadicRational>,
}

impl AnchoredUnion {
    /// `|R_i \ U_{j != i} R_j| / |R_i|` for each `i`.
    pub fn deltas(&self) -> Vec<ExactRatio> {
        self.shapes
            .iter()
            .zip(&self.exclusive)
            .map(|(s, e)| e.ratio(&s.volume()).expect("volume is nonzero"))
            .collect()
    }

    pub fn min_delta(&self) -> Option<ExactRatio> {
        self.deltas().into_iter().min()
    }
}

/// Anchored rectangles `[0, 2^a_1] x ... x [0, 2^a_n]` are closed under
/// intersection (componentwise minimum of exponents), so small unions are
/// measured exactly by inclusion-exclusion. Larger ones are rasterized.
pub fn anchored_union_measure(shapes: &[Shape], budget: Budget) -> Result<AnchoredUnion> {
    let Some(first) = shapes.first() else {
        return Ok(AnchoredUnion {
            shapes: Vec::new(),
            union: DyadicRational::zero(),
            exclusive: Vec::new(),
        });
    };
    let n = first.dim();
    if shapes.iter().any(|s| s.dim() != n) {
        return param("anchored rectangles must share a dimension");
    }
    if shapes.len() <= INCLUSION_EXCLUSION_LIMIT {
        Ok(inclusion_exclusion(shapes))
    } else {
        rasterized(shapes, budget)
    }
}

fn inclusion_exclusion(shapes: &[Shape]) -> AnchoredUnion {
    let k = shapes.len();
    let n = shapes[0].dim();
    // All volumes are integers in units of 2^base.
    let base: i64 = (0..n)
        .map(|j| shapes.iter().map(|s| s.0[j]).min().unwrap())
        .sum();

    // meet exponents of every subset S, built from S without its lowest bit
    let mut meets = vec![i64::MAX; (1usize << k) * n];
    let mut union = BigInt::from(0);
    // sum of the inclusion-exclusion terms over subsets containing i, which
    // is |U all| - |U others| = |R_i \ U others|
    let mut exclusive = vec![BigInt::from(0); k];
    for set in 1usize..1 << k {
        let low = set.trailing_zeros() as usize;
        let rest = set & (set - 1);
        let mut vol_exp = 0;
        for j in 0..n {
            let m = meets[rest * n + j].min(shapes[low].0[j]);
            meets[set * n + j] = m;
            vol_exp += m;
        }
        let vol = BigInt::from(1) << (vol_exp - base) as usize;
        let term = if set.count_ones() % 2 == 1 { vol } else { -vol };
        union += &term;
        for (i, acc) in exclusive.iter_mut().enumerate() {
            if set >> i & 1 == 1 {
                *acc += &term;
            }
        }
    }
    AnchoredUnion {
        shapes: shapes.to_vec(),
        union: DyadicRational::new(union, base),
        exclusive: exclusive
            .into_iter()
            .map(|e| DyadicRational::new(e, base))
            .collect(),
    }
}

fn rasterized(shapes: &[Shape], budget: Budget) -> Result<AnchoredUnion> {
    let n = shapes[0].dim();
    let lo: Vec<i64> = (0..n)
        .map(|j| shapes.iter().map(|s| s.0[j]).min().unwrap())
        .collect();
    let hi: Vec<i64> = (0..n)
        .map(|j| shapes.iter().map(|s| s.0[j]).max().unwrap())
        .collect();
    let grid = GridSpec::new(lo, hi)?;
    budget.check(grid.total_cells())?;
    let strides = grid.strides();
    let total = grid.total_cells() as usize;

    // cover count and the last owner; a cell with count 1 belongs to its owner only
    let mut count = vec![0u32; total];
    let mut owner = vec![0u32; total];
    for (i, s) in shapes.iter().enumerate() {
        let window = grid.window(s)?;
        for_each_in_box(&window, &strides, |idx| {
            count[idx] += 1;
            owner[idx] = i as u32;
        });
    }
    let mut exclusive_cells = vec![0u64; shapes.len()];
    let mut union_cells = 0u64;
    for (c, o) in count.iter().zip(&owner) {
        if *c > 0 {
            union_cells += 1;
        }
        if *c == 1 {
            exclusive_cells[*o as usize] += 1;
        }
    }
    let cell = grid.cell_volume_exponent();
    Ok(AnchoredUnion {
        shapes: shapes.to_vec(),
        union: DyadicRational::from(union_cells).mul_pow2(cell),
        exclusive: exclusive_cells
            .into_iter()
            .map(|c| DyadicRational::from(c).mul_pow2(cell))
            .collect(),
    })
}

fn for_each_in_box(window: &[usize], strides: &[usize], mut f: impl FnMut(usize)) {
    let n = window.len();
    let mut p = vec![0usize; n];
    loop {
        f(p.iter().zip(strides).map(|(a, s)| a * s).sum());
        let mut j = n;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            p[j] += 1;
            if p[j] < window[j] {
                break;
            }
            p[j] = 0;
        }
    }
}
