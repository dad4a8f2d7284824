use rayon::prelude::*;

use super::{GridSpec, Mask, PrefixSums};
use crate::crystal::Shape;
use crate::dyadic::{Bits, DyadicRational};
use crate::error::Result;

/// Exact averages of a mask over every cell-aligned placement of one shape
/// that lies inside the bounding box.
///
/// Placements that overhang the box are not listed: with the exterior counted
/// as empty, such a placement never beats the in-box placement of the same
/// shape obtained by pushing it back inside, which covers the same cell.
#[derive(Clone, Debug)]
pub struct PlacementAverages {
    shape: Shape,
    window: Vec<usize>,
    positions: Vec<usize>,
    counts: Vec<u64>,
    denominator_exp: u32,
}

impl PlacementAverages {
    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// Window length in cells per axis.
    pub fn window(&self) -> &[usize] {
        &self.window
    }

    /// Number of placements per axis.
    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    /// Set cells under each placement, row-major over the lower corner.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// The average at the placement with lower corner `corner`.
    pub fn value(&self, corner: &[usize]) -> DyadicRational {
        let idx: usize = corner
            .iter()
            .zip(super::strides(&self.positions))
            .map(|(c, s)| c * s)
            .sum();
        DyadicRational::from(self.counts[idx]).mul_pow2(-(self.denominator_exp as i64))
    }
}

/// Averages of `mask` over all in-box aligned placements of `shape`.
pub fn shape_average_field(mask: &Mask, shape: &Shape) -> Result<PlacementAverages> {
    let window = mask.grid().window(shape)?;
    averages_with(&PrefixSums::new(mask), shape.clone(), window)
}

fn averages_with(ps: &PrefixSums, shape: Shape, window: Vec<usize>) -> Result<PlacementAverages> {
    let (positions, counts) = ps.window_sums(&window);
    let denominator_exp = window.iter().map(|w| w.trailing_zeros()).sum();
    Ok(PlacementAverages {
        shape,
        window,
        positions,
        counts,
        denominator_exp,
    })
}

/// Per-cell exact values `numerator / 2^denominator_exp`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AverageField {
    grid: GridSpec,
    numerators: Vec<u64>,
    denominator_exp: u32,
}

impl AverageField {
    pub fn new(grid: GridSpec, numerators: Vec<u64>, denominator_exp: u32) -> Result<Self> {
        if numerators.len() as u128 != grid.total_cells() {
            return crate::error::param("numerator count does not match grid");
        }
        if denominator_exp > 63 || numerators.iter().any(|&v| v > 1u64 << denominator_exp) {
            return crate::error::param("average field values must lie in [0, 1]");
        }
        Ok(Self {
            grid,
            numerators,
            denominator_exp,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn numerators(&self) -> &[u64] {
        &self.numerators
    }

    pub fn denominator_exp(&self) -> u32 {
        self.denominator_exp
    }

    pub fn len(&self) -> usize {
        self.numerators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numerators.is_empty()
    }

    pub fn value(&self, index: usize) -> DyadicRational {
        DyadicRational::from(self.numerators[index]).mul_pow2(-(self.denominator_exp as i64))
    }

    pub fn value_at(&self, cell: &[usize]) -> DyadicRational {
        self.value(self.grid.index(cell))
    }

    /// Cellwise comparison with an exact threshold.
    pub fn passes(&self, index: usize, threshold: &DyadicRational, cmp: Comparison) -> bool {
        self.numerators[index] >= cmp.integer_cut(threshold, self.denominator_exp)
    }
}

/// How a field value is compared against a threshold.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `value >= t`
    #[default]
    AtLeast,
    /// `value > t`
    Above,
}

impl Comparison {
    /// Smallest numerator (over `2^k`) that passes; saturates at `u64::MAX`.
    fn integer_cut(self, t: &DyadicRational, k: u32) -> u64 {
        let cut = match self {
            Comparison::AtLeast => t.ceil_scaled(k as i64),
            // floor(t 2^k) + 1
            Comparison::Above => -(-t).ceil_scaled(k as i64) + 1,
        };
        if cut <= 0.into() {
            0
        } else {
            u64::try_from(cut).unwrap_or(u64::MAX)
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::AtLeast => ">=",
            Comparison::Above => ">",
        }
    }
}

/// Maximal field over `shapes`: for each cell, the largest average over all
/// in-box aligned placements of any shape that contain the cell.
pub fn maximal_field(mask: &Mask, shapes: &[Shape]) -> Result<AverageField> {
    let grid = mask.grid();
    let windows: Vec<Vec<usize>> = shapes
        .iter()
        .map(|s| grid.window(s))
        .collect::<Result<_>>()?;
    let k_max = windows
        .iter()
        .map(|w| w.iter().map(|x| x.trailing_zeros()).sum::<u32>())
        .max()
        .unwrap_or(0);
    let ps = PrefixSums::new(mask);
    let dims = grid.dims();
    let len = mask.len();

    let numerators = shapes
        .par_iter()
        .zip(windows.par_iter())
        .map(|(shape, window)| {
            let avg = averages_with(&ps, shape.clone(), window.clone()).expect("window validated");
            spread(&avg, &dims, k_max)
        })
        .reduce(
            || vec![0u64; len],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x = (*x).max(*y));
                a
            },
        );

    AverageField::new(grid.clone(), numerators, k_max)
}

/// Lifts placement averages to cells: each cell receives the maximum over the
/// placements covering it, rescaled to denominator `2^k_max`.
fn spread(avg: &PlacementAverages, dims: &[usize], k_max: u32) -> Vec<u64> {
    let shift = k_max - avg.denominator_exp;
    let mut data: Vec<u64> = avg.counts.iter().map(|c| c << shift).collect();
    let mut cur = avg.positions.clone();
    for axis in 0..dims.len() {
        data = spread_axis(&data, &cur, axis, avg.window[axis], dims[axis]);
        cur[axis] = dims[axis];
    }
    data
}

/// Along `axis`, replaces `P` placement values by `N = P + w - 1` cell values
/// `out[x] = max(in[x - w + 1 ..= x])`, missing entries treated as zero.
///
/// Uses the van Herk / Gil-Werman block decomposition: with the input padded
/// by `w - 1` zeros on the left, the window for `x` is `[x, x + w)` and equals
/// `max(suffix_max[x], prefix_max[x + w - 1])` over blocks of length `w`.
fn spread_axis(data: &[u64], dims: &[usize], axis: usize, w: usize, n: usize) -> Vec<u64> {
    let p = dims[axis];
    debug_assert_eq!(p + w - 1, n);
    let outer: usize = dims[..axis].iter().product();
    let inner: usize = dims[axis + 1..].iter().product();
    let mut out = vec![0u64; outer * n * inner];
    if w == 1 {
        out.copy_from_slice(data);
        return out;
    }
    let ext = n + w - 1;
    let mut prefix = vec![0u64; ext * inner];
    let mut suffix = vec![0u64; ext * inner];
    for o in 0..outer {
        let src = &data[o * p * inner..(o + 1) * p * inner];
        let row = |q: usize| -> Option<&[u64]> {
            let k = q.checked_sub(w - 1)?;
            (k < p).then(|| &src[k * inner..(k + 1) * inner])
        };
        for q in 0..ext {
            let (before, cur) = prefix.split_at_mut(q * inner);
            let cur = &mut cur[..inner];
            match (q % w == 0, row(q)) {
                (true, Some(r)) => cur.copy_from_slice(r),
                (true, None) => cur.fill(0),
                (false, r) => {
                    let prev = &before[(q - 1) * inner..];
                    match r {
                        Some(r) => {
                            for i in 0..inner {
                                cur[i] = prev[i].max(r[i]);
                            }
                        }
                        None => cur.copy_from_slice(&prev[..inner]),
                    }
                }
            }
        }
        for q in (0..ext).rev() {
            let (cur, after) = suffix.split_at_mut((q + 1) * inner);
            let cur = &mut cur[q * inner..];
            let block_end = q % w == w - 1 || q == ext - 1;
            match (block_end, row(q)) {
                (true, Some(r)) => cur.copy_from_slice(r),
                (true, None) => cur.fill(0),
                (false, r) => {
                    let next = &after[..inner];
                    match r {
                        Some(r) => {
                            for i in 0..inner {
                                cur[i] = next[i].max(r[i]);
                            }
                        }
                        None => cur.copy_from_slice(next),
                    }
                }
            }
        }
        let dst = &mut out[o * n * inner..(o + 1) * n * inner];
        for x in 0..n {
            let s = &suffix[x * inner..(x + 1) * inner];
            let g = &prefix[(x + w - 1) * inner..(x + w) * inner];
            let d = &mut dst[x * inner..(x + 1) * inner];
            for i in 0..inner {
                d[i] = s[i].max(g[i]);
            }
        }
    }
    out
}

/// Cells whose value passes the threshold.
pub fn superlevel_mask(
    field: &AverageField,
    threshold: &DyadicRational,
    cmp: Comparison,
) -> Result<Mask> {
    let cut = cmp.integer_cut(threshold, field.denominator_exp);
    let bits = Bits::from_fn(field.len(), |i| field.numerators[i] >= cut);
    Mask::from_bits(field.grid.clone(), bits)
}

/// Measure of `{value >= threshold}`.
pub fn superlevel_measure(field: &AverageField, threshold: &DyadicRational) -> DyadicRational {
    superlevel_measure_with(field, threshold, Comparison::AtLeast)
}

pub fn superlevel_measure_with(
    field: &AverageField,
    threshold: &DyadicRational,
    cmp: Comparison,
) -> DyadicRational {
    let cut = cmp.integer_cut(threshold, field.denominator_exp);
    let count = field.numerators.iter().filter(|&&v| v >= cut).count() as u64;
    DyadicRational::from(count).mul_pow2(field.grid.cell_volume_exponent())
}
