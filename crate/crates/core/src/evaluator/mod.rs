//! Exact evaluation of aligned maximal operators on cell grids.
//!
//! Sets are rasterized onto a grid with per-axis resolution `2^r_j` and extent
//! `[0, 2^L_j]`. Rectangle averages come from an n-dimensional prefix table,
//! and the maximal field over a set of shapes is the pointwise maximum of
//! per-shape average fields, spread back onto cells with separable sliding
//! window maxima.
//!
//! Only cell-aligned translates are enumerated, so every field value is a
//! lower bound for the true maximal function at that cell.

mod dump;
mod field;
mod prefix;
mod union;

use std::fmt;

use crate::crystal::{CrystalND, Shape};
use crate::dyadic::{Bits, DyadicRational};
use crate::error::{param, Error, Result};

pub use dump::{read_dump, write_dump, Dump, DUMP_MAGIC, DUMP_VERSION};
pub use field::{
    maximal_field, shape_average_field, superlevel_mask, superlevel_measure,
    superlevel_measure_with, AverageField, Comparison, PlacementAverages,
};
pub use prefix::PrefixSums;
pub use union::{anchored_union_measure, AnchoredUnion, INCLUSION_EXCLUSION_LIMIT};

/// Default cell budget for a single grid.
pub const DEFAULT_BUDGET: u64 = 1 << 30;
/// No configuration may raise the budget above this.
pub const HARD_BUDGET_CAP: u64 = 1 << 36;
/// Environment variable overriding the default budget.
pub const BUDGET_ENV: &str = "CRYSTAL_GRID_BUDGET";

/// Upper bound on the number of cells a grid may have.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Budget(u64);

impl Budget {
    pub fn new(cells: u64) -> Result<Self> {
        if cells == 0 || cells > HARD_BUDGET_CAP {
            return param(format!("budget {cells} outside 1..={HARD_BUDGET_CAP}"));
        }
        Ok(Self(cells))
    }

    /// Reads [`BUDGET_ENV`], falling back to [`DEFAULT_BUDGET`].
    pub fn from_env() -> Result<Self> {
        match std::env::var(BUDGET_ENV) {
            Ok(v) => {
                let cells = v
                    .trim()
                    .parse::<u64>()
                    .map_err(|_| Error::Parse(format!("{BUDGET_ENV}={v} is not a cell count")))?;
                Self::new(cells)
            }
            Err(_) => Ok(Self::default()),
        }
    }

    pub fn cells(self) -> u64 {
        self.0
    }

    pub fn check(self, required: u128) -> Result<()> {
        if required > self.0 as u128 {
            return Err(Error::Budget {
                required,
                budget: self.0,
            });
        }
        Ok(())
    }
}

impl Default for Budget {
    fn default() -> Self {
        Self(DEFAULT_BUDGET)
    }
}

/// Per-axis resolution and extent exponents.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct GridSpec {
    resolutions: Vec<i64>,
    extents: Vec<i64>,
}

impl GridSpec {
    pub fn new(resolutions: Vec<i64>, extents: Vec<i64>) -> Result<Self> {
        if resolutions.is_empty() || resolutions.len() != extents.len() {
            return param("grid needs matching, non-empty resolution and extent lists");
        }
        if let Some(j) = (0..resolutions.len()).find(|&j| resolutions[j] > extents[j]) {
            return param(format!(
                "axis {j}: resolution {} exceeds extent {}",
                resolutions[j], extents[j]
            ));
        }
        if resolutions
            .iter()
            .zip(&extents)
            .map(|(r, l)| l - r)
            .sum::<i64>()
            > 62
        {
            return param("grid has more than 2^62 cells");
        }
        Ok(Self {
            resolutions,
            extents,
        })
    }

    /// Smallest grid on which `e` can be rasterized: per axis, the resolution
    /// is the finest scale and the extent the coarsest.
    pub fn for_crystal(e: &CrystalND) -> Result<Self> {
        Self::new(
            e.factors().iter().map(|c| c.scales().min()).collect(),
            e.factors().iter().map(|c| c.scales().max()).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.resolutions.len()
    }

    pub fn resolutions(&self) -> &[i64] {
        &self.resolutions
    }

    pub fn extents(&self) -> &[i64] {
        &self.extents
    }

    pub fn dims(&self) -> Vec<usize> {
        self.resolutions
            .iter()
            .zip(&self.extents)
            .map(|(r, l)| 1usize << (l - r))
            .collect()
    }

    pub fn total_cells(&self) -> u128 {
        1u128 << self.levels()
    }

    fn levels(&self) -> i64 {
        self.resolutions
            .iter()
            .zip(&self.extents)
            .map(|(r, l)| l - r)
            .sum()
    }

    /// `log2` of the cell volume.
    pub fn cell_volume_exponent(&self) -> i64 {
        self.resolutions.iter().sum()
    }

    pub fn cell_volume(&self) -> DyadicRational {
        DyadicRational::pow2(self.cell_volume_exponent())
    }

    pub fn box_volume(&self) -> DyadicRational {
        DyadicRational::pow2(self.extents.iter().sum())
    }

    /// Row-major strides, last axis fastest.
    pub fn strides(&self) -> Vec<usize> {
        strides(&self.dims())
    }

    pub fn index(&self, cell: &[usize]) -> usize {
        cell.iter().zip(self.strides()).map(|(c, s)| c * s).sum()
    }

    pub fn coords(&self, mut index: usize) -> Vec<usize> {
        let dims = self.dims();
        let mut out = vec![0; dims.len()];
        for j in (0..dims.len()).rev() {
            out[j] = index % dims[j];
            index /= dims[j];
        }
        out
    }

    /// Whether a rectangle of this shape is a whole number of cells on every
    /// axis and fits in the bounding box.
    pub fn admits(&self, shape: &Shape) -> bool {
        shape.dim() == self.dim()
            && shape
                .exponents()
                .iter()
                .zip(self.resolutions.iter().zip(&self.extents))
                .all(|(a, (r, l))| r <= a && a <= l)
    }

    /// Window length in cells on each axis.
    pub fn window(&self, shape: &Shape) -> Result<Vec<usize>> {
        if shape.dim() != self.dim() {
            return param(format!(
                "shape {shape} has dimension {}, grid has {}",
                shape.dim(),
                self.dim()
            ));
        }
        let mut out = Vec::with_capacity(self.dim());
        for (j, a) in shape.exponents().iter().enumerate() {
            let (r, l) = (self.resolutions[j], self.extents[j]);
            if *a < r {
                return param(format!(
                    "shape {shape} is finer than the grid on axis {j} (2^{a} < 2^{r})"
                ));
            }
            if *a > l {
                return param(format!(
                    "shape {shape} does not fit the grid on axis {j} (2^{a} > 2^{l})"
                ));
            }
            out.push(1usize << (a - r));
        }
        Ok(out)
    }

    pub fn same_as(&self, other: &Self) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch {
                left: self.to_string(),
                right: other.to_string(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let axes: Vec<String> = self
            .resolutions
            .iter()
            .zip(&self.extents)
            .map(|(r, l)| format!("2^{r}..2^{l}"))
            .collect();
        write!(f, "[{}]", axes.join(" x "))
    }
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for j in (0..dims.len().saturating_sub(1)).rev() {
        s[j] = s[j + 1] * dims[j + 1];
    }
    s
}

/// Bit mask over the cells of a grid.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Mask {
    grid: GridSpec,
    bits: Bits,
}

impl Mask {
    pub fn empty(grid: GridSpec, budget: Budget) -> Result<Self> {
        budget.check(grid.total_cells())?;
        let n = grid.total_cells() as usize;
        Ok(Self {
            grid,
            bits: Bits::new(n),
        })
    }

    pub fn from_fn(
        grid: GridSpec,
        budget: Budget,
        mut f: impl FnMut(&[usize]) -> bool,
    ) -> Result<Self> {
        let mut m = Self::empty(grid, budget)?;
        for i in 0..m.len() {
            if f(&m.grid.coords(i)) {
                m.bits.set(i);
            }
        }
        Ok(m)
    }

    pub(crate) fn from_bits(grid: GridSpec, bits: Bits) -> Result<Self> {
        if bits.len() as u128 != grid.total_cells() {
            return param("bit count does not match grid");
        }
        Ok(Self { grid, bits })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn bits(&self) -> &Bits {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, index: usize) -> bool {
        self.bits.get(index)
    }

    pub fn get_cell(&self, cell: &[usize]) -> bool {
        self.bits.get(self.grid.index(cell))
    }

    pub fn set(&mut self, index: usize) {
        self.bits.set(index);
    }

    pub fn popcount(&self) -> u64 {
        self.bits.count_ones()
    }

    pub fn measure(&self) -> DyadicRational {
        DyadicRational::from(self.popcount()).mul_pow2(self.grid.cell_volume_exponent())
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.grid.same_as(&other.grid)?;
        Ok(Self {
            grid: self.grid.clone(),
            bits: self.bits.zip_with(&other.bits, |a, b| a | b),
        })
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.grid.same_as(&other.grid)?;
        Ok(Self {
            grid: self.grid.clone(),
            bits: self.bits.zip_with(&other.bits, |a, b| a & b),
        })
    }

    pub fn is_subset(&self, other: &Self) -> Result<bool> {
        self.grid.same_as(&other.grid)?;
        Ok(self.bits.is_subset(&other.bits))
    }

    /// First cell of `self` missing from `other`.
    pub fn first_outside(&self, other: &Self) -> Result<Option<Vec<usize>>> {
        self.grid.same_as(&other.grid)?;
        Ok(self
            .bits
            .ones()
            .find(|&i| !other.bits.get(i))
            .map(|i| self.grid.coords(i)))
    }
}

/// Rasterizes a crystal product onto `grid`.
pub fn rasterize(e: &CrystalND, grid: &GridSpec, budget: Budget) -> Result<Mask> {
    if e.dim() != grid.dim() {
        return param(format!(
            "crystal has {} factors, grid has {} axes",
            e.dim(),
            grid.dim()
        ));
    }
    budget.check(grid.total_cells())?;
    let axes: Vec<Vec<usize>> = e
        .factors()
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let (r, l) = (grid.resolutions[j], grid.extents[j]);
            if r > c.scales().min() || l < c.scales().max() {
                return param(format!(
                    "axis {j}: grid 2^{r}..2^{l} cannot hold crystal over {}",
                    c.scales()
                ));
            }
            Ok(c.set().regrid(r, l)?.cells().collect())
        })
        .collect::<Result<_>>()?;
    let mut mask = Mask::empty(grid.clone(), budget)?;
    let strides = grid.strides();
    let mut pos = vec![0usize; axes.len()];
    if axes.iter().any(Vec::is_empty) {
        return Ok(mask);
    }
    loop {
        let idx: usize = pos
            .iter()
            .zip(&axes)
            .zip(&strides)
            .map(|((&p, a), s)| a[p] * s)
            .sum();
        mask.bits.set(idx);
        let mut j = axes.len();
        loop {
            if j == 0 {
                return Ok(mask);
            }
            j -= 1;
            pos[j] += 1;
            if pos[j] < axes[j].len() {
                break;
            }
            pos[j] = 0;
        }
    }
}
