use std::fmt;

use super::bits::Bits;
use super::rational::DyadicRational;
use crate::error::{param, Error, Result};

/// Largest `L - r` accepted for a one-dimensional set.
pub const MAX_LEVELS_1D: i64 = 36;

/// Interval `[offset, offset + 2^scale]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicInterval {
    pub scale: i64,
    pub offset: DyadicRational,
}

impl DyadicInterval {
    /// The anchored interval `[0, 2^scale]`.
    pub fn anchored(scale: i64) -> Self {
        Self {
            scale,
            offset: DyadicRational::zero(),
        }
    }

    pub fn measure(&self) -> DyadicRational {
        DyadicRational::pow2(self.scale)
    }

    /// Rasterizes at resolution `r` inside `[0, 2^extent]`.
    ///
    /// The offset has to be a multiple of `2^r` and the interval has to lie in
    /// the bounding interval.
    pub fn rasterize(&self, resolution: i64, extent: i64) -> Result<DyadicSet1D> {
        if resolution > self.scale {
            return param(format!(
                "resolution {resolution} is coarser than interval scale {}",
                self.scale
            ));
        }
        let mut set = DyadicSet1D::empty(resolution, extent)?;
        let start = self.offset.mul_pow2(-resolution);
        if start.exponent() < 0 || start.is_negative() {
            return param(format!(
                "offset {} is not a nonnegative multiple of 2^{resolution}",
                self.offset
            ));
        }
        let start: u64 = start
            .ceil_scaled(0)
            .try_into()
            .map_err(|_| Error::Parameter("offset too large".into()))?;
        let width = 1u64 << (self.scale - resolution);
        if start + width > set.cell_count() as u64 {
            return param(format!(
                "interval [{}, {} + 2^{}] leaves [0, 2^{extent}]",
                self.offset, self.offset, self.scale
            ));
        }
        for c in start..start + width {
            set.cells.set(c as usize);
        }
        Ok(set)
    }
}

/// A finite union of aligned cells of length `2^resolution` inside `[0, 2^extent]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DyadicSet1D {
    resolution: i64,
    extent: i64,
    cells: Bits,
}

impl DyadicSet1D {
    pub fn empty(resolution: i64, extent: i64) -> Result<Self> {
        if resolution > extent {
            return param(format!("resolution {resolution} exceeds extent {extent}"));
        }
        if extent - resolution > MAX_LEVELS_1D {
            return param(format!(
                "2^{} cells exceeds the one-dimensional limit",
                extent - resolution
            ));
        }
        Ok(Self {
            resolution,
            extent,
            cells: Bits::new(1usize << (extent - resolution)),
        })
    }

    pub fn full(resolution: i64, extent: i64) -> Result<Self> {
        let mut s = Self::empty(resolution, extent)?;
        s.cells = Bits::from_fn(s.cell_count(), |_| true);
        Ok(s)
    }

    pub fn from_cells(
        resolution: i64,
        extent: i64,
        cells: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let mut s = Self::empty(resolution, extent)?;
        for c in cells {
            if c >= s.cell_count() {
                return param(format!("cell {c} outside {} cells", s.cell_count()));
            }
            s.cells.set(c);
        }
        Ok(s)
    }

    pub fn resolution(&self) -> i64 {
        self.resolution
    }

    pub fn extent(&self) -> i64 {
        self.extent
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn contains_cell(&self, c: usize) -> bool {
        c < self.cells.len() && self.cells.get(c)
    }

    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells.ones()
    }

    pub fn popcount(&self) -> u64 {
        self.cells.count_ones()
    }

    pub fn bits(&self) -> &Bits {
        &self.cells
    }

    pub fn measure(&self) -> DyadicRational {
        DyadicRational::from(self.popcount()).mul_pow2(self.resolution)
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if (self.resolution, self.extent) != (other.resolution, other.extent) {
            return Err(Error::GridMismatch {
                left: format!("(r={}, L={})", self.resolution, self.extent),
                right: format!("(r={}, L={})", other.resolution, other.extent),
            });
        }
        Ok(())
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        Ok(self.with_cells(self.cells.zip_with(&other.cells, |a, b| a & b)))
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        Ok(self.with_cells(self.cells.zip_with(&other.cells, |a, b| a | b)))
    }

    pub fn diff(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        Ok(self.with_cells(self.cells.zip_with(&other.cells, |a, b| a & !b)))
    }

    pub fn is_subset(&self, other: &Self) -> Result<bool> {
        self.check_grid(other)?;
        Ok(self.cells.is_subset(&other.cells))
    }

    fn with_cells(&self, cells: Bits) -> Self {
        Self {
            resolution: self.resolution,
            extent: self.extent,
            cells,
        }
    }

    /// Shifts every cell by `k` cells. Cells pushed outside the bounding
    /// interval are dropped; the flag reports whether that happened.
    pub fn translate(&self, k: i64) -> (Self, bool) {
        let n = self.cell_count() as i64;
        let mut out = Bits::new(self.cell_count());
        let mut truncated = false;
        for c in self.cells.ones() {
            let t = c as i64 + k;
            if (0..n).contains(&t) {
                out.set(t as usize);
            } else {
                truncated = true;
            }
        }
        (self.with_cells(out), truncated)
    }

    /// Splits every cell into `2^(r - r')` cells of length `2^r'`.
    pub fn refine(&self, resolution: i64) -> Result<Self> {
        if resolution > self.resolution {
            return param(format!(
                "refine target {resolution} is coarser than {}",
                self.resolution
            ));
        }
        let mut out = Self::empty(resolution, self.extent)?;
        let f = 1usize << (self.resolution - resolution);
        for c in self.cells.ones() {
            for s in c * f..(c + 1) * f {
                out.cells.set(s);
            }
        }
        Ok(out)
    }

    /// Grows the bounding interval to `[0, 2^extent]`, padding with empty cells.
    pub fn extend(&self, extent: i64) -> Result<Self> {
        if extent < self.extent {
            return param(format!("cannot shrink extent {} to {extent}", self.extent));
        }
        let mut out = Self::empty(self.resolution, extent)?;
        for c in self.cells.ones() {
            out.cells.set(c);
        }
        Ok(out)
    }

    /// Refines and extends to the given grid.
    pub fn regrid(&self, resolution: i64, extent: i64) -> Result<Self> {
        self.refine(resolution)?.extend(extent)
    }
}

impl fmt::Debug for DyadicSet1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "DyadicSet1D(r={}, L={}, cells={:?})",
            self.resolution,
            self.extent,
            self.cells().collect::<Vec<_>>()
        )
    }
}

/// Rasterization of `[0, 2^a]` at resolution `r` inside `[0, 2^L]`.
pub fn interval_set(a: i64, r: i64, extent: i64) -> Result<DyadicSet1D> {
    if a > extent {
        return param(format!("interval scale {a} exceeds extent {extent}"));
    }
    DyadicInterval::anchored(a).rasterize(r, extent)
}

/// Rasterization of the oscillation `O_a`, the `2^(a+1)`-periodic union of
/// translates of `[0, 2^a]`, restricted to `[0, 2^L]`.
pub fn oscillation_set(a: i64, r: i64, extent: i64) -> Result<DyadicSet1D> {
    if r > a {
        return param(format!(
            "resolution {r} is coarser than oscillation scale {a}"
        ));
    }
    if a + 1 > extent {
        return param(format!(
            "oscillation period 2^{} exceeds extent {extent}",
            a + 1
        ));
    }
    let mut s = DyadicSet1D::empty(r, extent)?;
    let shift = a - r;
    s.cells = Bits::from_fn(s.cell_count(), |c| (c >> shift) & 1 == 0);
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cells(s: &DyadicSet1D) -> Vec<usize> {
        s.cells().collect()
    }

    #[test]
    fn interval_examples() {
        let s = interval_set(0, 0, 2).unwrap();
        assert_eq!((cells(&s), s.cell_count()), (vec![0], 4));
        assert_eq!(s.measure(), DyadicRational::from(1i64));

        let s = interval_set(2, 0, 2).unwrap();
        assert_eq!(cells(&s), vec![0, 1, 2, 3]);
        assert_eq!(s.measure(), DyadicRational::from(4i64));

        let s = interval_set(1, -1, 2).unwrap();
        assert_eq!((cells(&s), s.cell_count()), (vec![0, 1, 2, 3], 8));
        assert_eq!(s.measure(), DyadicRational::from(2i64));
    }

    #[test]
    fn interval_errors() {
        assert!(matches!(interval_set(0, 1, 2), Err(Error::Parameter(_))));
        assert!(matches!(interval_set(3, 0, 2), Err(Error::Parameter(_))));
    }

    #[test]
    fn offset_interval() {
        let iv = DyadicInterval {
            scale: 0,
            offset: DyadicRational::from(2i64),
        };
        assert_eq!(cells(&iv.rasterize(0, 2).unwrap()), vec![2]);
        let bad = DyadicInterval {
            scale: 0,
            offset: DyadicRational::new(1, -1),
        };
        assert!(bad.rasterize(0, 2).is_err());
        let off_end = DyadicInterval {
            scale: 1,
            offset: DyadicRational::from(3i64),
        };
        assert!(off_end.rasterize(0, 2).is_err());
    }

    #[test]
    fn oscillation_examples() {
        assert_eq!(cells(&oscillation_set(0, 0, 2).unwrap()), vec![0, 2]);
        assert_eq!(cells(&oscillation_set(1, 0, 3).unwrap()), vec![0, 1, 4, 5]);
        assert!(oscillation_set(2, 0, 2).is_err());
        assert!(oscillation_set(0, 1, 3).is_err());
    }

    #[test]
    fn boolean_examples() {
        let full = interval_set(2, 0, 2).unwrap();
        let osc = oscillation_set(0, 0, 2).unwrap();
        let i = full.intersect(&osc).unwrap();
        assert_eq!(
            (cells(&i), i.measure()),
            (vec![0, 2], DyadicRational::from(2i64))
        );
        assert_eq!(full.union(&full).unwrap(), full);
        let d = full.diff(&osc).unwrap();
        assert_eq!(
            (cells(&d), d.measure()),
            (vec![1, 3], DyadicRational::from(2i64))
        );
    }

    #[test]
    fn mismatched_grids_refused() {
        let a = interval_set(1, 0, 2).unwrap();
        let b = interval_set(1, -1, 2).unwrap();
        assert!(matches!(a.union(&b), Err(Error::GridMismatch { .. })));
        let c = interval_set(1, 0, 3).unwrap();
        assert!(matches!(a.intersect(&c), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn translate_examples() {
        let x = interval_set(0, 0, 2).unwrap();
        let (t, trunc) = x.translate(2);
        assert_eq!((cells(&t), trunc), (vec![2], false));
        assert_eq!(x.translate(0), (x.clone(), false));
        let (t, trunc) = x.translate(-1);
        assert!(trunc);
        assert_eq!(t.popcount(), 0);
    }

    proptest! {
        #[test]
        fn oscillation_has_density_half(a in -4i64..4, dr in 0i64..4, dl in 1i64..5) {
            let r = a - dr;
            let l = a + dl;
            let s = oscillation_set(a, r, l).unwrap();
            // brute-force popcount
            let n = 1usize << (l - r);
            let count = (0..n).filter(|&c| s.contains_cell(c)).count() as u64;
            prop_assert_eq!(count * 2, n as u64);
            prop_assert_eq!(s.measure(), DyadicRational::pow2(l - 1));
        }

        #[test]
        fn union_intersection_measure_identity(xs in proptest::collection::vec(any::<bool>(), 16),
                                               ys in proptest::collection::vec(any::<bool>(), 16)) {
            let x = DyadicSet1D::from_cells(-2, 2, (0..16).filter(|&i| xs[i])).unwrap();
            let y = DyadicSet1D::from_cells(-2, 2, (0..16).filter(|&i| ys[i])).unwrap();
            let lhs = x.union(&y).unwrap().measure() + x.intersect(&y).unwrap().measure();
            prop_assert_eq!(lhs, x.measure() + y.measure());
            prop_assert!(x.measure() <= DyadicRational::pow2(2));
        }

        #[test]
        fn translate_measure(xs in proptest::collection::vec(any::<bool>(), 8), k in -9i64..9) {
            let x = DyadicSet1D::from_cells(0, 3, (0..8).filter(|&i| xs[i])).unwrap();
            let (t, trunc) = x.translate(k);
            prop_assert!(t.measure() <= x.measure());
            prop_assert_eq!(t.measure() == x.measure(), !trunc);
        }

        #[test]
        fn refinement_invariance(xs in proptest::collection::vec(any::<bool>(), 8),
                                 ys in proptest::collection::vec(any::<bool>(), 8)) {
            let x = DyadicSet1D::from_cells(0, 3, (0..8).filter(|&i| xs[i])).unwrap();
            let y = DyadicSet1D::from_cells(0, 3, (0..8).filter(|&i| ys[i])).unwrap();
            let coarse = x.diff(&y).unwrap().union(&x.intersect(&y).unwrap()).unwrap();
            let (xf, yf) = (x.refine(-1).unwrap(), y.refine(-1).unwrap());
            let fine = xf.diff(&yf).unwrap().union(&xf.intersect(&yf).unwrap()).unwrap();
            prop_assert_eq!(coarse.measure(), fine.measure());
            prop_assert_eq!(x.refine(-2).unwrap().measure(), x.measure());
        }
    }
}
