//! One- and n-dimensional crystals.
//!
//! A crystal over the scales `a_1 < ... < a_m` is the anchored interval
//! `[0, 2^a_m]` intersected with the oscillations at every finer scale
//! `a_1, ..., a_{m-1}`. Each oscillation keeps exactly half of what is left,
//! so the measure is `2^(a_m - (m - 1))`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dyadic::{interval_set, oscillation_set, DyadicRational, DyadicSet1D};
use crate::error::{Error, Result};

/// Strictly increasing, non-empty list of integer scales.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct ScaleSet(Vec<i64>);

impl ScaleSet {
    pub fn new(scales: Vec<i64>) -> Result<Self> {
        if scales.is_empty() {
            return Err(Error::Parameter("scale set must not be empty".into()));
        }
        if scales.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::NotIncreasing(format!("{scales:?}")));
        }
        Ok(Self(scales))
    }

    pub fn scales(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> i64 {
        self.0[0]
    }

    pub fn max(&self) -> i64 {
        self.0[self.0.len() - 1]
    }

    /// The tail `{a_i < ... < a_m}`, indexed from 1.
    pub fn suffix(&self, i: usize) -> Result<Self> {
        if i == 0 || i > self.0.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.0.len(),
            });
        }
        Ok(Self(self.0[i - 1..].to_vec()))
    }
}

impl TryFrom<Vec<i64>> for ScaleSet {
    type Error = Error;
    fn try_from(v: Vec<i64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ScaleSet> for Vec<i64> {
    fn from(s: ScaleSet) -> Self {
        s.0
    }
}

/// Comma-separated integers, e.g. `0,2,3`.
impl FromStr for ScaleSet {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::new(parse_int_list(s)?)
    }
}

impl fmt::Display for ScaleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Parses a comma-separated integer list. Whitespace around items is ignored.
pub fn parse_int_list(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<i64>()
                .map_err(|_| Error::Parse(format!("`{t}` is not an integer in `{s}`")))
        })
        .collect()
}

/// The crystal `C(A)`, rasterized at resolution `min A` inside `[0, 2^max A]`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Crystal1D {
    scales: ScaleSet,
    set: DyadicSet1D,
}

impl Crystal1D {
    pub fn build(scales: ScaleSet) -> Result<Self> {
        let (r, l) = (scales.min(), scales.max());
        let mut set = interval_set(l, r, l)?;
        for &a in &scales.0[..scales.len() - 1] {
            set = set.intersect(&oscillation_set(a, r, l)?)?;
        }
        Ok(Self { scales, set })
    }

    pub fn from_scales(scales: &[i64]) -> Result<Self> {
        Self::build(ScaleSet::new(scales.to_vec())?)
    }

    pub fn scales(&self) -> &ScaleSet {
        &self.scales
    }

    pub fn set(&self) -> &DyadicSet1D {
        &self.set
    }

    /// `2^(a_m - (m - 1))`, from the closed form.
    pub fn measure(&self) -> DyadicRational {
        DyadicRational::pow2(self.scales.max() - (self.scales.len() as i64 - 1))
    }

    /// The crystal of the suffix `A[i]`.
    pub fn suffix(&self, i: usize) -> Result<Self> {
        Self::build(self.scales.suffix(i)?)
    }
}

/// Cartesian product of one-dimensional crystals. Rasterization of the
/// product happens in the evaluator.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CrystalND {
    factors: Vec<Crystal1D>,
}

impl CrystalND {
    pub fn new(factors: Vec<Crystal1D>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Parameter(
                "a crystal needs at least one factor".into(),
            ));
        }
        Ok(Self { factors })
    }

    pub fn from_scale_sets(sets: &[ScaleSet]) -> Result<Self> {
        Self::new(
            sets.iter()
                .cloned()
                .map(Crystal1D::build)
                .collect::<Result<_>>()?,
        )
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Crystal1D] {
        &self.factors
    }

    /// The largest anchored dyadic rectangle inside the product: on every axis
    /// `[0, 2^b]` lies in `C(A_j)` exactly when `b <= min A_j`.
    pub fn primitive_rectangle(&self) -> Shape {
        Shape(self.factors.iter().map(|c| c.scales.min()).collect())
    }

    pub fn measure(&self) -> DyadicRational {
        self.factors.iter().map(Crystal1D::measure).product()
    }

    /// Whether the cell with the given per-axis indices at the given per-axis
    /// resolutions belongs to the product.
    pub fn contains_cell(&self, resolutions: &[i64], cell: &[usize]) -> bool {
        self.factors
            .iter()
            .zip(resolutions.iter().zip(cell))
            .all(|(f, (&r, &c))| {
                let shift = f.set.resolution() - r;
                shift >= 0 && f.set.contains_cell(c >> shift)
            })
    }
}

/// Exponent vector `(b_1, ..., b_n)` of the rectangle `[0,2^b_1] x ... x [0,2^b_n]`,
/// taken up to translation.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Shape(pub Vec<i64>);

impl Shape {
    pub fn new(exponents: Vec<i64>) -> Self {
        Self(exponents)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[i64] {
        &self.0
    }

    /// `log2` of the volume.
    pub fn volume_exponent(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn volume(&self) -> DyadicRational {
        DyadicRational::pow2(self.volume_exponent())
    }

    /// Dilation by `2^t`.
    pub fn dilate(&self, t: i64) -> Self {
        Self(self.0.iter().map(|a| a + t).collect())
    }

    /// Componentwise minimum: the intersection of two anchored rectangles.
    pub fn meet(&self, other: &Self) -> Self {
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| *a.min(b))
                .collect(),
        )
    }

    /// Whether the anchored rectangle of `self` lies inside that of `other`.
    pub fn fits_in(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}
