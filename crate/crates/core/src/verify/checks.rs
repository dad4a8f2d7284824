use rayon::prelude::*;
use serde::Serialize;

use super::TheoremInstance;
use crate::crystal::Shape;
use crate::dyadic::{Bits, DyadicRational, ExactRatio};
use crate::error::{Error, Result};
use crate::evaluator::{
    anchored_union_measure, maximal_field, rasterize, Budget, Comparison, Mask,
};

/// Outcome of the homogeneity check for one index.
#[derive(Clone, Debug, Serialize)]
pub struct HomogeneityCheck {
    pub index: Vec<usize>,
    pub shape: Shape,
    /// `Y(i) ∩ E = E` on the grid.
    pub contains_e: bool,
    /// `k` with `|Y(i)| = 2^k |Y(i) ∩ E|`, when the quotient is a power of two.
    pub k: Option<i64>,
    pub measure_y: DyadicRational,
    /// Smallest value of the single-shape maximal field over the cells of `Y(i)`.
    pub min_field_on_y: DyadicRational,
    pub counterexample: Option<Vec<usize>>,
    pub pass: bool,
}

/// Rasterized `E` and `Y(i)` of an instance, shared between the checks.
pub struct Rasters {
    pub e: Mask,
    pub ys: Vec<Mask>,
}

impl Rasters {
    pub fn new(instance: &TheoremInstance, budget: Budget) -> Result<Self> {
        let grid = instance.grid();
        budget.check(grid.total_cells())?;
        let e = rasterize(instance.e(), grid, budget)?;
        let ys = instance
            .indices()
            .par_iter()
            .map(|i| rasterize(&instance.y(i)?, grid, budget))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { e, ys })
    }

    pub fn union_y(&self) -> Result<Mask> {
        let mut acc = Mask::from_bits(self.e.grid().clone(), Bits::new(self.e.len()))?;
        for y in &self.ys {
            acc = acc.union(y)?;
        }
        Ok(acc)
    }
}

/// Checks that `Y(i)` lies in `{M_R(i) 1_E >= 2^-k}` where `|Y(i)| = 2^k |Y(i) ∩ E|`,
/// that `Y(i) ∩ E = E`, and that `k = m - 1`.
pub fn check_homogeneity(
    instance: &TheoremInstance,
    index: &[usize],
    budget: Budget,
) -> Result<HomogeneityCheck> {
    let grid = instance.grid();
    budget.check(grid.total_cells())?;
    let e = rasterize(instance.e(), grid, budget)?;
    let y = rasterize(&instance.y(index)?, grid, budget)?;
    homogeneity_with(instance, index, &e, &y)
}

pub(crate) fn homogeneity_with(
    instance: &TheoremInstance,
    index: &[usize],
    e: &Mask,
    y: &Mask,
) -> Result<HomogeneityCheck> {
    let shape = instance.primitive_shape(index);
    let y_and_e = y.intersect(e)?;
    let contains_e = y_and_e == *e;
    let k = y
        .measure()
        .ratio(&y_and_e.measure())
        .and_then(|r| power_of_two(&r));

    let field = maximal_field(e, std::slice::from_ref(&shape))?;
    let threshold = DyadicRational::pow2(-k.unwrap_or(instance.m() as i64 - 1));
    let mut min_val: Option<(u64, usize)> = None;
    let mut counterexample = None;
    for idx in y.bits().ones() {
        let v = field.numerators()[idx];
        if min_val.is_none_or(|(m, _)| v < m) {
            min_val = Some((v, idx));
        }
        if counterexample.is_none() && !field.passes(idx, &threshold, Comparison::AtLeast) {
            counterexample = Some(y.grid().coords(idx));
        }
    }
    let min_field_on_y = min_val
        .map(|(v, _)| DyadicRational::from(v).mul_pow2(-(field.denominator_exp() as i64)))
        .unwrap_or_default();
    let pass = contains_e
        && k == Some(instance.m() as i64 - 1)
        && counterexample.is_none()
        && min_val.is_some();
    Ok(HomogeneityCheck {
        index: index.to_vec(),
        shape,
        contains_e,
        k,
        measure_y: y.measure(),
        min_field_on_y,
        counterexample,
        pass,
    })
}

fn power_of_two(r: &ExactRatio) -> Option<i64> {
    use num_traits::One;
    let (num, den) = (r.numer(), r.denom());
    if den.is_one() && num.sign() == num_bigint::Sign::Plus && num.magnitude().count_ones() == 1 {
        Some(num.trailing_zeros()? as i64)
    } else if num.is_one() && den.magnitude().count_ones() == 1 {
        Some(-(den.trailing_zeros()? as i64))
    } else {
        None
    }
}

/// Outcome of the disjointness check.
#[derive(Clone, Debug, Serialize)]
pub struct DisjointnessCheck {
    /// `|R(i) \ U_{j != i} R(j)| / |R(i)|` per index.
    pub deltas: Vec<ExactRatio>,
    pub min_delta: ExactRatio,
    pub sum_y: DyadicRational,
    pub union_y: DyadicRational,
    /// `|U Y(i)| / sum |Y(i)|`.
    pub rho: ExactRatio,
    pub pass: bool,
}

pub fn check_disjointness(instance: &TheoremInstance, budget: Budget) -> Result<DisjointnessCheck> {
    let rasters = Rasters::new(instance, budget)?;
    disjointness_with(instance, &rasters, budget)
}

pub(crate) fn disjointness_with(
    instance: &TheoremInstance,
    rasters: &Rasters,
    budget: Budget,
) -> Result<DisjointnessCheck> {
    let shapes: Vec<Shape> = instance
        .indices()
        .iter()
        .map(|i| instance.primitive_shape(i))
        .collect();
    let union = anchored_union_measure(&shapes, budget)?;
    let deltas = union.deltas();
    let min_delta = deltas
        .iter()
        .min()
        .cloned()
        .ok_or_else(|| Error::Construction("instance has no indices".into()))?;
    let sum_y: DyadicRational = rasters.ys.iter().map(Mask::measure).sum();
    let union_y = rasters.union_y()?.measure();
    let rho = union_y
        .ratio(&sum_y)
        .ok_or_else(|| Error::Construction("Y(i) are empty".into()))?;
    let pass = min_delta.is_positive() && rho.is_positive();
    Ok(DisjointnessCheck {
        deltas,
        min_delta,
        sum_y,
        union_y,
        rho,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::Progression;

    fn inst(n: usize, terms: &[i64]) -> TheoremInstance {
        TheoremInstance::new(n, Progression::from_terms(terms.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn smallest_instance_passes() {
        let t = inst(2, &[0, 1]);
        let c = check_homogeneity(&t, &[0], Budget::default()).unwrap();
        assert!(c.pass, "{c:?}");
        assert!(c.k.unwrap() <= 1);
    }

    #[test]
    fn every_index_passes_small_instances() {
        for (n, terms) in [
            (2, vec![0, 1, 2]),
            (3, vec![0, 1, 2]),
            (2, vec![-3, 0, 3, 6]),
        ] {
            let t = inst(n, &terms);
            for i in t.indices() {
                let c = check_homogeneity(&t, i, Budget::default()).unwrap();
                assert!(c.pass, "{n} {terms:?} {c:?}");
                assert_eq!(c.k, Some(t.m() as i64 - 1));
                assert_eq!(c.min_field_on_y, DyadicRational::pow2(1 - t.m() as i64));
            }
        }
    }

    #[test]
    fn sum_of_y_measures() {
        let t = inst(2, &[0, 1, 2]);
        let d = check_disjointness(&t, Budget::default()).unwrap();
        let expected = t.e().measure().mul_pow2(t.m() as i64 - 1)
            * DyadicRational::from(t.indices().len() as u64);
        assert_eq!(d.sum_y, expected);
        assert!(d.pass);
    }

    #[test]
    fn power_of_two_detection() {
        let r = |a: i64, b: i64| {
            DyadicRational::from(a)
                .ratio(&DyadicRational::from(b))
                .unwrap()
        };
        assert_eq!(power_of_two(&r(8, 1)), Some(3));
        assert_eq!(power_of_two(&r(1, 4)), Some(-2));
        assert_eq!(power_of_two(&r(1, 1)), Some(0));
        assert_eq!(power_of_two(&r(3, 1)), None);
        assert_eq!(power_of_two(&r(2, 3)), None);
    }
}
