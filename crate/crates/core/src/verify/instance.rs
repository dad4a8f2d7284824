use crate::crystal::{Crystal1D, CrystalND, ScaleSet, Shape};
use crate::error::{Error, Result};
use crate::evaluator::GridSpec;
use crate::family::{FamilySpec, Progression};

/// The resonant construction built from an arithmetic progression
/// `u_0 < ... < u_{m-1}` in dimension `n`.
///
/// With `h_s = (n-1) u_0 + (u_1 - u_0) s`, the set is `E = X^(n-1) x Z` where
/// `X = C(u_0 < ... < u_{m-1})` and `Z = C(-h_{m-1} < ... < -h_0)`. For each
/// index `i` in `N^(n-1)` with `|i| = s <= m-1`, the suffix crystal
/// `Y(i) = C(u_{i_1}..) x ... x C(-h_s < ... < -h_0)` contains `E`, and its
/// primitive rectangle `R(i) = (u_{i_1}, ..., u_{i_{n-1}}, -h_s)` has zero
/// exponent sum because `h_s = u_{i_1} + ... + u_{i_{n-1}}`.
#[derive(Clone, Debug)]
pub struct TheoremInstance {
    n: usize,
    progression: Progression,
    family: FamilySpec,
    h: Vec<i64>,
    x: Crystal1D,
    z: Crystal1D,
    e: CrystalND,
    indices: Vec<Vec<usize>>,
    grid: GridSpec,
}

impl TheoremInstance {
    /// Builds the instance with the family generated by the progression itself.
    pub fn new(n: usize, progression: Progression) -> Result<Self> {
        let set = progression.terms().to_vec();
        Self::with_family_set(n, progression, &set)
    }

    /// Builds the instance and checks every `R(i)` against the family
    /// generated by `set`.
    pub fn with_family_set(n: usize, progression: Progression, set: &[i64]) -> Result<Self> {
        let m = progression.len();
        if n < 2 {
            return Err(Error::Parameter(format!(
                "dimension must be at least 2, got {n}"
            )));
        }
        if m < 2 {
            return Err(Error::Parameter(format!(
                "progression must have at least 2 terms, got {m}"
            )));
        }
        let u = progression.terms();
        let d = progression.step();
        let h: Vec<i64> = (0..m as i64)
            .map(|s| (n as i64 - 1) * u[0] + d * s)
            .collect();
        let x = Crystal1D::build(ScaleSet::new(u.to_vec())?)?;
        let z = Crystal1D::build(ScaleSet::new(h.iter().rev().map(|v| -v).collect())?)?;
        let mut factors = vec![x.clone(); n - 1];
        factors.push(z.clone());
        let e = CrystalND::new(factors)?;
        let grid = GridSpec::for_crystal(&e)?;
        let family = FamilySpec::power(n, set)?;
        let instance = Self {
            n,
            indices: simplex_indices(n - 1, m - 1),
            progression,
            family,
            h,
            x,
            z,
            e,
            grid,
        };
        for i in &instance.indices {
            let r = instance.primitive_shape(i);
            if !instance.family.is_member(&r).is_member() {
                return Err(Error::Construction(format!(
                    "R({i:?}) = {r} is not in the family generated by {:?}",
                    instance.family.axis_sets[0]
                )));
            }
        }
        Ok(instance)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.progression.len()
    }

    pub fn progression(&self) -> &Progression {
        &self.progression
    }

    pub fn family(&self) -> &FamilySpec {
        &self.family
    }

    /// `h_0, ..., h_{m-1}`.
    pub fn h(&self) -> &[i64] {
        &self.h
    }

    pub fn x(&self) -> &Crystal1D {
        &self.x
    }

    pub fn z(&self) -> &Crystal1D {
        &self.z
    }

    pub fn e(&self) -> &CrystalND {
        &self.e
    }

    /// Indices `i >= 0` with `i_1 + ... + i_{n-1} <= m - 1`, lexicographic.
    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    /// The grid `E` lives on: resolution `u_0` and extent `u_{m-1}` on the
    /// first `n - 1` axes, `-h_{m-1}` and `-h_0` on the last.
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// `Y(i)`. It contains `E` with `|Y(i)| = 2^(m-1) |E|`, so `E` fills a
    /// `2^-(m-1)` fraction of it.
    pub fn y(&self, index: &[usize]) -> Result<CrystalND> {
        self.check_index(index)?;
        let m = self.m();
        let s: usize = index.iter().sum();
        let mut factors = index
            .iter()
            .map(|&ik| self.x.suffix(ik + 1))
            .collect::<Result<Vec<_>>>()?;
        // -h_s < ... < -h_0 is the tail of Z's scales from position m-1-s
        factors.push(self.z.suffix(m - s)?);
        CrystalND::new(factors)
    }

    /// `R(i) = (u_{i_1}, ..., u_{i_{n-1}}, -h_s)`.
    pub fn primitive_shape(&self, index: &[usize]) -> Shape {
        let u = self.progression.terms();
        let s: usize = index.iter().sum();
        let mut exps: Vec<i64> = index.iter().map(|&ik| u[ik]).collect();
        exps.push(-self.h[s]);
        Shape::new(exps)
    }

    fn check_index(&self, index: &[usize]) -> Result<()> {
        if index.len() != self.n - 1 || index.iter().sum::<usize>() >= self.m() {
            return Err(Error::Parameter(format!(
                "index {index:?} is not in the simplex of size {} in dimension {}",
                self.m() - 1,
                self.n - 1
            )));
        }
        Ok(())
    }
}

/// All `i` in `N^k` with `i_1 + ... + i_k <= total`, lexicographic.
pub fn simplex_indices(k: usize, total: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur.push(v);
            rec(k, left - v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, total, &mut Vec::with_capacity(k), &mut out);
    out
}

/// `binomial(a, b)` for small arguments.
pub fn binomial(a: u64, b: u64) -> u64 {
    if b > a {
        return 0;
    }
    let b = b.min(a - b);
    (0..b).fold(1u64, |acc, i| acc * (a - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::DyadicRational;

    fn inst(n: usize, terms: &[i64]) -> TheoremInstance {
        TheoremInstance::new(n, Progression::from_terms(terms.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn three_dim_example() {
        let t = inst(3, &[0, 1, 2]);
        assert_eq!(t.h(), &[0, 1, 2]);
        assert_eq!(t.z().scales().scales(), &[-2, -1, 0]);
        assert_eq!(t.indices().len(), 6);
        assert_eq!(t.indices().len() as u64, binomial(2 + 2, 2));
    }

    #[test]
    fn smallest_instance() {
        let t = inst(2, &[0, 1]);
        assert_eq!(t.h(), &[0, 1]);
        let y = t.y(&[0]).unwrap();
        assert_eq!(y.primitive_rectangle(), Shape::new(vec![0, 0]));
        assert_eq!(t.primitive_shape(&[0]), Shape::new(vec![0, 0]));
    }

    #[test]
    fn shapes_are_zero_sum_and_primitive() {
        for (n, terms) in [
            (2, vec![3, 5, 7, 9]),
            (3, vec![-1, 1, 3]),
            (4, vec![2, 3, 4]),
        ] {
            let t = inst(n, &terms);
            for i in t.indices() {
                let r = t.primitive_shape(i);
                assert_eq!(r.volume_exponent(), 0, "{n} {terms:?} {i:?}");
                assert_eq!(t.y(i).unwrap().primitive_rectangle(), r);
                // |Y(i)| = 2^(m-1) |E|
                assert_eq!(
                    t.y(i).unwrap().measure(),
                    t.e().measure().mul_pow2(t.m() as i64 - 1)
                );
            }
        }
    }

    #[test]
    fn measure_of_e_closed_form() {
        // |E| = 2^((n-1)(u_{m-1} - (m-1))) * 2^(-h_0 - (m-1))
        let t = inst(3, &[1, 3, 5, 7]);
        let (m, u_last, h0) = (4i64, 7i64, t.h()[0]);
        let expected = DyadicRational::pow2(2 * (u_last - (m - 1)) + (-h0 - (m - 1)));
        assert_eq!(t.e().measure(), expected);
    }

    #[test]
    fn rejects_bad_input() {
        let p = Progression::from_terms(vec![0, 1]).unwrap();
        assert!(TheoremInstance::new(1, p.clone()).is_err());
        let single = Progression::from_terms(vec![4]).unwrap();
        assert!(TheoremInstance::new(2, single).is_err());
        let t = inst(2, &[0, 1, 2]);
        assert!(t.y(&[3]).is_err());
        assert!(t.y(&[0, 0]).is_err());
    }

    #[test]
    fn membership_failure_is_construction_error() {
        let p = Progression::from_terms(vec![0, 1, 2]).unwrap();
        let err = TheoremInstance::with_family_set(2, p, &[0, 2]).unwrap_err();
        assert!(matches!(err, Error::Construction(_)));
    }

    #[test]
    fn simplex_counts() {
        for k in 1..4usize {
            for total in 0..6usize {
                let idx = simplex_indices(k, total);
                assert_eq!(idx.len() as u64, binomial((total + k) as u64, k as u64));
                assert!(idx.iter().all(|i| i.iter().sum::<usize>() <= total));
            }
        }
    }
}
