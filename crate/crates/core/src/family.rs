//! Translation-invariant rectangle families generated by dyadic shapes.
//!
//! A family is stored through its generating shapes. For an axis set
//! `A_1 x ... x A_{n-1}` the generators are the unit-volume rectangles
//! `(a_1, ..., a_{n-1}, -(a_1 + ... + a_{n-1}))`; the last axis always
//! carries the normalization. When the family is closed under central
//! dilations, only dyadic dilations `2^t` are represented, which shift every
//! exponent by `t`.

use serde::{Deserialize, Serialize};

use crate::crystal::Shape;
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct FamilySpec {
    #[serde(rename = "n")]
    pub dimension: usize,
    pub axis_sets: Vec<Vec<i64>>,
    #[serde(default)]
    pub dilation_closed: bool,
}

impl FamilySpec {
    pub fn new(dimension: usize, axis_sets: Vec<Vec<i64>>, dilation_closed: bool) -> Result<Self> {
        let spec = Self {
            dimension,
            axis_sets,
            dilation_closed,
        };
        spec.validate()?;
        Ok(spec.normalized())
    }

    /// The family generated by `R_a` for `a` in `A^(n-1)`.
    pub fn power(dimension: usize, set: &[i64]) -> Result<Self> {
        Self::new(
            dimension,
            vec![set.to_vec(); dimension.saturating_sub(1)],
            false,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension < 2 {
            return Err(Error::Parameter(format!(
                "family dimension must be at least 2, got {}",
                self.dimension
            )));
        }
        if self.axis_sets.len() != self.dimension - 1 {
            return Err(Error::Parameter(format!(
                "expected {} axis sets, got {}",
                self.dimension - 1,
                self.axis_sets.len()
            )));
        }
        if self.axis_sets.iter().any(Vec::is_empty) {
            return Err(Error::Parameter("axis sets must be non-empty".into()));
        }
        Ok(())
    }

    fn normalized(mut self) -> Self {
        for s in &mut self.axis_sets {
            s.sort_unstable();
            s.dedup();
        }
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec.normalized())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("family spec serializes")
    }

    /// Generating shapes in lexicographic order of the axis choice.
    pub fn generate_shapes(&self) -> Vec<Shape> {
        let mut out = Vec::new();
        let mut choice = vec![0usize; self.axis_sets.len()];
        loop {
            let mut exps: Vec<i64> = choice
                .iter()
                .zip(&self.axis_sets)
                .map(|(&k, s)| s[k])
                .collect();
            exps.push(-exps.iter().sum::<i64>());
            out.push(Shape(exps));

            // odometer increment, last axis fastest
            let mut j = choice.len();
            loop {
                if j == 0 {
                    return out;
                }
                j -= 1;
                choice[j] += 1;
                if choice[j] < self.axis_sets[j].len() {
                    break;
                }
                choice[j] = 0;
            }
        }
    }

    pub fn is_member(&self, shape: &Shape) -> Membership {
        if shape.dim() != self.dimension {
            return Membership::NotMember;
        }
        let sum = shape.volume_exponent();
        let n = self.dimension as i64;
        let t = if self.dilation_closed {
            if sum % n != 0 {
                return Membership::NotMember;
            }
            sum / n
        } else if sum != 0 {
            return Membership::NotMember;
        } else {
            0
        };
        let base = shape.dilate(-t);
        let ok = base.0[..self.dimension - 1]
            .iter()
            .zip(&self.axis_sets)
            .all(|(a, s)| s.binary_search(a).is_ok());
        if ok {
            Membership::Member { dilation: t }
        } else {
            Membership::NotMember
        }
    }

    /// Every member shape whose exponents lie in `[lo_j, hi_j]` on each axis.
    pub fn shapes_within(&self, lo: &[i64], hi: &[i64]) -> Vec<Shape> {
        let inside = |s: &Shape| {
            s.0.iter()
                .zip(lo.iter().zip(hi))
                .all(|(a, (l, h))| l <= a && a <= h)
        };
        let base = self.generate_shapes();
        if !self.dilation_closed {
            return base.into_iter().filter(inside).collect();
        }
        let mut out: Vec<Shape> = Vec::new();
        for s in &base {
            // t range where every coordinate lands inside
            let t_lo = s.0.iter().zip(lo).map(|(a, l)| l - a).max().unwrap_or(0);
            let t_hi = s.0.iter().zip(hi).map(|(a, h)| h - a).min().unwrap_or(0);
            out.extend((t_lo..=t_hi).map(|t| s.dilate(t)));
        }
        out.sort();
        out.dedup();
        out
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Membership {
    /// The shape is a generator dilated by `2^dilation` (zero for plain members).
    Member {
        dilation: i64,
    },
    NotMember,
}

impl Membership {
    pub fn is_member(self) -> bool {
        matches!(self, Membership::Member { .. })
    }
}

/// `u_0 < ... < u_{m-1}` with `u_k = u_0 + k * step`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Progression {
    terms: Vec<i64>,
    step: i64,
}

impl Progression {
    pub fn new(start: i64, step: i64, len: usize) -> Result<Self> {
        if step <= 0 {
            return Err(Error::Parameter(format!(
                "progression step must be positive, got {step}"
            )));
        }
        if len == 0 {
            return Err(Error::Parameter("progression must be non-empty".into()));
        }
        Ok(Self {
            terms: (0..len as i64).map(|k| start + k * step).collect(),
            step,
        })
    }

    /// Checks that the terms form an increasing arithmetic progression.
    pub fn from_terms(terms: Vec<i64>) -> Result<Self> {
        match terms.as_slice() {
            [] => Err(Error::Parameter("progression must be non-empty".into())),
            [_] => Ok(Self { terms, step: 1 }),
            [a, b, ..] => {
                let step = b - a;
                let p = Self::new(*a, step, terms.len())?;
                if p.terms != terms {
                    return Err(Error::Parameter(format!(
                        "{terms:?} is not an arithmetic progression"
                    )));
                }
                Ok(p)
            }
        }
    }

    pub fn terms(&self) -> &[i64] {
        &self.terms
    }

    pub fn step(&self) -> i64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn start(&self) -> i64 {
        self.terms[0]
    }
}

/// A length-`m` arithmetic progression inside `set`, preferring the smallest
/// step and then the smallest start.
pub fn find_progression(set: &[i64], m: usize) -> Option<Progression> {
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if m == 0 || sorted.is_empty() {
        return None;
    }
    if m == 1 {
        return Progression::new(sorted[0], 1, 1).ok();
    }
    let contains = |x: i64| sorted.binary_search(&x).is_ok();
    let mut best: Option<(i64, i64)> = None;
    for (i, &start) in sorted.iter().enumerate() {
        for &second in &sorted[i + 1..] {
            let step = second - start;
            if best.is_some_and(|b| (step, start) >= b) {
                break;
            }
            let fits = (2..m as i64).all(|k| {
                start
                    .checked_add(k.checked_mul(step).unwrap_or(i64::MAX))
                    .is_some_and(contains)
            });
            if fits {
                best = Some((step, start));
                break;
            }
        }
    }
    best.map(|(step, start)| Progression::new(start, step, m).expect("positive step"))
}

/// Zero-sum exponent vectors: the first `n - 1` entries range over
/// `[-bound, bound]` and the last one balances the sum.
pub fn zero_sum_shapes(n: usize, bound: i64) -> Vec<Shape> {
    if n == 0 {
        return Vec::new();
    }
    let axis: Vec<i64> = (-bound..=bound).collect();
    if n == 1 {
        return vec![Shape(vec![0])];
    }
    FamilySpec {
        dimension: n,
        axis_sets: vec![axis; n - 1],
        dilation_closed: false,
    }
    .generate_shapes()
}
