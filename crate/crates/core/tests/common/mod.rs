//! Brute-force oracles. Nothing here calls into the evaluator's own
//! arithmetic: every value is recomputed from cell counts.
#![allow(dead_code)]

use crystal_core::crystal::Shape;
use crystal_core::dyadic::DyadicRational;
use crystal_core::evaluator::{Budget, GridSpec, Mask};
use rand::Rng;

/// Odometer over `0..dims[j]`, last axis fastest.
pub fn cells(dims: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &d in dims {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..d).map(move |k| {
                    let mut q = p.clone();
                    q.push(k);
                    q
                })
            })
            .collect();
    }
    out
}

/// Same, over signed ranges `lo[j]..hi[j]`.
pub fn signed_cells(lo: &[i64], hi: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for (&a, &b) in lo.iter().zip(hi) {
        out = out
            .into_iter()
            .flat_map(|p| {
                (a..b).map(move |k| {
                    let mut q = p.clone();
                    q.push(k);
                    q
                })
            })
            .collect();
    }
    out
}

pub fn naive_box_sum(mask: &Mask, lo: &[usize], hi: &[usize]) -> u64 {
    let mut sum = 0;
    for c in cells(&mask.grid().dims()) {
        if c.iter()
            .zip(lo.iter().zip(hi))
            .all(|(x, (a, b))| a <= x && x < b)
            && mask.get_cell(&c)
        {
            sum += 1;
        }
    }
    sum
}

/// Set cells of `mask` inside the window with signed lower corner `corner`;
/// cells outside the box count as empty.
pub fn clipped_count(mask: &Mask, corner: &[i64], window: &[usize]) -> u64 {
    let dims = mask.grid().dims();
    let lo: Vec<i64> = corner.iter().map(|&c| c.max(0)).collect();
    let hi: Vec<i64> = corner
        .iter()
        .zip(window)
        .zip(&dims)
        .map(|((&c, &w), &d)| (c + w as i64).min(d as i64))
        .collect();
    if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
        return 0;
    }
    signed_cells(&lo, &hi)
        .into_iter()
        .filter(|c| {
            let u: Vec<usize> = c.iter().map(|&x| x as usize).collect();
            mask.get_cell(&u)
        })
        .count() as u64
}

pub fn window_cells(grid: &GridSpec, shape: &Shape) -> Vec<usize> {
    shape
        .exponents()
        .iter()
        .zip(grid.resolutions())
        .map(|(a, r)| 1usize << (a - r))
        .collect()
}

/// Aligned maximal function at every cell, over every placement of every
/// shape that contains the cell, including placements sticking out of the box.
pub fn naive_maximal_field(mask: &Mask, shapes: &[Shape]) -> Vec<DyadicRational> {
    let grid = mask.grid();
    let dims = grid.dims();
    let mut best = vec![DyadicRational::zero(); grid.total_cells() as usize];
    for shape in shapes {
        let w = window_cells(grid, shape);
        let vol: u64 = w.iter().map(|&x| x as u64).product();
        let lo: Vec<i64> = w.iter().map(|&x| 1 - x as i64).collect();
        let hi: Vec<i64> = dims.iter().map(|&d| d as i64).collect();
        for corner in signed_cells(&lo, &hi) {
            let count = clipped_count(mask, &corner, &w);
            let avg =
                DyadicRational::from(count) * DyadicRational::pow2(-(vol.trailing_zeros() as i64));
            // every box cell under this placement
            let clo: Vec<i64> = corner.iter().map(|&c| c.max(0)).collect();
            let chi: Vec<i64> = corner
                .iter()
                .zip(&w)
                .zip(&dims)
                .map(|((&c, &x), &d)| (c + x as i64).min(d as i64))
                .collect();
            for c in signed_cells(&clo, &chi) {
                let u: Vec<usize> = c.iter().map(|&x| x as usize).collect();
                let idx = grid.index(&u);
                if avg > best[idx] {
                    best[idx] = avg.clone();
                }
            }
        }
    }
    best
}

/// A random grid with at most `2^max_log_cells` cells in dimension 1..=3.
pub fn random_grid(rng: &mut impl Rng, max_log_cells: i64) -> GridSpec {
    let n = rng.gen_range(1..=3usize);
    let mut budget = max_log_cells;
    let mut res = Vec::new();
    let mut ext = Vec::new();
    for j in 0..n {
        let left = (n - j) as i64;
        let levels = rng.gen_range(0..=(budget - (left - 1)).clamp(0, 6));
        budget -= levels;
        let r = rng.gen_range(-3..=3);
        res.push(r);
        ext.push(r + levels);
    }
    GridSpec::new(res, ext).unwrap()
}

pub fn random_mask(rng: &mut impl Rng, grid: GridSpec) -> Mask {
    let density: f64 = rng.gen_range(0.05..0.95);
    Mask::from_fn(grid, Budget::default(), |_| rng.gen_bool(density)).unwrap()
}

pub fn random_shape(rng: &mut impl Rng, grid: &GridSpec) -> Shape {
    Shape::new(
        grid.resolutions()
            .iter()
            .zip(grid.extents())
            .map(|(&r, &l)| rng.gen_range(r..=l))
            .collect(),
    )
}

/// Membership of the point `x / 2^k` in the crystal on `scales`, straight
/// from the definition: inside `[0, 2^{a_m})` and in the lower half of every
/// period `2^{a_i + 1}` for `i < m`. Scales must be at least `-k`.
pub fn in_crystal_lattice(scales: &[i64], x: i64, k: i64) -> bool {
    let (last, rest) = scales.split_last().unwrap();
    x >= 0 && x < 1i64 << (last + k) && rest.iter().all(|&a| (x >> (a + k)) & 1 == 0)
}

/// Strictly increasing subsets of `lo..=hi` with `1..=max_len` elements.
pub fn scale_sets(lo: i64, hi: i64, max_len: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    fn rec(next: i64, hi: i64, max_len: usize, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if cur.len() == max_len {
            return;
        }
        for a in next..=hi {
            cur.push(a);
            rec(a + 1, hi, max_len, cur, out);
            cur.pop();
        }
    }
    rec(lo, hi, max_len, &mut Vec::new(), &mut out);
    out
}

/// Membership table of the crystal on the `2^-k` lattice of `[0, 2^k)`.
pub fn lattice_table(scales: &[i64], k: i64) -> Vec<bool> {
    (0..1i64 << (2 * k))
        .map(|x| in_crystal_lattice(scales, x, k))
        .collect()
}

/// Every exponent vector in `[-k, k]^n`, largest exponent sum first.
pub fn anchored_candidates(n: usize, k: i64) -> Vec<Vec<i64>> {
    let mut out = signed_cells(&vec![-k; n], &vec![k + 1; n]);
    out.sort_by_key(|a| std::cmp::Reverse(a.iter().sum::<i64>()));
    out
}

/// Inclusion-maximal anchored dyadic rectangles inside the product crystal,
/// by exhaustive search over `candidates` with a per-point check on the
/// `2^-k` lattice. `tables` come from [`lattice_table`]; `candidates` from
/// [`anchored_candidates`].
pub fn maximal_anchored_rectangles(
    tables: &[&[bool]],
    candidates: &[Vec<i64>],
    k: i64,
) -> Vec<Vec<i64>> {
    let n = tables.len();
    let contained = |a: &[i64]| {
        // anchored rectangle [0, 2^{a_j}) point by point, first failure exits
        let ends: Vec<usize> = a.iter().map(|&e| 1usize << (e + k)).collect();
        // points on the edges through the origin first, they fail fastest
        for j in 0..n {
            for x in 0..ends[j] {
                if !(0..n).all(|i| tables[i][if i == j { x } else { 0 }]) {
                    return false;
                }
            }
        }
        let mut p = vec![0usize; n];
        loop {
            if !(0..n).all(|j| tables[j][p[j]]) {
                return false;
            }
            let mut j = n;
            loop {
                if j == 0 {
                    return true;
                }
                j -= 1;
                p[j] += 1;
                if p[j] < ends[j] {
                    break;
                }
                p[j] = 0;
            }
        }
    };
    // largest first; anything below a contained rectangle is contained too
    let mut maximal: Vec<Vec<i64>> = Vec::new();
    for a in candidates {
        let dominated = maximal.iter().any(|b| a.iter().zip(b).all(|(x, y)| x <= y));
        if !dominated && contained(a) {
            maximal.push(a.clone());
        }
    }
    maximal
}
