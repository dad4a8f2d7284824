use super::{strides, Mask};

/// n-dimensional summed-volume table of a mask.
///
/// The table has `N_j + 1` entries per axis; entry `x` holds the number of set
/// cells `c` with `c_j < x_j` on every axis.
#[derive(Clone, Debug)]
pub struct PrefixSums {
    dims: Vec<usize>,
    table_strides: Vec<usize>,
    table: Vec<u64>,
}

impl PrefixSums {
    pub fn new(mask: &Mask) -> Self {
        let dims = mask.grid().dims();
        let table_dims: Vec<usize> = dims.iter().map(|d| d + 1).collect();
        let table_strides = strides(&table_dims);
        let total: usize = table_dims.iter().product();
        let mut table = vec![0u64; total];

        let cell_strides = strides(&dims);
        for i in mask.bits().ones() {
            let mut rem = i;
            let mut t = 0;
            for j in 0..dims.len() {
                let c = rem / cell_strides[j];
                rem %= cell_strides[j];
                t += (c + 1) * table_strides[j];
            }
            table[t] = 1;
        }

        // running sums along each axis in turn
        for j in 0..dims.len() {
            let stride = table_strides[j];
            let len = table_dims[j];
            let block = stride * len;
            for outer in (0..total).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for k in 1..len {
                        table[base + k * stride] += table[base + (k - 1) * stride];
                    }
                }
            }
        }

        Self {
            dims,
            table_strides,
            table,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total(&self) -> u64 {
        *self.table.last().unwrap_or(&0)
    }

    /// Number of set cells in the half-open box `[lo, hi)`.
    pub fn box_sum(&self, lo: &[usize], hi: &[usize]) -> u64 {
        let n = self.dims.len();
        debug_assert!(lo.len() == n && hi.len() == n);
        debug_assert!((0..n).all(|j| lo[j] <= hi[j] && hi[j] <= self.dims[j]));
        let mut sum: i128 = 0;
        for corner in 0..1usize << n {
            let mut idx = 0;
            let mut lows = 0;
            for j in 0..n {
                if corner >> j & 1 == 1 {
                    idx += hi[j] * self.table_strides[j];
                } else {
                    idx += lo[j] * self.table_strides[j];
                    lows += 1;
                }
            }
            let v = self.table[idx] as i128;
            if lows % 2 == 0 {
                sum += v;
            } else {
                sum -= v;
            }
        }
        sum as u64
    }

    /// Box sums for every placement of a `window`-sized box whose lower corner
    /// ranges over `[0, N_j - w_j]`, in row-major order of the corner.
    pub(crate) fn window_sums(&self, window: &[usize]) -> (Vec<usize>, Vec<u64>) {
        let n = self.dims.len();
        let positions: Vec<usize> = self
            .dims
            .iter()
            .zip(window)
            .map(|(d, w)| d + 1 - w)
            .collect();
        // signed offsets of the 2^n corners relative to the lower corner
        let corners: Vec<(usize, bool)> = (0..1usize << n)
            .map(|c| {
                let off: usize = (0..n)
                    .filter(|&j| c >> j & 1 == 1)
                    .map(|j| window[j] * self.table_strides[j])
                    .sum();
                let lows = n - (c.count_ones() as usize);
                (off, lows.is_multiple_of(2))
            })
            .collect();
        let total: usize = positions.iter().product();
        let mut out = Vec::with_capacity(total);
        let mut p = vec![0usize; n];
        for _ in 0..total {
            let base: usize = p.iter().zip(&self.table_strides).map(|(a, s)| a * s).sum();
            let mut sum: i128 = 0;
            for &(off, plus) in &corners {
                let v = self.table[base + off] as i128;
                if plus {
                    sum += v;
                } else {
                    sum -= v;
                }
            }
            out.push(sum as u64);
            for j in (0..n).rev() {
                p[j] += 1;
                if p[j] < positions[j] {
                    break;
                }
                p[j] = 0;
            }
        }
        (positions, out)
    }
}
