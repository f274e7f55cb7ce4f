//! Compressed-row sparse matrices.
//!
//! Column indices are sorted within each row and duplicates are summed at
//! construction time. Everything downstream (factorization, assembly,
//! preconditioners) relies on those two invariants.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Sparse matrix in compressed row storage.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

/// Triplet accumulator used by the assembly routines.
#[derive(Debug, Clone)]
pub struct CooBuilder<T> {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Real> CooBuilder<T> {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        CooBuilder { nrows, ncols, entries: Vec::new() }
    }

    pub fn push(&mut self, row: usize, col: usize, value: T) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.entries.push((row, col, value));
    }

    /// Sort, sum duplicates and compress. Structural zeros are kept.
    pub fn into_csr(mut self) -> CsrMatrix<T> {
        self.entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_counts = vec![0usize; self.nrows];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<T> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *values.last_mut().expect("entry exists") += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_counts[r] += 1;
                last = Some((r, c));
            }
        }
        let mut row_ptr = vec![0usize; self.nrows + 1];
        for r in 0..self.nrows {
            row_ptr[r + 1] = row_ptr[r] + row_counts[r];
        }
        CsrMatrix { nrows: self.nrows, ncols: self.ncols, row_ptr, col_idx, values }
    }
}

impl<T: Real> CsrMatrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix { nrows, ncols, row_ptr: vec![0; nrows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![T::one(); n],
        }
    }

    /// Build from unsorted triplets.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: Vec<(usize, usize, T)>) -> Self {
        let mut b = CooBuilder::new(nrows, ncols);
        b.entries = triplets;
        b.into_csr()
    }

    /// Diagonal matrix from the given entries.
    pub fn from_diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        CsrMatrix {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn row(&self, r: usize) -> (&[usize], &[T]) {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => T::zero(),
        }
    }

    /// y = A x
    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let mut acc = T::zero();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
    }

    /// y += s * (A x)
    pub fn matvec_add_scaled(&self, x: &[T], s: T, y: &mut [T]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let mut acc = T::zero();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[r] += s * acc;
        }
    }

    /// y = |A| |x|
    pub fn matvec_abs(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let mut acc = T::zero();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k].abs() * x[self.col_idx[k]].abs();
            }
            y[r] = acc;
        }
    }

    /// y += |A| |x|
    pub fn matvec_abs_add(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let mut acc = T::zero();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k].abs() * x[self.col_idx[k]].abs();
            }
            y[r] += acc;
        }
    }

    /// y = A' x
    pub fn matvec_transpose(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        for v in y.iter_mut() {
            *v = T::zero();
        }
        for r in 0..self.nrows {
            let xr = x[r];
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                y[self.col_idx[k]] += self.values[k] * xr;
            }
        }
    }

    pub fn transpose(&self) -> CsrMatrix<T> {
        let mut row_ptr = vec![0usize; self.ncols + 1];
        for &c in &self.col_idx {
            row_ptr[c + 1] += 1;
        }
        for c in 0..self.ncols {
            row_ptr[c + 1] += row_ptr[c];
        }
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![T::zero(); self.nnz()];
        let mut next = row_ptr.clone();
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[k];
                let dst = next[c];
                col_idx[dst] = r;
                values[dst] = self.values[k];
                next[c] += 1;
            }
        }
        // rows of the transpose come out sorted because we sweep rows in order
        CsrMatrix { nrows: self.ncols, ncols: self.nrows, row_ptr, col_idx, values }
    }

    /// self + s * other, union sparsity.
    pub fn add_scaled(&self, other: &CsrMatrix<T>, s: T) -> Result<CsrMatrix<T>> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::DimensionMismatch { expected: self.nrows, got: other.nrows });
        }
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for r in 0..self.nrows {
            let (ca, va) = self.row(r);
            let (cb, vb) = other.row(r);
            let (mut i, mut j) = (0, 0);
            while i < ca.len() || j < cb.len() {
                let next_a = if i < ca.len() { ca[i] } else { usize::MAX };
                let next_b = if j < cb.len() { cb[j] } else { usize::MAX };
                if next_a < next_b {
                    col_idx.push(next_a);
                    values.push(va[i]);
                    i += 1;
                } else if next_b < next_a {
                    col_idx.push(next_b);
                    values.push(s * vb[j]);
                    j += 1;
                } else {
                    col_idx.push(next_a);
                    values.push(va[i] + s * vb[j]);
                    i += 1;
                    j += 1;
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(CsrMatrix { nrows: self.nrows, ncols: self.ncols, row_ptr, col_idx, values })
    }

    /// Sparse product self * other (scatter-based SpGEMM).
    pub fn matmul(&self, other: &CsrMatrix<T>) -> Result<CsrMatrix<T>> {
        if self.ncols != other.nrows {
            return Err(Error::DimensionMismatch { expected: self.ncols, got: other.nrows });
        }
        let n = other.ncols;
        let mut acc = vec![T::zero(); n];
        let mut mark = vec![usize::MAX; n];
        let mut pattern: Vec<usize> = Vec::new();
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for r in 0..self.nrows {
            pattern.clear();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let mid = self.col_idx[k];
                let v = self.values[k];
                for k2 in other.row_ptr[mid]..other.row_ptr[mid + 1] {
                    let c = other.col_idx[k2];
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = T::zero();
                        pattern.push(c);
                    }
                    acc[c] += v * other.values[k2];
                }
            }
            pattern.sort_unstable();
            for &c in &pattern {
                col_idx.push(c);
                values.push(acc[c]);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(CsrMatrix { nrows: self.nrows, ncols: n, row_ptr, col_idx, values })
    }

    /// Scale column j by d[j].
    pub fn scale_columns(&self, d: &[T]) -> CsrMatrix<T> {
        assert_eq!(d.len(), self.ncols);
        let mut out = self.clone();
        for k in 0..out.values.len() {
            out.values[k] = out.values[k] * d[out.col_idx[k]];
        }
        out
    }

    pub fn diagonal(&self) -> Vec<T> {
        let n = self.nrows.min(self.ncols);
        (0..n).map(|i| self.get(i, i)).collect()
    }

    /// Keep rows/cols mapped to `Some(new index)`; maps must be injective
    /// onto 0..n_new contiguously.
    pub fn extract(
        &self,
        row_map: &[Option<usize>],
        new_rows: usize,
        col_map: &[Option<usize>],
        new_cols: usize,
    ) -> CsrMatrix<T> {
        assert_eq!(row_map.len(), self.nrows);
        assert_eq!(col_map.len(), self.ncols);
        let mut rows: Vec<usize> = vec![usize::MAX; new_rows];
        for (old, m) in row_map.iter().enumerate() {
            if let Some(new) = m {
                rows[*new] = old;
            }
        }
        let mut row_ptr = Vec::with_capacity(new_rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for &old_r in &rows {
            if old_r != usize::MAX {
                for k in self.row_ptr[old_r]..self.row_ptr[old_r + 1] {
                    if let Some(new_c) = col_map[self.col_idx[k]] {
                        col_idx.push(new_c);
                        values.push(self.values[k]);
                    }
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix { nrows: new_rows, ncols: new_cols, row_ptr, col_idx, values }
    }

    /// Maximum absolute entry difference against another matrix (union pattern).
    pub fn max_abs_diff(&self, other: &CsrMatrix<T>) -> T {
        assert_eq!(self.nrows, other.nrows);
        assert_eq!(self.ncols, other.ncols);
        let diff = self.add_scaled(other, -T::one()).expect("dims checked");
        diff.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Dense row-major copy (tests and dense analysis only).
    pub fn to_dense(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.nrows * self.ncols];
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                d[r * self.ncols + self.col_idx[k]] = self.values[k];
            }
        }
        d
    }

    /// Coordinate text export: one `row col value` line per entry, 0-based,
    /// 17 significant digits.
    pub fn to_coordinate_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{} {} {}\n", self.nrows, self.ncols, self.nnz()));
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                out.push_str(&format!("{} {} {}\n", r, self.col_idx[k], self.values[k].fmt_full()));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> CsrMatrix<f64> {
        CsrMatrix::from_triplets(
            3,
            3,
            vec![(0, 0, 2.0), (0, 2, 1.0), (1, 1, 3.0), (2, 0, -1.0), (2, 2, 4.0), (0, 2, 0.5)],
        )
    }

    #[test]
    fn triplets_sum_duplicates_and_sort() {
        let m = sample();
        assert_eq!(m.nnz(), 5);
        assert_eq!(m.get(0, 2), 1.5);
        assert!(m.row(0).0.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn matvec_and_transpose_agree_with_dense() {
        let m = sample();
        let x = [1.0, 2.0, 3.0];
        let mut y = [0.0; 3];
        m.matvec(&x, &mut y);
        assert_eq!(y, [2.0 + 4.5, 6.0, -1.0 + 12.0]);
        let mut yt = [0.0; 3];
        m.matvec_transpose(&x, &mut yt);
        let t = m.transpose();
        let mut yt2 = [0.0; 3];
        t.matvec(&x, &mut yt2);
        assert_eq!(yt, yt2);
    }

    #[test]
    fn add_scaled_and_matmul_match_dense() {
        let a = sample();
        let b = CsrMatrix::identity(3);
        let c = a.add_scaled(&b, 2.0).unwrap();
        assert_eq!(c.get(1, 1), 5.0);
        let p = a.matmul(&b).unwrap();
        assert_eq!(p.to_dense(), a.to_dense());
    }

    #[test]
    fn extract_principal_submatrix() {
        let a = sample();
        let keep = vec![Some(0), None, Some(1)];
        let s = a.extract(&keep, 2, &keep, 2);
        assert_eq!(s.to_dense(), vec![2.0, 1.5, -1.0, 4.0]);
    }

    proptest! {
        #[test]
        fn matvec_is_linear(seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = 8;
            let mut trips = Vec::new();
            for _ in 0..20 {
                trips.push((rng.random_range(0..n), rng.random_range(0..n), rng.random_range(-1.0..1.0)));
            }
            let m = CsrMatrix::<f64>::from_triplets(n, n, trips);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let alpha = 0.7;
            let combo: Vec<f64> = x.iter().zip(&y).map(|(a, b)| alpha * a + b).collect();
            let mut lhs = vec![0.0; n];
            m.matvec(&combo, &mut lhs);
            let mut mx = vec![0.0; n];
            let mut my = vec![0.0; n];
            m.matvec(&x, &mut mx);
            m.matvec(&y, &mut my);
            for i in 0..n {
                prop_assert!((lhs[i] - (alpha * mx[i] + my[i])).abs() < 1e-12);
            }
        }
    }
}
