//! Compressed sparse column storage for real system matrices.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Csc {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl Csc {
    /// Builds from (row, col, value) triplets; duplicates are summed and
    /// explicit zeros are kept out.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut t: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(i, j, v) in triplets {
            if i >= nrows || j >= ncols {
                return Err(Error::Dimension(format!(
                    "entry ({i}, {j}) outside a {nrows}x{ncols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite entry at ({i}, {j})"
                )));
            }
            t.push((i, j, v));
        }
        t.sort_by_key(|&(i, j, _)| (j, i));
        let mut col_ptr = vec![0usize; ncols + 1];
        let mut row_idx = Vec::with_capacity(t.len());
        let mut values: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        let mut cols = Vec::with_capacity(t.len());
        for (i, j, v) in t {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_idx.push(i);
                values.push(v);
                cols.push(j);
                last = Some((i, j));
            }
        }
        // drop entries that cancelled out
        let mut keep_r = Vec::with_capacity(row_idx.len());
        let mut keep_v = Vec::with_capacity(values.len());
        for ((i, j), v) in row_idx.into_iter().zip(cols).zip(values) {
            if v != 0.0 {
                keep_r.push(i);
                keep_v.push(v);
                col_ptr[j + 1] += 1;
            }
        }
        for j in 0..ncols {
            col_ptr[j + 1] += col_ptr[j];
        }
        Ok(Self {
            nrows,
            ncols,
            col_ptr,
            row_idx: keep_r,
            values: keep_v,
        })
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut t = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if m[(i, j)] != 0.0 {
                    t.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), &t).expect("dense matrix entries are in range")
    }

    pub fn identity(n: usize) -> Self {
        let t: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, n, &t).expect("diagonal entries are in range")
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.ncols).flat_map(move |j| {
            (self.col_ptr[j]..self.col_ptr[j + 1]).map(move |k| (self.row_idx[k], j, self.values[k]))
        })
    }

    pub fn transpose(&self) -> Self {
        let t: Vec<_> = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, &t).expect("transposed entries are in range")
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    /// `self · x`
    pub fn mul_dense<T: Scalar>(&self, x: &DMatrix<T>) -> DMatrix<T> {
        assert_eq!(x.nrows(), self.ncols, "sparse product shape");
        let mut y = DMatrix::<T>::zeros(self.nrows, x.ncols());
        for c in 0..x.ncols() {
            for j in 0..self.ncols {
                let xj = x[(j, c)];
                for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                    y[(self.row_idx[k], c)] += xj * T::lift(self.values[k]);
                }
            }
        }
        y
    }

    /// `selfᵀ · x`
    pub fn tr_mul_dense<T: Scalar>(&self, x: &DMatrix<T>) -> DMatrix<T> {
        assert_eq!(x.nrows(), self.nrows, "sparse product shape");
        let mut y = DMatrix::<T>::zeros(self.ncols, x.ncols());
        for c in 0..x.ncols() {
            for j in 0..self.ncols {
                let mut acc = T::zero();
                for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                    acc += x[(self.row_idx[k], c)] * T::lift(self.values[k]);
                }
                y[(j, c)] = acc;
            }
        }
        y
    }

    /// `x · self`
    pub fn left_mul_dense<T: Scalar>(&self, x: &DMatrix<T>) -> DMatrix<T> {
        self.tr_mul_dense(&x.transpose()).transpose()
    }
}
