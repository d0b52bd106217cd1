//! Real n×n operators (identity, dense, or sparse) and factorizations of
//! linear combinations of them.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{from_faer, is_finite, view, DenseLu, Scalar};
use crate::sparse::Csc;

#[derive(Clone, Debug, PartialEq)]
pub enum Operator {
    Identity(usize),
    Dense(DMatrix<f64>),
    Sparse(Csc),
}

impl Operator {
    pub fn nrows(&self) -> usize {
        match self {
            Operator::Identity(n) => *n,
            Operator::Dense(m) => m.nrows(),
            Operator::Sparse(s) => s.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            Operator::Identity(n) => *n,
            Operator::Dense(m) => m.ncols(),
            Operator::Sparse(s) => s.ncols(),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Operator::Identity(_))
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Operator::Sparse(_))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Operator::Identity(n) => DMatrix::identity(*n, *n),
            Operator::Dense(m) => m.clone(),
            Operator::Sparse(s) => s.to_dense(),
        }
    }

    pub fn transpose(&self) -> Operator {
        match self {
            Operator::Identity(n) => Operator::Identity(*n),
            Operator::Dense(m) => Operator::Dense(m.transpose()),
            Operator::Sparse(s) => Operator::Sparse(s.transpose()),
        }
    }

    /// `self · x`
    pub fn mul<T: Scalar>(&self, x: &DMatrix<T>) -> DMatrix<T> {
        match self {
            Operator::Identity(_) => x.clone(),
            Operator::Dense(m) => dense_mul(m, x),
            Operator::Sparse(s) => s.mul_dense(x),
        }
    }

    /// `selfᵀ · x`
    pub fn tr_mul<T: Scalar>(&self, x: &DMatrix<T>) -> DMatrix<T> {
        match self {
            Operator::Identity(_) => x.clone(),
            Operator::Dense(m) => dense_mul(&m.transpose(), x),
            Operator::Sparse(s) => s.tr_mul_dense(x),
        }
    }

    /// `x · self`
    pub fn left_mul<T: Scalar>(&self, x: &DMatrix<T>) -> DMatrix<T> {
        match self {
            Operator::Identity(_) => x.clone(),
            Operator::Dense(m) => dense_mul(&m.transpose(), &x.transpose()).transpose(),
            Operator::Sparse(s) => s.left_mul_dense(x),
        }
    }

    pub fn frobenius(&self) -> f64 {
        match self {
            Operator::Identity(n) => (*n as f64).sqrt(),
            Operator::Dense(m) => m.norm(),
            Operator::Sparse(s) => s.triplets().map(|(_, _, v)| v * v).sum::<f64>().sqrt(),
        }
    }

    /// Factorization of `self`.
    pub fn factor(&self, what: &str) -> Result<Factor<f64>> {
        Factor::combination(&[(1.0, self)], what)
    }
}

fn dense_mul<T: Scalar>(m: &DMatrix<f64>, x: &DMatrix<T>) -> DMatrix<T> {
    let re = x.map(|v| v.re_part());
    let pr = m * re;
    if T::REAL_ONLY {
        return pr.map(T::lift);
    }
    let pi = m * x.map(|v| v.im_part());
    pr.zip_map(&pi, T::from_parts)
}

/// LU factorization of a real or complex combination `Σ cᵢ·Opᵢ`.
pub enum Factor<T: Scalar> {
    Dense(DenseLu<T>),
    Sparse {
        n: usize,
        lu: faer::sparse::linalg::solvers::Lu<usize, T>,
    },
}

impl<T: Scalar> Factor<T> {
    /// Factors the combination; any sparse term makes the whole
    /// combination sparse.
    pub fn combination(terms: &[(T, &Operator)], what: &str) -> Result<Self> {
        let n = terms
            .first()
            .map(|(_, op)| op.nrows())
            .ok_or_else(|| Error::InvalidArgument(format!("{what}: empty combination")))?;
        for (_, op) in terms {
            if op.nrows() != n || op.ncols() != n {
                return Err(Error::Dimension(format!(
                    "{what}: operators must be {n}x{n}"
                )));
            }
        }
        if terms.iter().any(|(_, op)| op.is_sparse()) {
            let mut trips: Vec<Triplet<usize, usize, T>> = Vec::new();
            for (c, op) in terms {
                match op {
                    Operator::Identity(_) => {
                        trips.extend((0..n).map(|i| Triplet::new(i, i, *c)));
                    }
                    Operator::Dense(m) => {
                        for j in 0..n {
                            for i in 0..n {
                                if m[(i, j)] != 0.0 {
                                    trips.push(Triplet::new(i, j, *c * T::lift(m[(i, j)])));
                                }
                            }
                        }
                    }
                    Operator::Sparse(s) => {
                        trips.extend(s.triplets().map(|(i, j, v)| Triplet::new(i, j, *c * T::lift(v))));
                    }
                }
            }
            let mat = SparseColMat::<usize, T>::try_new_from_triplets(n, n, &trips)
                .map_err(|e| Error::Decomposition(format!("{what}: {e:?}")))?;
            let lu = mat
                .sp_lu()
                .map_err(|e| Error::Singular(format!("{what}: sparse LU failed ({e:?})")))?;
            let f = Factor::Sparse { n, lu };
            // a singular sparse factor shows up as non-finite solutions
            let probe = DMatrix::<T>::from_element(n, 1, T::lift(1.0));
            if !is_finite(&f.solve(&probe)) {
                return Err(Error::Singular(format!("{what}: sparse LU is singular")));
            }
            Ok(f)
        } else {
            let mut m = DMatrix::<T>::zeros(n, n);
            for (c, op) in terms {
                match op {
                    Operator::Identity(_) => {
                        for i in 0..n {
                            m[(i, i)] += *c;
                        }
                    }
                    Operator::Dense(d) => {
                        m.zip_apply(d, |a, b| *a += *c * T::lift(b));
                    }
                    Operator::Sparse(_) => unreachable!(),
                }
            }
            Ok(Factor::Dense(DenseLu::new(&m, what)?))
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Factor::Dense(lu) => lu.dim(),
            Factor::Sparse { n, .. } => *n,
        }
    }

    pub fn solve(&self, rhs: &DMatrix<T>) -> DMatrix<T> {
        match self {
            Factor::Dense(lu) => lu.solve(rhs),
            Factor::Sparse { lu, .. } => from_faer(lu.solve(view(rhs)).as_ref()),
        }
    }

    /// Solves with the plain (unconjugated) transpose.
    pub fn solve_transpose(&self, rhs: &DMatrix<T>) -> DMatrix<T> {
        match self {
            Factor::Dense(lu) => lu.solve_transpose(rhs),
            Factor::Sparse { lu, .. } => from_faer(lu.solve_transpose(view(rhs)).as_ref()),
        }
    }

    /// Pivot ratio of a dense factor; `None` for sparse factors.
    pub fn pivot_ratio(&self) -> Option<f64> {
        match self {
            Factor::Dense(lu) => Some(lu.pivot_ratio()),
            Factor::Sparse { .. } => None,
        }
    }
}
