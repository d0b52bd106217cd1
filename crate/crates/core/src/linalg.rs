//! Dense kernels.
//!
//! Matrices are stored as `nalgebra` column-major `DMatrix` values throughout
//! the crate. Factorizations and spectral decompositions are delegated to
//! `faer`, which is considerably faster at the sizes the low-rank comparison
//! runs at; the two libraries share the column-major layout so views are
//! zero-copy.

use faer::linalg::solvers::{DenseSolveCore, PartialPivLu, Solve};
use faer::{MatRef, Side};
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Scalars the dense kernels accept: `f64` and `Complex64`.
pub trait Scalar:
    nalgebra::ComplexField<RealField = f64> + faer::traits::ComplexField + Copy + Send + Sync
{
    const REAL_ONLY: bool;
    fn lift(x: f64) -> Self;
    /// Builds `re + i·im`; the imaginary part is dropped for real scalars.
    fn from_parts(re: f64, im: f64) -> Self;
    fn re_part(self) -> f64;
    fn im_part(self) -> f64;
    fn abs_val(self) -> f64;
}

impl Scalar for f64 {
    const REAL_ONLY: bool = true;
    fn lift(x: f64) -> Self {
        x
    }
    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }
    fn re_part(self) -> f64 {
        self
    }
    fn im_part(self) -> f64 {
        0.0
    }
    fn abs_val(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    const REAL_ONLY: bool = false;
    fn lift(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn from_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }
    fn re_part(self) -> f64 {
        self.re
    }
    fn im_part(self) -> f64 {
        self.im
    }
    fn abs_val(self) -> f64 {
        self.norm()
    }
}

pub(crate) fn view<T: Scalar>(m: &DMatrix<T>) -> MatRef<'_, T> {
    MatRef::from_column_major_slice(m.as_slice(), m.nrows(), m.ncols())
}

pub(crate) fn from_faer<T: Scalar>(m: MatRef<'_, T>) -> DMatrix<T> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn real_part(m: &CMatrix) -> DMatrix<f64> {
    m.map(|z| z.re)
}

pub fn imag_part(m: &CMatrix) -> DMatrix<f64> {
    m.map(|z| z.im)
}

/// Largest entry modulus.
pub fn max_abs<T: Scalar>(m: &DMatrix<T>) -> f64 {
    m.iter().fold(0.0, |acc, &x| acc.max(x.abs_val()))
}

pub fn frobenius<T: Scalar>(m: &DMatrix<T>) -> f64 {
    m.iter()
        .map(|&x| {
            let a = x.abs_val();
            a * a
        })
        .sum::<f64>()
        .sqrt()
}

/// Conjugate transpose.
pub fn adjoint<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    m.adjoint()
}

pub fn is_finite<T: Scalar>(m: &DMatrix<T>) -> bool {
    m.iter().all(|x| x.re_part().is_finite() && x.im_part().is_finite())
}

/// LU factorization with partial pivoting.
pub struct DenseLu<T: Scalar> {
    lu: PartialPivLu<T>,
    n: usize,
    pivot_ratio: f64,
    ln_abs_det: f64,
}

impl<T: Scalar> DenseLu<T> {
    /// Factors `a`; fails when the smallest pivot is below machine
    /// precision relative to the largest.
    pub fn new(a: &DMatrix<T>, what: &str) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Dimension(format!(
                "{what}: expected a square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.nrows();
        if !is_finite(a) {
            return Err(Error::InvalidArgument(format!("{what}: non-finite entries")));
        }
        let lu = view(a).partial_piv_lu();
        let u = lu.U();
        let mut max_piv = 0.0f64;
        let mut min_piv = f64::INFINITY;
        let mut ln_abs_det = 0.0;
        for i in 0..n {
            let d = u[(i, i)].abs_val();
            max_piv = max_piv.max(d);
            min_piv = min_piv.min(d);
            ln_abs_det += d.ln();
        }
        let pivot_ratio = if n == 0 { 1.0 } else { min_piv / max_piv };
        if n > 0 && !(pivot_ratio > f64::EPSILON) {
            return Err(Error::Singular(format!(
                "{what}: pivot ratio {pivot_ratio:e} below machine precision"
            )));
        }
        Ok(Self {
            lu,
            n,
            pivot_ratio,
            ln_abs_det,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Ratio of smallest to largest pivot; a cheap reciprocal condition
    /// indicator.
    pub fn pivot_ratio(&self) -> f64 {
        self.pivot_ratio
    }

    pub fn ln_abs_det(&self) -> f64 {
        self.ln_abs_det
    }

    pub fn solve(&self, rhs: &DMatrix<T>) -> DMatrix<T> {
        assert_eq!(rhs.nrows(), self.n, "rhs row count");
        let x = self.lu.solve(view(rhs));
        from_faer(x.as_ref())
    }

    /// Solves `aᵀ x = rhs` (plain transpose, no conjugation).
    pub fn solve_transpose(&self, rhs: &DMatrix<T>) -> DMatrix<T> {
        assert_eq!(rhs.nrows(), self.n, "rhs row count");
        let x = self.lu.solve_transpose(view(rhs));
        from_faer(x.as_ref())
    }

    pub fn inverse(&self) -> DMatrix<T> {
        from_faer(self.lu.inverse().as_ref())
    }
}

/// Solves `a x = rhs` for a single right-hand side block.
pub fn solve<T: Scalar>(a: &DMatrix<T>, rhs: &DMatrix<T>, what: &str) -> Result<DMatrix<T>> {
    Ok(DenseLu::new(a, what)?.solve(rhs))
}

pub fn inverse<T: Scalar>(a: &DMatrix<T>, what: &str) -> Result<DMatrix<T>> {
    Ok(DenseLu::new(a, what)?.inverse())
}

/// Thin singular value decomposition `a = u · diag(s) · vᴴ`, singular values
/// in descending order.
#[derive(Clone, Debug)]
pub struct Svd<T: Scalar> {
    pub u: DMatrix<T>,
    pub s: Vec<f64>,
    pub v: DMatrix<T>,
}

pub fn svd<T: Scalar>(a: &DMatrix<T>) -> Result<Svd<T>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Svd {
            u: DMatrix::zeros(a.nrows(), 0),
            s: Vec::new(),
            v: DMatrix::zeros(a.ncols(), 0),
        });
    }
    if !is_finite(a) {
        return Err(Error::Decomposition("SVD of a non-finite matrix".into()));
    }
    let d = view(a)
        .thin_svd()
        .map_err(|e| Error::Decomposition(format!("SVD: {e:?}")))?;
    let s = d.S().column_vector().iter().map(|x| x.re_part()).collect();
    Ok(Svd {
        u: from_faer(d.U()),
        s,
        v: from_faer(d.V()),
    })
}

pub fn singular_values<T: Scalar>(a: &DMatrix<T>) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    if !is_finite(a) {
        return Err(Error::Decomposition(
            "singular values of a non-finite matrix".into(),
        ));
    }
    Ok(svd(a)?.s)
}

/// Symmetric eigendecomposition; eigenvalues ascending. Only the lower
/// triangle of `a` is read.
pub fn sym_eig(a: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if !is_finite(a) {
        return Err(Error::Decomposition(
            "eigendecomposition of a non-finite matrix".into(),
        ));
    }
    let d = view(a)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Decomposition(format!("symmetric eigensolver: {e:?}")))?;
    let vals = d.S().column_vector().iter().copied().collect();
    Ok((vals, from_faer(d.U())))
}

/// Eigenvalues of a general real matrix.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    if !is_finite(a) {
        return Err(Error::Decomposition(
            "eigenvalues of a non-finite matrix".into(),
        ));
    }
    view(a)
        .eigenvalues()
        .map_err(|e| Error::Decomposition(format!("eigensolver: {e:?}")))
}

/// Eigenvalues of a general complex matrix.
pub fn eigenvalues_complex(a: &CMatrix) -> Result<Vec<Complex64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    if !is_finite(a) {
        return Err(Error::Decomposition(
            "eigenvalues of a non-finite matrix".into(),
        ));
    }
    view(a)
        .eigenvalues()
        .map_err(|e| Error::Decomposition(format!("eigensolver: {e:?}")))
}

/// Orthonormal basis of the orthogonal complement of the column space of
/// `a` (n × k, full column rank assumed).
pub fn orthogonal_complement(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let k = a.ncols();
    if k >= n {
        return Ok(DMatrix::zeros(n, 0));
    }
    let qr = view(a).qr();
    let q = from_faer(qr.compute_Q().as_ref());
    Ok(q.columns(k, n - k).into_owned())
}

/// Upper-triangular factor of a thin QR decomposition.
pub fn thin_r(a: &DMatrix<f64>) -> DMatrix<f64> {
    from_faer(view(a).qr().thin_R())
}

/// Orthonormal basis of the column space of `a` from a thin QR
/// decomposition (full column rank assumed).
pub fn thin_q(a: &DMatrix<f64>) -> DMatrix<f64> {
    from_faer(view(a).qr().compute_thin_Q().as_ref())
}

/// Block-diagonal matrix of two blocks.
pub fn block_diag<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    let mut out = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    out
}
