//! Descriptor state-space systems `E x' = A x + B u`, `y = C x + D u`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, to_complex, CMatrix, DenseLu, Scalar};
use crate::operator::{Factor, Operator};
use crate::sparse::Csc;

/// Largest state dimension for which the spectrum is computed densely.
pub const DENSE_SPECTRUM_LIMIT: usize = 5000;

/// Anything that can be evaluated as a transfer function `H(s)`.
pub trait TransferFunction: Sync {
    fn inputs(&self) -> usize;
    fn outputs(&self) -> usize;
    fn eval(&self, s: Complex64) -> Result<CMatrix>;

    /// Evaluates at many points. Points are independent, so the result does
    /// not depend on the number of worker threads.
    fn eval_many(&self, points: &[Complex64]) -> Result<Vec<CMatrix>> {
        points.par_iter().map(|&s| self.eval(s)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateSpace {
    e: Operator,
    a: Operator,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stability {
    pub stable: bool,
    pub abscissa: f64,
}

impl StateSpace {
    pub fn new(
        e: Operator,
        a: Operator,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
    ) -> Result<Self> {
        let n = a.nrows();
        if n == 0 {
            return Err(Error::Dimension("empty state space".into()));
        }
        if a.ncols() != n {
            return Err(Error::Dimension(format!(
                "A is {}x{}, expected square",
                n,
                a.ncols()
            )));
        }
        if e.nrows() != n || e.ncols() != n {
            return Err(Error::Dimension(format!(
                "E is {}x{}, expected {n}x{n}",
                e.nrows(),
                e.ncols()
            )));
        }
        if b.nrows() != n || b.ncols() == 0 {
            return Err(Error::Dimension(format!(
                "B is {}x{}, expected {n} rows and at least one column",
                b.nrows(),
                b.ncols()
            )));
        }
        if c.ncols() != n || c.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "C is {}x{}, expected {n} columns and at least one row",
                c.nrows(),
                c.ncols()
            )));
        }
        if d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(Error::Dimension(format!(
                "D is {}x{}, expected {}x{}",
                d.nrows(),
                d.ncols(),
                c.nrows(),
                b.ncols()
            )));
        }
        for (name, m) in [("B", &b), ("C", &c), ("D", &d)] {
            if !linalg::is_finite(m) {
                return Err(Error::InvalidArgument(format!("{name} has non-finite entries")));
            }
        }
        Ok(Self { e, a, b, c, d })
    }

    /// Dense realization; `e = None` means the identity.
    pub fn dense(
        e: Option<DMatrix<f64>>,
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: Option<DMatrix<f64>>,
    ) -> Result<Self> {
        let n = a.nrows();
        let e = match e {
            Some(e) => Operator::Dense(e),
            None => Operator::Identity(n),
        };
        let d = d.unwrap_or_else(|| DMatrix::zeros(c.nrows(), b.ncols()));
        if !linalg::is_finite(&a) {
            return Err(Error::InvalidArgument("A has non-finite entries".into()));
        }
        Self::new(e, Operator::Dense(a), b, c, d)
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    pub fn e(&self) -> &Operator {
        &self.e
    }

    pub fn a(&self) -> &Operator {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }

    pub fn with_d(&self, d: DMatrix<f64>) -> Result<Self> {
        Self::new(self.e.clone(), self.a.clone(), self.b.clone(), self.c.clone(), d)
    }

    /// Factorization of `sE − A`.
    fn pencil(&self, s: Complex64) -> Result<Factor<Complex64>> {
        Factor::combination(
            &[(s, &self.e), (Complex64::new(-1.0, 0.0), &self.a)],
            &format!("sE - A at s = {s}"),
        )
    }

    /// `H'(s) = −C (sE−A)⁻¹ E (sE−A)⁻¹ B`.
    pub fn eval_derivative(&self, s: Complex64) -> Result<CMatrix> {
        let f = self.pencil(s)?;
        let x = f.solve(&to_complex(&self.b));
        let y = f.solve(&self.e.mul(&x));
        Ok(-(to_complex(&self.c) * y))
    }

    /// The reciprocal system `(E, E A⁻¹ E, E A⁻¹ B, −C A⁻¹ E, D − C A⁻¹ B)`,
    /// whose transfer function is `H(1/s)`. Built from solves against `A`.
    pub fn reciprocal(&self) -> Result<StateSpace> {
        let fa = self.a.factor("A")?;
        let n = self.n();
        let a_inv_e = match &self.e {
            Operator::Identity(_) => {
                // E = I: A⁻¹E is A⁻¹ itself
                fa.solve(&DMatrix::identity(n, n))
            }
            e => fa.solve(&e.to_dense()),
        };
        let a_inv_b = fa.solve(&self.b);
        let a_t = self.e.mul(&a_inv_e);
        let b_t = self.e.mul(&a_inv_b);
        let c_t = -(&self.c * &a_inv_e);
        let d_t = &self.d - &self.c * &a_inv_b;
        let e_t = match &self.e {
            Operator::Sparse(s) => Operator::Dense(s.to_dense()),
            e => e.clone(),
        };
        StateSpace::new(e_t, Operator::Dense(a_t), b_t, c_t, d_t)
    }

    /// Splits `H = H_sp + D` into the strictly proper part and the
    /// feedthrough.
    pub fn strictly_proper_split(&self) -> (StateSpace, DMatrix<f64>) {
        let mut sp = self.clone();
        sp.d = DMatrix::zeros(self.p(), self.m());
        (sp, self.d.clone())
    }

    /// `H(0) = D − C A⁻¹ B`.
    pub fn dc_moment(&self) -> Result<DMatrix<f64>> {
        let fa = self.a.factor("A")?;
        Ok(&self.d - &self.c * fa.solve(&self.b))
    }

    /// Spectral abscissa of `E⁻¹A` from a dense eigensolve.
    pub fn stability(&self) -> Result<Stability> {
        let n = self.n();
        if n > DENSE_SPECTRUM_LIMIT {
            return Err(Error::InvalidArgument(format!(
                "stability check needs a dense spectrum; n = {n} exceeds {DENSE_SPECTRUM_LIMIT}"
            )));
        }
        let a = self.a.to_dense();
        let m = match &self.e {
            Operator::Identity(_) => a,
            e => DenseLu::new(&e.to_dense(), "E")?.solve(&a),
        };
        let eig = linalg::eigenvalues(&m)?;
        let abscissa = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        Ok(Stability {
            stable: abscissa < 0.0,
            abscissa,
        })
    }

    /// Errors unless the system is asymptotically stable. Systems too large
    /// for a dense spectrum are accepted as given.
    pub fn require_stable(&self) -> Result<()> {
        if self.n() > DENSE_SPECTRUM_LIMIT {
            log::debug!("skipping dense stability check at n = {}", self.n());
            return Ok(());
        }
        let st = self.stability()?;
        if st.stable {
            Ok(())
        } else {
            Err(Error::Unstable {
                abscissa: st.abscissa,
            })
        }
    }

    /// Applies the state transformation `x = T x̂`: `(E T, A T, B, C T)`
    /// premultiplied by `T⁻¹`.
    pub fn transform(&self, t: &DMatrix<f64>) -> Result<StateSpace> {
        let lu = DenseLu::new(t, "T")?;
        let e = lu.solve(&(self.e.to_dense() * t));
        let a = lu.solve(&(self.a.to_dense() * t));
        let b = lu.solve(&self.b);
        let c = &self.c * t;
        StateSpace::new(Operator::Dense(e), Operator::Dense(a), b, c, self.d.clone())
    }

    /// Realization of `H(s) − H_r(s)` with states stacked as `[x; x_r]`.
    pub fn error_system(&self, rom: &StateSpace) -> Result<StateSpace> {
        if self.m() != rom.m() || self.p() != rom.p() {
            return Err(Error::Dimension(format!(
                "error system needs matching I/O sizes: {}x{} vs {}x{}",
                self.p(),
                self.m(),
                rom.p(),
                rom.m()
            )));
        }
        let e = linalg::block_diag(&self.e.to_dense(), &rom.e.to_dense());
        let a = linalg::block_diag(&self.a.to_dense(), &rom.a.to_dense());
        let mut b = DMatrix::zeros(self.n() + rom.n(), self.m());
        b.rows_mut(0, self.n()).copy_from(&self.b);
        b.rows_mut(self.n(), rom.n()).copy_from(&rom.b);
        let mut c = DMatrix::zeros(self.p(), self.n() + rom.n());
        c.columns_mut(0, self.n()).copy_from(&self.c);
        c.columns_mut(self.n(), rom.n()).copy_from(&(-&rom.c));
        let e = if self.e.is_identity() && rom.e.is_identity() {
            Operator::Identity(self.n() + rom.n())
        } else {
            Operator::Dense(e)
        };
        StateSpace::new(e, Operator::Dense(a), b, c, &self.d - &rom.d)
    }
}

impl TransferFunction for StateSpace {
    fn inputs(&self) -> usize {
        self.m()
    }

    fn outputs(&self) -> usize {
        self.p()
    }

    fn eval(&self, s: Complex64) -> Result<CMatrix> {
        let f = self.pencil(s)?;
        let x = f.solve(&to_complex(&self.b));
        Ok(to_complex(&self.c) * x + to_complex(&self.d))
    }
}

/// Options for [`random_stable`].
#[derive(Clone, Copy, Debug)]
pub struct RandomOptions {
    /// Draw a random symmetric positive definite `E` instead of the identity.
    pub spd_e: bool,
    /// Real parts of the block eigenvalues are drawn log-uniformly from
    /// `[-10^hi, -10^lo]` before the stability margin is subtracted.
    pub decades: (f64, f64),
}

impl Default for RandomOptions {
    fn default() -> Self {
        Self {
            spd_e: false,
            decades: (-1.0, 1.0),
        }
    }
}

/// Stability margin subtracted from every random spectrum.
pub const RANDOM_MARGIN: f64 = 0.1;

/// Deterministic random stable system `A = Q (Λ − δI) Qᵀ` with `Q` Haar
/// orthogonal and `Λ` made of 1×1 and 2×2 stable blocks. The 2×2 blocks
/// have equal diagonals, so the symmetric part of `A` is negative definite
/// and stability survives any SPD `E`.
pub fn random_stable(n: usize, m: usize, p: usize, seed: u64) -> Result<StateSpace> {
    random_stable_with(n, m, p, seed, RandomOptions::default())
}

pub fn random_stable_with(
    n: usize,
    m: usize,
    p: usize,
    seed: u64,
    opts: RandomOptions,
) -> Result<StateSpace> {
    if n == 0 || m == 0 || p == 0 {
        return Err(Error::InvalidArgument("n, m, p must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = opts.decades;
    let mut lam = DMatrix::<f64>::zeros(n, n);
    let mut i = 0;
    while i < n {
        let a = -10f64.powf(rng.random_range(lo..=hi));
        if i + 1 < n && rng.random_bool(0.5) {
            let b = a.abs() * rng.random_range(-2.0..=2.0);
            lam[(i, i)] = a;
            lam[(i + 1, i + 1)] = a;
            lam[(i, i + 1)] = b;
            lam[(i + 1, i)] = -b;
            i += 2;
        } else {
            lam[(i, i)] = a;
            i += 1;
        }
    }
    for k in 0..n {
        lam[(k, k)] -= RANDOM_MARGIN;
    }
    let q = haar_orthogonal(n, &mut rng);
    let a = &q * lam * q.transpose();
    let b = DMatrix::from_fn(n, m, |_, _| rng.random_range(-1.0..=1.0));
    let c = DMatrix::from_fn(p, n, |_, _| rng.random_range(-1.0..=1.0));
    let e = if opts.spd_e {
        let g = gaussian(n, n, &mut rng);
        let mut e = &g * g.transpose() / (2.0 * n as f64);
        for k in 0..n {
            e[(k, k)] += 1.0;
        }
        Some(e)
    } else {
        None
    };
    StateSpace::dense(e, a, b, c, None)
}

fn gaussian(r: usize, c: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(rng))
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// signs of `R`'s diagonal folded into `Q`.
pub fn haar_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let qr = gaussian(n, n, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Random matrix with condition number at most `kappa`: `U Σ Vᵀ` with
/// singular values log-spaced in `[1, kappa]`.
pub fn random_conditioned(n: usize, kappa: f64, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = haar_orthogonal(n, &mut rng);
    let v = haar_orthogonal(n, &mut rng);
    let s = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |i, _| {
        if n == 1 {
            1.0
        } else {
            kappa.powf(i as f64 / (n - 1) as f64)
        }
    }));
    u * s * v.transpose()
}

/// Finite-difference 1D heat equation on `(0, 1)` with Dirichlet ends:
/// `A = (n+1)² tridiag(1, −2, 1)`, input on `[0.1, 0.3]`, output the mean
/// over `[0.6, 0.9]`.
pub fn heat_1d(n: usize) -> Result<StateSpace> {
    if n < 10 {
        return Err(Error::InvalidArgument("heat_1d needs n >= 10".into()));
    }
    let h = 1.0 / (n as f64 + 1.0);
    let scale = (n as f64 + 1.0).powi(2);
    let mut t = Vec::with_capacity(3 * n);
    for i in 0..n {
        t.push((i, i, -2.0 * scale));
        if i > 0 {
            t.push((i, i - 1, scale));
        }
        if i + 1 < n {
            t.push((i, i + 1, scale));
        }
    }
    let a = Csc::from_triplets(n, n, &t)?;
    let x = |i: usize| (i as f64 + 1.0) * h;
    let b = DMatrix::from_fn(n, 1, |i, _| if (0.1..=0.3).contains(&x(i)) { 1.0 } else { 0.0 });
    let c = DMatrix::from_fn(1, n, |_, i| {
        if (0.6..=0.9).contains(&x(i)) {
            h / 0.3
        } else {
            0.0
        }
    });
    StateSpace::new(Operator::Identity(n), Operator::Sparse(a), b, c, DMatrix::zeros(1, 1))
}

/// Dense reduced realization `(I, A, B, C, D)` over a real or complex field.
#[derive(Clone, Debug, PartialEq)]
pub struct Realization<T: Scalar> {
    pub a: DMatrix<T>,
    pub b: DMatrix<T>,
    pub c: DMatrix<T>,
    pub d: DMatrix<T>,
}

impl<T: Scalar> Realization<T> {
    pub fn new(a: DMatrix<T>, b: DMatrix<T>, c: DMatrix<T>, d: DMatrix<T>) -> Result<Self> {
        let r = a.nrows();
        if a.ncols() != r
            || b.nrows() != r
            || c.ncols() != r
            || d.nrows() != c.nrows()
            || d.ncols() != b.ncols()
        {
            return Err(Error::Dimension(format!(
                "inconsistent realization: A {}x{}, B {}x{}, C {}x{}, D {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols(),
                c.nrows(),
                c.ncols(),
                d.nrows(),
                d.ncols()
            )));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn to_complex(&self) -> Realization<Complex64> {
        let f = |m: &DMatrix<T>| m.map(|x| Complex64::new(x.re_part(), x.im_part()));
        Realization {
            a: f(&self.a),
            b: f(&self.b),
            c: f(&self.c),
            d: f(&self.d),
        }
    }

    /// Largest imaginary magnitude over all four matrices.
    pub fn max_imag(&self) -> f64 {
        [&self.a, &self.b, &self.c, &self.d]
            .iter()
            .flat_map(|m| m.iter())
            .fold(0.0, |acc, x| acc.max(x.im_part().abs()))
    }

    pub fn poles(&self) -> Result<Vec<Complex64>> {
        let mut p = linalg::eigenvalues_complex(&self.to_complex().a)?;
        p.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        Ok(p)
    }
}

impl Realization<f64> {
    pub fn to_state_space(&self) -> Result<StateSpace> {
        StateSpace::dense(None, self.a.clone(), self.b.clone(), self.c.clone(), Some(self.d.clone()))
    }
}

impl<T: Scalar> TransferFunction for Realization<T> {
    fn inputs(&self) -> usize {
        self.b.ncols()
    }

    fn outputs(&self) -> usize {
        self.c.nrows()
    }

    fn eval(&self, s: Complex64) -> Result<CMatrix> {
        let z = self.to_complex();
        let r = self.order();
        let mut m = -z.a;
        for i in 0..r {
            m[(i, i)] += s;
        }
        let x = DenseLu::new(&m, &format!("sI - A at s = {s}"))?.solve(&z.b);
        Ok(z.c * x + z.d)
    }
}

/// Pointwise difference `H₁(s) − H₂(s)` of two transfer functions.
pub struct Difference<'a> {
    pub lhs: &'a dyn TransferFunction,
    pub rhs: &'a dyn TransferFunction,
}

impl<'a> Difference<'a> {
    pub fn new(lhs: &'a dyn TransferFunction, rhs: &'a dyn TransferFunction) -> Result<Self> {
        if lhs.inputs() != rhs.inputs() || lhs.outputs() != rhs.outputs() {
            return Err(Error::Dimension(format!(
                "I/O sizes differ: {}x{} vs {}x{}",
                lhs.outputs(),
                lhs.inputs(),
                rhs.outputs(),
                rhs.inputs()
            )));
        }
        Ok(Self { lhs, rhs })
    }
}

impl TransferFunction for Difference<'_> {
    fn inputs(&self) -> usize {
        self.lhs.inputs()
    }

    fn outputs(&self) -> usize {
        self.lhs.outputs()
    }

    fn eval(&self, s: Complex64) -> Result<CMatrix> {
        Ok(self.lhs.eval(s)? - self.rhs.eval(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn s1() -> StateSpace {
        StateSpace::dense(
            None,
            DMatrix::from_element(1, 1, -1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            None,
        )
        .unwrap()
    }

    fn s2() -> StateSpace {
        StateSpace::dense(
            None,
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -2.0])),
            DMatrix::from_element(2, 1, 1.0),
            DMatrix::from_element(1, 2, 1.0),
            None,
        )
        .unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_scalar_examples() {
        let s = s1();
        assert_abs_diff_eq!(s.eval(c(0.0, 0.0)).unwrap()[(0, 0)].re, 1.0, epsilon = 1e-15);
        let h = s.eval(c(0.0, 1.0)).unwrap()[(0, 0)];
        assert!((h - c(0.5, -0.5)).norm() < 1e-15);
        let s = s.with_d(DMatrix::from_element(1, 1, 2.0)).unwrap();
        assert!((s.eval(c(0.0, 0.0)).unwrap()[(0, 0)] - c(3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pole_evaluation_is_singular() {
        assert!(matches!(s1().eval(c(-1.0, 0.0)), Err(Error::Singular(_))));
    }

    #[test]
    fn reciprocal_of_scalar() {
        let r = s1().reciprocal().unwrap();
        assert_eq!(r.a().to_dense()[(0, 0)], -1.0);
        assert_eq!(r.b()[(0, 0)], -1.0);
        assert_eq!(r.c()[(0, 0)], 1.0);
        assert_eq!(r.d()[(0, 0)], 1.0);
        assert!(r.e().is_identity());
        let h = r.eval(c(2.0, 0.0)).unwrap()[(0, 0)];
        let want = s1().eval(c(0.5, 0.0)).unwrap()[(0, 0)];
        assert!((h - c(2.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!((h - want).norm() < 1e-15);
    }

    #[test]
    fn split_and_moment() {
        let s = s1().with_d(DMatrix::from_element(1, 1, 2.0)).unwrap();
        let (sp, d) = s.strictly_proper_split();
        assert_eq!(d[(0, 0)], 2.0);
        assert_eq!(sp.d()[(0, 0)], 0.0);
        assert_eq!(s1().dc_moment().unwrap()[(0, 0)], 1.0);
        assert_abs_diff_eq!(s2().dc_moment().unwrap()[(0, 0)], 1.5, epsilon = 1e-15);
        let r = random_stable(5, 2, 2, 3).unwrap().with_d(DMatrix::from_element(2, 2, 0.3)).unwrap();
        let (sp, d) = r.strictly_proper_split();
        let z = c(0.0, 1.0);
        assert!((sp.eval(z).unwrap() + to_complex(&d) - r.eval(z).unwrap()).norm() <= 1e-14);
    }

    #[test]
    fn stability_examples() {
        let st = s1().stability().unwrap();
        assert!(st.stable);
        assert_eq!(st.abscissa, -1.0);
        let un = StateSpace::dense(
            None,
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            None,
        )
        .unwrap();
        let st = un.stability().unwrap();
        assert!(!st.stable);
        assert_eq!(st.abscissa, 1.0);
        assert!((s2().stability().unwrap().abscissa + 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_is_deterministic_and_stable() {
        let a = random_stable(4, 1, 1, 7).unwrap();
        let b = random_stable(4, 1, 1, 7).unwrap();
        assert_eq!(a, b);
        for seed in 0..10 {
            let s = random_stable_with(
                12,
                2,
                3,
                seed,
                RandomOptions {
                    spd_e: true,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!(s.stability().unwrap().stable);
            let e = s.e().to_dense();
            assert!((&e - e.transpose()).norm() == 0.0);
            let (vals, _) = linalg::sym_eig(&e).unwrap();
            assert!(vals[0] > 0.0);
        }
    }

    #[test]
    fn error_system_is_pointwise_difference() {
        let f = random_stable(6, 2, 2, 11).unwrap();
        let r = random_stable(3, 2, 2, 12).unwrap();
        let es = f.error_system(&r).unwrap();
        assert_eq!(es.n(), 9);
        for k in 0..10 {
            let s = c(0.1 * k as f64, 0.7 * k as f64 - 2.0);
            let want = f.eval(s).unwrap() - r.eval(s).unwrap();
            assert!((es.eval(s).unwrap() - want).norm() <= 1e-13);
        }
        let z = s1().error_system(&s1()).unwrap().eval(c(0.0, 1.0)).unwrap();
        assert_eq!(z[(0, 0)], c(0.0, 0.0));
    }

    #[test]
    fn derivative_matches_hand_value() {
        let h = s1().eval_derivative(c(0.0, 1.0)).unwrap()[(0, 0)];
        assert!((h - c(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn heat_is_stable_and_sparse() {
        let h = heat_1d(50).unwrap();
        assert!(h.a().is_sparse());
        assert!(h.stability().unwrap().stable);
        assert!(h.b().sum() > 0.0 && h.c().sum() > 0.0);
    }

    #[test]
    fn realization_matches_state_space() {
        let s = random_stable(4, 1, 2, 5).unwrap();
        let r = Realization::new(s.a().to_dense(), s.b().clone(), s.c().clone(), s.d().clone()).unwrap();
        let z = c(0.3, 1.1);
        assert!((r.eval(z).unwrap() - s.eval(z).unwrap()).norm() < 1e-13);
    }
}
