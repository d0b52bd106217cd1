//! Controllability and observability Gramians.
//!
//! `A P Eᵀ + E P Aᵀ + B Bᵀ = 0` and `Aᵀ Q E + Eᵀ Q A + Cᵀ C = 0` are solved
//! either densely with the matrix sign function or, for large sparse
//! systems, with the low-rank ADI iteration. Both paths produce square-root
//! factors `P ≈ U Uᵀ`, `Q ≈ L Lᵀ`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, DenseLu};
use crate::operator::{Factor, Operator};
use crate::system::StateSpace;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `A X Eᵀ + E X Aᵀ + F Fᵀ = 0`, `F` with n rows.
    Controllability,
    /// `Aᵀ X E + Eᵀ X A + Fᵀ F = 0`, `F` with n columns.
    Observability,
}

pub const SIGN_TOL: f64 = 1e-12;
pub const SIGN_MAX_ITER: usize = 100;
/// Negative eigenvalues of a computed Gramian down to this fraction of the
/// largest one are attributed to roundoff and clipped to zero.
pub const CLIP_TOL: f64 = 1e-12;
/// Relative column norm below which ADI factor columns are discarded.
pub const COLUMN_DROP_TOL: f64 = 1e-12;

/// Square-root factors of both Gramians.
#[derive(Clone, Debug)]
pub struct GramianFactors {
    /// `P ≈ U Uᵀ`
    pub u: DMatrix<f64>,
    /// `Q ≈ L Lᵀ`
    pub l: DMatrix<f64>,
    pub exact: bool,
    pub residual_p: f64,
    pub residual_q: f64,
    /// ADI steps taken for `P` and `Q` (low-rank factors only).
    pub iterations: Option<(usize, usize)>,
}

fn dense_e(e: &Operator) -> Option<DMatrix<f64>> {
    if e.is_identity() {
        None
    } else {
        Some(e.to_dense())
    }
}

/// Right-hand side `F Fᵀ` (controllability) or `Fᵀ F` (observability).
fn rhs(f: &DMatrix<f64>, side: Side) -> DMatrix<f64> {
    match side {
        Side::Controllability => f * f.transpose(),
        Side::Observability => f.transpose() * f,
    }
}

fn symmetrize(x: &mut DMatrix<f64>) {
    let n = x.nrows();
    for j in 0..n {
        for i in 0..j {
            let v = 0.5 * (x[(i, j)] + x[(j, i)]);
            x[(i, j)] = v;
            x[(j, i)] = v;
        }
    }
}

/// Generalized sign-function iteration on `(A, E)` in factored form.
///
/// `A_{k+1} = (A_k/c + c E A_k⁻¹ E)/2` drives `A_k → −E`. The Gramian
/// iterates `X_{k+1} = (X_k/c + c (E A_k⁻¹) X_k (E A_k⁻¹)ᵀ)/2 → 2 E P Eᵀ`
/// and `Y_{k+1} = (Y_k/c + c (A_k⁻¹ E)ᵀ Y_k (A_k⁻¹ E))/2 → 2 Eᵀ Q E` are
/// carried as `X = F Fᵀ`, `Y = G Gᵀ`, so they stay positive semidefinite in
/// floating point. Scaling uses `c = (|det A_k| / |det E|)^{1/n}` until the
/// iteration settles.
fn sign_iteration(
    a: &DMatrix<f64>,
    e: Option<&DMatrix<f64>>,
    mut f: Option<DMatrix<f64>>,
    mut g: Option<DMatrix<f64>>,
) -> Result<(Option<DMatrix<f64>>, Option<DMatrix<f64>>)> {
    let n = a.nrows();
    let ln_det_e = match e {
        Some(e) => DenseLu::new(e, "E")?.ln_abs_det(),
        None => 0.0,
    };
    let mul_e = |m: &DMatrix<f64>| match e {
        Some(e) => e * m,
        None => m.clone(),
    };
    let e_mul = |m: &DMatrix<f64>| match e {
        Some(e) => m * e,
        None => m.clone(),
    };
    let mut ak = a.clone();
    let mut scale = true;
    let mut prev_err = f64::INFINITY;
    let mut polish = 0usize;
    let mut converged = false;
    for _ in 0..SIGN_MAX_ITER {
        let lu = DenseLu::new(&ak, "sign iterate")?;
        let inv = lu.inverse();
        let c = if scale {
            ((lu.ln_abs_det() - ln_det_e) / n as f64).exp()
        } else {
            1.0
        };
        let ea = mul_e(&inv);
        let next = (&ak / c + e_mul(&ea) * c) * 0.5;
        let (s_old, s_new) = ((0.5 / c).sqrt(), (0.5 * c).sqrt());
        if let Some(fk) = f.as_mut() {
            let grown = hstack(&(&*fk * s_old), &(&ea * &*fk * s_new));
            *fk = compress_eps(&grown)?;
        }
        if let Some(gk) = g.as_mut() {
            let ae = e_mul(&inv);
            let grown = hstack(&(&*gk * s_old), &(ae.transpose() * &*gk * s_new));
            *gk = compress_eps(&grown)?;
        }
        let err = (&next - &ak).norm() / next.norm();
        ak = next;
        if polish > 0 {
            polish -= 1;
            if polish == 0 {
                converged = true;
                break;
            }
            continue;
        }
        if err < 1e-2 {
            scale = false;
        }
        if err <= SIGN_TOL || (err < 1e-8 && err >= prev_err) {
            // two unscaled steps to settle the Gramian iterates
            polish = 2;
        }
        prev_err = err;
    }
    let target = match e {
        Some(e) => e.clone(),
        None => DMatrix::identity(n, n),
    };
    let dev = (&ak + &target).norm() / target.norm();
    if !converged || !dev.is_finite() || dev > 1e-6 {
        // distinguish an unstable pencil from a plain failure
        if dev.is_finite() && dev > 1e-6 {
            let sys = StateSpace::dense(e.cloned(), a.clone(), DMatrix::zeros(n, 1), DMatrix::zeros(1, n), None)?;
            let st = sys.stability()?;
            if !st.stable {
                return Err(Error::Unstable {
                    abscissa: st.abscissa,
                });
            }
        }
        return Err(Error::NoConvergence(format!(
            "sign iteration: {} steps, final deviation {dev:e}",
            SIGN_MAX_ITER
        )));
    }
    Ok((f, g))
}

fn hstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// `F → Q Σ` from the SVD `F = Q Σ Wᵀ`, dropping singular values at
/// roundoff level; `F Fᵀ` is preserved.
fn compress_eps(f: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if f.ncols() == 0 {
        return Ok(f.clone());
    }
    let d = linalg::svd(f)?;
    let s1 = d.s[0];
    let k = d.s.iter().take_while(|&&s| s > f64::EPSILON * s1).count();
    let mut out = d.u.columns(0, k).into_owned();
    for j in 0..k {
        out.column_mut(j).scale_mut(d.s[j]);
    }
    Ok(out)
}

/// `U = E⁻¹ F / √2` so that `P = U Uᵀ`.
fn unscale_controllability(f: DMatrix<f64>, e: Option<&DMatrix<f64>>) -> Result<DMatrix<f64>> {
    let half = f * std::f64::consts::FRAC_1_SQRT_2;
    match e {
        Some(e) => Ok(DenseLu::new(e, "E")?.solve(&half)),
        None => Ok(half),
    }
}

/// `L = E⁻ᵀ G / √2` so that `Q = L Lᵀ`.
fn unscale_observability(g: DMatrix<f64>, e: Option<&DMatrix<f64>>) -> Result<DMatrix<f64>> {
    let half = g * std::f64::consts::FRAC_1_SQRT_2;
    match e {
        Some(e) => Ok(DenseLu::new(e, "E")?.solve_transpose(&half)),
        None => Ok(half),
    }
}

fn outer(u: &DMatrix<f64>) -> DMatrix<f64> {
    let mut x = u * u.transpose();
    symmetrize(&mut x);
    x
}

/// Dense Lyapunov solve on a stable pencil `(E, A)`.
pub fn lyap_dense(a: &Operator, e: &Operator, f: &DMatrix<f64>, side: Side) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let ok = match side {
        Side::Controllability => f.nrows() == n,
        Side::Observability => f.ncols() == n,
    };
    if !ok {
        return Err(Error::Dimension(format!(
            "right-hand side factor is {}x{} for n = {n}",
            f.nrows(),
            f.ncols()
        )));
    }
    let ad = a.to_dense();
    let ed = dense_e(e);
    match side {
        Side::Controllability => {
            let (x, _) = sign_iteration(&ad, ed.as_ref(), Some(f.clone()), None)?;
            Ok(outer(&unscale_controllability(x.expect("controllability iterate"), ed.as_ref())?))
        }
        Side::Observability => {
            let (_, y) = sign_iteration(&ad, ed.as_ref(), None, Some(f.transpose()))?;
            Ok(outer(&unscale_observability(y.expect("observability iterate"), ed.as_ref())?))
        }
    }
}

/// Unnormalized square roots `P = U₀ U₀ᵀ`, `Q = L₀ L₀ᵀ` of both Gramians
/// from one sign iteration.
fn gramian_roots_dense(sys: &StateSpace) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let ad = sys.a().to_dense();
    let ed = dense_e(sys.e());
    let (x, y) = sign_iteration(&ad, ed.as_ref(), Some(sys.b().clone()), Some(sys.c().transpose()))?;
    let u = unscale_controllability(x.expect("controllability iterate"), ed.as_ref())?;
    let l = unscale_observability(y.expect("observability iterate"), ed.as_ref())?;
    Ok((u, l))
}

/// Both Gramians from one sign iteration.
pub fn gramians_dense(sys: &StateSpace) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (u, l) = gramian_roots_dense(sys)?;
    Ok((outer(&u), outer(&l)))
}

/// Relative Frobenius residual `‖A X Eᵀ + E X Aᵀ + F Fᵀ‖ / ‖F Fᵀ‖` (or the
/// observability form).
pub fn lyap_residual(a: &Operator, e: &Operator, x: &DMatrix<f64>, f: &DMatrix<f64>, side: Side) -> f64 {
    let g = rhs(f, side);
    let r = match side {
        Side::Controllability => {
            let axe = e.mul(&a.mul(x).transpose());
            &axe + axe.transpose() + &g
        }
        Side::Observability => {
            let axe = e.tr_mul(&a.tr_mul(x).transpose());
            &axe + axe.transpose() + &g
        }
    };
    r.norm() / g.norm()
}

/// Square-root factor `X = F Fᵀ` of a symmetric positive semidefinite
/// matrix via its eigendecomposition. Slightly negative eigenvalues are
/// clipped; anything below `−CLIP_TOL·λ_max` is an error.
pub fn psd_factor(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (vals, vecs) = linalg::sym_eig(x)?;
    let lmax = vals.iter().fold(0.0f64, |m, &v| m.max(v));
    if lmax <= 0.0 {
        return Err(Error::RankDeficient("Gramian has no positive eigenvalue".into()));
    }
    let mut cols = Vec::new();
    for (k, &v) in vals.iter().enumerate() {
        if v < -CLIP_TOL * lmax {
            return Err(Error::Decomposition(format!(
                "Gramian eigenvalue {v:e} is negative beyond roundoff (largest {lmax:e})"
            )));
        }
        if v > 0.0 {
            cols.push(k);
        }
    }
    // descending order of eigenvalue
    cols.reverse();
    let mut f = DMatrix::zeros(x.nrows(), cols.len());
    for (j, &k) in cols.iter().enumerate() {
        f.set_column(j, &(vecs.column(k) * vals[k].sqrt()));
    }
    Ok(f)
}

/// Exact factors from the dense Gramians. The eigendecomposition of
/// `P = U₀ U₀ᵀ` is taken as the SVD of the root `U₀` (eigenvectors are its
/// left singular vectors, eigenvalues the squared singular values), which
/// avoids squaring the condition number; `U` is the eigenvector basis
/// scaled by the square roots of the eigenvalues.
pub fn lyap_factor_dense(sys: &StateSpace) -> Result<GramianFactors> {
    let (u0, l0) = gramian_roots_dense(sys)?;
    let u = compress_eps(&u0)?;
    let l = compress_eps(&l0)?;
    let residual_p = lyap_residual(sys.a(), sys.e(), &outer(&u), sys.b(), Side::Controllability);
    let residual_q = lyap_residual(sys.a(), sys.e(), &outer(&l), sys.c(), Side::Observability);
    Ok(GramianFactors {
        u,
        l,
        exact: true,
        residual_p,
        residual_q,
        iterations: None,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct AdiOptions {
    /// Target relative residual `‖W Wᵀ‖_F / ‖B Bᵀ‖_F`.
    pub tol: f64,
    pub max_iter: usize,
    /// Arnoldi steps on `E⁻¹A` and on `A⁻¹E` for the shift heuristic.
    pub arnoldi_plus: usize,
    pub arnoldi_minus: usize,
    /// Number of shifts to select.
    pub num_shifts: usize,
}

impl Default for AdiOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 300,
            arnoldi_plus: 20,
            arnoldi_minus: 20,
            num_shifts: 16,
        }
    }
}

impl AdiOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// Hessenberg matrix of `k` Arnoldi steps of `op` from `v0`; shorter when
/// the Krylov space is exhausted.
fn arnoldi(
    op: &dyn Fn(&DMatrix<f64>) -> DMatrix<f64>,
    v0: &DVector<f64>,
    k: usize,
) -> DMatrix<f64> {
    let n = v0.len();
    let k = k.min(n);
    let mut v: Vec<DVector<f64>> = vec![v0 / v0.norm()];
    let mut h = DMatrix::<f64>::zeros(k + 1, k);
    let mut steps = 0;
    for j in 0..k {
        let w0 = op(&DMatrix::from_column_slice(n, 1, v[j].as_slice()));
        let mut w = DVector::from_column_slice(w0.as_slice());
        // modified Gram-Schmidt, applied twice
        for _ in 0..2 {
            for (i, vi) in v.iter().enumerate() {
                let c = vi.dot(&w);
                h[(i, j)] += c;
                w -= vi * c;
            }
        }
        steps = j + 1;
        let nw = w.norm();
        h[(j + 1, j)] = nw;
        let scale = h.columns(0, j + 1).norm();
        if !(nw > 1e-12 * scale) {
            break;
        }
        v.push(w / nw);
    }
    h.view((0, 0), (steps, steps)).into_owned()
}

fn adi_factor_magnitude(t: Complex64, shifts: &[Complex64]) -> f64 {
    shifts.iter().map(|&p| ((t - p) / (t + p)).norm()).product()
}

/// Penzl's heuristic: Ritz values of `E⁻¹A` and reciprocals of Ritz values
/// of `A⁻¹E` form a candidate set from which shifts are picked greedily to
/// keep the ADI rational function small over the whole set. Complex shifts
/// come in adjacent conjugate pairs, positive imaginary part first.
pub fn penzl_shifts(a: &Operator, e: &Operator, opts: &AdiOptions) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    let fa = a.factor("A")?;
    let fe = if e.is_identity() { None } else { Some(e.factor("E")?) };
    let v0 = DVector::from_element(n, 1.0);
    let plus = |x: &DMatrix<f64>| {
        let y = a.mul(x);
        match &fe {
            Some(f) => f.solve(&y),
            None => y,
        }
    };
    let minus = |x: &DMatrix<f64>| fa.solve(&e.mul(x));
    let hp = arnoldi(&plus, &v0, opts.arnoldi_plus);
    let hm = arnoldi(&minus, &v0, opts.arnoldi_minus);
    let mut ritz: Vec<Complex64> = linalg::eigenvalues(&hp)?;
    ritz.extend(
        linalg::eigenvalues(&hm)?
            .into_iter()
            .filter(|z| z.norm() > 0.0)
            .map(|z| 1.0 / z),
    );
    let mut cand: Vec<Complex64> = ritz
        .into_iter()
        .filter(|z| z.re < 0.0 && z.re.is_finite() && z.im.is_finite())
        .map(|z| {
            if z.im.abs() <= 1e-10 * z.norm() {
                Complex64::new(z.re, 0.0)
            } else {
                z
            }
        })
        .collect();
    if cand.is_empty() {
        return Err(Error::NoConvergence(
            "shift heuristic found no stable Ritz values".into(),
        ));
    }
    // close under conjugation
    let extra: Vec<_> = cand.iter().filter(|z| z.im != 0.0).map(|z| z.conj()).collect();
    cand.extend(extra);
    let with_conj = |p: Complex64| -> Vec<Complex64> {
        if p.im == 0.0 {
            vec![p]
        } else {
            vec![Complex64::new(p.re, p.im.abs()), Complex64::new(p.re, -p.im.abs())]
        }
    };
    let worst = |set: &[Complex64]| -> f64 {
        cand.iter().map(|&t| adi_factor_magnitude(t, set)).fold(0.0, f64::max)
    };
    let first = cand
        .iter()
        .copied()
        .min_by(|&x, &y| worst(&with_conj(x)).total_cmp(&worst(&with_conj(y))))
        .expect("candidate set is non-empty");
    let mut shifts = with_conj(first);
    while shifts.len() < opts.num_shifts.min(cand.len()) {
        let next = cand
            .iter()
            .copied()
            .max_by(|&x, &y| {
                adi_factor_magnitude(x, &shifts).total_cmp(&adi_factor_magnitude(y, &shifts))
            })
            .expect("candidate set is non-empty");
        if adi_factor_magnitude(next, &shifts) == 0.0 {
            break;
        }
        shifts.extend(with_conj(next));
    }
    Ok(shifts)
}

enum ShiftFactor {
    Real(Factor<f64>),
    Complex(Factor<Complex64>),
}

#[derive(Clone, Debug)]
pub struct AdiResult {
    pub z: DMatrix<f64>,
    /// Residual estimate `‖W Wᵀ‖_F / ‖B Bᵀ‖_F` at exit.
    pub residual: f64,
    pub iterations: usize,
}

/// Low-rank ADI for `A X Eᵀ + E X Aᵀ + B Bᵀ = 0` with real and complex
/// shifts, producing a real factor `X ≈ Z Zᵀ`. Complex shifts are handled
/// pairwise so every iterate stays real.
pub fn lradi(
    a: &Operator,
    e: &Operator,
    b: &DMatrix<f64>,
    shifts: &[Complex64],
    tol: f64,
    max_iter: usize,
) -> Result<AdiResult> {
    let n = a.nrows();
    if b.nrows() != n {
        return Err(Error::Dimension(format!("B has {} rows, expected {n}", b.nrows())));
    }
    if shifts.is_empty() || shifts.iter().any(|p| !(p.re < 0.0)) {
        return Err(Error::InvalidArgument(
            "ADI shifts must be non-empty with negative real parts".into(),
        ));
    }
    let nb = (b.transpose() * b).norm();
    if nb == 0.0 {
        return Ok(AdiResult {
            z: DMatrix::zeros(n, 0),
            residual: 0.0,
            iterations: 0,
        });
    }
    let mut factors: Vec<Option<ShiftFactor>> = (0..shifts.len()).map(|_| None).collect();
    let mut w = b.clone();
    let mut cols: Vec<DVector<f64>> = Vec::new();
    let mut max_norm = 0.0f64;
    let mut push = |c: DVector<f64>, cols: &mut Vec<DVector<f64>>| {
        let nc = c.norm();
        max_norm = max_norm.max(nc);
        if nc > COLUMN_DROP_TOL * max_norm {
            cols.push(c);
        }
    };
    let mut residual = f64::INFINITY;
    let mut i = 0usize;
    let mut iter = 0usize;
    while iter < max_iter {
        let k = i % shifts.len();
        let p = shifts[k];
        if factors[k].is_none() {
            factors[k] = Some(if p.im == 0.0 {
                ShiftFactor::Real(Factor::combination(&[(1.0, a), (p.re, e)], "A + pE")?)
            } else {
                ShiftFactor::Complex(Factor::combination(
                    &[(Complex64::new(1.0, 0.0), a), (p, e)],
                    "A + pE",
                )?)
            });
        }
        match factors[k].as_ref().expect("factor was just cached") {
            ShiftFactor::Real(f) => {
                let v = f.solve(&w);
                w -= e.mul(&v) * (2.0 * p.re);
                let g = (-2.0 * p.re).sqrt();
                for c in v.column_iter() {
                    push(c * g, &mut cols);
                }
                i += 1;
                iter += 1;
            }
            ShiftFactor::Complex(f) => {
                let v = f.solve(&linalg::to_complex(&w));
                let vr = linalg::real_part(&v);
                let vi = linalg::imag_part(&v);
                let gamma = 2.0 * (-p.re).sqrt();
                let delta = p.re / p.im;
                let t = &vr + &vi * delta;
                w += e.mul(&t) * (gamma * gamma);
                let g2 = gamma * (delta * delta + 1.0).sqrt();
                for c in t.column_iter() {
                    push(c * gamma, &mut cols);
                }
                for c in vi.column_iter() {
                    push(c * g2, &mut cols);
                }
                // the conjugate partner is consumed as well
                i += 2;
                iter += 2;
            }
        }
        residual = (w.transpose() * &w).norm() / nb;
        if !residual.is_finite() {
            return Err(Error::NoConvergence("ADI iterate became non-finite".into()));
        }
        if residual <= tol {
            break;
        }
    }
    if residual > tol {
        return Err(Error::NoConvergence(format!(
            "low-rank ADI reached {iter} steps with residual {residual:e} > {tol:e}"
        )));
    }
    let z = DMatrix::from_columns(&cols);
    Ok(AdiResult {
        z: compress(&z)?,
        residual,
        iterations: iter,
    })
}

/// Rank-revealing compression `Z → U_k S_k` keeping singular values above
/// `1e−12·s₁`; `Z Zᵀ` is unchanged up to the discarded tail.
pub fn compress(z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if z.ncols() == 0 {
        return Ok(z.clone());
    }
    let d = linalg::svd(z)?;
    let s1 = d.s[0];
    let k = d.s.iter().take_while(|&&s| s > 1e-12 * s1).count();
    let mut out = d.u.columns(0, k).into_owned();
    for j in 0..k {
        out.column_mut(j).scale_mut(d.s[j]);
    }
    Ok(out)
}

/// Explicit relative residual of a low-rank solution `X = Z Zᵀ`,
/// `‖A Z Zᵀ Eᵀ + E Z Zᵀ Aᵀ + B Bᵀ‖_F / ‖B Bᵀ‖_F`, evaluated through a thin
/// QR of `[A Z, E Z, B]` without forming n×n matrices.
pub fn lowrank_residual(a: &Operator, e: &Operator, z: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    let n = a.nrows();
    let k = z.ncols();
    let m = b.ncols();
    let mut kmat = DMatrix::zeros(n, 2 * k + m);
    kmat.columns_mut(0, k).copy_from(&a.mul(z));
    kmat.columns_mut(k, k).copy_from(&e.mul(z));
    kmat.columns_mut(2 * k, m).copy_from(b);
    let r = linalg::thin_r(&kmat);
    // middle matrix [[0, I, 0], [I, 0, 0], [0, 0, I]]
    let w = 2 * k + m;
    let mut mid = DMatrix::zeros(w, w);
    for i in 0..k {
        mid[(i, k + i)] = 1.0;
        mid[(k + i, i)] = 1.0;
    }
    for i in 0..m {
        mid[(2 * k + i, 2 * k + i)] = 1.0;
    }
    let res = &r * mid * r.transpose();
    Ok(res.norm() / (b.transpose() * b).norm())
}

/// Low-rank factors from ADI; the observability factor comes from the dual
/// problem `(Aᵀ, Eᵀ, Cᵀ)` with the same shifts.
pub fn lyap_factor_lowrank(sys: &StateSpace, opts: &AdiOptions) -> Result<GramianFactors> {
    if !(opts.tol > 0.0 && opts.tol < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "ADI tolerance must lie in (0, 1), got {}",
            opts.tol
        )));
    }
    let shifts = penzl_shifts(sys.a(), sys.e(), opts)?;
    log::debug!("ADI shifts: {shifts:?}");
    let at = sys.a().transpose();
    let et = sys.e().transpose();
    let ct = sys.c().transpose();
    let pc = lradi(sys.a(), sys.e(), sys.b(), &shifts, opts.tol, opts.max_iter)?;
    let po = lradi(&at, &et, &ct, &shifts, opts.tol, opts.max_iter)?;
    let residual_p = lowrank_residual(sys.a(), sys.e(), &pc.z, sys.b())?;
    let residual_q = lowrank_residual(&at, &et, &po.z, &ct)?;
    Ok(GramianFactors {
        u: pc.z,
        l: po.z,
        exact: false,
        residual_p,
        residual_q,
        iterations: Some((pc.iterations, po.iterations)),
    })
}

/// SVD of `Lᵀ E U`, the square-root balancing data.
#[derive(Clone, Debug)]
pub struct HankelData {
    /// Singular values of `Lᵀ E U`, descending; the Hankel singular values
    /// when the factors are exact.
    pub sigma: Vec<f64>,
    z: DMatrix<f64>,
    y: DMatrix<f64>,
    u: DMatrix<f64>,
    l: DMatrix<f64>,
}

/// Bases of a truncation to order r.
#[derive(Clone, Debug)]
pub struct ProjectionData {
    pub z1: DMatrix<f64>,
    pub s1: Vec<f64>,
    pub y1: DMatrix<f64>,
    /// `W = L Z₁ S₁^{-1/2}`
    pub w: DMatrix<f64>,
    /// `V = U Y₁ S₁^{-1/2}`
    pub v: DMatrix<f64>,
    pub sigma: Vec<f64>,
}

/// Singular values at or below this fraction of the largest are treated as
/// zero when choosing a truncation order.
pub const RANK_FLOOR: f64 = 1e-12;

impl HankelData {
    pub fn new(factors: &GramianFactors, e: &Operator) -> Result<Self> {
        let eu = e.mul(&factors.u);
        let m = factors.l.transpose() * eu;
        let d = linalg::svd(&m)?;
        Ok(Self {
            sigma: d.s,
            z: d.u,
            y: d.v,
            u: factors.u.clone(),
            l: factors.l.clone(),
        })
    }

    /// Number of singular values above the rank floor.
    pub fn numerical_rank(&self) -> usize {
        let s1 = self.sigma.first().copied().unwrap_or(0.0);
        self.sigma.iter().take_while(|&&s| s > RANK_FLOOR * s1).count()
    }

    pub fn project(&self, r: usize) -> Result<ProjectionData> {
        if r == 0 {
            return Err(Error::InvalidArgument("reduced order must be at least 1".into()));
        }
        let rank = self.numerical_rank();
        if r > rank {
            return Err(Error::RankDeficient(format!(
                "requested order {r} exceeds the numerical rank {rank} of L^T E U"
            )));
        }
        let z1 = self.z.columns(0, r).into_owned();
        let y1 = self.y.columns(0, r).into_owned();
        let s1: Vec<f64> = self.sigma[..r].to_vec();
        let isq = DMatrix::from_diagonal(&DVector::from_iterator(r, s1.iter().map(|s| 1.0 / s.sqrt())));
        let w = &self.l * &z1 * &isq;
        let v = &self.u * &y1 * &isq;
        Ok(ProjectionData {
            z1,
            s1,
            y1,
            w,
            v,
            sigma: self.sigma.clone(),
        })
    }
}
