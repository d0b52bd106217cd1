//! Intrusive reductions: square-root balanced truncation, singular
//! perturbation approximation through the reciprocal system, and the
//! classical SPA formulas on a balanced realization.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gramian::{self, AdiOptions, GramianFactors, HankelData, ProjectionData};
use crate::linalg::{self, DenseLu};
use crate::rom::{Method, ReducedModel};
use crate::system::{Realization, StateSpace};

/// Relative gap `(σ_r − σ_{r+1}) / σ_r` below which two Hankel singular
/// values are considered tied.
pub const TIE_GAP: f64 = 1e-10;
/// Condition number of the intermediate `Ã_r` above which a warning is
/// emitted.
pub const COND_WARN: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Order {
    Fixed(usize),
    /// Smallest order whose truncated tail bound is within this fraction of
    /// the total.
    Tolerance(f64),
}

#[derive(Clone, Copy, Debug)]
pub enum FactorMode {
    Dense,
    LowRank(AdiOptions),
}

pub fn gramian_factors(sys: &StateSpace, mode: &FactorMode) -> Result<GramianFactors> {
    match mode {
        FactorMode::Dense => {
            sys.require_stable()?;
            gramian::lyap_factor_dense(sys)
        }
        FactorMode::LowRank(opts) => gramian::lyap_factor_lowrank(sys, opts),
    }
}

/// Smallest `r ≥ 1` with `2 Σ_{i>r} σ_i ≤ tol · 2 Σ_i σ_i`.
pub fn order_from_tolerance(sigma: &[f64], tol: f64) -> Result<usize> {
    if sigma.is_empty() {
        return Err(Error::InvalidArgument("empty singular value list".into()));
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be non-negative, got {tol}")));
    }
    let total: f64 = sigma.iter().sum();
    for r in 1..=sigma.len() {
        // summed directly rather than by running subtraction
        let tail: f64 = sigma[r..].iter().sum();
        if 2.0 * tail <= tol * 2.0 * total {
            return Ok(r);
        }
    }
    Ok(sigma.len())
}

fn resolve_order(order: Order, hankel: &HankelData) -> Result<usize> {
    match order {
        Order::Fixed(0) => Err(Error::InvalidArgument("reduced order must be at least 1".into())),
        Order::Fixed(r) => Ok(r),
        Order::Tolerance(t) => {
            let rank = hankel.numerical_rank();
            order_from_tolerance(&hankel.sigma[..rank.max(1)], t)
        }
    }
}

/// Relative gap at the truncation point, if there is a next value.
fn tie_gap(sigma: &[f64], r: usize) -> Option<f64> {
    if r < sigma.len() && sigma[r - 1] > 0.0 {
        Some((sigma[r - 1] - sigma[r]) / sigma[r - 1])
    } else {
        None
    }
}

/// Balanced truncation from precomputed factors.
pub fn bt_from_factors(sys: &StateSpace, factors: &GramianFactors, order: Order) -> Result<ReducedModel> {
    let hankel = HankelData::new(factors, sys.e())?;
    let r = resolve_order(order, &hankel)?;
    let proj = hankel.project(r)?;
    let mut notes = Vec::new();
    if let Some(gap) = tie_gap(&hankel.sigma, r) {
        if gap < TIE_GAP {
            log::warn!("Hankel singular values tie at r = {r} (relative gap {gap:e}); truncating anyway");
            notes.push(format!("sigma tie at r = {r}, relative gap {gap:e}"));
        }
    }
    let ar = proj.w.transpose() * sys.a().mul(&proj.v);
    let br = proj.w.transpose() * sys.b();
    let cr = sys.c() * &proj.v;
    let rom = Realization::new(ar, br, cr, sys.d().clone())?;
    Ok(ReducedModel {
        sys: rom,
        method: Method::Bt,
        hankel_used: Some(proj.s1),
        notes,
    })
}

/// Square-root (or low-rank) balanced truncation.
pub fn bt(sys: &StateSpace, order: Order, mode: &FactorMode) -> Result<ReducedModel> {
    let f = gramian_factors(sys, mode)?;
    bt_from_factors(sys, &f, order)
}

fn check_tie(sigma: &[f64], r: usize) -> Result<()> {
    match tie_gap(sigma, r) {
        Some(gap) if gap < TIE_GAP => Err(Error::SigmaTie { r, gap }),
        _ => Ok(()),
    }
}

/// Inverts the small intermediate matrix, warning when it is badly
/// conditioned.
fn invert_intermediate(at: &DMatrix<f64>, notes: &mut Vec<String>) -> Result<DMatrix<f64>> {
    let lu = DenseLu::new(at, "intermediate reduced A")?;
    let s = linalg::singular_values(at)?;
    let cond = s.first().copied().unwrap_or(0.0) / s.last().copied().unwrap_or(0.0);
    if !(cond <= COND_WARN) {
        log::warn!("intermediate reduced A has condition number {cond:e}");
        notes.push(format!("intermediate reduced A condition number {cond:e}"));
    }
    Ok(lu.inverse())
}

/// SPA through the reciprocal system, from precomputed factors.
///
/// The bases come from the same square-root data as BT. The intermediate
/// reduced model of the reciprocal system is assembled from solves against
/// `A` (`Ã_V = A⁻¹ E V`, `B̃_A = A⁻¹ B`) and then transformed back.
pub fn spa_from_factors(sys: &StateSpace, factors: &GramianFactors, order: Order) -> Result<ReducedModel> {
    let hankel = HankelData::new(factors, sys.e())?;
    let r = resolve_order(order, &hankel)?;
    let proj = hankel.project(r)?;
    check_tie(&hankel.sigma, r)?;
    let fa = sys.a().factor("A")?;
    let av = fa.solve(&sys.e().mul(&proj.v));
    let ba = fa.solve(sys.b());
    let we = sys.e().tr_mul(&proj.w).transpose();
    let at = &we * &av;
    let bt = &we * &ba;
    let ct = -(sys.c() * &av);
    let dt = sys.d() - sys.c() * &ba;
    let mut notes = Vec::new();
    let ar = invert_intermediate(&at, &mut notes)?;
    let br = &ar * &bt;
    let cr = -(&ct * &ar);
    let dr = &dt + &cr * &bt;
    Ok(ReducedModel {
        sys: Realization::new(ar, br, cr, dr)?,
        method: Method::Spa,
        hankel_used: Some(proj.s1),
        notes,
    })
}

pub fn spa(sys: &StateSpace, order: Order, mode: &FactorMode) -> Result<ReducedModel> {
    let f = gramian_factors(sys, mode)?;
    spa_from_factors(sys, &f, order)
}

/// Completes the truncation bases to full transformation matrices
/// `[W₁ W₂]`, `[V₁ V₂]` with `[W₁ W₂]ᵀ E [V₁ V₂] = I`. `V₂` spans the null
/// space of `W₁ᵀE` and `W₂` that of `(E V₁)ᵀ`.
fn complete_bases(sys: &StateSpace, proj: &ProjectionData) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = sys.n();
    let r = proj.w.ncols();
    let ew = sys.e().tr_mul(&proj.w);
    let ev = sys.e().mul(&proj.v);
    let v2 = linalg::orthogonal_complement(&ew)?;
    let w2 = linalg::orthogonal_complement(&ev)?;
    let k = n - r;
    let mut wf = DMatrix::zeros(n, n);
    let mut vf = DMatrix::zeros(n, n);
    wf.columns_mut(0, r).copy_from(&proj.w);
    vf.columns_mut(0, r).copy_from(&proj.v);
    if k > 0 {
        let m = w2.transpose() * sys.e().mul(&v2);
        let w2n = w2 * DenseLu::new(&m.transpose(), "complement coupling")?.inverse();
        wf.columns_mut(r, k).copy_from(&w2n);
        vf.columns_mut(r, k).copy_from(&v2);
    }
    Ok((wf, vf))
}

/// SPA by the classical formulas on a balanced partition, from dense
/// factors. The balancing transform is built from the square-root data and
/// completed to full rank; the result does not depend on the choice of
/// complement coordinates.
pub fn spa_direct_from_factors(sys: &StateSpace, factors: &GramianFactors, r: usize) -> Result<ReducedModel> {
    let hankel = HankelData::new(factors, sys.e())?;
    let proj = hankel.project(r)?;
    check_tie(&hankel.sigma, r)?;
    let n = sys.n();
    let (wf, vf) = complete_bases(sys, &proj)?;
    let abar = wf.transpose() * sys.a().mul(&vf);
    let bbar = wf.transpose() * sys.b();
    let cbar = sys.c() * &vf;
    let a11 = abar.view((0, 0), (r, r)).into_owned();
    let (ar, br, cr, dr) = if r == n {
        (a11, bbar.clone(), cbar.clone(), sys.d().clone())
    } else {
        let k = n - r;
        let a12 = abar.view((0, r), (r, k));
        let a21 = abar.view((r, 0), (k, r)).into_owned();
        let a22 = abar.view((r, r), (k, k)).into_owned();
        let b1 = bbar.rows(0, r);
        let b2 = bbar.rows(r, k).into_owned();
        let c1 = cbar.columns(0, r);
        let c2 = cbar.columns(r, k);
        let lu = DenseLu::new(&a22, "A22")?;
        let x21 = lu.solve(&a21);
        let xb2 = lu.solve(&b2);
        (
            &a11 - a12 * &x21,
            b1 - a12 * &xb2,
            c1 - c2 * &x21,
            sys.d() - c2 * &xb2,
        )
    };
    Ok(ReducedModel {
        sys: Realization::new(ar, br, cr, dr)?,
        method: Method::SpaDirect,
        hankel_used: Some(proj.s1),
        notes: Vec::new(),
    })
}

pub fn spa_direct(sys: &StateSpace, r: usize) -> Result<ReducedModel> {
    let f = gramian_factors(sys, &FactorMode::Dense)?;
    spa_direct_from_factors(sys, &f, r)
}
