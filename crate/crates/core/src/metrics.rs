//! Frequency responses, grid-based H∞ estimates and error bounds.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, Scalar};
use crate::rom::ReducedModel;
use crate::system::TransferFunction;

/// Default number of grid points for H∞ estimates.
pub const DEFAULT_GRID: usize = 400;

/// `count` points spaced geometrically from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "logarithmic grid needs 0 < lo < hi, got [{lo}, {hi}]"
        )));
    }
    if count < 2 {
        return Err(Error::InvalidArgument(format!(
            "logarithmic grid needs at least 2 points, got {count}"
        )));
    }
    let ratio = hi / lo;
    let mut g: Vec<f64> = (0..count)
        .map(|k| lo * ratio.powf(k as f64 / (count - 1) as f64))
        .collect();
    g[0] = lo;
    g[count - 1] = hi;
    Ok(g)
}

fn sigma_max(h: &CMatrix) -> Result<f64> {
    if h.nrows() == 1 && h.ncols() == 1 {
        return Ok(h[(0, 0)].norm());
    }
    Ok(linalg::singular_values(h)?.first().copied().unwrap_or(0.0))
}

/// Largest singular value of `H(iω)` for each node.
pub fn freq_response(tf: &dyn TransferFunction, grid: &[f64]) -> Result<Vec<f64>> {
    let pts: Vec<Complex64> = grid.iter().map(|&w| Complex64::new(0.0, w)).collect();
    tf.eval_many(&pts)?.iter().map(sigma_max).collect()
}

/// All `min(m, p)` singular values of `H(iω)` for each node, descending.
pub fn freq_response_all(tf: &dyn TransferFunction, grid: &[f64]) -> Result<Vec<Vec<f64>>> {
    let pts: Vec<Complex64> = grid.iter().map(|&w| Complex64::new(0.0, w)).collect();
    tf.eval_many(&pts)?.iter().map(linalg::singular_values).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HinfEstimate {
    pub value: f64,
    pub omega: f64,
}

/// Grid estimate of the H∞ norm over `[lo, hi]`. With `refine`, a
/// golden-section search in `log ω` around the grid maximum sharpens the
/// peak. The result is a lower bound of the true norm.
pub fn hinf_grid_at(tf: &dyn TransferFunction, lo: f64, hi: f64, count: usize, refine: bool) -> Result<HinfEstimate> {
    let grid = log_grid(lo, hi, count)?;
    let vals = freq_response(tf, &grid)?;
    let (k, &v) = vals
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .expect("grid is non-empty");
    let mut best = HinfEstimate {
        value: v,
        omega: grid[k],
    };
    if refine {
        let f = |x: f64| -> Result<f64> {
            let h = tf.eval(Complex64::new(0.0, x.exp()))?;
            sigma_max(&h)
        };
        let mut a = grid[k.saturating_sub(1)].ln();
        let mut b = grid[(k + 1).min(count - 1)].ln();
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = b - phi * (b - a);
        let mut x2 = a + phi * (b - a);
        let mut f1 = f(x1)?;
        let mut f2 = f(x2)?;
        for _ in 0..60 {
            if (b - a).abs() < 1e-10 {
                break;
            }
            if f1 >= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - phi * (b - a);
                f1 = f(x1)?;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + phi * (b - a);
                f2 = f(x2)?;
            }
        }
        for (x, fx) in [(x1, f1), (x2, f2)] {
            if fx > best.value {
                best = HinfEstimate {
                    value: fx,
                    omega: x.exp(),
                };
            }
        }
    }
    Ok(best)
}

pub fn hinf_grid(tf: &dyn TransferFunction, lo: f64, hi: f64, count: usize, refine: bool) -> Result<f64> {
    Ok(hinf_grid_at(tf, lo, hi, count, refine)?.value)
}

/// Largest deviation `max_ω σ_max(H₁(iω) − H₂(iω))` over explicit nodes.
pub fn max_deviation(a: &dyn TransferFunction, b: &dyn TransferFunction, grid: &[f64]) -> Result<f64> {
    let d = crate::system::Difference::new(a, b)?;
    Ok(freq_response(&d, grid)?.into_iter().fold(0.0, f64::max))
}

/// A priori bound `2 Σ_{i>r} σ_i` shared by BT and SPA.
pub fn bt_bound(sigma: &[f64], r: usize) -> Result<f64> {
    if r >= sigma.len() {
        return Err(Error::InvalidArgument(format!(
            "bound needs r < {}, got r = {r}",
            sigma.len()
        )));
    }
    Ok(2.0 * sigma[r..].iter().sum::<f64>())
}

/// Eigenvalues of `A_r`, sorted by real part.
pub fn poles<T: Scalar>(rom: &ReducedModel<T>) -> Result<Vec<Complex64>> {
    rom.poles()
}

/// Whether a pole list is closed under conjugation to within `tol`
/// (relative to the largest pole magnitude).
pub fn conjugate_closed(poles: &[Complex64], tol: f64) -> bool {
    let scale = poles.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut used = vec![false; poles.len()];
    for (i, z) in poles.iter().enumerate() {
        if used[i] {
            continue;
        }
        if z.im.abs() <= tol * scale {
            used[i] = true;
            continue;
        }
        let partner = (0..poles.len())
            .filter(|&j| j != i && !used[j])
            .min_by(|&a, &b| (poles[a] - z.conj()).norm().total_cmp(&(poles[b] - z.conj()).norm()));
        match partner {
            Some(j) if (poles[j] - z.conj()).norm() <= tol * scale => {
                used[i] = true;
                used[j] = true;
            }
            _ => return false,
        }
    }
    true
}
