//! Data-driven balanced truncation and SPA from transfer-function samples.
//!
//! The Gramian factors are replaced by quadrature: columns
//! `ρ_k (iω_k I − A)⁻¹ B` for the controllability side and rows
//! `φ_j C (iξ_j I − A)⁻¹` for the observability side. Their products are
//! available from samples alone, which gives the data matrices `N ≈ L̃ᴴŨ`,
//! `M ≈ L̃ᴴAŨ`, `T ≈ L̃ᴴB` and `Gᵀ ≈ CŨ`. The SPA flavor builds the same
//! products for the reciprocal system from zero-shifted samples.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, DenseLu, Scalar};
use crate::metrics;
use crate::reduce::{self, Order, COND_WARN};
use crate::rom::{Method, ReducedModel};
use crate::samples::{self, SampleKind, SampleSet};
use crate::system::{Realization, StateSpace};

/// Two nodes closer than this (relative) are treated as coincident.
pub const COINCIDENT_TOL: f64 = 1e-12;
/// Singular values of `N` at or below this fraction of the largest count as
/// zero.
pub const RANK_FLOOR: f64 = 1e-12;
/// Relative tolerance when matching rule nodes to sample nodes.
const MATCH_TOL: f64 = 1e-12;

/// Nodes and square-root weights for both sides. With `positive_only`, each
/// node `ω` stands for the pair `±ω` and the weight covers both.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub nodes_c: Vec<f64>,
    /// `ρ_k`, square roots of the controllability weights.
    pub weights_c: Vec<f64>,
    pub nodes_o: Vec<f64>,
    /// `φ_j`, square roots of the observability weights.
    pub weights_o: Vec<f64>,
    pub positive_only: bool,
}

fn check_side(nodes: &[f64], weights: &[f64], side: &str) -> Result<()> {
    if nodes.is_empty() {
        return Err(Error::InvalidArgument(format!("{side} side has no nodes")));
    }
    if nodes.len() != weights.len() {
        return Err(Error::Dimension(format!(
            "{side} side has {} nodes but {} weights",
            nodes.len(),
            weights.len()
        )));
    }
    if nodes.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidArgument(format!("{side} nodes must be positive and finite")));
    }
    if nodes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(format!("{side} nodes must be strictly increasing")));
    }
    if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidArgument(format!("{side} weights must be positive and finite")));
    }
    Ok(())
}

impl QuadratureRule {
    pub fn new(
        nodes_c: Vec<f64>,
        weights_c: Vec<f64>,
        nodes_o: Vec<f64>,
        weights_o: Vec<f64>,
        positive_only: bool,
    ) -> Result<Self> {
        check_side(&nodes_c, &weights_c, "controllability")?;
        check_side(&nodes_o, &weights_o, "observability")?;
        Ok(Self {
            nodes_c,
            weights_c,
            nodes_o,
            weights_o,
            positive_only,
        })
    }

    /// Trapezoid weights on each side.
    pub fn trapezoid(nodes_c: Vec<f64>, nodes_o: Vec<f64>, positive_only: bool) -> Result<Self> {
        let rho = trapezoid_weights(&nodes_c, positive_only)?.iter().map(|w| w.sqrt()).collect();
        let phi = trapezoid_weights(&nodes_o, positive_only)?.iter().map(|w| w.sqrt()).collect();
        Self::new(nodes_c, rho, nodes_o, phi, positive_only)
    }

    /// Splits one increasing node list alternately: even positions go to
    /// the controllability side, odd positions to the observability side.
    pub fn interleaved(nodes: &[f64], positive_only: bool) -> Result<Self> {
        let c: Vec<f64> = nodes.iter().step_by(2).copied().collect();
        let o: Vec<f64> = nodes.iter().skip(1).step_by(2).copied().collect();
        Self::trapezoid(c, o, positive_only)
    }

    fn expand(nodes: &[f64], weights: &[f64], positive_only: bool) -> Vec<Node> {
        let mut out = Vec::with_capacity(nodes.len() * 2);
        for (k, (&w, &rho)) in nodes.iter().zip(weights).enumerate() {
            if positive_only {
                let half = rho * FRAC_1_SQRT_2;
                out.push(Node { omega: w, weight: half, conj: false, index: k });
                out.push(Node { omega: -w, weight: half, conj: true, index: k });
            } else {
                out.push(Node { omega: w, weight: rho, conj: false, index: k });
            }
        }
        out
    }
}

/// `count` geometrically spaced nodes in `[lo, hi]`.
pub fn log_nodes(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    metrics::log_grid(lo, hi, count)
}

/// Composite trapezoid weights `w_k = (ω_{k+1} − ω_{k−1}) / (4π)` (one-sided
/// at the ends), doubled when only positive frequencies are sampled.
pub fn trapezoid_weights(nodes: &[f64], positive_only: bool) -> Result<Vec<f64>> {
    if nodes.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "trapezoid rule needs at least 2 nodes, got {}",
            nodes.len()
        )));
    }
    if nodes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("trapezoid nodes must be strictly increasing".into()));
    }
    let n = nodes.len();
    let scale = if positive_only { 2.0 } else { 1.0 } / (2.0 * PI);
    Ok((0..n)
        .map(|k| {
            let lo = nodes[k.saturating_sub(1)];
            let hi = nodes[(k + 1).min(n - 1)];
            0.5 * (hi - lo) * scale
        })
        .collect())
}

/// One signed quadrature node with its square-root weight. `index` points
/// into the positive node list of its side.
#[derive(Clone, Copy, Debug)]
struct Node {
    omega: f64,
    weight: f64,
    conj: bool,
    index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flavor {
    /// From strictly proper samples `H − D`.
    Bt,
    /// From zero-shifted samples `H − H(0)`.
    Spa,
}

/// Quadrature data matrices. Rows are indexed by observability nodes in
/// blocks of `p`, columns by controllability nodes in blocks of `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadData<T: Scalar = Complex64> {
    pub n: DMatrix<T>,
    pub m: DMatrix<T>,
    pub t: DMatrix<T>,
    pub gt: DMatrix<T>,
    pub flavor: Flavor,
    /// `D` for the BT flavor, `H(0)` for the SPA flavor.
    pub feedthrough: DMatrix<f64>,
    /// Whether nodes come in `(ω, −ω)` pairs, which realification needs.
    pub paired: bool,
}

impl<T: Scalar> QuadData<T> {
    pub fn inputs(&self) -> usize {
        self.feedthrough.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.feedthrough.nrows()
    }
}

fn lookup<'a>(set: &'a SampleSet, node: f64, what: &str) -> Result<&'a CMatrix> {
    set.find(node, MATCH_TOL)
        .map(|k| &set.values[k])
        .ok_or_else(|| Error::MissingData(format!("no {what} sample at node {node}")))
}

/// Sample values at the expanded nodes; negative nodes take conjugates.
fn gather(set: &SampleSet, positives: &[f64], nodes: &[Node], what: &str) -> Result<Vec<CMatrix>> {
    nodes
        .iter()
        .map(|nd| {
            let v = lookup(set, positives[nd.index], what)?;
            Ok(if nd.conj { v.map(|z| z.conj()) } else { v.clone() })
        })
        .collect()
}

fn check_set(set: &SampleSet, kind: SampleKind, shape: (usize, usize), what: &str) -> Result<()> {
    if set.kind != kind {
        return Err(Error::InvalidArgument(format!(
            "{what} samples must be {kind}, got {}",
            set.kind
        )));
    }
    if (set.outputs(), set.inputs()) != shape {
        return Err(Error::Dimension(format!(
            "{what} samples are {}x{}, expected {}x{}",
            set.outputs(),
            set.inputs(),
            shape.0,
            shape.1
        )));
    }
    Ok(())
}

fn coincident(a: f64, b: f64) -> bool {
    (a - b).abs() <= COINCIDENT_TOL * a.abs().max(b.abs())
}

fn real_matrix(h: &CMatrix, what: &str) -> Result<DMatrix<f64>> {
    let scale = 1.0 + linalg::max_abs(h);
    let im = linalg::max_abs(&linalg::imag_part(h));
    if im > 1e-8 * scale {
        return Err(Error::InvalidArgument(format!(
            "{what} has imaginary part {im:e}; a real system has a real {what}"
        )));
    }
    Ok(linalg::real_part(h))
}

struct Sides {
    obs: Vec<Node>,
    ctrl: Vec<Node>,
    ho: Vec<CMatrix>,
    hc: Vec<CMatrix>,
}

fn sides(set_c: &SampleSet, set_o: &SampleSet, rule: &QuadratureRule) -> Result<Sides> {
    let obs = QuadratureRule::expand(&rule.nodes_o, &rule.weights_o, rule.positive_only);
    let ctrl = QuadratureRule::expand(&rule.nodes_c, &rule.weights_c, rule.positive_only);
    let ho = gather(set_o, &rule.nodes_o, &obs, "observability")?;
    let hc = gather(set_c, &rule.nodes_c, &ctrl, "controllability")?;
    Ok(Sides { obs, ctrl, ho, hc })
}

fn place(dst: &mut CMatrix, i: usize, j: usize, blk: &CMatrix) {
    dst.view_mut((i, j), blk.shape()).copy_from(blk);
}

/// Data matrices of the BT flavor from strictly proper samples.
///
/// `N_jk = −φ_j ρ_k (H(iξ_j) − H(iω_k)) / (iξ_j − iω_k)`,
/// `M_jk = −φ_j ρ_k (iξ_j H(iξ_j) − iω_k H(iω_k)) / (iξ_j − iω_k)`,
/// `T_j = φ_j H(iξ_j)`, `Gᵀ_k = ρ_k H(iω_k)`.
pub fn quadbt_data(set_c: &SampleSet, set_o: &SampleSet, rule: &QuadratureRule) -> Result<QuadData> {
    let d = set_c
        .d
        .clone()
        .ok_or_else(|| Error::MissingData("strictly proper samples carry no feedthrough".into()))?;
    let shape = d.shape();
    check_set(set_c, SampleKind::StrictlyProper, shape, "controllability")?;
    check_set(set_o, SampleKind::StrictlyProper, shape, "observability")?;
    let s = sides(set_c, set_o, rule)?;
    let (p, m) = shape;
    let (jn, kn) = (s.obs.len(), s.ctrl.len());
    let mut n = CMatrix::zeros(jn * p, kn * m);
    let mut mm = CMatrix::zeros(jn * p, kn * m);
    let mut t = CMatrix::zeros(jn * p, m);
    let mut gt = CMatrix::zeros(p, kn * m);
    for (j, (o, hx)) in s.obs.iter().zip(&s.ho).enumerate() {
        let ix = Complex64::new(0.0, o.omega);
        place(&mut t, j * p, 0, &(hx * Complex64::from(o.weight)));
        for (k, (c, hw)) in s.ctrl.iter().zip(&s.hc).enumerate() {
            if coincident(o.omega, c.omega) {
                return Err(Error::InvalidArgument(format!(
                    "coincident controllability and observability node {}; the BT flavor needs disjoint nodes",
                    o.omega
                )));
            }
            let iw = Complex64::new(0.0, c.omega);
            let f = Complex64::from(-o.weight * c.weight) / (ix - iw);
            place(&mut n, j * p, k * m, &((hx - hw) * f));
            place(&mut mm, j * p, k * m, &((hx * ix - hw * iw) * f));
        }
    }
    for (k, (c, hw)) in s.ctrl.iter().zip(&s.hc).enumerate() {
        place(&mut gt, 0, k * m, &(hw * Complex64::from(c.weight)));
    }
    Ok(QuadData {
        n,
        m: mm,
        t,
        gt,
        flavor: Flavor::Bt,
        feedthrough: d,
        paired: rule.positive_only,
    })
}

/// Data matrices of the SPA flavor from zero-shifted samples `H₀ = H − H(0)`.
///
/// `N` has the BT form in `H₀`; `M` uses `(iω)⁻¹ H₀(iω)` in place of
/// `iω H(iω)`. `T_j = (φ_j/ξ_j) H₀(iξ_j)` and `Gᵀ_k = (ρ_k/ω_k) H₀(iω_k)`.
/// Coincident node pairs need derivative samples there.
pub fn quadspa_data(
    set_c: &SampleSet,
    set_o: &SampleSet,
    rule: &QuadratureRule,
    derivative: Option<&SampleSet>,
) -> Result<QuadData> {
    let h0 = set_c
        .h0
        .as_ref()
        .ok_or_else(|| Error::MissingData("zero-shifted samples carry no H(0)".into()))?;
    let h0 = real_matrix(h0, "H(0)")?;
    let shape = h0.shape();
    check_set(set_c, SampleKind::ZeroShifted, shape, "controllability")?;
    check_set(set_o, SampleKind::ZeroShifted, shape, "observability")?;
    if let Some(ds) = derivative {
        check_set(ds, SampleKind::Derivative, shape, "derivative")?;
    }
    let s = sides(set_c, set_o, rule)?;
    let (p, m) = shape;
    let (jn, kn) = (s.obs.len(), s.ctrl.len());
    let mut n = CMatrix::zeros(jn * p, kn * m);
    let mut mm = CMatrix::zeros(jn * p, kn * m);
    let mut t = CMatrix::zeros(jn * p, m);
    let mut gt = CMatrix::zeros(p, kn * m);
    for (j, (o, hx)) in s.obs.iter().zip(&s.ho).enumerate() {
        let ix = Complex64::new(0.0, o.omega);
        place(&mut t, j * p, 0, &(hx * Complex64::from(o.weight / o.omega)));
        for (k, (c, hw)) in s.ctrl.iter().zip(&s.hc).enumerate() {
            let w = Complex64::from(-o.weight * c.weight);
            if coincident(o.omega, c.omega) {
                let ds = derivative.ok_or_else(|| {
                    Error::MissingData(format!("derivative sample needed at coincident node {}", o.omega))
                })?;
                let dv = lookup(ds, rule.nodes_o[o.index], "derivative")?;
                let dv = if o.conj { dv.map(|z| z.conj()) } else { dv.clone() };
                place(&mut n, j * p, k * m, &(&dv * w));
                let blk = &dv / ix - hx / (ix * ix);
                place(&mut mm, j * p, k * m, &(blk * w));
            } else {
                let iw = Complex64::new(0.0, c.omega);
                let f = w / (ix - iw);
                place(&mut n, j * p, k * m, &((hx - hw) * f));
                place(&mut mm, j * p, k * m, &((hx / ix - hw / iw) * f));
            }
        }
    }
    for (k, (c, hw)) in s.ctrl.iter().zip(&s.hc).enumerate() {
        place(&mut gt, 0, k * m, &(hw * Complex64::from(c.weight / c.omega)));
    }
    Ok(QuadData {
        n,
        m: mm,
        t,
        gt,
        flavor: Flavor::Spa,
        feedthrough: h0,
        paired: rule.positive_only,
    })
}

/// Unitary block transform mapping a conjugate pair `(x, x̄)` to
/// `√2 (Re x, Im x)`. With `flip`, the second member is `−x̄`.
fn pair_transform(pairs: usize, q: usize, flip: bool) -> CMatrix {
    let mut j = CMatrix::zeros(2 * pairs * q, 2 * pairs * q);
    let h = FRAC_1_SQRT_2;
    let s = if flip { -1.0 } else { 1.0 };
    for k in 0..pairs {
        let o = 2 * k * q;
        for i in 0..q {
            j[(o + i, o + i)] = Complex64::new(h, 0.0);
            j[(o + i, o + q + i)] = Complex64::new(0.0, -h);
            j[(o + q + i, o + i)] = Complex64::new(s * h, 0.0);
            j[(o + q + i, o + q + i)] = Complex64::new(0.0, s * h);
        }
    }
    j
}

/// Applies the pair transforms without discarding anything: for conjugate
/// symmetric samples the result is real up to roundoff.
pub fn pair_transformed(data: &QuadData<Complex64>) -> Result<QuadData<Complex64>> {
    if !data.paired {
        return Err(Error::InvalidArgument(
            "realification needs a rule with positive nodes only (conjugate pairs)".into(),
        ));
    }
    let (p, m) = (data.outputs(), data.inputs());
    let flip = data.flavor == Flavor::Spa;
    let jo = pair_transform(data.n.nrows() / (2 * p), p, flip);
    let jc = pair_transform(data.n.ncols() / (2 * m), m, flip);
    let joh = jo.adjoint();
    Ok(QuadData {
        n: &joh * &data.n * &jc,
        m: &joh * &data.m * &jc,
        t: &joh * &data.t,
        gt: &data.gt * &jc,
        flavor: data.flavor,
        feedthrough: data.feedthrough.clone(),
        paired: true,
    })
}

/// Largest imaginary magnitude relative to the largest entry, per matrix.
pub fn imag_residue(data: &QuadData<Complex64>) -> f64 {
    [&data.n, &data.m, &data.t, &data.gt]
        .iter()
        .map(|x| linalg::max_abs(&linalg::imag_part(x)) / linalg::max_abs(x).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// Real data matrices from conjugate-paired complex ones. The transform is
/// unitary on each side, so the reduced model is unchanged up to a state
/// transformation but now has real matrices.
pub fn realify(data: &QuadData<Complex64>) -> Result<QuadData<f64>> {
    let x = pair_transformed(data)?;
    let res = imag_residue(&x);
    if res > 1e-8 {
        return Err(Error::InvalidArgument(format!(
            "realified data keep a relative imaginary part {res:e}; samples are not conjugate symmetric"
        )));
    }
    log::debug!("realified data: relative imaginary residue {res:e}");
    Ok(QuadData {
        n: linalg::real_part(&x.n),
        m: linalg::real_part(&x.m),
        t: linalg::real_part(&x.t),
        gt: linalg::real_part(&x.gt),
        flavor: x.flavor,
        feedthrough: x.feedthrough,
        paired: true,
    })
}

/// Truncated reduced model from data matrices.
///
/// With `N = Z S Yᴴ` truncated to `r`: `Â = S⁻½ Z₁ᴴ M Y₁ S⁻½`,
/// `B̂ = S⁻½ Z₁ᴴ T`, `Ĉ = Gᵀ Y₁ S⁻½`. The BT flavor returns these with `D`;
/// the SPA flavor returns the reciprocal of `(Â, B̂, Ĉ, H(0))`.
pub fn reduce_data<T: Scalar>(data: &QuadData<T>, order: Order) -> Result<ReducedModel<T>> {
    let d = linalg::svd(&data.n)?;
    let s1 = d.s.first().copied().unwrap_or(0.0);
    let rank = d.s.iter().take_while(|&&x| x > RANK_FLOOR * s1).count();
    if rank == 0 {
        return Err(Error::RankDeficient("data matrix N is zero".into()));
    }
    let r = match order {
        Order::Fixed(0) => return Err(Error::InvalidArgument("reduced order must be at least 1".into())),
        Order::Fixed(r) => r,
        Order::Tolerance(t) => reduce::order_from_tolerance(&d.s[..rank], t)?,
    };
    if r > rank {
        return Err(Error::RankDeficient(format!(
            "requested order {r} exceeds the numerical rank {rank} of N"
        )));
    }
    let scale: Vec<f64> = d.s[..r].iter().map(|&x| 1.0 / x.sqrt()).collect();
    let z1 = d.u.columns(0, r);
    let y1 = d.v.columns(0, r);
    let mut left = z1.adjoint();
    for (i, &c) in scale.iter().enumerate() {
        left.row_mut(i).scale_mut(c);
    }
    let mut right = y1.into_owned();
    for (i, &c) in scale.iter().enumerate() {
        right.column_mut(i).scale_mut(c);
    }
    let at = &left * &data.m * &right;
    let bt = &left * &data.t;
    let ct = &data.gt * &right;
    let dt = data.feedthrough.map(T::lift);
    let mut notes = Vec::new();
    let (sys, method) = match data.flavor {
        Flavor::Bt => (Realization::new(at, bt, ct, dt)?, Method::QuadBt),
        Flavor::Spa => {
            let lu = DenseLu::new(&at, "intermediate reduced A")?;
            let sv = linalg::singular_values(&at)?;
            let cond = sv[0] / sv[sv.len() - 1];
            if !(cond <= COND_WARN) {
                log::warn!("intermediate reduced A has condition number {cond:e}");
                notes.push(format!("intermediate reduced A condition number {cond:e}"));
            }
            let ar = lu.inverse();
            let br = &ar * &bt;
            let cr = -(&ct * &ar);
            let dr = dt + &cr * &bt;
            (Realization::new(ar, br, cr, dr)?, Method::QuadSpa)
        }
    };
    Ok(ReducedModel {
        sys,
        method,
        hankel_used: Some(d.s[..r].to_vec()),
        notes,
    })
}

/// All nodes a rule touches, ascending and deduplicated.
pub fn rule_nodes(rule: &QuadratureRule) -> Vec<f64> {
    let mut all: Vec<f64> = rule.nodes_c.iter().chain(&rule.nodes_o).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup_by(|a, b| coincident(*a, *b));
    all
}

/// Data matrices sampled from a known realization.
pub fn data_from_system(sys: &StateSpace, rule: &QuadratureRule, flavor: Flavor) -> Result<QuadData> {
    let nodes = rule_nodes(rule);
    let raw = samples::sample_tf(sys, &nodes)?;
    match flavor {
        Flavor::Bt => {
            let sp = raw.to_strictly_proper(sys.d())?;
            quadbt_data(&sp, &sp, rule)
        }
        Flavor::Spa => {
            let h0 = linalg::to_complex(&sys.dc_moment()?);
            let zs = raw.to_zero_shifted(&h0)?;
            let shared: Vec<f64> = rule
                .nodes_o
                .iter()
                .copied()
                .filter(|&x| rule.nodes_c.iter().any(|&y| coincident(x, y)))
                .collect();
            let deriv = if shared.is_empty() {
                None
            } else {
                Some(samples::sample_tf_derivative(sys, &shared)?)
            };
            quadspa_data(&zs, &zs, rule, deriv.as_ref())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{random_stable, TransferFunction};

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

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_rule(wc: &[f64], wo: &[f64]) -> QuadratureRule {
        QuadratureRule::new(wc.to_vec(), vec![1.0; wc.len()], wo.to_vec(), vec![1.0; wo.len()], false).unwrap()
    }

    #[test]
    fn trapezoid_example() {
        let w = trapezoid_weights(&[1.0, 2.0, 4.0], false).unwrap();
        for (a, b) in w.iter().zip([0.5, 1.5, 1.0]) {
            assert!((a - b / (2.0 * PI)).abs() < 1e-15);
        }
        let w2 = trapezoid_weights(&[1.0, 2.0, 4.0], true).unwrap();
        assert!(w2.iter().zip(&w).all(|(a, b)| (a - 2.0 * b).abs() < 1e-15));
        assert!(trapezoid_weights(&[1.0], false).is_err());
    }

    #[test]
    fn scalar_bt_entries() {
        let d = data_from_system(&s1(), &unit_rule(&[1.0], &[2.0]), Flavor::Bt).unwrap();
        assert!((d.n[(0, 0)] - c(-0.1, -0.3)).norm() < 1e-15);
        assert!((d.m[(0, 0)] - c(0.1, 0.3)).norm() < 1e-15);
        assert!((d.t[(0, 0)] - c(0.2, -0.4)).norm() < 1e-15);
        assert!((d.gt[(0, 0)] - c(0.5, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn scalar_spa_entries() {
        let d = data_from_system(&s1(), &unit_rule(&[1.0], &[2.0]), Flavor::Spa).unwrap();
        assert!((d.n[(0, 0)] - c(-0.1, -0.3)).norm() < 1e-15);
        assert!((d.t[(0, 0)] - c(-0.4, -0.2)).norm() < 1e-15);
        assert!((d.gt[(0, 0)] - c(-0.5, -0.5)).norm() < 1e-15);
        assert_eq!(d.feedthrough[(0, 0)], 1.0);
    }

    #[test]
    fn scalar_coincident_entries() {
        let d = data_from_system(&s1(), &unit_rule(&[1.0], &[1.0]), Flavor::Spa).unwrap();
        assert!((d.n[(0, 0)] - c(0.0, -0.5)).norm() < 1e-15);
        assert!((d.m[(0, 0)] - c(0.0, 0.5)).norm() < 1e-15);
        assert!(data_from_system(&s1(), &unit_rule(&[1.0], &[1.0]), Flavor::Bt).is_err());
        // derivative samples are required for coincident nodes
        let zs = samples::sample_tf(&s1(), &[1.0])
            .unwrap()
            .to_zero_shifted(&CMatrix::from_element(1, 1, c(1.0, 0.0)))
            .unwrap();
        let err = quadspa_data(&zs, &zs, &unit_rule(&[1.0], &[1.0]), None).unwrap_err();
        assert!(matches!(err, Error::MissingData(_)));
    }

    /// Explicit quadrature factors of a dense system with `E = I`.
    fn factors(sys: &StateSpace, rule: &QuadratureRule, flavor: Flavor) -> (CMatrix, CMatrix, CMatrix, CMatrix, CMatrix) {
        let n = sys.n();
        let a = sys.a().to_dense();
        let (a, b, cm) = match flavor {
            Flavor::Bt => (a, sys.b().clone(), sys.c().clone()),
            Flavor::Spa => {
                let ai = linalg::inverse(&a, "A").unwrap();
                let bt = &ai * sys.b();
                let ct = -(sys.c() * &ai);
                (ai, bt, ct)
            }
        };
        let orig = sys.a().to_dense();
        let res = |w: f64| {
            let mut k = linalg::to_complex(&(-&orig));
            for i in 0..n {
                k[(i, i)] += c(0.0, w);
            }
            linalg::inverse(&k, "resolvent").unwrap()
        };
        let obs = QuadratureRule::expand(&rule.nodes_o, &rule.weights_o, rule.positive_only);
        let ctrl = QuadratureRule::expand(&rule.nodes_c, &rule.weights_c, rule.positive_only);
        let (p, m) = (sys.p(), sys.m());
        let mut u = CMatrix::zeros(n, ctrl.len() * m);
        for (k, nd) in ctrl.iter().enumerate() {
            let mut col = res(nd.omega) * linalg::to_complex(sys.b()) * c(nd.weight, 0.0);
            if flavor == Flavor::Spa {
                col *= c(0.0, -1.0);
            }
            u.view_mut((0, k * m), (n, m)).copy_from(&col);
        }
        let mut lh = CMatrix::zeros(obs.len() * p, n);
        for (j, nd) in obs.iter().enumerate() {
            let mut row = linalg::to_complex(sys.c()) * res(nd.omega) * c(nd.weight, 0.0);
            if flavor == Flavor::Spa {
                row *= c(0.0, 1.0);
            }
            lh.view_mut((j * p, 0), (p, n)).copy_from(&row);
        }
        let (ac, bc, cc) = (linalg::to_complex(&a), linalg::to_complex(&b), linalg::to_complex(&cm));
        (&lh * &u, &lh * ac * &u, &lh * bc, cc * &u, lh)
    }

    fn rel(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn data_matrices_match_factor_products() {
        for (seed, positive_only) in [(3u64, false), (4, true)] {
            let sys = random_stable(7, 2, 3, seed).unwrap();
            let rule = QuadratureRule::trapezoid(
                log_nodes(0.1, 10.0, 5).unwrap(),
                log_nodes(0.13, 13.0, 6).unwrap(),
                positive_only,
            )
            .unwrap();
            for flavor in [Flavor::Bt, Flavor::Spa] {
                let d = data_from_system(&sys, &rule, flavor).unwrap();
                let (n, m, t, g, _) = factors(&sys, &rule, flavor);
                assert!(rel(&d.n, &n) <= 1e-12, "{flavor:?} N {}", rel(&d.n, &n));
                assert!(rel(&d.m, &m) <= 1e-12, "{flavor:?} M {}", rel(&d.m, &m));
                assert!(rel(&d.t, &t) <= 1e-12, "{flavor:?} T");
                assert!(rel(&d.gt, &g) <= 1e-12, "{flavor:?} G");
            }
        }
    }

    #[test]
    fn coincident_nodes_match_factor_products() {
        let sys = random_stable(6, 1, 2, 9).unwrap();
        let nodes = log_nodes(0.2, 5.0, 4).unwrap();
        let rule = QuadratureRule::trapezoid(nodes.clone(), vec![nodes[1], 7.0], true).unwrap();
        let d = data_from_system(&sys, &rule, Flavor::Spa).unwrap();
        let (n, m, ..) = factors(&sys, &rule, Flavor::Spa);
        assert!(rel(&d.n, &n) <= 1e-12);
        assert!(rel(&d.m, &m) <= 1e-12);
    }

    #[test]
    fn full_order_recovers_system() {
        let sys = random_stable(4, 1, 1, 11).unwrap();
        let rule = QuadratureRule::trapezoid(
            log_nodes(0.05, 50.0, 12).unwrap(),
            log_nodes(0.07, 70.0, 12).unwrap(),
            true,
        )
        .unwrap();
        let grid = log_nodes(1e-2, 1e2, 60).unwrap();
        let href = sys.eval(c(0.0, 1.0)).unwrap().norm();
        for flavor in [Flavor::Bt, Flavor::Spa] {
            let data = data_from_system(&sys, &rule, flavor).unwrap();
            let rom = reduce_data(&data, Order::Fixed(4)).unwrap();
            let err = metrics::max_deviation(&sys, &rom, &grid).unwrap();
            assert!(err <= 1e-8 * href.max(1.0), "{flavor:?}: {err:e}");
            let real = reduce_data(&realify(&data).unwrap(), Order::Fixed(4)).unwrap();
            assert!(metrics::max_deviation(&rom, &real, &grid).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn flavors_share_n() {
        let sys = random_stable(5, 2, 1, 8).unwrap();
        let rule = QuadratureRule::interleaved(&log_nodes(0.1, 10.0, 12).unwrap(), true).unwrap();
        let a = data_from_system(&sys, &rule, Flavor::Bt).unwrap();
        let b = data_from_system(&sys, &rule, Flavor::Spa).unwrap();
        assert!(linalg::max_abs(&(&a.n - &b.n)) <= 1e-13 * linalg::max_abs(&a.n));
    }

    #[test]
    fn scalar_recovery_from_two_nodes() {
        let rule = unit_rule(&[1.0], &[2.0]);
        for flavor in [Flavor::Bt, Flavor::Spa] {
            let rom = reduce_data(&data_from_system(&s1(), &rule, flavor).unwrap(), Order::Fixed(1)).unwrap();
            for w in [0.0, 0.3, 3.0, 30.0] {
                let s = c(0.0, w);
                let want = (s + 1.0).inv();
                assert!((rom.eval(s).unwrap()[(0, 0)] - want).norm() <= 1e-10, "{flavor:?} at {w}");
            }
        }
    }

    #[test]
    fn order_checks() {
        let sys = random_stable(3, 1, 1, 2).unwrap();
        let rule = QuadratureRule::trapezoid(vec![0.5, 1.0, 2.0], vec![0.7, 1.4, 2.8], false).unwrap();
        let data = data_from_system(&sys, &rule, Flavor::Bt).unwrap();
        assert!(matches!(reduce_data(&data, Order::Fixed(0)), Err(Error::InvalidArgument(_))));
        assert!(matches!(reduce_data(&data, Order::Fixed(9)), Err(Error::RankDeficient(_))));
        assert!(realify(&data).is_err());
    }

    #[test]
    fn weight_scaling_is_invariant() {
        let sys = random_stable(6, 1, 1, 5).unwrap();
        let rule = QuadratureRule::trapezoid(
            log_nodes(0.1, 10.0, 8).unwrap(),
            log_nodes(0.12, 12.0, 8).unwrap(),
            true,
        )
        .unwrap();
        let mut scaled = rule.clone();
        scaled.weights_c.iter_mut().for_each(|w| *w *= 3.0);
        scaled.weights_o.iter_mut().for_each(|w| *w *= 3.0);
        let grid = log_nodes(1e-2, 1e2, 40).unwrap();
        for flavor in [Flavor::Bt, Flavor::Spa] {
            let a = reduce_data(&data_from_system(&sys, &rule, flavor).unwrap(), Order::Fixed(3)).unwrap();
            let b = reduce_data(&data_from_system(&sys, &scaled, flavor).unwrap(), Order::Fixed(3)).unwrap();
            assert!(metrics::max_deviation(&a, &b, &grid).unwrap() <= 1e-10);
        }
    }
}
