#![allow(dead_code)]

use balkit::linalg::{self, CMatrix};
use balkit::quadrature::{Flavor, QuadratureRule};
use balkit::StateSpace;
use nalgebra::DMatrix;
use num_complex::Complex64;

pub const GRID_LO: f64 = 1e-3;
pub const GRID_HI: f64 = 1e3;
pub const GRID_N: usize = 400;

pub fn s1() -> StateSpace {
    StateSpace::dense(
        None,
        DMatrix::from_element(1, 1, -1.0),
        DMatrix::from_element(1, 1, 1.0),
        DMatrix::from_element(1, 1, 1.0),
        None,
    )
    .unwrap()
}

/// `diag(−1, −10)`, `B = Cᵀ = [1 1]ᵀ`.
pub fn s2() -> StateSpace {
    StateSpace::dense(
        None,
        DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -10.0]),
        DMatrix::from_element(2, 1, 1.0),
        DMatrix::from_element(1, 2, 1.0),
        None,
    )
    .unwrap()
}

pub fn rel(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

pub fn rel_real(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let nb = b.norm();
    if nb == 0.0 {
        (a - b).norm()
    } else {
        (a - b).norm() / nb
    }
}

/// Signed nodes and square-root weights as the quadrature sees them.
pub fn signed_nodes(nodes: &[f64], weights: &[f64], positive_only: bool) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for (&w, &r) in nodes.iter().zip(weights) {
        if positive_only {
            out.push((w, r / 2f64.sqrt()));
            out.push((-w, r / 2f64.sqrt()));
        } else {
            out.push((w, r));
        }
    }
    out
}

pub struct Explicit {
    pub n: CMatrix,
    pub m: CMatrix,
    pub t: CMatrix,
    pub gt: CMatrix,
}

/// Quadrature factor products built from explicit resolvents of a system
/// with `E = I`. For the SPA flavor the factors belong to the reciprocal
/// system `(A⁻¹, A⁻¹B, −CA⁻¹)` and carry the phases `−i` (columns) and `i`
/// (rows).
pub fn explicit_data(sys: &StateSpace, rule: &QuadratureRule, flavor: Flavor) -> Explicit {
    assert!(sys.e().is_identity());
    let n = sys.n();
    let a = sys.a().to_dense();
    let bc = linalg::to_complex(sys.b());
    let cc = linalg::to_complex(sys.c());
    let resolvent = |w: f64| {
        let mut k = linalg::to_complex(&(-&a));
        for i in 0..n {
            k[(i, i)] += Complex64::new(0.0, w);
        }
        linalg::inverse(&k, "resolvent").unwrap()
    };
    let (phase_c, phase_o) = match flavor {
        Flavor::Bt => (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)),
        Flavor::Spa => (Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0)),
    };
    let ctrl = signed_nodes(&rule.nodes_c, &rule.weights_c, rule.positive_only);
    let obs = signed_nodes(&rule.nodes_o, &rule.weights_o, rule.positive_only);
    let (p, m) = (sys.p(), sys.m());
    let mut u = CMatrix::zeros(n, ctrl.len() * m);
    for (k, &(w, rho)) in ctrl.iter().enumerate() {
        let col = resolvent(w) * &bc * (phase_c * rho);
        u.view_mut((0, k * m), (n, m)).copy_from(&col);
    }
    let mut lh = CMatrix::zeros(obs.len() * p, n);
    for (j, &(w, phi)) in obs.iter().enumerate() {
        let row = &cc * resolvent(w) * (phase_o * phi);
        lh.view_mut((j * p, 0), (p, n)).copy_from(&row);
    }
    let (at, bt, ct) = match flavor {
        Flavor::Bt => (linalg::to_complex(&a), bc.clone(), cc.clone()),
        Flavor::Spa => {
            let ai = linalg::inverse(&a, "A").unwrap();
            (
                linalg::to_complex(&ai),
                linalg::to_complex(&(&ai * sys.b())),
                linalg::to_complex(&(-(sys.c() * &ai))),
            )
        }
    };
    Explicit {
        n: &lh * &u,
        m: &lh * at * &u,
        t: &lh * bt,
        gt: ct * &u,
    }
}
