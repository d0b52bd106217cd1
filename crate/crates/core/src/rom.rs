use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Scalar};
use crate::system::{Realization, StateSpace, TransferFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Bt,
    Spa,
    SpaDirect,
    QuadBt,
    QuadSpa,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Bt => "bt",
            Method::Spa => "spa",
            Method::SpaDirect => "spa_direct",
            Method::QuadBt => "quadbt",
            Method::QuadSpa => "quadspa",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bt" => Ok(Method::Bt),
            "spa" => Ok(Method::Spa),
            "spa_direct" => Ok(Method::SpaDirect),
            "quadbt" => Ok(Method::QuadBt),
            "quadspa" => Ok(Method::QuadSpa),
            other => Err(Error::InvalidArgument(format!("unknown method '{other}'"))),
        }
    }
}

/// A reduced model `(I, A_r, B_r, C_r, D_r)` with the method that produced
/// it. Quadrature methods without realification yield complex matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedModel<T: Scalar = f64> {
    pub sys: Realization<T>,
    pub method: Method,
    /// Singular values retained by the truncation (Hankel singular values
    /// for the intrusive methods, data-matrix singular values otherwise).
    pub hankel_used: Option<Vec<f64>>,
    pub notes: Vec<String>,
}

impl<T: Scalar> ReducedModel<T> {
    pub fn new(sys: Realization<T>, method: Method) -> Self {
        Self {
            sys,
            method,
            hankel_used: None,
            notes: Vec::new(),
        }
    }

    pub fn order(&self) -> usize {
        self.sys.order()
    }

    pub fn poles(&self) -> Result<Vec<Complex64>> {
        self.sys.poles()
    }
}

impl ReducedModel<f64> {
    pub fn state_space(&self) -> Result<StateSpace> {
        self.sys.to_state_space()
    }
}

impl<T: Scalar> TransferFunction for ReducedModel<T> {
    fn inputs(&self) -> usize {
        self.sys.inputs()
    }

    fn outputs(&self) -> usize {
        self.sys.outputs()
    }

    fn eval(&self, s: Complex64) -> Result<CMatrix> {
        self.sys.eval(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in [Method::Bt, Method::Spa, Method::SpaDirect, Method::QuadBt, Method::QuadSpa] {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("svd".parse::<Method>().is_err());
    }
}
