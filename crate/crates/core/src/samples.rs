//! Transfer-function sample sets on the imaginary axis.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{to_complex, CMatrix};
use crate::system::{StateSpace, TransferFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleKind {
    /// `H(iω)`
    RawH,
    /// `H(iω) − D`
    StrictlyProper,
    /// `H(iω) − H(0)`
    ZeroShifted,
    /// `H'(iω)`
    Derivative,
}

impl SampleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SampleKind::RawH => "raw",
            SampleKind::StrictlyProper => "strictly_proper",
            SampleKind::ZeroShifted => "zero_shifted",
            SampleKind::Derivative => "derivative",
        }
    }
}

impl fmt::Display for SampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SampleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(SampleKind::RawH),
            "strictly_proper" => Ok(SampleKind::StrictlyProper),
            "zero_shifted" => Ok(SampleKind::ZeroShifted),
            "derivative" => Ok(SampleKind::Derivative),
            other => Err(Error::InvalidArgument(format!("unknown sample kind '{other}'"))),
        }
    }
}

/// Values of a p×m transfer function (or its derivative) at `i·node`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub nodes: Vec<f64>,
    pub values: Vec<CMatrix>,
    pub kind: SampleKind,
    /// Feedthrough, when known.
    pub d: Option<DMatrix<f64>>,
    /// `H(0)`, recorded for zero-shifted sets and when known otherwise.
    pub h0: Option<CMatrix>,
}

impl SampleSet {
    pub fn new(nodes: Vec<f64>, values: Vec<CMatrix>, kind: SampleKind) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::Dimension(format!(
                "{} nodes but {} sample values",
                nodes.len(),
                values.len()
            )));
        }
        if nodes.is_empty() {
            return Err(Error::MissingData("sample set is empty".into()));
        }
        let (p, m) = values[0].shape();
        if p == 0 || m == 0 {
            return Err(Error::Dimension("sample values must be non-empty matrices".into()));
        }
        for (k, v) in values.iter().enumerate() {
            if v.shape() != (p, m) {
                return Err(Error::Dimension(format!(
                    "sample {k} is {}x{}, expected {p}x{m}",
                    v.nrows(),
                    v.ncols()
                )));
            }
        }
        for (k, &w) in nodes.iter().enumerate() {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "node {k} is {w}; nodes must be positive"
                )));
            }
        }
        Ok(Self {
            nodes,
            values,
            kind,
            d: None,
            h0: None,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn outputs(&self) -> usize {
        self.values[0].nrows()
    }

    pub fn inputs(&self) -> usize {
        self.values[0].ncols()
    }

    fn check_shape(&self, x: (usize, usize), what: &str) -> Result<()> {
        if x != (self.outputs(), self.inputs()) {
            return Err(Error::Dimension(format!(
                "{what} is {}x{}, samples are {}x{}",
                x.0,
                x.1,
                self.outputs(),
                self.inputs()
            )));
        }
        Ok(())
    }

    /// Samples with `H₀ = H − H(0)`.
    pub fn to_zero_shifted(&self, h0: &CMatrix) -> Result<SampleSet> {
        if self.kind != SampleKind::RawH {
            return Err(Error::InvalidArgument(format!(
                "zero shift applies to raw samples, got {}",
                self.kind
            )));
        }
        self.check_shape(h0.shape(), "H(0)")?;
        let mut out = self.shifted(h0);
        out.kind = SampleKind::ZeroShifted;
        out.h0 = Some(h0.clone());
        Ok(out)
    }

    /// Samples with `H_sp = H − D`.
    pub fn to_strictly_proper(&self, d: &DMatrix<f64>) -> Result<SampleSet> {
        if self.kind != SampleKind::RawH {
            return Err(Error::InvalidArgument(format!(
                "feedthrough split applies to raw samples, got {}",
                self.kind
            )));
        }
        self.check_shape(d.shape(), "D")?;
        let mut out = self.shifted(&to_complex(d));
        out.kind = SampleKind::StrictlyProper;
        out.d = Some(d.clone());
        Ok(out)
    }

    /// Every value minus `x`, metadata kept.
    pub fn shifted(&self, x: &CMatrix) -> SampleSet {
        SampleSet {
            nodes: self.nodes.clone(),
            values: self.values.iter().map(|v| v - x).collect(),
            kind: self.kind,
            d: self.d.clone(),
            h0: self.h0.clone(),
        }
    }

    /// Samples restricted to the given indices, in that order.
    pub fn select(&self, idx: &[usize]) -> SampleSet {
        SampleSet {
            nodes: idx.iter().map(|&k| self.nodes[k]).collect(),
            values: idx.iter().map(|&k| self.values[k].clone()).collect(),
            kind: self.kind,
            d: self.d.clone(),
            h0: self.h0.clone(),
        }
    }

    /// Index of a node within relative tolerance `tol`.
    pub fn find(&self, node: f64, tol: f64) -> Option<usize> {
        self.nodes
            .iter()
            .position(|&w| (w - node).abs() <= tol * w.abs().max(node.abs()))
    }
}

fn imag_points(nodes: &[f64]) -> Vec<Complex64> {
    nodes.iter().map(|&w| Complex64::new(0.0, w)).collect()
}

/// `H(i·node)` for each node. The feedthrough is attached since the
/// realization is known.
pub fn sample_tf(sys: &StateSpace, nodes: &[f64]) -> Result<SampleSet> {
    let values = sys.eval_many(&imag_points(nodes))?;
    let mut s = SampleSet::new(nodes.to_vec(), values, SampleKind::RawH)?;
    s.d = Some(sys.d().clone());
    Ok(s)
}

/// `H'(i·node) = −C (sE−A)⁻¹ E (sE−A)⁻¹ B` for each node.
pub fn sample_tf_derivative(sys: &StateSpace, nodes: &[f64]) -> Result<SampleSet> {
    use rayon::prelude::*;
    let values = imag_points(nodes)
        .par_iter()
        .map(|&s| sys.eval_derivative(s))
        .collect::<Result<Vec<_>>>()?;
    SampleSet::new(nodes.to_vec(), values, SampleKind::Derivative)
}

/// Where the feedthrough comes from.
pub enum FeedthroughSource<'a> {
    /// Read off a realization.
    Oracle(&'a StateSpace),
    /// Supplied by the user.
    Given(DMatrix<f64>),
    /// Estimated from the highest-frequency raw sample.
    Samples(&'a SampleSet),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeedthroughEstimate {
    pub d: DMatrix<f64>,
    /// Largest imaginary magnitude discarded by the estimate; zero for
    /// exact sources.
    pub uncertainty: f64,
}

/// Feedthrough `D = lim H(s)`. From samples, the real part of the sample at
/// the largest node is used and its imaginary magnitude reported as the
/// uncertainty.
pub fn estimate_feedthrough(src: FeedthroughSource<'_>) -> Result<FeedthroughEstimate> {
    match src {
        FeedthroughSource::Oracle(sys) => Ok(FeedthroughEstimate {
            d: sys.d().clone(),
            uncertainty: 0.0,
        }),
        FeedthroughSource::Given(d) => Ok(FeedthroughEstimate { d, uncertainty: 0.0 }),
        FeedthroughSource::Samples(s) => {
            if s.kind != SampleKind::RawH {
                return Err(Error::InvalidArgument(format!(
                    "feedthrough estimate needs raw samples, got {}",
                    s.kind
                )));
            }
            let k = s
                .nodes
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(k, _)| k)
                .ok_or_else(|| Error::MissingData("no samples for the feedthrough estimate".into()))?;
            let v = &s.values[k];
            Ok(FeedthroughEstimate {
                d: v.map(|z| z.re),
                uncertainty: v.iter().fold(0.0, |acc, z| acc.max(z.im.abs())),
            })
        }
    }
}
