//! Balanced truncation and singular perturbation approximation for LTI
//! descriptor systems, with low-rank and quadrature-based variants.

pub mod error;
pub mod gramian;
pub mod iofmt;
pub mod linalg;
pub mod metrics;
pub mod operator;
pub mod quadrature;
pub mod reduce;
pub mod rom;
pub mod samples;
pub mod sparse;
pub mod system;

pub use error::{Error, ErrorClass, Result};
pub use rom::{Method, ReducedModel};
pub use system::{StateSpace, TransferFunction};
