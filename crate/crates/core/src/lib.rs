//! Harmonic analysis on compact two-point homogeneous spaces: Jacobi
//! polynomials and zonal kernels, scattered-node coverings, positive cubature
//! rules exact on polynomial spaces, and Marcinkiewicz–Zygmund experiments.

pub mod error;
pub mod jacobi;
pub mod manifold;
pub mod quadrature;

pub use error::{Error, Result};
pub use manifold::{make_spec, Kind, ManifoldSpec, Point};
pub mod kernels;
pub mod cli;
pub mod covering;
pub mod cubature;
pub mod mzlab;
pub mod report;
