//! Spectral-norm column subset selection with certified residual bounds.
//!
//! Given `A ∈ ℝ^{n×d}` and `k`, [`select`] deterministically picks `k`
//! columns whose projection residual `‖A − A_SA_S†A‖₂²` is bounded by
//! [`bounds::theorem_bound`] whenever `k` lies in the bound's regime. The
//! [`oracle`] module checks the underlying polynomial identities by
//! exhaustive enumeration on small matrices.
//!
//! Every numerical routine is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix `f64`.

pub mod bounds;
pub mod error;
pub mod instances;
pub mod linalg;
pub mod oracle;
pub mod polynomial;
pub mod scalar;
pub mod selector;

pub use error::{Error, Result};
pub use instances::InstanceSpec;
pub use linalg::{DenseMatrix, Projector, SymMatrix};
pub use polynomial::{RealPoly, RootApprox};
pub use scalar::Scalar;
pub use selector::{select, select_with, Branch, SelectOptions, SelectionResult, SelectionState};

pub type Matrix = DenseMatrix<f64>;
pub type SymMat = SymMatrix<f64>;
pub type Poly = RealPoly<f64>;
pub type Root = RootApprox<f64>;
pub type Selection = SelectionResult<f64>;
pub type Bound = bounds::BoundReport<f64>;
pub type Spectrum = bounds::SpectrumInfo<f64>;
pub type Report = oracle::OracleReport<f64>;

pub type Matrix32 = DenseMatrix<f32>;
pub type Poly32 = RealPoly<f32>;
