//! Forward and inverse spectral analysis of the matrix Sturm–Liouville problem
//!
//! ```text
//!     -Y'' + Q(x) Y = λ Y,   x ∈ (0, π),
//!     Y(0) = 0,   V(Y) := T (Y'(π) - H Y(π)) - T⊥ Y(π) = 0,
//! ```
//!
//! where `Q` is a Hermitian m×m potential, `T` an orthogonal projector of
//! rank `1 ≤ p < m`, `T⊥ = I - T` and `H = T H T` Hermitian.
//!
//! The crate is organised along the two directions of the problem:
//!
//! * [`forward`] integrates the equation, locates eigenvalues with their
//!   multiplicities and evaluates the Weyl matrix and the weight matrices
//!   (minus the residues of the Weyl matrix).
//! * [`model`], [`maineq`] and [`reconstruct`] go back from spectral data to
//!   `Q` and `H` by the method of spectral mappings: build a constant model
//!   problem matched to the asymptotics of the data, solve the linear main
//!   equation node by node on the grid and read the potential off the
//!   correction series.
//! * [`graph`] specialises the machinery to Sturm–Liouville operators on a
//!   star-shaped graph.
//! * [`cli`] holds the file formats and the command implementations used by
//!   the `spectral-mappings` binary.

pub mod cli;
pub mod error;
pub mod forward;
pub mod graph;
pub mod linalg;
pub mod maineq;
pub mod model;
pub mod problem;
pub mod reconstruct;

pub use error::{Error, Result};
pub use linalg::{CMat, C64};
pub use problem::{
    shift_spectrum, validate_problem, BoundaryCoefficient, PotentialGrid, Problem, Projector,
    SpectralData, SpectralDatum, ToleranceConfig, ValidationReport, Violation,
};
