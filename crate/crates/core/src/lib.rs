//! Spectral integration toolkit built on shifted Gegenbauer–Gauss points.
//!
//! The crate is organised bottom-up:
//!
//! * [`polycore`] evaluates (shifted) Gegenbauer polynomials and their leading
//!   coefficients.
//! * [`nodes`] builds Gauss rules (nodes, Christoffel numbers and explicit
//!   barycentric weights) on `[0, l]`.
//! * [`interp`] evaluates barycentric Lagrange interpolants in one and two
//!   dimensions.
//! * [`intmat`] builds integration matrices of any order and the
//!   full-interval integration vector.
//! * [`transcribe`] turns the 1-D diffusion optimal control problem into an
//!   equality-constrained quadratic program.
//! * [`qpsolve`] solves that program through its KKT system.
//! * [`bounds`] evaluates the truncation-error bounds of the quadratures.

pub mod bounds;
pub mod dump;
mod error;
pub mod interp;
pub mod intmat;
pub mod nodes;
pub mod polycore;
pub mod qpsolve;
mod special;
pub mod transcribe;

pub use error::{Error, Result};
pub use interp::{Interpolant1D, Interpolant2D};
pub use intmat::IntegrationOperator;
pub use nodes::QuadratureRule;
pub use polycore::BasisSpec;
pub use qpsolve::{QpSolution, QuadraticProgram};
pub use transcribe::{DiffusionOcp, DiscreteQp, GridIndexMap, Transcription};
