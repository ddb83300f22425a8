//! Numerical toolkit for the weighted phase-field approximation of the
//! weighted Mumford-Shah functional.
//!
//! The crate evaluates the diffuse and sharp energies, builds the explicit
//! recovery constructions whose transition trench sits on the lower-trace
//! side of a discontinuous weight, runs the alternating-minimization solver,
//! sweeps the regularization scale to watch the diffuse jump cost approach
//! the sharp lower-trace cost, and drives the bilevel per-cube weight
//! learning scheme.

pub mod bilevel;
pub mod energy;
pub mod error;
pub mod fields;
pub mod gammalab;
pub mod io;
pub mod parallel;
pub mod profiles;
pub mod solver;
pub mod sum;
pub mod weights;

pub use error::{CoreError, Result};
