//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CoreError>;

#[derive(Debug, Error)]
pub enum CoreError {
    /// A coordinate or field lives outside the domain it is queried on,
    /// or two objects that must share a grid/domain do not.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid input data (bad bounds, non-finite samples, empty lists, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A box collection fails to partition the domain (gap, overlap, zero volume).
    #[error("partition error: {0}")]
    Partition(String),

    /// A construction does not fit the requested geometry (window leaves the
    /// domain, slab leaves the cube, empty cube intersection, ...).
    #[error("geometry error: {0}")]
    Geometry(String),

    /// A one-sided trace is ill-defined at the queried point (nudging along
    /// the normal stays on the discontinuity set).
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// The grid is too coarse for the requested operation.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// Slice direction not representable on the grid.
    #[error("unsupported direction: {0}")]
    UnsupportedDirection(String),

    /// The linear system has no unique minimizer (fidelity weight zero).
    #[error("singular system: {0}")]
    Singular(String),

    /// The conjugate-direction iteration did not reach the requested
    /// tolerance within the iteration cap.
    #[error("solver did not converge: residual {residual:.3e} after {iterations} iterations ({context})")]
    SolverDiverged {
        residual: f64,
        iterations: usize,
        context: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A text artifact (field CSV, weight file, ...) failed to parse.
    #[error("parse error: {0}")]
    Parse(String),
}
