//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Cell or face geometry collapsed below tolerance (zero measure, coincident points).
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// A declared invariant of a cell or face failed on construction.
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// Vertices of a planar face are not coplanar within tolerance.
    #[error("face {face} is not planar: deviation {deviation:.3e} exceeds tolerance")]
    NonPlanarFace { face: usize, deviation: f64 },

    /// Sub-facet normals of a curvilinear face do not satisfy the positivity condition.
    #[error("curvilinear face {face}: sub-facet normals are not uniformly oriented")]
    CurvilinearSignCondition { face: usize },

    /// Selected face normals are linearly dependent (|det N| below tolerance).
    #[error("dependent normals: |det N| = {det:.3e} below tolerance {tol:.1e}")]
    DependentNormals { det: f64, tol: f64 },

    /// A formula was requested on a cell that does not satisfy its preconditions.
    #[error("precondition not met: {0}")]
    PreconditionNotMet(String),

    /// A flux field violates one of its side conditions.
    #[error("invalid flux field: {0}")]
    InvalidFlux(String),

    /// Face selection has the wrong cardinality or points outside the cell.
    #[error("invalid face selection: {0}")]
    InvalidFaceSelection(String),

    /// Cell kind not supported by the requested operation.
    #[error("unsupported cell kind: {0}")]
    UnsupportedCellKind(String),

    /// Macrocell pairing plan is invalid or leaves subdomains uncovered.
    #[error("invalid pairing: {0}")]
    InvalidPairing(String),

    /// Mesh-level interpolation plan does not match the mesh.
    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    /// Unknown analytic field identifier.
    #[error("unknown field: {0}")]
    UnknownField(String),

    /// Eigenvalue solver failed to reach the requested tolerance.
    #[error("eigen solver did not converge: {0}")]
    SolverNoConvergence(String),

    /// Text-format parse failure with location diagnostics.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
