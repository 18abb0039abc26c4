use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// Vertex and letter indices carried by the variants are 0-based; the
/// `Display` impls shift them to the 1-based convention used in user-facing
/// text.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("adjacency matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },

    #[error("graph must have at least one vertex")]
    EmptyGraph,

    #[error("graph has {d} vertices, at most {max} are supported")]
    TooManyVertices { d: usize, max: usize },

    #[error("adjacency matrix is not symmetric at ({}, {})", .row + 1, .col + 1)]
    NonSymmetric { row: usize, col: usize },

    #[error("adjacency matrix has a self-loop at ({}, {})", .index + 1, .index + 1)]
    NonZeroDiagonal { index: usize },

    #[error("adjacency entry at ({}, {}) is {value}, expected 0 or 1", .row + 1, .col + 1)]
    NonBinaryEntry { row: usize, col: usize, value: i64 },

    #[error("invalid edge [{i}, {j}] for a graph on {d} vertices: {reason}")]
    BadEdge { i: usize, j: usize, d: usize, reason: &'static str },

    #[error("eigensolver failed: {0}")]
    SolverFailure(String),

    #[error("exact solver supports at most {cap} vertices, graph has {d}")]
    SizeLimitExceeded { d: usize, cap: usize },

    #[error("bad parameters: {0}")]
    BadParams(String),

    #[error("letter {} is out of range for an alphabet of size {d}", .letter + 1)]
    LetterOutOfRange { letter: usize, d: usize },

    #[error("basis exceeds the cap of {cap} states (reached {reached} while building length {length})")]
    BasisTooLarge { cap: usize, reached: usize, length: usize },

    #[error("Lanczos did not converge: best value {best}, residual {residual}")]
    NoConvergence { best: f64, residual: f64 },

    #[error("vertices {} and {} of the proposed clique are not adjacent", .a + 1, .b + 1)]
    NotAClique { a: usize, b: usize },

    #[error("not applicable: {0}")]
    NotApplicable(&'static str),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for the resource-cap family of errors.
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, Error::BasisTooLarge { .. } | Error::SizeLimitExceeded { .. })
    }
}
