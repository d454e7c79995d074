use thiserror::Error;

/// Errors raised by the lattice toolkit.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not symmetric (symmetry check failed at ({row}, {col}))")]
    NotSymmetric { row: usize, col: usize },

    #[error("degenerate form")]
    Degenerate,

    #[error("lattice is odd; discriminant forms are only defined for even lattices")]
    OddLattice,

    #[error("lattice is not definite")]
    NotDefinite,

    #[error("zero vector has no divisibility")]
    ZeroVector,

    #[error("matrix is not an isometry of the given lattice")]
    NotIsometry,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("size bound exceeded: {what} ({size} > {bound})")]
    TooLarge { what: &'static str, size: u128, bound: u128 },

    #[error("finite quadratic module data is inconsistent: {0}")]
    InvalidFqm(String),

    #[error("element is not in the image of the map")]
    NotInImage,

    #[error("generators do not form a subgroup of the given module")]
    NotSubgroup,

    #[error("glue map is not compatible with even overlattices: {0}")]
    OddGlue(String),

    #[error("isometry is not good: {0}")]
    NotGood(String),

    #[error("no preimage of the requested discriminant isometry in O(M)")]
    NoPreimage,

    #[error("search range is unbounded: {0}")]
    Unbounded(String),

    #[error("inconsistent dataset: {0}")]
    Dataset(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
