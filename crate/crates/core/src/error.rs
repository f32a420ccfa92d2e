use thiserror::Error;

/// Errors produced by the lattice library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime {p} divides the determinant {det}")]
    PrimeDividesDet { p: u64, det: String },
    #[error("unsupported prime: {0}")]
    UnsupportedPrime(String),
    #[error("vector is not isotropic modulo {0}")]
    NotIsotropic(u64),
    #[error("not a {p}-neighbor: {reason}")]
    NotNeighbor { p: u64, reason: String },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not an isometry of the given Gram matrix")]
    NotIsometry,
    #[error("no catalog class matches the lattice with Gram {gram}")]
    Unclassified { gram: String },
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("integer overflow in machine-word fast path: {0}")]
    Overflow(&'static str),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("catalog error: {0}")]
    Catalog(String),
    #[error("identity violated: {0}")]
    Identity(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
