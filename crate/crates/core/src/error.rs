use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid motif: {0}")]
    InvalidMotif(String),

    #[error("motif of order {order} exceeds the brute-force limit of {limit}")]
    MotifTooLarge { order: usize, limit: usize },

    #[error("{0} is undefined for this motif")]
    Undefined(&'static str),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("empty graph: no edges, so the edge density is zero")]
    EmptyGraph,

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid sampling parameters: {0}")]
    InvalidSpec(String),

    #[error("{assignments} block assignments exceed the exact-enumeration limit; use Monte Carlo instead")]
    TooManyAssignments { assignments: f64 },

    #[error("degenerate partition: block {0} has no vertices")]
    DegeneratePartition(usize),

    #[error("near-singular covariance for block {block} (eigenvalue ratio {ratio:e})")]
    SingularCovariance { block: usize, ratio: f64 },

    #[error("perfect separation detected (coefficient norm {0:.3e})")]
    Separation(f64),

    #[error("singular information matrix: design columns are collinear")]
    Collinear,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("rooted count overflowed 64 bits")]
    Overflow,

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures that indicate a bug rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
