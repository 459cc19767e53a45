use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("zero vector has no slope")]
    ZeroVector,

    #[error("dimension vector not defined on vertex `{0}`")]
    MissingVertex(String),

    #[error("vertex sets do not match")]
    VertexMismatch,

    #[error("dimension pair ({d}, {e}) is not coprime")]
    NotCoprime { d: u64, e: u64 },

    #[error("normalize first: expected d <= e, got ({d}, {e})")]
    NotOrdered { d: u64, e: u64 },

    #[error("weight propagation requires a tree")]
    NotATree,

    #[error("colouring not stable: {0}")]
    UnstableColouring(String),

    #[error("colour capacity exceeded: R_j + R_j' = {got} > m = {m}")]
    ColourCapacity { got: usize, m: usize },

    #[error("`{0}` is not a sink")]
    NotASink(String),

    #[error(
        "search cap exceeded after visiting {visited} nodes (cap {cap}); {found} data found so far"
    )]
    CapExceeded {
        visited: u64,
        cap: u64,
        found: usize,
    },

    #[error("subrepresentation sweep too large: {size} tuples exceeds cap {cap}")]
    SweepTooLarge { size: u128, cap: u128 },

    #[error("no square-root singularity regime for b = 1")]
    NoSingularityRegime,

    #[error("truncation order {have} insufficient, need at least {need}")]
    InsufficientOrder { have: usize, need: usize },

    #[error("invalid glue tuple: {0}")]
    InvalidTuple(String),

    #[error("no reflected representative with e > (m-1)d exists for ({d}, {e})")]
    OutOfRegime { d: u64, e: u64 },

    #[error("the (n, n) vanishing statement starts at n >= 2")]
    VanishingRange,

    #[error("argument outside the imaginary cone [m1, m2]")]
    OutsideCone,

    #[error("invalid input: {0}")]
    Invalid(String),
}
