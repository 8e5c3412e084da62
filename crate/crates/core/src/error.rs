use thiserror::Error;

/// Errors raised while constructing or generating graphs.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph contains a cycle through vertex {vertex}")]
    CycleDetected { vertex: u32 },
    #[error("edge ({u}, {v}) references a vertex >= n = {n}")]
    InvalidEdge { u: u32, v: u32, n: u32 },
    #[error("requested {m} edges but at most {max} fit on {n} vertices")]
    TooManyEdges { n: u32, m: u64, max: u64 },
    #[error("graph too large: {n} vertices exceeds limit {limit}")]
    GraphTooLarge { n: u32, limit: u32 },
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: u32, n: u32 },
}

/// Errors raised by the batched preprocessing layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum BatchError {
    #[error("root vertex {0} appears more than once in the batch")]
    DuplicateRoots(u32),
    #[error("batch of {len} roots exceeds width {k}")]
    BatchTooWide { len: usize, k: usize },
    #[error("unsupported batch width {0} (expected 64, 128, 256 or 512)")]
    InvalidWidth(usize),
    #[error("strict fraction {0} outside [0, 1]")]
    InvalidStrictFraction(f64),
}

/// Errors from verification helpers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("label sets were built over different vertex orders")]
    OrderMismatch,
}

/// Parsing and index file errors.
#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("missing problem line (\"p <tag> <n> <m>\")")]
    MissingHeader,
    #[error("bad magic bytes, not a label index file")]
    BadMagic,
    #[error("index file truncated")]
    Truncated,
    #[error("corrupt length field: {0}")]
    CorruptLengths(String),
    #[error("rank {rank} at vertex {vertex} out of range for n = {n}")]
    RankOutOfRange { vertex: u32, rank: u32, n: u32 },
    #[error("label of vertex {0} is not strictly ascending")]
    UnsortedLabel(u32),
    #[error("order is not a permutation of 0..{n}: {reason}")]
    NotAPermutation { n: u32, reason: String },
}
