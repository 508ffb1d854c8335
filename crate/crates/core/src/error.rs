use thiserror::Error;

/// Everything that can go wrong in the library. Each variant carries a
/// stable machine-readable code (see [`Error::code`]) used by the CLI and
/// the C ABI.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("node {0} is isolated")]
    IsolatedNode(usize),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("index {index} out of range for {len} nodes")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("graph must have at least one node")]
    EmptyGraph,
    #[error("{what} has length {got}, expected {expected}")]
    LengthMismatch { what: &'static str, got: usize, expected: usize },
    #[error("permutation is not a bijection on [0, {0})")]
    NotBijective(usize),
    #[error("brute-force isomorphism is limited to {limit} nodes, got {got}")]
    SizeLimit { got: usize, limit: usize },
    #[error("unknown pair `{0}`")]
    UnknownPair(String),
    #[error("tuple space would hold {got} tuples, cap is {cap}")]
    MemoryLimit { got: usize, cap: usize },
    #[error("invalid order/bound: k = {k}, s = {s}")]
    InvalidOrder { k: usize, s: usize },
    #[error("variant {variant} cannot run on a ({k},{s}) tuple space")]
    VariantSpaceMismatch { variant: &'static str, k: usize, s: usize },
    #[error("colorings are over different tuple spaces")]
    SpaceMismatch,
    #[error("refinement did not stabilize within {0} iterations")]
    IterationCap(usize),
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NonSymmetric(f64),
    #[error("Jacobi iteration did not converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("rank {rank} out of range for {n} eigenpairs")]
    RankOutOfRange { rank: usize, n: usize },
    #[error("digit {position} reached the base {base}")]
    DigitOverflow { position: usize, base: u32 },
    #[error("digit vectors have different bases ({0} vs {1})")]
    BaseMismatch(u32, u32),
    #[error("count {value} is {slack:.3} away from an integer")]
    RoundingSlack { value: f64, slack: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("file not found: {0}")]
    FileNotFound(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::SelfLoop(_) => "SELF_LOOP",
            Error::IsolatedNode(_) => "ISOLATED_NODE",
            Error::DuplicateEdge(..) => "DUPLICATE_EDGE",
            Error::IndexOutOfRange { .. } => "INDEX_OUT_OF_RANGE",
            Error::EmptyGraph => "EMPTY_GRAPH",
            Error::LengthMismatch { .. } => "LENGTH_MISMATCH",
            Error::NotBijective(_) => "NOT_BIJECTIVE",
            Error::SizeLimit { .. } => "SIZE_LIMIT",
            Error::UnknownPair(_) => "UNKNOWN_PAIR",
            Error::MemoryLimit { .. } => "MEMORY_LIMIT",
            Error::InvalidOrder { .. } => "INVALID_ORDER",
            Error::VariantSpaceMismatch { .. } => "VARIANT_SPACE_MISMATCH",
            Error::SpaceMismatch => "SPACE_MISMATCH",
            Error::IterationCap(_) => "ITERATION_CAP",
            Error::NonSymmetric(_) => "NON_SYMMETRIC",
            Error::NoConvergence(_) => "NO_CONVERGENCE",
            Error::ShapeMismatch(_) => "SHAPE_MISMATCH",
            Error::RankOutOfRange { .. } => "RANK_OUT_OF_RANGE",
            Error::DigitOverflow { .. } => "DIGIT_OVERFLOW",
            Error::BaseMismatch(..) => "BASE_MISMATCH",
            Error::RoundingSlack { .. } => "ROUNDING_SLACK",
            Error::InvalidArgument(_) => "INVALID_ARGUMENT",
            Error::FileNotFound(_) => "FILE_NOT_FOUND",
            Error::Io(_) => "IO_ERROR",
            Error::Parse(_) => "PARSE_ERROR",
        }
    }

    /// Resource-limit failures, as opposed to bad input.
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, Error::SizeLimit { .. } | Error::MemoryLimit { .. } | Error::IterationCap(_))
    }
}
