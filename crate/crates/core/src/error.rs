use thiserror::Error;

/// Errors produced by the transform, allocation, transceiver and
/// experiment routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input vector is empty")]
    EmptyInput,

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("invalid decomposition factor {0}: factors must be primes >= 2")]
    InvalidFactor(usize),

    #[error("{0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("length {len} is not divisible by {divisor}")]
    NotDivisible { len: usize, divisor: usize },

    #[error("stage {stage} out of range 1..={stages}")]
    StageOutOfRange { stage: usize, stages: usize },

    #[error("request size must be positive")]
    ZeroRequest,

    #[error("infeasible requests: total {requested} subcarriers exceeds M = {available}")]
    Infeasible { requested: usize, available: usize },

    #[error("stream size {size} is not admissible for this plan; admissible sizes are {admissible:?}")]
    InadmissibleSize { size: usize, admissible: Vec<usize> },

    #[error("bins {start}..{end} are not aligned to the stream size {size}")]
    MisalignedBins { start: usize, end: usize, size: usize },

    #[error("subcarrier set {0:?} is not a single IFDMA stream under this plan")]
    NotAStream(Vec<usize>),

    #[error("bin line {0} is claimed by more than one stream")]
    OverlappingLines(usize),

    #[error("frequency shift {shift} out of range 0..{limit}")]
    ShiftOutOfRange { shift: usize, limit: usize },

    #[error("zero channel gain on occupied subcarrier {0}")]
    ZeroChannelGain(usize),

    #[error("no symbol block supplied for node {0}")]
    MissingBlock(String),

    #[error("schedule direction mismatch: {0}")]
    WrongDirection(&'static str),

    #[error("odd number of bits ({0}) cannot be QPSK mapped")]
    OddBitCount(usize),

    #[error("signal has zero power")]
    ZeroPower,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
