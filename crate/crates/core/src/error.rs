use thiserror::Error;

/// Errors produced by the transform, inversion and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point at the origin: the focus is excluded from every formula")]
    ZeroPoint,

    #[error("invalid paraboloid coordinates: radial coordinate {r} is below focal parameter {p}")]
    InvalidCoords { r: f64, p: f64 },

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("focal parameter must be positive, got {0}")]
    NonPositiveP(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("p_max {p_max} is below the support radius {support} of the imaged function")]
    SupportExceedsGrid { p_max: f64, support: f64 },

    #[error("profile too short: {len} samples, need at least {min}")]
    GridTooShort { len: usize, min: usize },

    #[error("filter {filter} cannot consume {data} data")]
    WrongDataKind { filter: &'static str, data: &'static str },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("direction rule is empty")]
    EmptyRule,

    #[error("points must be distinct")]
    CoincidentPoints,

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("degenerate refinement ladder: {0}")]
    DegenerateLadder(String),

    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),

    #[error("truncated file: needed {needed} bytes, {available} available")]
    Truncated { needed: usize, available: usize },

    #[error("{0} unexpected trailing bytes")]
    TrailingBytes(usize),

    #[error("malformed file: {0}")]
    Malformed(String),

    #[error("phantom spec: {0}")]
    PhantomSpec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
