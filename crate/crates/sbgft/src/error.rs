use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    #[error("unsupported grid size {0}: expected even N in 4..=64")]
    UnsupportedSize(usize),
    #[error("reflection axis {axis} does not belong to the size-{n} axis family")]
    AxisMismatch { axis: String, n: usize },
    #[error("signal length {got} does not match expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("eigendecomposition did not converge")]
    EigenFailed,
    #[error("pairing is not an automorphism of the graph")]
    NotAutomorphism,
    #[error("support signal has zero norm; symmetry ratio undefined")]
    ZeroSupportSignal,
    #[error("quantization parameter {0} outside 0..=51")]
    QpOutOfRange(i32),
    #[error("candidate bank is empty")]
    EmptyBank,
    #[error("transform ordinal {ordinal} not present in bank of size {len}")]
    UnknownTransform { ordinal: usize, len: usize },
    #[error("no subset entry for prediction mode {pm} at size {n}")]
    MissingSubset { pm: u8, n: usize },
    #[error("block geometry invalid: {0}")]
    Geometry(String),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("rate-distortion curves overlap insufficiently for BD computation")]
    InsufficientOverlap,
    #[error("need at least 4 rate-distortion points, got {0}")]
    TooFewPoints(usize),
    #[error("corrupt stream: {0}")]
    CorruptStream(String),
    #[error("bad file format: {0}")]
    Format(String),
    #[error("unsupported format version {0}")]
    Version(u16),
    #[error("checksum mismatch (stored {stored:#010x}, computed {computed:#010x})")]
    Checksum { stored: u32, computed: u32 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
