use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("transmitter and receiver coincide")]
    CoincidentAntennas,

    #[error("position outside environment bounds: ({0}, {1}, {2})")]
    OutsideBounds(f64, f64, f64),

    #[error("screen plane does not lie strictly between the antennas")]
    PlaneNotBetween,

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("body centroid lies outside the tx-rx slab")]
    CentroidOutsideSlab,

    #[error("channel impulse response is empty")]
    EmptyCir,

    #[error("all delay bins fall below the requested floor")]
    AllBelowFloor,

    #[error("selector matched the direct path; passive surfaces apply to interactions only")]
    PrsOnDirectPath,

    #[error("frame timestamps are not strictly increasing")]
    NonMonotoneTimestamps,

    #[error("series length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("series too short: {len} samples, window needs {window}")]
    SeriesTooShort { len: usize, window: usize },

    #[error("aperture quadrature did not converge: error estimate {err:.3e} after {refinements} refinements")]
    QuadratureNotConverged { err: f64, refinements: usize },

    #[error("unknown preset: {0}")]
    UnknownPreset(String),

    #[error("preset file rejected: {0}")]
    BadPreset(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
