use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by box construction, composition and analysis.
#[derive(Debug, Error)]
pub enum Error {
    #[error("epsilon {0} outside [0, 1]")]
    EpsilonOutOfRange(f64),
    #[error("{boxes} boxes but {weights} weights")]
    WeightCountMismatch { boxes: usize, weights: usize },
    #[error("weights sum to {0}, expected 1")]
    WeightSumMismatch(f64),
    #[error("table entry {index} is {value}, below the -1e-12 floor")]
    NegativeEntry { index: usize, value: f64 },
    #[error("box violates {0}")]
    InvalidBox(&'static str),
    #[error("box is signaling (marginal deviation {0:.3e})")]
    Signaling(f64),
    #[error("box lies off the PR/anti-PR/Pc plane (fit residual {0:.3e})")]
    OffPlane(f64),
    #[error("invalid plane coordinates ({xi}, {gamma})")]
    InvalidPlaneCoords { xi: f64, gamma: f64 },
    #[error("wiring id {0} out of range (must be < 32768)")]
    WiringIdOutOfRange(u32),
    #[error("truth table {0} out of range for {1}")]
    TruthTableOutOfRange(u8, &'static str),
    #[error("chsh level {0} outside (2, 4)")]
    DegenerateLevel(f64),
    #[error("checkpoint incompatible with this search: {0}")]
    CheckpointMismatch(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
