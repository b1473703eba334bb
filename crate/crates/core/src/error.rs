use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("duplicate mode label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown mode label `{0}`")]
    UnknownMode(String),
    #[error("mode label `{0}` appears in both registers")]
    LabelCollision(String),
    #[error("occupation vector has {found} entries, register has {expected} modes")]
    LengthMismatch { expected: usize, found: usize },
    #[error("{total} photons exceed register cutoff {cutoff}")]
    CutoffExceeded { total: u32, cutoff: u32 },
    #[error("states live on different registers: [{left}] vs [{right}]")]
    RegisterMismatch { left: String, right: String },
    #[error("linear combination is the zero vector")]
    ZeroVector,
    #[error("superposition needs at least one term")]
    EmptySuperposition,
    #[error("invalid beam splitter parameters: {0}")]
    InvalidBeamSplitter(String),
    #[error("amplitudes not normalized: |a|^2 + |b|^2 = {0}")]
    NotNormalized(f64),
    #[error("malformed detection event: {0}")]
    MalformedEvent(String),
    #[error("invalid detector efficiency {0}, expected a value in [0, 1]")]
    InvalidEfficiency(f64),
    #[error("phase {0} is not a finite number")]
    NonFinitePhase(f64),
    #[error("beam splitter ports must be distinct, got `{0}` twice")]
    SamePort(String),
    #[error("trial count must be at least 1")]
    InvalidTrialCount,
    #[error("distribution is empty")]
    EmptyDistribution,
}
