use thiserror::Error;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Numeric,
    Resource,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spin {0}: expected a positive half-integer")]
    InvalidSpin(f64),
    #[error("invalid locality threshold: {0}")]
    InvalidThreshold(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("no conserved tower available: {0}")]
    NoTower(String),
    #[error("symmetry not available: {0}")]
    UnavailableSymmetry(String),
    #[error("penalty factor must satisfy mu >= 1, got {0}")]
    InvalidPenalty(f64),
    #[error("LLL parameter must satisfy 0.25 < delta < 1, got {0}")]
    InvalidDelta(f64),
    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),
    #[error("unsupported Weingarten cycle type {0:?}")]
    UnsupportedCycleType(Vec<u32>),
    #[error("Weingarten function has a pole at D = {0}")]
    WeingartenPole(u64),
    #[error("exact CVP is limited to dimension <= {max}, got {dim}")]
    OracleDimension { dim: usize, max: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("cannot normalize a zero matrix")]
    ZeroMatrix,
    #[error("operators do not commute: {0}")]
    NonCommuting(String),
    #[error("lattice basis is rank deficient")]
    RankDeficient,
    #[error("metric is not positive definite")]
    NotPositiveDefinite,

    #[error("dimension {dim} exceeds the limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },
    #[error("enumeration box too large ({0} points)")]
    BoxTooLarge(u128),
    #[error("memory guard: {0}")]
    MemoryGuard(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidSpin(_)
            | Error::InvalidThreshold(_)
            | Error::InvalidModel(_)
            | Error::NoTower(_)
            | Error::UnavailableSymmetry(_)
            | Error::InvalidPenalty(_)
            | Error::InvalidDelta(_)
            | Error::InvalidTimeGrid(_)
            | Error::UnsupportedCycleType(_)
            | Error::WeingartenPole(_)
            | Error::OracleDimension { .. }
            | Error::DimensionMismatch(_) => ErrorClass::Config,
            Error::NotHermitian(_)
            | Error::ZeroMatrix
            | Error::NonCommuting(_)
            | Error::RankDeficient
            | Error::NotPositiveDefinite => ErrorClass::Numeric,
            Error::DimensionTooLarge { .. }
            | Error::BoxTooLarge(_)
            | Error::MemoryGuard(_)
            | Error::Io(_)
            | Error::Json(_) => ErrorClass::Resource,
            Error::Stage { source, .. } => source.class(),
        }
    }

    pub(crate) fn at(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
