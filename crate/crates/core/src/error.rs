use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("points belong to different spaces")]
    MixedSpaces,
    #[error("point outside domain: {0}")]
    OutsideDomain(String),
    #[error("geodesic has zero length")]
    ZeroLength,
    #[error("invalid space description: {0}")]
    InvalidSpace(String),
    #[error("segment too short for a dual chain (length {0})")]
    TooShort(f64),
    #[error("pole [{lo}, {hi}] not inside the base parameter interval [0, {len}]")]
    PoleOutside { lo: f64, hi: f64, len: f64 },
    #[error("curtain pool is empty")]
    EmptyPool,
    #[error("pool exceeds cap ({size} > {cap})")]
    PoolCap { size: usize, cap: usize },
    #[error("gluing hypothesis could not be verified: {0}")]
    HypothesisUnverified(String),
    #[error("chain too short: need {need}, have {have}")]
    InsufficientLength { need: usize, have: usize },
    #[error("no root bracketed for {0}")]
    NoRoot(String),
    #[error("ray too short: {0}")]
    RayTooShort(String),
    #[error("truncation height too low: {0}")]
    TruncationTooLow(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("pool file: {0}")]
    PoolFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;
