use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("code length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("entry {index} is not unimodular (|x| = {magnitude})")]
    NotUnimodular { index: usize, magnitude: f64 },

    #[error("not a complementary code matrix (worst sidelobe sum {worst_sidelobe:e})")]
    NotComplementary { worst_sidelobe: f64 },

    #[error("lag {lag} out of range for code length {n}")]
    LagOutOfRange { lag: i64, n: usize },

    #[error("code index {index} out of range for {k} codes")]
    IndexOutOfRange { index: usize, k: usize },

    #[error("search space too large: {size} elements exceeds limit {limit}")]
    SearchSpaceTooLarge { size: usize, limit: usize },

    #[error("no ESP partition of degree {degree} available")]
    NoEspPartition { degree: usize },

    #[error("partition does not have equal power sums of degree {degree}")]
    NotEsp { degree: usize },

    #[error("slot {slot} demands {demand} antennas, cap is {cap}")]
    AntennaCapExceeded {
        slot: u64,
        demand: usize,
        cap: usize,
    },

    #[error("train is not PTM-shaped: {0}")]
    NotPtmTrain(String),

    #[error("time-domain and z-domain checks disagree at order {order}")]
    DomainDisagreement { order: usize },

    #[error("format error: {0}")]
    Format(String),
}
