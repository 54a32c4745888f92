//! Crate-wide error type with stable machine-readable codes.
//!
//! The CLI surfaces `code()` verbatim in its JSON error envelope, so the
//! codes are part of the public contract: add new ones freely, never rename.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("fan is not smooth and complete: {0}")]
    FanNotSmooth(String),

    #[error("fan needs at least three rays, got {0}")]
    FanTooSmall(usize),

    #[error("blowup multiplicities must match the number of rays: {rays} rays, {weights} weights")]
    BlowupCountMismatch { rays: usize, weights: usize },

    #[error("blowup multiplicities must be non-negative")]
    NegativeBlowup,

    #[error("tropical point has a negative coordinate: {0}")]
    NegativeTropCoordinate(String),

    #[error("cone index {index} out of range for a fan with {rays} rays")]
    ConeOutOfRange { index: usize, rays: usize },

    #[error("truncation order {0} is out of the supported range")]
    BadOrder(usize),

    #[error("grading class rejected: {0}")]
    AmpleRejected(String),

    #[error("scattering did not reach consistency at order {order}: {detail}")]
    ScatteringInconsistent { order: usize, detail: String },

    #[error("structure constants disagree between generic endpoints: {0}")]
    EndpointDependence(String),

    #[error("no positive boundary divisor found in the search range")]
    NoPositiveDivisor,

    #[error("divisor class has the wrong rank: expected {expected}, got {got}")]
    ClassRankMismatch { expected: usize, got: usize },

    #[error("weight system is out of the supported range: {0}")]
    BadWeightSystem(String),

    #[error("invalid pair description: {0}")]
    BadPairInput(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable identifier for scripting against the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::FanNotSmooth(_) => "FAN_NOT_SMOOTH",
            Error::FanTooSmall(_) => "FAN_TOO_SMALL",
            Error::BlowupCountMismatch { .. } => "BLOWUP_COUNT_MISMATCH",
            Error::NegativeBlowup => "NEGATIVE_BLOWUP",
            Error::NegativeTropCoordinate(_) => "NEGATIVE_TROP_COORDINATE",
            Error::ConeOutOfRange { .. } => "CONE_OUT_OF_RANGE",
            Error::BadOrder(_) => "BAD_ORDER",
            Error::AmpleRejected(_) => "AMPLE_REJECTED",
            Error::ScatteringInconsistent { .. } => "SCATTERING_INCONSISTENT",
            Error::EndpointDependence(_) => "ENDPOINT_DEPENDENCE",
            Error::NoPositiveDivisor => "NO_POSITIVE_DIVISOR",
            Error::ClassRankMismatch { .. } => "CLASS_RANK_MISMATCH",
            Error::BadWeightSystem(_) => "BAD_WEIGHT_SYSTEM",
            Error::BadPairInput(_) => "BAD_PAIR_INPUT",
            Error::Json(_) => "JSON",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
