use thiserror::Error;

use crate::encoder::SiteRef;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("coupling must be a positive finite number, got {0}")]
    InvalidCoupling(f64),

    #[error("amplitudes ({a}, {b}) are not normalized: |a|^2 + |b|^2 = {norm}")]
    InvalidAmplitudes { a: String, b: String, norm: f64 },

    #[error("chain length must be at least {min}, got {len}")]
    ChainTooShort { len: usize, min: usize },

    #[error("{what} is too large: {size} exceeds the limit of {limit}")]
    TooLarge { what: &'static str, size: usize, limit: usize },

    #[error("site {site:?} lies outside the chain layout")]
    SiteOutOfRange { site: SiteRef },

    #[error("encoder footprints overlap at {site:?}")]
    OverlappingFootprints { site: SiteRef },

    #[error("site {site:?} is not covered by any encoder (strict tiling)")]
    UncoveredSite { site: SiteRef },

    #[error("footprint of encoder {index} is not a contiguous block on chain {chain}")]
    NonContiguousFootprint { index: usize, chain: usize },

    #[error("encoders cannot be ordered consistently along chain {chain}")]
    InconsistentOrdering { chain: usize },

    #[error("encoder on footprint {footprint:?} is not normal (defect {defect:e})")]
    NotNormal { footprint: Vec<SiteRef>, defect: f64 },

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("steady state is not unique: second singular value {second:e} vs threshold {threshold:e}")]
    DegenerateSteadyState { second: f64, threshold: f64 },

    #[error("eigensolver failed to converge")]
    EigenSolverFailed,

    #[error("normalization {value} is not a positive real number")]
    BadNormalization { value: String },

    #[error("postselection annihilated the state")]
    ZeroProbability,

    #[error("sample count must be at least 1")]
    NoSamples,

    #[error("function is not a classical oracle: {0}")]
    NotClassicalOracle(String),
}
