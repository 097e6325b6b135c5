use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed exponent spec `{spec}`: {reason}")]
    MalformedSpec { spec: String, reason: String },

    #[error("exponent term c_{index} = {value} is out of range (need {requirement})")]
    InvalidTerm {
        index: usize,
        value: String,
        requirement: &'static str,
    },

    #[error("depth {requested} exceeds the sequence's maximum depth {max}")]
    DepthOutOfRange { requested: usize, max: usize },

    #[error("depth must be at least 1")]
    ZeroDepth,

    #[error("seed {0} is not prime")]
    CompositeSeed(String),

    #[error("value would need about {needed} bits, above the ceiling of {ceiling} bits")]
    BitCeiling { needed: u64, ceiling: u64 },

    #[error("{digits} decimal places exceed the bit ceiling; at most {max_feasible} are feasible")]
    PrecisionCeiling { digits: u64, max_feasible: u64 },

    #[error("window of {width} integers exceeds the enumeration cap of {cap}")]
    EnumerationCap { width: String, cap: u64 },

    #[error("forest is truncated at or above level {0}; gap list would be incomplete")]
    TruncatedForest(usize),

    #[error("invalid chain document: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;
