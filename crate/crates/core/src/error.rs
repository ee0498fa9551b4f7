use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid must have at least one row and one column (got {rows}x{cols})")]
    EmptyGrid { rows: usize, cols: usize },

    #[error("{field} must be at least 1 (got {value})")]
    NonPositive { field: &'static str, value: u64 },

    #[error("unknown node id {0}")]
    UnknownNode(usize),

    #[error("distance must be positive (got {0} m)")]
    NonPositiveDistance(f64),

    #[error("subset size {m} exceeds the number of RUs {n}")]
    SubsetTooLarge { m: usize, n: usize },

    #[error("segment {segment} is saturated ({used}/{total}); cannot commit")]
    Saturated {
        segment: usize,
        used: u32,
        total: u32,
    },

    #[error("route is empty or inconsistent with the topology")]
    InvalidRoute,

    #[error("serving subset is empty")]
    EmptySubset,

    #[error("no routing decision for UE {ue} / RU {ru}")]
    MissingDecision { ue: usize, ru: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("empirical CDF of an empty sample set")]
    EmptySamples,

    #[error("cannot mix scenarios '{expected}' and '{found}' in one batch")]
    MixedScenarios { expected: String, found: String },

    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    ConfigParse(#[from] toml::de::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
