use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("all particle weights are zero at t = {t}")]
    ParticleDeath { t: usize },

    #[error("non-finite potential (NaN) at t = {t}, particle {particle}")]
    NanWeight { t: usize, particle: usize },

    #[error("requested dimension {requested} exceeds direction-number table capacity {capacity}")]
    Capacity { requested: usize, capacity: usize },

    #[error("malformed direction-number table, line {line}: {reason}")]
    DirectionTable { line: usize, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("Hilbert key {key} out of range for {bits} bits")]
    KeyOutOfRange { key: u64, bits: u32 },

    #[error("uniforms are not sorted (position {position})")]
    Unsorted { position: usize },

    #[error("model error: {0}")]
    Model(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}
