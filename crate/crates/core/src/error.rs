use thiserror::Error;

/// Configuration problem, located by a dotted key such as `disruptor[0].noise.std`.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{key}: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self { key: key.into(), message: message.into() }
    }
}
