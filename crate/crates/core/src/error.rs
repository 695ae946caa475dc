use thiserror::Error;

/// A configuration value that violates a module invariant.
///
/// `field` is the dotted path used by the config file (`clock.divider`,
/// `audio.bit_length`, ...), so CLI users can find the offending key.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{field}: {reason}")]
pub struct ConfigError {
    pub field: &'static str,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: &'static str, reason: impl Into<String>) -> Self {
        Self {
            field,
            reason: reason.into(),
        }
    }
}
