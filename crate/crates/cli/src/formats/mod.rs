//! Wire formats: JSON schemas for snapshots, manifests, plans, reports, and
//! study rows, with conversions to and from the core types.

pub mod graphjson;
pub mod manifest;
pub mod params;
pub mod plan;
pub mod report;
pub mod snapshot;
pub mod study;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

impl FormatError {
    pub fn invalid(path: &str, message: impl Into<String>) -> Self {
        Self::Invalid {
            path: path.to_string(),
            message: message.into(),
        }
    }
}

pub(crate) fn read_file(path: &std::path::Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn parse_json<T: serde::de::DeserializeOwned>(
    path: &str,
    text: &str,
) -> Result<T, FormatError> {
    serde_json::from_str(text).map_err(|source| FormatError::Json {
        path: path.to_string(),
        source,
    })
}

/// Serializes with a trailing newline; all writers go through this so output
/// bytes are stable.
pub fn to_json_string<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    text
}
