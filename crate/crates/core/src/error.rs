use thiserror::Error;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("expected 5 comma-separated fields, found {0}")]
    FieldCount(usize),
    #[error("invalid {field} in trace record `{value}`")]
    BadField { field: &'static str, value: String },
    #[error("line {line}: {source}")]
    Line {
        line: usize,
        #[source]
        source: Box<TraceError>,
    },
}

/// A configuration value failed validation. `field` names the offending key.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid {field}: {reason}")]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("cell {cell} failed: {source}")]
    Cell {
        cell: String,
        #[source]
        source: Box<HarnessError>,
    },
    #[error("unknown figure {0}; expected 6..=13")]
    UnknownFigure(u32),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
