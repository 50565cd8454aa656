use crate::vlm::GenerationTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Buoyancy exceeded body weight; the effective mass is reported rather than clamped.
    #[error("effective mass saturated at {effective_mass} kg (robot fully buoyant)")]
    Saturation { effective_mass: f64 },

    #[error(transparent)]
    Spec(#[from] SpecError),

    #[error("grid of {cells} cells exceeds the capacity limit of {limit}")]
    Capacity { cells: usize, limit: usize },

    #[error("query point ({x}, {y}) lies outside the map")]
    OutOfBounds { x: f64, y: f64 },

    #[error("malformed terrain file: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("png encoding error: {0}")]
    Png(#[from] png::EncodingError),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("response contained no tool calls")]
    EmptyResponse,

    #[error("network error: {0}")]
    Network(String),

    #[error("endpoint configuration: {0}")]
    Config(String),

    #[error("terrain generation failed after {} attempt(s): {reason}", trace.attempts.len())]
    GenerationFailed {
        reason: String,
        trace: Box<GenerationTrace>,
    },

    #[error("at t = {t} s: {source}")]
    Step {
        t: f64,
        #[source]
        source: Box<Error>,
    },
}

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Io,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io(_) | Error::Network(_) | Error::Config(_) | Error::Format(_) | Error::Png(_) => {
                ErrorClass::Io
            }
            Error::Csv(e) if e.is_io_error() => ErrorClass::Io,
            Error::Step { source, .. } => source.class(),
            _ => ErrorClass::Validation,
        }
    }
}

/// A structured terrain-spec error. Paths use `calls[3].args.step_height` notation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecError {
    #[error("malformed JSON at line {line}, column {column} (byte offset {offset}): {message}")]
    Json {
        line: usize,
        column: usize,
        offset: usize,
        message: String,
    },
    #[error("unknown tool {name:?} at calls[{index}]")]
    UnknownTool { index: usize, name: String },
    #[error("missing required field at {path}")]
    Missing { path: String },
    #[error("unknown field at {path}")]
    Unknown { path: String },
    #[error("type error at {path}: expected {expected}")]
    Type { path: String, expected: &'static str },
    #[error("out of range at {path}: {message}")]
    Range { path: String, message: String },
}

impl SpecError {
    pub fn path(&self) -> Option<&str> {
        match self {
            SpecError::Missing { path }
            | SpecError::Unknown { path }
            | SpecError::Type { path, .. }
            | SpecError::Range { path, .. } => Some(path),
            _ => None,
        }
    }

    /// Index of the offending tool call, when the error is attributable to one.
    pub fn call_index(&self) -> Option<usize> {
        if let SpecError::UnknownTool { index, .. } = self {
            return Some(*index);
        }
        let rest = self.path()?.strip_prefix("calls[")?;
        rest[..rest.find(']')?].parse().ok()
    }

    pub(crate) fn kind_name(&self) -> &'static str {
        match self {
            SpecError::Json { .. } => "json",
            SpecError::UnknownTool { .. } => "unknown_tool",
            SpecError::Missing { .. } => "missing",
            SpecError::Unknown { .. } => "unknown_field",
            SpecError::Type { .. } => "type",
            SpecError::Range { .. } => "range",
        }
    }

    /// Machine-readable form for diagnostics.
    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = serde_json::json!({ "kind": self.kind_name(), "message": self.to_string() });
        if let Some(p) = self.path() {
            obj["path"] = p.into();
        }
        if let Some(i) = self.call_index() {
            obj["call_index"] = i.into();
        }
        if let SpecError::Json { line, column, offset, .. } = self {
            obj["line"] = (*line).into();
            obj["column"] = (*column).into();
            obj["offset"] = (*offset).into();
        }
        obj
    }
}
