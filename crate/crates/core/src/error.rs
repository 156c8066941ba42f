use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControllerError {
    #[error("invalid driver parameter `{name}` = {value}: {reason}")]
    InvalidParam {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("non-finite controller input: theta_near={theta_near}, theta_far={theta_far}")]
    NonFiniteInput { theta_near: f64, theta_far: f64 },
    #[error("controller input out of range (|theta| must be <= pi): {0}")]
    InputOutOfRange(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrackError {
    #[error("degenerate track geometry: {0}")]
    Degenerate(String),
    #[error("centerline csv line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] IoMessage),
}

/// `std::io::Error` is neither `Clone` nor `PartialEq`; keep its message.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{0}")]
pub struct IoMessage(pub String);

impl From<std::io::Error> for IoMessage {
    fn from(e: std::io::Error) -> Self {
        IoMessage(e.to_string())
    }
}

impl From<std::io::Error> for TrackError {
    fn from(e: std::io::Error) -> Self {
        TrackError::Io(e.into())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerceptionError {
    #[error("vehicle is {lateral_error:.3} m from the centerline; ground-truth extraction needs it within {limit:.3} m")]
    OffTrack { lateral_error: f64, limit: f64 },
    #[error("cost map row {row_from_bottom} (from bottom) has no visible lane")]
    NoLaneInRow { row_from_bottom: usize },
    #[error("cost map row {row_from_bottom} is outside the {height}-row grid")]
    RowOutOfRange { row_from_bottom: usize, height: usize },
    #[error("lead vehicle lost for {elapsed:.2} s")]
    LeadLost { elapsed: f64 },
    #[error("invalid probe distances: near={near}, far={far}")]
    InvalidProbe { near: f64, far: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {reason}")]
    Read { path: String, reason: String },
    #[error("config syntax error: {0}")]
    Syntax(String),
    #[error("unknown config key `{key}`; valid keys are: {valid}")]
    UnknownKey { key: String, valid: String },
    #[error("config key `{key}` has the wrong type: expected {expected}")]
    WrongType { key: String, expected: &'static str },
    #[error("config key `{key}` = {value} out of range: {constraint}")]
    OutOfRange {
        key: String,
        value: String,
        constraint: String,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Controller(#[from] ControllerError),
    #[error(transparent)]
    Track(#[from] TrackError),
    #[error("feature extraction failed at t={t:.3} s: {source}")]
    Extraction {
        t: f64,
        #[source]
        source: PerceptionError,
    },
    #[error("empty trajectory log")]
    EmptyLog,
}
