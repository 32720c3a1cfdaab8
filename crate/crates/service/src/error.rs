use lectern::{CrowdError, ErrorCode, IngestError, MergeError, ModelError, QueryError, Violation};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown map {0:?}")]
    UnknownMap(String),
    #[error("map {0:?} already exists")]
    MapExists(String),
    #[error("map fails validation: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidMap(Vec<Violation>),
    #[error("unknown session {0:?}")]
    UnknownSession(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("session is not live")]
    SessionNotLive,
    #[error("session has ended")]
    SessionEnded,
    #[error("{0}")]
    InvalidTransition(String),
    #[error("position {requested} is outside the corridor 1..={length}")]
    OutOfBounds { requested: u32, length: u32 },
    #[error("unknown participant token")]
    UnknownParticipant,
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Merge(#[from] MergeError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Crowd(CrowdError),
    #[error("storage error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<CrowdError> for ServiceError {
    fn from(e: CrowdError) -> Self {
        match e {
            CrowdError::InvalidConfig(message) => ServiceError::InvalidConfig(message),
            CrowdError::Io(io) => ServiceError::Io(io),
            other => ServiceError::Crowd(other),
        }
    }
}

impl ErrorCode for ServiceError {
    fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownMap(_) => "UnknownMap",
            ServiceError::MapExists(_) => "MapExists",
            ServiceError::InvalidMap(_) => "InvalidMap",
            ServiceError::UnknownSession(_) => "UnknownSession",
            ServiceError::InvalidConfig(_) => "InvalidConfig",
            ServiceError::SessionNotLive => "SessionNotLive",
            ServiceError::SessionEnded => "SessionEnded",
            ServiceError::InvalidTransition(_) => "InvalidTransition",
            ServiceError::OutOfBounds { .. } => "OutOfBounds",
            ServiceError::UnknownParticipant => "UnknownParticipant",
            ServiceError::BadRequest(_) => "BadRequest",
            ServiceError::Ingest(e) => e.code(),
            ServiceError::Model(e) => e.code(),
            ServiceError::Merge(e) => e.code(),
            ServiceError::Query(e) => e.code(),
            ServiceError::Crowd(e) => e.code(),
            ServiceError::Io(_) => "IoError",
        }
    }
}
