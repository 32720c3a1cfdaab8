use thiserror::Error;

/// Machine-readable error name, stable across releases.
pub trait ErrorCode {
    fn code(&self) -> &'static str;
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("label is empty after normalization")]
    EmptyLabel,
    #[error("identifier {0:?} is not in normal form")]
    NonCanonicalIdentifier(String),
    #[error("invalid slide reference {0:?}, expected deck_id/slide_id")]
    InvalidSlideRef(String),
    #[error("unknown occurrence class {0:?}")]
    UnknownClass(String),
    #[error("association of type {kind} has invalid members: {detail}")]
    InvalidMembers { kind: String, detail: String },
    #[error("malformed topic map document: {0}")]
    Json(#[from] serde_json::Error),
}

impl ErrorCode for ModelError {
    fn code(&self) -> &'static str {
        match self {
            ModelError::EmptyLabel => "EmptyLabel",
            ModelError::UnknownClass(_) => "UnknownClass",
            _ => "MalformedDocument",
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed deck at {location}: {message}")]
    MalformedDocument { location: String, message: String },
    #[error("unknown class {class:?} on slide {slide_id}")]
    UnknownClass { slide_id: String, class: String },
    #[error("duplicate slide id {0:?}")]
    DuplicateSlideId(String),
    #[error("{location} references {target:?}, which does not exist in the deck")]
    DanglingReference { location: String, target: String },
    #[error("empty label at {0}")]
    EmptyLabel(String),
}

impl IngestError {
    pub(crate) fn malformed(location: impl Into<String>, message: impl Into<String>) -> Self {
        IngestError::MalformedDocument {
            location: location.into(),
            message: message.into(),
        }
    }
}

impl ErrorCode for IngestError {
    fn code(&self) -> &'static str {
        match self {
            IngestError::MalformedDocument { .. } => "MalformedDocument",
            IngestError::UnknownClass { .. } => "UnknownClass",
            IngestError::DuplicateSlideId(_) => "DuplicateSlideId",
            IngestError::DanglingReference { .. } => "DanglingReference",
            IngestError::EmptyLabel(_) => "EmptyLabel",
        }
    }
}

#[derive(Debug, Error)]
pub enum MergeError {
    #[error("deck ids present in both maps: {}", .0.join(", "))]
    DeckCollision(Vec<String>),
}

impl ErrorCode for MergeError {
    fn code(&self) -> &'static str {
        "DeckCollision"
    }
}

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("unknown slide {0:?}")]
    UnknownSlide(String),
    #[error("unknown topic {0:?}")]
    UnknownTopic(String),
    #[error("unknown deck {0:?}")]
    UnknownDeck(String),
    #[error("prerequisite cycle reachable from {topic}: {}", .cycle.join(" -> "))]
    CycleDetected { topic: String, cycle: Vec<String> },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl ErrorCode for QueryError {
    fn code(&self) -> &'static str {
        match self {
            QueryError::UnknownSlide(_) => "UnknownSlide",
            QueryError::UnknownTopic(_) => "UnknownTopic",
            QueryError::UnknownDeck(_) => "UnknownDeck",
            QueryError::CycleDetected { .. } => "CycleDetected",
            QueryError::InvalidArgument(_) => "InvalidArgument",
        }
    }
}

#[derive(Debug, Error)]
pub enum CrowdError {
    #[error("unknown slide {0}")]
    UnknownSlide(String),
    #[error("unknown comprehension class {0:?}")]
    UnknownClass(String),
    #[error("empty tag label")]
    EmptyLabel,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed annotation log at line {line}: {message}")]
    MalformedLog { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ErrorCode for CrowdError {
    fn code(&self) -> &'static str {
        match self {
            CrowdError::UnknownSlide(_) => "UnknownSlide",
            CrowdError::UnknownClass(_) => "UnknownClass",
            CrowdError::EmptyLabel => "EmptyLabel",
            CrowdError::InvalidConfig(_) => "InvalidConfig",
            CrowdError::MalformedLog { .. } => "MalformedDocument",
            CrowdError::Io(_) => "IoError",
        }
    }
}
