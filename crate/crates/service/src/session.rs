//! Live session state machine.

use std::collections::BTreeSet;

use lectern::crowd::{ComprehensionClasses, ReportConfig};
use lectern::SlideRef;
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SessionState {
    Created,
    Live,
    Ended,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub classes: ComprehensionClasses,
    pub quorum: usize,
    pub threshold: f64,
    pub min_support: usize,
    /// Serve corridor slides ahead of the current position to the audience.
    pub reveal_future: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        let report = ReportConfig::default();
        SessionConfig {
            classes: ComprehensionClasses::default(),
            quorum: report.quorum,
            threshold: report.threshold,
            min_support: 2,
            reveal_future: false,
        }
    }
}

/// Partial configuration as accepted on session creation.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigPatch {
    pub classes: Option<Vec<String>>,
    pub positive: Option<String>,
    pub quorum: Option<usize>,
    pub threshold: Option<f64>,
    pub min_support: Option<usize>,
    pub reveal_future: Option<bool>,
}

impl ConfigPatch {
    pub fn resolve(self) -> Result<SessionConfig, ServiceError> {
        let defaults = SessionConfig::default();
        let classes = match (self.classes, self.positive) {
            (None, None) => defaults.classes,
            (labels, positive) => {
                let labels = labels.unwrap_or_else(|| defaults.classes.labels().to_vec());
                let positive = positive.or_else(|| labels.first().cloned()).unwrap_or_default();
                ComprehensionClasses::new(labels, positive)?
            }
        };
        let config = SessionConfig {
            classes,
            quorum: self.quorum.unwrap_or(defaults.quorum),
            threshold: self.threshold.unwrap_or(defaults.threshold),
            min_support: self.min_support.unwrap_or(defaults.min_support),
            reveal_future: self.reveal_future.unwrap_or(defaults.reveal_future),
        };
        config.report_config()?;
        if config.min_support < 1 {
            return Err(ServiceError::InvalidConfig("min_support must be at least 1".into()));
        }
        Ok(config)
    }
}

impl SessionConfig {
    pub fn report_config(&self) -> Result<ReportConfig, ServiceError> {
        Ok(ReportConfig::new(self.quorum, self.threshold)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Next,
    Ordinal(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub map_id: String,
    pub state: SessionState,
    pub position: u32,
    pub corridor_length: u32,
    pub config: SessionConfig,
    pub participants: BTreeSet<String>,
    /// Events other than annotation acknowledgments emitted so far.
    pub control_events: u64,
}

impl Session {
    pub fn new(session_id: String, map_id: String, corridor_length: u32, config: SessionConfig) -> Self {
        Session {
            session_id,
            map_id,
            state: SessionState::Created,
            position: 1,
            corridor_length,
            config,
            participants: BTreeSet::new(),
            control_events: 0,
        }
    }

    pub fn start(&mut self) -> Result<(), ServiceError> {
        match self.state {
            SessionState::Created if self.corridor_length == 0 => Err(ServiceError::OutOfBounds {
                requested: 1,
                length: 0,
            }),
            SessionState::Created => {
                self.state = SessionState::Live;
                self.control_events += 1;
                Ok(())
            }
            SessionState::Live => Err(ServiceError::InvalidTransition("session is already live".into())),
            SessionState::Ended => Err(ServiceError::SessionEnded),
        }
    }

    pub fn advance(&mut self, target: Target) -> Result<u32, ServiceError> {
        self.require_live()?;
        let requested = match target {
            Target::Next => self.position + 1,
            Target::Ordinal(n) => n,
        };
        if requested < 1 || requested > self.corridor_length {
            return Err(ServiceError::OutOfBounds {
                requested,
                length: self.corridor_length,
            });
        }
        self.position = requested;
        self.control_events += 1;
        Ok(requested)
    }

    pub fn end(&mut self) -> Result<(), ServiceError> {
        if self.state == SessionState::Ended {
            return Err(ServiceError::SessionEnded);
        }
        self.state = SessionState::Ended;
        self.control_events += 1;
        Ok(())
    }

    /// Registers a fresh participant token.
    pub fn join(&mut self, token: String) -> Result<(), ServiceError> {
        if self.state == SessionState::Ended {
            return Err(ServiceError::SessionEnded);
        }
        if !self.participants.insert(token) {
            return Err(ServiceError::InvalidTransition("participant token reissued".into()));
        }
        Ok(())
    }

    pub fn require_live(&self) -> Result<(), ServiceError> {
        match self.state {
            SessionState::Live => Ok(()),
            _ => Err(ServiceError::SessionNotLive),
        }
    }

    /// Whether the audience may see `ordinal` right now.
    pub fn is_released(&self, ordinal: Option<u32>) -> bool {
        match ordinal {
            None => true,
            Some(n) => self.config.reveal_future || self.state == SessionState::Ended || n <= self.position,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    SessionStarted { position: u32, slide: SlideRef },
    SlideChanged { position: u32, slide: SlideRef },
    AnnotationAccepted { annotation_seq: u64, accepted: u64 },
    SessionEnded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub seq: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}
