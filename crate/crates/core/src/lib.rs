//! Semantic Topic Map networks for lecture slide decks.
//!
//! An annotated deck (slides in talk order, each anchored to topic labels)
//! is turned into a [`TopicMap`]: topics are the normalized labels, slides
//! are occurrences, consecutive slides yield temporal continuity
//! associations, declared prerequisites yield preliminary knowledge
//! associations, and topics sharing a slide form scopes. Maps from
//! different decks merge by subject identifier.
//!
//! On top of a map, [`query`] answers assistance and navigation questions
//! and [`crowd`] aggregates audience ratings, notes and bookmarks.

pub mod crowd;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod model;
pub mod query;
pub mod serial;
pub mod validate;

pub use error::{CrowdError, ErrorCode, IngestError, MergeError, ModelError, QueryError};
pub use graph::{infer_scopes, merge};
pub use ingest::{build_map, derive_temporal, ingest, parse_deck, AnnotatedDeck};
pub use model::{
    normalize_label, Association, AssociationType, Occurrence, OccurrenceClass, Role, Scope,
    SlideRef, SubjectIdentifier, Topic, TopicMap,
};
pub use validate::{validate, Violation};
