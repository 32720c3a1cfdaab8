//! Topic Map domain types.
//!
//! A [`TopicMap`] is a network of [`Topic`]s (normalized keywords), the
//! [`Occurrence`]s (slides) attached to them, typed [`Association`]s between
//! topics, derived [`Scope`]s and the per-deck slide corridors. Everything in
//! here is plain data; the invariants are checked by [`crate::validate`].

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ModelError;

/// Normalized label under which topics are identified and merged.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubjectIdentifier(String);

impl SubjectIdentifier {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Accepts only strings that are already in normal form.
    pub fn from_canonical(value: &str) -> Result<Self, ModelError> {
        let id = normalize_label(value)?;
        if id.0 != value {
            return Err(ModelError::NonCanonicalIdentifier(value.to_string()));
        }
        Ok(id)
    }
}

impl fmt::Display for SubjectIdentifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for SubjectIdentifier {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl Serialize for SubjectIdentifier {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for SubjectIdentifier {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        SubjectIdentifier::from_canonical(&raw).map_err(serde::de::Error::custom)
    }
}

/// Case-folds, trims and joins internal whitespace runs with `-`.
///
/// ```
/// use lectern::normalize_label;
/// assert_eq!(normalize_label("Topic  Maps ").unwrap().as_str(), "topic-maps");
/// ```
pub fn normalize_label(raw: &str) -> Result<SubjectIdentifier, ModelError> {
    let folded = caseless::default_case_fold_str(raw);
    let joined = folded.split_whitespace().collect::<Vec<_>>().join("-");
    if joined.is_empty() {
        return Err(ModelError::EmptyLabel);
    }
    Ok(SubjectIdentifier(joined))
}

/// Slide address: `deck_id/slide_id`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SlideRef {
    pub deck_id: String,
    pub slide_id: String,
}

impl SlideRef {
    pub fn new(deck_id: impl Into<String>, slide_id: impl Into<String>) -> Self {
        SlideRef {
            deck_id: deck_id.into(),
            slide_id: slide_id.into(),
        }
    }

    fn key_bytes(&self) -> impl Iterator<Item = u8> + '_ {
        self.deck_id
            .bytes()
            .chain(std::iter::once(b'/'))
            .chain(self.slide_id.bytes())
    }
}

/// Ids may not be empty or contain the `/` separator.
pub fn is_valid_id(id: &str) -> bool {
    !id.is_empty() && !id.contains('/')
}

// Ordered like the rendered `deck/slide` string so that maps keyed by
// SlideRef serialize in lexicographic key order.
impl Ord for SlideRef {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key_bytes().cmp(other.key_bytes())
    }
}

impl PartialOrd for SlideRef {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SlideRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.deck_id, self.slide_id)
    }
}

impl FromStr for SlideRef {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('/') {
            Some((deck, slide)) if is_valid_id(deck) && is_valid_id(slide) => {
                Ok(SlideRef::new(deck, slide))
            }
            _ => Err(ModelError::InvalidSlideRef(s.to_string())),
        }
    }
}

impl Serialize for SlideRef {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SlideRef {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// Declared objective of a slide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OccurrenceClass {
    NewTopic,
    Definition,
    Example,
    Summary,
    Agenda,
    Overview,
    #[default]
    Fact,
}

impl OccurrenceClass {
    pub const ALL: [OccurrenceClass; 7] = [
        OccurrenceClass::NewTopic,
        OccurrenceClass::Definition,
        OccurrenceClass::Example,
        OccurrenceClass::Summary,
        OccurrenceClass::Agenda,
        OccurrenceClass::Overview,
        OccurrenceClass::Fact,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OccurrenceClass::NewTopic => "NEW_TOPIC",
            OccurrenceClass::Definition => "DEFINITION",
            OccurrenceClass::Example => "EXAMPLE",
            OccurrenceClass::Summary => "SUMMARY",
            OccurrenceClass::Agenda => "AGENDA",
            OccurrenceClass::Overview => "OVERVIEW",
            OccurrenceClass::Fact => "FACT",
        }
    }
}

impl fmt::Display for OccurrenceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Case-insensitive; `-` and spaces are accepted in place of `_`.
impl FromStr for OccurrenceClass {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted: String = s
            .trim()
            .chars()
            .map(|c| match c {
                '-' | ' ' => '_',
                c => c.to_ascii_uppercase(),
            })
            .collect();
        OccurrenceClass::ALL
            .into_iter()
            .find(|class| class.as_str() == wanted)
            .ok_or_else(|| ModelError::UnknownClass(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topic {
    pub id: SubjectIdentifier,
    pub display_names: BTreeSet<String>,
    pub occurrence_refs: BTreeSet<SlideRef>,
}

impl Topic {
    pub fn new(id: SubjectIdentifier) -> Self {
        Topic {
            id,
            display_names: BTreeSet::new(),
            occurrence_refs: BTreeSet::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Occurrence {
    pub slide_ref: SlideRef,
    /// Corridor position; `None` for supplementary material.
    pub ordinal: Option<u32>,
    pub class: OccurrenceClass,
    pub title: String,
    pub body: String,
    /// Anchors in declaration order; the first one is the primary anchor.
    pub topic_refs: Vec<SubjectIdentifier>,
    pub direct_refs: BTreeSet<SlideRef>,
    /// Lecturer-declared checkpoint label.
    pub checkpoint: Option<String>,
}

impl Occurrence {
    pub fn is_supplementary(&self) -> bool {
        self.ordinal.is_none()
    }

    pub fn has_topic(&self, id: &SubjectIdentifier) -> bool {
        self.topic_refs.contains(id)
    }
}

/// Variant order is the canonical sort order for associations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AssociationType {
    TemporalContinuity,
    PreliminaryKnowledge,
    DirectReference,
    Discussion,
}

impl AssociationType {
    /// (first role, second role) for this type.
    pub fn roles(self) -> (Role, Role) {
        match self {
            AssociationType::TemporalContinuity => (Role::Predecessor, Role::Successor),
            AssociationType::PreliminaryKnowledge => (Role::Prerequisite, Role::Dependent),
            AssociationType::DirectReference | AssociationType::Discussion => {
                (Role::Source, Role::Target)
            }
        }
    }
}

impl fmt::Display for AssociationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            AssociationType::TemporalContinuity => "TEMPORAL_CONTINUITY",
            AssociationType::PreliminaryKnowledge => "PRELIMINARY_KNOWLEDGE",
            AssociationType::DirectReference => "DIRECT_REFERENCE",
            AssociationType::Discussion => "DISCUSSION",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Role {
    Predecessor,
    Successor,
    Prerequisite,
    Dependent,
    Source,
    Target,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Predecessor => "PREDECESSOR",
            Role::Successor => "SUCCESSOR",
            Role::Prerequisite => "PREREQUISITE",
            Role::Dependent => "DEPENDENT",
            Role::Source => "SOURCE",
            Role::Target => "TARGET",
        }
    }
}

/// Typed binary relation between topics.
///
/// `from` plays the first role of the type (predecessor, prerequisite,
/// source) and `to` the second. Derived ordering is (type, from, to).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Association {
    pub kind: AssociationType,
    pub from: SubjectIdentifier,
    pub to: SubjectIdentifier,
}

impl Association {
    pub fn new(kind: AssociationType, from: SubjectIdentifier, to: SubjectIdentifier) -> Self {
        Association { kind, from, to }
    }

    pub fn temporal(predecessor: SubjectIdentifier, successor: SubjectIdentifier) -> Self {
        Self::new(AssociationType::TemporalContinuity, predecessor, successor)
    }

    pub fn preliminary(prerequisite: SubjectIdentifier, dependent: SubjectIdentifier) -> Self {
        Self::new(AssociationType::PreliminaryKnowledge, prerequisite, dependent)
    }

    pub fn member(&self, role: Role) -> Option<&SubjectIdentifier> {
        let (first, second) = self.kind.roles();
        if role == first {
            Some(&self.from)
        } else if role == second {
            Some(&self.to)
        } else {
            None
        }
    }
}

impl fmt::Display for Association {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({} -> {})", self.kind, self.from, self.to)
    }
}

/// Context formed by topics that share slides.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Scope {
    pub topic_set: BTreeSet<SubjectIdentifier>,
    pub shared_slides: BTreeSet<SlideRef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicMap {
    pub map_id: String,
    pub topics: BTreeMap<SubjectIdentifier, Topic>,
    pub occurrences: BTreeMap<SlideRef, Occurrence>,
    /// Kept sorted and free of duplicates by every operation in this crate.
    pub associations: Vec<Association>,
    /// Cache of [`crate::graph::infer_scopes`]; see [`TopicMap::refresh`].
    pub scopes: Vec<Scope>,
    pub corridors: BTreeMap<String, Vec<SlideRef>>,
}

impl TopicMap {
    pub fn empty(map_id: impl Into<String>) -> Self {
        TopicMap {
            map_id: map_id.into(),
            topics: BTreeMap::new(),
            occurrences: BTreeMap::new(),
            associations: Vec::new(),
            scopes: Vec::new(),
            corridors: BTreeMap::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.topics.is_empty() && self.occurrences.is_empty()
    }

    pub fn topic(&self, id: &SubjectIdentifier) -> Option<&Topic> {
        self.topics.get(id)
    }

    pub fn occurrence(&self, slide: &SlideRef) -> Option<&Occurrence> {
        self.occurrences.get(slide)
    }

    /// Every deck that contributed occurrences or a corridor.
    pub fn deck_ids(&self) -> BTreeSet<&str> {
        self.occurrences
            .keys()
            .map(|s| s.deck_id.as_str())
            .chain(self.corridors.keys().map(String::as_str))
            .collect()
    }

    pub fn associations_of(&self, kind: AssociationType) -> impl Iterator<Item = &Association> {
        self.associations.iter().filter(move |a| a.kind == kind)
    }

    /// Resolves `deck/slide`, or a bare slide id when exactly one deck has it.
    pub fn resolve_slide(&self, spec: &str) -> Option<SlideRef> {
        if let Ok(slide) = spec.parse::<SlideRef>() {
            return self.occurrences.contains_key(&slide).then_some(slide);
        }
        let mut found = self.occurrences.keys().filter(|s| s.slide_id == spec);
        match (found.next(), found.next()) {
            (Some(slide), None) => Some(slide.clone()),
            _ => None,
        }
    }

    /// Sorts and deduplicates associations and recomputes scopes.
    pub fn refresh(&mut self) {
        self.associations.sort();
        self.associations.dedup();
        self.scopes = crate::graph::infer_scopes(&self.occurrences);
    }
}
