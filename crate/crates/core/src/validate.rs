//! Invariant checks over a [`TopicMap`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::graph::infer_scopes;
use crate::model::{normalize_label, SlideRef, TopicMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Invariant {
    /// Topic keyed under an id different from its own.
    TopicKey,
    /// Display name that does not normalize to the topic id.
    DisplayName,
    /// Occurrence keyed under a slide ref different from its own.
    OccurrenceKey,
    ReferentialClosure,
    /// Topic occurrence lists and occurrence topic lists disagree.
    Attachment,
    EmptyTopicRefs,
    DuplicateTopicRef,
    Ordinals,
    Corridor,
    SelfLoop,
    DuplicateAssociation,
    Scopes,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub element: String,
    pub invariant: Invariant,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{:?}]: {}", self.element, self.invariant, self.detail)
    }
}

struct Report(Vec<Violation>);

impl Report {
    fn push(&mut self, element: impl fmt::Display, invariant: Invariant, detail: impl Into<String>) {
        self.0.push(Violation {
            element: element.to_string(),
            invariant,
            detail: detail.into(),
        });
    }
}

/// Returns every broken invariant; an empty list means the map is well formed.
pub fn validate(map: &TopicMap) -> Vec<Violation> {
    let mut report = Report(Vec::new());
    check_topics(map, &mut report);
    check_occurrences(map, &mut report);
    check_corridors(map, &mut report);
    check_associations(map, &mut report);
    check_scopes(map, &mut report);
    report.0
}

fn check_topics(map: &TopicMap, report: &mut Report) {
    for (key, topic) in &map.topics {
        if *key != topic.id {
            report.push(key, Invariant::TopicKey, format!("stored under a different id than {}", topic.id));
        }
        for name in &topic.display_names {
            match normalize_label(name) {
                Ok(id) if id == topic.id => {}
                _ => report.push(key, Invariant::DisplayName, format!("display name {name:?} does not normalize to {key}")),
            }
        }
        for slide in &topic.occurrence_refs {
            match map.occurrences.get(slide) {
                None => report.push(key, Invariant::ReferentialClosure, format!("occurrence {slide} does not exist")),
                Some(o) if !o.has_topic(key) => report.push(
                    key,
                    Invariant::Attachment,
                    format!("lists occurrence {slide}, which is not attached to it"),
                ),
                Some(_) => {}
            }
        }
    }
}

fn check_occurrences(map: &TopicMap, report: &mut Report) {
    let mut ordinals: BTreeMap<&str, Vec<u32>> = BTreeMap::new();
    for (key, occurrence) in &map.occurrences {
        if *key != occurrence.slide_ref {
            report.push(key, Invariant::OccurrenceKey, format!("stored under a different ref than {}", occurrence.slide_ref));
        }
        if occurrence.topic_refs.is_empty() {
            report.push(key, Invariant::EmptyTopicRefs, "slide is not anchored to any topic");
        }
        let mut seen = BTreeSet::new();
        for id in &occurrence.topic_refs {
            if !seen.insert(id) {
                report.push(key, Invariant::DuplicateTopicRef, format!("topic {id} listed twice"));
            }
            match map.topics.get(id) {
                None => report.push(id, Invariant::ReferentialClosure, format!("topic referenced by {key} does not exist")),
                Some(t) if !t.occurrence_refs.contains(key) => report.push(
                    key,
                    Invariant::Attachment,
                    format!("attached to {id}, which does not list it"),
                ),
                Some(_) => {}
            }
        }
        for target in &occurrence.direct_refs {
            if !map.occurrences.contains_key(target) {
                report.push(target, Invariant::ReferentialClosure, format!("slide referenced by {key} does not exist"));
            }
        }
        if let Some(ordinal) = occurrence.ordinal {
            ordinals.entry(key.deck_id.as_str()).or_default().push(ordinal);
        }
    }
    for (deck, mut values) in ordinals {
        values.sort_unstable();
        let expected: Vec<u32> = (1..=values.len() as u32).collect();
        if values != expected {
            report.push(deck, Invariant::Ordinals, format!("corridor ordinals {values:?} are not 1..={}", values.len()));
        }
    }
}

fn check_corridors(map: &TopicMap, report: &mut Report) {
    let mut expected: BTreeMap<&str, Vec<(u32, &SlideRef)>> = BTreeMap::new();
    for (slide, occurrence) in &map.occurrences {
        if let Some(ordinal) = occurrence.ordinal {
            expected.entry(slide.deck_id.as_str()).or_default().push((ordinal, slide));
        }
    }
    for (deck, corridor) in &map.corridors {
        for slide in corridor {
            match map.occurrences.get(slide) {
                None => report.push(slide, Invariant::ReferentialClosure, format!("corridor {deck} lists a missing slide")),
                Some(o) if o.is_supplementary() => {
                    report.push(slide, Invariant::Corridor, format!("supplementary slide in corridor {deck}"))
                }
                Some(_) if slide.deck_id != *deck => {
                    report.push(slide, Invariant::Corridor, format!("slide of another deck in corridor {deck}"))
                }
                Some(_) => {}
            }
        }
    }
    for (deck, mut slides) in expected {
        slides.sort();
        let want: Vec<&SlideRef> = slides.into_iter().map(|(_, s)| s).collect();
        let have: Vec<&SlideRef> = map.corridors.get(deck).map(|c| c.iter().collect()).unwrap_or_default();
        if have != want {
            report.push(deck, Invariant::Corridor, "corridor is not the ordinal-ordered list of the deck's corridor slides");
        }
    }
}

fn check_associations(map: &TopicMap, report: &mut Report) {
    let mut seen = BTreeSet::new();
    for association in &map.associations {
        if association.from == association.to {
            report.push(association, Invariant::SelfLoop, "both members are the same topic");
        }
        for member in [&association.from, &association.to] {
            if !map.topics.contains_key(member) {
                report.push(member, Invariant::ReferentialClosure, format!("topic referenced by {association} does not exist"));
            }
        }
        if !seen.insert(association) {
            report.push(association, Invariant::DuplicateAssociation, "association listed more than once");
        }
    }
}

fn check_scopes(map: &TopicMap, report: &mut Report) {
    let mut stored = map.scopes.clone();
    stored.sort();
    if stored != infer_scopes(&map.occurrences) {
        report.push(&map.map_id, Invariant::Scopes, "stored scopes differ from the scopes inferred from occurrences");
    }
    for scope in &map.scopes {
        if scope.topic_set.len() < 2 || scope.shared_slides.is_empty() {
            let topics: Vec<&str> = scope.topic_set.iter().map(|t| t.as_str()).collect();
            report.push(topics.join("+"), Invariant::Scopes, "scope needs at least two topics and one shared slide");
        }
    }
}
