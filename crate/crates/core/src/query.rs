//! Assistance and navigation queries over a topic map.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::error::QueryError;
use crate::model::{
    AssociationType, OccurrenceClass, SlideRef, SubjectIdentifier, TopicMap,
};

/// Upper bound on the number of paths returned by [`approaching_paths`].
pub const MAX_APPROACHING_PATHS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "reason")]
pub enum Reason {
    #[serde(rename = "SAME_SUBJECT")]
    SameSubject,
    /// Material of a prerequisite topic `depth` steps away.
    #[serde(rename = "PRELIMINARY")]
    Preliminary { depth: usize },
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reason::SameSubject => f.write_str("SAME_SUBJECT"),
            Reason::Preliminary { depth } => write!(f, "PRELIMINARY({depth})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Assist {
    pub slide: SlideRef,
    #[serde(flatten)]
    pub reason: Reason,
}

/// Prerequisite edges, keyed by dependent.
fn prerequisites(map: &TopicMap) -> BTreeMap<&SubjectIdentifier, BTreeSet<&SubjectIdentifier>> {
    let mut out: BTreeMap<_, BTreeSet<_>> = BTreeMap::new();
    for a in map.associations_of(AssociationType::PreliminaryKnowledge) {
        out.entry(&a.to).or_default().insert(&a.from);
    }
    out
}

/// Transitive prerequisites of `topic` with their breadth-first depth,
/// ordered by depth and then identifier.
pub fn preliminary_closure(
    map: &TopicMap,
    topic: &SubjectIdentifier,
) -> Result<Vec<(SubjectIdentifier, usize)>, QueryError> {
    if !map.topics.contains_key(topic) {
        return Err(QueryError::UnknownTopic(topic.to_string()));
    }
    let edges = prerequisites(map);
    let mut depth: BTreeMap<&SubjectIdentifier, usize> = BTreeMap::from([(topic, 0)]);
    let mut queue = VecDeque::from([topic]);
    while let Some(current) = queue.pop_front() {
        let next = depth[current] + 1;
        for &prerequisite in edges.get(current).into_iter().flatten() {
            if !depth.contains_key(prerequisite) {
                depth.insert(prerequisite, next);
                queue.push_back(prerequisite);
            }
        }
    }

    if let Some(cycle) = find_cycle(&edges, depth.keys().copied()) {
        return Err(QueryError::CycleDetected {
            topic: topic.to_string(),
            cycle: cycle.into_iter().map(|t| t.to_string()).collect(),
        });
    }

    let mut out: Vec<(SubjectIdentifier, usize)> = depth
        .into_iter()
        .filter(|(t, _)| *t != topic)
        .map(|(t, d)| (t.clone(), d))
        .collect();
    out.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    Ok(out)
}

/// Depth-first search restricted to `nodes`; returns one cycle if any exists.
fn find_cycle<'a>(
    edges: &BTreeMap<&'a SubjectIdentifier, BTreeSet<&'a SubjectIdentifier>>,
    nodes: impl Iterator<Item = &'a SubjectIdentifier>,
) -> Option<Vec<&'a SubjectIdentifier>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    let mut marks: BTreeMap<&SubjectIdentifier, Mark> = BTreeMap::new();
    for root in nodes {
        if marks.contains_key(root) {
            continue;
        }
        // explicit stack of (node, remaining successors)
        let mut stack: Vec<(&SubjectIdentifier, Vec<&SubjectIdentifier>)> = Vec::new();
        marks.insert(root, Mark::Open);
        stack.push((root, edges.get(root).into_iter().flatten().copied().collect()));
        while let Some((node, successors)) = stack.last_mut() {
            let node = *node;
            match successors.pop() {
                Some(next) => match marks.get(next) {
                    Some(Mark::Open) => {
                        let start = stack.iter().position(|(n, _)| *n == next).unwrap_or(0);
                        let mut cycle: Vec<_> = stack[start..].iter().map(|(n, _)| *n).collect();
                        cycle.push(next);
                        return Some(cycle);
                    }
                    Some(Mark::Done) => {}
                    None => {
                        marks.insert(next, Mark::Open);
                        stack.push((next, edges.get(next).into_iter().flatten().copied().collect()));
                    }
                },
                None => {
                    marks.insert(node, Mark::Done);
                    stack.pop();
                }
            }
        }
    }
    None
}

/// Slides that help with `slide`: same-subject definitions and examples
/// first, then definitions, examples and summaries of prerequisite topics.
pub fn assistance(map: &TopicMap, slide: &SlideRef) -> Result<Vec<Assist>, QueryError> {
    let query = map
        .occurrence(slide)
        .ok_or_else(|| QueryError::UnknownSlide(slide.to_string()))?;
    let query_topics: BTreeSet<&SubjectIdentifier> = query.topic_refs.iter().collect();
    // corridor slides by ordinal, supplementary material after them
    let position = |o: &crate::model::Occurrence| o.ordinal.unwrap_or(u32::MAX);

    let mut same_subject: Vec<(usize, u32, &SlideRef)> = map
        .occurrences
        .values()
        .filter(|o| o.slide_ref != *slide)
        .filter(|o| matches!(o.class, OccurrenceClass::Definition | OccurrenceClass::Example))
        .filter_map(|o| {
            let shared = o.topic_refs.iter().filter(|t| query_topics.contains(t)).count();
            (shared > 0).then_some((shared, position(o), &o.slide_ref))
        })
        .collect();
    same_subject.sort_by_key(|&(shared, ordinal, slide)| (Reverse(shared), ordinal, slide));

    let mut closure: BTreeMap<SubjectIdentifier, usize> = BTreeMap::new();
    for topic in &query_topics {
        for (prerequisite, depth) in preliminary_closure(map, topic)? {
            let entry = closure.entry(prerequisite).or_insert(depth);
            *entry = (*entry).min(depth);
        }
    }
    let mut preliminary: Vec<(usize, u32, &SlideRef)> = map
        .occurrences
        .values()
        .filter(|o| o.slide_ref != *slide)
        .filter(|o| {
            matches!(
                o.class,
                OccurrenceClass::Definition | OccurrenceClass::Example | OccurrenceClass::Summary
            )
        })
        .filter_map(|o| {
            let depth = o.topic_refs.iter().filter_map(|t| closure.get(t)).min()?;
            Some((*depth, position(o), &o.slide_ref))
        })
        .collect();
    preliminary.sort();

    let mut seen = BTreeSet::new();
    let tiers = same_subject
        .into_iter()
        .map(|(_, _, s)| (s, Reason::SameSubject))
        .chain(preliminary.into_iter().map(|(depth, _, s)| (s, Reason::Preliminary { depth })));
    Ok(tiers
        .filter(|(s, _)| seen.insert(*s))
        .map(|(s, reason)| Assist {
            slide: s.clone(),
            reason,
        })
        .collect())
}

/// A route of topics ending at the queried topic; `via[i]` labels the edge
/// from `topics[i]` to `topics[i + 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApproachPath {
    pub topics: Vec<SubjectIdentifier>,
    pub via: Vec<AssociationType>,
}

impl ApproachPath {
    /// Paths are ordered by their first topic, then step by step by
    /// (next topic, edge type).
    pub fn sort_key(&self) -> Vec<(&SubjectIdentifier, Option<AssociationType>)> {
        let first = self.topics.iter().take(1).map(|t| (t, None));
        let rest = self.topics.iter().skip(1).zip(&self.via).map(|(t, v)| (t, Some(*v)));
        first.chain(rest).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApproachPaths {
    pub paths: Vec<ApproachPath>,
    /// More than [`MAX_APPROACHING_PATHS`] paths exist.
    pub truncated: bool,
}

/// Simple paths of at most `max_len` edges that end at `topic`, over
/// temporal continuity (predecessor to successor) and preliminary knowledge
/// (prerequisite to dependent) edges.
pub fn approaching_paths(
    map: &TopicMap,
    topic: &SubjectIdentifier,
    max_len: usize,
) -> Result<ApproachPaths, QueryError> {
    if !map.topics.contains_key(topic) {
        return Err(QueryError::UnknownTopic(topic.to_string()));
    }
    if max_len == 0 {
        return Err(QueryError::InvalidArgument("max_len must be at least 1".into()));
    }

    let mut outgoing: BTreeMap<&SubjectIdentifier, BTreeSet<(&SubjectIdentifier, AssociationType)>> =
        BTreeMap::new();
    let mut incoming: BTreeMap<&SubjectIdentifier, BTreeSet<&SubjectIdentifier>> = BTreeMap::new();
    for a in &map.associations {
        if matches!(a.kind, AssociationType::TemporalContinuity | AssociationType::PreliminaryKnowledge) {
            outgoing.entry(&a.from).or_default().insert((&a.to, a.kind));
            incoming.entry(&a.to).or_default().insert(&a.from);
        }
    }

    // shortest distance to the target, used to prune hopeless branches
    let mut distance: BTreeMap<&SubjectIdentifier, usize> = BTreeMap::from([(topic, 0)]);
    let mut queue = VecDeque::from([topic]);
    while let Some(node) = queue.pop_front() {
        let d = distance[node] + 1;
        for &prev in incoming.get(node).into_iter().flatten() {
            if !distance.contains_key(prev) {
                distance.insert(prev, d);
                queue.push_back(prev);
            }
        }
    }

    let mut search = PathSearch {
        outgoing: &outgoing,
        distance: &distance,
        target: topic,
        max_len,
        topics: Vec::new(),
        via: Vec::new(),
        found: Vec::new(),
    };
    for (&start, &d) in &distance {
        if start == topic || d > max_len {
            continue;
        }
        search.topics.push(start);
        search.extend();
        search.topics.pop();
        if search.full() {
            break;
        }
    }
    let truncated = search.found.len() > MAX_APPROACHING_PATHS;
    let mut paths = search.found;
    paths.truncate(MAX_APPROACHING_PATHS);
    debug_assert!(paths.windows(2).all(|w| w[0].sort_key() < w[1].sort_key()));
    Ok(ApproachPaths { paths, truncated })
}

struct PathSearch<'a> {
    outgoing: &'a BTreeMap<&'a SubjectIdentifier, BTreeSet<(&'a SubjectIdentifier, AssociationType)>>,
    distance: &'a BTreeMap<&'a SubjectIdentifier, usize>,
    target: &'a SubjectIdentifier,
    max_len: usize,
    topics: Vec<&'a SubjectIdentifier>,
    via: Vec<AssociationType>,
    found: Vec<ApproachPath>,
}

impl<'a> PathSearch<'a> {
    fn full(&self) -> bool {
        self.found.len() > MAX_APPROACHING_PATHS
    }

    // Visiting successors in (topic, type) order emits paths already sorted.
    fn extend(&mut self) {
        let current = *self.topics.last().expect("path has a start");
        let used = self.via.len() + 1;
        let Some(successors) = self.outgoing.get(current) else {
            return;
        };
        for &(next, kind) in successors {
            if self.full() {
                return;
            }
            if next == self.target {
                self.via.push(kind);
                self.topics.push(next);
                self.found.push(ApproachPath {
                    topics: self.topics.iter().map(|&t| t.clone()).collect(),
                    via: self.via.clone(),
                });
                self.topics.pop();
                self.via.pop();
                continue;
            }
            let reachable = self.distance.get(next).is_some_and(|d| used + d <= self.max_len);
            if reachable && !self.topics.contains(&next) {
                self.via.push(kind);
                self.topics.push(next);
                self.extend();
                self.topics.pop();
                self.via.pop();
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorridorEntry {
    pub slide: SlideRef,
    pub ordinal: u32,
    pub anchors: Vec<SubjectIdentifier>,
    pub class: OccurrenceClass,
}

/// The deck's slides in talk order with their anchors and classes.
pub fn corridor(map: &TopicMap, deck_id: &str) -> Result<Vec<CorridorEntry>, QueryError> {
    let slides = map
        .corridors
        .get(deck_id)
        .ok_or_else(|| QueryError::UnknownDeck(deck_id.to_string()))?;
    Ok(slides
        .iter()
        .filter_map(|slide| map.occurrence(slide))
        .filter_map(|o| {
            Some(CorridorEntry {
                slide: o.slide_ref.clone(),
                ordinal: o.ordinal?,
                anchors: o.topic_refs.clone(),
                class: o.class,
            })
        })
        .collect())
}
