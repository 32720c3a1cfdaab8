//! Scope inference and identifier-based merging.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::MergeError;
use crate::model::{Occurrence, Scope, SlideRef, SubjectIdentifier, TopicMap};

/// Every slide anchored to two or more topics yields a scope over exactly
/// that topic set; its shared slides are all slides carrying the whole set.
pub fn infer_scopes(occurrences: &BTreeMap<SlideRef, Occurrence>) -> Vec<Scope> {
    let topic_sets: Vec<(&SlideRef, BTreeSet<&SubjectIdentifier>)> = occurrences
        .iter()
        .map(|(slide, o)| (slide, o.topic_refs.iter().collect()))
        .collect();

    let candidates: BTreeSet<&BTreeSet<&SubjectIdentifier>> = topic_sets
        .iter()
        .map(|(_, topics)| topics)
        .filter(|topics| topics.len() >= 2)
        .collect();

    candidates
        .into_iter()
        .map(|candidate| Scope {
            topic_set: candidate.iter().map(|&t| t.clone()).collect(),
            shared_slides: topic_sets
                .iter()
                .filter(|(_, topics)| candidate.is_subset(topics))
                .map(|(slide, _)| (*slide).clone())
                .collect(),
        })
        .collect()
}

/// Unifies topics with equal identifiers and keeps every occurrence,
/// association and corridor of both inputs.
///
/// The merged map id is the sorted, `+`-joined list of the non-empty input
/// ids, which makes the operation commutative.
pub fn merge(a: &TopicMap, b: &TopicMap) -> Result<TopicMap, MergeError> {
    let a_decks = a.deck_ids();
    let collisions: Vec<String> = b
        .deck_ids()
        .intersection(&a_decks)
        .map(|d| d.to_string())
        .collect();
    if !collisions.is_empty() {
        return Err(MergeError::DeckCollision(collisions));
    }

    let ids: BTreeSet<&str> = [a.map_id.as_str(), b.map_id.as_str()]
        .into_iter()
        .filter(|id| !id.is_empty())
        .collect();
    let mut merged = TopicMap::empty(ids.into_iter().collect::<Vec<_>>().join("+"));

    for source in [a, b] {
        for (id, topic) in &source.topics {
            let target = merged
                .topics
                .entry(id.clone())
                .or_insert_with(|| crate::model::Topic::new(id.clone()));
            target.display_names.extend(topic.display_names.iter().cloned());
            target.occurrence_refs.extend(topic.occurrence_refs.iter().cloned());
        }
        merged
            .occurrences
            .extend(source.occurrences.iter().map(|(k, v)| (k.clone(), v.clone())));
        merged.associations.extend(source.associations.iter().cloned());
        merged
            .corridors
            .extend(source.corridors.iter().map(|(k, v)| (k.clone(), v.clone())));
    }
    merged.refresh();
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{normalize_label, Association, OccurrenceClass, Topic};

    fn id(s: &str) -> SubjectIdentifier {
        normalize_label(s).unwrap()
    }

    fn occurrence(deck: &str, slide: &str, topics: &[&str]) -> Occurrence {
        Occurrence {
            slide_ref: SlideRef::new(deck, slide),
            ordinal: None,
            class: OccurrenceClass::Fact,
            title: String::new(),
            body: String::new(),
            topic_refs: topics.iter().map(|t| id(t)).collect(),
            direct_refs: BTreeSet::new(),
            checkpoint: None,
        }
    }

    fn slides(entries: &[(&str, &[&str])]) -> BTreeMap<SlideRef, Occurrence> {
        entries
            .iter()
            .map(|(slide, topics)| (SlideRef::new("d", *slide), occurrence("d", slide, topics)))
            .collect()
    }

    fn one_slide_map(deck: &str, slide: &str, label: &str) -> TopicMap {
        let mut map = TopicMap::empty(deck);
        let o = occurrence(deck, slide, &[label]);
        let mut topic = Topic::new(id(label));
        topic.display_names.insert(label.to_string());
        topic.occurrence_refs.insert(o.slide_ref.clone());
        map.topics.insert(topic.id.clone(), topic);
        map.occurrences.insert(o.slide_ref.clone(), o);
        map
    }

    #[test]
    fn single_multi_topic_slide_forms_scope() {
        let scopes = infer_scopes(&slides(&[("s1", &["graphs"]), ("s5", &["trees", "graphs"])]));
        assert_eq!(scopes.len(), 1);
        assert_eq!(scopes[0].topic_set, BTreeSet::from([id("graphs"), id("trees")]));
        assert_eq!(scopes[0].shared_slides, BTreeSet::from([SlideRef::new("d", "s5")]));
    }

    #[test]
    fn single_topic_slides_have_no_scopes() {
        assert!(infer_scopes(&slides(&[("s1", &["a"]), ("s2", &["b"])])).is_empty());
    }

    #[test]
    fn identical_sets_unify_and_supersets_share() {
        let scopes = infer_scopes(&slides(&[("s1", &["a", "b"]), ("s2", &["b", "a"]), ("s3", &["a", "b", "c"])]));
        assert_eq!(scopes.len(), 2);
        assert_eq!(scopes[0].topic_set, BTreeSet::from([id("a"), id("b")]));
        assert_eq!(scopes[0].shared_slides.len(), 3);
        assert_eq!(scopes[1].shared_slides, BTreeSet::from([SlideRef::new("d", "s3")]));
    }

    #[test]
    fn merge_unifies_equal_identifiers() {
        let a = one_slide_map("a", "a1", "graphs");
        let b = one_slide_map("b", "b1", "Graphs");
        let merged = merge(&a, &b).unwrap();
        assert_eq!(merged.topics.len(), 1);
        let topic = &merged.topics[&id("graphs")];
        assert_eq!(topic.occurrence_refs, BTreeSet::from([SlideRef::new("a", "a1"), SlideRef::new("b", "b1")]));
        assert_eq!(topic.display_names, BTreeSet::from(["Graphs".to_string(), "graphs".to_string()]));
        assert_eq!(merged.map_id, "a+b");
    }

    #[test]
    fn merge_with_empty_is_identity() {
        let a = one_slide_map("a", "a1", "graphs");
        assert_eq!(merge(&a, &TopicMap::empty("")).unwrap(), a);
    }

    #[test]
    fn merge_dedups_associations() {
        let mut a = one_slide_map("a", "a1", "graphs");
        let mut b = one_slide_map("b", "b1", "graphs");
        for map in [&mut a, &mut b] {
            map.associations.push(Association::temporal(id("graphs"), id("trees")));
        }
        assert_eq!(merge(&a, &b).unwrap().associations.len(), 1);
    }

    #[test]
    fn deck_collision() {
        let a = one_slide_map("a", "a1", "graphs");
        let err = merge(&a, &a).unwrap_err();
        assert!(matches!(err, MergeError::DeckCollision(d) if d == vec!["a".to_string()]));
    }
}
