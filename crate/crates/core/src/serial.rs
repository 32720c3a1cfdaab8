//! Canonical JSON form of a [`TopicMap`].
//!
//! Object keys come out in lexicographic order and arrays are sorted, so two
//! equal maps always produce byte-identical documents.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::model::{
    Association, AssociationType, Occurrence, OccurrenceClass, Scope, SlideRef,
    SubjectIdentifier, Topic, TopicMap,
};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapDoc {
    map_id: String,
    topics: BTreeMap<SubjectIdentifier, TopicDoc>,
    occurrences: BTreeMap<SlideRef, OccurrenceDoc>,
    associations: Vec<AssociationDoc>,
    scopes: Vec<ScopeDoc>,
    corridors: BTreeMap<String, Vec<SlideRef>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TopicDoc {
    display_names: BTreeSet<String>,
    occurrences: BTreeSet<SlideRef>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OccurrenceDoc {
    body: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    checkpoint: Option<String>,
    class: OccurrenceClass,
    ordinal: Option<u32>,
    refs: BTreeSet<SlideRef>,
    title: String,
    topics: Vec<SubjectIdentifier>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AssociationDoc {
    members: BTreeMap<String, SubjectIdentifier>,
    #[serde(rename = "type")]
    kind: AssociationType,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScopeDoc {
    slides: BTreeSet<SlideRef>,
    topics: BTreeSet<SubjectIdentifier>,
}

impl From<&Association> for AssociationDoc {
    fn from(a: &Association) -> Self {
        let (first, second) = a.kind.roles();
        let members = BTreeMap::from([
            (first.as_str().to_string(), a.from.clone()),
            (second.as_str().to_string(), a.to.clone()),
        ]);
        AssociationDoc {
            members,
            kind: a.kind,
        }
    }
}

impl TryFrom<AssociationDoc> for Association {
    type Error = ModelError;

    fn try_from(mut doc: AssociationDoc) -> Result<Self, Self::Error> {
        let (first, second) = doc.kind.roles();
        let invalid = || ModelError::InvalidMembers {
            kind: doc.kind.to_string(),
            detail: format!(
                "expected exactly {} and {}",
                first.as_str(),
                second.as_str()
            ),
        };
        if doc.members.len() != 2 {
            return Err(invalid());
        }
        let from = doc.members.remove(first.as_str()).ok_or_else(invalid)?;
        let to = doc.members.remove(second.as_str()).ok_or_else(invalid)?;
        Ok(Association::new(doc.kind, from, to))
    }
}

fn to_doc(map: &TopicMap) -> MapDoc {
    let mut associations = map.associations.clone();
    associations.sort();
    let mut scopes = map.scopes.clone();
    scopes.sort();
    MapDoc {
        map_id: map.map_id.clone(),
        topics: map
            .topics
            .iter()
            .map(|(id, t)| {
                let doc = TopicDoc {
                    display_names: t.display_names.clone(),
                    occurrences: t.occurrence_refs.clone(),
                };
                (id.clone(), doc)
            })
            .collect(),
        occurrences: map
            .occurrences
            .iter()
            .map(|(slide, o)| {
                let doc = OccurrenceDoc {
                    body: o.body.clone(),
                    checkpoint: o.checkpoint.clone(),
                    class: o.class,
                    ordinal: o.ordinal,
                    refs: o.direct_refs.clone(),
                    title: o.title.clone(),
                    topics: o.topic_refs.clone(),
                };
                (slide.clone(), doc)
            })
            .collect(),
        associations: associations.iter().map(AssociationDoc::from).collect(),
        scopes: scopes
            .into_iter()
            .map(|s| ScopeDoc {
                slides: s.shared_slides,
                topics: s.topic_set,
            })
            .collect(),
        corridors: map.corridors.clone(),
    }
}

fn from_doc(doc: MapDoc) -> Result<TopicMap, ModelError> {
    let mut associations = doc
        .associations
        .into_iter()
        .map(Association::try_from)
        .collect::<Result<Vec<_>, _>>()?;
    // duplicates are kept so that validation can report them
    associations.sort();
    let mut scopes: Vec<Scope> = doc
        .scopes
        .into_iter()
        .map(|s| Scope {
            topic_set: s.topics,
            shared_slides: s.slides,
        })
        .collect();
    scopes.sort();
    Ok(TopicMap {
        map_id: doc.map_id,
        topics: doc
            .topics
            .into_iter()
            .map(|(id, t)| {
                let topic = Topic {
                    id: id.clone(),
                    display_names: t.display_names,
                    occurrence_refs: t.occurrences,
                };
                (id, topic)
            })
            .collect(),
        occurrences: doc
            .occurrences
            .into_iter()
            .map(|(slide, o)| {
                let occurrence = Occurrence {
                    slide_ref: slide.clone(),
                    ordinal: o.ordinal,
                    class: o.class,
                    title: o.title,
                    body: o.body,
                    topic_refs: o.topics,
                    direct_refs: o.refs,
                    checkpoint: o.checkpoint,
                };
                (slide, occurrence)
            })
            .collect(),
        associations,
        scopes,
        corridors: doc.corridors,
    })
}

/// Canonical pretty-printed document, newline terminated.
pub fn to_json(map: &TopicMap) -> String {
    let mut out = serde_json::to_string_pretty(&to_doc(map)).expect("map document serializes");
    out.push('\n');
    out
}

pub fn from_json(bytes: &[u8]) -> Result<TopicMap, ModelError> {
    let doc: MapDoc = serde_json::from_slice(bytes)?;
    from_doc(doc)
}

impl Serialize for Association {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        AssociationDoc::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Association {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = AssociationDoc::deserialize(deserializer)?;
        Association::try_from(doc).map_err(serde::de::Error::custom)
    }
}

impl Serialize for TopicMap {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        to_doc(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TopicMap {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = MapDoc::deserialize(deserializer)?;
        from_doc(doc).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::normalize_label;

    #[test]
    fn association_members_must_match_type() {
        let bad = r#"{"map_id":"m","topics":{},"occurrences":{},"corridors":{},"scopes":[],
            "associations":[{"type":"TEMPORAL_CONTINUITY","members":{"SOURCE":"a","TARGET":"b"}}]}"#;
        assert!(matches!(
            from_json(bad.as_bytes()),
            Err(ModelError::InvalidMembers { .. })
        ));
        let three = r#"{"map_id":"m","topics":{},"occurrences":{},"corridors":{},"scopes":[],
            "associations":[{"type":"DISCUSSION","members":{"SOURCE":"a","TARGET":"b","PREDECESSOR":"c"}}]}"#;
        assert!(from_json(three.as_bytes()).is_err());
    }

    #[test]
    fn member_keys_sorted() {
        let mut map = TopicMap::empty("m");
        map.associations.push(Association::preliminary(
            normalize_label("graphs").unwrap(),
            normalize_label("trees").unwrap(),
        ));
        let json = to_json(&map);
        let dep = json.find("DEPENDENT").unwrap();
        let pre = json.find("PREREQUISITE").unwrap();
        assert!(dep < pre);
        assert!(json.starts_with("{\n  \"map_id\""));
    }

    #[test]
    fn non_canonical_identifier_rejected() {
        let bad = r#"{"map_id":"m","topics":{"Graphs":{"display_names":[],"occurrences":[]}},
            "occurrences":{},"corridors":{},"scopes":[],"associations":[]}"#;
        assert!(from_json(bad.as_bytes()).is_err());
    }
}
