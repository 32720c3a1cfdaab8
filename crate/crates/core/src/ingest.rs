//! Annotated deck format and topic map construction.
//!
//! A deck is a JSON document listing the lecture's slides in talk order,
//! each anchored to one or more topic labels, plus topic-level
//! prerequisites and supplementary slides that sit outside the talk.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::IngestError;
use crate::model::{
    is_valid_id, normalize_label, Association, AssociationType, Occurrence, OccurrenceClass,
    SlideRef, SubjectIdentifier, Topic, TopicMap,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlideSpec {
    pub slide_id: String,
    pub title: String,
    pub body: String,
    pub class: OccurrenceClass,
    /// Raw topic labels, normalized when the map is built.
    pub topics: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub refs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Prerequisite {
    pub prerequisite: String,
    pub dependent: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnnotatedDeck {
    pub deck_id: String,
    pub title: String,
    pub slides: Vec<SlideSpec>,
    pub prerequisites: Vec<Prerequisite>,
    pub supplementary: Vec<SlideSpec>,
}

// Wire form: classes stay strings so unknown values surface as UnknownClass.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DeckDoc {
    deck_id: String,
    #[serde(default)]
    title: String,
    slides: Vec<SlideDoc>,
    #[serde(default)]
    prerequisites: Vec<PrerequisiteDoc>,
    #[serde(default)]
    supplementary: Vec<SlideDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SlideDoc {
    slide_id: String,
    #[serde(default)]
    title: String,
    #[serde(default)]
    body: String,
    #[serde(default)]
    class: Option<String>,
    topics: Vec<String>,
    #[serde(default)]
    refs: Vec<String>,
    #[serde(default)]
    checkpoint: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PrerequisiteDoc {
    prerequisite: String,
    dependent: String,
}

impl SlideDoc {
    fn into_spec(self) -> Result<SlideSpec, IngestError> {
        let class = match &self.class {
            None => OccurrenceClass::default(),
            Some(raw) => raw.parse().map_err(|_| IngestError::UnknownClass {
                slide_id: self.slide_id.clone(),
                class: raw.clone(),
            })?,
        };
        Ok(SlideSpec {
            slide_id: self.slide_id,
            title: self.title,
            body: self.body,
            class,
            topics: self.topics,
            refs: self.refs,
            checkpoint: self.checkpoint,
        })
    }
}

/// Parses and checks an annotated deck document.
pub fn parse_deck(document: &[u8]) -> Result<AnnotatedDeck, IngestError> {
    let text = std::str::from_utf8(document).map_err(|e| {
        IngestError::malformed(format!("byte {}", e.valid_up_to()), "document is not valid UTF-8")
    })?;
    let doc: DeckDoc = serde_json::from_str(text).map_err(|e| {
        IngestError::malformed(format!("line {} column {}", e.line(), e.column()), e.to_string())
    })?;
    let convert = |slides: Vec<SlideDoc>| {
        slides
            .into_iter()
            .map(SlideDoc::into_spec)
            .collect::<Result<Vec<_>, _>>()
    };
    let deck = AnnotatedDeck {
        deck_id: doc.deck_id,
        title: doc.title,
        slides: convert(doc.slides)?,
        prerequisites: doc
            .prerequisites
            .into_iter()
            .map(|p| Prerequisite {
                prerequisite: p.prerequisite,
                dependent: p.dependent,
            })
            .collect(),
        supplementary: convert(doc.supplementary)?,
    };
    deck.check()?;
    Ok(deck)
}

impl AnnotatedDeck {
    pub fn all_slides(&self) -> impl Iterator<Item = &SlideSpec> {
        self.slides.iter().chain(&self.supplementary)
    }

    /// Structural checks shared by [`parse_deck`] and [`build_map`].
    pub fn check(&self) -> Result<(), IngestError> {
        if !is_valid_id(&self.deck_id) {
            return Err(IngestError::malformed("deck_id", "must be non-empty and must not contain '/'"));
        }
        if self.slides.is_empty() {
            return Err(IngestError::malformed("slides", "a deck needs at least one corridor slide"));
        }
        let mut ids = BTreeSet::new();
        for slide in self.all_slides() {
            if !is_valid_id(&slide.slide_id) {
                return Err(IngestError::malformed(
                    format!("slide {:?}", slide.slide_id),
                    "slide_id must be non-empty and must not contain '/'",
                ));
            }
            if !ids.insert(slide.slide_id.as_str()) {
                return Err(IngestError::DuplicateSlideId(slide.slide_id.clone()));
            }
            if slide.topics.is_empty() {
                return Err(IngestError::malformed(
                    format!("slide {}", slide.slide_id),
                    "every slide needs at least one topic",
                ));
            }
        }
        for slide in self.all_slides() {
            if let Some(target) = slide.refs.iter().find(|r| !ids.contains(r.as_str())) {
                return Err(IngestError::DanglingReference {
                    location: format!("slide {}", slide.slide_id),
                    target: target.clone(),
                });
            }
        }
        let labels = self.topic_labels()?;
        for (n, p) in self.prerequisites.iter().enumerate() {
            let location = format!("prerequisites[{n}]");
            let prerequisite = label(&p.prerequisite, &location)?;
            let dependent = label(&p.dependent, &location)?;
            for (raw, id) in [(&p.prerequisite, &prerequisite), (&p.dependent, &dependent)] {
                if !labels.contains_key(id) {
                    return Err(IngestError::DanglingReference {
                        location: location.clone(),
                        target: raw.clone(),
                    });
                }
            }
            if prerequisite == dependent {
                return Err(IngestError::malformed(location, "a topic cannot be its own prerequisite"));
            }
        }
        Ok(())
    }

    /// Normalized topic id to the raw labels it was written as.
    fn topic_labels(&self) -> Result<BTreeMap<SubjectIdentifier, BTreeSet<String>>, IngestError> {
        let mut labels: BTreeMap<SubjectIdentifier, BTreeSet<String>> = BTreeMap::new();
        for slide in self.all_slides() {
            for raw in &slide.topics {
                let id = label(raw, &format!("slide {}", slide.slide_id))?;
                labels.entry(id).or_default().insert(raw.clone());
            }
        }
        Ok(labels)
    }
}

fn label(raw: &str, location: &str) -> Result<SubjectIdentifier, IngestError> {
    normalize_label(raw).map_err(|_| IngestError::EmptyLabel(location.to_string()))
}

/// Distinct normalized topics of a slide, in declaration order.
fn slide_topics(slide: &SlideSpec) -> Result<Vec<SubjectIdentifier>, IngestError> {
    let mut out = Vec::new();
    for raw in &slide.topics {
        let id = label(raw, &format!("slide {}", slide.slide_id))?;
        if !out.contains(&id) {
            out.push(id);
        }
    }
    Ok(out)
}

/// Temporal continuity edges between the topics of consecutive corridor slides.
pub fn derive_temporal(deck: &AnnotatedDeck) -> Result<BTreeSet<Association>, IngestError> {
    let topics = deck
        .slides
        .iter()
        .map(slide_topics)
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = BTreeSet::new();
    for pair in topics.windows(2) {
        for before in &pair[0] {
            for after in pair[1].iter().filter(|&after| after != before) {
                out.insert(Association::temporal(before.clone(), after.clone()));
            }
        }
    }
    Ok(out)
}

/// Builds the topic map of a single deck. The map id is the deck id.
pub fn build_map(deck: &AnnotatedDeck) -> Result<TopicMap, IngestError> {
    deck.check()?;
    let mut map = TopicMap::empty(deck.deck_id.clone());

    for (id, names) in deck.topic_labels()? {
        let mut topic = Topic::new(id.clone());
        topic.display_names = names;
        map.topics.insert(id, topic);
    }

    let slide_ref = |slide_id: &str| SlideRef::new(deck.deck_id.clone(), slide_id);
    let corridor = deck.slides.iter().enumerate().map(|(n, s)| (Some(n as u32 + 1), s));
    let supplementary = deck.supplementary.iter().map(|s| (None, s));
    let mut slide_topic_ids = BTreeMap::new();
    for (ordinal, slide) in corridor.chain(supplementary) {
        let this = slide_ref(&slide.slide_id);
        let topic_refs = slide_topics(slide)?;
        for id in &topic_refs {
            if let Some(topic) = map.topics.get_mut(id) {
                topic.occurrence_refs.insert(this.clone());
            }
        }
        slide_topic_ids.insert(slide.slide_id.as_str(), topic_refs.clone());
        map.occurrences.insert(
            this.clone(),
            Occurrence {
                slide_ref: this.clone(),
                ordinal,
                class: slide.class,
                title: slide.title.clone(),
                body: slide.body.clone(),
                topic_refs,
                direct_refs: slide.refs.iter().map(|r| slide_ref(r)).collect(),
                checkpoint: slide.checkpoint.clone(),
            },
        );
        if ordinal.is_some() {
            map.corridors
                .entry(deck.deck_id.clone())
                .or_default()
                .push(this);
        }
    }

    map.associations.extend(derive_temporal(deck)?);
    for (n, p) in deck.prerequisites.iter().enumerate() {
        let location = format!("prerequisites[{n}]");
        map.associations.push(Association::preliminary(
            label(&p.prerequisite, &location)?,
            label(&p.dependent, &location)?,
        ));
    }
    for slide in deck.all_slides() {
        let sources = &slide_topic_ids[slide.slide_id.as_str()];
        for target_slide in &slide.refs {
            for source in sources {
                for target in &slide_topic_ids[target_slide.as_str()] {
                    if source != target {
                        map.associations.push(Association::new(
                            AssociationType::DirectReference,
                            source.clone(),
                            target.clone(),
                        ));
                    }
                }
            }
        }
    }
    map.refresh();
    Ok(map)
}

/// [`parse_deck`] followed by [`build_map`].
pub fn ingest(document: &[u8]) -> Result<TopicMap, IngestError> {
    build_map(&parse_deck(document)?)
}
