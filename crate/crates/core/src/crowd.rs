//! Audience annotations and their aggregates.
//!
//! Participants rate slides with a comprehension class, attach notes with
//! tags and slide references, and bookmark slides. The [`AnnotationLog`] is
//! append-only; every aggregate in this module is a pure function of a log
//! snapshot and the topic map, so replaying a persisted log reproduces them
//! exactly.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::CrowdError;
use crate::model::{
    normalize_label, Association, AssociationType, SlideRef, SubjectIdentifier, Topic, TopicMap,
};

/// Session rating scale: a fixed list of labels with one positive class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ClassesDoc")]
pub struct ComprehensionClasses {
    labels: Vec<String>,
    positive: String,
}

#[derive(Deserialize)]
struct ClassesDoc {
    labels: Vec<String>,
    positive: String,
}

impl TryFrom<ClassesDoc> for ComprehensionClasses {
    type Error = CrowdError;

    fn try_from(doc: ClassesDoc) -> Result<Self, Self::Error> {
        ComprehensionClasses::new(doc.labels, doc.positive)
    }
}

impl ComprehensionClasses {
    pub fn new(labels: Vec<String>, positive: impl Into<String>) -> Result<Self, CrowdError> {
        let positive = positive.into();
        if labels.is_empty() {
            return Err(CrowdError::InvalidConfig("class list is empty".into()));
        }
        let distinct: BTreeSet<&String> = labels.iter().collect();
        if distinct.len() != labels.len() {
            return Err(CrowdError::InvalidConfig("class list has duplicate labels".into()));
        }
        if !distinct.contains(&positive) {
            return Err(CrowdError::InvalidConfig(format!(
                "positive class {positive:?} is not in the class list"
            )));
        }
        Ok(ComprehensionClasses { labels, positive })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn positive(&self) -> &str {
        &self.positive
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }
}

impl Default for ComprehensionClasses {
    fn default() -> Self {
        ComprehensionClasses {
            labels: vec!["clear".into(), "unclear".into(), "lost".into()],
            positive: "clear".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AnnotationKind {
    Rating {
        class: String,
    },
    Note {
        #[serde(default)]
        text: String,
        #[serde(default)]
        tags: Vec<String>,
        #[serde(default)]
        refs: Vec<SlideRef>,
    },
    Bookmark {
        label: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub participant: String,
    pub slide: SlideRef,
    /// Milliseconds since the Unix epoch.
    #[serde(default)]
    pub at: u64,
    #[serde(flatten)]
    pub kind: AnnotationKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub seq: u64,
    #[serde(flatten)]
    pub annotation: Annotation,
}

/// Append-only annotation log with strictly increasing sequence numbers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnnotationLog {
    entries: Vec<LogEntry>,
}

impl AnnotationLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn next_seq(&self) -> u64 {
        self.entries.last().map_or(1, |e| e.seq + 1)
    }

    /// Checks an annotation against the map and class list and returns it
    /// with its tags normalized.
    pub fn prepare(
        annotation: Annotation,
        map: &TopicMap,
        classes: &ComprehensionClasses,
    ) -> Result<Annotation, CrowdError> {
        let mut annotation = annotation;
        if !map.occurrences.contains_key(&annotation.slide) {
            return Err(CrowdError::UnknownSlide(annotation.slide.to_string()));
        }
        match &mut annotation.kind {
            AnnotationKind::Rating { class } => {
                if !classes.contains(class) {
                    return Err(CrowdError::UnknownClass(class.clone()));
                }
            }
            AnnotationKind::Note { tags, refs, .. } => {
                if let Some(missing) = refs.iter().find(|r| !map.occurrences.contains_key(r)) {
                    return Err(CrowdError::UnknownSlide(missing.to_string()));
                }
                *tags = tags
                    .iter()
                    .map(|t| normalize_label(t).map(|id| id.as_str().to_string()))
                    .collect::<Result<_, _>>()
                    .map_err(|_| CrowdError::EmptyLabel)?;
            }
            AnnotationKind::Bookmark { .. } => {}
        }
        Ok(annotation)
    }

    /// Validates and appends; returns the entry with its sequence number.
    pub fn apply(
        &mut self,
        annotation: Annotation,
        map: &TopicMap,
        classes: &ComprehensionClasses,
    ) -> Result<&LogEntry, CrowdError> {
        let annotation = Self::prepare(annotation, map, classes)?;
        let seq = self.next_seq();
        self.entries.push(LogEntry { seq, annotation });
        Ok(self.entries.last().expect("just pushed"))
    }

    /// Appends an already accepted entry, as read back from storage.
    pub fn push_entry(&mut self, entry: LogEntry) -> Result<(), CrowdError> {
        if entry.seq < self.next_seq() {
            return Err(CrowdError::MalformedLog {
                line: self.entries.len() + 1,
                message: format!("sequence number {} is not increasing", entry.seq),
            });
        }
        self.entries.push(entry);
        Ok(())
    }

    /// One JSON object per line, newline terminated.
    pub fn entry_line(entry: &LogEntry) -> String {
        let mut line = serde_json::to_string(entry).expect("log entry serializes");
        line.push('\n');
        line
    }

    pub fn write_jsonl(&self, mut out: impl Write) -> std::io::Result<()> {
        for entry in &self.entries {
            out.write_all(Self::entry_line(entry).as_bytes())?;
        }
        Ok(())
    }

    /// Parses a line-delimited log. A final line without a terminating
    /// newline that does not parse is treated as a torn write and dropped;
    /// the returned length is the byte length of the accepted prefix.
    pub fn parse_jsonl(text: &str) -> Result<(AnnotationLog, usize), CrowdError> {
        let mut log = AnnotationLog::new();
        let mut offset = 0;
        for (n, line) in text.split_inclusive('\n').enumerate() {
            let terminated = line.ends_with('\n');
            let content = line.trim();
            if !content.is_empty() {
                match serde_json::from_str::<LogEntry>(content) {
                    Ok(entry) => log.push_entry(entry)?,
                    Err(_) if !terminated => break,
                    Err(e) => {
                        return Err(CrowdError::MalformedLog {
                            line: n + 1,
                            message: e.to_string(),
                        })
                    }
                }
            }
            offset += line.len();
        }
        Ok((log, offset))
    }

    /// Latest rating per (slide, participant), in log order.
    pub fn effective_ratings(&self) -> BTreeMap<(&SlideRef, &str), &str> {
        let mut out = BTreeMap::new();
        for entry in &self.entries {
            if let AnnotationKind::Rating { class } = &entry.annotation.kind {
                let a = &entry.annotation;
                out.insert((&a.slide, a.participant.as_str()), class.as_str());
            }
        }
        out
    }

    fn notes(&self) -> impl Iterator<Item = (&Annotation, &[String])> {
        self.entries.iter().filter_map(|e| match &e.annotation.kind {
            AnnotationKind::Note { tags, .. } => Some((&e.annotation, tags.as_slice())),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub quorum: usize,
    pub threshold: f64,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            quorum: 3,
            threshold: 0.5,
        }
    }
}

impl ReportConfig {
    pub fn new(quorum: usize, threshold: f64) -> Result<Self, CrowdError> {
        let config = ReportConfig { quorum, threshold };
        config.check()?;
        Ok(config)
    }

    pub fn check(&self) -> Result<(), CrowdError> {
        if self.quorum < 1 {
            return Err(CrowdError::InvalidConfig("quorum must be at least 1".into()));
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(CrowdError::InvalidConfig("threshold must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlideComprehension {
    pub counts: BTreeMap<String, usize>,
    pub total: usize,
    pub negative: usize,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportTotals {
    pub responses: usize,
    pub counts: BTreeMap<String, usize>,
    pub flagged: Vec<SlideRef>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComprehensionReport {
    pub quorum: usize,
    pub threshold: f64,
    pub slides: BTreeMap<SlideRef, SlideComprehension>,
    pub totals: ReportTotals,
}

/// Distribution of effective ratings per slide of the map. A slide is
/// flagged once it has at least `quorum` responses and the negative share
/// reaches `threshold`. Ratings with labels outside the class list count as
/// negative under their own label.
pub fn comprehension_report(
    log: &AnnotationLog,
    map: &TopicMap,
    classes: &ComprehensionClasses,
    config: ReportConfig,
) -> ComprehensionReport {
    let zeroed: BTreeMap<String, usize> = classes.labels().iter().map(|l| (l.clone(), 0)).collect();
    let mut slides: BTreeMap<SlideRef, SlideComprehension> = map
        .occurrences
        .keys()
        .map(|slide| {
            let empty = SlideComprehension {
                counts: zeroed.clone(),
                total: 0,
                negative: 0,
                flagged: false,
            };
            (slide.clone(), empty)
        })
        .collect();

    for ((slide, _), class) in log.effective_ratings() {
        if let Some(entry) = slides.get_mut(slide) {
            *entry.counts.entry(class.to_string()).or_default() += 1;
            entry.total += 1;
            if class != classes.positive() {
                entry.negative += 1;
            }
        }
    }

    let mut totals = ReportTotals {
        responses: 0,
        counts: zeroed,
        flagged: Vec::new(),
    };
    for (slide, entry) in &mut slides {
        entry.flagged = entry.total >= config.quorum
            && entry.negative as f64 / entry.total as f64 >= config.threshold;
        if entry.flagged {
            totals.flagged.push(slide.clone());
        }
        totals.responses += entry.total;
        for (class, count) in &entry.counts {
            *totals.counts.entry(class.clone()).or_default() += count;
        }
    }
    ComprehensionReport {
        quorum: config.quorum,
        threshold: config.threshold,
        slides,
        totals,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiscussionTopic {
    pub id: SubjectIdentifier,
    /// False when the tag matches a topic already in the map.
    pub new: bool,
    pub supporters: usize,
    pub slides: BTreeSet<SlideRef>,
    pub associations: Vec<Association>,
}

/// Crowd-sourced topics ready to be applied to a map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiscussionDelta {
    pub topics: Vec<DiscussionTopic>,
}

/// Turns tags used by at least `min_support` distinct participants into
/// discussion topics attached to every slide carrying the tag, with a
/// DISCUSSION association to each topic of those slides.
pub fn discussion_topics(
    log: &AnnotationLog,
    map: &TopicMap,
    min_support: usize,
) -> Result<DiscussionDelta, CrowdError> {
    if min_support < 1 {
        return Err(CrowdError::InvalidConfig("min_support must be at least 1".into()));
    }
    struct Usage<'a> {
        participants: BTreeSet<&'a str>,
        slides: BTreeSet<&'a SlideRef>,
    }
    let mut usage: BTreeMap<SubjectIdentifier, Usage> = BTreeMap::new();
    for (note, tags) in log.notes() {
        if !map.occurrences.contains_key(&note.slide) {
            continue;
        }
        for tag in tags {
            let Ok(id) = normalize_label(tag) else { continue };
            let entry = usage.entry(id).or_insert_with(|| Usage {
                participants: BTreeSet::new(),
                slides: BTreeSet::new(),
            });
            entry.participants.insert(&note.participant);
            entry.slides.insert(&note.slide);
        }
    }

    let topics = usage
        .into_iter()
        .filter(|(_, u)| u.participants.len() >= min_support)
        .map(|(id, u)| {
            let mut associations: Vec<Association> = u
                .slides
                .iter()
                .flat_map(|s| &map.occurrences[*s].topic_refs)
                .filter(|&t| *t != id)
                .map(|t| Association::new(AssociationType::Discussion, id.clone(), t.clone()))
                .collect();
            associations.sort();
            associations.dedup();
            DiscussionTopic {
                new: !map.topics.contains_key(&id),
                supporters: u.participants.len(),
                slides: u.slides.into_iter().cloned().collect(),
                associations,
                id,
            }
        })
        .collect();
    Ok(DiscussionDelta { topics })
}

impl DiscussionDelta {
    /// Returns `map` grown by the delta. Existing elements are never
    /// removed; slides the map does not contain are skipped.
    pub fn apply(&self, map: &TopicMap) -> TopicMap {
        let mut out = map.clone();
        for topic in &self.topics {
            let slides: Vec<&SlideRef> = topic
                .slides
                .iter()
                .filter(|s| out.occurrences.contains_key(s))
                .collect();
            if slides.is_empty() && !out.topics.contains_key(&topic.id) {
                continue;
            }
            let entry = out.topics.entry(topic.id.clone()).or_insert_with(|| {
                let mut t = Topic::new(topic.id.clone());
                t.display_names.insert(topic.id.as_str().to_string());
                t
            });
            for slide in &slides {
                entry.occurrence_refs.insert((*slide).clone());
            }
            for slide in slides {
                let occurrence = out.occurrences.get_mut(slide).expect("filtered above");
                if !occurrence.has_topic(&topic.id) {
                    occurrence.topic_refs.push(topic.id.clone());
                }
            }
            out.associations.extend(
                topic
                    .associations
                    .iter()
                    .filter(|a| out.topics.contains_key(&a.to))
                    .cloned(),
            );
        }
        out.refresh();
        out
    }
}

/// Jaccard similarity, or [`MindsetScore::NoData`] when both sets are empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MindsetScore {
    Score(f64),
    NoData,
}

impl MindsetScore {
    pub fn value(self) -> Option<f64> {
        match self {
            MindsetScore::Score(v) => Some(v),
            MindsetScore::NoData => None,
        }
    }
}

impl Serialize for MindsetScore {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            MindsetScore::Score(v) => serializer.serialize_f64(*v),
            MindsetScore::NoData => serializer.serialize_str("NO_DATA"),
        }
    }
}

pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> MindsetScore {
    let union = a.union(b).count();
    if union == 0 {
        return MindsetScore::NoData;
    }
    MindsetScore::Score(a.intersection(b).count() as f64 / union as f64)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MindsetScope {
    WholeSession,
    Slide(SlideRef),
}

impl Serialize for MindsetScope {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            MindsetScope::WholeSession => serializer.serialize_str("WHOLE_SESSION"),
            MindsetScope::Slide(slide) => serializer.collect_str(slide),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MindsetReport {
    pub scope: MindsetScope,
    pub score: MindsetScore,
    pub lecturer: BTreeSet<SubjectIdentifier>,
    pub audience: BTreeSet<SubjectIdentifier>,
}

/// Agreement between the lecturer's topics and the audience's tags, for the
/// whole session or a single slide.
pub fn mindset_correlation(
    log: &AnnotationLog,
    map: &TopicMap,
    scope: MindsetScope,
) -> Result<MindsetReport, CrowdError> {
    let (lecturer, audience): (BTreeSet<SubjectIdentifier>, BTreeSet<SubjectIdentifier>) =
        match &scope {
            MindsetScope::WholeSession => (
                map.topics.keys().cloned().collect(),
                log.notes()
                    .flat_map(|(_, tags)| tags)
                    .filter_map(|t| normalize_label(t).ok())
                    .collect(),
            ),
            MindsetScope::Slide(slide) => {
                let occurrence = map
                    .occurrence(slide)
                    .ok_or_else(|| CrowdError::UnknownSlide(slide.to_string()))?;
                (
                    occurrence.topic_refs.iter().cloned().collect(),
                    log.notes()
                        .filter(|(note, _)| note.slide == *slide)
                        .flat_map(|(_, tags)| tags)
                        .filter_map(|t| normalize_label(t).ok())
                        .collect(),
                )
            }
        };
    Ok(MindsetReport {
        score: jaccard(&lecturer, &audience),
        scope,
        lecturer,
        audience,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Owner {
    Lecturer,
    Participant(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BookmarkEntry {
    pub label: String,
    pub slide: SlideRef,
    pub ordinal: Option<u32>,
    pub owner: Owner,
}

/// Lecturer checkpoints and audience bookmarks in corridor order;
/// supplementary slides come last.
pub fn bookmarks(log: &AnnotationLog, map: &TopicMap) -> Vec<BookmarkEntry> {
    let checkpoints = map.occurrences.values().filter_map(|o| {
        Some(BookmarkEntry {
            label: o.checkpoint.clone()?,
            slide: o.slide_ref.clone(),
            ordinal: o.ordinal,
            owner: Owner::Lecturer,
        })
    });
    let audience = log.entries.iter().filter_map(|e| match &e.annotation.kind {
        AnnotationKind::Bookmark { label } => Some(BookmarkEntry {
            label: label.clone(),
            slide: e.annotation.slide.clone(),
            ordinal: map.occurrence(&e.annotation.slide)?.ordinal,
            owner: Owner::Participant(e.annotation.participant.clone()),
        }),
        _ => None,
    });
    let mut out: Vec<BookmarkEntry> = checkpoints.chain(audience).collect();
    // stable: checkpoints precede audience bookmarks on the same ordinal
    out.sort_by_key(|b| b.ordinal.unwrap_or(u32::MAX));
    out
}
