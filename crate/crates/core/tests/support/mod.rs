//! Random inputs and brute-force reference implementations shared by the
//! integration and acceptance tests. Nothing here calls the library's own
//! algorithms; each oracle recomputes its answer from the definitions.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use lectern::crowd::{Annotation, AnnotationKind, AnnotationLog, ComprehensionClasses, LogEntry};
use lectern::ingest::{build_map, AnnotatedDeck, Prerequisite, SlideSpec};
use lectern::{
    normalize_label, Association, AssociationType, Occurrence, OccurrenceClass, SlideRef,
    SubjectIdentifier, Topic, TopicMap,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const LABELS: [&str; 8] = ["Graphs", "Trees", "Sets", "Heaps", "Lists", "Stacks", "Queues", "Hashing"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/algo101.json")
}

pub fn fixture_bytes() -> Vec<u8> {
    std::fs::read(fixture_path()).expect("fixture readable")
}

pub fn id(label: &str) -> SubjectIdentifier {
    normalize_label(label).expect("non-empty label")
}

/// The same label as a lecturer might type it.
fn spelling(rng: &mut impl Rng, label: &str) -> String {
    match rng.gen_range(0..4) {
        0 => label.to_lowercase(),
        1 => label.to_uppercase(),
        2 => format!("  {label} "),
        _ => label.to_string(),
    }
}

fn slide(rng: &mut impl Rng, slide_id: String, pool: &[&str]) -> SlideSpec {
    let anchors = rng.gen_range(1..=pool.len().min(3));
    let topics = pool
        .choose_multiple(rng, anchors)
        .map(|l| spelling(rng, l))
        .collect();
    SlideSpec {
        title: format!("Slide {slide_id}"),
        body: String::new(),
        class: *OccurrenceClass::ALL.choose(rng).unwrap(),
        topics,
        refs: Vec::new(),
        checkpoint: rng.gen_bool(0.15).then(|| format!("Checkpoint {slide_id}")),
        slide_id,
    }
}

/// A valid deck with at most `max_topics` distinct topics and `max_slides`
/// slides, some of them supplementary. Prerequisites form a DAG.
pub fn random_deck(rng: &mut impl Rng, deck_id: &str, max_topics: usize, max_slides: usize) -> AnnotatedDeck {
    let n_topics = rng.gen_range(1..=max_topics.min(LABELS.len()));
    let pool: Vec<&str> = LABELS.choose_multiple(rng, n_topics).copied().collect();
    let n_slides = rng.gen_range(1..=max_slides.max(1));
    let n_corridor = rng.gen_range(1..=n_slides);
    let mut slides: Vec<SlideSpec> = (0..n_corridor).map(|i| slide(rng, format!("s{}", i + 1), &pool)).collect();
    let mut supplementary: Vec<SlideSpec> =
        (n_corridor..n_slides).map(|i| slide(rng, format!("x{}", i + 1), &pool)).collect();

    let ids: Vec<String> = slides.iter().chain(&supplementary).map(|s| s.slide_id.clone()).collect();
    for s in slides.iter_mut().chain(supplementary.iter_mut()) {
        if rng.gen_bool(0.2) {
            let target = ids.choose(rng).unwrap().clone();
            if target != s.slide_id {
                s.refs.push(target);
            }
        }
    }

    // one spelling per topic, so the shuffled order is a topological order
    let used: BTreeMap<SubjectIdentifier, String> = slides
        .iter()
        .chain(&supplementary)
        .flat_map(|s| s.topics.iter().map(|t| (id(t), t.trim().to_string())))
        .collect();
    let mut order: Vec<String> = used.into_values().collect();
    order.shuffle(rng);
    let mut prerequisites = Vec::new();
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            if rng.gen_bool(0.25) {
                prerequisites.push(Prerequisite {
                    prerequisite: order[i].clone(),
                    dependent: order[j].clone(),
                });
            }
        }
    }
    AnnotatedDeck {
        deck_id: deck_id.to_string(),
        title: format!("Deck {deck_id}"),
        slides,
        prerequisites,
        supplementary,
    }
}

pub fn random_map(rng: &mut impl Rng, deck_id: &str, max_topics: usize, max_slides: usize) -> TopicMap {
    build_map(&random_deck(rng, deck_id, max_topics, max_slides)).expect("generated decks are valid")
}

/// A valid map over topics `t0..tn`, each with one corridor slide, carrying
/// exactly the given associations.
pub fn graph_map(n: usize, edges: &[(usize, usize, AssociationType)]) -> TopicMap {
    let mut map = TopicMap::empty("g");
    for i in 0..n {
        let topic = id(&format!("t{i}"));
        let slide_ref = SlideRef::new("g", format!("s{}", i + 1));
        let mut t = Topic::new(topic.clone());
        t.display_names.insert(format!("t{i}"));
        t.occurrence_refs.insert(slide_ref.clone());
        map.topics.insert(topic.clone(), t);
        map.occurrences.insert(
            slide_ref.clone(),
            Occurrence {
                slide_ref: slide_ref.clone(),
                ordinal: Some(i as u32 + 1),
                class: OccurrenceClass::Fact,
                title: String::new(),
                body: String::new(),
                topic_refs: vec![topic],
                direct_refs: BTreeSet::new(),
                checkpoint: None,
            },
        );
        map.corridors.entry("g".into()).or_default().push(slide_ref);
    }
    for &(from, to, kind) in edges {
        map.associations.push(Association::new(kind, id(&format!("t{from}")), id(&format!("t{to}"))));
    }
    map.refresh();
    map
}

/// Random labelled edges without self-loops; acyclic when `dag` is set
/// (edges only go from lower to higher index).
pub fn random_edges(rng: &mut impl Rng, n: usize, kinds: &[AssociationType], dag: bool) -> Vec<(usize, usize, AssociationType)> {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a == b || (dag && a > b) {
                continue;
            }
            for &kind in kinds {
                if rng.gen_bool(0.3) {
                    edges.push((a, b, kind));
                }
            }
        }
    }
    edges
}

/// Topics of each slide as a set.
fn topic_sets(map: &TopicMap) -> BTreeMap<SlideRef, BTreeSet<SubjectIdentifier>> {
    map.occurrences
        .iter()
        .map(|(s, o)| (s.clone(), o.topic_refs.iter().cloned().collect()))
        .collect()
}

/// Scopes by enumerating every subset of the topic universe.
pub fn scopes_oracle(map: &TopicMap) -> BTreeSet<(BTreeSet<SubjectIdentifier>, BTreeSet<SlideRef>)> {
    let sets = topic_sets(map);
    let universe: Vec<SubjectIdentifier> = sets.values().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    assert!(universe.len() <= 16, "subset enumeration is exponential");
    let mut out = BTreeSet::new();
    for mask in 0u32..(1 << universe.len()) {
        if mask.count_ones() < 2 {
            continue;
        }
        let subset: BTreeSet<SubjectIdentifier> =
            (0..universe.len()).filter(|i| mask & (1 << i) != 0).map(|i| universe[i].clone()).collect();
        if !sets.values().any(|t| *t == subset) {
            continue;
        }
        let shared = sets.iter().filter(|(_, t)| subset.is_subset(t)).map(|(s, _)| s.clone()).collect();
        out.insert((subset, shared));
    }
    out
}

/// Temporal pairs straight from the definition.
pub fn temporal_oracle(deck: &AnnotatedDeck) -> BTreeSet<(SubjectIdentifier, SubjectIdentifier)> {
    let mut out = BTreeSet::new();
    for pair in deck.slides.windows(2) {
        for t in &pair[0].topics {
            for u in &pair[1].topics {
                let (t, u) = (id(t), id(u));
                if t != u {
                    out.insert((t, u));
                }
            }
        }
    }
    out
}

/// Adjacency matrix of PRELIMINARY edges oriented dependent to prerequisite.
fn prerequisite_matrix(map: &TopicMap) -> (Vec<SubjectIdentifier>, Vec<Vec<bool>>) {
    let topics: Vec<SubjectIdentifier> = map.topics.keys().cloned().collect();
    let index = |t: &SubjectIdentifier| topics.iter().position(|x| x == t).unwrap();
    let mut adj = vec![vec![false; topics.len()]; topics.len()];
    for a in &map.associations {
        if a.kind == AssociationType::PreliminaryKnowledge {
            adj[index(&a.to)][index(&a.from)] = true;
        }
    }
    (topics, adj)
}

pub enum ClosureOracle {
    Depths(Vec<(SubjectIdentifier, usize)>),
    Cycle,
}

/// Depths by Bellman-Ford relaxation; cycles by Warshall's transitive closure.
pub fn closure_oracle(map: &TopicMap, topic: &SubjectIdentifier) -> ClosureOracle {
    let (topics, adj) = prerequisite_matrix(map);
    let n = topics.len();
    let start = topics.iter().position(|t| t == topic).unwrap();

    let mut reach = adj.clone();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    let reachable = |v: usize| v == start || reach[start][v];
    if (0..n).any(|v| reachable(v) && reach[v][v]) {
        return ClosureOracle::Cycle;
    }

    let mut dist = vec![usize::MAX; n];
    dist[start] = 0;
    for _ in 0..n {
        for u in 0..n {
            for v in 0..n {
                if adj[u][v] && dist[u] != usize::MAX && dist[u] + 1 < dist[v] {
                    dist[v] = dist[u] + 1;
                }
            }
        }
    }
    let mut out: Vec<(SubjectIdentifier, usize)> = (0..n)
        .filter(|&v| v != start && dist[v] != usize::MAX)
        .map(|v| (topics[v].clone(), dist[v]))
        .collect();
    out.sort_by(|a, b| (a.1, &a.0).cmp(&(b.1, &b.0)));
    ClosureOracle::Depths(out)
}

/// Every labelled simple path of 1..=max_len edges ending at `topic`, found
/// by trying all vertex sequences and all label choices, sorted.
pub fn paths_oracle(
    map: &TopicMap,
    topic: &SubjectIdentifier,
    max_len: usize,
) -> Vec<(Vec<SubjectIdentifier>, Vec<AssociationType>)> {
    let topics: Vec<SubjectIdentifier> = map.topics.keys().cloned().collect();
    let labels = |a: &SubjectIdentifier, b: &SubjectIdentifier| -> Vec<AssociationType> {
        let mut out: Vec<AssociationType> = map
            .associations
            .iter()
            .filter(|x| {
                matches!(x.kind, AssociationType::TemporalContinuity | AssociationType::PreliminaryKnowledge)
                    && x.from == *a
                    && x.to == *b
            })
            .map(|x| x.kind)
            .collect();
        out.sort();
        out.dedup();
        out
    };

    let mut sequences: Vec<Vec<SubjectIdentifier>> = vec![vec![topic.clone()]];
    let mut frontier = sequences.clone();
    for _ in 0..max_len {
        let mut next = Vec::new();
        for seq in &frontier {
            for t in &topics {
                if !seq.contains(t) {
                    let mut longer = vec![t.clone()];
                    longer.extend(seq.iter().cloned());
                    next.push(longer);
                }
            }
        }
        sequences.extend(next.iter().cloned());
        frontier = next;
    }

    let mut out = Vec::new();
    for seq in sequences.into_iter().filter(|s| s.len() >= 2) {
        let mut labelings: Vec<Vec<AssociationType>> = vec![Vec::new()];
        for w in seq.windows(2) {
            let options = labels(&w[0], &w[1]);
            labelings = labelings
                .into_iter()
                .flat_map(|prefix| {
                    options.iter().map(move |&o| {
                        let mut p = prefix.clone();
                        p.push(o);
                        p
                    })
                })
                .collect();
        }
        for via in labelings {
            out.push((seq.clone(), via));
        }
    }
    let key = |(topics, via): &(Vec<SubjectIdentifier>, Vec<AssociationType>)| {
        let mut k = vec![(topics[0].clone(), None)];
        k.extend(topics[1..].iter().cloned().zip(via.iter().map(|v| Some(*v))));
        k
    };
    out.sort_by_key(key);
    out
}

/// Assistance from the definition: filter all occurrences, then rank.
pub fn assistance_oracle(map: &TopicMap, slide: &SlideRef) -> Vec<(SlideRef, Option<usize>)> {
    let topics: BTreeSet<SubjectIdentifier> = map.occurrences[slide].topic_refs.iter().cloned().collect();
    let ordinal_key = |s: &SlideRef| (map.occurrences[s].ordinal.is_none(), map.occurrences[s].ordinal, s.clone());

    let mut same: Vec<(usize, SlideRef)> = map
        .occurrences
        .values()
        .filter(|o| o.slide_ref != *slide && matches!(o.class, OccurrenceClass::Definition | OccurrenceClass::Example))
        .map(|o| (o.topic_refs.iter().filter(|t| topics.contains(*t)).count(), o.slide_ref.clone()))
        .filter(|(shared, _)| *shared > 0)
        .collect();
    same.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| ordinal_key(&a.1).cmp(&ordinal_key(&b.1))));

    let mut depth: BTreeMap<SubjectIdentifier, usize> = BTreeMap::new();
    for t in &topics {
        if let ClosureOracle::Depths(d) = closure_oracle(map, t) {
            for (p, k) in d {
                let e = depth.entry(p).or_insert(k);
                *e = (*e).min(k);
            }
        }
    }
    let mut prelim: Vec<(usize, SlideRef)> = map
        .occurrences
        .values()
        .filter(|o| {
            o.slide_ref != *slide
                && matches!(o.class, OccurrenceClass::Definition | OccurrenceClass::Example | OccurrenceClass::Summary)
        })
        .filter_map(|o| {
            o.topic_refs
                .iter()
                .filter_map(|t| depth.get(t))
                .min()
                .map(|&d| (d, o.slide_ref.clone()))
        })
        .collect();
    prelim.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| ordinal_key(&a.1).cmp(&ordinal_key(&b.1))));

    let mut out: Vec<(SlideRef, Option<usize>)> = Vec::new();
    for (s, d) in same.into_iter().map(|(_, s)| (s, None)).chain(prelim.into_iter().map(|(d, s)| (s, Some(d)))) {
        if !out.iter().any(|(x, _)| *x == s) {
            out.push((s, d));
        }
    }
    out
}

pub fn participants(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i}")).collect()
}

/// A random accepted log: ratings, notes with tags and bookmarks.
pub fn random_log(rng: &mut impl Rng, map: &TopicMap, classes: &ComprehensionClasses, max_participants: usize, max_events: usize) -> AnnotationLog {
    let people = participants(rng.gen_range(1..=max_participants));
    let slides: Vec<SlideRef> = map.occurrences.keys().cloned().collect();
    let mut tag_pool: Vec<String> = map.topics.keys().map(|t| t.as_str().to_string()).collect();
    tag_pool.extend(["recursion", "Big O", "proof"].map(String::from));
    let mut log = AnnotationLog::new();
    for _ in 0..rng.gen_range(0..=max_events) {
        let kind = match rng.gen_range(0..10) {
            0..=5 => AnnotationKind::Rating {
                class: classes.labels().choose(rng).unwrap().clone(),
            },
            6..=8 => {
                let n = rng.gen_range(0..=2);
                AnnotationKind::Note {
                    text: "note".into(),
                    tags: tag_pool.choose_multiple(rng, n).cloned().collect(),
                    refs: Vec::new(),
                }
            }
            _ => AnnotationKind::Bookmark { label: "later".into() },
        };
        let annotation = Annotation {
            participant: people.choose(rng).unwrap().clone(),
            slide: slides.choose(rng).unwrap().clone(),
            at: 0,
            kind,
        };
        log.apply(annotation, map, classes).expect("generated annotations are valid");
    }
    log
}

/// Effective ratings by scanning backwards for each participant and slide.
pub fn report_oracle(
    log: &AnnotationLog,
    map: &TopicMap,
    classes: &ComprehensionClasses,
    quorum: usize,
    threshold: f64,
) -> BTreeMap<SlideRef, (BTreeMap<String, usize>, bool)> {
    let entries = log.entries();
    let people: BTreeSet<&str> = entries.iter().map(|e| e.annotation.participant.as_str()).collect();
    let mut out = BTreeMap::new();
    for slide in map.occurrences.keys() {
        let mut counts: BTreeMap<String, usize> = classes.labels().iter().map(|l| (l.clone(), 0)).collect();
        for person in &people {
            let last = entries.iter().rev().find_map(|e| match &e.annotation.kind {
                AnnotationKind::Rating { class } if e.annotation.participant == *person && e.annotation.slide == *slide => {
                    Some(class.clone())
                }
                _ => None,
            });
            if let Some(class) = last {
                *counts.entry(class).or_default() += 1;
            }
        }
        let total: usize = counts.values().sum();
        let negative = total - counts.get(classes.positive()).copied().unwrap_or(0);
        let flagged = total >= quorum && negative as f64 / total as f64 >= threshold;
        out.insert(slide.clone(), (counts, flagged));
    }
    out
}

/// Reorders entries that commute: only ratings by the same participant on
/// the same slide keep their relative order. Sequence numbers are reissued.
pub fn permute_commuting(rng: &mut impl Rng, log: &AnnotationLog) -> AnnotationLog {
    let entries: Vec<&LogEntry> = log.entries().iter().collect();
    let group = |e: &LogEntry| match e.annotation.kind {
        AnnotationKind::Rating { .. } => Some((e.annotation.participant.clone(), e.annotation.slide.clone())),
        _ => None,
    };
    let mut shuffled = entries.clone();
    shuffled.shuffle(rng);
    let mut queues: BTreeMap<(String, SlideRef), std::collections::VecDeque<&LogEntry>> = BTreeMap::new();
    for e in &entries {
        if let Some(g) = group(e) {
            queues.entry(g).or_default().push_back(e);
        }
    }
    let mut out = AnnotationLog::new();
    for (i, e) in shuffled.into_iter().enumerate() {
        let chosen = match group(e) {
            Some(g) => queues.get_mut(&g).unwrap().pop_front().unwrap(),
            None => e,
        };
        out.push_entry(LogEntry {
            seq: i as u64 + 1,
            annotation: chosen.annotation.clone(),
        })
        .unwrap();
    }
    out
}

pub fn jaccard_oracle(a: &BTreeSet<u8>, b: &BTreeSet<u8>) -> Option<f64> {
    let union = a.union(b).count();
    (union > 0).then(|| a.intersection(b).count() as f64 / union as f64)
}
