mod support;

use std::collections::BTreeSet;

use lectern::crowd::{
    comprehension_report, discussion_topics, jaccard, AnnotationLog, ComprehensionClasses, MindsetScore,
    ReportConfig,
};
use lectern::query::{approaching_paths, assistance, preliminary_closure, Reason};
use lectern::{
    derive_temporal, infer_scopes, merge, normalize_label, serial, validate, AssociationType, QueryError,
    TopicMap,
};
use proptest::prelude::*;
use rand::Rng;
use support::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig::with_cases(cases)
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn normalize_is_idempotent(label in "\\PC{0,24}") {
        if let Ok(once) = normalize_label(&label) {
            let twice = normalize_label(once.as_str()).unwrap();
            prop_assert_eq!(once, twice);
        }
    }

    #[test]
    fn normalize_ignores_case_and_spacing(label in "[A-Za-z]{1,8}( +[A-Za-z]{1,8}){0,3}") {
        let shouted = format!("  {}  ", label.to_uppercase().replace(' ', "   "));
        prop_assert_eq!(normalize_label(&label).unwrap(), normalize_label(&shouted).unwrap());
    }

    #[test]
    fn jaccard_properties(a in proptest::collection::btree_set(0u8..12, 0..8),
                          b in proptest::collection::btree_set(0u8..12, 0..8)) {
        let ab = jaccard(&a, &b);
        prop_assert_eq!(ab, jaccard(&b, &a));
        match (ab, jaccard_oracle(&a, &b)) {
            (MindsetScore::NoData, None) => prop_assert!(a.is_empty() && b.is_empty()),
            (MindsetScore::Score(x), Some(y)) => {
                prop_assert!((0.0..=1.0).contains(&x));
                prop_assert!((x - y).abs() < 1e-12);
            }
            (got, want) => prop_assert!(false, "{got:?} vs {want:?}"),
        }
        if !a.is_empty() {
            prop_assert_eq!(jaccard(&a, &a), MindsetScore::Score(1.0));
        }
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn generated_maps_validate_and_round_trip(seed in any::<u64>()) {
        let map = random_map(&mut rng(seed), "d", 6, 12);
        prop_assert_eq!(validate(&map), vec![]);
        let text = serial::to_json(&map);
        let back = serial::from_json(text.as_bytes()).unwrap();
        prop_assert_eq!(&back, &map);
        prop_assert_eq!(serial::to_json(&back), text);
    }

    #[test]
    fn scopes_match_subset_enumeration(seed in any::<u64>()) {
        let map = random_map(&mut rng(seed), "d", 6, 12);
        let got: BTreeSet<_> = infer_scopes(&map.occurrences)
            .into_iter()
            .map(|s| (s.topic_set, s.shared_slides))
            .collect();
        prop_assert_eq!(got, scopes_oracle(&map));
    }

    #[test]
    fn temporal_associations_match_definition(seed in any::<u64>()) {
        let deck = random_deck(&mut rng(seed), "d", 6, 12);
        let got: BTreeSet<_> = derive_temporal(&deck).unwrap().into_iter().map(|a| (a.from, a.to)).collect();
        prop_assert_eq!(got, temporal_oracle(&deck));
    }

    #[test]
    fn merge_algebra(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_map(&mut r, "a", 5, 8);
        let b = random_map(&mut r, "b", 5, 8);
        let c = random_map(&mut r, "c", 5, 8);
        let ab = merge(&a, &b).unwrap();
        prop_assert_eq!(serial::to_json(&ab), serial::to_json(&merge(&b, &a).unwrap()));
        prop_assert_eq!(validate(&ab), vec![]);
        prop_assert_eq!(ab.occurrences.len(), a.occurrences.len() + b.occurrences.len());
        prop_assert_eq!(merge(&a, &TopicMap::empty("")).unwrap(), a.clone());
        let left = merge(&ab, &c).unwrap();
        let right = merge(&a, &merge(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(serial::to_json(&left), serial::to_json(&right));
        prop_assert!(merge(&a, &a).is_err());
    }

    #[test]
    fn closure_matches_oracle(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=8);
        let dag = r.gen_bool(0.7);
        let map = graph_map(n, &random_edges(&mut r, n, &[AssociationType::PreliminaryKnowledge], dag));
        for topic in map.topics.keys() {
            match (preliminary_closure(&map, topic), closure_oracle(&map, topic)) {
                (Ok(got), ClosureOracle::Depths(want)) => prop_assert_eq!(got, want),
                (Err(QueryError::CycleDetected { .. }), ClosureOracle::Cycle) => {}
                (got, _) => prop_assert!(false, "closure of {topic} disagrees: {got:?}"),
            }
        }
    }

    #[test]
    fn paths_match_exhaustive_enumeration(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=6);
        let kinds = [AssociationType::TemporalContinuity, AssociationType::PreliminaryKnowledge, AssociationType::Discussion];
        let map = graph_map(n, &random_edges(&mut r, n, &kinds, false));
        let max_len = r.gen_range(1..=4);
        for topic in map.topics.keys() {
            let got = approaching_paths(&map, topic, max_len).unwrap();
            let want = paths_oracle(&map, topic, max_len);
            prop_assert_eq!(got.truncated, want.len() > 1000);
            let got: Vec<_> = got.paths.into_iter().map(|p| (p.topics, p.via)).collect();
            let want: Vec<_> = want.into_iter().take(1000).collect();
            prop_assert_eq!(got, want);
        }
    }

    #[test]
    fn assistance_matches_filter(seed in any::<u64>()) {
        let map = random_map(&mut rng(seed), "d", 6, 12);
        for slide in map.occurrences.keys() {
            let got: Vec<_> = assistance(&map, slide)
                .unwrap()
                .into_iter()
                .map(|a| (a.slide, match a.reason { Reason::SameSubject => None, Reason::Preliminary { depth } => Some(depth) }))
                .collect();
            prop_assert_eq!(got, assistance_oracle(&map, slide));
        }
    }

    #[test]
    fn report_matches_replay(seed in any::<u64>()) {
        let mut r = rng(seed);
        let map = random_map(&mut r, "d", 4, 8);
        let classes = ComprehensionClasses::default();
        let log = random_log(&mut r, &map, &classes, 20, 50);
        let (quorum, threshold) = (r.gen_range(1..=4), [0.25, 0.5, 0.75, 1.0][r.gen_range(0..4)]);
        let report = comprehension_report(&log, &map, &classes, ReportConfig::new(quorum, threshold).unwrap());
        let oracle = report_oracle(&log, &map, &classes, quorum, threshold);
        prop_assert_eq!(report.slides.len(), oracle.len());
        for (slide, (counts, flagged)) in &oracle {
            prop_assert_eq!(&report.slides[slide].counts, counts);
            prop_assert_eq!(report.slides[slide].flagged, *flagged);
        }
        let permuted = permute_commuting(&mut r, &log);
        let again = comprehension_report(&permuted, &map, &classes, ReportConfig::new(quorum, threshold).unwrap());
        prop_assert_eq!(again, report);
    }

    #[test]
    fn log_survives_jsonl(seed in any::<u64>()) {
        let mut r = rng(seed);
        let map = random_map(&mut r, "d", 4, 8);
        let log = random_log(&mut r, &map, &ComprehensionClasses::default(), 5, 20);
        let mut text = Vec::new();
        log.write_jsonl(&mut text).unwrap();
        let text = String::from_utf8(text).unwrap();
        let (back, valid) = AnnotationLog::parse_jsonl(&text).unwrap();
        prop_assert_eq!(valid, text.len());
        prop_assert_eq!(back, log);
    }

    #[test]
    fn discussion_topics_grow_with_the_log(seed in any::<u64>()) {
        let mut r = rng(seed);
        let map = random_map(&mut r, "d", 4, 8);
        let log = random_log(&mut r, &map, &ComprehensionClasses::default(), 6, 40);
        let min_support = r.gen_range(1..=3);
        let mut previous: BTreeSet<String> = BTreeSet::new();
        let mut prefix = AnnotationLog::new();
        for entry in log.entries() {
            prefix.push_entry(entry.clone()).unwrap();
            let delta = discussion_topics(&prefix, &map, min_support).unwrap();
            let ids: BTreeSet<String> = delta.topics.iter().map(|t| t.id.to_string()).collect();
            prop_assert!(previous.is_subset(&ids));
            prop_assert!(delta.topics.iter().all(|t| t.supporters >= min_support));
            prop_assert_eq!(validate(&delta.apply(&map)), vec![]);
            previous = ids;
        }
    }
}
