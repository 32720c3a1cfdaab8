// Audience tags become discussion topics; their overlap with the
// lecturer's topics is the mindset score.
//
// cargo run -p lectern --example discussion_and_mindset

use std::error::Error;

use lectern::crowd::{
    discussion_topics, mindset_correlation, Annotation, AnnotationKind, AnnotationLog, ComprehensionClasses,
    MindsetScope,
};
use lectern::{ingest, validate, SlideRef};

const DECK: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/algo101.json");

pub fn run() -> Result<(), Box<dyn Error>> {
    let map = ingest(&std::fs::read(DECK)?)?;
    let classes = ComprehensionClasses::default();
    let mut log = AnnotationLog::new();
    let notes = [
        ("ana", "s5", vec!["Spanning Trees", "graphs"]),
        ("ben", "s5", vec!["spanning  trees"]),
        ("cai", "s6", vec!["recursion"]),
    ];
    for (who, slide, tags) in notes {
        let tags = tags.into_iter().map(String::from).collect();
        log.apply(
            Annotation {
                participant: who.into(),
                slide: SlideRef::new("algo101", slide),
                at: 0,
                kind: AnnotationKind::Note { text: String::new(), tags, refs: vec![] },
            },
            &map,
            &classes,
        )?;
    }

    let delta = discussion_topics(&log, &map, 2)?;
    for topic in &delta.topics {
        println!("{} (new: {}, supporters: {})", topic.id, topic.new, topic.supporters);
        for association in &topic.associations {
            println!("  {association}");
        }
    }
    let enriched = delta.apply(&map);
    assert!(validate(&enriched).is_empty());
    println!("topics before {}, after {}", map.topics.len(), enriched.topics.len());

    let whole = mindset_correlation(&log, &map, MindsetScope::WholeSession)?;
    println!("mindset score: {}", serde_json::to_string(&whole.score)?);
    let s5 = mindset_correlation(&log, &map, MindsetScope::Slide(SlideRef::new("algo101", "s5")))?;
    println!("mindset score on s5: {}", serde_json::to_string(&s5.score)?);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run()
}
