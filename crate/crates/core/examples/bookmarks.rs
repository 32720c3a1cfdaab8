// Lecturer checkpoints and audience bookmarks in corridor order.
//
// cargo run -p lectern --example bookmarks

use std::error::Error;

use lectern::crowd::{bookmarks, Annotation, AnnotationKind, AnnotationLog, ComprehensionClasses, Owner};
use lectern::{ingest, SlideRef};

const DECK: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/algo101.json");

pub fn run() -> Result<(), Box<dyn Error>> {
    let map = ingest(&std::fs::read(DECK)?)?;
    let mut log = AnnotationLog::new();
    for (who, slide, label) in [("ana", "s5", "exam question?"), ("ben", "x1", "nice example"), ("ben", "s2", "definition")] {
        log.apply(
            Annotation {
                participant: who.into(),
                slide: SlideRef::new("algo101", slide),
                at: 0,
                kind: AnnotationKind::Bookmark { label: label.into() },
            },
            &map,
            &ComprehensionClasses::default(),
        )?;
    }
    for mark in bookmarks(&log, &map) {
        let owner = match &mark.owner {
            Owner::Lecturer => "lecturer".to_string(),
            Owner::Participant(token) => token.clone(),
        };
        let ordinal = mark.ordinal.map_or("-".to_string(), |n| n.to_string());
        println!("{ordinal:>2} {:<12} {owner:<9} {}", mark.slide.to_string(), mark.label);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run()
}
