// Aggregate audience ratings into a per-slide comprehension report.
//
// cargo run -p lectern --example comprehension_report

use std::error::Error;

use lectern::crowd::{comprehension_report, Annotation, AnnotationKind, AnnotationLog, ComprehensionClasses, ReportConfig};
use lectern::{ingest, SlideRef};

const DECK: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/algo101.json");

pub fn run() -> Result<(), Box<dyn Error>> {
    let map = ingest(&std::fs::read(DECK)?)?;
    let classes = ComprehensionClasses::default();
    let mut log = AnnotationLog::new();
    let ratings = [
        ("ana", "s2", "clear"),
        ("ben", "s2", "clear"),
        ("ana", "s4", "unclear"),
        ("ben", "s4", "lost"),
        ("cai", "s4", "clear"),
        // ana changes their mind; only the latest rating counts
        ("ana", "s4", "lost"),
    ];
    for (who, slide, class) in ratings {
        log.apply(
            Annotation {
                participant: who.into(),
                slide: SlideRef::new("algo101", slide),
                at: 0,
                kind: AnnotationKind::Rating { class: class.into() },
            },
            &map,
            &classes,
        )?;
    }

    let report = comprehension_report(&log, &map, &classes, ReportConfig::default());
    for (slide, row) in report.slides.iter().filter(|(_, r)| r.total > 0) {
        println!("{slide:<12} {:?} flagged={}", row.counts, row.flagged);
    }
    println!("flagged: {:?}", report.totals.flagged.iter().map(|s| s.to_string()).collect::<Vec<_>>());

    let mut jsonl = Vec::new();
    log.write_jsonl(&mut jsonl)?;
    print!("{}", String::from_utf8(jsonl)?);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run()
}
