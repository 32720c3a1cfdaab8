// Prerequisite closure, approaching paths and the slide corridor.
//
// cargo run -p lectern --example navigation

use std::error::Error;

use lectern::query::{approaching_paths, corridor, preliminary_closure};
use lectern::{ingest, normalize_label};

const COURSE: &str = r#"{
  "deck_id": "algo",
  "slides": [
    {"slide_id": "s1", "class": "NEW_TOPIC", "topics": ["Sets"]},
    {"slide_id": "s2", "class": "DEFINITION", "topics": ["Graphs"]},
    {"slide_id": "s3", "class": "DEFINITION", "topics": ["Trees"]},
    {"slide_id": "s4", "class": "EXAMPLE", "topics": ["Trees", "Graphs"]}
  ],
  "prerequisites": [
    {"prerequisite": "Sets", "dependent": "Graphs"},
    {"prerequisite": "Graphs", "dependent": "Trees"}
  ]
}"#;

pub fn run() -> Result<(), Box<dyn Error>> {
    let map = ingest(COURSE.as_bytes())?;
    let trees = normalize_label("Trees")?;

    for (topic, depth) in preliminary_closure(&map, &trees)? {
        println!("prerequisite {topic} at depth {depth}");
    }
    let found = approaching_paths(&map, &trees, 3)?;
    for path in &found.paths {
        let mut line = path.topics[0].to_string();
        for (topic, via) in path.topics[1..].iter().zip(&path.via) {
            line.push_str(&format!(" -[{via}]-> {topic}"));
        }
        println!("{line}");
    }
    for entry in corridor(&map, "algo")? {
        let anchors: Vec<&str> = entry.anchors.iter().map(|t| t.as_str()).collect();
        println!("{} {:<10} {}", entry.ordinal, entry.class.as_str(), anchors.join(", "));
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run()
}
