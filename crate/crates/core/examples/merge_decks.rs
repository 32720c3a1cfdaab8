// Merge the maps of two lectures that share topics.
//
// cargo run -p lectern --example merge_decks

use std::error::Error;

use lectern::{ingest, merge, validate};

const GRAPHS: &str = r#"{
  "deck_id": "graphs",
  "slides": [
    {"slide_id": "s1", "class": "NEW_TOPIC", "topics": ["Graphs"]},
    {"slide_id": "s2", "class": "DEFINITION", "topics": ["Graphs", "Paths"]}
  ]
}"#;

const SEARCH: &str = r#"{
  "deck_id": "search",
  "slides": [
    {"slide_id": "s1", "class": "NEW_TOPIC", "topics": ["Breadth First Search"]},
    {"slide_id": "s2", "class": "EXAMPLE", "topics": ["breadth first search", "PATHS"]}
  ],
  "prerequisites": [{"prerequisite": "Paths", "dependent": "Breadth First Search"}]
}"#;

pub fn run() -> Result<(), Box<dyn Error>> {
    let a = ingest(GRAPHS.as_bytes())?;
    let b = ingest(SEARCH.as_bytes())?;
    let merged = merge(&a, &b)?;
    assert_eq!(merged, merge(&b, &a)?);
    assert!(validate(&merged).is_empty());

    println!("{} topics from {} decks", merged.topics.len(), merged.corridors.len());
    for topic in merged.topics.values() {
        let slides: Vec<String> = topic.occurrence_refs.iter().map(|s| s.to_string()).collect();
        println!("  {:<22} {}", topic.id.as_str(), slides.join(" "));
    }
    // a second copy of a deck is refused
    println!("merging a deck with itself: {}", merge(&a, &a).unwrap_err());
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run()
}
