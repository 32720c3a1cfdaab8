// Turn the annotated algo101 deck into a topic map and print it.
//
// cargo run -p lectern --example ingest_deck

use std::error::Error;

use lectern::{ingest, serial, validate};

const DECK: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/algo101.json");

pub fn run() -> Result<(), Box<dyn Error>> {
    let map = ingest(&std::fs::read(DECK)?)?;
    println!(
        "{}: {} topics, {} occurrences, {} associations, {} scopes",
        map.map_id,
        map.topics.len(),
        map.occurrences.len(),
        map.associations.len(),
        map.scopes.len()
    );
    for association in &map.associations {
        println!("  {association}");
    }
    assert!(validate(&map).is_empty());
    print!("{}", serial::to_json(&map));
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run()
}
