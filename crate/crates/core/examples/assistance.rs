// Supporting material for every slide of the corridor.
//
// cargo run -p lectern --example assistance

use std::error::Error;

use lectern::ingest;
use lectern::query::assistance;

const DECK: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/algo101.json");

pub fn run() -> Result<(), Box<dyn Error>> {
    let map = ingest(&std::fs::read(DECK)?)?;
    for slide in &map.corridors["algo101"] {
        let help = assistance(&map, slide)?;
        let shown: Vec<String> = help.iter().map(|a| format!("{} {}", a.slide.slide_id, a.reason)).collect();
        println!("{:<12} {}", slide.to_string(), shown.join(", "));
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run()
}
