// A lecture session served over HTTP: the lecturer advances, participants
// rate slides, and a subscriber follows the event stream.
//
// cargo run -p lectern-service --example live_session

use std::error::Error;

use futures::StreamExt;
use lectern_service::{http, Lectern, Store};
use serde_json::{json, Value};

const DECK: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/fixtures/algo101.json");

async fn post(client: &reqwest::Client, url: String, body: Value) -> Result<Value, Box<dyn Error>> {
    Ok(client.post(url).json(&body).send().await?.json().await?)
}

pub async fn run() -> Result<(), Box<dyn Error>> {
    let data = tempfile::tempdir()?;
    let app = Lectern::open(Store::open(data.path())?)?;
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
    let base = format!("http://{}", listener.local_addr()?);
    tokio::spawn(async move { axum::serve(listener, http::router(app)).await });

    let client = reqwest::Client::new();
    client.post(format!("{base}/maps")).body(std::fs::read(DECK)?).send().await?;
    let session = post(&client, format!("{base}/sessions"), json!({ "map_id": "algo101" })).await?;
    let id = session["session_id"].as_str().unwrap_or_default().to_string();
    let events = client.get(format!("{base}/sessions/{id}/events")).send().await?;

    post(&client, format!("{base}/sessions/{id}/start"), json!({})).await?;
    let mut tokens = Vec::new();
    for _ in 0..3 {
        tokens.push(post(&client, format!("{base}/sessions/{id}/join"), json!({})).await?["token"].clone());
    }
    post(&client, format!("{base}/sessions/{id}/goto/4"), json!({})).await?;
    for (token, class) in tokens.iter().zip(["clear", "lost", "lost"]) {
        let ack = post(
            &client,
            format!("{base}/sessions/{id}/annotations"),
            json!({ "token": token, "slide": "s4", "type": "RATING", "class": class }),
        )
        .await?;
        println!("ack {ack}");
    }
    let help: Value = client.get(format!("{base}/sessions/{id}/assistance?slide=s4")).send().await?.json().await?;
    println!("assistance for s4: {help}");
    let report: Value = client.get(format!("{base}/sessions/{id}/report")).send().await?.json().await?;
    println!("flagged: {}", report["totals"]["flagged"]);
    post(&client, format!("{base}/sessions/{id}/end"), json!({})).await?;

    // the stream closes after the session-ended event
    let mut body = events.bytes_stream();
    let mut text = String::new();
    while let Some(chunk) = body.next().await {
        text.push_str(&String::from_utf8_lossy(&chunk?));
    }
    for line in text.lines().filter_map(|l| l.strip_prefix("data:")) {
        println!("event {}", line.trim());
    }
    Ok(())
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn Error>> {
    run().await
}
