//! Command-line driver. Every command prints compact JSON on stdout; domain
//! errors go to stderr as `{"error": code, "message": ...}` with exit code 1,
//! usage errors exit with 2.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use lectern::crowd::{self, AnnotationLog, ComprehensionClasses, MindsetScope, ReportConfig};
use lectern::{graph, ingest, normalize_label, query, serial, ErrorCode, QueryError, TopicMap};
use serde::Serialize;

use crate::error::ServiceError;
use crate::service::Lectern;
use crate::store::Store;

#[derive(Debug, Parser)]
#[command(name = "lectern", version, about = "Topic maps for lecture slides, offline and live")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a topic map from an annotated deck.
    Ingest {
        deck: PathBuf,
        /// Write the map here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Merge two topic maps.
    Merge {
        a: PathBuf,
        b: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a topic map and list its violations.
    Validate {
        #[arg(long)]
        map: PathBuf,
    },
    /// Graph queries over a topic map.
    #[command(subcommand)]
    Query(QueryCommand),
    /// The ordered slide corridor of one deck.
    Corridor {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        deck: String,
    },
    /// Comprehension report over an annotation log.
    Report {
        #[command(flatten)]
        input: LogInput,
        #[arg(long)]
        quorum: Option<usize>,
        #[arg(long)]
        threshold: Option<f64>,
        #[command(flatten)]
        classes: ClassArgs,
    },
    /// Overlap between lecturer topics and audience tags.
    Mindset {
        #[command(flatten)]
        input: LogInput,
        /// Restrict to one slide.
        #[arg(long)]
        slide: Option<String>,
    },
    /// Discussion topics emerging from audience tags.
    Discussion {
        #[command(flatten)]
        input: LogInput,
        #[arg(long, default_value_t = 2)]
        min_support: usize,
    },
    /// Lecturer checkpoints and audience bookmarks in corridor order.
    Bookmarks {
        #[command(flatten)]
        input: LogInput,
    },
    /// Run the session service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long)]
        data: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum QueryCommand {
    /// Supporting slides for one slide.
    Assistance {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        slide: String,
    },
    /// Transitive prerequisites of a topic with their depth.
    Closure {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        topic: String,
    },
    /// Labelled paths of bounded length leading to a topic.
    Paths {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        topic: String,
        #[arg(long)]
        max_len: usize,
    },
}

#[derive(Debug, Args)]
pub struct LogInput {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub log: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClassArgs {
    /// Comma-separated comprehension classes.
    #[arg(long, value_delimiter = ',')]
    pub classes: Option<Vec<String>>,
    /// The positive class; defaults to the first one.
    #[arg(long)]
    pub positive: Option<String>,
}

impl ClassArgs {
    fn resolve(&self) -> Result<ComprehensionClasses, ServiceError> {
        match (&self.classes, &self.positive) {
            (None, None) => Ok(ComprehensionClasses::default()),
            (labels, positive) => {
                let labels = labels
                    .clone()
                    .unwrap_or_else(|| ComprehensionClasses::default().labels().to_vec());
                let positive = positive.clone().or_else(|| labels.first().cloned()).unwrap_or_default();
                Ok(ComprehensionClasses::new(labels, positive)?)
            }
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let body = serde_json::json!({ "error": e.code(), "message": e.to_string() });
            let _ = writeln!(stderr, "{body}");
            1
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, ServiceError> {
    fs::read(path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

fn load_map(path: &Path) -> Result<TopicMap, ServiceError> {
    Ok(serial::from_json(&read(path)?)?)
}

fn load_log(path: &Path) -> Result<AnnotationLog, ServiceError> {
    let text = String::from_utf8(read(path)?)
        .map_err(|e| ServiceError::BadRequest(format!("{}: {e}", path.display())))?;
    Ok(AnnotationLog::parse_jsonl(&text)?.0)
}

fn emit(out: &mut dyn Write, value: &impl Serialize) -> Result<(), ServiceError> {
    let mut line = serde_json::to_string(value).map_err(std::io::Error::other)?;
    line.push('\n');
    out.write_all(line.as_bytes())?;
    Ok(())
}

fn emit_map(out: &mut dyn Write, map: &TopicMap, target: Option<&Path>) -> Result<(), ServiceError> {
    let doc = serial::to_json(map);
    match target {
        Some(path) => fs::write(path, doc)?,
        None => out.write_all(doc.as_bytes())?,
    }
    Ok(())
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<(), ServiceError> {
    match command {
        Command::Ingest { deck, output } => {
            let map = ingest::ingest(&read(&deck)?)?;
            emit_map(out, &map, output.as_deref())
        }
        Command::Merge { a, b, output } => {
            let merged = graph::merge(&load_map(&a)?, &load_map(&b)?)?;
            emit_map(out, &merged, output.as_deref())
        }
        Command::Validate { map } => {
            let violations = lectern::validate(&load_map(&map)?);
            emit(out, &violations)?;
            if violations.is_empty() {
                Ok(())
            } else {
                Err(ServiceError::InvalidMap(violations))
            }
        }
        Command::Query(QueryCommand::Assistance { map, slide }) => {
            let map = load_map(&map)?;
            let slide = map
                .resolve_slide(&slide)
                .ok_or(QueryError::UnknownSlide(slide))?;
            emit(out, &query::assistance(&map, &slide)?)
        }
        Command::Query(QueryCommand::Closure { map, topic }) => {
            let map = load_map(&map)?;
            emit(out, &query::preliminary_closure(&map, &normalize_label(&topic)?)?)
        }
        Command::Query(QueryCommand::Paths { map, topic, max_len }) => {
            let map = load_map(&map)?;
            emit(out, &query::approaching_paths(&map, &normalize_label(&topic)?, max_len)?)
        }
        Command::Corridor { map, deck } => emit(out, &query::corridor(&load_map(&map)?, &deck)?),
        Command::Report {
            input,
            quorum,
            threshold,
            classes,
        } => {
            let defaults = ReportConfig::default();
            let config = ReportConfig::new(quorum.unwrap_or(defaults.quorum), threshold.unwrap_or(defaults.threshold))?;
            let classes = classes.resolve()?;
            let map = load_map(&input.map)?;
            let log = load_log(&input.log)?;
            emit(out, &crowd::comprehension_report(&log, &map, &classes, config))
        }
        Command::Mindset { input, slide } => {
            let map = load_map(&input.map)?;
            let log = load_log(&input.log)?;
            let scope = match slide {
                Some(spec) => MindsetScope::Slide(map.resolve_slide(&spec).ok_or(QueryError::UnknownSlide(spec))?),
                None => MindsetScope::WholeSession,
            };
            emit(out, &crowd::mindset_correlation(&log, &map, scope)?)
        }
        Command::Discussion { input, min_support } => {
            let map = load_map(&input.map)?;
            let log = load_log(&input.log)?;
            emit(out, &crowd::discussion_topics(&log, &map, min_support)?)
        }
        Command::Bookmarks { input } => {
            let map = load_map(&input.map)?;
            let log = load_log(&input.log)?;
            emit(out, &crowd::bookmarks(&log, &map))
        }
        Command::Serve { port, host, data } => serve(&host, port, &data, out),
    }
}

fn serve(host: &str, port: u16, data: &Path, out: &mut dyn Write) -> Result<(), ServiceError> {
    let addr: SocketAddr = format!("{host}:{port}")
        .parse()
        .map_err(|e| ServiceError::BadRequest(format!("bad listen address {host}:{port}: {e}")))?;
    let app = Lectern::open(Store::open(data)?)?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        emit(out, &serde_json::json!({ "listening": listener.local_addr()?.to_string() }))?;
        out.flush()?;
        let server = axum::serve(listener, crate::http::router(app));
        tokio::select! {
            result = server => result.map_err(ServiceError::from),
            _ = tokio::signal::ctrl_c() => Ok(()),
        }
    })
}
