//! Session host: owns every map and session of one data directory.
//!
//! Each session serializes its mutations through one async mutex; the
//! annotation log entry is on disk before a submission is acknowledged and
//! events are broadcast while the lock is held, so sequence numbers reach
//! subscribers in order.

use std::collections::{BTreeMap, VecDeque};
use std::sync::{Arc, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use futures::Stream;
use lectern::crowd::{
    self, Annotation, AnnotationKind, AnnotationLog, BookmarkEntry, ComprehensionReport,
    DiscussionDelta, MindsetReport, MindsetScope, ReportConfig,
};
use lectern::query::{self, Assist};
use lectern::{
    graph, ingest, serial, validate, OccurrenceClass, QueryError, SlideRef, SubjectIdentifier,
    TopicMap,
};
use serde::{Deserialize, Serialize};
use tokio::sync::{broadcast, Mutex};

use crate::error::ServiceError;
use crate::session::{ConfigPatch, EventKind, Session, SessionEvent, SessionState, Target};
use crate::store::{is_storable_id, LogWriter, Store};

const EVENT_BUFFER: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapSummary {
    pub map_id: String,
    pub topics: usize,
    pub occurrences: usize,
    pub associations: usize,
    pub scopes: usize,
}

impl MapSummary {
    fn of(map: &TopicMap) -> Self {
        MapSummary {
            map_id: map.map_id.clone(),
            topics: map.topics.len(),
            occurrences: map.occurrences.len(),
            associations: map.associations.len(),
            scopes: map.scopes.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlideView {
    pub slide: SlideRef,
    pub ordinal: Option<u32>,
    pub class: OccurrenceClass,
    pub title: String,
    pub body: String,
    pub anchors: Vec<SubjectIdentifier>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurrentSlide {
    pub session_id: String,
    pub state: SessionState,
    pub position: u32,
    pub corridor_length: u32,
    pub slide: SlideView,
}

/// Annotation as submitted by a participant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Submission {
    pub token: String,
    /// `deck/slide`, or a bare slide id when it is unambiguous.
    pub slide: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at: Option<u64>,
    #[serde(flatten)]
    pub kind: AnnotationKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ack {
    pub seq: u64,
}

struct SessionInner {
    session: Session,
    log: AnnotationLog,
    writer: LogWriter,
    history: Vec<SessionEvent>,
    next_event: u64,
}

impl SessionInner {
    fn emit(&mut self, kind: EventKind, tx: &broadcast::Sender<SessionEvent>) {
        let event = SessionEvent {
            seq: self.next_event,
            kind,
        };
        self.next_event += 1;
        self.history.push(event.clone());
        // no receivers is fine
        let _ = tx.send(event);
    }
}

struct SessionHandle {
    map: Arc<TopicMap>,
    corridor: Vec<SlideRef>,
    inner: Mutex<SessionInner>,
    events: broadcast::Sender<SessionEvent>,
}

impl SessionHandle {
    fn slide_at(&self, position: u32) -> SlideRef {
        self.corridor[position as usize - 1].clone()
    }
}

pub struct Lectern {
    store: Store,
    maps: RwLock<BTreeMap<String, Arc<TopicMap>>>,
    sessions: RwLock<BTreeMap<String, Arc<SessionHandle>>>,
}

fn now_millis() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// The corridor a session walks: the single deck's corridor, or the decks'
/// corridors one after another for merged maps.
fn session_corridor(map: &TopicMap) -> Vec<SlideRef> {
    map.corridors.values().flatten().cloned().collect()
}

impl Lectern {
    /// Opens a data directory and replays everything persisted in it.
    pub fn open(store: Store) -> Result<Arc<Self>, ServiceError> {
        let mut maps = BTreeMap::new();
        for map in store.load_maps()? {
            let violations = validate(&map);
            if !violations.is_empty() {
                return Err(ServiceError::InvalidMap(violations));
            }
            maps.insert(map.map_id.clone(), Arc::new(map));
        }
        let mut sessions = BTreeMap::new();
        for session in store.load_sessions()? {
            let map = maps
                .get(&session.map_id)
                .cloned()
                .ok_or_else(|| ServiceError::UnknownMap(session.map_id.clone()))?;
            let (log, writer) = store.open_log(&session.session_id)?;
            let next_event = session.control_events + log.len() as u64 + 1;
            let id = session.session_id.clone();
            sessions.insert(
                id,
                Arc::new(SessionHandle {
                    corridor: session_corridor(&map),
                    map,
                    inner: Mutex::new(SessionInner {
                        session,
                        log,
                        writer,
                        history: Vec::new(),
                        next_event,
                    }),
                    events: broadcast::channel(EVENT_BUFFER).0,
                }),
            );
        }
        Ok(Arc::new(Lectern {
            store,
            maps: RwLock::new(maps),
            sessions: RwLock::new(sessions),
        }))
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn map(&self, map_id: &str) -> Result<Arc<TopicMap>, ServiceError> {
        self.maps
            .read()
            .expect("map registry lock")
            .get(map_id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownMap(map_id.to_string()))
    }

    pub fn map_ids(&self) -> Vec<String> {
        self.maps.read().expect("map registry lock").keys().cloned().collect()
    }

    /// Validates, persists and registers a map under its own id.
    pub fn add_map(&self, map: TopicMap) -> Result<MapSummary, ServiceError> {
        let violations = validate(&map);
        if !violations.is_empty() {
            return Err(ServiceError::InvalidMap(violations));
        }
        if !is_storable_id(&map.map_id) {
            return Err(ServiceError::BadRequest(format!(
                "map id {:?} may only use ASCII letters, digits and -_.+",
                map.map_id
            )));
        }
        let mut maps = self.maps.write().expect("map registry lock");
        if maps.contains_key(&map.map_id) {
            return Err(ServiceError::MapExists(map.map_id.clone()));
        }
        self.store.save_map(&map)?;
        let summary = MapSummary::of(&map);
        maps.insert(map.map_id.clone(), Arc::new(map));
        Ok(summary)
    }

    /// Accepts either an annotated deck or a serialized topic map.
    pub fn upload(&self, document: &[u8]) -> Result<MapSummary, ServiceError> {
        let probe: serde_json::Value = serde_json::from_slice(document)
            .map_err(|e| ServiceError::BadRequest(format!("body is not JSON: {e}")))?;
        let map = if probe.get("deck_id").is_some() {
            ingest::ingest(document)?
        } else {
            serial::from_json(document)?
        };
        self.add_map(map)
    }

    pub fn merge_maps(&self, a: &str, b: &str, map_id: Option<String>) -> Result<MapSummary, ServiceError> {
        let mut merged = graph::merge(&*self.map(a)?, &*self.map(b)?)?;
        if let Some(id) = map_id {
            merged.map_id = id;
        }
        self.add_map(merged)
    }

    fn session(&self, session_id: &str) -> Result<Arc<SessionHandle>, ServiceError> {
        self.sessions
            .read()
            .expect("session registry lock")
            .get(session_id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(session_id.to_string()))
    }

    pub fn session_ids(&self) -> Vec<String> {
        self.sessions.read().expect("session registry lock").keys().cloned().collect()
    }

    pub fn create_session(&self, map_id: &str, config: ConfigPatch) -> Result<Session, ServiceError> {
        let map = self.map(map_id)?;
        let config = config.resolve()?;
        let corridor = session_corridor(&map);
        let session_id = format!("session-{}", uuid::Uuid::new_v4().simple());
        let session = Session::new(session_id.clone(), map_id.to_string(), corridor.len() as u32, config);
        self.store.save_session(&session)?;
        let (log, writer) = self.store.open_log(&session_id)?;
        let handle = SessionHandle {
            map,
            corridor,
            inner: Mutex::new(SessionInner {
                session: session.clone(),
                log,
                writer,
                history: Vec::new(),
                next_event: 1,
            }),
            events: broadcast::channel(EVENT_BUFFER).0,
        };
        self.sessions
            .write()
            .expect("session registry lock")
            .insert(session_id, Arc::new(handle));
        Ok(session)
    }

    /// Applies a state change, persists it, then publishes its event.
    async fn control(
        &self,
        session_id: &str,
        change: impl FnOnce(&mut Session) -> Result<(), ServiceError>,
        event: impl FnOnce(&SessionHandle, &Session) -> Option<EventKind>,
    ) -> Result<Session, ServiceError> {
        let handle = self.session(session_id)?;
        let mut inner = handle.inner.lock().await;
        let mut next = inner.session.clone();
        change(&mut next)?;
        self.store.save_session(&next)?;
        inner.session = next.clone();
        if let Some(kind) = event(&handle, &next) {
            inner.emit(kind, &handle.events);
        }
        Ok(next)
    }

    pub async fn start(&self, session_id: &str) -> Result<Session, ServiceError> {
        self.control(session_id, Session::start, |h, s| {
            Some(EventKind::SessionStarted {
                position: s.position,
                slide: h.slide_at(s.position),
            })
        })
        .await
    }

    pub async fn advance(&self, session_id: &str, target: Target) -> Result<Session, ServiceError> {
        self.control(
            session_id,
            |s| s.advance(target).map(|_| ()),
            |h, s| {
                Some(EventKind::SlideChanged {
                    position: s.position,
                    slide: h.slide_at(s.position),
                })
            },
        )
        .await
    }

    pub async fn end(&self, session_id: &str) -> Result<Session, ServiceError> {
        self.control(session_id, Session::end, |_, _| Some(EventKind::SessionEnded))
            .await
    }

    pub async fn join(&self, session_id: &str) -> Result<String, ServiceError> {
        let token = format!("p-{}", uuid::Uuid::new_v4().simple());
        let issued = token.clone();
        self.control(session_id, move |s| s.join(issued), |_, _| None)
            .await?;
        Ok(token)
    }

    pub async fn session_state(&self, session_id: &str) -> Result<Session, ServiceError> {
        Ok(self.session(session_id)?.inner.lock().await.session.clone())
    }

    pub async fn current(&self, session_id: &str) -> Result<CurrentSlide, ServiceError> {
        let handle = self.session(session_id)?;
        let session = handle.inner.lock().await.session.clone();
        let slide = handle.slide_at(session.position);
        let occurrence = handle.map.occurrence(&slide).expect("corridor slides exist");
        Ok(CurrentSlide {
            session_id: session.session_id,
            state: session.state,
            position: session.position,
            corridor_length: session.corridor_length,
            slide: SlideView {
                slide,
                ordinal: occurrence.ordinal,
                class: occurrence.class,
                title: occurrence.title.clone(),
                body: occurrence.body.clone(),
                anchors: occurrence.topic_refs.clone(),
            },
        })
    }

    fn resolve_slide(map: &TopicMap, spec: &str) -> Result<SlideRef, ServiceError> {
        map.resolve_slide(spec)
            .ok_or_else(|| QueryError::UnknownSlide(spec.to_string()).into())
    }

    pub async fn submit(&self, session_id: &str, submission: Submission) -> Result<Ack, ServiceError> {
        let handle = self.session(session_id)?;
        let slide = Self::resolve_slide(&handle.map, &submission.slide)?;
        let mut inner = handle.inner.lock().await;
        inner.session.require_live()?;
        if !inner.session.participants.contains(&submission.token) {
            return Err(ServiceError::UnknownParticipant);
        }
        let annotation = Annotation {
            participant: submission.token,
            slide,
            at: submission.at.unwrap_or_else(now_millis),
            kind: submission.kind,
        };
        let annotation = AnnotationLog::prepare(annotation, &handle.map, &inner.session.config.classes)?;
        let entry = crowd::LogEntry {
            seq: inner.log.next_seq(),
            annotation,
        };
        inner.writer.append(&entry)?;
        let seq = entry.seq;
        inner.log.push_entry(entry)?;
        let accepted = inner.log.len() as u64;
        inner.emit(
            EventKind::AnnotationAccepted {
                annotation_seq: seq,
                accepted,
            },
            &handle.events,
        );
        Ok(Ack { seq })
    }

    /// Consistent copy of the session and its log.
    pub async fn snapshot(&self, session_id: &str) -> Result<(Arc<TopicMap>, Session, AnnotationLog), ServiceError> {
        let handle = self.session(session_id)?;
        let inner = handle.inner.lock().await;
        Ok((handle.map.clone(), inner.session.clone(), inner.log.clone()))
    }

    /// Assistance results the audience may currently see.
    pub async fn assistance(&self, session_id: &str, slide: &str) -> Result<Vec<Assist>, ServiceError> {
        let (map, session, _) = self.snapshot(session_id).await?;
        let slide = Self::resolve_slide(&map, slide)?;
        Ok(query::assistance(&map, &slide)?
            .into_iter()
            .filter(|a| session.is_released(map.occurrence(&a.slide).and_then(|o| o.ordinal)))
            .collect())
    }

    pub async fn report(
        &self,
        session_id: &str,
        quorum: Option<usize>,
        threshold: Option<f64>,
    ) -> Result<ComprehensionReport, ServiceError> {
        let (map, session, log) = self.snapshot(session_id).await?;
        let config = ReportConfig::new(
            quorum.unwrap_or(session.config.quorum),
            threshold.unwrap_or(session.config.threshold),
        )?;
        Ok(crowd::comprehension_report(&log, &map, &session.config.classes, config))
    }

    pub async fn mindset(&self, session_id: &str, slide: Option<&str>) -> Result<MindsetReport, ServiceError> {
        let (map, _, log) = self.snapshot(session_id).await?;
        let scope = match slide {
            Some(spec) => MindsetScope::Slide(Self::resolve_slide(&map, spec)?),
            None => MindsetScope::WholeSession,
        };
        Ok(crowd::mindset_correlation(&log, &map, scope)?)
    }

    pub async fn discussion_topics(
        &self,
        session_id: &str,
        min_support: Option<usize>,
    ) -> Result<DiscussionDelta, ServiceError> {
        let (map, session, log) = self.snapshot(session_id).await?;
        Ok(crowd::discussion_topics(
            &log,
            &map,
            min_support.unwrap_or(session.config.min_support),
        )?)
    }

    pub async fn bookmarks(&self, session_id: &str) -> Result<Vec<BookmarkEntry>, ServiceError> {
        let (map, _, log) = self.snapshot(session_id).await?;
        Ok(crowd::bookmarks(&log, &map))
    }

    /// Events with sequence numbers above `since`, then live events, in
    /// order and without gaps. Ends after the session-ended event.
    pub async fn subscribe(
        &self,
        session_id: &str,
        since: u64,
    ) -> Result<impl Stream<Item = SessionEvent> + Send + 'static, ServiceError> {
        let handle = self.session(session_id)?;
        let (pending, receiver, ended) = {
            let inner = handle.inner.lock().await;
            let pending: VecDeque<SessionEvent> =
                inner.history.iter().filter(|e| e.seq > since).cloned().collect();
            let ended = inner.session.state == SessionState::Ended;
            (pending, handle.events.subscribe(), ended)
        };
        let state = Subscription {
            handle,
            receiver,
            pending,
            last_seen: since,
            finished: false,
            ended_before_subscribe: ended,
        };
        Ok(futures::stream::unfold(state, Subscription::next))
    }
}

struct Subscription {
    handle: Arc<SessionHandle>,
    receiver: broadcast::Receiver<SessionEvent>,
    pending: VecDeque<SessionEvent>,
    last_seen: u64,
    finished: bool,
    ended_before_subscribe: bool,
}

impl Subscription {
    async fn refill(&mut self) {
        let inner = self.handle.inner.lock().await;
        self.pending = inner
            .history
            .iter()
            .filter(|e| e.seq > self.last_seen)
            .cloned()
            .collect();
    }

    async fn next(mut self) -> Option<(SessionEvent, Self)> {
        loop {
            if self.finished {
                return None;
            }
            if let Some(event) = self.pending.pop_front() {
                if event.seq <= self.last_seen {
                    continue;
                }
                self.last_seen = event.seq;
                self.finished = matches!(event.kind, EventKind::SessionEnded);
                return Some((event, self));
            }
            if self.ended_before_subscribe {
                return None;
            }
            match self.receiver.recv().await {
                Ok(event) if event.seq <= self.last_seen => {}
                Ok(event) if event.seq == self.last_seen + 1 => self.pending.push_back(event),
                // missed something: the history has it
                Ok(_) | Err(broadcast::error::RecvError::Lagged(_)) => self.refill().await,
                Err(broadcast::error::RecvError::Closed) => return None,
            }
        }
    }
}
