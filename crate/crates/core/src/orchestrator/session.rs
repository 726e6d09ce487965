use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::ml_engine::Task;
use crate::preprocess::Predicate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    AwaitQuery,
    CandidateShown,
    AwaitAlgorithm,
    Done,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::AwaitQuery => "await_query",
            Phase::CandidateShown => "candidate_shown",
            Phase::AwaitAlgorithm => "await_algorithm",
            Phase::Done => "done",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplyKind {
    Answer,
    CandidateCard,
    TrainOffer,
    AlgorithmMenu,
    Clarification,
    Guide,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reply {
    pub kind: ReplyKind,
    pub text: String,
    pub payload: Value,
}

impl Reply {
    pub fn new(kind: ReplyKind, text: impl Into<String>, payload: Value) -> Self {
        Self { kind, text: text.into(), payload }
    }

    pub fn text_only(kind: ReplyKind, text: impl Into<String>) -> Self {
        Self::new(kind, text, Value::Null)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub role: Role,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ReplyKind>,
}

/// The part of a session that decides how the next message is handled.
/// Models and datasets are kept by name and resolved against the catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub phase: Phase,
    #[serde(default)]
    pub pending_query: Option<String>,
    #[serde(default)]
    pub matched_model: Option<String>,
    #[serde(default)]
    pub matched_dataset: Option<String>,
    #[serde(default)]
    pub model_score: Option<f64>,
    #[serde(default)]
    pub dataset_score: Option<f64>,
    #[serde(default)]
    pub predicate: Option<Predicate>,
    /// Task the pending query asks for, used to highlight a default algorithm.
    #[serde(default)]
    pub task: Option<Task>,
}

impl Default for SessionState {
    fn default() -> Self {
        Self {
            phase: Phase::AwaitQuery,
            pending_query: None,
            matched_model: None,
            matched_dataset: None,
            model_score: None,
            dataset_score: None,
            predicate: None,
            task: None,
        }
    }
}

impl SessionState {
    /// Back to waiting for a query, forgetting any candidate.
    pub fn reset(&mut self, phase: Phase) {
        *self = Self { phase, ..Self::default() };
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Session {
    pub id: String,
    pub created_at: DateTime<Utc>,
    #[serde(flatten)]
    pub state: SessionState,
    pub transcript: Vec<Turn>,
}

impl Session {
    pub fn new(id: String) -> Self {
        Self { id, created_at: Utc::now(), state: SessionState::default(), transcript: Vec::new() }
    }
}

/// One line of a session log: the header, or one exchange with the state it
/// left behind.
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum LogLine {
    Exchange { user: String, reply: Reply, state: SessionState },
    Header { id: String, created_at: DateTime<Utc> },
}

/// Append-only `sessions/<id>.jsonl` files.
#[derive(Debug, Clone)]
pub struct SessionLog {
    dir: PathBuf,
}

impl SessionLog {
    pub fn new(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.jsonl"))
    }

    fn append(&self, id: &str, line: &LogLine) -> std::io::Result<()> {
        let mut bytes = serde_json::to_vec(line).map_err(std::io::Error::other)?;
        bytes.push(b'\n');
        let mut f = OpenOptions::new().create(true).append(true).open(self.path(id))?;
        f.write_all(&bytes)?;
        f.sync_data()
    }

    pub fn create(&self, session: &Session) -> std::io::Result<()> {
        self.append(&session.id, &LogLine::Header { id: session.id.clone(), created_at: session.created_at })
    }

    pub fn record(&self, session: &Session, user: &str, reply: &Reply) -> std::io::Result<()> {
        let line = LogLine::Exchange { user: user.to_string(), reply: reply.clone(), state: session.state.clone() };
        self.append(&session.id, &line)
    }

    /// Every session with a readable header. A torn last line from an
    /// interrupted write is skipped.
    pub fn load_all(&self) -> std::io::Result<Vec<Session>> {
        let mut paths: Vec<PathBuf> = fs::read_dir(&self.dir)?
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        let mut out = Vec::new();
        for p in paths {
            match Self::load(&p) {
                Ok(Some(s)) => out.push(s),
                Ok(None) => tracing::warn!(path = %p.display(), "session log without header"),
                Err(e) => tracing::warn!(path = %p.display(), error = %e, "unreadable session log"),
            }
        }
        Ok(out)
    }

    fn load(path: &Path) -> std::io::Result<Option<Session>> {
        let mut session: Option<Session> = None;
        for line in BufReader::new(File::open(path)?).lines() {
            let line = line?;
            match serde_json::from_str::<LogLine>(&line) {
                Ok(LogLine::Header { id, created_at }) if session.is_none() => {
                    session = Some(Session { id, created_at, state: SessionState::default(), transcript: Vec::new() });
                }
                Ok(LogLine::Exchange { user, reply, state }) => {
                    let Some(s) = session.as_mut() else { continue };
                    s.transcript.push(Turn { role: Role::User, text: user, kind: None });
                    s.transcript.push(Turn { role: Role::Assistant, text: reply.text, kind: Some(reply.kind) });
                    s.state = state;
                }
                _ => tracing::warn!(path = %path.display(), "skipping unreadable session log line"),
            }
        }
        Ok(session)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn log_round_trip_and_torn_line() {
        let dir = tempfile::tempdir().unwrap();
        let log = SessionLog::new(dir.path()).unwrap();
        let mut s = Session::new("abc".into());
        log.create(&s).unwrap();
        s.state.phase = Phase::CandidateShown;
        s.state.pending_query = Some("predict price".into());
        s.state.matched_dataset = Some("houses".into());
        let reply = Reply::new(ReplyKind::TrainOffer, "train?", json!({"dataset": "houses"}));
        log.record(&s, "predict price", &reply).unwrap();
        let mut f = OpenOptions::new().append(true).open(dir.path().join("abc.jsonl")).unwrap();
        f.write_all(b"{\"user\":\"y\",\"rep").unwrap();

        let loaded = log.load_all().unwrap();
        assert_eq!(loaded.len(), 1);
        assert_eq!(loaded[0].state, s.state);
        assert_eq!(loaded[0].created_at, s.created_at);
        assert_eq!(loaded[0].transcript.len(), 2);
        assert_eq!(loaded[0].transcript[1].kind, Some(ReplyKind::TrainOffer));
    }
}
