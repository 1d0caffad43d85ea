//! Line-delimited JSON transport to a scoring sidecar process.
//!
//! Every message is one JSON object on one LF-terminated line:
//!
//! ```text
//! -> {"type":"hello","version":1}
//! <- {"type":"ready","version":1,"scorer":"<name>"}
//! -> {"type":"score","id":"...","text":"...","tokens":[...]}
//! <- {"type":"scores","id":"...","scores":[...]}
//! <- {"type":"error","id":"...","message":"..."}
//! -> {"type":"bye"}
//! <- {"type":"bye"}
//! ```
//!
//! Requests may be pipelined. Responses can arrive in any order and are
//! matched to requests by id. A reader thread owns the sidecar's stdout and
//! hands each response to the waiting caller; writes to stdin are serialized
//! through a mutex, so one session can be shared between threads.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::{Arc, Mutex, MutexGuard};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{check_probability_scores, GapScorer, ScoreRequest};
use crate::error::{Error, Result};
use crate::segmenter::GapScores;
use crate::text::Sentence;

pub const PROTOCOL_VERSION: u32 = 1;
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Message {
    Hello {
        version: u32,
    },
    Ready {
        version: u32,
        scorer: String,
    },
    Score {
        id: String,
        text: String,
        tokens: Vec<String>,
    },
    Scores {
        id: String,
        scores: Vec<f64>,
    },
    Error {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        message: String,
    },
    Bye,
}

impl Message {
    pub fn to_line(&self) -> String {
        let mut line = serde_json::to_string(self).expect("message serializes");
        line.push('\n');
        line
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SidecarOptions {
    /// Per-request wait, also used for the handshake.
    pub timeout: Duration,
}

impl Default for SidecarOptions {
    fn default() -> Self {
        SidecarOptions {
            timeout: DEFAULT_TIMEOUT,
        }
    }
}

type Reply = std::result::Result<Vec<f64>, Error>;

#[derive(Default)]
struct Shared {
    waiters: HashMap<String, Sender<Reply>>,
    ready: Option<Sender<Result<String>>>,
    closed: Option<String>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

pub struct SidecarSession {
    child: Mutex<Child>,
    stdin: Mutex<Option<ChildStdin>>,
    shared: Arc<Mutex<Shared>>,
    reader: Mutex<Option<JoinHandle<()>>>,
    scorer: String,
    timeout: Duration,
}

impl std::fmt::Debug for SidecarSession {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SidecarSession")
            .field("scorer", &self.scorer)
            .field("timeout", &self.timeout)
            .finish_non_exhaustive()
    }
}

impl SidecarSession {
    /// Launch `argv` and complete the handshake.
    pub fn spawn<S: AsRef<str>>(argv: &[S], options: &SidecarOptions) -> Result<Self> {
        let (program, args) = argv
            .split_first()
            .ok_or_else(|| Error::Usage("empty sidecar command".into()))?;
        let mut child = Command::new(program.as_ref())
            .args(args.iter().map(AsRef::as_ref))
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Transport(format!("cannot start {:?}: {e}", program.as_ref())))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");

        let (ready_tx, ready_rx) = mpsc::channel();
        let shared = Arc::new(Mutex::new(Shared {
            ready: Some(ready_tx),
            ..Default::default()
        }));
        let reader = {
            let shared = Arc::clone(&shared);
            thread::Builder::new()
                .name("erseg-sidecar-reader".into())
                .spawn(move || read_loop(stdout, shared))
                .map_err(|e| Error::Transport(e.to_string()))?
        };

        let mut session = SidecarSession {
            child: Mutex::new(child),
            stdin: Mutex::new(Some(stdin)),
            shared,
            reader: Mutex::new(Some(reader)),
            scorer: String::new(),
            timeout: options.timeout,
        };
        let handshake = session
            .send(&Message::Hello {
                version: PROTOCOL_VERSION,
            })
            .and_then(|()| match ready_rx.recv_timeout(options.timeout) {
                Ok(result) => result,
                Err(RecvTimeoutError::Timeout) => Err(Error::Timeout {
                    id: "handshake".into(),
                    secs: options.timeout.as_secs(),
                }),
                Err(RecvTimeoutError::Disconnected) => {
                    Err(Error::Transport("sidecar exited during handshake".into()))
                }
            });
        match handshake {
            Ok(name) => {
                session.scorer = name;
                Ok(session)
            }
            Err(e) => {
                session.kill();
                Err(e)
            }
        }
    }

    /// Scorer name announced in the handshake.
    pub fn scorer_name(&self) -> &str {
        &self.scorer
    }

    fn send(&self, message: &Message) -> Result<()> {
        let mut guard = lock(&self.stdin);
        let stdin = guard
            .as_mut()
            .ok_or_else(|| Error::Transport("session is shut down".into()))?;
        stdin
            .write_all(message.to_line().as_bytes())
            .and_then(|()| stdin.flush())
            .map_err(|e| Error::Transport(format!("write to sidecar failed: {e}")))
    }

    fn register(&self, id: &str) -> Result<Receiver<Reply>> {
        let mut shared = lock(&self.shared);
        if let Some(reason) = &shared.closed {
            return Err(Error::Transport(reason.clone()));
        }
        if shared.waiters.contains_key(id) {
            return Err(Error::Protocol(format!(
                "request id {id:?} is already in flight"
            )));
        }
        let (tx, rx) = mpsc::channel();
        shared.waiters.insert(id.to_owned(), tx);
        Ok(rx)
    }

    fn forget(&self, id: &str) {
        lock(&self.shared).waiters.remove(id);
    }

    fn submit(&self, id: &str, sentence: &Sentence) -> Result<Receiver<Reply>> {
        let rx = self.register(id)?;
        let sent = self.send(&Message::Score {
            id: id.to_owned(),
            text: sentence.raw.clone(),
            tokens: sentence.tokens.clone(),
        });
        if let Err(e) = sent {
            self.forget(id);
            return Err(e);
        }
        Ok(rx)
    }

    fn wait(&self, id: &str, sentence: &Sentence, rx: Receiver<Reply>) -> Result<Vec<f64>> {
        let scores = match rx.recv_timeout(self.timeout) {
            Ok(reply) => reply?,
            Err(RecvTimeoutError::Timeout) => {
                self.forget(id);
                return Err(Error::Timeout {
                    id: id.to_owned(),
                    secs: self.timeout.as_secs(),
                });
            }
            Err(RecvTimeoutError::Disconnected) => {
                return Err(Error::Transport("sidecar exited".into()))
            }
        };
        if scores.len() != sentence.len() {
            return Err(Error::Protocol(format!(
                "response {id:?} has {} scores for {} tokens",
                scores.len(),
                sentence.len()
            )));
        }
        check_probability_scores(&scores)
            .map_err(|m| Error::Protocol(format!("response {id:?}: {m}")))?;
        Ok(scores)
    }

    /// Score one sentence.
    pub fn score(&self, id: &str, sentence: &Sentence) -> Result<Vec<f64>> {
        let rx = self.submit(id, sentence)?;
        self.wait(id, sentence, rx)
    }

    /// Send every request before waiting for any response.
    pub fn score_pipelined(&self, requests: &[ScoreRequest<'_>]) -> Vec<Result<Vec<f64>>> {
        let submitted: Vec<Result<Receiver<Reply>>> = requests
            .iter()
            .map(|r| self.submit(&r.id, r.sentence))
            .collect();
        submitted
            .into_iter()
            .zip(requests)
            .map(|(rx, r)| self.wait(&r.id, r.sentence, rx?))
            .collect()
    }

    /// Send `bye`, close the pipe and reap the process.
    pub fn shutdown(&self) -> Result<()> {
        let had_stdin = lock(&self.stdin).is_some();
        if had_stdin {
            let _ = self.send(&Message::Bye);
            lock(&self.stdin).take();
        }
        let deadline = Instant::now() + Duration::from_secs(5);
        let status = loop {
            let mut child = lock(&self.child);
            match child.try_wait() {
                Ok(Some(status)) => break Some(status),
                Ok(None) if Instant::now() < deadline => {}
                _ => {
                    let _ = child.kill();
                    let _ = child.wait();
                    break None;
                }
            }
            drop(child);
            thread::sleep(Duration::from_millis(10));
        };
        if let Some(handle) = lock(&self.reader).take() {
            let _ = handle.join();
        }
        match status {
            Some(s) if s.success() => Ok(()),
            Some(s) => Err(Error::Transport(format!("sidecar exited with {s}"))),
            None => Err(Error::Transport(
                "sidecar did not exit after bye; killed".into(),
            )),
        }
    }

    fn kill(&self) {
        lock(&self.stdin).take();
        {
            let mut child = lock(&self.child);
            let _ = child.kill();
            let _ = child.wait();
        }
        if let Some(handle) = lock(&self.reader).take() {
            let _ = handle.join();
        }
    }
}

impl Drop for SidecarSession {
    fn drop(&mut self) {
        if lock(&self.reader).is_some() {
            let _ = self.shutdown();
        }
    }
}

fn read_loop(stdout: ChildStdout, shared: Arc<Mutex<Shared>>) {
    let reader = BufReader::new(stdout);
    for line in reader.lines() {
        let Ok(line) = line else { break };
        if line.trim().is_empty() {
            continue;
        }
        let message: Message = match serde_json::from_str(&line) {
            Ok(m) => m,
            Err(e) => {
                log::warn!("sidecar sent an unreadable line ({e}): {line}");
                continue;
            }
        };
        let mut shared = lock(&shared);
        match message {
            Message::Ready { version, scorer } => {
                if let Some(tx) = shared.ready.take() {
                    let reply = if version == PROTOCOL_VERSION {
                        Ok(scorer)
                    } else {
                        Err(Error::Protocol(format!(
                            "sidecar speaks version {version}, expected {PROTOCOL_VERSION}"
                        )))
                    };
                    let _ = tx.send(reply);
                }
            }
            Message::Scores { id, scores } => match shared.waiters.remove(&id) {
                Some(tx) => {
                    let _ = tx.send(Ok(scores));
                }
                None => log::warn!("sidecar answered unknown request {id:?}"),
            },
            Message::Error { id, message } => {
                match id.and_then(|id| shared.waiters.remove(&id).map(|tx| (id, tx))) {
                    Some((id, tx)) => {
                        let _ = tx.send(Err(Error::Sidecar { id, message }));
                    }
                    None => {
                        if let Some(tx) = shared.ready.take() {
                            let _ = tx.send(Err(Error::Protocol(message)));
                        } else {
                            log::warn!("sidecar error: {message}");
                        }
                    }
                }
            }
            Message::Bye => {}
            other => log::warn!("unexpected message from sidecar: {other:?}"),
        }
    }

    let mut shared = lock(&shared);
    let reason = "sidecar exited".to_owned();
    for (_, tx) in shared.waiters.drain() {
        let _ = tx.send(Err(Error::Transport(reason.clone())));
    }
    if let Some(tx) = shared.ready.take() {
        let _ = tx.send(Err(Error::Transport(
            "sidecar exited during handshake".into(),
        )));
    }
    shared.closed = Some(reason);
}

/// [`GapScorer`] backed by a sidecar session. The sentence-final gap is set
/// to 1.0.
#[derive(Debug)]
pub struct SubprocessScorer {
    session: SidecarSession,
}

impl SubprocessScorer {
    pub fn new(session: SidecarSession) -> Self {
        SubprocessScorer { session }
    }

    pub fn session(&self) -> &SidecarSession {
        &self.session
    }

    pub fn into_session(self) -> SidecarSession {
        self.session
    }
}

impl GapScorer for SubprocessScorer {
    fn name(&self) -> &str {
        self.session.scorer_name()
    }

    fn score(&self, request: &ScoreRequest<'_>) -> Result<GapScores> {
        let scores = self.session.score(&request.id, request.sentence)?;
        Ok(GapScores::new(scores)?.with_final_gap(1.0))
    }

    fn score_batch(&self, requests: &[ScoreRequest<'_>]) -> Vec<Result<GapScores>> {
        self.session
            .score_pipelined(requests)
            .into_iter()
            .map(|r| Ok(GapScores::new(r?)?.with_final_gap(1.0)))
            .collect()
    }
}
