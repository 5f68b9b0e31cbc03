//! Newline-delimited JSON protocol for adversaries living in another process.
//!
//! Request: `{"task": .., "value": [..], "low": [..], "high": [..], "reward": .., "prev_reward": ..}`
//! Reply:   `{"value": [..]}`
//!
//! One request line yields exactly one reply line.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::adversary::{Adversary, AdversaryContext, AdversaryError, AdversaryReply, AdversaryRequest};

pub const DEFAULT_TIMEOUT_MS: u64 = 5_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireRequest {
    pub task: String,
    pub value: Vec<f64>,
    pub low: Vec<f64>,
    pub high: Vec<f64>,
    pub reward: f64,
    pub prev_reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireReply {
    pub value: Vec<f64>,
}

impl From<&AdversaryRequest> for WireRequest {
    fn from(r: &AdversaryRequest) -> Self {
        Self {
            task: r.task_description.clone(),
            value: r.value.clone(),
            low: r.region_low.clone(),
            high: r.region_high.clone(),
            reward: r.current_reward,
            prev_reward: r.previous_reward,
        }
    }
}

/// A transport that carries one line out and one line back.
pub trait Endpoint: Send {
    fn roundtrip(&mut self, line: &str, timeout: Duration) -> Result<String, AdversaryError>;
}

/// Child process speaking the protocol over stdin/stdout.
pub struct ChildProcessEndpoint {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    poisoned: bool,
}

impl ChildProcessEndpoint {
    pub fn spawn(command: &[String]) -> Result<Self, AdversaryError> {
        let (program, args) = command.split_first().ok_or_else(|| AdversaryError::Malformed("empty command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped");
        let stdout = child.stdout.take().expect("piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Self { child, stdin, lines: rx, poisoned: false })
    }
}

impl Endpoint for ChildProcessEndpoint {
    fn roundtrip(&mut self, line: &str, timeout: Duration) -> Result<String, AdversaryError> {
        if self.poisoned {
            return Err(AdversaryError::Poisoned);
        }
        // A late reply to a timed-out request would desynchronise the stream,
        // so any failure poisons the endpoint.
        self.poisoned = true;
        writeln!(self.stdin, "{line}")?;
        self.stdin.flush()?;
        let reply = match self.lines.recv_timeout(timeout) {
            Ok(Ok(reply)) => reply,
            Ok(Err(e)) => return Err(e.into()),
            Err(RecvTimeoutError::Timeout) => return Err(AdversaryError::Timeout(timeout.as_millis() as u64)),
            Err(RecvTimeoutError::Disconnected) => return Err(AdversaryError::Closed),
        };
        self.poisoned = false;
        Ok(reply)
    }
}

impl Drop for ChildProcessEndpoint {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Socket endpoint (`host:port`).
pub struct TcpEndpoint {
    writer: TcpStream,
    reader: BufReader<TcpStream>,
    poisoned: bool,
}

impl TcpEndpoint {
    pub fn connect(address: &str) -> Result<Self, AdversaryError> {
        let stream = TcpStream::connect(address)?;
        let reader = BufReader::new(stream.try_clone()?);
        Ok(Self { writer: stream, reader, poisoned: false })
    }
}

impl Endpoint for TcpEndpoint {
    fn roundtrip(&mut self, line: &str, timeout: Duration) -> Result<String, AdversaryError> {
        if self.poisoned {
            return Err(AdversaryError::Poisoned);
        }
        self.poisoned = true;
        self.writer.set_read_timeout(Some(timeout.max(Duration::from_millis(1))))?;
        writeln!(self.writer, "{line}")?;
        self.writer.flush()?;
        let mut reply = String::new();
        match self.reader.read_line(&mut reply) {
            Ok(0) => return Err(AdversaryError::Closed),
            Ok(_) => {}
            Err(e) if matches!(e.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) => {
                return Err(AdversaryError::Timeout(timeout.as_millis() as u64))
            }
            Err(e) => return Err(e.into()),
        }
        self.poisoned = false;
        Ok(reply.trim_end_matches(['\r', '\n']).to_string())
    }
}

/// Sends one request and parses one reply. The reply must have the request's length.
pub fn external_adversary_roundtrip(
    req: &AdversaryRequest,
    endpoint: &mut dyn Endpoint,
    timeout: Duration,
) -> Result<AdversaryReply, AdversaryError> {
    let line = serde_json::to_string(&WireRequest::from(req)).expect("plain data serializes");
    let reply = endpoint.roundtrip(&line, timeout)?;
    let parsed: WireReply = serde_json::from_str(&reply).map_err(|e| AdversaryError::Malformed(e.to_string()))?;
    if parsed.value.len() != req.value.len() {
        return Err(AdversaryError::Malformed(format!(
            "expected {} values, got {}",
            req.value.len(),
            parsed.value.len()
        )));
    }
    if parsed.value.iter().any(|x| !x.is_finite()) {
        return Err(AdversaryError::Malformed("non-finite value".into()));
    }
    Ok(AdversaryReply { value: parsed.value })
}

pub struct ExternalAdversary {
    endpoint: Box<dyn Endpoint>,
    timeout: Duration,
}

impl ExternalAdversary {
    pub fn new(endpoint: Box<dyn Endpoint>, timeout_ms: u64) -> Self {
        Self { endpoint, timeout: Duration::from_millis(timeout_ms) }
    }
}

impl Adversary for ExternalAdversary {
    fn name(&self) -> &'static str {
        "external"
    }

    fn perturb(&mut self, req: &AdversaryRequest, _ctx: AdversaryContext<'_>) -> Result<AdversaryReply, AdversaryError> {
        external_adversary_roundtrip(req, self.endpoint.as_mut(), self.timeout)
    }
}

/// Scripted behaviours for the mock adversary.
#[derive(Debug, Clone, PartialEq)]
pub enum MockMode {
    Echo,
    Constant(Vec<f64>),
    RegionHigh,
    RegionLow,
    /// Replies with one element too many.
    WrongLength,
    /// Replies with text that is not a reply record.
    Garbage,
    /// Reads requests and never answers.
    Silent,
}

impl MockMode {
    pub fn parse(mode: &str, value: Option<&[f64]>) -> Result<Self, String> {
        Ok(match mode {
            "echo" => MockMode::Echo,
            "constant" => MockMode::Constant(value.ok_or("mode `constant` needs --value")?.to_vec()),
            "region-high" => MockMode::RegionHigh,
            "region-low" => MockMode::RegionLow,
            "malformed" | "wrong-length" => MockMode::WrongLength,
            "garbage" => MockMode::Garbage,
            "silent" => MockMode::Silent,
            other => return Err(format!("unknown mock mode `{other}`")),
        })
    }
}

/// Serves the protocol until `input` closes.
pub fn serve_mock(mode: &MockMode, input: impl BufRead, mut output: impl Write) -> std::io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let req: WireRequest = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(_) => {
                writeln!(output, "{{\"error\":\"bad request\"}}")?;
                output.flush()?;
                continue;
            }
        };
        let value = match mode {
            MockMode::Silent => continue,
            MockMode::Garbage => {
                writeln!(output, "not a reply")?;
                output.flush()?;
                continue;
            }
            MockMode::Echo => req.value,
            MockMode::Constant(v) => v.clone(),
            MockMode::RegionHigh => req.high,
            MockMode::RegionLow => req.low,
            MockMode::WrongLength => {
                let mut v = req.value;
                v.push(0.0);
                v
            }
        };
        writeln!(output, "{}", serde_json::to_string(&WireReply { value }).expect("serializes"))?;
        output.flush()?;
    }
    Ok(())
}
