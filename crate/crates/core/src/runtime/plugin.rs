//! Line-delimited JSON request/response exchange with external rerankers and
//! translators, over a child process's standard streams or HTTP POST.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
pub enum PluginError {
    /// The endpoint cannot be reached at all; callers should abort.
    #[error("plugin unreachable: {0}")]
    Unreachable(String),
    #[error("plugin did not answer within {0:?}")]
    Timeout(Duration),
    /// The endpoint answered with something that violates the protocol.
    #[error("plugin protocol error: {0}")]
    Protocol(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndpointKind {
    Reranker,
    Translator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transport {
    SubprocessStdio,
    Http,
}

/// Endpoint definition as configured. `address` is a command line (split on
/// whitespace) for subprocesses or a URL for HTTP.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PluginEndpoint {
    pub kind: EndpointKind,
    pub transport: Transport,
    pub address: String,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
}

fn default_timeout_ms() -> u64 {
    30_000
}

impl PluginEndpoint {
    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }
}

/// One request in flight at a time: `call` takes `&mut self`.
pub trait Endpoint {
    fn call(&mut self, request: &Value) -> Result<Value, PluginError>;
}

pub fn connect(def: &PluginEndpoint) -> Result<Box<dyn Endpoint>, PluginError> {
    Ok(match def.transport {
        Transport::SubprocessStdio => {
            let command: Vec<String> = def.address.split_whitespace().map(str::to_owned).collect();
            Box::new(SubprocessEndpoint::new(command, def.timeout())?)
        }
        Transport::Http => Box::new(HttpEndpoint::new(&def.address, def.timeout())),
    })
}

/// In-process endpoint, mostly for tests and embedding.
pub struct FnEndpoint<F>(pub F);

impl<F: FnMut(&Value) -> Result<Value, PluginError>> Endpoint for FnEndpoint<F> {
    fn call(&mut self, request: &Value) -> Result<Value, PluginError> {
        (self.0)(request)
    }
}

struct Running {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

/// Child process speaking one JSON object per line. After a timeout the child
/// is killed and restarted on the next call so late answers cannot be
/// mistaken for replies to later requests.
pub struct SubprocessEndpoint {
    command: Vec<String>,
    timeout: Duration,
    running: Option<Running>,
}

impl SubprocessEndpoint {
    pub fn new(command: Vec<String>, timeout: Duration) -> Result<Self, PluginError> {
        if command.is_empty() {
            return Err(PluginError::Unreachable("empty plugin command".into()));
        }
        Ok(Self {
            command,
            timeout,
            running: None,
        })
    }

    fn spawn(&self) -> Result<Running, PluginError> {
        let mut child = Command::new(&self.command[0])
            .args(&self.command[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| PluginError::Unreachable(format!("{}: {e}", self.command[0])))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Running {
            child,
            stdin,
            lines: rx,
        })
    }

    fn stop(&mut self) {
        if let Some(mut running) = self.running.take() {
            let _ = running.child.kill();
            let _ = running.child.wait();
        }
    }
}

impl Endpoint for SubprocessEndpoint {
    fn call(&mut self, request: &Value) -> Result<Value, PluginError> {
        if self.running.is_none() {
            self.running = Some(self.spawn()?);
        }
        let running = self.running.as_mut().expect("spawned");
        let line = format!("{request}\n");
        if let Err(e) = running.stdin.write_all(line.as_bytes()).and_then(|_| running.stdin.flush()) {
            self.stop();
            return Err(PluginError::Unreachable(format!("writing request: {e}")));
        }
        match running.lines.recv_timeout(self.timeout) {
            Ok(Ok(reply)) => serde_json::from_str(&reply).map_err(|e| PluginError::Protocol(format!("invalid JSON reply: {e}"))),
            Ok(Err(e)) => {
                self.stop();
                Err(PluginError::Unreachable(format!("reading reply: {e}")))
            }
            Err(RecvTimeoutError::Timeout) => {
                self.stop();
                Err(PluginError::Timeout(self.timeout))
            }
            Err(RecvTimeoutError::Disconnected) => {
                self.stop();
                Err(PluginError::Unreachable("plugin closed its output".into()))
            }
        }
    }
}

impl Drop for SubprocessEndpoint {
    fn drop(&mut self) {
        if let Some(mut running) = self.running.take() {
            // Closing stdin lets well-behaved plugins exit on their own.
            drop(running.stdin);
            if !matches!(running.child.try_wait(), Ok(Some(_))) {
                thread::sleep(Duration::from_millis(20));
                if !matches!(running.child.try_wait(), Ok(Some(_))) {
                    let _ = running.child.kill();
                }
            }
            let _ = running.child.wait();
        }
    }
}

pub struct HttpEndpoint {
    url: String,
    agent: ureq::Agent,
    timeout: Duration,
}

impl HttpEndpoint {
    pub fn new(url: &str, timeout: Duration) -> Self {
        Self {
            url: url.to_owned(),
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
            timeout,
        }
    }
}

impl Endpoint for HttpEndpoint {
    fn call(&mut self, request: &Value) -> Result<Value, PluginError> {
        match self.agent.post(&self.url).send_json(request) {
            Ok(response) => response
                .into_json()
                .map_err(|e| PluginError::Protocol(format!("invalid JSON reply: {e}"))),
            Err(ureq::Error::Status(code, _)) => Err(PluginError::Protocol(format!("HTTP status {code}"))),
            Err(ureq::Error::Transport(t)) if t.kind() == ureq::ErrorKind::Io && t.to_string().contains("timed out") => {
                Err(PluginError::Timeout(self.timeout))
            }
            Err(ureq::Error::Transport(t)) => Err(PluginError::Unreachable(t.to_string())),
        }
    }
}
