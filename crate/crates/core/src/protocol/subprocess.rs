//! Adapters running as child processes speaking newline-delimited JSON on
//! stdin/stdout. Stderr lines are forwarded to the log.

use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use super::session::{SessionError, SessionFactory, Transport, TransportError};

/// How to launch an external adapter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdapterCommand {
    pub program: PathBuf,
    pub args: Vec<String>,
}

impl AdapterCommand {
    pub fn new(program: impl Into<PathBuf>) -> Self {
        Self {
            program: program.into(),
            args: Vec::new(),
        }
    }

    pub fn arg(mut self, arg: impl Into<String>) -> Self {
        self.args.push(arg.into());
        self
    }

    pub fn spawn(&self) -> Result<SubprocessTransport, SessionError> {
        SubprocessTransport::spawn(self)
    }
}

impl SessionFactory for AdapterCommand {
    fn connect(&self) -> Result<Box<dyn Transport>, SessionError> {
        Ok(Box::new(self.spawn()?))
    }
}

pub struct SubprocessTransport {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<Vec<u8>>>,
}

impl SubprocessTransport {
    pub fn spawn(command: &AdapterCommand) -> Result<Self, SessionError> {
        let mut child = Command::new(&command.program)
            .args(&command.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| SessionError::Unavailable(format!("{}: {e}", command.program.display())))?;

        let stdout = child.stdout.take().expect("stdout piped");
        let stderr = child.stderr.take().expect("stderr piped");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            let mut reader = BufReader::new(stdout);
            loop {
                let mut line = Vec::new();
                match reader.read_until(b'\n', &mut line) {
                    Ok(0) => break,
                    Ok(_) => {
                        if tx.send(Ok(line)).is_err() {
                            break;
                        }
                    }
                    Err(e) => {
                        let _ = tx.send(Err(e));
                        break;
                    }
                }
            }
        });
        let name = command.program.display().to_string();
        thread::spawn(move || {
            for line in BufReader::new(stderr).lines().map_while(Result::ok) {
                log::debug!("[{name}] {line}");
            }
        });

        Ok(Self {
            stdin: child.stdin.take(),
            child,
            lines,
        })
    }

    fn exit_detail(&mut self) -> String {
        match self.child.try_wait() {
            Ok(Some(status)) => format!("adapter exited with {status}"),
            _ => "adapter closed its output".to_string(),
        }
    }
}

impl Transport for SubprocessTransport {
    fn send_line(&mut self, line: &[u8]) -> Result<(), TransportError> {
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| TransportError::Closed("stdin already closed".into()))?;
        stdin
            .write_all(line)
            .and_then(|()| stdin.flush())
            .map_err(|e| TransportError::Closed(e.to_string()))
    }

    fn recv_line(&mut self, deadline: Duration) -> Result<Vec<u8>, TransportError> {
        match self.lines.recv_timeout(deadline) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(TransportError::Closed(e.to_string())),
            Err(RecvTimeoutError::Timeout) => Err(TransportError::Timeout),
            Err(RecvTimeoutError::Disconnected) => {
                // Give the exit status a moment to become observable.
                let _ = self.child.wait_timeout_poll(Duration::from_millis(200));
                Err(TransportError::Closed(self.exit_detail()))
            }
        }
    }

    fn close(&mut self, grace: Duration) {
        self.stdin.take();
        if !matches!(self.child.wait_timeout_poll(grace), Ok(true)) {
            log::warn!("adapter did not exit within {grace:?}; killing it");
            let _ = self.child.kill();
            let _ = self.child.wait();
        }
    }
}

impl Drop for SubprocessTransport {
    fn drop(&mut self) {
        if let Ok(None) = self.child.try_wait() {
            let _ = self.child.kill();
            let _ = self.child.wait();
        }
    }
}

trait WaitPoll {
    /// True if the child exited within `limit`.
    fn wait_timeout_poll(&mut self, limit: Duration) -> std::io::Result<bool>;
}

impl WaitPoll for Child {
    fn wait_timeout_poll(&mut self, limit: Duration) -> std::io::Result<bool> {
        let start = Instant::now();
        loop {
            if self.try_wait()?.is_some() {
                return Ok(true);
            }
            if start.elapsed() >= limit {
                return Ok(false);
            }
            thread::sleep(Duration::from_millis(10));
        }
    }
}
