//! Translator backed by an external process speaking JSON Lines.
//!
//! Each request is one line on the child's stdin:
//! `{"request_id":1,"window_start_s":20.0,"feature_file":"v.feat","frame_range":[300,810],"input_text":"..."}`
//! and the child answers with one line on stdout:
//! `{"request_id":1,"output_text":"..."}`.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{TranslatorError, TranslatorPort};
use crate::captions::FeatureSlice;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslateRequest {
    pub request_id: u64,
    pub window_start_s: f64,
    pub feature_file: Option<String>,
    pub frame_range: [usize; 2],
    pub input_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslateResponse {
    pub request_id: u64,
    pub output_text: String,
}

struct Channel {
    child: Child,
    stdin: Option<ChildStdin>,
    stdout: BufReader<ChildStdout>,
}

/// One long-lived child process. Requests are serialized, so at most one is
/// in flight.
pub struct SubprocessTranslator {
    command: String,
    channel: Mutex<Channel>,
    next_id: AtomicU64,
}

impl std::fmt::Debug for SubprocessTranslator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SubprocessTranslator").field("command", &self.command).finish()
    }
}

impl SubprocessTranslator {
    /// Starts `command` through `sh -c`.
    pub fn spawn(command: &str) -> std::io::Result<Self> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take();
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(Self {
            command: command.to_owned(),
            channel: Mutex::new(Channel { child, stdin, stdout }),
            next_id: AtomicU64::new(1),
        })
    }

    fn exchange(&self, request: &TranslateRequest) -> Result<TranslateResponse, TranslatorError> {
        let err = |m: String| TranslatorError(format!("`{}`: {m}", self.command));
        let mut line = serde_json::to_string(request).map_err(|e| err(e.to_string()))?;
        line.push('\n');
        let mut ch = self.channel.lock().map_err(|_| err("channel poisoned".into()))?;
        let stdin = ch.stdin.as_mut().ok_or_else(|| err("stdin closed".into()))?;
        stdin
            .write_all(line.as_bytes())
            .and_then(|_| stdin.flush())
            .map_err(|e| err(format!("write failed: {e}")))?;
        let mut reply = String::new();
        let n = ch
            .stdout
            .read_line(&mut reply)
            .map_err(|e| err(format!("read failed: {e}")))?;
        if n == 0 {
            return Err(err("process closed its output".into()));
        }
        let response: TranslateResponse =
            serde_json::from_str(reply.trim_end_matches(['\n', '\r'])).map_err(|e| err(format!("bad response: {e}")))?;
        if response.request_id != request.request_id {
            return Err(err(format!(
                "response id {} does not match request {}",
                response.request_id, request.request_id
            )));
        }
        Ok(response)
    }
}

impl TranslatorPort for SubprocessTranslator {
    fn translate(&self, features: &FeatureSlice, input_text: &str) -> Result<String, TranslatorError> {
        let (a, b) = features.frame_range();
        let request = TranslateRequest {
            request_id: self.next_id.fetch_add(1, Ordering::Relaxed),
            window_start_s: features.span.start_s,
            feature_file: features.source.as_ref().map(|p| p.display().to_string()),
            frame_range: [a, b],
            input_text: input_text.to_owned(),
        };
        self.exchange(&request).map(|r| r.output_text)
    }
}

impl Drop for SubprocessTranslator {
    fn drop(&mut self) {
        if let Ok(ch) = self.channel.get_mut() {
            ch.stdin.take();
            let _ = ch.child.wait();
        }
    }
}
