use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use serde_json::{json, Map, Value};

use super::protocol::{BackendRequest, BackendResponse, Hello, WireTarget, PROTOCOL_VERSION};
use super::{check_target, expect_task, sample_breakdown, update_weight, Backend, Target, TrainContext};
use crate::corpus::{format_control_input, SimplificationInstance, Task};
use crate::error::{Error, Result};
use crate::loss::{total_loss, BatchLoss};
use crate::textproc::Document;

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalConfig {
    pub timeout: Duration,
    /// Sent verbatim in the `config` object of every request.
    pub options: Map<String, Value>,
}

impl Default for ExternalConfig {
    fn default() -> Self {
        let mut options = Map::new();
        options.insert("learning_rate".into(), json!(2e-5));
        options.insert("weight_decay".into(), json!(0.01));
        options.insert("batch_size".into(), json!(8));
        ExternalConfig {
            timeout: Duration::from_secs(30),
            options,
        }
    }
}

/// Handle to a child process speaking the line protocol. One request is in
/// flight at a time.
#[derive(Debug)]
pub struct ExternalBackend {
    name: String,
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    next_id: u64,
    config: ExternalConfig,
    ops: Vec<String>,
}

/// Starts `command` (program followed by whitespace-separated arguments) and
/// performs the version handshake.
pub fn spawn_external(command: &str, config: ExternalConfig) -> Result<ExternalBackend> {
    let mut parts = command.split_whitespace();
    let program = parts
        .next()
        .ok_or_else(|| Error::BackendUnavailable("empty backend command".into()))?;
    let mut child = Command::new(program)
        .args(parts)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::inherit())
        .spawn()
        .map_err(|e| Error::BackendUnavailable(format!("cannot start {program:?}: {e}")))?;
    let stdout = child.stdout.take().expect("stdout is piped");
    let stdin = child.stdin.take();
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for line in BufReader::new(stdout).lines() {
            if tx.send(line).is_err() {
                break;
            }
        }
    });
    let mut backend = ExternalBackend {
        name: std::path::Path::new(program)
            .file_name()
            .map_or_else(|| program.to_string(), |n| n.to_string_lossy().into_owned()),
        child,
        stdin,
        lines: rx,
        next_id: 1,
        config,
        ops: Vec::new(),
    };
    backend.handshake()?;
    Ok(backend)
}

impl ExternalBackend {
    pub fn ops(&self) -> &[String] {
        &self.ops
    }

    fn send_line(&mut self, line: &str) -> Result<()> {
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| Error::BackendUnavailable("backend input is closed".into()))?;
        stdin
            .write_all(line.as_bytes())
            .and_then(|_| stdin.write_all(b"\n"))
            .and_then(|_| stdin.flush())
            .map_err(|e| Error::BackendUnavailable(format!("write to backend failed: {e}")))
    }

    fn read_response(&mut self, id: u64) -> Result<BackendResponse> {
        let line = match self.lines.recv_timeout(self.config.timeout) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => return Err(Error::BackendUnavailable(format!("read from backend failed: {e}"))),
            Err(RecvTimeoutError::Timeout) => {
                return Err(Error::BackendUnavailable(format!(
                    "no response within {:?}",
                    self.config.timeout
                )))
            }
            Err(RecvTimeoutError::Disconnected) => {
                return Err(Error::BackendUnavailable("backend closed its output".into()))
            }
        };
        let response: BackendResponse = serde_json::from_str(&line)
            .map_err(|e| Error::ProtocolViolation(format!("malformed response {line:?}: {e}")))?;
        if response.id != id {
            return Err(Error::ProtocolViolation(format!(
                "expected response id {id}, got {}",
                response.id
            )));
        }
        Ok(response)
    }

    fn handshake(&mut self) -> Result<()> {
        let hello = serde_json::to_string(&Hello::new())?;
        self.send_line(&hello)?;
        let response = self.read_response(0)?;
        match response.version {
            Some(PROTOCOL_VERSION) => {}
            Some(v) => {
                return Err(Error::ProtocolViolation(format!(
                    "protocol version mismatch: client speaks {PROTOCOL_VERSION}, backend speaks {v}"
                )))
            }
            None => {
                return Err(Error::ProtocolViolation(
                    "handshake response carries no version".into(),
                ))
            }
        }
        if !response.ok {
            return Err(Error::BackendRejected {
                op: "hello".into(),
                error: response.error.unwrap_or_default(),
            });
        }
        self.ops = response.ops.unwrap_or_default();
        Ok(())
    }

    fn call(
        &mut self,
        op: &str,
        task: Task,
        input: String,
        target: Option<WireTarget>,
        extra: Map<String, Value>,
    ) -> Result<BackendResponse> {
        let id = self.next_id;
        self.next_id += 1;
        let mut config = self.config.options.clone();
        config.extend(extra);
        let request = BackendRequest {
            id,
            op: op.into(),
            task: task.to_string(),
            input,
            target,
            config,
        };
        self.send_line(&serde_json::to_string(&request)?)?;
        let response = self.read_response(id)?;
        if !response.ok {
            return Err(Error::BackendRejected {
                op: op.into(),
                error: response.error.unwrap_or_else(|| "unknown".into()),
            });
        }
        Ok(response)
    }
}

fn control_text(task: Task, doc: &Document) -> Result<String> {
    let text = doc.text();
    if text.is_empty() {
        return Err(Error::NoText(format!("document {} has no text", doc.id)));
    }
    format_control_input(task, &text)
}

fn missing(op: &str, field: &str) -> Error {
    Error::ProtocolViolation(format!("{op} response has no {field}"))
}

impl Backend for ExternalBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn generate(&mut self, task: Task, doc: &Document) -> Result<Document> {
        expect_task("generate", Task::Simplify, task)?;
        let input = control_text(task, doc)?;
        let response = self.call("generate", task, input, None, Map::new())?;
        let output = response.output.ok_or_else(|| missing("generate", "output"))?;
        Document::framed(doc.id.clone(), &output, doc.sentences.len().max(1))
            .map_err(|e| Error::ProtocolViolation(format!("generated text is unusable: {e}")))
    }

    fn score(&mut self, task: Task, input: &Document, target: &Target) -> Result<f64> {
        check_target(task, target)?;
        let text = control_text(task, input)?;
        let wire = match target {
            Target::Text(d) => WireTarget::Text(d.text()),
            Target::Label(l) => WireTarget::Label(*l),
        };
        let response = self.call("score", task, text, Some(wire), Map::new())?;
        let loss = response.loss.ok_or_else(|| missing("score", "loss"))?;
        if !(loss >= 0.0 && loss.is_finite()) {
            return Err(Error::ProtocolViolation(format!("score returned invalid loss {loss}")));
        }
        Ok(loss)
    }

    fn classify(&mut self, task: Task, doc: &Document) -> Result<u8> {
        expect_task("classify", Task::ReadClassify, task)?;
        let text = control_text(task, doc)?;
        let response = self.call("classify", task, text, None, Map::new())?;
        match response.label {
            Some(l @ 1..=4) => Ok(l),
            Some(l) => Err(Error::ProtocolViolation(format!("classify returned label {l}"))),
            None => Err(missing("classify", "label")),
        }
    }

    fn train_step(&mut self, batch: &[SimplificationInstance], ctx: TrainContext<'_>) -> Result<BatchLoss<f64>> {
        if batch.is_empty() {
            return Err(Error::NoSamples("empty training batch".into()));
        }
        let mut samples = Vec::with_capacity(batch.len());
        for inst in batch {
            samples.push(sample_breakdown(self, inst, ctx)?);
        }
        for (inst, b) in batch.iter().zip(&samples) {
            let mut extra = Map::new();
            extra.insert("mode".into(), json!(ctx.loss.mode.to_string()));
            extra.insert("delta".into(), json!(ctx.loss.delta));
            extra.insert("gate".into(), json!(update_weight(b, ctx.loss)?));
            extra.insert("readability_label".into(), json!(inst.readability_label));
            let input = control_text(Task::Simplify, &inst.source)?;
            let target = Some(WireTarget::Text(inst.target.text()));
            self.call("train_step", Task::Simplify, input, target, extra)?;
        }
        total_loss(samples)
    }

    fn reset(&mut self) -> Result<()> {
        let input = format_control_input(Task::Simplify, "reset")?;
        self.call("reset", Task::Simplify, input, None, Map::new())?;
        Ok(())
    }
}

impl Drop for ExternalBackend {
    fn drop(&mut self) {
        drop(self.stdin.take());
        if self.child.try_wait().ok().flatten().is_none() {
            let _ = self.child.kill();
        }
        let _ = self.child.wait();
    }
}
