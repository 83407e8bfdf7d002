//! Protocol test double: answers every request without a model.
//!
//! generate echoes its input minus the control token, score returns 0 when
//! the target equals that text and 1 otherwise, classify returns 1.
//!
//! Flags: `--version N` announces another protocol version, `--bad-ids`
//! answers requests with a shifted id, `--mute` never answers.

use std::io::{self, BufRead, Write};

use simdoc::backend::protocol::{BackendRequest, BackendResponse, WireTarget, OPS, PROTOCOL_VERSION};
use simdoc::corpus::{strip_control_input, Task};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut version = PROTOCOL_VERSION;
    let mut bad_ids = false;
    let mut mute = false;
    let mut it = args.iter();
    while let Some(a) = it.next() {
        match a.as_str() {
            "--version" => {
                version = it.next().and_then(|v| v.parse().ok()).unwrap_or(version);
            }
            "--bad-ids" => bad_ids = true,
            "--mute" => mute = true,
            other => {
                eprintln!("echo-backend: unknown flag {other}");
                std::process::exit(2);
            }
        }
    }

    let stdin = io::stdin();
    let mut stdout = io::stdout().lock();
    for line in stdin.lock().lines() {
        let Ok(line) = line else { break };
        if mute {
            continue;
        }
        let value: serde_json::Value = match serde_json::from_str(&line) {
            Ok(v) => v,
            Err(_) => {
                reply(&mut stdout, &BackendResponse::failure(0, "malformed_request"));
                continue;
            }
        };
        let id = value.get("id").and_then(|v| v.as_u64()).unwrap_or(0);
        if value.get("op").and_then(|v| v.as_str()) == Some("hello") {
            let mut r = BackendResponse::success(id);
            r.version = Some(version);
            r.ops = Some(OPS.iter().map(|s| s.to_string()).collect());
            reply(&mut stdout, &r);
            continue;
        }
        let reply_id = if bad_ids { id + 1 } else { id };
        let response = match serde_json::from_value::<BackendRequest>(value) {
            Ok(req) => handle(reply_id, &req),
            Err(_) => BackendResponse::failure(reply_id, "malformed_request"),
        };
        reply(&mut stdout, &response);
    }
}

fn handle(id: u64, req: &BackendRequest) -> BackendResponse {
    let Ok(task) = req.task.parse::<Task>() else {
        return BackendResponse::failure(id, "unknown_task");
    };
    let Some(text) = strip_control_input(task, &req.input) else {
        return BackendResponse::failure(id, "missing_control_token");
    };
    let mut r = BackendResponse::success(id);
    match req.op.as_str() {
        "generate" => r.output = Some(text.to_string()),
        "score" => {
            r.loss = Some(match &req.target {
                Some(WireTarget::Text(t)) if t == text => 0.0,
                Some(_) => 1.0,
                None => return BackendResponse::failure(id, "missing_target"),
            })
        }
        "classify" => r.label = Some(1),
        "train_step" => r.loss = Some(0.0),
        "reset" => {}
        _ => return BackendResponse::failure(id, "unsupported_op"),
    }
    r
}

fn reply(out: &mut impl Write, response: &BackendResponse) {
    let line = serde_json::to_string(response).expect("response serializes");
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}
