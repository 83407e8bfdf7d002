//! Newline-delimited JSON messages exchanged with external backends.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const PROTOCOL_VERSION: u32 = 1;

pub const OPS: [&str; 5] = ["generate", "score", "classify", "train_step", "reset"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hello {
    pub id: u64,
    pub op: String,
    pub version: u32,
}

impl Hello {
    pub fn new() -> Self {
        Hello {
            id: 0,
            op: "hello".into(),
            version: PROTOCOL_VERSION,
        }
    }
}

impl Default for Hello {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WireTarget {
    Label(u8),
    Text(String),
}

/// One request. Keys serialize in wire order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendRequest {
    pub id: u64,
    pub op: String,
    pub task: String,
    pub input: String,
    pub target: Option<WireTarget>,
    pub config: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BackendResponse {
    pub id: u64,
    pub ok: bool,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub loss: Option<f64>,
    #[serde(default)]
    pub label: Option<u8>,
    #[serde(default)]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ops: Option<Vec<String>>,
}

impl BackendResponse {
    pub fn success(id: u64) -> Self {
        BackendResponse {
            id,
            ok: true,
            ..Default::default()
        }
    }

    pub fn failure(id: u64, error: impl Into<String>) -> Self {
        BackendResponse {
            id,
            ok: false,
            error: Some(error.into()),
            ..Default::default()
        }
    }
}
