//! Wire messages. One JSON object per line, `id` plus a `type` tag.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ClassFeatures, ClassId, Mutant, MutantId, OrderRunRecord, Outcome, TestId, TestOrder};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdapterRequest {
    pub id: u64,
    #[serde(flatten)]
    pub body: RequestBody,
}

/// Durations on the wire are milliseconds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RequestBody {
    Handshake,
    ListClasses,
    ListTests {
        class: ClassId,
    },
    DescribeClass {
        class: ClassId,
    },
    EnumerateMutationPoints {
        test: TestId,
    },
    MaterializeMutant {
        test: TestId,
        point_index: usize,
    },
    RunOrder {
        class: ClassId,
        mutant: Option<MutantId>,
        order: TestOrder,
        timeout: u64,
    },
    RunIsolated {
        test: TestId,
        mutant: Option<MutantId>,
        timeout: u64,
    },
    Shutdown,
}

impl RequestBody {
    pub fn tag(&self) -> &'static str {
        match self {
            RequestBody::Handshake => "handshake",
            RequestBody::ListClasses => "list_classes",
            RequestBody::ListTests { .. } => "list_tests",
            RequestBody::DescribeClass { .. } => "describe_class",
            RequestBody::EnumerateMutationPoints { .. } => "enumerate_mutation_points",
            RequestBody::MaterializeMutant { .. } => "materialize_mutant",
            RequestBody::RunOrder { .. } => "run_order",
            RequestBody::RunIsolated { .. } => "run_isolated",
            RequestBody::Shutdown => "shutdown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassEntry {
    pub class_id: ClassId,
    pub features: ClassFeatures,
}

/// 1-based lines and columns, end exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpan {
    pub start_line: u32,
    pub start_column: u32,
    pub end_line: u32,
    pub end_column: u32,
}

/// A deletable (non-assertion) statement of a test body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationPoint {
    pub test: TestId,
    pub index: usize,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdapterResponse {
    pub id: u64,
    #[serde(flatten)]
    pub body: ResponseBody,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ResponseBody {
    Capabilities {
        protocol_version: u32,
        can_mutate: bool,
        failure_kinds: bool,
    },
    Classes {
        classes: Vec<ClassEntry>,
    },
    Tests {
        tests: Vec<TestId>,
    },
    MutationPoints {
        count: usize,
        spans: Vec<SourceSpan>,
    },
    MutantMaterialized {
        mutant: Mutant,
    },
    OrderResult {
        record: OrderRunRecord,
    },
    IsolatedResult {
        outcome: Outcome,
    },
    /// Acknowledges `shutdown`; the adapter exits after writing it.
    Goodbye,
    Err {
        code: String,
        message: String,
    },
}

impl ResponseBody {
    pub fn tag(&self) -> &'static str {
        match self {
            ResponseBody::Capabilities { .. } => "capabilities",
            ResponseBody::Classes { .. } => "classes",
            ResponseBody::Tests { .. } => "tests",
            ResponseBody::MutationPoints { .. } => "mutation_points",
            ResponseBody::MutantMaterialized { .. } => "mutant_materialized",
            ResponseBody::OrderResult { .. } => "order_result",
            ResponseBody::IsolatedResult { .. } => "isolated_result",
            ResponseBody::Goodbye => "goodbye",
            ResponseBody::Err { .. } => "err",
        }
    }

    pub fn err(code: &str, message: impl Into<String>) -> Self {
        ResponseBody::Err {
            code: code.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
#[error("malformed message: {0}")]
pub struct DecodeError(#[from] serde_json::Error);

/// Serializes to a single newline-terminated line. JSON string escaping
/// guarantees no raw newline appears before the terminator.
pub fn encode_message<T: Serialize>(message: &T) -> Vec<u8> {
    let mut line = serde_json::to_vec(message).expect("protocol messages always serialize");
    line.push(b'\n');
    line
}

pub fn decode_message<T: for<'de> Deserialize<'de>>(line: &[u8]) -> Result<T, DecodeError> {
    let trimmed = line.strip_suffix(b"\n").unwrap_or(line);
    let trimmed = trimmed.strip_suffix(b"\r").unwrap_or(trimmed);
    Ok(serde_json::from_slice(trimmed)?)
}
