//! Append-only event log. Serialized as newline-delimited JSON with a fixed
//! field order per record.

use serde::{Deserialize, Serialize};

use super::scenario::MessageKind;
use super::SimError;
use crate::protocol::GroupId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Public,
    Secure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Header {
        seed: u64,
        suite: String,
        cipher: String,
        groups: usize,
        steps: usize,
        secure_plaintext: bool,
    },
    Message {
        step: Option<usize>,
        sender: String,
        receiver: String,
        channel: ChannelKind,
        kind: MessageKind,
        /// Hex of the bytes on the wire (ciphertext for secure channels).
        payload: String,
        tampered: bool,
    },
    /// Only emitted when secure plaintext logging is switched on.
    SecurePlaintext {
        step: Option<usize>,
        sender: String,
        receiver: String,
        kind: MessageKind,
        plaintext: String,
    },
    IntegrityFailure {
        step: Option<usize>,
        sender: String,
        receiver: String,
        kind: MessageKind,
    },
    Verdict {
        step: usize,
        group: GroupId,
        epoch: u32,
        phase: String,
        result: String,
        participants: Vec<String>,
        detail: Option<String>,
    },
    Key {
        step: usize,
        group: GroupId,
        a: String,
        b: String,
        fingerprint_ab: String,
        fingerprint_ba: String,
        agree: bool,
    },
    Epoch {
        step: usize,
        group: GroupId,
        epoch: u32,
    },
    Expectation {
        step: usize,
        expected: String,
        actual: String,
        matched: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub seq: u64,
    #[serde(flatten)]
    pub event: Event,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    records: Vec<Record>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, event: Event) {
        let seq = self.records.len() as u64;
        self.records.push(Record { seq, event });
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.records.iter().map(|r| &r.event)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `(step, result)` of every verdict record.
    pub fn verdicts(&self) -> Vec<(usize, &str)> {
        self.events()
            .filter_map(|e| match e {
                Event::Verdict { step, result, .. } => Some((*step, result.as_str())),
                _ => None,
            })
            .collect()
    }

    pub fn mismatches(&self) -> Vec<&Event> {
        self.events().filter(|e| matches!(e, Event::Expectation { matched: false, .. })).collect()
    }

    pub fn expectations_met(&self) -> bool {
        self.mismatches().is_empty()
    }

    /// Decoded payloads of public messages of one kind, in send order.
    pub fn public_payloads(&self, kind: MessageKind) -> Vec<(String, Vec<u8>)> {
        self.events()
            .filter_map(|e| match e {
                Event::Message { channel: ChannelKind::Public, kind: k, sender, payload, .. } if *k == kind => {
                    Some((sender.clone(), hex::decode(payload).expect("hex written by us")))
                }
                _ => None,
            })
            .collect()
    }

    pub fn to_ndjson(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_ndjson(text: &str) -> Result<Self, SimError> {
        let mut t = Transcript::new();
        for (line_no, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: Record = serde_json::from_str(line)
                .map_err(|e| SimError::Parse(format!("transcript line {}: {e}", line_no + 1)))?;
            if rec.seq != t.records.len() as u64 {
                return Err(SimError::Parse(format!("transcript line {}: sequence gap", line_no + 1)));
            }
            t.records.push(rec);
        }
        Ok(t)
    }
}
