//! Execution records and verdicts.

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::types::Nonce;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "round")]
pub enum Reason {
    Ok,
    BadAuth,
    /// 1-based round with a wrong reply.
    BadReply(usize),
    /// 1-based round whose reply was late or missing.
    Timeout(usize),
    Incomplete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Verdict {
    pub accepted: bool,
    pub reason: Reason,
}

impl Verdict {
    pub fn from_reason(reason: Reason) -> Self {
        Verdict {
            accepted: reason == Reason::Ok,
            reason,
        }
    }

    pub fn kind(&self) -> VerdictKind {
        match self.reason {
            Reason::Ok => VerdictKind::Accept,
            Reason::Incomplete => VerdictKind::Incomplete,
            _ => VerdictKind::Reject,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictKind {
    Accept,
    Reject,
    Incomplete,
}

impl std::fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VerdictKind::Accept => "Accept",
            VerdictKind::Reject => "Reject",
            VerdictKind::Incomplete => "Incomplete",
        })
    }
}

/// One timed challenge/reply exchange as seen by the verifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub challenge: bool,
    /// `None` when nothing came back.
    pub reply: Option<bool>,
    /// Measured round trip; infinite when the reply never arrived.
    pub rtt: f64,
    pub correct: bool,
    pub on_time: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transcript {
    pub nonce_a: Nonce,
    pub nonce_b: Option<Nonce>,
    /// Authentication string as received: the tree leaves, or the
    /// Brands–Chaum signature. Empty for Hancke–Kuhn.
    pub auth_bits: BitString,
    pub rounds: Vec<RoundRecord>,
    pub rounds_completed: usize,
    pub verdict: Verdict,
}

impl Transcript {
    pub fn challenges(&self) -> Vec<bool> {
        self.rounds.iter().map(|r| r.challenge).collect()
    }
}

/// Message kinds in a trace, in wire order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    NonceA,
    NonceB,
    Auth,
    Challenge,
    Reply,
}

/// Trace encoding: `{"type": ..., "bits": "01...", "time": t}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    #[serde(rename = "type")]
    pub kind: MessageKind,
    pub bits: BitString,
    pub time: f64,
}
