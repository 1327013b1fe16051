//! Keyed expansion of `(k, inputs...)` into an arbitrary number of bits.
//!
//! Every key-dependent value in the crate (decision trees, Hancke–Kuhn
//! registers, Brands–Chaum signatures) comes from one [`Expander`], so
//! switching between the concrete PRF and the idealized random oracle is a
//! single choice made per experiment.

use std::collections::HashMap;

use hmac::{Hmac, KeyInit, Mac};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::Sha256;

use crate::bits::BitString;
use crate::error::Error;
use crate::types::Key;

const LABEL: &[u8] = b"treebound/expand/v1";

/// Domain separation tag for each kind of key-derived material.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Domain {
    Tree,
    HkRegisters,
    BcSignature,
}

impl Domain {
    fn tag(self) -> u8 {
        match self {
            Domain::Tree => 1,
            Domain::HkRegisters => 2,
            Domain::BcSignature => 3,
        }
    }
}

/// How node values are derived from `(k, a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum TreeMode {
    /// HMAC-SHA256 in counter mode over the encoded inputs.
    Prf,
    /// Lazily sampled random function: fresh fair coins on first use of an
    /// input, replayed on every later use of the same input.
    #[default]
    IdealUniform,
}

#[allow(clippy::large_enum_variant)]
pub enum Expander {
    Prf,
    IdealUniform {
        rng: ChaCha8Rng,
        memo: HashMap<Vec<u8>, BitString>,
    },
    /// Returns the same bits for every request of matching length. Used to
    /// enumerate all trees or registers exhaustively.
    Fixed(BitString),
}

impl std::fmt::Debug for Expander {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Expander::Prf => f.write_str("Expander::Prf"),
            Expander::IdealUniform { memo, .. } => {
                write!(f, "Expander::IdealUniform({} entries)", memo.len())
            }
            Expander::Fixed(bits) => write!(f, "Expander::Fixed({} bits)", bits.len()),
        }
    }
}

impl Expander {
    pub fn new(mode: TreeMode, seed: u64) -> Self {
        match mode {
            TreeMode::Prf => Expander::Prf,
            TreeMode::IdealUniform => Expander::ideal(ChaCha8Rng::seed_from_u64(seed)),
        }
    }

    pub fn ideal(rng: ChaCha8Rng) -> Self {
        Expander::IdealUniform {
            rng,
            memo: HashMap::new(),
        }
    }

    pub fn mode(&self) -> Option<TreeMode> {
        match self {
            Expander::Prf => Some(TreeMode::Prf),
            Expander::IdealUniform { .. } => Some(TreeMode::IdealUniform),
            Expander::Fixed(_) => None,
        }
    }

    /// Expands `(key, inputs)` under `domain` into exactly `nbits` bits.
    pub fn expand(
        &mut self,
        domain: Domain,
        key: &Key,
        inputs: &[&BitString],
        nbits: usize,
    ) -> Result<BitString, Error> {
        match self {
            Expander::Prf => Ok(prf_expand(domain, key, inputs, nbits)),
            Expander::IdealUniform { rng, memo } => {
                let mut id = encode(domain, inputs, nbits);
                id.extend_from_slice(&(key.bits().len() as u64).to_be_bytes());
                id.extend_from_slice(key.bits().as_bytes());
                Ok(memo
                    .entry(id)
                    .or_insert_with(|| BitString::random(nbits, rng))
                    .clone())
            }
            Expander::Fixed(bits) => {
                if bits.len() != nbits {
                    return Err(Error::LengthMismatch {
                        what: "fixed expansion",
                        expected: nbits,
                        actual: bits.len(),
                    });
                }
                Ok(bits.clone())
            }
        }
    }
}

fn encode(domain: Domain, inputs: &[&BitString], nbits: usize) -> Vec<u8> {
    let mut msg = Vec::with_capacity(
        LABEL.len() + 16 + inputs.iter().map(|b| b.as_bytes().len() + 8).sum::<usize>(),
    );
    msg.extend_from_slice(LABEL);
    msg.push(domain.tag());
    msg.extend_from_slice(&(nbits as u64).to_be_bytes());
    for input in inputs {
        msg.extend_from_slice(&(input.len() as u64).to_be_bytes());
        msg.extend_from_slice(input.as_bytes());
    }
    msg
}

/// HMAC-SHA256(k, encode(domain, inputs) || counter) for counter = 0, 1, ...
pub fn prf_expand(domain: Domain, key: &Key, inputs: &[&BitString], nbits: usize) -> BitString {
    let mut base = <Hmac<Sha256> as KeyInit>::new_from_slice(key.bits().as_bytes())
        .expect("HMAC accepts keys of any length");
    base.update(&encode(domain, inputs, nbits));
    let nbytes = nbits.div_ceil(8);
    let mut out = Vec::with_capacity(nbytes + 32);
    let mut counter = 0u32;
    while out.len() < nbytes {
        let mut mac = base.clone();
        mac.update(&counter.to_be_bytes());
        out.extend_from_slice(&mac.finalize().into_bytes());
        counter += 1;
    }
    BitString::from_bytes_truncated(out, nbits)
}
