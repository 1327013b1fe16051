//! Protocol parameters, keys and nonces.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, ParamError};

/// Largest number of fast-phase rounds accepted by [`validate_params`].
///
/// The key length `2^(n+2) - 2` must fit in a `u64`.
pub const MAX_ROUNDS: u64 = 60;

/// Unchecked parameter tuple as supplied by a caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawParams {
    pub n: u64,
    pub m: u64,
    pub l_a: u64,
    pub l_b: u64,
    /// Execution budget: the adversary wins if accepted once in this many runs.
    pub executions: u64,
}

impl RawParams {
    /// `m` authentication bits, `l_a = m + n`, `l_b = n`, one execution.
    pub fn with_defaults(n: u64, m: u64) -> Self {
        RawParams {
            n,
            m,
            l_a: m + n,
            l_b: n,
            executions: 1,
        }
    }
}

/// Validated protocol parameters. Immutable once built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProtocolParams {
    n: usize,
    m: usize,
    l_a: usize,
    l_b: usize,
    l_k: u64,
    executions: u64,
    key_leakage_warning: bool,
}

/// Key length for a tree with `n` fast-phase levels: `2^(n+2) - 2`.
pub fn key_length(n: u64) -> u64 {
    (1u64 << (n + 2)) - 2
}

pub fn validate_params(raw: RawParams) -> Result<ProtocolParams, ParamError> {
    validate(raw, true)
}

/// [`validate_params`] without the `m <= 2^(n+1)` bound, for protocols whose
/// authentication bits do not come from tree leaves.
pub(crate) fn validate_baseline_params(raw: RawParams) -> Result<ProtocolParams, ParamError> {
    validate(raw, false)
}

fn validate(raw: RawParams, leaf_bound: bool) -> Result<ProtocolParams, ParamError> {
    for (name, v) in [
        ("n", raw.n),
        ("m", raw.m),
        ("l_a", raw.l_a),
        ("l_b", raw.l_b),
        ("N", raw.executions),
    ] {
        if v == 0 {
            return Err(ParamError::NotPositive(name));
        }
    }
    if raw.n > MAX_ROUNDS {
        return Err(ParamError::TooManyRounds(raw.n));
    }
    let leaves = 1u64 << (raw.n + 1);
    if leaf_bound && raw.m > leaves {
        return Err(ParamError::TooManyAuthBits {
            m: raw.m,
            leaves,
            depth: raw.n + 1,
        });
    }
    let expected = raw.m + raw.n;
    if raw.l_a != expected {
        return Err(ParamError::NonceALength {
            l_a: raw.l_a,
            expected,
        });
    }
    if raw.l_b < raw.n {
        return Err(ParamError::NonceBTooShort {
            l_b: raw.l_b,
            n: raw.n,
        });
    }
    let to_usize = |v: u64, name| usize::try_from(v).map_err(|_| ParamError::TooLarge(name));
    let l_k = key_length(raw.n);
    Ok(ProtocolParams {
        n: to_usize(raw.n, "n")?,
        m: to_usize(raw.m, "m")?,
        l_a: to_usize(raw.l_a, "l_a")?,
        l_b: to_usize(raw.l_b, "l_b")?,
        l_k,
        executions: raw.executions,
        // m + n should stay far below l_k for a run to leak little about the key.
        key_leakage_warning: (raw.m + raw.n) as u128 * 4 > l_k as u128,
    })
}

impl ProtocolParams {
    /// Shorthand for `validate_params(RawParams::with_defaults(n, m))`.
    pub fn new(n: u64, m: u64) -> Result<Self, ParamError> {
        validate_params(RawParams::with_defaults(n, m))
    }

    /// Same parameters with a different execution budget.
    pub fn with_executions(self, executions: u64) -> Result<Self, ParamError> {
        if executions == 0 {
            return Err(ParamError::NotPositive("N"));
        }
        Ok(ProtocolParams { executions, ..self })
    }

    pub fn raw(&self) -> RawParams {
        RawParams {
            n: self.n as u64,
            m: self.m as u64,
            l_a: self.l_a as u64,
            l_b: self.l_b as u64,
            executions: self.executions,
        }
    }

    /// Fast-phase rounds.
    pub fn n(&self) -> usize {
        self.n
    }
    /// Authentication bits.
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn l_a(&self) -> usize {
        self.l_a
    }
    pub fn l_b(&self) -> usize {
        self.l_b
    }
    /// Key length, equal to the number of node bits in the decision tree.
    pub fn l_k(&self) -> u64 {
        self.l_k
    }
    pub fn executions(&self) -> u64 {
        self.executions
    }
    /// Number of leaves at depth `n + 1`.
    pub fn leaves(&self) -> u64 {
        1u64 << (self.n + 1)
    }
    /// Set when `m + n > l_k / 4`; a run may then reveal a noticeable share of the key.
    pub fn key_leakage_warning(&self) -> bool {
        self.key_leakage_warning
    }
}

/// Shared secret of `l_k` bits.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Key {
    bits: BitString,
}

impl Key {
    pub fn new(params: &ProtocolParams, bits: BitString) -> Result<Self, Error> {
        if bits.len() as u64 != params.l_k() {
            return Err(Error::LengthMismatch {
                what: "key",
                expected: params.l_k() as usize,
                actual: bits.len(),
            });
        }
        Ok(Key { bits })
    }

    pub fn random<R: RngCore + ?Sized>(params: &ProtocolParams, rng: &mut R) -> Result<Self, Error> {
        let len = usize::try_from(params.l_k()).map_err(|_| Error::TreeTooLarge(params.n()))?;
        if params.n() > crate::treegen::MAX_TREE_ROUNDS {
            return Err(Error::TreeTooLarge(params.n()));
        }
        Ok(Key {
            bits: BitString::random(len, rng),
        })
    }

    pub fn bits(&self) -> &BitString {
        &self.bits
    }
}

impl std::fmt::Debug for Key {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Key({} bits)", self.bits.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NonceRole {
    /// Drawn by the verifier, `l_a` bits.
    VerifierNonceA,
    /// Drawn by the prover, `l_b` bits.
    ProverNonceB,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Nonce {
    bits: BitString,
    role: NonceRole,
}

impl Nonce {
    pub fn expected_len(params: &ProtocolParams, role: NonceRole) -> usize {
        match role {
            NonceRole::VerifierNonceA => params.l_a(),
            NonceRole::ProverNonceB => params.l_b(),
        }
    }

    pub fn new(params: &ProtocolParams, role: NonceRole, bits: BitString) -> Result<Self, Error> {
        let expected = Self::expected_len(params, role);
        if bits.len() != expected {
            return Err(Error::LengthMismatch {
                what: match role {
                    NonceRole::VerifierNonceA => "nonce a",
                    NonceRole::ProverNonceB => "nonce b",
                },
                expected,
                actual: bits.len(),
            });
        }
        Ok(Nonce { bits, role })
    }

    pub fn random<R: RngCore + ?Sized>(params: &ProtocolParams, role: NonceRole, rng: &mut R) -> Self {
        Nonce {
            bits: BitString::random(Self::expected_len(params, role), rng),
            role,
        }
    }

    /// Checks that this nonce has the role and length `params` demand.
    pub fn check(&self, params: &ProtocolParams, role: NonceRole) -> Result<(), Error> {
        if self.role != role {
            return Err(Error::Format(format!("expected {role:?}, got {:?}", self.role)));
        }
        let expected = Self::expected_len(params, role);
        if self.bits.len() != expected {
            return Err(Error::LengthMismatch {
                what: "nonce",
                expected,
                actual: self.bits.len(),
            });
        }
        Ok(())
    }

    pub fn bits(&self) -> &BitString {
        &self.bits
    }

    pub fn role(&self) -> NonceRole {
        self.role
    }
}
