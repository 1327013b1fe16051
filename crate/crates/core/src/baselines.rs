//! Hancke–Kuhn and Brands–Chaum, reduced to what the false-acceptance
//! comparison needs.
//!
//! Hancke–Kuhn derives two `n`-bit registers from `(k, a, b)` and answers
//! challenge `q_i` with `x_i` or `y_i`. Brands–Chaum answers the fast phase
//! with key-independent random bits and then sends an `m`-bit keyed
//! signature over the whole exchange. Both draw key material from the same
//! [`Expander`] as the tree protocol.

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, ParamError};
use crate::expand::{Domain, Expander};
use crate::types::{Key, Nonce, NonceRole, ProtocolParams, RawParams};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HkRegisters {
    x: BitString,
    y: BitString,
}

impl HkRegisters {
    pub fn new(x: BitString, y: BitString) -> Result<Self, Error> {
        if x.len() != y.len() || x.is_empty() {
            return Err(Error::LengthMismatch {
                what: "register y",
                expected: x.len(),
                actual: y.len(),
            });
        }
        Ok(HkRegisters { x, y })
    }

    /// Splits `2n` bits into `x = bits[..n]`, `y = bits[n..]`.
    pub fn from_bits(bits: &BitString) -> Result<Self, Error> {
        if bits.is_empty() || !bits.len().is_multiple_of(2) {
            return Err(Error::Format(format!(
                "register material must have even nonzero length, got {}",
                bits.len()
            )));
        }
        let n = bits.len() / 2;
        HkRegisters::new(bits.slice(0, n), bits.slice(n, n))
    }

    pub fn derive(
        params: &ProtocolParams,
        key: &Key,
        a: &Nonce,
        b: &Nonce,
        expander: &mut Expander,
    ) -> Result<Self, Error> {
        a.check(params, NonceRole::VerifierNonceA)?;
        b.check(params, NonceRole::ProverNonceB)?;
        let bits = expander.expand(
            Domain::HkRegisters,
            key,
            &[a.bits(), b.bits()],
            2 * params.n(),
        )?;
        HkRegisters::from_bits(&bits)
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &BitString {
        &self.x
    }

    pub fn y(&self) -> &BitString {
        &self.y
    }
}

/// Reply for round `i` (1-based): `x_i` on challenge 0, `y_i` on challenge 1.
pub fn hk_reply(regs: &HkRegisters, i: usize, q: bool) -> Result<bool, Error> {
    if i == 0 || i > regs.n() {
        return Err(Error::RoundOutOfRange {
            round: i,
            max: regs.n(),
        });
    }
    Ok(if q { regs.y.get(i - 1) } else { regs.x.get(i - 1) })
}

/// Brands–Chaum round count and signature length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BcParams {
    pub n: u64,
    pub m: u64,
}

impl BcParams {
    pub fn new(n: u64, m: u64) -> Result<Self, ParamError> {
        if n == 0 {
            return Err(ParamError::NotPositive("n"));
        }
        if m == 0 {
            return Err(ParamError::NotPositive("m"));
        }
        Ok(BcParams { n, m })
    }

    /// Session parameters with `l_a = m + n` and `l_b = n`.
    ///
    /// The signature length is not tied to any tree, so the leaf-count bound
    /// on `m` is lifted.
    pub fn protocol_params(&self) -> Result<ProtocolParams, ParamError> {
        crate::types::validate_baseline_params(RawParams::with_defaults(self.n, self.m))
    }
}

/// `m`-bit keyed signature over `(a, b, challenges, replies)`.
pub fn bc_signature(
    expander: &mut Expander,
    key: &Key,
    a: &Nonce,
    b: &Nonce,
    challenges: &BitString,
    replies: &BitString,
    m: usize,
) -> Result<BitString, Error> {
    expander.expand(
        Domain::BcSignature,
        key,
        &[a.bits(), b.bits(), challenges, replies],
        m,
    )
}
