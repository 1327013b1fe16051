//! Closed-form false-acceptance probabilities.
//!
//! Every formula comes in a floating-point form and, where the value is a
//! dyadic rational, an exact form over `Ratio<u128>`. The exact forms are the
//! reference that exhaustive enumeration is compared against.

use num_rational::Ratio;
use serde::Serialize;

use crate::error::Error;
use crate::protocol::Scheme;
use crate::types::ProtocolParams;

pub type Exact = Ratio<u128>;

fn pow2_neg(e: u32) -> f64 {
    (-(e as f64)).exp2()
}

fn exact_pow2_neg(e: u32) -> Result<Exact, Error> {
    if e > 126 {
        return Err(Error::Unsupported(format!("2^-{e} does not fit an exact u128 ratio")));
    }
    Ok(Ratio::new(1, 1u128 << e))
}

fn require_rounds(n: u32) -> Result<(), Error> {
    if n == 0 {
        return Err(Error::Params(crate::error::ParamError::NotPositive("n")));
    }
    Ok(())
}

/// Pre-ask relay adversary on the tree protocol: `2^-n (n/2 + 1)`.
///
/// The adversary learns the replies along one probe path before the fast
/// phase. Round `i` is answered right for sure until the verifier's path
/// leaves the probe path at round `t`, and with probability 1/2 from then on.
pub fn preask_success(n: u32) -> Result<f64, Error> {
    require_rounds(n)?;
    Ok(pow2_neg(n) * (n as f64 / 2.0 + 1.0))
}

pub fn preask_success_exact(n: u32) -> Result<Exact, Error> {
    require_rounds(n)?;
    // (n + 2) / 2^(n+1)
    let denom = exact_pow2_neg(n + 1)?;
    Ok(denom * Ratio::from_integer(n as u128 + 2))
}

/// Adversary acting alone, guessing `m` authentication bits and `n` replies.
pub fn no_prover_success(m: u32, n: u32) -> f64 {
    pow2_neg(m + n)
}

pub fn no_prover_success_exact(m: u32, n: u32) -> Result<Exact, Error> {
    exact_pow2_neg(m + n)
}

/// Hancke–Kuhn pre-ask adversary: `(3/4)^n`.
pub fn hk_success(n: u32) -> f64 {
    0.75f64.powi(n as i32)
}

pub fn hk_success_exact(n: u32) -> Result<Exact, Error> {
    if n > 63 {
        return Err(Error::Unsupported(format!("(3/4)^{n} does not fit an exact u128 ratio")));
    }
    Ok(Ratio::new(3u128.pow(n), 1u128 << (2 * n)))
}

/// Best single Brands–Chaum attack: `2^-min(m, n)`.
pub fn bc_success(m: u32, n: u32) -> f64 {
    pow2_neg(m.min(n))
}

pub fn bc_success_exact(m: u32, n: u32) -> Result<Exact, Error> {
    exact_pow2_neg(m.min(n))
}

/// `count (count - 1) / 2^(bits + 1)`.
pub fn birthday_bound(count: u64, bits: u32) -> f64 {
    let c = count as f64;
    c * (c - 1.0) * pow2_neg(bits + 1)
}

/// Probability that `count` uniform `bits`-bit values are not all distinct:
/// `1 - prod_{i<count} (1 - i / 2^bits)`, summed in log space.
pub fn birthday_exact(count: u64, bits: u32) -> f64 {
    if bits < 64 && count > (1u64 << bits) {
        return 1.0;
    }
    let space = (bits as f64).exp2();
    let log_distinct: f64 = (0..count).map(|i| (-(i as f64) / space).ln_1p()).sum();
    -log_distinct.exp_m1()
}

/// Replay without relay on the tree protocol: the harvested session matches
/// the verifier's nonce with probability `2^-l_a`, in which case the
/// pre-ask advantage applies; otherwise everything is a blind guess.
pub fn replay_success(params: &ProtocolParams) -> f64 {
    let hit = pow2_neg(params.l_a() as u32);
    let n = params.n() as u32;
    hit * preask_success(n).expect("n >= 1")
        + (1.0 - hit) * no_prover_success(params.m() as u32, n)
}

/// Probability that the replayed session is the verifier's session.
pub fn replay_hit(params: &ProtocolParams) -> f64 {
    pow2_neg(params.l_a() as u32)
}

/// Relay-adversary success for a proximity check cut to `j` rounds; `j = 0`
/// leaves no timed evidence at all.
pub fn relay_residual(scheme: Scheme, j: usize, m: usize) -> f64 {
    let j = j as u32;
    match scheme {
        Scheme::Tree if j == 0 => 1.0,
        Scheme::Tree => preask_success(j).expect("j >= 1"),
        Scheme::HanckeKuhn => hk_success(j),
        Scheme::BrandsChaum => bc_success(m as u32, j),
    }
}

/// At-least-once probability over `executions` independent attempts.
pub fn at_least_once(p: f64, executions: u64) -> f64 {
    if executions <= 1 {
        return p;
    }
    -((executions as f64) * (-p).ln_1p()).exp_m1()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub protocol: &'static str,
    /// Per-execution false acceptance when relaying is possible.
    pub relay: f64,
    /// Per-execution false acceptance without relaying.
    pub no_relay: f64,
    /// `min(1, N * max(relay, no_relay))`.
    pub union_bound: f64,
    /// Key-dependent bits the prover must hold during the fast phase.
    pub storage_bits: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub n: usize,
    pub m: usize,
    pub executions: u64,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn row(&self, protocol: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.protocol == protocol)
    }
}

/// Tree, Hancke–Kuhn, Brands–Chaum and the lower bound for any protocol
/// with `m + n` key-dependent bits of which `n` are timed.
pub fn comparison_table(params: &ProtocolParams) -> ComparisonTable {
    let (n, m) = (params.n() as u32, params.m() as u32);
    let big_n = params.executions();
    let row = |protocol, relay: f64, no_relay: f64, storage_bits| ComparisonRow {
        protocol,
        relay,
        no_relay,
        union_bound: (big_n as f64 * relay.max(no_relay)).min(1.0),
        storage_bits,
    };
    ComparisonTable {
        n: params.n(),
        m: params.m(),
        executions: big_n,
        rows: vec![
            row(
                "tree",
                preask_success(n).expect("validated n"),
                no_prover_success(m, n),
                Some(params.l_k()),
            ),
            row("hk", hk_success(n), hk_success(n), Some(2 * n as u64)),
            row("bc", bc_success(m, n), bc_success(m, n), Some(m as u64)),
            row("optimal-bound", pow2_neg(n), pow2_neg(m + n), None),
        ],
    }
}
