//! Prover and verifier sessions.
//!
//! Message flow for every [`Scheme`]:
//!
//! ```text
//! verifier                          prover
//!   a  (l_a random bits)      ->
//!                             <-    b  (l_b random bits), auth bits
//!   for i in 1..=n (timed):
//!   q_i                       ->
//!                             <-    r_i
//!                             <-    signature (Brands–Chaum only)
//! ```
//!
//! The two sessions share nothing but the key and an [`Expander`]; every
//! other value crosses between them as an explicit message.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::baselines::{bc_signature, hk_reply, HkRegisters};
use crate::bits::BitString;
use crate::channel::ChannelConfig;
use crate::error::Error;
use crate::expand::Expander;
use crate::transcript::{Reason, RoundRecord, Transcript, Verdict};
use crate::treegen::{build_tree_with, DecisionTree};
use crate::types::{Key, Nonce, NonceRole, ProtocolParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Decision-tree protocol: `m` leaf bits before the fast phase, replies
    /// depend on the whole challenge prefix.
    #[default]
    Tree,
    HanckeKuhn,
    BrandsChaum,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Tree => "tree",
            Scheme::HanckeKuhn => "hk",
            Scheme::BrandsChaum => "bc",
        }
    }

    /// Authentication bits sent in the slow phase, before any challenge.
    pub fn pre_fast_auth_len(self, params: &ProtocolParams) -> usize {
        match self {
            Scheme::Tree => params.m(),
            Scheme::HanckeKuhn | Scheme::BrandsChaum => 0,
        }
    }

    /// Validates `raw` for this scheme. Only the tree protocol bounds `m` by
    /// its leaf count.
    pub fn validate(self, raw: crate::types::RawParams) -> Result<ProtocolParams, crate::error::ParamError> {
        match self {
            Scheme::Tree => crate::types::validate_params(raw),
            Scheme::HanckeKuhn | Scheme::BrandsChaum => crate::types::validate_baseline_params(raw),
        }
    }

    /// Authentication bits sent after the fast phase.
    pub fn post_fast_auth_len(self, params: &ProtocolParams) -> usize {
        match self {
            Scheme::BrandsChaum => params.m(),
            Scheme::Tree | Scheme::HanckeKuhn => 0,
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tree" => Ok(Scheme::Tree),
            "hk" | "hancke-kuhn" => Ok(Scheme::HanckeKuhn),
            "bc" | "brands-chaum" => Ok(Scheme::BrandsChaum),
            other => Err(Error::Format(format!("unknown protocol {other:?}"))),
        }
    }
}

/// Key-dependent state computed after the nonce exchange.
#[derive(Debug, Clone)]
enum Material {
    Tree(DecisionTree),
    Hk(HkRegisters),
    /// Brands–Chaum has no key-dependent fast-phase material.
    Bc,
}

impl Material {
    fn derive(
        scheme: Scheme,
        params: &ProtocolParams,
        key: &Key,
        a: &Nonce,
        b: &Nonce,
        expander: &mut Expander,
    ) -> Result<Self, Error> {
        Ok(match scheme {
            Scheme::Tree => Material::Tree(build_tree_with(params, key, a, b, expander)?),
            Scheme::HanckeKuhn => Material::Hk(HkRegisters::derive(params, key, a, b, expander)?),
            Scheme::BrandsChaum => {
                a.check(params, NonceRole::VerifierNonceA)?;
                b.check(params, NonceRole::ProverNonceB)?;
                Material::Bc
            }
        })
    }

    /// Expected reply after `challenges` (length = round). `None` when any
    /// reply is acceptable.
    fn expected(&self, challenges: &[bool]) -> Result<Option<bool>, Error> {
        match self {
            Material::Tree(t) => t.reply(challenges).map(Some),
            Material::Hk(r) => hk_reply(r, challenges.len(), *challenges.last().unwrap_or(&false)).map(Some),
            Material::Bc => Ok(None),
        }
    }
}

/// Slow-phase answer to nonce `a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitReply {
    pub b: Nonce,
    pub auth: BitString,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProverState {
    AwaitA,
    Ready,
    /// Number of rounds answered so far.
    FastPhase(usize),
    Done,
}

#[derive(Debug, Clone)]
pub struct ProverSession {
    params: ProtocolParams,
    key: Key,
    scheme: Scheme,
    state: ProverState,
    a: Option<Nonce>,
    b: Option<Nonce>,
    material: Option<Material>,
    /// Brands–Chaum reply bits, drawn at initialization.
    bc_replies: BitString,
    challenges: Vec<bool>,
    replies: Vec<bool>,
}

impl ProverSession {
    pub fn new(params: ProtocolParams, key: Key, scheme: Scheme) -> Self {
        ProverSession {
            params,
            key,
            scheme,
            state: ProverState::AwaitA,
            a: None,
            b: None,
            material: None,
            bc_replies: BitString::zeros(0),
            challenges: Vec::with_capacity(params.n()),
            replies: Vec::with_capacity(params.n()),
        }
    }

    pub fn state(&self) -> ProverState {
        self.state
    }

    pub fn nonce_b(&self) -> Option<&Nonce> {
        self.b.as_ref()
    }

    pub fn nonce_a(&self) -> Option<&Nonce> {
        self.a.as_ref()
    }

    fn wrong_state(&self, op: &'static str) -> Error {
        Error::WrongState {
            op,
            state: format!("{:?}", self.state),
        }
    }

    /// Draws `b`, builds the shared material and returns `b` with the
    /// authentication bits.
    pub fn respond_init<R: RngCore + ?Sized>(
        &mut self,
        a: &Nonce,
        rng: &mut R,
        expander: &mut Expander,
    ) -> Result<InitReply, Error> {
        if self.state != ProverState::AwaitA {
            return Err(self.wrong_state("respond_init"));
        }
        a.check(&self.params, NonceRole::VerifierNonceA)?;
        let b = Nonce::random(&self.params, NonceRole::ProverNonceB, rng);
        let material = Material::derive(self.scheme, &self.params, &self.key, a, &b, expander)?;
        let auth = match &material {
            Material::Tree(t) => t.auth_string(self.params.m())?,
            Material::Hk(_) => BitString::zeros(0),
            Material::Bc => {
                self.bc_replies = BitString::random(self.params.n(), rng);
                BitString::zeros(0)
            }
        };
        self.a = Some(a.clone());
        self.b = Some(b.clone());
        self.material = Some(material);
        self.state = ProverState::Ready;
        Ok(InitReply { b, auth })
    }

    /// Answers the next challenge.
    pub fn fast_reply(&mut self, q: bool) -> Result<bool, Error> {
        let answered = match self.state {
            ProverState::Ready => 0,
            ProverState::FastPhase(i) if i < self.params.n() => i,
            _ => return Err(self.wrong_state("fast_reply")),
        };
        self.challenges.push(q);
        let reply = match self.material.as_ref().expect("material present once Ready") {
            Material::Bc => self.bc_replies.get(answered),
            m => m.expected(&self.challenges)?.expect("keyed material"),
        };
        self.replies.push(reply);
        let done = answered + 1;
        self.state = if done == self.params.n() && self.scheme != Scheme::BrandsChaum {
            ProverState::Done
        } else {
            ProverState::FastPhase(done)
        };
        Ok(reply)
    }

    /// Brands–Chaum signature over the completed exchange.
    pub fn signature(&mut self, expander: &mut Expander) -> Result<BitString, Error> {
        if self.scheme != Scheme::BrandsChaum
            || self.state != ProverState::FastPhase(self.params.n())
        {
            return Err(self.wrong_state("signature"));
        }
        let sig = bc_signature(
            expander,
            &self.key,
            self.a.as_ref().expect("set in respond_init"),
            self.b.as_ref().expect("set in respond_init"),
            &BitString::from_bools(&self.challenges),
            &BitString::from_bools(&self.replies),
            self.params.m(),
        )?;
        self.state = ProverState::Done;
        Ok(sig)
    }
}

/// Where fast-phase challenges come from.
pub trait ChallengeSource {
    /// Challenge for 1-based `round`.
    fn challenge(&mut self, round: usize, rng: &mut dyn RngCore) -> bool;
}

/// Fresh fair coin per round.
#[derive(Debug, Clone, Copy, Default)]
pub struct FairCoin;

impl ChallengeSource for FairCoin {
    fn challenge(&mut self, _round: usize, rng: &mut dyn RngCore) -> bool {
        rng.gen()
    }
}

/// Predetermined challenges, for exhaustive enumeration and tests.
#[derive(Debug, Clone)]
pub struct Scripted(pub Vec<bool>);

impl ChallengeSource for Scripted {
    fn challenge(&mut self, round: usize, _rng: &mut dyn RngCore) -> bool {
        self.0[round - 1]
    }
}

/// A reply as it arrives at the verifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FastReply {
    pub bit: bool,
    /// The exchange went on to a remote prover and back.
    pub relayed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifierState {
    SentA,
    /// Slow phase done; value is the number of timed rounds completed.
    FastPhase(usize),
    AwaitSignature,
    Done,
}

#[derive(Debug, Clone)]
pub struct VerifierSession {
    params: ProtocolParams,
    key: Key,
    scheme: Scheme,
    channel: ChannelConfig,
    state: VerifierState,
    a: Nonce,
    b: Option<Nonce>,
    material: Option<Material>,
    auth_bits: BitString,
    auth_ok: Option<bool>,
    challenges: Vec<bool>,
    rounds: Vec<RoundRecord>,
}

/// Opens a verifier session and draws nonce `a`.
pub fn verifier_start<R: RngCore + ?Sized>(
    params: ProtocolParams,
    key: Key,
    scheme: Scheme,
    channel: ChannelConfig,
    rng: &mut R,
) -> Result<(VerifierSession, Nonce), Error> {
    channel.validate()?;
    let a = Nonce::random(&params, NonceRole::VerifierNonceA, rng);
    let session = VerifierSession {
        params,
        key,
        scheme,
        channel,
        state: VerifierState::SentA,
        a: a.clone(),
        b: None,
        material: None,
        auth_bits: BitString::zeros(0),
        auth_ok: None,
        challenges: Vec::with_capacity(params.n()),
        rounds: Vec::with_capacity(params.n()),
    };
    Ok((session, a))
}

impl VerifierSession {
    pub fn state(&self) -> VerifierState {
        self.state
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.params
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn channel(&self) -> &ChannelConfig {
        &self.channel
    }

    pub fn nonce_a(&self) -> &Nonce {
        &self.a
    }

    pub fn nonce_b(&self) -> Option<&Nonce> {
        self.b.as_ref()
    }

    pub fn rounds(&self) -> &[RoundRecord] {
        &self.rounds
    }

    /// Whether the authentication bits checked out; `None` until known.
    pub fn auth_ok(&self) -> Option<bool> {
        self.auth_ok
    }

    /// The verifier's own tree, once the slow phase is done.
    pub fn tree(&self) -> Option<&DecisionTree> {
        match &self.material {
            Some(Material::Tree(t)) => Some(t),
            _ => None,
        }
    }

    fn wrong_state(&self, op: &'static str) -> Error {
        Error::WrongState {
            op,
            state: format!("{:?}", self.state),
        }
    }

    /// Receives `b` and the slow-phase authentication bits.
    pub fn receive_init(
        &mut self,
        b: &Nonce,
        auth: &BitString,
        expander: &mut Expander,
    ) -> Result<(), Error> {
        if self.state != VerifierState::SentA {
            return Err(self.wrong_state("receive_init"));
        }
        b.check(&self.params, NonceRole::ProverNonceB)?;
        let expected_len = self.scheme.pre_fast_auth_len(&self.params);
        if auth.len() != expected_len {
            return Err(Error::LengthMismatch {
                what: "authentication bits",
                expected: expected_len,
                actual: auth.len(),
            });
        }
        let material = Material::derive(self.scheme, &self.params, &self.key, &self.a, b, expander)?;
        self.auth_ok = match &material {
            Material::Tree(t) => Some(t.auth_string(self.params.m())? == *auth),
            Material::Hk(_) => Some(true),
            Material::Bc => None,
        };
        self.auth_bits = auth.clone();
        self.b = Some(b.clone());
        self.material = Some(material);
        self.state = VerifierState::FastPhase(0);
        Ok(())
    }

    /// Runs one timed round: draws `q_i`, hands it to `respond`, measures
    /// the round trip. `respond` returning `None` models a lost reply.
    pub fn fast_round<F>(
        &mut self,
        challenges: &mut dyn ChallengeSource,
        rng: &mut dyn RngCore,
        respond: F,
    ) -> Result<RoundRecord, Error>
    where
        F: FnOnce(usize, bool) -> Result<Option<FastReply>, Error>,
    {
        let done = match self.state {
            VerifierState::FastPhase(i) if i < self.params.n() => i,
            _ => return Err(self.wrong_state("fast_round")),
        };
        let round = done + 1;
        let q = challenges.challenge(round, rng);
        self.challenges.push(q);
        let reply = respond(round, q)?;
        let expected = self
            .material
            .as_ref()
            .expect("material present in fast phase")
            .expected(&self.challenges)?;
        let record = match reply {
            Some(r) => {
                let rtt = self.channel.sample_rtt(r.relayed, rng);
                RoundRecord {
                    round,
                    challenge: q,
                    reply: Some(r.bit),
                    rtt,
                    correct: expected.is_none_or(|e| e == r.bit),
                    on_time: rtt <= self.channel.threshold(),
                }
            }
            None => RoundRecord {
                round,
                challenge: q,
                reply: None,
                rtt: f64::INFINITY,
                correct: false,
                on_time: false,
            },
        };
        self.rounds.push(record);
        self.state = if round < self.params.n() {
            VerifierState::FastPhase(round)
        } else if self.scheme == Scheme::BrandsChaum {
            VerifierState::AwaitSignature
        } else {
            VerifierState::Done
        };
        Ok(record)
    }

    /// Brands–Chaum: checks the signature over the exchange as the verifier saw it.
    pub fn receive_signature(
        &mut self,
        signature: &BitString,
        expander: &mut Expander,
    ) -> Result<(), Error> {
        if self.state != VerifierState::AwaitSignature {
            return Err(self.wrong_state("receive_signature"));
        }
        if signature.len() != self.params.m() {
            return Err(Error::LengthMismatch {
                what: "signature",
                expected: self.params.m(),
                actual: signature.len(),
            });
        }
        let replies: Vec<bool> = self.rounds.iter().map(|r| r.reply.unwrap_or(false)).collect();
        let expected = bc_signature(
            expander,
            &self.key,
            &self.a,
            self.b.as_ref().expect("set in receive_init"),
            &BitString::from_bools(&self.challenges),
            &BitString::from_bools(&replies),
            self.params.m(),
        )?;
        self.auth_ok = Some(expected == *signature);
        self.auth_bits = signature.clone();
        self.state = VerifierState::Done;
        Ok(())
    }

    /// Decision over the authentication bits and the first `j` rounds.
    fn decide(&self, j: usize) -> Verdict {
        let Some(auth_ok) = self.auth_ok else {
            return Verdict::from_reason(Reason::Incomplete);
        };
        if j > self.rounds.len() {
            return Verdict::from_reason(Reason::Incomplete);
        }
        if !auth_ok {
            return Verdict::from_reason(Reason::BadAuth);
        }
        for r in &self.rounds[..j] {
            if !r.on_time {
                return Verdict::from_reason(Reason::Timeout(r.round));
            }
            if !r.correct {
                return Verdict::from_reason(Reason::BadReply(r.round));
            }
        }
        Verdict::from_reason(Reason::Ok)
    }

    /// Accept iff the authentication bits match and all `n` replies are
    /// correct and on time. Rejection names the first failing check.
    pub fn final_decision(&self) -> Verdict {
        if self.state != VerifierState::Done {
            return Verdict::from_reason(Reason::Incomplete);
        }
        self.decide(self.params.n())
    }

    /// Decision after only `j` timed rounds, with the false-acceptance
    /// probability a pre-asking relay adversary still has at that horizon.
    pub fn early_decision(&self, j: usize) -> (Verdict, f64) {
        let j = j.min(self.params.n());
        let verdict = if self.state == VerifierState::SentA {
            Verdict::from_reason(Reason::Incomplete)
        } else {
            self.decide(j)
        };
        (verdict, analysis::relay_residual(self.scheme, j, self.params.m()))
    }

    pub fn transcript(&self) -> Transcript {
        Transcript {
            nonce_a: self.a.clone(),
            nonce_b: self.b.clone(),
            auth_bits: self.auth_bits.clone(),
            rounds: self.rounds.clone(),
            rounds_completed: self.rounds.len(),
            verdict: self.final_decision(),
        }
    }
}
