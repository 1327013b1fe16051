//! Adversary strategies.
//!
//! A strategy plays the claimant's side of an execution. It sees only what
//! crosses the channel and whatever the legitimate prover tells it through
//! [`ProverAccess`] and [`RelayLink`].

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::Error;
use crate::execution::{ProverAccess, RelayLink, SessionId};
use crate::protocol::{InitReply, Scheme};
use crate::transcript::Verdict;
use crate::types::{Nonce, NonceRole, ProtocolParams};

/// Public events an adversary may watch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Event {
    Challenge { round: usize, challenge: bool },
    Verdict(Verdict),
}

/// What a strategy did, for traces and diagnostics.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AdversaryReport {
    pub strategy: &'static str,
    /// Challenges sent to the prover before the fast phase.
    pub probe: Option<BitString>,
    /// Challenges the verifier actually sent.
    pub observed: BitString,
    /// First 1-based round where the verifier's challenge differed from the probe.
    pub first_divergence: Option<usize>,
}

pub trait AdversaryStrategy {
    fn name(&self) -> &'static str;

    /// Runs before the verifier draws its nonce.
    fn before_session(&mut self, _prover: &mut ProverAccess<'_>, _rng: &mut dyn RngCore) -> Result<(), Error> {
        Ok(())
    }

    /// Answers the verifier's nonce `a` with `b` and the authentication bits.
    fn slow_phase(&mut self, a: &Nonce, prover: &mut ProverAccess<'_>, rng: &mut dyn RngCore)
        -> Result<InitReply, Error>;

    /// Answers challenge `q` of 1-based `round`. `None` sends nothing.
    fn fast_reply(
        &mut self,
        round: usize,
        q: bool,
        link: &mut RelayLink<'_>,
        rng: &mut dyn RngCore,
    ) -> Result<Option<bool>, Error>;

    /// Signature sent after the fast phase (Brands–Chaum only).
    fn post_fast(&mut self, prover: &mut ProverAccess<'_>, rng: &mut dyn RngCore) -> Result<BitString, Error> {
        Ok(BitString::random(prover.scheme().post_fast_auth_len(prover.params()), rng))
    }

    fn observe(&mut self, _event: &Event) {}

    fn report(&self) -> AdversaryReport {
        AdversaryReport {
            strategy: self.name(),
            ..Default::default()
        }
    }
}

/// Challenges an adversary sends the prover ahead of time.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Probe {
    #[default]
    Zeros,
    Ones,
    Random,
    Fixed(BitString),
}

impl Probe {
    pub fn resolve(&self, n: usize, rng: &mut dyn RngCore) -> Result<BitString, Error> {
        Ok(match self {
            Probe::Zeros => BitString::zeros(n),
            Probe::Ones => BitString::from_bools(&vec![true; n]),
            Probe::Random => BitString::random(n, rng),
            Probe::Fixed(bits) if bits.len() == n => bits.clone(),
            Probe::Fixed(bits) => {
                return Err(Error::LengthMismatch {
                    what: "probe",
                    expected: n,
                    actual: bits.len(),
                })
            }
        })
    }

    pub fn is_deterministic(&self) -> bool {
        !matches!(self, Probe::Random)
    }
}

impl std::str::FromStr for Probe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "zeros" => Ok(Probe::Zeros),
            "ones" => Ok(Probe::Ones),
            "random" => Ok(Probe::Random),
            bits => Ok(Probe::Fixed(bits.parse()?)),
        }
    }
}

impl std::fmt::Display for Probe {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Probe::Zeros => f.write_str("zeros"),
            Probe::Ones => f.write_str("ones"),
            Probe::Random => f.write_str("random"),
            Probe::Fixed(bits) => write!(f, "{bits}"),
        }
    }
}

/// One complete untimed run against the prover.
#[derive(Debug, Clone)]
struct Harvest {
    init: InitReply,
    probe: BitString,
    replies: BitString,
    signature: Option<BitString>,
}

fn harvest(prover: &mut ProverAccess<'_>, a: &Nonce, probe: BitString) -> Result<Harvest, Error> {
    let (id, init) = prover.open(a)?;
    let mut replies = BitString::zeros(0);
    for q in probe.iter() {
        replies.push(prover.challenge(id, q)?);
    }
    let signature = match prover.scheme() {
        Scheme::BrandsChaum => Some(prover.signature(id)?),
        _ => None,
    };
    Ok(Harvest {
        init,
        probe,
        replies,
        signature,
    })
}

fn random_init(params: &ProtocolParams, scheme: Scheme, rng: &mut dyn RngCore) -> InitReply {
    InitReply {
        b: Nonce::random(params, NonceRole::ProverNonceB, rng),
        auth: BitString::random(scheme.pre_fast_auth_len(params), rng),
    }
}

/// Tracks the verifier's challenges against a probe.
#[derive(Debug, Clone, Default)]
struct Watch {
    observed: BitString,
    first_divergence: Option<usize>,
}

impl Watch {
    fn see(&mut self, round: usize, q: bool, probe: Option<&BitString>) {
        self.observed.push(q);
        if self.first_divergence.is_none() && probe.is_some_and(|p| p.get(round - 1) != q) {
            self.first_divergence = Some(round);
        }
    }
}

/// No prover access at all: fresh `b`, random authentication bits, random replies.
#[derive(Debug, Default)]
pub struct RandomGuess {
    watch: Watch,
}

impl AdversaryStrategy for RandomGuess {
    fn name(&self) -> &'static str {
        "random"
    }

    fn slow_phase(&mut self, _a: &Nonce, prover: &mut ProverAccess<'_>, rng: &mut dyn RngCore)
        -> Result<InitReply, Error> {
        Ok(random_init(prover.params(), prover.scheme(), rng))
    }

    fn fast_reply(&mut self, round: usize, q: bool, _link: &mut RelayLink<'_>, rng: &mut dyn RngCore)
        -> Result<Option<bool>, Error> {
        self.watch.see(round, q, None);
        Ok(Some(rng.gen()))
    }

    fn report(&self) -> AdversaryReport {
        AdversaryReport {
            strategy: self.name(),
            probe: None,
            observed: self.watch.observed.clone(),
            first_divergence: None,
        }
    }
}

/// Relays `a` to the prover, runs the fast phase on it untimed with a probe
/// sequence, then replays the prover's answers to the verifier.
#[derive(Debug)]
pub struct PreAsk {
    name: &'static str,
    probe: Probe,
    /// Stop answering once a challenge departs from the probe.
    give_up: bool,
    harvest: Option<Harvest>,
    watch: Watch,
}

impl PreAsk {
    pub fn new(probe: Probe) -> Self {
        PreAsk {
            name: "preask",
            probe,
            give_up: false,
            harvest: None,
            watch: Watch::default(),
        }
    }

    /// Pre-ask that falls silent at the first unexpected challenge, so it
    /// wins exactly when every challenge matches the probe.
    pub fn pure(probe: Probe) -> Self {
        PreAsk {
            give_up: true,
            ..Self::new(probe)
        }
    }

    fn named(mut self, name: &'static str) -> Self {
        self.name = name;
        self
    }
}

impl AdversaryStrategy for PreAsk {
    fn name(&self) -> &'static str {
        self.name
    }

    fn slow_phase(&mut self, a: &Nonce, prover: &mut ProverAccess<'_>, rng: &mut dyn RngCore)
        -> Result<InitReply, Error> {
        let probe = self.probe.resolve(prover.params().n(), rng)?;
        let h = harvest(prover, a, probe)?;
        let init = h.init.clone();
        self.harvest = Some(h);
        Ok(init)
    }

    fn fast_reply(&mut self, round: usize, q: bool, _link: &mut RelayLink<'_>, _rng: &mut dyn RngCore)
        -> Result<Option<bool>, Error> {
        let h = self.harvest.as_ref().ok_or(Error::WrongState {
            op: "fast_reply",
            state: "no harvest".into(),
        })?;
        self.watch.see(round, q, Some(&h.probe));
        if self.give_up && self.watch.first_divergence.is_some() {
            return Ok(None);
        }
        Ok(Some(h.replies.get(round - 1)))
    }

    fn post_fast(&mut self, prover: &mut ProverAccess<'_>, rng: &mut dyn RngCore) -> Result<BitString, Error> {
        match self.harvest.as_ref().and_then(|h| h.signature.clone()) {
            Some(sig) => Ok(sig),
            None => Ok(BitString::random(prover.scheme().post_fast_auth_len(prover.params()), rng)),
        }
    }

    fn report(&self) -> AdversaryReport {
        AdversaryReport {
            strategy: self.name,
            probe: self.harvest.as_ref().map(|h| h.probe.clone()),
            observed: self.watch.observed.clone(),
            first_divergence: self.watch.first_divergence,
        }
    }
}

/// Mafia fraud by forwarding: every message goes to the remote prover and
/// back, so content is always right and only timing can stop it.
#[derive(Debug, Default)]
pub struct Relay {
    session: Option<SessionId>,
    watch: Watch,
}

impl AdversaryStrategy for Relay {
    fn name(&self) -> &'static str {
        "relay"
    }

    fn slow_phase(&mut self, a: &Nonce, prover: &mut ProverAccess<'_>, _rng: &mut dyn RngCore)
        -> Result<InitReply, Error> {
        let (id, init) = prover.open(a)?;
        self.session = Some(id);
        Ok(init)
    }

    fn fast_reply(&mut self, round: usize, q: bool, link: &mut RelayLink<'_>, _rng: &mut dyn RngCore)
        -> Result<Option<bool>, Error> {
        self.watch.see(round, q, None);
        let id = self.session.ok_or(Error::WrongState {
            op: "fast_reply",
            state: "no session".into(),
        })?;
        link.forward(id, q).map(Some)
    }

    fn post_fast(&mut self, prover: &mut ProverAccess<'_>, _rng: &mut dyn RngCore) -> Result<BitString, Error> {
        let id = self.session.ok_or(Error::WrongState {
            op: "post_fast",
            state: "no session".into(),
        })?;
        prover.signature(id)
    }

    fn report(&self) -> AdversaryReport {
        AdversaryReport {
            strategy: self.name(),
            probe: None,
            observed: self.watch.observed.clone(),
            first_divergence: None,
        }
    }
}

/// Runs a full session with the prover under its own nonce `a'` before the
/// verifier starts, then replays that session's `b`, authentication bits and
/// replies. Wins outright only if the verifier happens to draw `a = a'`.
#[derive(Debug, Default)]
pub struct Replay {
    forced_a: Option<Nonce>,
    harvest: Option<Harvest>,
    watch: Watch,
}

impl Replay {
    /// Replays a session opened with the given `a'` instead of a random one.
    pub fn with_nonce(a: Nonce) -> Self {
        Replay {
            forced_a: Some(a),
            ..Default::default()
        }
    }
}

impl AdversaryStrategy for Replay {
    fn name(&self) -> &'static str {
        "replay"
    }

    fn before_session(&mut self, prover: &mut ProverAccess<'_>, rng: &mut dyn RngCore) -> Result<(), Error> {
        let a = match &self.forced_a {
            Some(a) => a.clone(),
            None => Nonce::random(prover.params(), NonceRole::VerifierNonceA, rng),
        };
        let n = prover.params().n();
        self.harvest = Some(harvest(prover, &a, BitString::zeros(n))?);
        Ok(())
    }

    fn slow_phase(&mut self, _a: &Nonce, _prover: &mut ProverAccess<'_>, _rng: &mut dyn RngCore)
        -> Result<InitReply, Error> {
        self.harvest.as_ref().map(|h| h.init.clone()).ok_or(Error::WrongState {
            op: "slow_phase",
            state: "no harvest".into(),
        })
    }

    fn fast_reply(&mut self, round: usize, q: bool, _link: &mut RelayLink<'_>, _rng: &mut dyn RngCore)
        -> Result<Option<bool>, Error> {
        let h = self.harvest.as_ref().expect("harvested before the session");
        self.watch.see(round, q, Some(&h.probe));
        Ok(Some(h.replies.get(round - 1)))
    }

    fn post_fast(&mut self, prover: &mut ProverAccess<'_>, rng: &mut dyn RngCore) -> Result<BitString, Error> {
        match self.harvest.as_ref().and_then(|h| h.signature.clone()) {
            Some(sig) => Ok(sig),
            None => Ok(BitString::random(prover.scheme().post_fast_auth_len(prover.params()), rng)),
        }
    }

    fn report(&self) -> AdversaryReport {
        AdversaryReport {
            strategy: self.name(),
            probe: self.harvest.as_ref().map(|h| h.probe.clone()),
            observed: self.watch.observed.clone(),
            first_divergence: self.watch.first_divergence,
        }
    }
}

/// Brands–Chaum attacker that picks the cheaper of two pure attacks:
/// guess all `n` challenges ahead of time, or guess the `m`-bit signature.
#[derive(Debug)]
pub enum BcGuess {
    Challenges(Box<PreAsk>),
    Signature(RandomGuess),
}

impl BcGuess {
    pub fn new(params: &ProtocolParams, probe: Probe) -> Self {
        if params.n() <= params.m() {
            BcGuess::Challenges(Box::new(PreAsk::pure(probe)))
        } else {
            BcGuess::Signature(RandomGuess::default())
        }
    }

    fn inner(&mut self) -> &mut dyn AdversaryStrategy {
        match self {
            BcGuess::Challenges(s) => s.as_mut(),
            BcGuess::Signature(s) => s,
        }
    }
}

impl AdversaryStrategy for BcGuess {
    fn name(&self) -> &'static str {
        "bc-guess"
    }

    fn slow_phase(&mut self, a: &Nonce, prover: &mut ProverAccess<'_>, rng: &mut dyn RngCore)
        -> Result<InitReply, Error> {
        self.inner().slow_phase(a, prover, rng)
    }

    fn fast_reply(&mut self, round: usize, q: bool, link: &mut RelayLink<'_>, rng: &mut dyn RngCore)
        -> Result<Option<bool>, Error> {
        self.inner().fast_reply(round, q, link, rng)
    }

    fn post_fast(&mut self, prover: &mut ProverAccess<'_>, rng: &mut dyn RngCore) -> Result<BitString, Error> {
        self.inner().post_fast(prover, rng)
    }

    fn report(&self) -> AdversaryReport {
        let inner = match self {
            BcGuess::Challenges(s) => s.report(),
            BcGuess::Signature(s) => s.report(),
        };
        AdversaryReport {
            strategy: self.name(),
            ..inner
        }
    }
}

/// Strategy selector used by experiments and the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdversaryKind {
    /// The legitimate prover at the verifier's distance.
    #[default]
    None,
    Random,
    PreAsk,
    Relay,
    Replay,
    HkPreAsk,
    BcGuess,
}

impl AdversaryKind {
    pub const ALL: [AdversaryKind; 7] = [
        AdversaryKind::None,
        AdversaryKind::Random,
        AdversaryKind::PreAsk,
        AdversaryKind::Relay,
        AdversaryKind::Replay,
        AdversaryKind::HkPreAsk,
        AdversaryKind::BcGuess,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AdversaryKind::None => "none",
            AdversaryKind::Random => "random",
            AdversaryKind::PreAsk => "preask",
            AdversaryKind::Relay => "relay",
            AdversaryKind::Replay => "replay",
            AdversaryKind::HkPreAsk => "hk-preask",
            AdversaryKind::BcGuess => "bc-guess",
        }
    }

    pub fn supports(self, scheme: Scheme) -> bool {
        match self {
            AdversaryKind::HkPreAsk => scheme == Scheme::HanckeKuhn,
            AdversaryKind::BcGuess => scheme == Scheme::BrandsChaum,
            _ => true,
        }
    }

    /// Whether the strategy uses no coins of its own for this probe.
    pub fn is_deterministic(self, probe: &Probe) -> bool {
        match self {
            AdversaryKind::None | AdversaryKind::Relay => true,
            AdversaryKind::PreAsk | AdversaryKind::HkPreAsk => probe.is_deterministic(),
            AdversaryKind::Random | AdversaryKind::Replay | AdversaryKind::BcGuess => false,
        }
    }

    /// A fresh strategy, or `None` for the legitimate prover.
    pub fn build(
        self,
        params: &ProtocolParams,
        scheme: Scheme,
        probe: &Probe,
    ) -> Result<Option<Box<dyn AdversaryStrategy>>, Error> {
        if !self.supports(scheme) {
            return Err(Error::Unsupported(format!(
                "adversary {} does not apply to protocol {}",
                self.name(),
                scheme.name()
            )));
        }
        Ok(match self {
            AdversaryKind::None => None,
            AdversaryKind::Random => Some(Box::new(RandomGuess::default())),
            AdversaryKind::PreAsk => Some(Box::new(PreAsk::new(probe.clone()))),
            AdversaryKind::Relay => Some(Box::new(Relay::default())),
            AdversaryKind::Replay => Some(Box::new(Replay::default())),
            AdversaryKind::HkPreAsk => Some(Box::new(PreAsk::new(probe.clone()).named("hk-preask"))),
            AdversaryKind::BcGuess => Some(Box::new(BcGuess::new(params, probe.clone()))),
        })
    }
}

impl std::fmt::Display for AdversaryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for AdversaryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        AdversaryKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .or(match s {
                "pre-ask" => Some(AdversaryKind::PreAsk),
                "honest" | "legitimate" => Some(AdversaryKind::None),
                _ => None,
            })
            .ok_or_else(|| Error::Unsupported(format!("unknown adversary {s:?}")))
    }
}
