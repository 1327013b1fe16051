//! Runs one protocol execution between a verifier and a claimant.
//!
//! The claimant is either the legitimate prover, standing at the verifier's
//! distance, or an [`AdversaryStrategy`]. An adversary never touches a key
//! or a tree: it reaches the legitimate prover only through [`ProverAccess`]
//! while no clock is running, and through [`RelayLink`] during the fast
//! phase, where every forwarded challenge pays the relay distance.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::adversary::{AdversaryReport, AdversaryStrategy, Event};
use crate::bits::BitString;
use crate::channel::ChannelConfig;
use crate::error::Error;
use crate::expand::Expander;
use crate::protocol::{verifier_start, ChallengeSource, FastReply, InitReply, ProverSession, Scheme};
use crate::transcript::{Message, MessageKind, Transcript, Verdict};
use crate::types::{Key, Nonce, ProtocolParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SessionId(usize);

/// Legitimate prover sessions opened on behalf of an adversary.
#[derive(Debug)]
pub struct ProverPool {
    params: ProtocolParams,
    key: Key,
    scheme: Scheme,
    budget: usize,
    sessions: Vec<ProverSession>,
}

impl ProverPool {
    pub fn new(params: ProtocolParams, key: Key, scheme: Scheme, budget: usize) -> Self {
        ProverPool {
            params,
            key,
            scheme,
            budget,
            sessions: Vec::new(),
        }
    }

    fn session(&mut self, id: SessionId) -> Result<&mut ProverSession, Error> {
        self.sessions.get_mut(id.0).ok_or(Error::UnknownSession(id.0))
    }

    fn nonces(&self) -> Vec<(Nonce, Nonce)> {
        self.sessions
            .iter()
            .filter_map(|s| Some((s.nonce_a()?.clone(), s.nonce_b()?.clone())))
            .collect()
    }
}

/// Untimed access to the legitimate prover.
pub struct ProverAccess<'a> {
    pool: &'a mut ProverPool,
    expander: &'a mut Expander,
    rng: &'a mut ChaCha8Rng,
}

impl ProverAccess<'_> {
    pub fn params(&self) -> &ProtocolParams {
        &self.pool.params
    }

    pub fn scheme(&self) -> Scheme {
        self.pool.scheme
    }

    /// Starts a prover session with nonce `a` and returns its slow-phase reply.
    pub fn open(&mut self, a: &Nonce) -> Result<(SessionId, InitReply), Error> {
        if self.pool.sessions.len() >= self.pool.budget {
            return Err(Error::BudgetExhausted(self.pool.budget));
        }
        let mut session = ProverSession::new(self.pool.params, self.pool.key.clone(), self.pool.scheme);
        let reply = session.respond_init(a, self.rng, self.expander)?;
        self.pool.sessions.push(session);
        Ok((SessionId(self.pool.sessions.len() - 1), reply))
    }

    /// Sends an untimed challenge; the prover cannot tell it apart from a
    /// fast-phase round.
    pub fn challenge(&mut self, id: SessionId, q: bool) -> Result<bool, Error> {
        self.pool.session(id)?.fast_reply(q)
    }

    pub fn signature(&mut self, id: SessionId) -> Result<BitString, Error> {
        let expander = &mut *self.expander;
        self.pool.session(id)?.signature(expander)
    }
}

/// Fast-phase path to the legitimate prover. Using it marks the round as
/// relayed, so its round trip includes the extra distance.
pub struct RelayLink<'a> {
    pool: &'a mut ProverPool,
    relayed: bool,
}

impl RelayLink<'_> {
    pub fn params(&self) -> &ProtocolParams {
        &self.pool.params
    }

    pub fn scheme(&self) -> Scheme {
        self.pool.scheme
    }

    pub fn forward(&mut self, id: SessionId, q: bool) -> Result<bool, Error> {
        self.relayed = true;
        self.pool.session(id)?.fast_reply(q)
    }
}

pub enum Claimant<'a> {
    Legitimate,
    Adversary(&'a mut dyn AdversaryStrategy),
}

/// Static configuration of an execution.
#[derive(Debug, Clone, Copy)]
pub struct Setup {
    pub params: ProtocolParams,
    pub scheme: Scheme,
    pub channel: ChannelConfig,
    /// Prover sessions an adversary may open per execution.
    pub prover_budget: usize,
    pub record_messages: bool,
}

impl Setup {
    pub fn new(params: ProtocolParams, scheme: Scheme, channel: ChannelConfig) -> Self {
        Setup {
            params,
            scheme,
            channel,
            prover_budget: 1,
            record_messages: false,
        }
    }
}

/// Independent random streams for each party.
#[derive(Debug, Clone)]
pub struct PartyRngs {
    pub verifier: ChaCha8Rng,
    pub prover: ChaCha8Rng,
    pub adversary: ChaCha8Rng,
    /// Feeds the idealized random function.
    pub oracle: ChaCha8Rng,
}

fn stream_rng(seed: u64, stream: u64, party: u64) -> ChaCha8Rng {
    let mut s = [0u8; 32];
    s[..8].copy_from_slice(&seed.to_le_bytes());
    s[8..16].copy_from_slice(&stream.to_le_bytes());
    s[16..24].copy_from_slice(&party.to_le_bytes());
    ChaCha8Rng::from_seed(s)
}

impl PartyRngs {
    /// Streams for trial `stream` of the experiment seeded with `seed`.
    pub fn derive(seed: u64, stream: u64) -> Self {
        PartyRngs {
            verifier: stream_rng(seed, stream, 0),
            prover: stream_rng(seed, stream, 1),
            adversary: stream_rng(seed, stream, 2),
            oracle: stream_rng(seed, stream, 3),
        }
    }

    /// A stream outside the per-trial space, for experiment-wide values like the key.
    pub fn global(seed: u64, purpose: u64) -> ChaCha8Rng {
        stream_rng(seed, u64::MAX, purpose)
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub transcript: Transcript,
    pub verdict: Verdict,
    /// The authentication bits (or signature) matched.
    pub auth_ok: bool,
    /// The verifier's `(a, b)` equals a prover session the adversary opened
    /// before the verifier session started.
    pub replay_hit: bool,
    pub messages: Vec<Message>,
    pub report: Option<AdversaryReport>,
}

struct Recorder {
    on: bool,
    clock: f64,
    messages: Vec<Message>,
}

impl Recorder {
    fn push(&mut self, kind: MessageKind, bits: &BitString, time: f64) {
        if self.on {
            self.messages.push(Message {
                kind,
                bits: bits.clone(),
                time,
            });
        }
    }
}

/// Runs one execution. `verifier_key` and `prover_key` are normally equal;
/// distinct keys model a claimant who does not hold the verifier's secret.
#[allow(clippy::too_many_arguments)]
pub fn execute(
    setup: &Setup,
    verifier_key: &Key,
    prover_key: &Key,
    mut claimant: Claimant<'_>,
    expander: &mut Expander,
    challenges: &mut dyn ChallengeSource,
    rngs: &mut PartyRngs,
) -> Result<Outcome, Error> {
    let params = setup.params;
    let scheme = setup.scheme;
    let one_way = setup.channel.one_way();
    let mut rec = Recorder {
        on: setup.record_messages,
        clock: 0.0,
        messages: Vec::new(),
    };
    let mut pool = ProverPool::new(params, prover_key.clone(), scheme, setup.prover_budget);

    if let Claimant::Adversary(adv) = &mut claimant {
        let mut access = ProverAccess {
            pool: &mut pool,
            expander,
            rng: &mut rngs.prover,
        };
        adv.before_session(&mut access, &mut rngs.adversary)?;
    }
    let harvested = pool.nonces();

    let (mut verifier, a) = verifier_start(
        params,
        verifier_key.clone(),
        scheme,
        setup.channel,
        &mut rngs.verifier,
    )?;
    rec.push(MessageKind::NonceA, a.bits(), rec.clock);
    rec.clock += 2.0 * one_way;

    let mut legit: Option<ProverSession> = None;
    let init = match &mut claimant {
        Claimant::Legitimate => {
            let mut prover = ProverSession::new(params, prover_key.clone(), scheme);
            let reply = prover.respond_init(&a, &mut rngs.prover, expander)?;
            legit = Some(prover);
            reply
        }
        Claimant::Adversary(adv) => {
            let mut access = ProverAccess {
                pool: &mut pool,
                expander,
                rng: &mut rngs.prover,
            };
            adv.slow_phase(&a, &mut access, &mut rngs.adversary)?
        }
    };
    rec.push(MessageKind::NonceB, init.b.bits(), rec.clock);
    if !init.auth.is_empty() {
        rec.push(MessageKind::Auth, &init.auth, rec.clock);
    }
    verifier.receive_init(&init.b, &init.auth, expander)?;

    for _ in 0..params.n() {
        let record = match &mut claimant {
            Claimant::Legitimate => {
                let prover = legit.as_mut().expect("legitimate prover session");
                verifier.fast_round(challenges, &mut rngs.verifier, |_, q| {
                    Ok(Some(FastReply {
                        bit: prover.fast_reply(q)?,
                        relayed: false,
                    }))
                })?
            }
            Claimant::Adversary(adv) => {
                let adv_rng = &mut rngs.adversary;
                let pool = &mut pool;
                let record = verifier.fast_round(challenges, &mut rngs.verifier, |round, q| {
                    let mut link = RelayLink {
                        pool,
                        relayed: false,
                    };
                    let bit = adv.fast_reply(round, q, &mut link, adv_rng)?;
                    let relayed = link.relayed;
                    Ok(bit.map(|bit| FastReply { bit, relayed }))
                })?;
                adv.observe(&Event::Challenge {
                    round: record.round,
                    challenge: record.challenge,
                });
                record
            }
        };
        if rec.on {
            let q = BitString::from_bools(&[record.challenge]);
            rec.push(MessageKind::Challenge, &q, rec.clock);
            if let Some(r) = record.reply {
                rec.clock += record.rtt;
                rec.push(MessageKind::Reply, &BitString::from_bools(&[r]), rec.clock);
            } else {
                rec.clock += setup.channel.threshold();
            }
        }
    }

    if scheme == Scheme::BrandsChaum {
        let signature = match &mut claimant {
            Claimant::Legitimate => legit
                .as_mut()
                .expect("legitimate prover session")
                .signature(expander)?,
            Claimant::Adversary(adv) => {
                let mut access = ProverAccess {
                    pool: &mut pool,
                    expander,
                    rng: &mut rngs.prover,
                };
                adv.post_fast(&mut access, &mut rngs.adversary)?
            }
        };
        rec.clock += one_way;
        rec.push(MessageKind::Auth, &signature, rec.clock);
        verifier.receive_signature(&signature, expander)?;
    }

    let verdict = verifier.final_decision();
    let report = match &mut claimant {
        Claimant::Adversary(adv) => {
            adv.observe(&Event::Verdict(verdict));
            Some(adv.report())
        }
        Claimant::Legitimate => None,
    };
    let replay_hit = harvested
        .iter()
        .any(|(ha, hb)| ha == verifier.nonce_a() && Some(hb) == verifier.nonce_b());
    Ok(Outcome {
        transcript: verifier.transcript(),
        verdict,
        auth_ok: verifier.auth_ok().unwrap_or(false),
        replay_hit,
        messages: rec.messages,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expand::TreeMode;
    use crate::protocol::FairCoin;
    use crate::transcript::Reason;
    use rand::RngCore;

    #[test]
    fn legitimate_prover_accepted_with_trace() {
        let params = ProtocolParams::new(3, 3).unwrap();
        let mut setup = Setup::new(params, Scheme::Tree, ChannelConfig::default());
        setup.record_messages = true;
        let mut rngs = PartyRngs::derive(1, 0);
        let key = Key::random(&params, &mut PartyRngs::global(1, 0)).unwrap();
        let mut expander = Expander::new(TreeMode::Prf, 0);
        let out = execute(&setup, &key, &key, Claimant::Legitimate, &mut expander, &mut FairCoin, &mut rngs).unwrap();
        assert_eq!(out.verdict.reason, Reason::Ok);
        let kinds: Vec<_> = out.messages.iter().map(|m| m.kind).collect();
        assert_eq!(kinds[..3], [MessageKind::NonceA, MessageKind::NonceB, MessageKind::Auth]);
        assert_eq!(kinds.len(), 3 + 2 * 3);
        assert!(out.messages.windows(2).all(|w| w[0].time <= w[1].time));
        assert!(!out.replay_hit);
    }

    #[test]
    fn party_streams_differ() {
        let mut r = PartyRngs::derive(5, 5);
        assert_ne!(r.verifier.next_u64(), r.prover.next_u64());
        let mut again = PartyRngs::derive(5, 5);
        let mut first = PartyRngs::derive(5, 5);
        assert_eq!(again.adversary.next_u64(), first.adversary.next_u64());
    }
}
