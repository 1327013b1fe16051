//! Trial orchestration, exact enumeration and binomial statistics.
//!
//! Every trial draws its randomness from streams derived from
//! `(seed, trial index)`, so results do not depend on how trials are
//! scheduled across threads.

use std::ops::Range;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::adversary::{AdversaryKind, Probe};
use crate::analysis::{self, Exact};
use crate::bits::BitString;
use crate::channel::ChannelConfig;
use crate::error::Error;
use crate::execution::{execute, Claimant, Outcome, PartyRngs, Setup};
use crate::expand::{Expander, TreeMode};
use crate::protocol::{FairCoin, Scheme, Scripted};
use crate::types::{Key, ProtocolParams};

/// What counts as a success for the adversary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    /// The verifier accepts.
    #[default]
    Accept,
    /// The authentication bits (or signature) check out, whatever the fast phase did.
    AuthStep,
    /// The verifier's session coincides with one the adversary ran beforehand.
    ReplayHit,
}

impl Criterion {
    pub fn name(self) -> &'static str {
        match self {
            Criterion::Accept => "accept",
            Criterion::AuthStep => "auth-step",
            Criterion::ReplayHit => "replay-hit",
        }
    }

    fn holds(self, out: &Outcome) -> bool {
        match self {
            Criterion::Accept => out.verdict.accepted,
            Criterion::AuthStep => out.auth_ok,
            Criterion::ReplayHit => out.replay_hit,
        }
    }
}

impl std::str::FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "accept" => Ok(Criterion::Accept),
            "auth-step" | "auth" => Ok(Criterion::AuthStep),
            "replay-hit" => Ok(Criterion::ReplayHit),
            _ => Err(Error::Format(format!("unknown criterion {s:?}"))),
        }
    }
}

/// A statistical experiment. `params.executions()` is the batch size used by
/// [`run_batches`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub params: ProtocolParams,
    pub protocol: Scheme,
    pub adversary: AdversaryKind,
    pub probe: Probe,
    pub trials: u64,
    pub seed: u64,
    pub channel: ChannelConfig,
    pub mode: TreeMode,
    pub criterion: Criterion,
    /// Prover sessions the adversary may open per execution.
    pub prover_budget: usize,
}

impl ExperimentSpec {
    pub fn new(params: ProtocolParams, protocol: Scheme, adversary: AdversaryKind) -> Self {
        ExperimentSpec {
            params,
            protocol,
            adversary,
            probe: Probe::Zeros,
            trials: 10_000,
            seed: 0,
            channel: ChannelConfig::default(),
            mode: TreeMode::IdealUniform,
            criterion: Criterion::Accept,
            prover_budget: 1,
        }
    }

    pub fn trials(self, trials: u64) -> Self {
        ExperimentSpec { trials, ..self }
    }

    pub fn seed(self, seed: u64) -> Self {
        ExperimentSpec { seed, ..self }
    }

    pub fn batch_size(&self) -> u64 {
        self.params.executions()
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.trials == 0 {
            return Err(Error::Experiment("trials must be at least 1".into()));
        }
        self.channel.validate()?;
        if !self.adversary.supports(self.protocol) {
            return Err(Error::Unsupported(format!(
                "adversary {} does not apply to protocol {}",
                self.adversary,
                self.protocol.name()
            )));
        }
        Ok(())
    }

    /// Closed-form per-execution success probability, where one is known.
    pub fn predicted(&self) -> Option<f64> {
        predict(self)
    }
}

fn pow2_neg(k: usize) -> f64 {
    0.5f64.powi(k as i32)
}

fn predict(spec: &ExperimentSpec) -> Option<f64> {
    let p = &spec.params;
    let (n, m) = (p.n(), p.m());
    let hit = analysis::replay_hit(p);
    let c = &spec.channel;
    if c.jitter > 0.0 {
        return None;
    }
    let relay_ok = c.rtt(true) <= c.threshold();
    // A fixed m-bit string handed in after the fast phase matches a fresh
    // expected signature with probability 2^-m.
    let bc_preask = pow2_neg(n) + (1.0 - pow2_neg(n)) * pow2_neg(m);
    use AdversaryKind as A;
    use Criterion as C;
    use Scheme as S;
    Some(match (spec.criterion, spec.adversary, spec.protocol) {
        (C::ReplayHit, A::Replay, _) => hit,
        (C::ReplayHit, _, _) => 0.0,

        (C::Accept, A::None, _) => 1.0,
        (C::Accept, A::Random, S::Tree) => analysis::no_prover_success(m as u32, n as u32),
        (C::Accept, A::Random, S::HanckeKuhn) => pow2_neg(n),
        (C::Accept, A::Random, S::BrandsChaum) => pow2_neg(m),
        (C::Accept, A::PreAsk, S::Tree) => analysis::preask_success(n as u32).ok()?,
        (C::Accept, A::PreAsk | A::HkPreAsk, S::HanckeKuhn) => analysis::hk_success(n as u32),
        (C::Accept, A::PreAsk, S::BrandsChaum) => bc_preask,
        (C::Accept, A::BcGuess, S::BrandsChaum) => analysis::bc_success(m as u32, n as u32),
        (C::Accept, A::Relay, _) => f64::from(u8::from(relay_ok)),
        (C::Accept, A::Replay, S::Tree) => analysis::replay_success(p),
        (C::Accept, A::Replay, S::HanckeKuhn) => hit * analysis::hk_success(n as u32) + (1.0 - hit) * pow2_neg(n),
        (C::Accept, A::Replay, S::BrandsChaum) => hit * bc_preask + (1.0 - hit) * pow2_neg(m),

        (C::AuthStep, _, S::HanckeKuhn) => 1.0,
        (C::AuthStep, A::None | A::PreAsk | A::Relay, S::Tree) => 1.0,
        (C::AuthStep, A::None | A::Relay, S::BrandsChaum) => 1.0,
        (C::AuthStep, A::Random, _) => pow2_neg(m),
        (C::AuthStep, A::PreAsk, S::BrandsChaum) => bc_preask,
        (C::AuthStep, A::Replay, S::Tree) => hit + (1.0 - hit) * pow2_neg(m),
        _ => return None,
    })
}

/// Binomial point estimate with a 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Confidence {
    pub estimate: f64,
    pub std_error: f64,
    pub lower: f64,
    pub upper: f64,
    /// The interval is Clopper–Pearson rather than the normal approximation.
    pub exact: bool,
}

const Z95: f64 = 1.959963984540054;

pub fn confidence(successes: u64, trials: u64) -> Confidence {
    assert!(trials >= 1 && successes <= trials, "need 0 <= successes <= trials, trials >= 1");
    let n = trials as f64;
    let p = successes as f64 / n;
    let std_error = (p * (1.0 - p) / n).sqrt();
    if successes < 10 {
        let (lower, upper) = clopper_pearson(successes, trials, 0.05);
        Confidence {
            estimate: p,
            std_error,
            lower,
            upper,
            exact: true,
        }
    } else {
        Confidence {
            estimate: p,
            std_error,
            lower: (p - Z95 * std_error).max(0.0),
            upper: (p + Z95 * std_error).min(1.0),
            exact: false,
        }
    }
}

/// `P(X <= k)` for `X ~ Bin(n, p)`, summed in log space. Meant for small `k`.
fn binomial_cdf(k: u64, n: u64, p: f64) -> f64 {
    if p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return if k >= n { 1.0 } else { 0.0 };
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let mut log_choose = 0.0;
    let mut total = 0.0;
    for i in 0..=k.min(n) {
        if i > 0 {
            log_choose += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        total += (log_choose + i as f64 * lp + (n - i) as f64 * lq).exp();
    }
    total.min(1.0)
}

fn bisect(mut lo: f64, mut hi: f64, increasing: bool, f: impl Fn(f64) -> f64, target: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < target) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn clopper_pearson(k: u64, n: u64, alpha: f64) -> (f64, f64) {
    let lower = if k == 0 {
        0.0
    } else {
        // P(X >= k | p) = alpha / 2, increasing in p.
        bisect(0.0, 1.0, true, |p| 1.0 - binomial_cdf(k - 1, n, p), alpha / 2.0)
    };
    let upper = if k == n {
        1.0
    } else {
        // P(X <= k | p) = alpha / 2, decreasing in p.
        bisect(0.0, 1.0, false, |p| binomial_cdf(k, n, p), alpha / 2.0)
    };
    (lower, upper)
}

/// Result of an experiment. Field order is the serialized column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub protocol: &'static str,
    pub adversary: &'static str,
    pub n: usize,
    pub m: usize,
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub std_error: f64,
    pub predicted: Option<f64>,
    /// `(estimate - predicted) / sigma`, with sigma taken from the prediction.
    pub z: Option<f64>,
}

impl TrialReport {
    pub const COLUMNS: [&'static str; 10] = [
        "protocol", "adversary", "n", "m", "trials", "successes", "estimate", "std_error", "predicted", "z",
    ];

    fn new(spec: &ExperimentSpec, trials: u64, successes: u64, predicted: Option<f64>) -> Self {
        let c = confidence(successes, trials);
        TrialReport {
            protocol: spec.protocol.name(),
            adversary: spec.adversary.name(),
            n: spec.params.n(),
            m: spec.params.m(),
            trials,
            successes,
            estimate: c.estimate,
            std_error: c.std_error,
            predicted,
            z: predicted.map(|p| z_score(c.estimate, p, trials)),
        }
    }

    pub fn confidence(&self) -> Confidence {
        confidence(self.successes, self.trials)
    }

    /// `|estimate - predicted| <= k` standard errors of the prediction. A
    /// prediction of exactly 0 or 1 demands an exact match.
    pub fn within(&self, k: f64) -> bool {
        self.z.is_some_and(|z| z.abs() <= k)
    }
}

fn z_score(estimate: f64, predicted: f64, trials: u64) -> f64 {
    let sigma = (predicted * (1.0 - predicted) / trials as f64).sqrt();
    let diff = estimate - predicted;
    if sigma > 0.0 {
        diff / sigma
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// Batch experiment result with within-batch nonce collision statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchReport {
    /// Batches count as trials; a batch succeeds if any execution in it does.
    pub report: TrialReport,
    pub executions: u64,
    pub collisions: u64,
    pub collision_frequency: f64,
    pub collision_std_error: f64,
    pub collision_exact: f64,
    pub collision_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Sequential,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    successes: u64,
    collisions: u64,
}

impl Tally {
    fn add(self, o: Tally) -> Tally {
        Tally {
            successes: self.successes + o.successes,
            collisions: self.collisions + o.collisions,
        }
    }
}

struct Runner<'a> {
    spec: &'a ExperimentSpec,
    setup: Setup,
    key: Key,
    executions: u64,
}

impl<'a> Runner<'a> {
    fn new(spec: &'a ExperimentSpec, executions: u64) -> Result<Self, Error> {
        spec.validate()?;
        let mut setup = Setup::new(spec.params, spec.protocol, spec.channel);
        setup.prover_budget = spec.prover_budget;
        let key = Key::random(&spec.params, &mut PartyRngs::global(spec.seed, 0))?;
        Ok(Runner {
            spec,
            setup,
            key,
            executions,
        })
    }

    /// One trial: `executions` runs sharing a key and an idealized oracle.
    fn trial(&self, index: u64) -> Result<Tally, Error> {
        let spec = self.spec;
        let mut rngs = PartyRngs::derive(spec.seed, index);
        let mut expander = match spec.mode {
            TreeMode::Prf => Expander::Prf,
            TreeMode::IdealUniform => Expander::ideal(rngs.oracle.clone()),
        };
        let mut success = false;
        let mut nonces: Vec<BitString> = Vec::new();
        let mut collided = false;
        for _ in 0..self.executions {
            let mut strategy = spec.adversary.build(&spec.params, spec.protocol, &spec.probe)?;
            let claimant = match strategy.as_deref_mut() {
                Some(s) => Claimant::Adversary(s),
                None => Claimant::Legitimate,
            };
            let out = execute(&self.setup, &self.key, &self.key, claimant, &mut expander, &mut FairCoin, &mut rngs)?;
            success |= spec.criterion.holds(&out);
            if self.executions > 1 {
                let a = out.transcript.nonce_a.bits();
                collided |= nonces.contains(a);
                nonces.push(a.clone());
            }
        }
        Ok(Tally {
            successes: u64::from(success),
            collisions: u64::from(collided),
        })
    }

    fn run(&self, range: Range<u64>, par: Parallelism) -> Result<Tally, Error> {
        #[cfg(feature = "parallel")]
        if par == Parallelism::Parallel {
            use rayon::prelude::*;
            return range
                .into_par_iter()
                .map(|i| self.trial(i))
                .try_reduce(Tally::default, |a, b| Ok(a.add(b)));
        }
        let _ = par;
        range.map(|i| self.trial(i)).try_fold(Tally::default(), |acc, t| Ok(acc.add(t?)))
    }
}

/// Runs `spec.trials` single executions and counts adversary successes.
pub fn run_trials(spec: &ExperimentSpec) -> Result<TrialReport, Error> {
    run_trials_with(spec, Parallelism::default())
}

pub fn run_trials_with(spec: &ExperimentSpec, par: Parallelism) -> Result<TrialReport, Error> {
    let tally = Runner::new(spec, 1)?.run(0..spec.trials, par)?;
    Ok(TrialReport::new(spec, spec.trials, tally.successes, spec.predicted()))
}

/// Per-trial outcomes for a range of trial indices, in index order.
pub fn trial_outcomes(spec: &ExperimentSpec, range: Range<u64>) -> Result<Vec<bool>, Error> {
    let runner = Runner::new(spec, 1)?;
    range.map(|i| runner.trial(i).map(|t| t.successes == 1)).collect()
}

/// Runs `spec.trials` batches of `params.executions()` executions each.
pub fn run_batches(spec: &ExperimentSpec) -> Result<BatchReport, Error> {
    run_batches_with(spec, Parallelism::default())
}

pub fn run_batches_with(spec: &ExperimentSpec, par: Parallelism) -> Result<BatchReport, Error> {
    let executions = spec.batch_size();
    let tally = Runner::new(spec, executions)?.run(0..spec.trials, par)?;
    let predicted = spec.predicted().map(|p| analysis::at_least_once(p, executions));
    let coll = confidence(tally.collisions, spec.trials);
    let l_a = spec.params.l_a() as u32;
    Ok(BatchReport {
        report: TrialReport::new(spec, spec.trials, tally.successes, predicted),
        executions,
        collisions: tally.collisions,
        collision_frequency: coll.estimate,
        collision_std_error: coll.std_error,
        collision_exact: analysis::birthday_exact(executions, l_a),
        collision_bound: analysis::birthday_bound(executions, l_a),
    })
}

/// Largest enumeration accepted by [`exact_enumeration`], as a power of two.
pub const ENUMERATION_LIMIT_LOG2: u32 = 24;

/// Exact success probability of a deterministic adversary, by running every
/// equiprobable pair of key material (tree or registers) and challenge
/// sequence.
pub fn exact_enumeration(
    protocol: Scheme,
    adversary: AdversaryKind,
    n: usize,
    probe: &Probe,
    channel: ChannelConfig,
) -> Result<Exact, Error> {
    let params = ProtocolParams::new(n as u64, n as u64)?;
    let material_bits = match protocol {
        Scheme::Tree => params.l_k(),
        Scheme::HanckeKuhn => 2 * n as u64,
        Scheme::BrandsChaum => {
            return Err(Error::Unsupported(
                "signature depends on the whole transcript; enumeration covers tree and hk".into(),
            ))
        }
    };
    let log2 = material_bits + n as u64;
    if log2 > u64::from(ENUMERATION_LIMIT_LOG2) {
        return Err(Error::EnumerationTooLarge {
            log2: log2.min(u64::from(u32::MAX)) as u32,
            limit: ENUMERATION_LIMIT_LOG2,
        });
    }
    if !adversary.supports(protocol) {
        return Err(Error::Unsupported(format!("adversary {adversary} does not apply to {}", protocol.name())));
    }
    if !adversary.is_deterministic(probe) {
        return Err(Error::Unsupported(format!("adversary {adversary} uses its own coins")));
    }
    let setup = Setup::new(params, protocol, channel);
    let key = Key::new(&params, BitString::zeros(params.l_k() as usize))?;
    let mut successes: u128 = 0;
    for material in 0..(1u64 << material_bits) {
        for q in 0..(1u64 << n) {
            let mut expander = Expander::Fixed(BitString::from_u64(material, material_bits as usize));
            let mut strategy = adversary.build(&params, protocol, probe)?;
            let claimant = match strategy.as_deref_mut() {
                Some(s) => Claimant::Adversary(s),
                None => Claimant::Legitimate,
            };
            let mut challenges = Scripted(BitString::from_u64(q, n).to_bools());
            let out = execute(
                &setup,
                &key,
                &key,
                claimant,
                &mut expander,
                &mut challenges,
                &mut PartyRngs::derive(0, 0),
            )?;
            successes += u128::from(out.verdict.accepted);
        }
    }
    Ok(Ratio::new(successes, 1u128 << log2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(n: u64, m: u64) -> ProtocolParams {
        ProtocolParams::new(n, m).unwrap()
    }

    #[test]
    fn confidence_examples() {
        let c = confidence(50, 100);
        assert_eq!(c.estimate, 0.5);
        assert!((c.std_error - 0.05).abs() < 1e-12);
        assert!(!c.exact);
        let z = confidence(0, 100);
        assert!(z.exact);
        assert_eq!(z.estimate, 0.0);
        assert_eq!(z.lower, 0.0);
        // Known Clopper–Pearson upper bound for 0/100 at 95%: 1 - 0.025^(1/100).
        assert!((z.upper - (1.0 - 0.025f64.powf(0.01))).abs() < 1e-9);
        let full = confidence(7, 7);
        assert_eq!(full.upper, 1.0);
    }

    #[test]
    fn interval_contains_estimate() {
        for (k, n) in [(0, 1), (1, 1), (3, 10), (9, 1000), (10, 1000), (500, 1000), (1000, 1000)] {
            let c = confidence(k, n);
            assert!(c.lower <= c.estimate && c.estimate <= c.upper, "{k}/{n}: {c:?}");
        }
    }

    #[test]
    fn enumeration_oracles() {
        let ch = ChannelConfig::default();
        let n1 = exact_enumeration(Scheme::Tree, AdversaryKind::PreAsk, 1, &Probe::Zeros, ch).unwrap();
        assert_eq!(n1, Ratio::new(3, 4));
        assert_eq!(n1, analysis::preask_success_exact(1).unwrap());
        let hk = exact_enumeration(Scheme::HanckeKuhn, AdversaryKind::HkPreAsk, 2, &Probe::Zeros, ch).unwrap();
        assert_eq!(hk, Ratio::new(9, 16));
        assert_eq!(hk, analysis::hk_success_exact(2).unwrap());
        let honest = exact_enumeration(Scheme::Tree, AdversaryKind::None, 1, &Probe::Zeros, ch).unwrap();
        assert_eq!(honest, Ratio::from_integer(1));
    }

    #[test]
    fn enumeration_probe_invariance_and_hk_sweep() {
        let ch = ChannelConfig::default();
        for probe in ["10", "01", "ones"] {
            let p: Probe = probe.parse().unwrap();
            let r = exact_enumeration(Scheme::HanckeKuhn, AdversaryKind::PreAsk, 2, &p, ch).unwrap();
            assert_eq!(r, Ratio::new(9, 16), "{probe}");
        }
        for n in 1..=4 {
            let r = exact_enumeration(Scheme::HanckeKuhn, AdversaryKind::HkPreAsk, n, &Probe::Zeros, ch).unwrap();
            assert_eq!(r, analysis::hk_success_exact(n as u32).unwrap());
        }
    }

    #[test]
    fn enumeration_refusals() {
        let ch = ChannelConfig::default();
        assert!(matches!(
            exact_enumeration(Scheme::Tree, AdversaryKind::PreAsk, 3, &Probe::Zeros, ch),
            Err(Error::EnumerationTooLarge { log2: 33, limit: 24 })
        ));
        assert!(exact_enumeration(Scheme::Tree, AdversaryKind::Random, 1, &Probe::Zeros, ch).is_err());
        assert!(exact_enumeration(Scheme::Tree, AdversaryKind::PreAsk, 1, &Probe::Random, ch).is_err());
        assert!(exact_enumeration(Scheme::BrandsChaum, AdversaryKind::PreAsk, 1, &Probe::Zeros, ch).is_err());
    }

    #[test]
    fn honest_runs_always_accepted() {
        for mode in [TreeMode::Prf, TreeMode::IdealUniform] {
            for scheme in [Scheme::Tree, Scheme::HanckeKuhn, Scheme::BrandsChaum] {
                let spec = ExperimentSpec {
                    mode,
                    ..ExperimentSpec::new(tree(3, 3), scheme, AdversaryKind::None).trials(200)
                };
                let r = run_trials(&spec).unwrap();
                assert_eq!(r.successes, 200, "{scheme:?} {mode:?}");
                assert_eq!(r.z, Some(0.0));
            }
        }
    }

    #[test]
    fn sequential_matches_parallel() {
        let spec = ExperimentSpec::new(tree(3, 2), Scheme::Tree, AdversaryKind::PreAsk)
            .trials(3000)
            .seed(11);
        let a = run_trials_with(&spec, Parallelism::Sequential).unwrap();
        let b = run_trials_with(&spec, Parallelism::Parallel).unwrap();
        assert_eq!(a, b);
        let whole = trial_outcomes(&spec, 0..3000).unwrap();
        let mut split = trial_outcomes(&spec, 1700..3000).unwrap();
        split.splice(0..0, trial_outcomes(&spec, 0..1700).unwrap());
        assert_eq!(whole, split);
        assert_eq!(whole.iter().filter(|&&s| s).count() as u64, a.successes);
    }

    #[test]
    fn seed_changes_outcomes() {
        let spec = ExperimentSpec::new(tree(2, 2), Scheme::Tree, AdversaryKind::PreAsk).trials(2000);
        let a = trial_outcomes(&spec.clone().seed(1), 0..2000).unwrap();
        let b = trial_outcomes(&spec.seed(2), 0..2000).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn single_execution_batches_equal_trials() {
        let spec = ExperimentSpec::new(tree(2, 2), Scheme::Tree, AdversaryKind::PreAsk)
            .trials(2000)
            .seed(3);
        let b = run_batches(&spec).unwrap();
        let t = run_trials(&spec).unwrap();
        assert_eq!(b.report, t);
        assert_eq!(b.collisions, 0);
        assert_eq!(b.collision_exact, 0.0);
    }

    #[test]
    fn predictions_cover_supported_pairs() {
        let p = tree(4, 4);
        for scheme in [Scheme::Tree, Scheme::HanckeKuhn, Scheme::BrandsChaum] {
            for adv in AdversaryKind::ALL.into_iter().filter(|a| a.supports(scheme)) {
                let spec = ExperimentSpec::new(p, scheme, adv);
                let v = spec.predicted().unwrap();
                assert!((0.0..=1.0).contains(&v), "{scheme:?} {adv:?} {v}");
            }
        }
        let jitter = ExperimentSpec {
            channel: ChannelConfig {
                jitter: 0.1,
                ..Default::default()
            },
            ..ExperimentSpec::new(p, Scheme::Tree, AdversaryKind::Relay)
        };
        assert_eq!(jitter.predicted(), None);
    }

    #[test]
    fn small_statistical_checks() {
        // Quick versions of the larger acceptance experiments.
        let p = tree(2, 2);
        let cases = [
            (Scheme::Tree, AdversaryKind::PreAsk, Criterion::Accept),
            (Scheme::Tree, AdversaryKind::Random, Criterion::Accept),
            (Scheme::Tree, AdversaryKind::Replay, Criterion::Accept),
            (Scheme::Tree, AdversaryKind::Replay, Criterion::AuthStep),
            (Scheme::Tree, AdversaryKind::Replay, Criterion::ReplayHit),
            (Scheme::HanckeKuhn, AdversaryKind::Replay, Criterion::Accept),
            (Scheme::BrandsChaum, AdversaryKind::PreAsk, Criterion::Accept),
            (Scheme::BrandsChaum, AdversaryKind::Replay, Criterion::Accept),
            (Scheme::BrandsChaum, AdversaryKind::BcGuess, Criterion::Accept),
            (Scheme::BrandsChaum, AdversaryKind::Random, Criterion::AuthStep),
        ];
        for (scheme, adv, criterion) in cases {
            let spec = ExperimentSpec {
                criterion,
                ..ExperimentSpec::new(p, scheme, adv).trials(20_000).seed(5)
            };
            let r = run_trials(&spec).unwrap();
            assert!(r.within(4.0), "{scheme:?} {adv:?} {criterion:?}: {r:?}");
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let p = tree(2, 2);
        assert!(run_trials(&ExperimentSpec::new(p, Scheme::Tree, AdversaryKind::PreAsk).trials(0)).is_err());
        assert!(run_trials(&ExperimentSpec::new(p, Scheme::Tree, AdversaryKind::HkPreAsk)).is_err());
        let bad = ExperimentSpec {
            channel: ChannelConfig {
                speed: 0.0,
                ..Default::default()
            },
            ..ExperimentSpec::new(p, Scheme::Tree, AdversaryKind::None)
        };
        assert!(run_trials(&bad).is_err());
    }
}
