//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::Command;
use std::time::Instant;

use num_rational::Ratio;
use treebound::adversary::{AdversaryKind, Probe};
use treebound::analysis;
use treebound::channel::ChannelConfig;
use treebound::execution::PartyRngs;
use treebound::expand::{Expander, TreeMode};
use treebound::montecarlo::{
    exact_enumeration, run_batches, run_trials, run_trials_with, Criterion, ExperimentSpec, Parallelism, TrialReport,
};
use treebound::protocol::Scheme;
use treebound::treegen::{build_tree_with, serialized_len};
use treebound::types::{Key, Nonce, NonceRole, ProtocolParams, RawParams};

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn params(n: u64, m: u64) -> ProtocolParams {
    ProtocolParams::new(n, m).expect("valid parameters")
}

/// `|estimate - predicted| <= 3` standard errors of the estimate.
fn within_3se(r: &TrialReport) -> bool {
    let p = r.predicted.expect("prediction");
    (r.estimate - p).abs() <= 3.0 * r.std_error
}

fn describe(r: &TrialReport) -> String {
    format!(
        "{}/{} n={} m={}: {}/{} = {:.6} (se {:.2e}) vs {:.6}",
        r.protocol,
        r.adversary,
        r.n,
        r.m,
        r.successes,
        r.trials,
        r.estimate,
        r.std_error,
        r.predicted.unwrap_or(f64::NAN)
    )
}

fn statistical(reports: Vec<TrialReport>) -> Outcome {
    let detail = reports.iter().map(describe).collect::<Vec<_>>().join("; ");
    if reports.iter().all(within_3se) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn completeness() -> Outcome {
    let mut lines = Vec::new();
    for mode in [TreeMode::Prf, TreeMode::IdealUniform] {
        for n in [1u64, 2, 4, 8, 11] {
            let spec = ExperimentSpec {
                mode,
                ..ExperimentSpec::new(params(n, n), Scheme::Tree, AdversaryKind::None)
                    .trials(10_000)
                    .seed(1)
            };
            let r = run_trials(&spec).map_err(|e| e.to_string())?;
            if r.successes != r.trials {
                return Err(format!("{mode:?} n={n}: {}/{}", r.successes, r.trials));
            }
            lines.push(format!("{mode:?} n={n}"));
        }
    }
    Ok(format!("10000/10000 accepted for {}", lines.join(", ")))
}

fn preask_formula() -> Outcome {
    let reports = [2u64, 4, 8]
        .into_iter()
        .map(|n| {
            let spec = ExperimentSpec::new(params(n, n), Scheme::Tree, AdversaryKind::PreAsk)
                .trials(1_000_000)
                .seed(2);
            run_trials(&spec).unwrap()
        })
        .collect();
    statistical(reports)
}

fn exact_oracle() -> Outcome {
    let ch = ChannelConfig::default();
    let n1 = exact_enumeration(Scheme::Tree, AdversaryKind::PreAsk, 1, &Probe::Zeros, ch).map_err(|e| e.to_string())?;
    let n2 = exact_enumeration(Scheme::Tree, AdversaryKind::PreAsk, 2, &Probe::Zeros, ch).map_err(|e| e.to_string())?;
    let detail = format!("n=1 -> {n1}, n=2 -> {n2}");
    let ok = n1 == Ratio::new(3, 4)
        && n2 == Ratio::new(1, 2)
        && n1 == analysis::preask_success_exact(1).unwrap()
        && n2 == analysis::preask_success_exact(2).unwrap();
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn no_prover() -> Outcome {
    let spec = ExperimentSpec::new(params(4, 4), Scheme::Tree, AdversaryKind::Random)
        .trials(10_000_000)
        .seed(4);
    statistical(vec![run_trials(&spec).unwrap()])
}

fn replay() -> Outcome {
    let p = params(4, 4);
    assert_eq!(p.l_a(), 8);
    let spec = ExperimentSpec {
        criterion: Criterion::ReplayHit,
        ..ExperimentSpec::new(p, Scheme::Tree, AdversaryKind::Replay)
            .trials(1_000_000)
            .seed(5)
    };
    statistical(vec![run_trials(&spec).unwrap()])
}

fn relay_cut() -> Outcome {
    let base = ExperimentSpec::new(params(4, 4), Scheme::Tree, AdversaryKind::Relay)
        .trials(100_000)
        .seed(6);
    let blocked = ExperimentSpec {
        channel: ChannelConfig {
            extra_distance: 1.0,
            epsilon: 0.0,
            ..Default::default()
        },
        ..base.clone()
    };
    let allowed = ExperimentSpec {
        channel: ChannelConfig {
            extra_distance: 1.0,
            epsilon: 2.5,
            ..Default::default()
        },
        ..base
    };
    let b = run_trials(&blocked).unwrap();
    let a = run_trials(&allowed).unwrap();
    let detail = format!(
        "eps=0: {}/{} accepted; eps=2.5 > 2*extra/c: {}/{} accepted",
        b.successes, b.trials, a.successes, a.trials
    );
    if b.successes == 0 && a.successes == a.trials {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn hancke_kuhn() -> Outcome {
    let spec = ExperimentSpec::new(params(4, 4), Scheme::HanckeKuhn, AdversaryKind::HkPreAsk)
        .trials(1_000_000)
        .seed(7);
    let r = run_trials(&spec).unwrap();
    let exact = exact_enumeration(Scheme::HanckeKuhn, AdversaryKind::HkPreAsk, 2, &Probe::Zeros, ChannelConfig::default())
        .map_err(|e| e.to_string())?;
    let stat = statistical(vec![r]);
    let detail = format!("{}; enumeration n=2 -> {exact}", stat.as_ref().unwrap_or_else(|e| e));
    if stat.is_ok() && exact == Ratio::new(9, 16) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn brands_chaum() -> Outcome {
    let reports = [(3u64, 5u64), (5, 3)]
        .into_iter()
        .map(|(m, n)| {
            let p = Scheme::BrandsChaum.validate(RawParams::with_defaults(n, m)).unwrap();
            let spec = ExperimentSpec::new(p, Scheme::BrandsChaum, AdversaryKind::BcGuess)
                .trials(1_000_000)
                .seed(8);
            let r = run_trials(&spec).unwrap();
            assert_eq!(r.predicted, Some(0.125));
            r
        })
        .collect();
    statistical(reports)
}

fn birthday() -> Outcome {
    let p = params(4, 4).with_executions(10).unwrap();
    let spec = ExperimentSpec::new(p, Scheme::Tree, AdversaryKind::None)
        .trials(100_000)
        .seed(9);
    let b = run_batches(&spec).map_err(|e| e.to_string())?;
    let three_se = 3.0 * b.collision_std_error;
    let detail = format!(
        "{}/{} batches with a nonce collision = {:.5} (se {:.2e}); exact {:.5}; bound {:.5}",
        b.collisions, spec.trials, b.collision_frequency, b.collision_std_error, b.collision_exact, b.collision_bound
    );
    let near_exact = (b.collision_frequency - b.collision_exact).abs() <= three_se;
    let below_bound = b.collision_frequency <= b.collision_bound + three_se;
    if near_exact && below_bound && (b.collision_bound - 90.0 / 512.0).abs() < 1e-15 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn memory() -> Outcome {
    let p = params(11, 11);
    let key = Key::random(&p, &mut PartyRngs::global(10, 0)).unwrap();
    let mut rngs = PartyRngs::derive(10, 0);
    let a = Nonce::random(&p, NonceRole::VerifierNonceA, &mut rngs.verifier);
    let b = Nonce::random(&p, NonceRole::ProverNonceB, &mut rngs.prover);
    let tree = build_tree_with(&p, &key, &a, &b, &mut Expander::Prf).map_err(|e| e.to_string())?;
    let bits = tree.nodes().len();
    let bytes = tree.serialize().len();
    let detail = format!("n=11 tree: {bits} bits, {bytes} bytes serialized");
    if bits == 8190 && bytes == 1024 && serialized_len(11) == 1024 && p.l_k() == 8190 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn probe_invariance() -> Outcome {
    let reports: Vec<TrialReport> = [Probe::Zeros, Probe::Ones, Probe::Random]
        .into_iter()
        .map(|probe| {
            let spec = ExperimentSpec {
                probe,
                ..ExperimentSpec::new(params(4, 4), Scheme::Tree, AdversaryKind::PreAsk)
                    .trials(1_000_000)
                    .seed(11)
            };
            run_trials(&spec).unwrap()
        })
        .collect();
    let mut ok = true;
    for i in 0..reports.len() {
        for j in i + 1..reports.len() {
            let (x, y) = (&reports[i], &reports[j]);
            let se = (x.std_error.powi(2) + y.std_error.powi(2)).sqrt();
            ok &= (x.estimate - y.estimate).abs() <= 3.0 * se;
        }
    }
    let detail = format!(
        "zeros {:.6}, ones {:.6}, random {:.6}",
        reports[0].estimate, reports[1].estimate, reports[2].estimate
    );
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn reproducibility() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_treebound");
    let args = [
        "simulate", "--protocol", "tree", "--adversary", "preask", "--n", "4", "--m", "4", "--trials", "200000",
        "--seed", "42", "--format", "json",
    ];
    let run = |extra: &[&str]| {
        let out = Command::new(bin).args(args).args(extra).output().expect("run treebound");
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let first = run(&[]);
    let second = run(&[]);
    let sequential = run(&["--sequential"]);
    let spec = ExperimentSpec::new(params(3, 3), Scheme::HanckeKuhn, AdversaryKind::Replay)
        .trials(50_000)
        .seed(12);
    let lib_par = run_trials_with(&spec, Parallelism::Parallel).unwrap();
    let lib_seq = run_trials_with(&spec, Parallelism::Sequential).unwrap();
    let detail = format!("cli output {} bytes", first.len());
    if first == second && first == sequential && lib_par == lib_seq {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let criteria: [(&str, Check); 12] = [
        ("completeness", completeness),
        ("pre-ask formula", preask_formula),
        ("exact oracle", exact_oracle),
        ("no-prover attack", no_prover),
        ("replay without relay", replay),
        ("relay rejection", relay_cut),
        ("Hancke-Kuhn baseline", hancke_kuhn),
        ("Brands-Chaum baseline", brands_chaum),
        ("birthday statistics", birthday),
        ("memory", memory),
        ("probe invariance", probe_invariance),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {:>2} {name} [{secs:.1}s]: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} [{secs:.1}s]: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
