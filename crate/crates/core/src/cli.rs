//! Command-line front end: `simulate`, `analyze` and `trace`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::adversary::{AdversaryKind, Probe};
use crate::analysis::comparison_table;
use crate::channel::ChannelConfig;
use crate::error::Error;
use crate::execution::{execute, Claimant, PartyRngs, Setup};
use crate::expand::{Expander, TreeMode};
use crate::montecarlo::{run_batches_with, run_trials_with, Criterion, ExperimentSpec, Parallelism, TrialReport};
use crate::protocol::{FairCoin, Scheme};
use crate::transcript::Reason;
use crate::treegen::{build_tree_with, DecisionTree};
use crate::types::{Key, ProtocolParams, RawParams};

/// Directory that relative `--out`, `--tree-out` and `--tree-in` paths resolve against.
pub const OUT_DIR_ENV: &str = "TREEBOUND_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "treebound", version, about = "Distance-bounding protocol simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo estimate of an adversary's success probability.
    Simulate(SimulateArgs),
    /// Closed-form comparison table over a range of n.
    Analyze(AnalyzeArgs),
    /// One execution with its full message sequence.
    Trace(TraceArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Ideal,
    Prf,
}

impl From<Mode> for TreeMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Ideal => TreeMode::IdealUniform,
            Mode::Prf => TreeMode::Prf,
        }
    }
}

#[derive(Args, Debug)]
struct ParamArgs {
    /// Fast-phase rounds.
    #[arg(long, default_value_t = 4)]
    n: u64,
    /// Authentication bits [default: n].
    #[arg(long)]
    m: Option<u64>,
    /// Verifier nonce length [default: m + n].
    #[arg(long = "l-a")]
    l_a: Option<u64>,
    /// Prover nonce length [default: n].
    #[arg(long = "l-b")]
    l_b: Option<u64>,
    /// Executions per batch; above 1 the adversary wins if accepted once.
    #[arg(short = 'N', long, default_value_t = 1)]
    executions: u64,
}

impl ParamArgs {
    fn build(&self, scheme: Scheme) -> Result<ProtocolParams, Error> {
        let m = self.m.unwrap_or(self.n);
        let raw = RawParams {
            n: self.n,
            m,
            l_a: self.l_a.unwrap_or(m.saturating_add(self.n)),
            l_b: self.l_b.unwrap_or(self.n),
            executions: self.executions,
        };
        Ok(scheme.validate(raw)?)
    }
}

#[derive(Args, Debug)]
struct ChannelArgs {
    #[arg(long, default_value_t = 1.0)]
    distance: f64,
    /// Extra one-way distance a relay must cover.
    #[arg(long = "extra-distance", default_value_t = 0.0)]
    extra_distance: f64,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long = "proc-delay", default_value_t = 0.0)]
    proc_delay: f64,
    #[arg(long, default_value_t = 1.0)]
    speed: f64,
    /// Upper bound of uniform round-trip noise.
    #[arg(long, default_value_t = 0.0)]
    jitter: f64,
}

impl ChannelArgs {
    fn build(&self) -> ChannelConfig {
        ChannelConfig {
            distance: self.distance,
            extra_distance: self.extra_distance,
            speed: self.speed,
            processing_delay: self.proc_delay,
            epsilon: self.epsilon,
            jitter: self.jitter,
        }
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, default_value = "tree")]
    protocol: Scheme,
    #[arg(long, default_value = "none")]
    adversary: AdversaryKind,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, value_enum, default_value_t = Mode::Ideal)]
    mode: Mode,
    #[command(flatten)]
    channel: ChannelArgs,
    /// Challenges a pre-asking adversary sends ahead: zeros, ones, random or a bit string.
    #[arg(long, default_value = "zeros")]
    probe: Probe,
    /// accept, auth-step or replay-hit.
    #[arg(long, default_value = "accept")]
    criterion: Criterion,
    /// Exit nonzero when |z| exceeds this value or no prediction exists.
    #[arg(long = "fail-z")]
    fail_z: Option<f64>,
    /// Run trials on one thread.
    #[arg(long)]
    sequential: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// A single value or an inclusive range `a..b`.
    #[arg(long, value_parser = parse_range)]
    n: (u64, u64),
    /// A fixed value or `eq-n`.
    #[arg(long, default_value = "eq-n")]
    m: MChoice,
    #[arg(short = 'N', long, default_value_t = 1)]
    executions: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug)]
enum MChoice {
    EqN,
    Fixed(u64),
}

impl std::str::FromStr for MChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "eq-n" {
            return Ok(MChoice::EqN);
        }
        s.parse().map(MChoice::Fixed).map_err(|_| format!("expected a number or eq-n, got {s:?}"))
    }
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let num = |v: &str| v.trim().parse::<u64>().map_err(|_| format!("bad number {v:?}"));
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (num(lo)?, num(hi.trim_start_matches('='))?),
        None => {
            let v = num(s)?;
            (v, v)
        }
    };
    if lo == 0 {
        return Err("n must be at least 1".into());
    }
    if hi < lo {
        return Err(format!("empty range {s:?}"));
    }
    Ok((lo, hi))
}

#[derive(Args, Debug)]
struct TraceArgs {
    #[arg(long, default_value = "tree")]
    protocol: Scheme,
    #[arg(long, default_value = "none")]
    adversary: AdversaryKind,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Prf)]
    mode: Mode,
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long, default_value = "zeros")]
    probe: Probe,
    /// Save the serialized decision tree.
    #[arg(long = "tree-out")]
    tree_out: Option<PathBuf>,
    /// Run with this serialized tree instead of deriving one.
    #[arg(long = "tree-in")]
    tree_in: Option<PathBuf>,
}

fn resolve(path: &PathBuf) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
        _ => path.clone(),
    }
}

/// Runs the command line `args` (including the program name), writing
/// reports to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render();
            let _ = if e.use_stderr() {
                write!(err, "{rendered}")
            } else {
                write!(out, "{rendered}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a, out, err),
        Command::Analyze(a) => analyze(a, out),
        Command::Trace(a) => trace(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

#[derive(Debug)]
enum CliError {
    Lib(Error),
    Io(std::io::Error),
    Csv(csv::Error),
    Usage(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Csv(e) => write!(f, "{e}"),
            CliError::Usage(e) => f.write_str(e),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Csv(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}

/// Report row; batch columns appear only for batch runs.
#[derive(Serialize)]
struct SimulateRow {
    protocol: &'static str,
    adversary: &'static str,
    n: usize,
    m: usize,
    trials: u64,
    successes: u64,
    estimate: f64,
    std_error: f64,
    predicted: Option<f64>,
    z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    executions: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    collisions: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    collision_frequency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    collision_exact: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    collision_bound: Option<f64>,
}

impl From<&TrialReport> for SimulateRow {
    fn from(r: &TrialReport) -> Self {
        SimulateRow {
            protocol: r.protocol,
            adversary: r.adversary,
            n: r.n,
            m: r.m,
            trials: r.trials,
            successes: r.successes,
            estimate: r.estimate,
            std_error: r.std_error,
            predicted: r.predicted,
            z: r.z,
            executions: None,
            collisions: None,
            collision_frequency: None,
            collision_exact: None,
            collision_bound: None,
        }
    }
}

fn write_rows<T: Serialize>(rows: &[T], format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    match format {
        Format::Json => {
            for row in rows {
                serde_json::to_writer(&mut *out, row)?;
                writeln!(out)?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        Format::Text => {
            // Reuse the CSV column order: one "key value" line per column.
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in rows {
                w.serialize(row)?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
            let mut r = csv::Reader::from_reader(bytes.as_slice());
            let headers = r.headers()?.clone();
            for (i, record) in r.records().enumerate() {
                if i > 0 {
                    writeln!(out)?;
                }
                for (key, value) in headers.iter().zip(record?.iter()) {
                    writeln!(out, "{key:<20} {}", if value.is_empty() { "-" } else { value })?;
                }
            }
        }
    }
    Ok(())
}

fn with_output(
    path: &Option<PathBuf>,
    out: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let mut buf = Vec::new();
            f(&mut buf)?;
            fs::write(resolve(p), buf)?;
            Ok(())
        }
        None => f(out),
    }
}

fn simulate(a: SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let params = a.params.build(a.protocol)?;
    let spec = ExperimentSpec {
        params,
        protocol: a.protocol,
        adversary: a.adversary,
        probe: a.probe,
        trials: a.trials,
        seed: a.seed,
        channel: a.channel.build(),
        mode: a.mode.into(),
        criterion: a.criterion,
        prover_budget: 1,
    };
    let par = if a.sequential {
        Parallelism::Sequential
    } else {
        Parallelism::Parallel
    };
    if params.key_leakage_warning() {
        writeln!(err, "warning: m + n is large relative to the key length")?;
    }
    let row = if params.executions() > 1 {
        let b = run_batches_with(&spec, par)?;
        SimulateRow {
            executions: Some(b.executions),
            collisions: Some(b.collisions),
            collision_frequency: Some(b.collision_frequency),
            collision_exact: Some(b.collision_exact),
            collision_bound: Some(b.collision_bound),
            ..SimulateRow::from(&b.report)
        }
    } else {
        SimulateRow::from(&run_trials_with(&spec, par)?)
    };
    with_output(&a.out, out, |w| write_rows(&[&row], a.format, w))?;
    if let Some(limit) = a.fail_z {
        match row.z {
            Some(z) if z.abs() <= limit => {}
            Some(z) => {
                writeln!(err, "z = {z} exceeds {limit}")?;
                return Ok(3);
            }
            None => {
                writeln!(err, "no closed-form prediction to compare against")?;
                return Ok(3);
            }
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct AnalyzeRow {
    n: usize,
    m: usize,
    executions: u64,
    tree_bits: u64,
    tree_relay: f64,
    tree_no_relay: f64,
    tree_union: f64,
    hk_relay: f64,
    hk_no_relay: f64,
    hk_union: f64,
    bc_relay: f64,
    bc_no_relay: f64,
    bc_union: f64,
    optimal_relay: f64,
    optimal_no_relay: f64,
    optimal_union: f64,
}

fn analyze(a: AnalyzeArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (lo, hi) = a.n;
    let mut rows = Vec::new();
    for n in lo..=hi {
        let m = match a.m {
            MChoice::EqN => n,
            MChoice::Fixed(m) => m,
        };
        let params = crate::types::validate_params(RawParams {
            executions: a.executions,
            ..RawParams::with_defaults(n, m)
        }).map_err(Error::from)?;
        let t = comparison_table(&params);
        let r = |name: &str| t.row(name).expect("fixed row set").clone();
        let (tree, hk, bc, opt) = (r("tree"), r("hk"), r("bc"), r("optimal-bound"));
        rows.push(AnalyzeRow {
            n: t.n,
            m: t.m,
            executions: t.executions,
            tree_bits: params.l_k(),
            tree_relay: tree.relay,
            tree_no_relay: tree.no_relay,
            tree_union: tree.union_bound,
            hk_relay: hk.relay,
            hk_no_relay: hk.no_relay,
            hk_union: hk.union_bound,
            bc_relay: bc.relay,
            bc_no_relay: bc.no_relay,
            bc_union: bc.union_bound,
            optimal_relay: opt.relay,
            optimal_no_relay: opt.no_relay,
            optimal_union: opt.union_bound,
        });
    }
    with_output(&a.out, out, |w| {
        if a.format == Format::Text {
            write_table(&rows, w)
        } else {
            write_rows(&rows, a.format, w)
        }
    })?;
    Ok(0)
}

fn write_table(rows: &[AnalyzeRow], out: &mut dyn Write) -> Result<(), CliError> {
    writeln!(
        out,
        "{:>3} {:>4} {:>6} {:>12} | {:>12} {:>12} | {:>12} | {:>12} | {:>12} {:>12}",
        "n", "m", "N", "tree_bits", "tree_relay", "tree_norelay", "hk_relay", "bc_relay", "opt_relay", "opt_norelay"
    )?;
    for r in rows {
        writeln!(
            out,
            "{:>3} {:>4} {:>6} {:>12} | {:>12.6e} {:>12.6e} | {:>12.6e} | {:>12.6e} | {:>12.6e} {:>12.6e}",
            r.n,
            r.m,
            r.executions,
            r.tree_bits,
            r.tree_relay,
            r.tree_no_relay,
            r.hk_relay,
            r.bc_relay,
            r.optimal_relay,
            r.optimal_no_relay
        )?;
    }
    Ok(())
}

fn reason_text(reason: Reason) -> String {
    match reason {
        Reason::Ok => "all checks passed".into(),
        Reason::BadAuth => "authentication bits mismatch".into(),
        Reason::BadReply(i) => format!("wrong reply in round {i}"),
        Reason::Timeout(i) => format!("round {i} too slow"),
        Reason::Incomplete => "protocol did not finish".into(),
    }
}

fn trace(a: TraceArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let params = a.params.build(a.protocol)?;
    let channel = a.channel.build();
    let mut setup = Setup::new(params, a.protocol, channel);
    setup.record_messages = true;
    let key = Key::random(&params, &mut PartyRngs::global(a.seed, 0))?;
    let mut rngs = PartyRngs::derive(a.seed, 0);
    let mut expander = match (&a.tree_in, TreeMode::from(a.mode)) {
        (Some(path), _) => {
            if a.protocol != Scheme::Tree {
                return Err(CliError::Usage("--tree-in needs --protocol tree".into()));
            }
            let bytes = fs::read(resolve(path))?;
            let tree = DecisionTree::deserialize(&bytes, params.n())?;
            Expander::Fixed(tree.nodes().clone())
        }
        (None, TreeMode::Prf) => Expander::Prf,
        (None, TreeMode::IdealUniform) => Expander::ideal(rngs.oracle.clone()),
    };
    let mut strategy = a.adversary.build(&params, a.protocol, &a.probe)?;
    let claimant = match strategy.as_deref_mut() {
        Some(s) => Claimant::Adversary(s),
        None => Claimant::Legitimate,
    };
    let outcome = execute(&setup, &key, &key, claimant, &mut expander, &mut FairCoin, &mut rngs)?;

    for msg in &outcome.messages {
        serde_json::to_writer(&mut *out, msg)?;
        writeln!(out)?;
    }
    let t = &outcome.transcript;
    writeln!(out, "nonce_a: {} ({} bits)", t.nonce_a.bits(), t.nonce_a.bits().len())?;
    if let Some(b) = &t.nonce_b {
        writeln!(out, "nonce_b: {} ({} bits)", b.bits(), b.bits().len())?;
    }
    if a.protocol == Scheme::Tree {
        if let Some(b) = &t.nonce_b {
            let tree = build_tree_with(&params, &key, &t.nonce_a, b, &mut expander)?;
            let bytes = tree.serialize();
            let hex: String = bytes.iter().map(|x| format!("{x:02x}")).collect();
            writeln!(out, "tree: {hex} ({} bits, {} bytes)", tree.nodes().len(), bytes.len())?;
            if let Some(path) = &a.tree_out {
                fs::write(resolve(path), &bytes)?;
            }
        }
    }
    let threshold = channel.threshold();
    for r in &t.rounds {
        let reply = r.reply.map_or("-".to_string(), |b| u8::from(b).to_string());
        writeln!(
            out,
            "round {}: challenge {} reply {} rtt {} threshold {} {}{}",
            r.round,
            u8::from(r.challenge),
            reply,
            r.rtt,
            threshold,
            if r.on_time { "on-time" } else { "late" },
            if r.correct { "" } else { " wrong" },
        )?;
    }
    if let Some(report) = &outcome.report {
        writeln!(out, "adversary: {}", report.strategy)?;
        if let Some(probe) = &report.probe {
            writeln!(out, "probe: {probe}")?;
            match report.first_divergence {
                Some(i) => writeln!(out, "first divergence: round {i}")?,
                None => writeln!(out, "first divergence: none")?,
            }
        }
    }
    writeln!(out, "reason: {}", reason_text(outcome.verdict.reason))?;
    writeln!(out, "verdict: {}", outcome.verdict.kind())?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("treebound").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn range_parsing() {
        assert_eq!(parse_range("1..12"), Ok((1, 12)));
        assert_eq!(parse_range("3..=5"), Ok((3, 5)));
        assert_eq!(parse_range("7"), Ok((7, 7)));
        assert!(parse_range("0").is_err());
        assert!(parse_range("5..2").is_err());
    }

    #[test]
    fn analyze_zero_is_an_error() {
        let (code, _, err) = run_str(&["analyze", "--n", "0"]);
        assert_ne!(code, 0);
        assert!(err.contains("at least 1"));
    }

    #[test]
    fn relay_estimate_zero() {
        let (code, out, _) = run_str(&[
            "simulate", "--protocol", "tree", "--adversary", "relay", "--extra-distance", "1",
            "--trials", "1000", "--format", "json",
        ]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
        assert_eq!(v["estimate"], 0.0);
        assert_eq!(v["predicted"], 0.0);
    }

    #[test]
    fn csv_header_is_fixed() {
        let (_, out, _) = run_str(&["simulate", "--trials", "10", "--format", "csv"]);
        assert_eq!(out.lines().next().unwrap(), TrialReport::COLUMNS.join(","));
    }

    #[test]
    fn incompatible_adversary_fails() {
        let (code, _, err) = run_str(&["simulate", "--adversary", "hk-preask"]);
        assert_eq!(code, 1);
        assert!(err.contains("does not apply"));
    }

    #[test]
    fn bad_flag_is_usage_error() {
        let (code, _, _) = run_str(&["simulate", "--format", "xml"]);
        assert_eq!(code, 2);
    }
}
