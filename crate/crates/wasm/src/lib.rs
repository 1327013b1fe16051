//! Browser bindings. Every export returns a JSON string.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use treebound::adversary::AdversaryKind;
use treebound::analysis::comparison_table;
use treebound::bits::BitString;
use treebound::execution::PartyRngs;
use treebound::expand::Expander;
use treebound::montecarlo::{run_trials_with, ExperimentSpec, Parallelism};
use treebound::protocol::Scheme;
use treebound::treegen::build_tree_with;
use treebound::types::{Key, Nonce, NonceRole, ProtocolParams, RawParams};

/// Largest tree the page will draw.
const MAX_VIEW_ROUNDS: u64 = 6;
/// Keeps a single call responsive on the main thread.
const MAX_TRIALS: u64 = 2_000_000;

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, JsValue> {
    serde_json::to_string(value).map_err(js_err)
}

#[derive(Serialize)]
struct TreeView {
    n: usize,
    m: usize,
    key_bits: u64,
    a: String,
    b: String,
    /// Node bits per level, level 1 first.
    levels: Vec<String>,
    auth: String,
    challenges: String,
    /// Position of the visited node on each level.
    path: Vec<usize>,
    replies: String,
}

/// Derives the tree for a seeded key and nonces and follows `challenges`
/// (a string of up to `n` bits) through it.
#[wasm_bindgen]
pub fn tree_view(n: u32, m: u32, seed: u64, challenges: &str) -> Result<String, JsValue> {
    if u64::from(n) > MAX_VIEW_ROUNDS {
        return Err(js_err(format!("the viewer draws trees up to n = {MAX_VIEW_ROUNDS}")));
    }
    let params = ProtocolParams::new(n.into(), m.into()).map_err(js_err)?;
    let q: BitString = challenges.parse().map_err(js_err)?;
    if q.len() > params.n() {
        return Err(js_err(format!("at most {n} challenges")));
    }
    let key = Key::random(&params, &mut PartyRngs::global(seed, 0)).map_err(js_err)?;
    let mut rngs = PartyRngs::derive(seed, 0);
    let a = Nonce::random(&params, NonceRole::VerifierNonceA, &mut rngs.verifier);
    let b = Nonce::random(&params, NonceRole::ProverNonceB, &mut rngs.prover);
    let tree = build_tree_with(&params, &key, &a, &b, &mut Expander::Prf).map_err(js_err)?;
    let bools = q.to_bools();
    let replies = if bools.is_empty() {
        Vec::new()
    } else {
        tree.reply_path(&bools).map_err(js_err)?
    };
    let path = (1..=bools.len())
        .map(|i| BitString::from_bools(&bools[..i]).to_u64().unwrap_or(0) as usize)
        .collect();
    to_json(&TreeView {
        n: params.n(),
        m: params.m(),
        key_bits: params.l_k(),
        a: a.bits().to_string(),
        b: b.bits().to_string(),
        levels: (1..=tree.depth()).map(|i| tree.level(i).to_string()).collect(),
        auth: tree.auth_string(params.m()).map_err(js_err)?.to_string(),
        challenges: q.to_string(),
        path,
        replies: BitString::from_bools(&replies).to_string(),
    })
}

#[derive(Serialize)]
struct CurvePoint {
    n: usize,
    tree_bits: u64,
    tree: f64,
    hk: f64,
    bc: f64,
    optimal: f64,
    tree_no_relay: f64,
}

/// Per-execution relay-attack success for n = 1..=max_n, with m = n.
#[wasm_bindgen]
pub fn analysis_curves(max_n: u32) -> Result<String, JsValue> {
    if max_n == 0 || max_n > 60 {
        return Err(js_err("max n must be between 1 and 60"));
    }
    let mut points = Vec::new();
    for n in 1..=u64::from(max_n) {
        let params = ProtocolParams::new(n, n).map_err(js_err)?;
        let t = comparison_table(&params);
        let relay = |name: &str| t.row(name).map_or(f64::NAN, |r| r.relay);
        points.push(CurvePoint {
            n: params.n(),
            tree_bits: params.l_k(),
            tree: relay("tree"),
            hk: relay("hk"),
            bc: relay("bc"),
            optimal: relay("optimal-bound"),
            tree_no_relay: t.row("tree").map_or(f64::NAN, |r| r.no_relay),
        });
    }
    to_json(&points)
}

/// Monte Carlo run with the default channel and the idealized tree function.
#[wasm_bindgen]
pub fn simulate(protocol: &str, adversary: &str, n: u32, m: u32, trials: u32, seed: u64) -> Result<String, JsValue> {
    let scheme: Scheme = protocol.parse().map_err(js_err)?;
    let kind: AdversaryKind = adversary.parse().map_err(js_err)?;
    if u64::from(trials) > MAX_TRIALS {
        return Err(js_err(format!("at most {MAX_TRIALS} trials in the browser")));
    }
    let params = scheme
        .validate(RawParams::with_defaults(n.into(), m.into()))
        .map_err(js_err)?;
    let spec = ExperimentSpec::new(params, scheme, kind)
        .trials(trials.into())
        .seed(seed);
    let report = run_trials_with(&spec, Parallelism::Sequential).map_err(js_err)?;
    to_json(&report)
}
