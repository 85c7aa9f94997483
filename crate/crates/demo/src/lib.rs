//! Browser bindings: generate an instance, pack it, verify a packing.
//! Every function takes and returns JSON text.

use gpack_core::generate::{generate_instance, InstanceKind};
use gpack_core::graph::{verify_packing, GraphSequence, PackingMap};
use gpack_core::pipeline::{run_pipeline, RunConfig};
use gpack_core::rational::parse_rational;
use serde_json::json;
use wasm_bindgen::prelude::*;

pub fn generate_json(
    kind: &str,
    n: usize,
    delta: usize,
    seed: u64,
    fill: f64,
) -> Result<String, String> {
    let kind = InstanceKind::parse(kind).ok_or_else(|| format!("unknown instance kind {kind}"))?;
    let seq = generate_instance(kind, n, delta, seed, fill).map_err(|e| e.to_string())?;
    serde_json::to_string(&seq).map_err(|e| e.to_string())
}

/// Runs the pipeline; the reply carries the verdict, the plan, the waste and
/// balance summaries and the packing map.
pub fn pack_json(sequence: &str, epsilon: &str, seed: u64) -> Result<String, String> {
    let seq: GraphSequence =
        serde_json::from_str(sequence).map_err(|e| format!("sequence: {e}"))?;
    let epsilon =
        parse_rational(epsilon).ok_or_else(|| format!("epsilon: not a rational: {epsilon}"))?;
    let cfg = RunConfig {
        epsilon,
        seed,
        ..Default::default()
    };
    let r = run_pipeline(&cfg, &seq).map_err(|e| format!("[{}] {e}", e.stage()))?;
    let value = json!({
        "verified": r.verified,
        "N": r.host_order,
        "n": seq.n,
        "plan": r.plan,
        "types": r.types,
        "separator_total": r.separator_total,
        "edges": seq.total_edges(),
        "certificate": r.certificate,
        "issues": r.verify.issues,
        "packing": r.packing,
    });
    Ok(value.to_string())
}

pub fn verify_json(sequence: &str, packing: &str) -> Result<String, String> {
    let seq: GraphSequence =
        serde_json::from_str(sequence).map_err(|e| format!("sequence: {e}"))?;
    let pm: PackingMap = serde_json::from_str(packing).map_err(|e| format!("packing: {e}"))?;
    let report = verify_packing(&seq, &pm, pm.host_order);
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn generate(
    kind: &str,
    n: usize,
    delta: usize,
    seed: u64,
    fill: f64,
) -> Result<String, JsValue> {
    generate_json(kind, n, delta, seed, fill).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn pack(sequence: &str, epsilon: &str, seed: u64) -> Result<String, JsValue> {
    pack_json(sequence, epsilon, seed).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn verify(sequence: &str, packing: &str) -> Result<String, JsValue> {
    verify_json(sequence, packing).map_err(|e| JsValue::from_str(&e))
}
