//! Browser bindings. Every export takes and returns JSON text so the page
//! needs no generated type glue.

use matround::instance::Instance;
use matround::polytope::{decompose_base, decompose_point, Mode};
use matround::stats::{chernoff_lower, chernoff_upper, Harness, Method, Sampler};
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Bundled instances offered by the page, as `(name, json)`.
pub const PRESETS: [(&str, &str); 5] = [
    ("K3 spanning trees", include_str!("../../core/fixtures/k3.json")),
    ("graphic, 8 edges", include_str!("../../core/fixtures/graphic_8.json")),
    (
        "partition, 3 blocks",
        include_str!("../../core/fixtures/partition_3block.json"),
    ),
    ("uniform(5, 10)", include_str!("../../core/fixtures/uniform_5_10.json")),
    ("uniform(2, 4)", include_str!("../../core/fixtures/uniform_2_4.json")),
];

/// Trials are capped so a click never freezes the tab.
pub const MAX_TRIALS: usize = 200_000;

fn parse(instance: &str) -> Result<Instance, String> {
    Instance::from_json(instance).map_err(|e| e.to_string())
}

fn method(name: &str) -> Result<Method, String> {
    Method::parse(name).ok_or_else(|| {
        let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
        format!("unknown method {name:?}; expected one of {}", names.join(", "))
    })
}

fn trials(n: u32) -> Result<usize, String> {
    match n as usize {
        0 => Err("at least one trial is required".into()),
        t if t > MAX_TRIALS => Err(format!("at most {MAX_TRIALS} trials")),
        t => Ok(t),
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("values serialize")
}

pub fn presets_json() -> String {
    let list: Vec<_> = PRESETS
        .iter()
        .map(|(name, text)| json!({"name": name, "instance": text}))
        .collect();
    to_json(&list)
}

/// Ground labels, else `u-v` for graph edges, else the element index.
fn labels(inst: &Instance) -> Vec<String> {
    if let Some(l) = &inst.matroid.ground().labels {
        return l.clone();
    }
    if let Some((_, edges)) = inst.matroid.graph() {
        return edges.iter().map(|(u, v)| format!("{u}-{v}")).collect();
    }
    (0..inst.n()).map(|i| i.to_string()).collect()
}

/// Empirical inclusion frequencies against the point, plus the first few sampled sets.
pub fn round_marginals_json(instance: &str, method_name: &str, n: u32, seed: u32) -> Result<String, String> {
    let inst = parse(instance)?;
    let x = inst.point.clone().ok_or("the instance has no point")?;
    let method = method(method_name)?;
    let combination = inst.file.combination.as_ref();
    let sampler = Sampler::new(method, &inst.matroid, &x, combination).map_err(|e| e.to_string())?;
    let harness = Harness::new(trials(n)?, seed as u64);
    let samples = harness.samples(&sampler).map_err(|e| e.to_string())?;
    let report = matround::stats::marginals_from_samples(&sampler, &harness, &samples);
    let shown: Vec<Vec<usize>> = samples.iter().take(8).map(|s| s.to_vec()).collect();
    Ok(to_json(&json!({
        "method": method.name(),
        "trials": report.trials,
        "x": x,
        "estimate": report.elements.iter().map(|e| e.estimate).collect::<Vec<_>>(),
        "stderr": report.elements.iter().map(|e| e.stderr).collect::<Vec<_>>(),
        "pass": report.elements.iter().map(|e| e.pass).collect::<Vec<_>>(),
        "structural_violations": report.structural_violations,
        "passed": report.passed,
        "samples": shown,
        "labels": labels(&inst),
    })))
}

/// Tail probabilities of `X = Σ a_i X_i` on a grid of `δ`, with the Chernoff curves.
pub fn tail_curve_json(instance: &str, method_name: &str, n: u32, seed: u32) -> Result<String, String> {
    let inst = parse(instance)?;
    let x = inst.point.clone().ok_or("the instance has no point")?;
    let a = inst.file.weights.clone().unwrap_or_else(|| vec![1.0; x.len()]);
    let method = method(method_name)?;
    let sampler = Sampler::new(method, &inst.matroid, &x, inst.file.combination.as_ref()).map_err(|e| e.to_string())?;
    let harness = Harness::new(trials(n)?, seed as u64);
    let values: Vec<f64> = harness
        .samples(&sampler)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|s| s.weight(&a))
        .collect();
    let mu: f64 = a.iter().zip(&x).map(|(w, v)| w * v).sum();
    let count = values.len() as f64;
    let deltas: Vec<f64> = (0..=20).map(|k| k as f64 * 0.05).collect();
    let upper: Vec<f64> = deltas
        .iter()
        .map(|d| values.iter().filter(|&&v| v >= (1.0 + d) * mu - 1e-9).count() as f64 / count)
        .collect();
    let lower: Vec<f64> = deltas
        .iter()
        .map(|d| values.iter().filter(|&&v| v <= (1.0 - d) * mu + 1e-9).count() as f64 / count)
        .collect();
    Ok(to_json(&json!({
        "method": method.name(),
        "trials": values.len(),
        "mu": mu,
        "deltas": deltas,
        "upper": upper,
        "lower": lower,
        "upper_bound": deltas.iter().map(|&d| chernoff_upper(mu, d).min(1.0)).collect::<Vec<_>>(),
        "lower_bound": deltas.iter().map(|&d| chernoff_lower(mu, d).min(1.0)).collect::<Vec<_>>(),
    })))
}

/// The point as a convex combination of bases (`base`) or independent sets (`matroid`).
pub fn decompose_json(instance: &str, mode: &str) -> Result<String, String> {
    let inst = parse(instance)?;
    let x = inst.point.clone().ok_or("the instance has no point")?;
    let mode = match mode {
        "base" | "b" => Mode::B,
        "matroid" | "p" => Mode::P,
        other => return Err(format!("unknown mode {other:?}; expected base or matroid")),
    };
    let c = match mode {
        Mode::B => decompose_base(&inst.matroid, &x),
        Mode::P => decompose_point(&inst.matroid, &x),
    }
    .map_err(|e| e.to_string())?;
    let r = c.recompose(x.len());
    let err = r.iter().zip(&x).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    Ok(to_json(&json!({
        "mode": mode.name(),
        "terms": c.terms.iter().map(|t| json!({"weight": t.weight, "set": t.set.to_vec()})).collect::<Vec<_>>(),
        "max_error": err,
    })))
}

#[wasm_bindgen]
pub fn presets() -> String {
    presets_json()
}

#[wasm_bindgen]
pub fn round_marginals(instance: &str, method: &str, trials: u32, seed: u32) -> Result<String, JsValue> {
    round_marginals_json(instance, method, trials, seed).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn tail_curve(instance: &str, method: &str, trials: u32, seed: u32) -> Result<String, JsValue> {
    tail_curve_json(instance, method, trials, seed).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn decompose(instance: &str, mode: &str) -> Result<String, JsValue> {
    decompose_json(instance, mode).map_err(|e| JsValue::from_str(&e))
}
