//! Browser bindings. Every exported function returns a JSON string; failures
//! come back as `{"error": "..."}` so the page never has to catch exceptions.

use coded_matmul::encoder::{Family, PlanSpec};
use coded_matmul::stability::{best_of_trials, kappa_worst, KappaMode, KappaOptions};
use coded_matmul::subsets::binomial;
use coded_matmul::weights::{baseline_weight_cyclic, min_weight, split_weight_mm, weight_regime, WeightRegime};
use serde::Serialize;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest exhaustive search the page will run; bigger systems are sampled.
pub const BROWSER_EXHAUSTIVE_CAP: u128 = 20_000;
pub const MAX_TRIALS: u32 = 20;

fn respond(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

fn err<E: ToString>(e: E) -> String {
    e.to_string()
}

/// Weights for `n` workers and `s` stragglers. `k_b = 0` means matrix-vector
/// with `k = n − s`; otherwise `k_a·k_b` must equal `n − s`.
pub fn weights_json(n: usize, s: usize, k_a: usize, k_b: usize) -> Result<Value, String> {
    let k = n.checked_sub(s).filter(|&k| k > 0).ok_or("need s < n")?;
    let bound = min_weight(n, s).map_err(err)?;
    let regime = match weight_regime(k, s).map_err(err)? {
        WeightRegime::Exact { .. } => "exact: k > s², the bound is s + 1".to_string(),
        WeightRegime::Interval { lo, hi, .. } => format!("interval: s ≤ k ≤ s², the bound lies in [{lo}, {hi}]"),
    };
    let (proposed, cyclic) = if k_b == 0 {
        ((bound, 1), baseline_weight_cyclic(k, 1, s).map_err(err)?)
    } else {
        if k_a * k_b != k {
            return Err(format!("k_a·k_b = {} but n − s = {k}", k_a * k_b));
        }
        (split_weight_mm(k_a, k_b, bound).map_err(err)?, baseline_weight_cyclic(k_a, k_b, s).map_err(err)?)
    };
    let (p, c) = (proposed.0 * proposed.1, cyclic.0 * cyclic.1);
    Ok(json!({
        "n": n, "s": s, "k": k,
        "lower_bound": bound,
        "regime": regime,
        "proposed": [proposed.0, proposed.1],
        "cyclic": [cyclic.0, cyclic.1],
        "proposed_weight": p,
        "cyclic_weight": c,
        "flop_ratio": p as f64 / c as f64,
    }))
}

#[derive(Serialize)]
struct Layout {
    scheme: &'static str,
    omega_a: usize,
    omega_b: usize,
    a: Vec<Vec<usize>>,
    b: Vec<Vec<usize>>,
}

/// Supports of the proposed and cyclic plans. `mode` is `"mv"` or `"mm"`.
pub fn layout_json(mode: &str, n: usize, k_a: usize, k_b: usize, s: usize) -> Result<Value, String> {
    let spec = |family| match mode {
        "mv" => Ok(PlanSpec::mv(family, k_a, s)),
        "mm" => Ok(PlanSpec::mm(family, k_a, k_b, s)),
        other => Err(format!("unknown mode `{other}`")),
    };
    let proposed = spec(Family::Proposed)?;
    if proposed.n() != n {
        return Err(format!("n = {n} but k + s = {}", proposed.n()));
    }
    let mut layouts = Vec::new();
    for (name, family) in [("proposed", Family::Proposed), ("cyclic", Family::Cyclic)] {
        let plan = spec(family)?.build(0).map_err(err)?;
        layouts.push(Layout {
            scheme: name,
            omega_a: plan.weights.omega_a,
            omega_b: plan.weights.omega_b,
            a: plan.supports_a,
            b: plan.supports_b,
        });
    }
    Ok(json!({ "mode": mode, "n": n, "k_a": k_a, "k_b": if mode == "mv" { 1 } else { k_b }, "s": s, "layouts": layouts }))
}

fn options(n: usize, k: usize, samples: usize, seed: u64) -> KappaOptions {
    if binomial(n, k) <= BROWSER_EXHAUSTIVE_CAP {
        KappaOptions::exhaustive()
    } else {
        KappaOptions::sampled(samples.max(1), seed)
    }
}

fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// Worst-case condition numbers of the matrix-vector schemes at `(n, k_a, s)`,
/// with the proposed scheme keeping the best of `trials` draws.
pub fn kappa_json(n: usize, k_a: usize, s: usize, seed: u64, trials: u32, samples: usize) -> Result<Value, String> {
    if k_a + s != n {
        return Err(format!("n = {n} but k_a + s = {}", k_a + s));
    }
    if trials == 0 || trials > MAX_TRIALS {
        return Err(format!("trials must be in 1..={MAX_TRIALS}"));
    }
    let opts = options(n, k_a, samples, seed);
    let mode = match opts.mode {
        KappaMode::Exhaustive => json!({ "kind": "exhaustive", "subsets": binomial(n, k_a) as u64 }),
        KappaMode::Sampled { samples } => json!({ "kind": "sampled", "subsets": samples }),
    };
    let best = best_of_trials(&PlanSpec::mv(Family::Proposed, k_a, s), trials as usize, seed, &opts).map_err(err)?;
    let mut rows = vec![json!({
        "scheme": "proposed",
        "kappa_worst": finite(best.report.kappa_worst),
        "trials": best.trial_kappas.iter().map(|&k| finite(k)).collect::<Vec<_>>(),
    })];
    for family in [Family::Cyclic, Family::DenseRandom, Family::Poly] {
        let plan = PlanSpec::mv(family, k_a, s).build(seed).map_err(err)?;
        let r = kappa_worst(&plan, &opts).map_err(err)?;
        rows.push(json!({ "scheme": family.name(), "kappa_worst": finite(r.kappa_worst) }));
    }
    Ok(json!({ "n": n, "k_a": k_a, "s": s, "seed": seed, "mode": mode, "rows": rows }))
}

#[wasm_bindgen]
pub fn weights(n: usize, s: usize, k_a: usize, k_b: usize) -> String {
    respond(weights_json(n, s, k_a, k_b))
}

#[wasm_bindgen]
pub fn support_layout(mode: &str, n: usize, k_a: usize, k_b: usize, s: usize) -> String {
    respond(layout_json(mode, n, k_a, k_b, s))
}

#[wasm_bindgen]
pub fn kappa_compare(n: usize, k_a: usize, s: usize, seed: u32, trials: u32, samples: usize) -> String {
    respond(kappa_json(n, k_a, s, seed as u64, trials, samples))
}
