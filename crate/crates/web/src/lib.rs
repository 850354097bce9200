//! WebAssembly entry points for the browser demo. Every export returns a JSON
//! string; the page in `www/` draws it.

use rand_distr::{Distribution, StandardNormal};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use coreset_forge::evaluator::{self, SuiteKind, SuiteSpec};
use coreset_forge::lower_bounds::anticoncentration::anticoncentration_mc;
use coreset_forge::lower_bounds::basis::{hadamard_cost_z2, hadamard_rows, hadamard_solutions, unit_center_bound, BasisInstance};
use coreset_forge::metric::{total_cost, PowerParams, Solution, WeightedPoints};
use coreset_forge::sampler::{build_coreset, Provenance, SamplerConfig};
use coreset_forge::synth::{gaussian_mixture, MixtureSpec};
use coreset_forge::{rng, Result};

/// Points drawn on the canvas are capped at this many.
const MAX_DRAWN: usize = 4000;

/// Builds a coreset of a 2-D mixture and audits it on a small suite.
pub fn coreset_json(n: usize, k: usize, eps: f64, z: u32, delta: usize, seed: u64) -> Result<Value> {
    let params = PowerParams::new(z, eps)?;
    let proportions: Vec<f64> = (0..k).map(|j| 1.0 + (j % 3) as f64).collect();
    let (p, _) = gaussian_mixture(&MixtureSpec {
        n,
        d: 2,
        k,
        separation: 12.0,
        sigma: 1.5,
        proportions,
        seed,
    })?;
    let cfg = SamplerConfig {
        delta: Some(delta),
        seed,
        ..SamplerConfig::default()
    };
    let build = build_coreset(&p, k, &params, &cfg)?;
    let omega = &build.coreset;
    let suites = [
        SuiteSpec::new(SuiteKind::RandomBox, 30, rng::derive_seed(seed, &[1])),
        SuiteSpec::new(SuiteKind::DzSeeded, 10, rng::derive_seed(seed, &[2])),
        SuiteSpec::new(SuiteKind::CoresetAdversarial, 5, rng::derive_seed(seed, &[3])),
    ];
    let report = evaluator::audit(&p, omega, &suites, k, &params)?;
    let step = p.n().div_ceil(MAX_DRAWN).max(1);
    let drawn: Vec<&[f64]> = p.rows().step_by(step).collect();
    let coreset: Vec<Value> = (0..omega.weights.len())
        .map(|i| {
            let c = omega.point(i);
            json!({
                "x": c[0],
                "y": c[1],
                "w": omega.weights[i],
                "center": matches!(omega.provenance[i], Provenance::Center(_)),
            })
        })
        .collect();
    let centers: Vec<&[f64]> = build.clustering.solution.centers().collect();
    Ok(json!({
        "points": drawn,
        "coreset": coreset,
        "centers": centers,
        "groups": build.catalog.group_count(),
        "total_weight": report.total_weight,
        "mass": p.total_mass(),
        "max_distortion": report.max,
        "median_distortion": report.median,
        "solutions": report.solutions,
    }))
}

/// Costs of the Hadamard family on a basis instance next to the analytic values,
/// and the cheapest of `random` unit-norm solutions against the lower bound.
pub fn hadamard_json(k: usize, q: usize, random: usize, seed: u64) -> Result<Value> {
    let inst = BasisInstance::new(k, q)?;
    let rows = hadamard_rows(q)?;
    let sols = hadamard_solutions(&inst)?;
    let costs: Vec<Value> = sols
        .iter()
        .enumerate()
        .map(|(i, s)| Ok(json!({ "cost": total_cost(&inst.points, s, 2)?, "analytic": hadamard_cost_z2(&inst, i) })))
        .collect::<Result<_>>()?;
    let dim = inst.ambient_dim();
    let mut r = rng::seeded(seed);
    let mut cheapest = f64::INFINITY;
    for _ in 0..random {
        let mut c = Vec::with_capacity(k * dim);
        for _ in 0..k {
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut r)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            c.extend(v.iter().map(|x| x / norm));
        }
        cheapest = cheapest.min(total_cost(&inst.points, &Solution::new(c, dim)?, 2)?);
    }
    Ok(json!({
        "k": k,
        "q": q,
        "d": inst.d,
        "rows": rows,
        "costs": costs,
        "orthogonal_cost": total_cost(&inst.points, &inst.orthogonal_solution(), 2)?,
        "bound": unit_center_bound(inst.d, k, 2),
        "random_solutions": random,
        "cheapest_random": if random > 0 { json!(cheapest) } else { Value::Null },
    }))
}

/// Tail estimates for several sample sizes `m`.
pub fn anticoncentration_json(sizes: &[usize], p: f64, eps: f64, trials: u64, seed: u64) -> Result<Value> {
    let rows: Vec<_> = sizes
        .iter()
        .map(|&m| anticoncentration_mc(m, p, eps, None, trials, rng::derive_seed(seed, &[m as u64])))
        .collect::<Result<_>>()?;
    Ok(json!({ "p": p, "eps": eps, "trials": trials, "rows": rows }))
}

fn to_js(v: Result<Value>) -> std::result::Result<String, JsError> {
    v.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn coreset_demo(n: usize, k: usize, eps: f64, z: u32, delta: usize, seed: u32) -> std::result::Result<String, JsError> {
    to_js(coreset_json(n, k, eps, z, delta, seed as u64))
}

#[wasm_bindgen]
pub fn hadamard_demo(k: usize, q: usize, random: usize, seed: u32) -> std::result::Result<String, JsError> {
    to_js(hadamard_json(k, q, random, seed as u64))
}

#[wasm_bindgen]
pub fn anticoncentration_demo(sizes: Vec<u32>, p: f64, eps: f64, trials: u32, seed: u32) -> std::result::Result<String, JsError> {
    let sizes: Vec<usize> = sizes.into_iter().map(|m| m as usize).collect();
    to_js(anticoncentration_json(&sizes, p, eps, trials as u64, seed as u64))
}
