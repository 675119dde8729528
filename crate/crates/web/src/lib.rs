//! WebAssembly bindings for the static demo page in `www/`. Every export
//! returns a JSON string; errors become JavaScript exceptions.

use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde_json::json;
use wasm_bindgen::prelude::*;

use randgroup::distribution::{decay_bounds, letter_law, LetterDistribution, Relation};
use randgroup::thresholds::{parse_range, phase_map};
use randgroup::trivializer::{check_certificate, trivialize, TrivializerConfig};
use randgroup::words::sample_presentation_seeded;
use randgroup::{Letter, ModelParams};

fn js<E: std::fmt::Display>(e: E) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn ratio(r: &Rational64) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Phase of `coeff * log^beta / ell^alpha` over a grid; ranges are
/// `start:stop:step`.
#[wasm_bindgen]
pub fn phase_grid(alpha: &str, beta: &str, coeff: f64) -> Result<String, JsValue> {
    let alphas = parse_range(alpha).map_err(js)?;
    let betas = parse_range(beta).map_err(js)?;
    let cells: Vec<_> = phase_map(&alphas, &betas, coeff)
        .into_iter()
        .map(|c| {
            json!({
                "alpha": ratio(&c.alpha),
                "beta": ratio(&c.beta),
                "verdict": c.verdict.as_ref().map_or("excluded", |v| v.outcome.name()),
                "clause": c.verdict.map_or_else(|| "f does not tend to 0".to_string(), |v| v.clause),
            })
        })
        .collect();
    Ok(json!({ "alphas": alphas.len(), "betas": betas.len(), "cells": cells }).to_string())
}

/// Exact law of the letter at offsets `1..=n_max` after `a`, with the decay
/// bounds, as decimal values.
#[wasm_bindgen]
pub fn letter_law_table(m: u32, n_max: u32) -> Result<String, JsValue> {
    if n_max == 0 || n_max > 64 {
        return Err(js("offsets must lie in 1..=64"));
    }
    let x0 = LetterDistribution::x0();
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let (lo, hi) = decay_bounds(m, n).map_err(js)?;
        let mut probs = Vec::new();
        for y in Letter::alphabet(m) {
            let p = letter_law(m, n, Relation::of(x0, y)).map_err(js)?;
            probs.push(json!({ "letter": y.to_string(), "exact": p.to_string(), "value": p.to_f64() }));
        }
        rows.push(json!({ "n": n, "lower": lo.to_f64(), "upper": hi.to_f64(), "letters": probs }));
    }
    Ok(json!({ "m": m, "limit": 1.0 / (2.0 * m as f64), "rows": rows }).to_string())
}

/// Samples a presentation and runs the triviality pipeline on it.
#[wasm_bindgen]
pub fn trivialize_demo(m: u32, ell: usize, density: f64, seed: u64) -> Result<String, JsValue> {
    let params = ModelParams::from_density(m, ell, density).map_err(js)?;
    if params.num > 200_000 {
        return Err(js(format!("{} relators is too many for the browser demo", params.num)));
    }
    let pres = sample_presentation_seeded(&params, seed).map_err(js)?;
    let cfg = TrivializerConfig::for_params(m, ell).map_err(js)?;
    let verdict = trivialize(&pres, &cfg);
    let mut checked = true;
    let mut certs = Vec::new();
    for c in &verdict.certificates {
        checked &= check_certificate(&pres, c).map_err(js)?;
        certs.push(c.render());
    }
    Ok(json!({
        "num": params.num,
        "k": cfg.k,
        "block_size": cfg.block_size,
        "outcome": verdict.outcome,
        "guard": verdict.guard,
        "guard_conflict": verdict.guard_conflict,
        "certificates_checked": checked,
        "statistics": verdict.stats,
        "certificates": certs,
    })
    .to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exports_produce_json() {
        let v: serde_json::Value = serde_json::from_str(&phase_grid("0:1.5:0.5", "0:1:1", 1.0).unwrap()).unwrap();
        assert_eq!(v["cells"].as_array().unwrap().len(), 8);
        let v: serde_json::Value = serde_json::from_str(&letter_law_table(2, 2).unwrap()).unwrap();
        assert_eq!(v["rows"][1]["letters"][0]["exact"], "1/3");
        let v: serde_json::Value = serde_json::from_str(&trivialize_demo(2, 12, 0.55, 3).unwrap()).unwrap();
        assert_eq!(v["certificates_checked"], true);
    }
}
