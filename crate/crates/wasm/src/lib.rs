//! Browser bindings. Every export takes plain values and returns a JSON string.

use num_rational::Rational64;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use ddm_core::null_models::{
    mixture_probability, noncrossing_mixture_probability, Direction, EnsembleSpec,
};
use ddm_core::stats::{self, BinomialTestInput};
use ddm_core::tree::{
    classify, count_crossings, enumerate_arrangements_capped, sum_of_distances, LinearizedTree,
};

/// Largest tree the page will enumerate; 9! arrangements stays interactive.
pub const PAGE_CAP: usize = 9;

#[derive(Serialize)]
struct Enumeration {
    n: usize,
    shape: String,
    d: u64,
    crossings: u64,
    total: u64,
    mean: String,
    rows: Vec<Row>,
}

#[derive(Serialize)]
struct Row {
    d: u64,
    count: u64,
    probability: String,
}

#[derive(Serialize)]
struct TestSummary {
    p_value: f64,
    neglog10: f64,
    significant: bool,
    min_sample_size: u64,
}

#[derive(Serialize)]
struct MixturePoint {
    p_star: f64,
    unrestricted: f64,
    noncrossing_above: f64,
    noncrossing_below: f64,
}

fn parse_heads(text: &str) -> Result<Vec<usize>, String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|h| h.parse().map_err(|_| format!("invalid head `{h}`")))
        .collect()
}

fn parse_fraction(text: &str) -> Result<Rational64, String> {
    text.trim()
        .parse()
        .map_err(|_| format!("invalid fraction `{text}`"))
}

pub fn enumerate_json(heads: &str, noncrossing: bool) -> Result<String, String> {
    let tree = LinearizedTree::from_heads(&parse_heads(heads)?).map_err(|e| e.to_string())?;
    let dist =
        enumerate_arrangements_capped(&tree, noncrossing, PAGE_CAP).map_err(|e| e.to_string())?;
    let out = Enumeration {
        n: tree.n(),
        shape: classify(&tree).to_string(),
        d: sum_of_distances(&tree),
        crossings: count_crossings(&tree),
        total: dist.total,
        mean: dist.mean().map(|m| m.to_string()).unwrap_or_default(),
        rows: dist
            .counts
            .iter()
            .map(|(&d, &count)| Row {
                d,
                count,
                probability: dist.probability(d).to_string(),
            })
            .collect(),
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

pub fn binomial_json(successes: u64, trials: u64, p: &str, alpha: f64) -> Result<String, String> {
    let p = parse_fraction(p)?;
    let input = BinomialTestInput::new(successes, trials, p, alpha).map_err(|e| e.to_string())?;
    let ln_p = stats::ln_binomial_upper_tail(&input);
    let out = TestSummary {
        p_value: ln_p.exp(),
        neglog10: -ln_p / std::f64::consts::LN_10 + 0.0,
        significant: ln_p.exp() <= alpha,
        min_sample_size: stats::min_sample_size(p, alpha).map_err(|e| e.to_string())?,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

pub fn mixture_json(steps: u32) -> Result<String, String> {
    let steps = steps.clamp(1, 64) as i64;
    let points = (0..=steps)
        .map(|k| {
            let ens = EnsembleSpec::real(Rational64::new(k, steps));
            let f = |r: Rational64| *r.numer() as f64 / *r.denom() as f64;
            Ok(MixturePoint {
                p_star: k as f64 / steps as f64,
                unrestricted: f(
                    mixture_probability(&ens, Direction::Above).map_err(|e| e.to_string())?
                ),
                noncrossing_above: f(noncrossing_mixture_probability(&ens, Direction::Above)
                    .map_err(|e| e.to_string())?),
                noncrossing_below: f(noncrossing_mixture_probability(&ens, Direction::Below)
                    .map_err(|e| e.to_string())?),
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    serde_json::to_string(&points).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn enumerate(heads: &str, noncrossing: bool) -> Result<String, JsValue> {
    enumerate_json(heads, noncrossing).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = binomialTest)]
pub fn binomial_test(successes: u32, trials: u32, p: &str, alpha: f64) -> Result<String, JsValue> {
    binomial_json(successes.into(), trials.into(), p, alpha).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = mixtureCurve)]
pub fn mixture_curve(steps: u32) -> Result<String, JsValue> {
    mixture_json(steps).map_err(|e| JsValue::from_str(&e))
}
