//! WebAssembly bindings behind `www/index.html`.
//!
//! Each operation takes plain strings and numbers and returns a JSON
//! document; errors come back as a message string.

use ptlab_core::asymptotics::{limit_cumulants_gamma, limit_moments_gamma, LimitValue};
use ptlab_core::literal::{parse_permutation, parse_word_template};
use ptlab_core::perms::{count_agreements, count_joint, gamma_lcm_data, MatrixShape, PermKind};
use ptlab_core::rational::{self, int, Rational};
use ptlab_core::wick::{exact_mixed_cumulant, exact_mixed_moment, Limits, WickWord};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest side length accepted from the page.
pub const MAX_SIDE: usize = 64;

/// Enumeration budget for page requests, so that a slow request is refused
/// instead of freezing the tab.
pub const PAGE_BUDGET: u128 = 1 << 26;

fn exact(x: &Rational) -> Value {
    json!({ "value": rational::format(x), "float": rational::to_f64(x) })
}

fn check_side(m: usize) -> Result<(), String> {
    if m == 0 || m > MAX_SIDE {
        return Err(format!("M must be between 1 and {MAX_SIDE}"));
    }
    Ok(())
}

fn block_size(p: &ptlab_core::perms::EntryPermutation) -> Option<(ptlab_core::perms::Side, usize)> {
    match p.kind() {
        PermKind::PartialTranspose(spec) => Some((spec.side, spec.d)),
        _ => None,
    }
}

/// Agreement counts of two permutation literals, with the lcm sandwich when
/// both are partial transposes of the same side.
pub fn count_pair_json(m: usize, a: &str, b: &str) -> Result<String, String> {
    check_side(m)?;
    let s = parse_permutation(a, m, None).map_err(|e| e.to_string())?;
    let t = parse_permutation(b, m, None).map_err(|e| e.to_string())?;
    let c = count_agreements(&s, &t).map_err(|e| e.to_string())?;
    let j = count_joint(&s, &t).map_err(|e| e.to_string())?;
    let m2 = (m * m) as u64;
    let mut doc = json!({
        "M": m,
        "a": s.label(),
        "b": t.label(),
        "c": c,
        "j": j,
        "density": c as f64 / m2 as f64,
        "kappa2": exact(&Rational::new(c.into(), m2.into())),
    });
    if let (Some((x, d1)), Some((y, d2))) = (block_size(&s), block_size(&t)) {
        if x == y {
            let l = gamma_lcm_data(d1 as u64, d2 as u64).map_err(|e| e.to_string())?;
            doc["L"] = json!(l.big_l);
            doc["lower"] = exact(&(int(m2) / int(l.big_l * l.big_l)));
            doc["upper"] = exact(&(int(m2) / int(l.big_l)));
        }
    }
    Ok(doc.to_string())
}

/// Exact moment (with its pairing breakdown) and free cumulant of a word.
pub fn exact_word_json(m: usize, p: usize, word: &str) -> Result<String, String> {
    check_side(m)?;
    let shape = MatrixShape::new(m, p).map_err(|e| e.to_string())?;
    let perms = parse_word_template(word, m, None).map_err(|e| e.to_string())?;
    let limits = Limits { enumeration: PAGE_BUDGET, ..Limits::default() };
    let w = WickWord::new(shape, perms).map_err(|e| e.to_string())?.with_limits(limits);
    let report = exact_mixed_moment(&w).map_err(|e| e.to_string())?;
    let cumulant = exact_mixed_cumulant(&w).map_err(|e| e.to_string())?;
    let terms: Vec<Value> = report
        .per_pairing
        .iter()
        .map(|t| json!({ "pairing": t.pairing.to_string(), "count": t.count.to_string(), "value": rational::format(&t.value) }))
        .collect();
    Ok(json!({
        "word": w.label(),
        "M": m,
        "P": p,
        "moment": exact(&report.total),
        "cumulant": exact(&cumulant),
        "pairings": terms,
    })
    .to_string())
}

/// Limit cumulants and moments of a constant partial-transpose word.
pub fn limit_law_json(b: &str, d: &str, c: &str, orders: usize) -> Result<String, String> {
    let b: LimitValue = b.parse().map_err(|e: ptlab_core::Error| e.to_string())?;
    let d: LimitValue = d.parse().map_err(|e: ptlab_core::Error| e.to_string())?;
    let c = rational::parse(c).ok_or_else(|| format!("bad ratio {c:?}"))?;
    let ks = limit_cumulants_gamma(orders, b, d, &c).map_err(|e| e.to_string())?;
    let ms = limit_moments_gamma(orders, b, d, &c).map_err(|e| e.to_string())?;
    Ok(json!({
        "b": b.to_string(),
        "d": d.to_string(),
        "cumulants": ks.iter().map(exact).collect::<Vec<_>>(),
        "moments": ms.iter().map(exact).collect::<Vec<_>>(),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn count_pair(m: usize, a: &str, b: &str) -> Result<String, JsValue> {
    count_pair_json(m, a, b).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn exact_word(m: usize, p: usize, word: &str) -> Result<String, JsValue> {
    exact_word_json(m, p, word).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn limit_law(b: &str, d: &str, c: &str, orders: usize) -> Result<String, JsValue> {
    limit_law_json(b, d, c, orders).map_err(|e| JsValue::from_str(&e))
}
