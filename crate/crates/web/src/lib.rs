//! Browser bindings: a heat map, one row's convergence, and the diagonal table.

use cmfield::cf::delta_measure;
use cmfield::constants::{Constant, PrecisionLadder};
use cmfield::exact::{to_decimal, to_f64};
use cmfield::field::{FieldDefinition, MatrixField, Preset};
use cmfield::lattice;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Cells per request; larger grids make the page unresponsive.
const MAX_CELLS: usize = 2500;

struct Loaded {
    field: MatrixField,
    definition: FieldDefinition,
    preset: Option<Preset>,
}

/// `spec` is a preset name or `f ; fbar`.
fn load(spec: &str) -> Result<Loaded, String> {
    let spec = spec.trim();
    let (definition, preset) = match spec.split_once(';') {
        Some((f, fbar)) => (
            FieldDefinition { f: f.trim().into(), fbar: fbar.trim().into(), split_offset: None, origin: None },
            None,
        ),
        None => {
            let p = Preset::parse(spec).map_err(|e| e.to_string())?;
            (p.definition(), Some(p))
        }
    };
    let pair = definition.to_pair().map_err(|e| e.to_string())?;
    let field = pair.twisted_field().map_err(|e| e.to_string())?;
    Ok(Loaded { field, definition, preset })
}

fn ladder(constant: &str, preset: Option<Preset>) -> Result<PrecisionLadder, String> {
    let c: Constant = match (constant.trim(), preset) {
        ("", Some(p)) => p.constant(),
        ("", None) => return Err("a constant is required for a custom field".into()),
        (t, _) => t.parse().map_err(|e: cmfield::constants::ConstantError| e.to_string())?,
    };
    Ok(PrecisionLadder::new(c))
}

pub fn heatmap_value(spec: &str, n: usize, m: usize, constant: &str) -> Result<serde_json::Value, String> {
    if n == 0 || m == 0 || n * m > MAX_CELLS {
        return Err(format!("grid must be nonempty with at most {MAX_CELLS} cells"));
    }
    let l = load(spec)?;
    let ladder = ladder(constant, l.preset)?;
    let hm = lattice::heatmap(&l.field, n, m, &ladder).map_err(|e| e.to_string())?;
    Ok(hm.to_json(Some(&l.definition)))
}

#[derive(Serialize)]
struct RowPoint {
    n: usize,
    value: Option<f64>,
    digits: Option<String>,
    delta: String,
}

pub fn row_value(spec: &str, m: usize, depth: usize, constant: &str) -> Result<serde_json::Value, String> {
    if m == 0 || depth > 400 {
        return Err("need m >= 1 and depth <= 400".into());
    }
    let l = load(spec)?;
    let ladder = ladder(constant, l.preset)?;
    let table = lattice::pq_table(&l.field, depth, m).map_err(|e| e.to_string())?;
    let points: Vec<RowPoint> = (1..=depth)
        .filter_map(|n| table.get(n, m))
        .map(|r| {
            let v = r.value();
            RowPoint {
                n: r.n,
                value: v.as_ref().map(to_f64),
                digits: v.as_ref().map(|x| to_decimal(x, 20)),
                delta: delta_measure(&r.p, &r.q, &ladder).render(),
            }
        })
        .collect();
    Ok(serde_json::json!({
        "m": m,
        "constant": ladder.constant().name(),
        "target": ladder.approx(64).to_f64(),
        "points": points,
    }))
}

pub fn diagonal_value(spec: &str, n: usize) -> Result<serde_json::Value, String> {
    if n > 60 {
        return Err("n must be at most 60".into());
    }
    let l = load(spec)?;
    let pcf = lattice::diagonal_pcf(&l.field).map_err(|e| e.to_string())?;
    let v = lattice::v_sequence(&l.field, n).map_err(|e| e.to_string())?;
    Ok(serde_json::json!({
        "a": pcf.a.display_with("k", "y"),
        "b": pcf.b.display_with("k", "y"),
        "prefix": pcf.prefix.to_string(),
        "exponent": v.exponent,
        "v": v.v.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        "recurrence_holds": v.recurrence_holds,
        "lambda_hat": v.growth.lambda_hat,
        "roots": v.growth.roots.as_ref().map(|r| r.description.clone()),
    }))
}

fn to_js(r: Result<serde_json::Value, String>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

/// Heat-map cells as JSON.
#[wasm_bindgen]
pub fn heatmap(spec: &str, n: usize, m: usize, constant: &str) -> Result<String, JsValue> {
    to_js(heatmap_value(spec, n, m, constant))
}

/// Convergents of row `m` as JSON.
#[wasm_bindgen]
pub fn row_convergence(spec: &str, m: usize, depth: usize, constant: &str) -> Result<String, JsValue> {
    to_js(row_value(spec, m, depth, constant))
}

/// Diagonal continued fraction and normalized denominators as JSON.
#[wasm_bindgen]
pub fn diagonal_table(spec: &str, n: usize) -> Result<String, JsValue> {
    to_js(diagonal_value(spec, n))
}
