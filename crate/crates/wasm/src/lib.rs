//! Browser bindings for the bell-lab demo page in `www/`.
//!
//! Every binding takes plain numbers or a model descriptor as JSON and
//! returns a JSON document.

use bell_lab::hbt::{default_hbt_settings, hbt_locality_audit, HbtConfig};
use bell_lab::locality::{audit_model, CheckGrid};
use bell_lab::metrics::{correlator_table, maximize_chsh_for_model, Search};
use bell_lab::{ConditionalModel, Integration, Model, ModelDescriptor, Setting};
use serde_json::json;
use wasm_bindgen::prelude::*;

const CURVE_NODES: usize = 1024;
const SEARCH_NODES: usize = 512;
const AUDIT_SETTINGS: usize = 12;
const AUDIT_HIDDEN: usize = 16;

fn model_from(json: &str) -> Result<(ModelDescriptor, Model), String> {
    let d: ModelDescriptor = serde_json::from_str(json).map_err(|e| format!("model: {e}"))?;
    let m = d.build().map_err(|e| e.to_string())?;
    Ok((d, m))
}

/// `E(a, b)` for `b` sweeping `[0, 2π)` at fixed `a`, next to `-cos(a - b)`.
pub fn correlation_curve_json(model_json: &str, a: f64, points: usize) -> Result<String, String> {
    if !(2..=720).contains(&points) {
        return Err("points must be between 2 and 720".into());
    }
    let (_, model) = model_from(model_json)?;
    let sb = Setting::evenly_spaced(points);
    let table = correlator_table(&model, &[Setting::new(a)], &sb, &Integration::Quadrature { n: CURVE_NODES })
        .map_err(|e| e.to_string())?;
    let b: Vec<f64> = sb.iter().map(|s| s.angle()).collect();
    let e: Vec<f64> = table[0].iter().map(|x| x.value).collect();
    let reference: Vec<f64> = b.iter().map(|b| -(a - b).cos()).collect();
    Ok(json!({ "a": a, "b": b, "E": e, "singlet": reference }).to_string())
}

/// Best CHSH value over settings and the three locality checks on a coarse grid.
pub fn analyze_model_json(model_json: &str) -> Result<String, String> {
    let (descriptor, model) = model_from(model_json)?;
    let search = Search { grid_n: 12, refine_iters: 2 };
    let best = maximize_chsh_for_model(&model, &search, &Integration::Quadrature { n: SEARCH_NODES })
        .map_err(|e| e.to_string())?;
    let grid = CheckGrid::with_counts(model.source(), AUDIT_SETTINGS, AUDIT_HIDDEN).map_err(|e| e.to_string())?;
    let audit = audit_model(&model, &grid, 1e-9).map_err(|e| e.to_string())?;
    Ok(json!({ "model": descriptor, "chsh": best, "audit": audit }).to_string())
}

/// Intensity covariance, fixed-θ covariance and polytope verdict for one detector pair.
pub fn hbt_json(alpha1: f64, alpha2: f64, n_events: u32, seed: u32) -> Result<String, String> {
    let config = HbtConfig::new(alpha1, alpha2, u64::from(n_events), u64::from(seed));
    let (sa, sb) = default_hbt_settings();
    let audit = hbt_locality_audit(&config, &sa, &sb, 1e-9).map_err(|e| e.to_string())?;
    serde_json::to_string(&audit).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn correlation_curve(model_json: &str, a: f64, points: usize) -> Result<String, JsValue> {
    correlation_curve_json(model_json, a, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn analyze_model(model_json: &str) -> Result<String, JsValue> {
    analyze_model_json(model_json).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn hbt_covariance(alpha1: f64, alpha2: f64, n_events: u32, seed: u32) -> Result<String, JsValue> {
    hbt_json(alpha1, alpha2, n_events, seed).map_err(|e| JsValue::from_str(&e))
}
