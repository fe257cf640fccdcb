//! Browser bindings for the demo page in `www/`.
//!
//! Each export takes and returns JSON strings so the page needs no glue
//! beyond `JSON.parse`. The plain functions in [`api`] do the work and are
//! what the native tests exercise.

use wasm_bindgen::prelude::*;

pub mod api;

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

/// Closed-form and exhaustive thresholds for a topology file.
#[wasm_bindgen]
pub fn thresholds(topology_json: &str) -> Result<String, JsError> {
    js(api::thresholds(topology_json))
}

/// Deal `secret` and try to rebuild it from the selected nodes only.
#[wasm_bindgen(js_name = evaluateSelection)]
pub fn evaluate_selection(topology_json: &str, nodes_json: &str, secret: &str) -> Result<String, JsError> {
    js(api::evaluate_selection(topology_json, nodes_json, secret))
}

/// Run a scenario. The seed is a decimal string so it survives `u64`.
#[wasm_bindgen]
pub fn simulate(scenario_json: &str, seed: &str) -> Result<String, JsError> {
    js(api::simulate(scenario_json, seed))
}
