//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export takes plain numbers or text and returns a JSON string, so the
//! page needs no generated glue beyond `wasm-bindgen`'s own.

use annulus_core::cone::{approximate_by_difference, convergence_report, WeightedSpaceTag};
use annulus_core::criteria::check_eigen_existence;
use annulus_core::kernels::{Kernel, WindowPair};
use annulus_core::problem::parse_problem;
use annulus_core::spectral::{principal_char_value, LinearOperator};
use annulus_core::GridFunction;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const MAX_NODES: usize = 801;

fn kernel_of(name: &str) -> Result<Kernel, String> {
    match name {
        "k1" | "K1" => Ok(Kernel::K1),
        "k2" | "K2" => Ok(Kernel::K2),
        other => Err(format!("unknown kernel `{other}` (expected k1 or k2)")),
    }
}

/// Principal characteristic value and eigenfunction of `L_i` (`full`) or of
/// its restriction to `[a, b]`.
pub fn eigen(kernel: &str, full: bool, a: f64, b: f64, nodes: usize) -> Result<Value, String> {
    let kernel = kernel_of(kernel)?;
    if !(3..=MAX_NODES).contains(&nodes) {
        return Err(format!("nodes must lie in [3, {MAX_NODES}], got {nodes}"));
    }
    let op = if full {
        LinearOperator::full(kernel)
    } else {
        if !(0.0 <= a && a < b && b <= 1.0) {
            return Err(format!("need 0 <= a < b <= 1, got a = {a}, b = {b}"));
        }
        LinearOperator::restricted(kernel, a, b)
    };
    let r = principal_char_value(op, nodes).map_err(|e| e.to_string())?;
    let f = &r.eigenfunction;
    Ok(json!({
        "operator": op.name(),
        "mu_numeric": r.mu_numeric,
        "mu_closed_form": r.mu_closed_form,
        "mu_shooting": r.mu_shooting,
        "residual": r.residual,
        "t": f.nodes(),
        "phi": f.values(),
    }))
}

/// Runs the principal-value existence test on a problem document.
pub fn check(problem: &str) -> Result<Value, String> {
    let spec = parse_problem(problem).map_err(|e| e.to_string())?;
    let report = check_eigen_existence(&spec).map_err(|e| e.to_string())?;
    serde_json::to_value(&report).map_err(|e| e.to_string())
}

/// Mollifier approximations of `√t` with the cone pair of the `n`-th one.
pub fn mollify(kernel: &str, n: u32) -> Result<Value, String> {
    let kernel = kernel_of(kernel)?;
    if !(1..=512).contains(&n) {
        return Err(format!("n must lie in [1, 512], got {n}"));
    }
    // The discrete mollifier needs at least 8 grid cells per support width.
    let nodes = (8 * n as usize + 1).max(1025);
    let w = GridFunction::sample(nodes, f64::sqrt).map_err(|e| e.to_string())?;
    let rows = convergence_report(&w, kernel, &[n]).map_err(|e| e.to_string())?;
    let windows = WindowPair::new(0.25, 0.75, 0.5, 1.0).map_err(|e| e.to_string())?;
    let tag = WeightedSpaceTag::for_component(&windows, kernel);
    let (phi, psi) = approximate_by_difference(&w, &tag, n).map_err(|e| e.to_string())?;
    let smooth: Vec<f64> = phi.values().iter().zip(psi.values()).map(|(p, q)| p - q).collect();
    Ok(json!({
        "n": n,
        "sup_error": rows[0].sup_error,
        "weighted_deriv_error": rows[0].weighted_deriv_error,
        "t": w.nodes(),
        "w": w.values(),
        "w_n": smooth,
        "phi": phi.values(),
        "psi": psi.values(),
    }))
}

fn to_js(result: Result<Value, String>) -> Result<String, JsValue> {
    result.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = eigen)]
pub fn eigen_js(kernel: &str, full: bool, a: f64, b: f64, nodes: usize) -> Result<String, JsValue> {
    to_js(eigen(kernel, full, a, b, nodes))
}

#[wasm_bindgen(js_name = check)]
pub fn check_js(problem: &str) -> Result<String, JsValue> {
    to_js(check(problem))
}

#[wasm_bindgen(js_name = mollify)]
pub fn mollify_js(kernel: &str, n: u32) -> Result<String, JsValue> {
    to_js(mollify(kernel, n))
}

/// The example problem, for pre-filling the editor.
#[wasm_bindgen(js_name = exampleProblem)]
pub fn example_problem() -> String {
    include_str!("../../core/examples/paper_example.problem").to_string()
}
