//! JSON helpers shared by every endpoint.

use serde_json::{json, Map, Value};

/// Significant digits kept when serializing floating-point values.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// A finite value rounded to [`SIGNIFICANT_DIGITS`]; non-finite values become null.
pub fn num(v: f64) -> Value {
    if !v.is_finite() {
        return Value::Null;
    }
    let rounded: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v)
        .parse()
        .expect("scientific notation round-trips");
    // Avoid "-0.0" in payloads.
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    Value::from(rounded)
}

pub fn nums(values: &[f64]) -> Value {
    Value::Array(values.iter().map(|&v| num(v)).collect())
}

pub fn ok(params: Map<String, Value>, payload: Value) -> String {
    json!({ "status": "ok", "params": params, "payload": payload }).to_string()
}

pub fn error(code: &str, message: &str) -> String {
    json!({ "status": "error", "error": { "code": code, "message": message } }).to_string()
}
