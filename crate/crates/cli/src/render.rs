//! Human-readable rendering of JSON reports.

use std::fmt::Write;

use serde_json::{Map, Value};

pub fn text(report: &Value) -> String {
    let mut out = String::new();
    node(&mut out, 0, report);
    out.trim_end().to_string()
}

fn pad(out: &mut String, depth: usize) {
    out.push_str(&"  ".repeat(depth));
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

/// Matrices are summarized by their shape.
fn matrix_shape(v: &Map<String, Value>) -> Option<String> {
    if v.len() == 3 && v.contains_key("data") {
        Some(format!("<{} x {} matrix>", v.get("rows")?, v.get("cols")?))
    } else {
        None
    }
}

fn check_line(v: &Value) -> Option<String> {
    let o = v.as_object()?;
    Some(format!(
        "[{}] {}: {} (tol {})",
        if o.get("pass")?.as_bool()? { "PASS" } else { "FAIL" },
        o.get("name")?.as_str()?,
        o.get("residual")?,
        o.get("tol")?
    ))
}

fn node(out: &mut String, depth: usize, v: &Value) {
    match v {
        Value::Object(o) => {
            for (key, val) in o {
                pad(out, depth);
                if let Some(s) = scalar(val) {
                    let _ = writeln!(out, "{key}: {s}");
                } else if let Some(s) = val.as_object().and_then(matrix_shape) {
                    let _ = writeln!(out, "{key}: {s}");
                } else {
                    let _ = writeln!(out, "{key}:");
                    node(out, depth + 1, val);
                }
            }
        }
        Value::Array(items) => {
            if items.iter().all(|x| scalar(x).is_some()) {
                pad(out, depth);
                let parts: Vec<_> = items.iter().filter_map(scalar).collect();
                let _ = writeln!(out, "[{}]", parts.join(", "));
                return;
            }
            for item in items {
                if let Some(line) = check_line(item) {
                    pad(out, depth);
                    let _ = writeln!(out, "{line}");
                } else {
                    pad(out, depth);
                    out.push_str("-\n");
                    node(out, depth + 1, item);
                }
            }
        }
        other => {
            pad(out, depth);
            let _ = writeln!(out, "{}", scalar(other).unwrap_or_default());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn renders_checks_and_matrices() {
        let v = json!({
            "status": "fail",
            "result": {
                "checks": [{ "name": "unital", "residual": 0.5, "tol": 1e-7, "pass": false }],
                "choi": { "rows": 4, "cols": 4, "data": [] },
            }
        });
        let t = text(&v);
        assert!(t.contains("status: fail"));
        assert!(t.contains("[FAIL] unital: 0.5 (tol 1e-7)"));
        assert!(t.contains("choi: <4 x 4 matrix>"));
    }
}
