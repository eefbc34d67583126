//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use gridkkt::grid_model::{load_case, GridCase};
use serde_json::Value;

pub fn case_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("cases")
        .join(format!("{name}.m"))
}

pub fn case(name: &str) -> GridCase {
    load_case(case_path(name)).expect("bundled case parses")
}

pub fn schema(file: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema").join(file);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Minimal JSON-schema checker covering the keywords the bundled schemas use:
/// `type`, `required`, `properties`, `additionalProperties`, `items`, `const`,
/// `enum`, `minimum`, `maximum`, `exclusiveMinimum` and `pattern`.
/// Annotations (`$schema`, `$id`, `title`, `description`) are ignored.
pub fn validate(schema: &Value, value: &Value) -> Result<(), String> {
    check(schema, value, "$")
}

fn type_matches(name: &str, v: &Value) -> bool {
    match name {
        "null" => v.is_null(),
        "boolean" => v.is_boolean(),
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "number" => v.is_number(),
        "integer" => v.is_i64() || v.is_u64() || v.as_f64().is_some_and(|f| f.fract() == 0.0),
        other => panic!("schema uses unknown type {other}"),
    }
}

fn check(schema: &Value, v: &Value, at: &str) -> Result<(), String> {
    let Some(s) = schema.as_object() else {
        return match schema {
            Value::Bool(true) => Ok(()),
            _ => Err(format!("{at}: rejected by schema {schema}")),
        };
    };
    for key in s.keys() {
        let known = [
            "$schema",
            "$id",
            "title",
            "description",
            "type",
            "required",
            "properties",
            "additionalProperties",
            "items",
            "const",
            "enum",
            "minimum",
            "maximum",
            "exclusiveMinimum",
            "pattern",
        ];
        assert!(
            known.contains(&key.as_str()),
            "validator does not implement keyword {key}"
        );
    }
    if let Some(t) = s.get("type") {
        let ok = match t {
            Value::String(name) => type_matches(name, v),
            Value::Array(names) => names.iter().any(|n| type_matches(n.as_str().unwrap(), v)),
            _ => panic!("bad type keyword"),
        };
        if !ok {
            return Err(format!("{at}: expected type {t}, found {v}"));
        }
    }
    if let Some(c) = s.get("const") {
        if c != v {
            return Err(format!("{at}: expected {c}, found {v}"));
        }
    }
    if let Some(Value::Array(options)) = s.get("enum") {
        if !options.contains(v) {
            return Err(format!("{at}: {v} not in {options:?}"));
        }
    }
    if let Some(x) = v.as_f64() {
        if let Some(min) = s.get("minimum").and_then(Value::as_f64) {
            if x < min {
                return Err(format!("{at}: {x} < minimum {min}"));
            }
        }
        if let Some(max) = s.get("maximum").and_then(Value::as_f64) {
            if x > max {
                return Err(format!("{at}: {x} > maximum {max}"));
            }
        }
        if let Some(min) = s.get("exclusiveMinimum").and_then(Value::as_f64) {
            if x <= min {
                return Err(format!("{at}: {x} <= exclusive minimum {min}"));
            }
        }
    }
    if let (Some(p), Some(text)) = (s.get("pattern").and_then(Value::as_str), v.as_str()) {
        if !regex::Regex::new(p).unwrap().is_match(text) {
            return Err(format!("{at}: {text:?} does not match {p}"));
        }
    }
    if let Some(obj) = v.as_object() {
        if let Some(Value::Array(req)) = s.get("required") {
            for r in req {
                let r = r.as_str().unwrap();
                if !obj.contains_key(r) {
                    return Err(format!("{at}: missing required property {r}"));
                }
            }
        }
        let props = s.get("properties").and_then(Value::as_object);
        for (k, child) in obj {
            let path = format!("{at}.{k}");
            if let Some(sub) = props.and_then(|p| p.get(k)).or_else(|| s.get("additionalProperties")) {
                check(sub, child, &path)?;
            }
        }
    }
    if let (Some(items), Some(arr)) = (s.get("items"), v.as_array()) {
        for (i, child) in arr.iter().enumerate() {
            check(items, child, &format!("{at}[{i}]"))?;
        }
    }
    Ok(())
}

/// Replace every field whose name marks it as a wall-clock measurement with
/// null, recursively, so two runs can be compared byte for byte.
pub fn mask_timing(v: &mut Value) {
    match v {
        Value::Object(map) => {
            for (k, child) in map.iter_mut() {
                let timed = k.ends_with("_ms")
                    || k.ends_with("_ns")
                    || k.ends_with("_s")
                    || k.ends_with("_percent")
                    || k.ends_with("speedup");
                if timed {
                    *child = Value::Null;
                } else {
                    mask_timing(child);
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(mask_timing),
        _ => {}
    }
}

/// `‖x − y‖∞ / max(‖y‖∞, tiny)`.
pub fn rel_diff(x: &[f64], y: &[f64]) -> f64 {
    let diff = x.iter().zip(y).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let scale = y.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    diff / scale.max(f64::MIN_POSITIVE)
}
