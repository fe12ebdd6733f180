use std::path::Path;

use serde_json::Value;

/// Keys and value kinds of a JSON document, with arrays reduced to their
/// first element.
pub fn schema(v: &Value) -> Value {
    match v {
        Value::Null => "null".into(),
        Value::Bool(_) => "bool".into(),
        Value::Number(_) => "number".into(),
        Value::String(_) => "string".into(),
        Value::Array(a) => Value::Array(a.first().map(schema).into_iter().collect()),
        Value::Object(o) => Value::Object(o.iter().map(|(k, v)| (k.clone(), schema(v))).collect()),
    }
}

pub fn pretty_schema(text: &str) -> String {
    serde_json::to_string_pretty(&schema(&serde_json::from_str(text).unwrap())).unwrap() + "\n"
}

pub fn golden_path(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}
