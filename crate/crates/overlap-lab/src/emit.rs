//! Report emission: RFC-4180 CSV tables and JSON documents that embed the
//! run manifest, plus a small structural validator for the shipped report
//! schema.

use std::path::Path;

use serde::Serialize;

use crate::manifest::RunManifest;

/// The JSON report envelope: manifest + command-specific payload.
#[derive(Debug, Clone, Serialize)]
pub struct JsonReport<'a, T: Serialize> {
    pub manifest: &'a RunManifest,
    pub payload: &'a T,
}

/// Serializes one CSV table (header + rows) to bytes. Quoting follows
/// RFC 4180 via the csv crate.
pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> std::io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(std::io::Error::other)
}

/// Writes bytes to `path` and records the digest in the manifest.
pub fn write_output(manifest: &mut RunManifest, path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    std::fs::write(path, bytes)?;
    manifest.record_output(path, bytes);
    Ok(())
}

pub fn json_bytes<T: Serialize>(manifest: &RunManifest, payload: &T) -> std::io::Result<Vec<u8>> {
    serde_json::to_vec_pretty(&JsonReport { manifest, payload }).map_err(std::io::Error::other)
}

/// The schema shipped with the tool (schemas/report.schema.json).
pub const REPORT_SCHEMA: &str = include_str!("../schemas/report.schema.json");

/// Structural validation against the subset of JSON Schema the shipped
/// schema uses: `type`, `properties`, `required`, `items`.
pub fn validate_against_schema(
    value: &serde_json::Value,
    schema: &serde_json::Value,
) -> Result<(), String> {
    validate_node(value, schema, "$")
}

fn validate_node(
    value: &serde_json::Value,
    schema: &serde_json::Value,
    path: &str,
) -> Result<(), String> {
    use serde_json::Value;
    if let Some(ty) = schema.get("type").and_then(Value::as_str) {
        let ok = match ty {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "number" => value.is_number(),
            "integer" => value.is_i64() || value.is_u64(),
            "boolean" => value.is_boolean(),
            "null" => value.is_null(),
            other => return Err(format!("{path}: unsupported schema type {other:?}")),
        };
        if !ok {
            return Err(format!("{path}: expected {ty}, got {value}"));
        }
    }
    if let Some(required) = schema.get("required").and_then(Value::as_array) {
        let obj = value
            .as_object()
            .ok_or_else(|| format!("{path}: required on non-object"))?;
        for key in required.iter().filter_map(Value::as_str) {
            if !obj.contains_key(key) {
                return Err(format!("{path}: missing required key {key:?}"));
            }
        }
    }
    if let Some(props) = schema.get("properties").and_then(Value::as_object) {
        if let Some(obj) = value.as_object() {
            for (key, sub) in props {
                if let Some(v) = obj.get(key) {
                    validate_node(v, sub, &format!("{path}.{key}"))?;
                }
            }
        }
    }
    if let Some(items) = schema.get("items") {
        if let Some(arr) = value.as_array() {
            for (i, v) in arr.iter().enumerate() {
                validate_node(v, items, &format!("{path}[{i}]"))?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quoting_roundtrip() {
        let rows = vec![vec!["a,b".to_string(), "plain".to_string()]];
        let bytes = csv_bytes(&["x", "y"], &rows).unwrap();
        let mut rd = csv::Reader::from_reader(bytes.as_slice());
        let rec = rd.records().next().unwrap().unwrap();
        assert_eq!(&rec[0], "a,b");
        assert_eq!(&rec[1], "plain");
    }

    #[test]
    fn emission_is_deterministic() {
        let manifest = RunManifest::begin(vec!["overlap-lab".into()], serde_json::json!({}), None);
        let payload = serde_json::json!({"rows": [1, 2, 3]});
        let a = json_bytes(&manifest, &payload).unwrap();
        let b = json_bytes(&manifest, &payload).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn schema_parses_and_validates_sample() {
        let schema: serde_json::Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
        let mut manifest =
            RunManifest::begin(vec!["overlap-lab".into()], serde_json::json!({"n": 3}), Some(1));
        manifest.finish("ok");
        let payload = serde_json::json!({"kind": "demo"});
        let doc: serde_json::Value =
            serde_json::from_slice(&json_bytes(&manifest, &payload).unwrap()).unwrap();
        validate_against_schema(&doc, &schema).unwrap();
        // and a broken document fails
        let broken = serde_json::json!({"payload": {}});
        assert!(validate_against_schema(&broken, &schema).is_err());
    }
}
