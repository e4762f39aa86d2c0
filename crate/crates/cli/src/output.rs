//! Result envelopes and the `--plain` renderer.

use std::fmt::Write as _;

use serde_json::{Map, Value};

/// `{command, seed, ...fields}`; `fields` must serialize to an object.
pub fn envelope(command: &str, seed: u64, fields: Value) -> Value {
    let mut out = Map::new();
    out.insert("command".into(), command.into());
    out.insert("seed".into(), seed.into());
    if let Value::Object(rest) = fields {
        out.extend(rest);
    }
    Value::Object(out)
}

pub fn render(value: &Value, plain: bool) -> String {
    if plain {
        plain_text(value)
    } else {
        // serializing a Value cannot fail
        serde_json::to_string_pretty(value).unwrap_or_default()
    }
}

/// Scalars as `key: value` lines; arrays of objects as tables.
fn plain_text(value: &Value) -> String {
    let mut out = String::new();
    let mut tables = Vec::new();
    if let Value::Object(map) = value {
        for (k, v) in map {
            match v {
                Value::Array(rows) if rows.iter().all(Value::is_object) && !rows.is_empty() => {
                    tables.push((k.as_str(), rows))
                }
                _ => flatten(k, v, &mut out),
            }
        }
    } else {
        flatten("value", value, &mut out);
    }
    for (name, rows) in tables {
        let _ = writeln!(out, "\n{name}:");
        out.push_str(&table(rows));
    }
    out
}

fn flatten(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&format!("{prefix}.{k}"), v, out)),
        Value::Array(items) if items.iter().any(|i| i.is_object() || i.is_array()) => items
            .iter()
            .enumerate()
            .for_each(|(i, v)| flatten(&format!("{prefix}[{i}]"), v, out)),
        _ => {
            let _ = writeln!(out, "{prefix}: {}", scalar(v));
        }
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(","),
        other => other.to_string(),
    }
}

/// Columns are the flattened leaf keys of the first row.
fn table(rows: &[Value]) -> String {
    let flat: Vec<Vec<(String, String)>> = rows
        .iter()
        .map(|r| {
            let mut s = String::new();
            flatten("", r, &mut s);
            s.lines()
                .filter_map(|l| l.split_once(": "))
                .map(|(k, v)| (k.trim_start_matches('.').to_string(), v.to_string()))
                .collect()
        })
        .collect();
    let header: Vec<&str> = flat[0].iter().map(|(k, _)| k.as_str()).collect();
    let cell = |row: &[(String, String)], key: &str| {
        row.iter().find(|(k, _)| k == key).map_or(String::new(), |(_, v)| v.clone())
    };
    let widths: Vec<usize> = header
        .iter()
        .map(|h| flat.iter().map(|r| cell(r, h).len()).max().unwrap_or(0).max(h.len()))
        .collect();
    let line = |cells: Vec<String>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = line(header.iter().map(|h| h.to_string()).collect()) + "\n";
    for row in &flat {
        out += &line(header.iter().map(|h| cell(row, h)).collect());
        out.push('\n');
    }
    out
}
