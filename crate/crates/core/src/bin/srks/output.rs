use std::io::Write;

use serde_json::Value;
use srks::Result;

use crate::{Format, Global};

pub fn render(report: &Value, format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(report)? + "\n",
        Format::Text => {
            let mut out = String::new();
            text(report, "", &mut out);
            out
        }
    })
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) if n.is_f64() => Some(float(n.as_f64().unwrap_or(f64::NAN))),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn float(x: f64) -> String {
    if x == 0.0 || (1e-4..1e6).contains(&x.abs()) {
        format!("{x:.6}")
    } else {
        format!("{x:.6e}")
    }
}

/// `key: value` lines; arrays of scalars on one line, nested keys dotted.
fn text(v: &Value, prefix: &str, out: &mut String) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, v)| text(v, &join(k), out)),
        Value::Array(items) if items.iter().all(|x| scalar(x).is_some()) => {
            let row: Vec<String> = items.iter().filter_map(scalar).collect();
            out.push_str(&format!("{prefix}: {}\n", row.join(" ")));
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                text(x, &format!("{prefix}[{i}]"), out);
            }
        }
        _ => out.push_str(&format!("{prefix}: {}\n", scalar(v).unwrap_or_default())),
    }
}

/// Writes to `--out` through a temporary file in the same directory, so a
/// failed run never leaves a partial report behind.
pub fn emit(report: &Value, global: &Global) -> Result<()> {
    let body = render(report, global.format)?;
    match &global.out {
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
            Ok(())
        }
        Some(path) => {
            let dir = path
                .parent()
                .filter(|p| !p.as_os_str().is_empty())
                .unwrap_or(std::path::Path::new("."));
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(body.as_bytes())?;
            tmp.persist(path).map_err(|e| e.error)?;
            Ok(())
        }
    }
}
