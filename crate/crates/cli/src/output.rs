// Copyright 2026 The kaonbell Authors
// SPDX-License-Identifier: Apache-2.0

//! Rendering and writing of results. Every artifact starts with the run
//! metadata, and numbers carry at most 12 significant digits.

use std::io::Write;
use std::path::{Path, PathBuf};

use kaonbell::format::{round_sig, Metadata};
use serde_json::{Map, Value};

use crate::Failure;

pub const OUT_DIR_ENV: &str = "KAONBELL_OUT_DIR";

/// Rounds every float in a JSON tree.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(round_sig(x)))
            .map_or(Value::Null, Value::Number),
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

fn metadata_json(meta: &Metadata) -> Value {
    let mut m = Map::new();
    m.insert("tool".into(), meta.tool.clone().into());
    m.insert("version".into(), meta.version.clone().into());
    m.insert("command".into(), meta.command.clone().into());
    m.insert("preset".into(), meta.preset.clone().into());
    m.insert("gamma_S".into(), meta.gamma_s.into());
    m.insert("gamma_L".into(), meta.gamma_l.into());
    m.insert("delta_m".into(), meta.delta_m.into());
    m.insert("seed".into(), meta.seed.map_or(Value::Null, Value::from));
    for (k, v) in &meta.extra {
        m.insert(k.clone(), v.clone().into());
    }
    Value::Object(m)
}

/// `{"metadata": …, "result": …}`, pretty-printed.
pub fn json_document(meta: &Metadata, result: Value) -> String {
    let mut doc = Map::new();
    doc.insert("metadata".into(), metadata_json(meta));
    doc.insert("result".into(), result);
    let mut s = serde_json::to_string_pretty(&round_json(Value::Object(doc))).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Comment header followed by a CSV or text body.
pub fn commented_document(meta: &Metadata, body: &str) -> String {
    let mut s = meta.comment_block();
    s.push_str(body);
    s
}

/// Resolves `--out` against the output directory. The environment variable
/// wins over the config file.
pub fn resolve_out(out: &Path, config_dir: Option<&Path>) -> PathBuf {
    if out.is_absolute() {
        return out.to_path_buf();
    }
    match std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()) {
        Some(dir) => PathBuf::from(dir).join(out),
        None => config_dir.map_or_else(|| out.to_path_buf(), |d| d.join(out)),
    }
}

pub fn emit(text: &str, out: Option<&Path>, config_dir: Option<&Path>) -> Result<(), Failure> {
    match out {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| Failure::domain(format!("stdout: {e}")))
        }
        Some(out) => {
            let path = resolve_out(out, config_dir);
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)
                    .map_err(|e| Failure::domain(format!("cannot create {}: {e}", parent.display())))?;
            }
            std::fs::write(&path, text)
                .map_err(|e| Failure::domain(format!("cannot write {}: {e}", path.display())))
        }
    }
}
