// Copyright 2026 The kaonbell Authors
// SPDX-License-Identifier: Apache-2.0

//! Deterministic number formatting and output headers.

use serde::Serialize;

use crate::params::MesonParameters;

/// Significant digits in every emitted number.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Formats with at most 12 significant digits, shortest form.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = round_sig(x);
    if r == 0.0 {
        return "0".into();
    }
    let a = r.abs();
    if (1e-5..1e15).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// Provenance attached to every output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub preset: String,
    pub gamma_s: f64,
    pub gamma_l: f64,
    pub delta_m: f64,
    pub seed: Option<u64>,
    /// Extra key-value pairs in insertion order.
    pub extra: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(command: &str, params: &MesonParameters, seed: Option<u64>) -> Self {
        Self {
            tool: "kaonbell".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            preset: params.label().into(),
            gamma_s: params.gamma_s(),
            gamma_l: params.gamma_l(),
            delta_m: params.delta_m(),
            seed,
            extra: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.extra.push((key.into(), value.to_string()));
        self
    }

    /// `# key: value` lines for CSV and text outputs.
    pub fn comment_block(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str("# ");
            out.push_str(k);
            out.push_str(": ");
            out.push_str(&v);
            out.push('\n');
        };
        line("tool", format!("{} {}", self.tool, self.version));
        line("command", self.command.clone());
        line("preset", self.preset.clone());
        line("gamma_S", fmt_num(self.gamma_s));
        line("gamma_L", fmt_num(self.gamma_l));
        line("delta_m", fmt_num(self.delta_m));
        line("seed", self.seed.map_or("none".into(), |s| s.to_string()));
        for (k, v) in &self.extra {
            line(k, v.clone());
        }
        out
    }
}

/// Renders rows of numbers as CSV with a header row.
pub fn csv_table(columns: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = columns.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt_num).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
