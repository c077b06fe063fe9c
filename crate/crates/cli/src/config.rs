// Copyright 2026 The kaonbell Authors
// SPDX-License-Identifier: Apache-2.0

//! Flat key-value run configuration.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub preset: Option<String>,
    #[serde(alias = "gamma_S")]
    pub gamma_s: Option<f64>,
    #[serde(alias = "gamma_L")]
    pub gamma_l: Option<f64>,
    pub delta_m: Option<f64>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub starts: Option<usize>,
    pub budget: Option<usize>,
    pub t_max: Option<f64>,
    pub t_end: Option<f64>,
    pub step: Option<f64>,
    pub points: Option<usize>,
    pub samples: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| Failure::usage(format!("config {}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| e.message().to_string())?;
        if let Some((key, _)) = table.iter().find(|(_, v)| v.is_table() || v.is_array()) {
            return Err(format!("key `{key}` is nested; only flat key = value pairs are allowed"));
        }
        FileConfig::deserialize(table).map_err(|e| e.message().to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_files() {
        let c = FileConfig::parse("preset = \"b-meson\"\nseed = 3\ndelta_m = 0.7\ngamma_L = 0.5\n").unwrap();
        assert_eq!(c.preset.as_deref(), Some("b-meson"));
        assert_eq!((c.seed, c.delta_m, c.gamma_l), (Some(3), Some(0.7), Some(0.5)));
    }

    #[test]
    fn rejects_unknown_and_nested_keys() {
        assert!(FileConfig::parse("colour = 1").is_err());
        assert!(FileConfig::parse("[section]\nseed = 1").is_err());
        assert!(FileConfig::parse("seed = [1, 2]").is_err());
        assert!(FileConfig::parse("seed = \"x\"").is_err());
    }
}
