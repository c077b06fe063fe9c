// Copyright 2026 The kaonbell Authors
// SPDX-License-Identifier: Apache-2.0

//! Physical constants of a neutral-meson system and the named presets.
//!
//! Presets use `gamma_s = 1`, so every time in the API is in units of the
//! short-lived lifetime. Absolute masses are not stored: only the mass
//! difference enters any observable.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `Γ_S/Γ_L` of the default kaon preset. It places the K⁰ purity minimum
/// (`ln 2 / Γ_L`) at 401.881 and the mixed-state minimum at 0.333068.
pub const KAON_PAPER_WIDTH_RATIO: f64 = 579.8;
pub const KAON_PDG_WIDTH_RATIO: f64 = 571.3;
pub const KAON_PAPER_DELTA_M: f64 = 0.5;
pub const KAON_PDG_DELTA_M: f64 = 0.4739;
/// `Δm/Γ` for B⁰_d mixing.
pub const B_MESON_DELTA_M: f64 = 0.77;

/// Named parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    KaonPaper,
    KaonPdg,
    BMeson,
    Custom,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::KaonPaper, Preset::KaonPdg, Preset::BMeson, Preset::Custom];

    pub fn name(self) -> &'static str {
        match self {
            Preset::KaonPaper => "kaon-paper",
            Preset::KaonPdg => "kaon-pdg",
            Preset::BMeson => "b-meson",
            Preset::Custom => "custom",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown preset `{s}`")))
    }
}

/// Decay widths and mass difference, with `ħ = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MesonParameters {
    #[serde(rename = "gamma_S")]
    gamma_s: f64,
    #[serde(rename = "gamma_L")]
    gamma_l: f64,
    delta_m: f64,
    label: String,
}

impl MesonParameters {
    /// Validated constructor. Requires `gamma_s >= gamma_l > 0` and `delta_m >= 0`.
    pub fn new(gamma_s: f64, gamma_l: f64, delta_m: f64, label: impl Into<String>) -> Result<Self> {
        let finite = gamma_s.is_finite() && gamma_l.is_finite() && delta_m.is_finite();
        if !finite || gamma_s <= 0.0 || gamma_l <= 0.0 {
            return Err(Error::Config(format!(
                "decay widths must be finite and positive (gamma_S={gamma_s}, gamma_L={gamma_l})"
            )));
        }
        if gamma_l > gamma_s {
            return Err(Error::Config(format!("gamma_L ({gamma_l}) must not exceed gamma_S ({gamma_s})")));
        }
        if delta_m < 0.0 {
            return Err(Error::Config(format!("delta_m must be non-negative, got {delta_m}")));
        }
        Ok(Self { gamma_s, gamma_l, delta_m, label: label.into() })
    }

    /// Constants of a named preset. `custom` carries no constants of its own;
    /// use [`MesonParameters::resolve`] to supply them.
    pub fn preset(preset: Preset) -> Result<Self> {
        let name = preset.name();
        match preset {
            Preset::KaonPaper => Self::new(1.0, 1.0 / KAON_PAPER_WIDTH_RATIO, KAON_PAPER_DELTA_M, name),
            Preset::KaonPdg => Self::new(1.0, 1.0 / KAON_PDG_WIDTH_RATIO, KAON_PDG_DELTA_M, name),
            Preset::BMeson => Self::new(1.0, 1.0, B_MESON_DELTA_M, name),
            Preset::Custom => {
                Err(Error::Config("the custom preset needs explicit gamma_S, gamma_L and delta_m".into()))
            }
        }
    }

    /// Parses a preset name and returns its constants.
    pub fn by_name(name: &str) -> Result<Self> {
        Self::preset(name.parse()?)
    }

    /// Starts from `preset` and replaces whichever constants are given.
    /// For `custom` all three must be supplied.
    pub fn resolve(
        preset: Preset,
        gamma_s: Option<f64>,
        gamma_l: Option<f64>,
        delta_m: Option<f64>,
    ) -> Result<Self> {
        if preset == Preset::Custom {
            return match (gamma_s, gamma_l, delta_m) {
                (Some(s), Some(l), Some(d)) => Self::new(s, l, d, preset.name()),
                _ => Self::preset(preset),
            };
        }
        let base = Self::preset(preset)?;
        let overridden = gamma_s.is_some() || gamma_l.is_some() || delta_m.is_some();
        let label =
            if overridden { format!("{}+overrides", preset.name()) } else { preset.name().to_string() };
        Self::new(
            gamma_s.unwrap_or(base.gamma_s),
            gamma_l.unwrap_or(base.gamma_l),
            delta_m.unwrap_or(base.delta_m),
            label,
        )
    }

    pub fn gamma_s(&self) -> f64 {
        self.gamma_s
    }

    pub fn gamma_l(&self) -> f64 {
        self.gamma_l
    }

    pub fn delta_m(&self) -> f64 {
        self.delta_m
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Mean width `(Γ_S + Γ_L)/2`.
    pub fn gamma_mean(&self) -> f64 {
        0.5 * (self.gamma_s + self.gamma_l)
    }

    pub fn tau_s(&self) -> f64 {
        1.0 / self.gamma_s
    }

    pub fn tau_l(&self) -> f64 {
        1.0 / self.gamma_l
    }

    /// Oscillation-to-decay ratio `Δm/Γ`.
    pub fn x(&self) -> f64 {
        self.delta_m / self.gamma_mean()
    }

    /// Multiplies every rate by `scale`. Dimensionless results are unchanged
    /// when all times are divided by the same factor.
    pub fn rescaled(&self, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Config(format!("unit scale must be positive, got {scale}")));
        }
        Self::new(
            self.gamma_s * scale,
            self.gamma_l * scale,
            self.delta_m * scale,
            format!("{}*{scale}", self.label),
        )
    }

    /// Copy with a different mass difference, keeping the widths.
    pub fn with_delta_m(&self, delta_m: f64) -> Result<Self> {
        Self::new(self.gamma_s, self.gamma_l, delta_m, self.label.clone())
    }

    /// Copy with a different long-lived width, keeping the rest.
    pub fn with_gamma_l(&self, gamma_l: f64) -> Result<Self> {
        Self::new(self.gamma_s, gamma_l, self.delta_m, self.label.clone())
    }
}

impl Default for MesonParameters {
    fn default() -> Self {
        Self::preset(Preset::KaonPaper).expect("kaon-paper preset is valid")
    }
}
