// Copyright 2026 The kaonbell Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors reported by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Invalid physical constants or unknown preset/state names.
    #[error("configuration error: {0}")]
    Config(String),
    /// The requested combination of options is not supported by the chosen evaluation path.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn check_time(t: f64, what: &str) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(domain(format!("{what} must be a finite non-negative time, got {t}")))
    }
}
