// Copyright 2026 The kaonbell Authors
// SPDX-License-Identifier: Apache-2.0

//! `kaonbell` command-line tool.
//!
//! Exit status is 0 on success, 1 for numerical or domain failures (and
//! failed checks under `reproduce --strict`), 2 for usage errors.

mod args;
mod commands;
mod config;
mod output;

use std::fmt;
use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;

/// Error carrying the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn domain(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<kaonbell::Error> for Failure {
    fn from(e: kaonbell::Error) -> Self {
        match e {
            kaonbell::Error::Domain(_) => Self::domain(e.to_string()),
            kaonbell::Error::Config(_) | kaonbell::Error::Unsupported(_) => Self::usage(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("kaonbell: {f}");
            ExitCode::from(f.code)
        }
    }
}
