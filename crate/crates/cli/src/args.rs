// Copyright 2026 The kaonbell Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "kaonbell",
    version,
    about = "Decaying neutral-meson pairs: purity, entanglement and Bell tests"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Flat key-value TOML file; command-line flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// kaon-paper, kaon-pdg, b-meson or custom
    #[arg(long, global = true)]
    pub preset: Option<String>,
    #[arg(long = "gamma-s", global = true)]
    pub gamma_s: Option<f64>,
    #[arg(long = "gamma-l", global = true)]
    pub gamma_l: Option<f64>,
    #[arg(long = "delta-m", global = true)]
    pub delta_m: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for the parallel parts (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file. Relative paths resolve against KAONBELL_OUT_DIR when set.
    /// Without it results go to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve one kaon and print its 4×4 density matrix
    EvolveSingle {
        #[command(flatten)]
        initial: SingleArgs,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        t: f64,
        /// Treatment of the coherence between the two final channels
        #[arg(long, visible_alias = "mode", value_enum, default_value_t = Mode::Zero)]
        offdiag: Mode,
    },
    /// Single-kaon purity on a time grid (CSV)
    PurityScan {
        #[command(flatten)]
        initial: SingleArgs,
        #[arg(long, visible_alias = "t-max")]
        t_end: Option<f64>,
        #[arg(long, conflicts_with = "steps")]
        step: Option<f64>,
        /// Number of intervals; sets the step to t_end / steps
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Correlation function E for two quasi-spins
    Expectation {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, visible_alias = "tl", default_value_t = 0.0, allow_negative_numbers = true)]
        t_l: f64,
        #[arg(long, visible_alias = "tr", default_value_t = 0.0, allow_negative_numbers = true)]
        t_r: f64,
        #[arg(long, default_value = "k0bar")]
        left: String,
        #[arg(long, default_value = "k0bar")]
        right: String,
        #[arg(long, value_enum, default_value_t = PathArg::Closed)]
        path: PathArg,
    },
    /// Concurrence, entanglement of formation and PPT spectrum of the pair
    Concurrence {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, visible_alias = "tl", default_value_t = 0.0, allow_negative_numbers = true)]
        t_l: f64,
        #[arg(long, visible_alias = "tr", default_value_t = 0.0, allow_negative_numbers = true)]
        t_r: f64,
        /// Which value fills the `concurrence` field
        #[arg(long, value_enum, default_value_t = ConcurrenceMethod::Wootters)]
        method: ConcurrenceMethod,
    },
    /// CHSH value for given detection times and quasi-spins
    BellEval {
        #[command(flatten)]
        state: StateArgs,
        /// t1,t2,t3,t4 (default: reference times of xi and chi)
        #[arg(long, value_parser = parse_numbers::<4>, allow_hyphen_values = true)]
        times: Option<[f64; 4]>,
        /// k_n,k_m,k_n',k_m' from k0, k0bar, ks, kl
        #[arg(long, value_parser = parse_names)]
        quasispins: Option<[String; 4]>,
        #[arg(long, value_enum, default_value_t = PathArg::Closed)]
        path: PathArg,
    },
    /// Multi-start maximization of the CHSH value
    BellOptimize {
        /// Optimize over times only, for this state
        #[arg(long)]
        fix_state: Option<String>,
        #[arg(long)]
        free_phases: bool,
        #[arg(long)]
        starts: Option<usize>,
        /// Total number of objective evaluations
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long, value_enum, default_value_t = MethodArg::Profile)]
        method: MethodArg,
    },
    /// Purity–concurrence trajectory of a pair (CSV)
    Trajectory {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, default_value = "equal")]
        scenario: String,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
    },
    /// Reference curves and S along a time path (CSV)
    Curves {
        #[arg(long, value_enum)]
        which: Which,
        #[arg(long)]
        points: Option<usize>,
        #[command(flatten)]
        state: StateArgs,
        /// Optimal times to scale for `--which s` (default: reference or optimized)
        #[arg(long, value_parser = parse_numbers::<4>, allow_hyphen_values = true)]
        times: Option<[f64; 4]>,
        #[arg(long, default_value_t = 3.0)]
        u_max: f64,
    },
    /// Run the reference checks and print a pass/fail table
    Reproduce {
        /// Exit with status 1 when any check fails
        #[arg(long)]
        strict: bool,
        /// Random inputs per oracle comparison
        #[arg(long)]
        samples: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct SingleArgs {
    /// k0, k0bar, ks, kl, or custom together with --rho-ss
    #[arg(long, default_value = "k0")]
    pub initial: String,
    /// Explicit ρ_SS; replaces --initial
    #[arg(long)]
    pub rho_ss: Option<f64>,
    /// Explicit ρ_SL as re,im
    #[arg(long, value_parser = parse_numbers::<2>, allow_hyphen_values = true)]
    pub rho_sl: Option<[f64; 2]>,
}

#[derive(Debug, Args)]
pub struct StateArgs {
    /// xi, chi, phi+, phi-, psi+, psi-, or a JSON file with fields r[4] and phi[4]
    #[arg(long)]
    pub state: Option<String>,
    /// Amplitudes r1..r4; replaces --state
    #[arg(long, value_parser = parse_numbers::<4>, allow_hyphen_values = true)]
    pub r: Option<[f64; 4]>,
    /// Phases phi1..phi4 for --r
    #[arg(long, value_parser = parse_numbers::<4>, allow_hyphen_values = true)]
    pub phi: Option<[f64; 4]>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Mode {
    Zero,
    #[value(alias = "formal-X")]
    FormalX,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ConcurrenceMethod {
    Wootters,
    Closed,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PathArg {
    Closed,
    Matrix,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Profile,
    Simplex,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Which {
    Mems,
    Werner,
    S,
}

/// Parses exactly `N` comma-separated numbers.
fn parse_numbers<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let values = s
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    values.try_into().map_err(|v: Vec<f64>| format!("expected {N} comma-separated numbers, got {}", v.len()))
}

fn parse_names(s: &str) -> Result<[String; 4], String> {
    let names: Vec<String> = s.split(',').map(|v| v.trim().to_string()).collect();
    names.try_into().map_err(|v: Vec<String>| format!("expected 4 comma-separated names, got {}", v.len()))
}
