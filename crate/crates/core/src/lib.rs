// Copyright 2026 The kaonbell Authors
// SPDX-License-Identifier: Apache-2.0

//! Decaying neutral-meson pairs treated as open quantum systems.
//!
//! A single kaon lives on the four-dimensional space "surviving ⊕ final",
//! evolved by a Lindblad master equation whose only dissipator is the
//! decay. Pairs are evolved with factorized weights and two independent
//! detection times. On top of that the crate computes purity, Wootters
//! concurrence, the PPT spectrum, strangeness expectation values and the
//! CHSH functional, and maximizes the latter over initial states and
//! detection times.
//!
//! All times are measured in units of `1/gamma_s` when the standard
//! presets are used.

pub mod bell_chsh;
pub mod bipartite;
pub mod diagrams;
pub mod entanglement;
mod error;
pub mod exec;
pub mod format;
pub mod linalg;
pub mod optimizer;
pub mod params;
pub mod reproduce;
pub mod simplex;
pub mod single_kaon;

pub use bell_chsh::{
    max_s_over_states, s_general, s_value, BellConfiguration, EvalPath, CHI_TIMES, XI_TIMES,
};
pub use bipartite::{
    bell_state, evolve_bipartite, expectation_closed_form, expectation_matrix, BellState,
    BipartiteEvolvedState, PureTwoKaonState,
};
pub use entanglement::{
    concurrence_closed_form, eof_from_concurrence, ppt_min_eigenvalue, wootters_concurrence,
    ConcurrenceResult,
};
pub use error::{Error, Result};
pub use exec::Exec;
pub use optimizer::{
    maximize_s, maximize_s_fixed_state, Budget, LocalMethod, OptimizationResult, SearchSpace,
};
pub use params::{MesonParameters, Preset};
pub use single_kaon::{
    evolve_single, integrate_master_equation, purity_single, EvolvedSingleState, OffDiagonalMode, QuasiSpin,
    SingleKaonInitial,
};
