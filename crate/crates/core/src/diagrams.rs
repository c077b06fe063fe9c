// Copyright 2026 The kaonbell Authors
// SPDX-License-Identifier: Apache-2.0

//! Plot-ready series: purity–concurrence trajectories, two-qubit reference
//! curves, `S` along a time path and single-kaon purity curves.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bell_chsh::{s_value, BellConfiguration, EvalPath};
use crate::bipartite::{evolve_bipartite, normalize_purity, PureTwoKaonState};
use crate::entanglement::{wootters_concurrence, wootters_concurrence_normalized};
use crate::error::{domain, Error, Result};
use crate::exec::Exec;
use crate::format::csv_table;
use crate::linalg::{c, Mat4, ZERO};
use crate::params::MesonParameters;
use crate::single_kaon::{purity_single, SingleKaonInitial};

/// Dimension used to normalize two-qubit purities.
pub const QUBIT_PAIR_DIMENSION: usize = 4;

/// Which detection times follow the sweep parameter `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// `t_l = t_r = t`.
    Equal,
    /// `t_l = 0`, `t_r = t`.
    LeftZero,
    /// `t_l = 0.3`, `t_r = t`.
    LeftShifted,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::Equal, Scenario::LeftZero, Scenario::LeftShifted];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Equal => "equal",
            Scenario::LeftZero => "left-zero",
            Scenario::LeftShifted => "left-0.3",
        }
    }

    /// `(t_l, t_r)` at sweep parameter `t`.
    pub fn times(self, t: f64) -> (f64, f64) {
        match self {
            Scenario::Equal => (t, t),
            Scenario::LeftZero => (0.0, t),
            Scenario::LeftShifted => (0.3, t),
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal" | "equal-times" => Ok(Scenario::Equal),
            "left-zero" => Ok(Scenario::LeftZero),
            "left-0.3" => Ok(Scenario::LeftShifted),
            other => Err(Error::Config(format!("invalid scenario '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    /// Normalized with `d = 16`.
    pub purity_norm: f64,
    /// Wootters concurrence of the unnormalized surviving block.
    pub concurrence_raw: f64,
    /// Same block rescaled to unit trace first.
    pub concurrence_renorm: f64,
}

/// Number of samples `floor(t_end/step) + 1`, tolerant of round-off in the ratio.
pub fn grid_len(t_end: f64, step: f64) -> Result<usize> {
    if !(step.is_finite() && step > 0.0) {
        return Err(domain(format!("step must be positive, got {step}")));
    }
    if !(t_end.is_finite() && t_end >= step) {
        return Err(domain(format!("t_end must be at least step, got {t_end}")));
    }
    Ok((t_end / step * (1.0 + 1e-12)).floor() as usize + 1)
}

pub fn trajectory(
    psi0: &PureTwoKaonState,
    scenario: Scenario,
    t_end: f64,
    step: f64,
    params: &MesonParameters,
) -> Result<Vec<TrajectoryPoint>> {
    trajectory_with(psi0, scenario, t_end, step, params, Exec::default())
}

pub fn trajectory_with(
    psi0: &PureTwoKaonState,
    scenario: Scenario,
    t_end: f64,
    step: f64,
    params: &MesonParameters,
    exec: Exec,
) -> Result<Vec<TrajectoryPoint>> {
    let n = grid_len(t_end, step)?;
    exec.map(n, |k| {
        let t = k as f64 * step;
        let (t_l, t_r) = scenario.times(t);
        let state = evolve_bipartite(psi0, t_l, t_r, params)?;
        Ok(TrajectoryPoint {
            t,
            purity_norm: state.purity().normalized,
            concurrence_raw: wootters_concurrence(&state.ssss)?.value,
            concurrence_renorm: wootters_concurrence_normalized(&state.ssss)?,
        })
    })
    .into_iter()
    .collect()
}

/// A point in the (normalized purity, concurrence) plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub purity_norm: f64,
    pub concurrence: f64,
}

/// `p·|ψ⁻⟩⟨ψ⁻| + (1 − p)·𝟙/4` for `p ∈ [1/3, 1]`, evenly spaced in `p`.
pub fn werner_curve(n_points: usize) -> Result<Vec<CurvePoint>> {
    check_points(n_points)?;
    Ok((0..n_points)
        .map(|k| {
            let p = 1.0 / 3.0 + (2.0 / 3.0) * k as f64 / (n_points - 1) as f64;
            CurvePoint {
                purity_norm: normalize_purity((1.0 + 3.0 * p * p) / 4.0, QUBIT_PAIR_DIMENSION),
                concurrence: ((3.0 * p - 1.0) / 2.0).max(0.0),
            }
        })
        .collect())
}

/// Maximally entangled mixed states, evenly spaced in concurrence on `[0, 1]`.
pub fn mems_curve(n_points: usize) -> Result<Vec<CurvePoint>> {
    check_points(n_points)?;
    Ok((0..n_points)
        .map(|k| {
            let conc = k as f64 / (n_points - 1) as f64;
            CurvePoint { purity_norm: mems_purity_norm(conc), concurrence: conc }
        })
        .collect())
}

fn check_points(n: usize) -> Result<()> {
    if n < 2 {
        return Err(domain(format!("need at least 2 points, got {n}")));
    }
    Ok(())
}

fn mems_g(conc: f64) -> f64 {
    if conc >= 2.0 / 3.0 {
        conc / 2.0
    } else {
        1.0 / 3.0
    }
}

/// Explicit MEMS density matrix with concurrence `conc`.
pub fn mems_matrix(conc: f64) -> Mat4 {
    let g = mems_g(conc);
    let mut m = Mat4::from_element(ZERO);
    m[(0, 0)] = c(g);
    m[(3, 3)] = c(g);
    m[(1, 1)] = c(1.0 - 2.0 * g);
    m[(0, 3)] = c(conc / 2.0);
    m[(3, 0)] = c(conc / 2.0);
    m
}

/// Normalized purity of the MEMS with concurrence `conc`.
pub fn mems_purity_norm(conc: f64) -> f64 {
    let g = mems_g(conc);
    let raw = 2.0 * g * g + (1.0 - 2.0 * g).powi(2) + conc * conc / 2.0;
    normalize_purity(raw, QUBIT_PAIR_DIMENSION)
}

/// Normalized purity of the Werner state with concurrence `conc > 0`.
pub fn werner_purity_norm(conc: f64) -> f64 {
    let p = (2.0 * conc + 1.0) / 3.0;
    normalize_purity((1.0 + 3.0 * p * p) / 4.0, QUBIT_PAIR_DIMENSION)
}

/// Times along `u ↦ u·times_opt` for `u ∈ [0, u_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimePath {
    pub times_opt: [f64; 4],
    pub u_max: f64,
    pub n_points: usize,
}

impl TimePath {
    pub fn scaled(times_opt: [f64; 4]) -> Self {
        Self { times_opt, u_max: 3.0, n_points: 301 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.u_max.is_finite() && self.u_max > 0.0) || self.n_points < 2 {
            return Err(domain("invalid time path: need u_max > 0 and at least 2 points"));
        }
        if self.times_opt.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(domain("invalid time path: times must be finite and non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SPoint {
    pub u: f64,
    pub times: [f64; 4],
    pub s: f64,
}

pub fn s_curve(psi0: &PureTwoKaonState, path: &TimePath, params: &MesonParameters) -> Result<Vec<SPoint>> {
    path.validate()?;
    (0..path.n_points)
        .map(|k| {
            let u = path.u_max * k as f64 / (path.n_points - 1) as f64;
            let times = path.times_opt.map(|t| u * t);
            let cfg = BellConfiguration::strangeness(times)?;
            Ok(SPoint { u, times, s: s_value(psi0, &cfg, params, EvalPath::Closed)? })
        })
        .collect()
}

/// Single-kaon purity `(t, Tr ρ²)` on the grid `0, step, …`.
pub fn purity_curve(
    init: &SingleKaonInitial,
    t_end: f64,
    step: f64,
    params: &MesonParameters,
) -> Result<Vec<(f64, f64)>> {
    let n = grid_len(t_end, step)?;
    (0..n)
        .map(|k| {
            let t = k as f64 * step;
            Ok((t, purity_single(init, t, params)?))
        })
        .collect()
}

/// Concurrence column used in a comparison against a reference curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConcurrenceConvention {
    Raw,
    Renormalized,
}

impl ConcurrenceConvention {
    pub fn pick(self, p: &TrajectoryPoint) -> f64 {
        match self {
            Self::Raw => p.concurrence_raw,
            Self::Renormalized => p.concurrence_renorm,
        }
    }
}

/// Trajectory points whose purity lies below `reference(C)` at their
/// concurrence. Points with vanishing concurrence are skipped.
pub fn points_below<'a>(
    points: &'a [TrajectoryPoint],
    convention: ConcurrenceConvention,
    reference: impl Fn(f64) -> f64 + 'a,
) -> impl Iterator<Item = &'a TrajectoryPoint> + 'a {
    points.iter().filter(move |p| {
        let conc = convention.pick(p);
        conc > 1e-9 && conc <= 1.0 && p.purity_norm < reference(conc) - 1e-12
    })
}

pub fn trajectory_csv(points: &[TrajectoryPoint]) -> String {
    csv_table(
        &["t", "purity_norm", "concurrence_raw", "concurrence_renorm"],
        points.iter().map(|p| vec![p.t, p.purity_norm, p.concurrence_raw, p.concurrence_renorm]),
    )
}

pub fn curve_csv(points: &[CurvePoint]) -> String {
    csv_table(&["purity_norm", "concurrence"], points.iter().map(|p| vec![p.purity_norm, p.concurrence]))
}

pub fn s_curve_csv(points: &[SPoint]) -> String {
    csv_table(
        &["u", "t1", "t2", "t3", "t4", "S"],
        points.iter().map(|p| {
            let mut row = vec![p.u];
            row.extend(p.times);
            row.push(p.s);
            row
        }),
    )
}
