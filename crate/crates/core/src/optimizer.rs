// Copyright 2026 The kaonbell Authors
// SPDX-License-Identifier: Apache-2.0

//! Multi-start maximization of the strangeness CHSH functional.
//!
//! Times are folded into `[0, t_max]` by reflection, which makes the search
//! unconstrained. The state enters in one of two ways:
//!
//! * [`LocalMethod::Profile`] (default) maximizes over states exactly for
//!   each set of times, leaving a four-dimensional simplex search.
//! * [`LocalMethod::Simplex`] searches amplitudes and phases directly.
//!   Amplitudes use three hyperspherical angles, so every decoded point is
//!   normalized, and phases are periodic.
//!
//! Each start runs an adaptive Nelder–Mead simplex with restarts. Starts
//! come from a randomly shifted Halton sequence and are independent, so
//! they may run in parallel without affecting the result.

use std::cmp::Ordering;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bell_chsh::{max_s_over_states, s_strangeness, s_value, BellConfiguration, EvalPath};
use crate::bipartite::{wrap_phase, PureTwoKaonState};
use crate::error::{domain, Result};
use crate::exec::Exec;
use crate::params::MesonParameters;
use crate::simplex::nelder_mead;

/// Default time box in units of `τ_S`.
pub const DEFAULT_T_MAX: f64 = 50.0;

/// What the optimizer is allowed to vary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SearchMode {
    /// Amplitudes and times; phases free or frozen at zero.
    Full { free_phases: bool },
    /// Times only, for a given initial state.
    FixedState { state: PureTwoKaonState },
}

/// How the initial state is searched in [`SearchMode::Full`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalMethod {
    /// Exact maximization over states at every simplex vertex.
    #[default]
    Profile,
    /// Simplex over angles, phases and times together.
    Simplex,
}

impl std::str::FromStr for LocalMethod {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "profile" => Ok(Self::Profile),
            "simplex" => Ok(Self::Simplex),
            other => Err(crate::Error::Config(format!("unknown local method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub mode: SearchMode,
    pub t_max: f64,
    pub method: LocalMethod,
}

impl SearchSpace {
    pub fn full(free_phases: bool, t_max: f64) -> Self {
        Self { mode: SearchMode::Full { free_phases }, t_max, method: LocalMethod::default() }
    }

    pub fn fixed_state(state: PureTwoKaonState, t_max: f64) -> Self {
        Self { mode: SearchMode::FixedState { state }, t_max, method: LocalMethod::default() }
    }

    pub fn with_method(self, method: LocalMethod) -> Self {
        Self { method, ..self }
    }

    /// Number of search coordinates.
    pub fn dimension(&self) -> usize {
        match (self.mode, self.method) {
            (SearchMode::Full { free_phases: true }, LocalMethod::Simplex) => 10,
            (SearchMode::Full { free_phases: false }, LocalMethod::Simplex) => 7,
            _ => 4,
        }
    }

    /// `S` at search coordinates `x` with the decoded state and times.
    pub fn evaluate(&self, x: &[f64], params: &MesonParameters) -> (f64, PureTwoKaonState, [f64; 4]) {
        match (self.mode, self.method) {
            (SearchMode::Full { free_phases }, LocalMethod::Profile) => {
                let times = self.decode_times(x);
                let (s, state) = max_s_over_states(&times, params, !free_phases);
                (s, state, times)
            }
            _ => {
                let (state, times) = self.decode(x);
                (s_strangeness(&state, &times, params), state, times)
            }
        }
    }

    fn decode_times(&self, x: &[f64]) -> [f64; 4] {
        let n = x.len();
        std::array::from_fn(|k| fold_time(x[n - 4 + k], self.t_max))
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(domain(format!("empty search space: t_max = {}", self.t_max)));
        }
        Ok(())
    }

    /// Maps simplex coordinates to a normalized state and four times. In
    /// profile mode the state part is not searched and `x` holds times only.
    pub fn decode(&self, x: &[f64]) -> (PureTwoKaonState, [f64; 4]) {
        let times = self.decode_times(x);
        let state = match self.mode {
            SearchMode::FixedState { state } => state,
            SearchMode::Full { .. } if x.len() == 4 => PureTwoKaonState { r: [0.5; 4], phi: [0.0; 4] },
            SearchMode::Full { free_phases } => {
                let (s1, c1) = x[0].sin_cos();
                let (s2, c2) = x[1].sin_cos();
                let (s3, c3) = x[2].sin_cos();
                let r = [c1, s1 * c2, s1 * s2 * c3, s1 * s2 * s3];
                let phi = if free_phases {
                    [wrap_phase(x[3]), wrap_phase(x[4]), wrap_phase(x[5]), 0.0]
                } else {
                    [0.0; 4]
                };
                PureTwoKaonState { r, phi }
            }
        };
        (state, times)
    }

    /// Maps a point of the unit cube onto the start box.
    fn start_point(&self, u: &[f64]) -> Vec<f64> {
        let n = self.dimension();
        let mut x = Vec::with_capacity(n);
        if let (SearchMode::Full { free_phases }, LocalMethod::Simplex) = (self.mode, self.method) {
            x.push(PI * u[0]);
            x.push(PI * u[1]);
            x.push(2.0 * PI * u[2]);
            if free_phases {
                x.extend(u[3..6].iter().map(|v| PI * (2.0 * v - 1.0)));
            }
        }
        // Correlations freeze out after a few K_S lifetimes and the plateau
        // traps the simplex, so starts crowd towards short times.
        x.extend(u[n - 4..n].iter().map(|v| self.t_max * v.powi(4)));
        x
    }

    fn initial_steps(&self) -> Vec<f64> {
        let n = self.dimension();
        let mut steps = vec![0.4; n - 4];
        steps.extend(std::iter::repeat_n((0.1 * self.t_max).min(1.0), 4));
        steps
    }
}

/// Reflects `t` into `[0, t_max]`.
fn fold_time(t: f64, t_max: f64) -> f64 {
    let period = 2.0 * t_max;
    let m = t.rem_euclid(period);
    if m > t_max {
        period - m
    } else {
        m
    }
}

/// Total evaluation budget split over independent starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub starts: usize,
    pub evaluations: usize,
}

impl Budget {
    pub fn new(starts: usize, evaluations: usize) -> Self {
        Self { starts, evaluations }
    }

    fn per_start(&self) -> usize {
        (self.evaluations / self.starts).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best_s: f64,
    pub best_state: PureTwoKaonState,
    pub best_times: [f64; 4],
    /// `S` recomputed at the optimum through the evolved density matrix.
    pub matrix_s: f64,
    pub n_starts: usize,
    pub n_evals: usize,
    pub budget_exhausted: bool,
    pub seed: u64,
    pub t_max: f64,
    pub mode: SearchMode,
    /// Best value reached by each start, in start order.
    pub history: Vec<f64>,
}

struct StartOutcome {
    value: f64,
    point: Vec<f64>,
    evals: usize,
    exhausted: bool,
}

/// Maximizes `S` over the search space using the parallel strategy.
pub fn maximize_s(
    space: &SearchSpace,
    params: &MesonParameters,
    budget: Budget,
    seed: u64,
) -> Result<OptimizationResult> {
    maximize_s_with(space, params, budget, seed, Exec::default())
}

/// Maximizes `S` over detection times for a fixed initial state.
pub fn maximize_s_fixed_state(
    psi0: &PureTwoKaonState,
    params: &MesonParameters,
    budget: Budget,
    seed: u64,
    t_max: f64,
) -> Result<OptimizationResult> {
    maximize_s(&SearchSpace::fixed_state(*psi0, t_max), params, budget, seed)
}

/// [`maximize_s`] with an explicit execution strategy. The result does not
/// depend on the strategy.
pub fn maximize_s_with(
    space: &SearchSpace,
    params: &MesonParameters,
    budget: Budget,
    seed: u64,
    exec: Exec,
) -> Result<OptimizationResult> {
    space.validate()?;
    if budget.starts == 0 || budget.evaluations == 0 {
        return Err(domain("budget needs at least one start and one evaluation"));
    }
    let dim = space.dimension();
    let starts = halton_starts(budget.starts, dim, seed);
    let per_start = budget.per_start();
    let steps = space.initial_steps();

    let outcomes = exec.map(budget.starts, |k| {
        let x0 = space.start_point(&starts[k]);
        let objective = |x: &[f64]| -space.evaluate(x, params).0;
        let run = nelder_mead(objective, &x0, &steps, per_start);
        StartOutcome { value: -run.f_best, point: run.x_best, evals: run.evals, exhausted: run.exhausted }
    });

    let best =
        outcomes.iter().max_by(|a, b| compare_outcomes(space, params, a, b)).expect("at least one start");
    let (_, best_state, best_times) = space.evaluate(&best.point, params);
    let cfg = BellConfiguration::strangeness(best_times)?;
    let matrix_s = s_value(&best_state, &cfg, params, EvalPath::Matrix)?;

    Ok(OptimizationResult {
        best_s: best.value,
        best_state,
        best_times,
        matrix_s,
        n_starts: budget.starts,
        n_evals: outcomes.iter().map(|o| o.evals).sum(),
        budget_exhausted: outcomes.iter().any(|o| o.exhausted),
        seed,
        t_max: space.t_max,
        mode: space.mode,
        history: outcomes.iter().map(|o| o.value).collect(),
    })
}

/// Orders by value, then prefers the lexicographically smaller decoded point.
fn compare_outcomes(
    space: &SearchSpace,
    params: &MesonParameters,
    a: &StartOutcome,
    b: &StartOutcome,
) -> Ordering {
    a.value.total_cmp(&b.value).then_with(|| {
        let key = |o: &StartOutcome| {
            let (_, s, t) = space.evaluate(&o.point, params);
            s.r.into_iter().chain(s.phi).chain(t).collect::<Vec<_>>()
        };
        let (ka, kb) = (key(a), key(b));
        for (x, y) in ka.iter().zip(&kb) {
            match x.total_cmp(y) {
                Ordering::Equal => continue,
                other => return other.reverse(),
            }
        }
        Ordering::Equal
    })
}

const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % b) as f64 * inv;
        i /= b;
        inv /= base as f64;
    }
    out
}

/// Halton points with a seed-dependent Cranley–Patterson shift.
pub fn halton_starts(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(dim <= PRIMES.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
    (0..n)
        .map(|k| (0..dim).map(|d| (radical_inverse(k as u64 + 1, PRIMES[d]) + shift[d]).fract()).collect())
        .collect()
}

/// Uniform random search over times for a fixed state, followed by simplex
/// refinement of the best samples.
pub fn random_time_search(
    psi0: &PureTwoKaonState,
    params: &MesonParameters,
    samples: usize,
    refine: usize,
    t_max: f64,
    seed: u64,
) -> Result<(f64, [f64; 4])> {
    let space = SearchSpace::fixed_state(*psi0, t_max);
    space.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<(f64, [f64; 4])> = (0..samples)
        .map(|_| {
            let t: [f64; 4] = std::array::from_fn(|_| t_max * rng.gen::<f64>().powi(4));
            (s_strangeness(psi0, &t, params), t)
        })
        .collect();
    pool.sort_by(|a, b| b.0.total_cmp(&a.0));
    pool.truncate(refine.max(1));
    let steps = space.initial_steps();
    let mut best = pool[0];
    for (_, t0) in pool {
        let run = nelder_mead(|x| -s_strangeness(psi0, &space.decode(x).1, params), &t0, &steps, 20_000);
        if -run.f_best > best.0 {
            best = (-run.f_best, space.decode(&run.x_best).1);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoded_states_are_normalized() {
        let space = SearchSpace::full(true, 10.0).with_method(LocalMethod::Simplex);
        let x = [0.3, -2.0, 7.0, 1.0, -4.0, 9.0, -3.0, 12.0, 25.0, 4.0];
        let (s, t) = space.decode(&x);
        let n: f64 = s.r.iter().map(|r| r * r).sum();
        assert!((n - 1.0).abs() < 1e-15);
        assert!(t.iter().all(|&t| (0.0..=10.0).contains(&t)));
        assert_eq!(t, [3.0, 8.0, 5.0, 4.0]);
        assert_eq!(s.phi[3], 0.0);
    }

    #[test]
    fn fold_time_reflects() {
        assert_eq!(fold_time(-1.0, 5.0), 1.0);
        assert_eq!(fold_time(6.0, 5.0), 4.0);
        assert_eq!(fold_time(11.0, 5.0), 1.0);
        assert_eq!(fold_time(2.5, 5.0), 2.5);
    }

    #[test]
    fn halton_points_lie_in_unit_cube() {
        let pts = halton_starts(64, 10, 7);
        assert!(pts.iter().flatten().all(|&u| (0.0..1.0).contains(&u)));
        assert_eq!(pts, halton_starts(64, 10, 7));
        assert_ne!(pts, halton_starts(64, 10, 8));
    }

    #[test]
    fn rejects_empty_space_and_budget() {
        let p = MesonParameters::default();
        assert!(maximize_s(&SearchSpace::full(false, 0.0), &p, Budget::new(1, 10), 0).is_err());
        assert!(maximize_s(&SearchSpace::full(false, 5.0), &p, Budget::new(0, 10), 0).is_err());
        assert!(maximize_s(&SearchSpace::full(false, 5.0), &p, Budget::new(1, 0), 0).is_err());
    }

    #[test]
    fn tiny_budget_reports_exhaustion() {
        let p = MesonParameters::default();
        let r = maximize_s(&SearchSpace::full(true, 50.0), &p, Budget::new(4, 8), 1).unwrap();
        assert!(r.budget_exhausted);
        assert_eq!(r.n_evals, 8);
        assert_eq!(r.history.len(), 4);
    }
}
