// Copyright 2026 The kaonbell Authors
// SPDX-License-Identifier: Apache-2.0

//! CHSH functional with detection times and quasi-spins as settings.
//!
//! `S = |E(k_n,t₁; k_m,t₂) − E(k_n,t₁; k_m',t₃)| + |E(k_n',t₄; k_m,t₂) + E(k_n',t₄; k_m',t₃)|`.
//! Alice (left) picks between `(k_n, t₁)` and `(k_n', t₄)`, Bob (right)
//! between `(k_m, t₂)` and `(k_m', t₃)`. Local realism bounds `S` by 2.

use serde::{Deserialize, Serialize};

use nalgebra::{Matrix4, Vector2};

use crate::bipartite::{evolve_bipartite, strangeness_correlation, PureTwoKaonState};
use crate::error::{check_time, Error, Result};
use crate::linalg::{kron, Mat2, Mat4, C64};
use crate::params::MesonParameters;
use crate::single_kaon::QuasiSpin;

/// Local-realistic bound of the CHSH functional.
pub const LOCAL_BOUND: f64 = 2.0;

/// Reference detection times for [`PureTwoKaonState::xi`].
pub const XI_TIMES: [f64; 4] = [0.0, 0.0, 5.77, 5.77];
/// Reference detection times for [`PureTwoKaonState::chi`].
pub const CHI_TIMES: [f64; 4] = [1.79, 1.79, 0.0, 0.0];

/// Reference times for a named state, if it has any.
pub fn reference_times(name: &str) -> Option<[f64; 4]> {
    match name {
        "xi" => Some(XI_TIMES),
        "chi" => Some(CHI_TIMES),
        _ => None,
    }
}

/// Settings of a CHSH test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellConfiguration {
    /// `[t₁, t₂, t₃, t₄]`.
    pub times: [f64; 4],
    /// `[k_n, k_m, k_n', k_m']`.
    pub quasispins: [QuasiSpin; 4],
}

impl BellConfiguration {
    /// Antikaon detection on every arm.
    pub fn strangeness(times: [f64; 4]) -> Result<Self> {
        Self::new(times, [QuasiSpin::antikaon(); 4])
    }

    pub fn new(times: [f64; 4], quasispins: [QuasiSpin; 4]) -> Result<Self> {
        for (k, &t) in times.iter().enumerate() {
            check_time(t, &format!("t{}", k + 1))?;
        }
        Ok(Self { times, quasispins })
    }

    /// True when every quasi-spin is `K̄⁰` up to a phase.
    pub fn is_strangeness(&self) -> bool {
        self.quasispins.iter().all(|q| q.alpha.norm() < 1e-12 && (q.beta.norm() - 1.0).abs() < 1e-12)
    }
}

/// Which route computes the correlations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalPath {
    /// Closed-form strangeness correlation; antikaon quasi-spins only.
    #[default]
    Closed,
    /// Evolved density matrix with explicit projectors.
    Matrix,
}

impl std::str::FromStr for EvalPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed" => Ok(EvalPath::Closed),
            "matrix" => Ok(EvalPath::Matrix),
            other => Err(Error::Config(format!("unknown evaluation path `{other}`"))),
        }
    }
}

/// `S` from four correlations `[E(t₁,t₂), E(t₁,t₃), E(t₄,t₂), E(t₄,t₃)]`.
#[inline]
pub fn chsh_combination(e: [f64; 4]) -> f64 {
    (e[0] - e[1]).abs() + (e[2] + e[3]).abs()
}

/// CHSH value of the strangeness inequality or, on the matrix path, of the
/// configured quasi-spins.
pub fn s_value(
    psi0: &PureTwoKaonState,
    cfg: &BellConfiguration,
    params: &MesonParameters,
    path: EvalPath,
) -> Result<f64> {
    match path {
        EvalPath::Closed => {
            if !cfg.is_strangeness() {
                return Err(Error::Unsupported(
                    "the closed-form path only handles antikaon quasi-spins".into(),
                ));
            }
            for &t in &cfg.times {
                check_time(t, "detection time")?;
            }
            Ok(s_strangeness(psi0, &cfg.times, params))
        }
        EvalPath::Matrix => s_general(psi0, cfg, params),
    }
}

/// CHSH value for arbitrary quasi-spins through the evolved two-kaon state.
pub fn s_general(psi0: &PureTwoKaonState, cfg: &BellConfiguration, params: &MesonParameters) -> Result<f64> {
    let [t1, t2, t3, t4] = cfg.times;
    let [kn, km, kn2, km2] = cfg.quasispins.map(|q| q.projector());
    let corr = |tl: f64, tr: f64, pl, pr| evolve_bipartite(psi0, tl, tr, params)?.expectation(pl, pr);
    Ok(chsh_combination([
        corr(t1, t2, &kn, &km)?,
        corr(t1, t3, &kn, &km2)?,
        corr(t4, t2, &kn2, &km)?,
        corr(t4, t3, &kn2, &km2)?,
    ]))
}

/// Unchecked closed-form strangeness `S`.
#[inline]
pub(crate) fn s_strangeness(psi0: &PureTwoKaonState, times: &[f64; 4], params: &MesonParameters) -> f64 {
    let [t1, t2, t3, t4] = *times;
    chsh_combination([
        strangeness_correlation(psi0, t1, t2, params),
        strangeness_correlation(psi0, t1, t3, params),
        strangeness_correlation(psi0, t4, t2, params),
        strangeness_correlation(psi0, t4, t3, params),
    ])
}

/// Heisenberg-picture strangeness observable of one kaon at time `t`,
/// acting on initial mass-basis amplitudes. Its expectation is
/// `P(NO) − P(YES)` for antikaon detection, decays counting as NO.
pub fn strangeness_observable(t: f64, params: &MesonParameters) -> Mat2 {
    let (a_s, a_l) = QuasiSpin::antikaon().mass_amplitudes();
    let u_s = (-0.5 * params.gamma_s() * t).exp();
    let u_l = C64::new(-0.5 * params.gamma_l() * t, -params.delta_m() * t).exp();
    let v = Vector2::new(a_s * u_s, a_l * u_l.conj());
    Mat2::identity() - (v * v.adjoint()) * C64::new(2.0, 0.0)
}

/// Best CHSH value over all initial pure states for fixed times, with the
/// maximizing state. `S` is a sum of two absolute values of Hermitian
/// quadratic forms, so the optimum over states is the top eigenvalue of one
/// of four signed combinations. `real_amplitudes` restricts the search to
/// states with all phases zero.
pub fn max_s_over_states(
    times: &[f64; 4],
    params: &MesonParameters,
    real_amplitudes: bool,
) -> (f64, PureTwoKaonState) {
    let z = times.map(|t| strangeness_observable(t, params));
    let a = kron(&z[0], &(z[1] - z[2]));
    let b = kron(&z[3], &(z[1] + z[2]));
    let mut best: Option<(f64, [C64; 4])> = None;
    for (s1, s2) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
        let w: Mat4 = a * C64::new(s1, 0.0) + b * C64::new(s2, 0.0);
        let (value, vec) = if real_amplitudes {
            let re: Matrix4<f64> = w.map(|x| x.re);
            let eig = re.symmetric_eigen();
            let k = eig.eigenvalues.imax();
            let v = eig.eigenvectors.column(k);
            (eig.eigenvalues[k], std::array::from_fn(|i| C64::new(v[i], 0.0)))
        } else {
            let eig = w.symmetric_eigen();
            let k = eig.eigenvalues.imax();
            let v = eig.eigenvectors.column(k);
            (eig.eigenvalues[k], std::array::from_fn(|i| v[i]))
        };
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, vec));
        }
    }
    let (value, amps) = best.expect("four sign patterns");
    (value, state_from_eigenvector(amps, real_amplitudes))
}

/// Gauge-fixed state from a unit eigenvector. Real vectors keep signed
/// amplitudes with zero phases.
fn state_from_eigenvector(amps: [C64; 4], real: bool) -> PureTwoKaonState {
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if real {
        return PureTwoKaonState { r: amps.map(|z| z.re / norm), phi: [0.0; 4] };
    }
    // Phases are given relative to the fourth amplitude, or to the largest
    // one when the fourth vanishes.
    let k = if amps[3].norm() > 1e-12 * norm {
        3
    } else {
        (0..4).max_by(|&i, &j| amps[i].norm().total_cmp(&amps[j].norm())).unwrap_or(3)
    };
    let reference = amps[k].arg();
    let r = amps.map(|z| z.norm() / norm);
    let phi = amps.map(|z| crate::bipartite::wrap_phase(z.arg() - reference));
    PureTwoKaonState { r, phi: [phi[0], phi[1], phi[2], 0.0] }
}
