// Copyright 2026 The kaonbell Authors
// SPDX-License-Identifier: Apache-2.0

//! A single neutral kaon on the enlarged space `surviving ⊕ final`.
//!
//! The surviving block is written in the mass basis `{K_S, K_L}`. The final
//! block holds the two decay channels, ordered `(from K_L, from K_S)`.
//! Coherences rotate as `⟨K_S|ρ(t)|K_L⟩ = e^{iΔm t − Γ t} ρ_SL`, the sign
//! produced by `H = diag(m_S, m_L)` with `Δm = m_L − m_S`.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{check_time, domain, Result};
use crate::linalg::{c, frobenius_sq, hermiticity_defect, Mat2, Mat4, C64, I, ZERO};
use crate::params::MesonParameters;

const STATE_TOL: f64 = 1e-12;
const PROJECTOR_TOL: f64 = 1e-10;

/// Initial single-kaon density matrix in the mass basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleKaonInitial {
    pub rho_ss: f64,
    pub rho_ll: f64,
    pub rho_sl: C64,
}

impl SingleKaonInitial {
    pub fn new(rho_ss: f64, rho_ll: f64, rho_sl: C64) -> Result<Self> {
        if !(rho_ss.is_finite() && rho_ll.is_finite() && rho_sl.re.is_finite() && rho_sl.im.is_finite()) {
            return Err(domain("initial state has non-finite entries"));
        }
        if rho_ss < -STATE_TOL || rho_ll < -STATE_TOL {
            return Err(domain(format!("populations must be non-negative ({rho_ss}, {rho_ll})")));
        }
        if (rho_ss + rho_ll - 1.0).abs() > STATE_TOL {
            return Err(domain(format!("rho_SS + rho_LL = {} != 1", rho_ss + rho_ll)));
        }
        if rho_sl.norm_sqr() > rho_ss * rho_ll + STATE_TOL {
            return Err(domain("|rho_SL|^2 exceeds rho_SS * rho_LL"));
        }
        Ok(Self { rho_ss, rho_ll, rho_sl })
    }

    /// Pure state `a_S |K_S⟩ + a_L |K_L⟩`, normalized on the way in.
    pub fn pure(a_s: C64, a_l: C64) -> Result<Self> {
        let norm = (a_s.norm_sqr() + a_l.norm_sqr()).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(domain("pure state amplitudes vanish"));
        }
        let (a_s, a_l) = (a_s / norm, a_l / norm);
        Ok(Self { rho_ss: a_s.norm_sqr(), rho_ll: a_l.norm_sqr(), rho_sl: a_s * a_l.conj() })
    }

    pub fn from_quasispin(q: &QuasiSpin) -> Self {
        let (a_s, a_l) = q.mass_amplitudes();
        Self::pure(a_s, a_l).expect("quasi-spins are normalized")
    }

    pub fn k_short() -> Self {
        Self { rho_ss: 1.0, rho_ll: 0.0, rho_sl: ZERO }
    }

    pub fn k_long() -> Self {
        Self { rho_ss: 0.0, rho_ll: 1.0, rho_sl: ZERO }
    }

    pub fn kaon() -> Self {
        Self::from_quasispin(&QuasiSpin::kaon())
    }

    pub fn antikaon() -> Self {
        Self::from_quasispin(&QuasiSpin::antikaon())
    }

    /// Incoherent mixture `ρ_SS |K_S⟩⟨K_S| + (1 − ρ_SS) |K_L⟩⟨K_L|`.
    pub fn mixed(rho_ss: f64) -> Result<Self> {
        Self::new(rho_ss, 1.0 - rho_ss, ZERO)
    }

    pub fn matrix(&self) -> Mat2 {
        Mat2::new(c(self.rho_ss), self.rho_sl, self.rho_sl.conj(), c(self.rho_ll))
    }
}

/// How the coherence between the two decay channels is filled in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OffDiagonalMode {
    /// Zero coherence between decay channels; gives the lowest purity.
    #[default]
    Zero,
    /// Coherence obtained by integrating `dρ_ff/dt = A ρ_ss A†`.
    FormalX,
}

/// Evolved single-kaon state at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolvedSingleState {
    /// Surviving block in the mass basis.
    pub ss: Mat2,
    /// Occupation of the channel fed by `K_L`.
    pub p_from_l: f64,
    /// Occupation of the channel fed by `K_S`.
    pub p_from_s: f64,
    /// `⟨from K_S|ρ|from K_L⟩`.
    pub ff_offdiag: C64,
    pub t: f64,
}

impl EvolvedSingleState {
    pub fn surviving_trace(&self) -> f64 {
        self.ss.trace().re
    }

    pub fn total_trace(&self) -> f64 {
        self.surviving_trace() + self.p_from_l + self.p_from_s
    }

    /// Full 4×4 matrix ordered `(K_S, K_L, from K_L, from K_S)`.
    pub fn density_matrix(&self) -> Mat4 {
        let mut m = Mat4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.ss);
        m[(2, 2)] = c(self.p_from_l);
        m[(3, 3)] = c(self.p_from_s);
        m[(3, 2)] = self.ff_offdiag;
        m[(2, 3)] = self.ff_offdiag.conj();
        m
    }

    /// `Tr ρ²` of the full state.
    pub fn purity(&self) -> f64 {
        frobenius_sq(&self.density_matrix())
    }
}

/// Quasi-spin `α|K⁰⟩ + β|K̄⁰⟩`, with `|K⁰⟩ = (|K_S⟩+|K_L⟩)/√2` and
/// `|K̄⁰⟩ = (−|K_S⟩+|K_L⟩)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiSpin {
    pub alpha: C64,
    pub beta: C64,
}

impl QuasiSpin {
    pub fn new(alpha: C64, beta: C64) -> Result<Self> {
        let n = alpha.norm_sqr() + beta.norm_sqr();
        if (n - 1.0).abs() > STATE_TOL {
            return Err(domain(format!("quasi-spin norm is {n}, expected 1")));
        }
        Ok(Self { alpha, beta })
    }

    /// Normalizing constructor.
    pub fn normalized(alpha: C64, beta: C64) -> Result<Self> {
        let n = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(domain("quasi-spin amplitudes vanish"));
        }
        Ok(Self { alpha: alpha / n, beta: beta / n })
    }

    pub fn kaon() -> Self {
        Self { alpha: c(1.0), beta: ZERO }
    }

    pub fn antikaon() -> Self {
        Self { alpha: ZERO, beta: c(1.0) }
    }

    pub fn k_short() -> Self {
        Self { alpha: c(FRAC_1_SQRT_2), beta: c(-FRAC_1_SQRT_2) }
    }

    pub fn k_long() -> Self {
        Self { alpha: c(FRAC_1_SQRT_2), beta: c(FRAC_1_SQRT_2) }
    }

    /// Parses `K0`, `K0bar`, `KS`, `KL` (case-insensitive).
    pub fn by_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "k0" | "kaon" => Ok(Self::kaon()),
            "k0bar" | "antikaon" => Ok(Self::antikaon()),
            "ks" => Ok(Self::k_short()),
            "kl" => Ok(Self::k_long()),
            other => Err(crate::Error::Config(format!("unknown quasi-spin `{other}`"))),
        }
    }

    /// Amplitudes `(⟨K_S|k⟩, ⟨K_L|k⟩)`.
    pub fn mass_amplitudes(&self) -> (C64, C64) {
        ((self.alpha - self.beta) * FRAC_1_SQRT_2, (self.alpha + self.beta) * FRAC_1_SQRT_2)
    }

    /// `|k⟩⟨k|` in the mass basis.
    pub fn projector(&self) -> Mat2 {
        let (s, l) = self.mass_amplitudes();
        Mat2::new(s * s.conj(), s * l.conj(), l * s.conj(), l * l.conj())
    }
}

/// Rejects matrices that are not Hermitian idempotents.
pub fn validate_projector(p: &Mat2) -> Result<()> {
    if p.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(domain("projector has non-finite entries"));
    }
    if hermiticity_defect(p) > PROJECTOR_TOL {
        return Err(domain("projector is not Hermitian"));
    }
    if (p * p - p).norm() > PROJECTOR_TOL {
        return Err(domain("projector is not idempotent"));
    }
    Ok(())
}

/// Surviving weight of the coherence `⟨K_S|·|K_L⟩` after time `t`.
#[inline]
pub(crate) fn coherence_weight(t: f64, params: &MesonParameters) -> C64 {
    (C64::new(-params.gamma_mean(), params.delta_m()) * t).exp()
}

/// Surviving weights `w_nm(t)` indexed by mass eigenstates.
pub(crate) fn surviving_weights(t: f64, params: &MesonParameters) -> Mat2 {
    let w_sl = coherence_weight(t, params);
    Mat2::new(c((-params.gamma_s() * t).exp()), w_sl, w_sl.conj(), c((-params.gamma_l() * t).exp()))
}

/// Decayed fractions `(1 − e^{−Γ_S t}, 1 − e^{−Γ_L t})` indexed by mass eigenstate.
pub(crate) fn decayed_fractions(t: f64, params: &MesonParameters) -> [f64; 2] {
    [-(-params.gamma_s() * t).exp_m1(), -(-params.gamma_l() * t).exp_m1()]
}

fn formal_x(init: &SingleKaonInitial, t: f64, params: &MesonParameters) -> C64 {
    let rate = C64::new(-params.gamma_mean(), params.delta_m());
    let decayed = -(rate * t).exp_m1_c();
    let amp = (params.gamma_s() * params.gamma_l()).sqrt();
    decayed * init.rho_sl * amp / rate
}

trait ExpM1 {
    fn exp_m1_c(self) -> C64;
}

impl ExpM1 for C64 {
    // exp(z) - 1 without cancellation for small |z|.
    fn exp_m1_c(self) -> C64 {
        let (s, co) = self.im.sin_cos();
        let em1 = self.re.exp_m1();
        // e^{a}(cos b + i sin b) - 1 = (e^a - 1) cos b - 2 sin^2(b/2) + i e^a sin b
        let half = (0.5 * self.im).sin();
        C64::new(em1 * co - 2.0 * half * half, (em1 + 1.0) * s)
    }
}

/// Closed-form evolution of a single kaon.
pub fn evolve_single(
    init: &SingleKaonInitial,
    t: f64,
    params: &MesonParameters,
    mode: OffDiagonalMode,
) -> Result<EvolvedSingleState> {
    check_time(t, "t")?;
    let w = surviving_weights(t, params);
    let [g_s, g_l] = decayed_fractions(t, params);
    let ss = Mat2::new(
        w[(0, 0)] * init.rho_ss,
        w[(0, 1)] * init.rho_sl,
        w[(1, 0)] * init.rho_sl.conj(),
        w[(1, 1)] * init.rho_ll,
    );
    let ff_offdiag = match mode {
        OffDiagonalMode::Zero => ZERO,
        OffDiagonalMode::FormalX => formal_x(init, t, params),
    };
    Ok(EvolvedSingleState { ss, p_from_l: g_l * init.rho_ll, p_from_s: g_s * init.rho_ss, ff_offdiag, t })
}

/// Default integration step of the master-equation oracle.
pub const DEFAULT_ODE_STEP: f64 = 1e-4;

/// Fourth-order Runge–Kutta integration of the master equation on the
/// enlarged space, with zero coherence between decay channels.
pub fn integrate_master_equation(
    init: &SingleKaonInitial,
    t: f64,
    params: &MesonParameters,
    step: f64,
) -> Result<EvolvedSingleState> {
    integrate_master_equation_with_mode(init, t, params, step, OffDiagonalMode::Zero)
}

/// As [`integrate_master_equation`], optionally carrying the decay-channel coherence.
pub fn integrate_master_equation_with_mode(
    init: &SingleKaonInitial,
    t: f64,
    params: &MesonParameters,
    step: f64,
    mode: OffDiagonalMode,
) -> Result<EvolvedSingleState> {
    check_time(t, "t")?;
    if !(step.is_finite() && step > 0.0) {
        return Err(domain(format!("integration step must be positive, got {step}")));
    }
    let gen = Generator::new(params, mode);
    let n = ((t / step).ceil() as usize).max(1);
    let h = t / n as f64;
    let mut y = (init.matrix(), Mat2::zeros());
    for _ in 0..n {
        let k1 = gen.rhs(&y);
        let k2 = gen.rhs(&axpy(&y, &k1, 0.5 * h));
        let k3 = gen.rhs(&axpy(&y, &k2, 0.5 * h));
        let k4 = gen.rhs(&axpy(&y, &k3, h));
        let w = c(h / 6.0);
        y.0 += (k1.0 + (k2.0 + k3.0) * c(2.0) + k4.0) * w;
        y.1 += (k1.1 + (k2.1 + k3.1) * c(2.0) + k4.1) * w;
    }
    let (ss, ff) = y;
    Ok(EvolvedSingleState {
        ss,
        p_from_l: ff[(0, 0)].re,
        p_from_s: ff[(1, 1)].re,
        ff_offdiag: match mode {
            OffDiagonalMode::Zero => ZERO,
            OffDiagonalMode::FormalX => ff[(1, 0)],
        },
        t,
    })
}

type OdeState = (Mat2, Mat2);

fn axpy(y: &OdeState, k: &OdeState, h: f64) -> OdeState {
    (y.0 + k.0 * c(h), y.1 + k.1 * c(h))
}

/// `dρ_ss/dt = −i[H, ρ_ss] − ½{A†A, ρ_ss}`, `dρ_ff/dt = A ρ_ss A†`.
struct Generator {
    hamiltonian: Mat2,
    decay: Mat2,
    jump: Mat2,
    mode: OffDiagonalMode,
}

impl Generator {
    fn new(params: &MesonParameters, mode: OffDiagonalMode) -> Self {
        // The K_S mass is dropped; only the splitting is observable.
        let hamiltonian = Mat2::new(ZERO, ZERO, ZERO, c(params.delta_m()));
        // Rows: (from K_L, from K_S). The sign on the K_S entry fixes the phase of X.
        let jump = Mat2::new(ZERO, c(params.gamma_l().sqrt()), c(-params.gamma_s().sqrt()), ZERO);
        let decay = jump.adjoint() * jump;
        Self { hamiltonian, decay, jump, mode }
    }

    fn rhs(&self, y: &OdeState) -> OdeState {
        let rho = &y.0;
        let comm = self.hamiltonian * rho - rho * self.hamiltonian;
        let anti = self.decay * rho + rho * self.decay;
        let d_ss = comm * (-I) - anti * c(0.5);
        let mut d_ff = self.jump * rho * self.jump.adjoint();
        if self.mode == OffDiagonalMode::Zero {
            d_ff[(0, 1)] = ZERO;
            d_ff[(1, 0)] = ZERO;
        }
        (d_ss, d_ff)
    }
}

/// Closed-form purity `Tr ρ(t)²` with zero decay-channel coherence:
/// `ρ_SS²(1 − 2e^{−Γ_S t} + 2e^{−2Γ_S t}) + ρ_LL²(…) + 2|ρ_SL|² e^{−2Γ t}`.
pub fn purity_single(init: &SingleKaonInitial, t: f64, params: &MesonParameters) -> Result<f64> {
    check_time(t, "t")?;
    let shape = |gamma: f64| {
        let e = (-gamma * t).exp();
        1.0 - 2.0 * e + 2.0 * e * e
    };
    Ok(init.rho_ss * init.rho_ss * shape(params.gamma_s())
        + init.rho_ll * init.rho_ll * shape(params.gamma_l())
        + 2.0 * init.rho_sl.norm_sqr() * (-2.0 * params.gamma_mean() * t).exp())
}

/// `Prob(Y) = Tr(P ρ_ss(t))`.
pub fn prob_yes(state: &EvolvedSingleState, projector: &Mat2) -> Result<f64> {
    validate_projector(projector)?;
    Ok((projector * state.ss).trace().re)
}

/// `E_P(t) = 2 Tr(P ρ_ss(t)) − 1`; a decay counts as a NO event.
pub fn expectation_single(state: &EvolvedSingleState, projector: &Mat2) -> Result<f64> {
    Ok(2.0 * prob_yes(state, projector)? - 1.0)
}

/// Golden-section search for the minimum of `f` on `[lo, hi]`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Time of minimal purity in `[0, t_max]`, searched after a coarse log-spaced scan.
pub fn purity_minimum(init: &SingleKaonInitial, params: &MesonParameters, t_max: f64) -> Result<(f64, f64)> {
    check_time(t_max, "t_max")?;
    let f = |t: f64| purity_single(init, t, params).unwrap_or(f64::INFINITY);
    // Coarse log grid brackets the global minimum before refinement.
    let n = 4000;
    let t_lo = 1e-4 * params.tau_s();
    let grid: Vec<f64> = std::iter::once(0.0)
        .chain((0..=n).map(|k| t_lo * (t_max / t_lo).powf(k as f64 / n as f64)))
        .filter(|&t| t <= t_max)
        .collect();
    let (k_best, _) = grid
        .iter()
        .enumerate()
        .map(|(k, &t)| (k, f(t)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty grid");
    let lo = grid[k_best.saturating_sub(1)];
    let hi = grid[(k_best + 1).min(grid.len() - 1)];
    Ok(golden_section_min(f, lo, hi, 1e-9))
}

/// Location of the smallest purity reachable from any initial state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PurityMinimum {
    pub purity: f64,
    pub rho_ss: f64,
    pub rho_sl: C64,
    pub t: f64,
}

/// Minimizes the purity jointly over initial density matrices and times in
/// `[0, t_max]`, starting the simplex from a small grid of states.
pub fn global_purity_minimum(params: &MesonParameters, t_max: f64) -> Result<PurityMinimum> {
    check_time(t_max, "t_max")?;
    // (a, b, c, s): ρ_SS = sin²a, |ρ_SL| = |sin b|·√(ρ_SS ρ_LL), arg ρ_SL = c, t = |s| folded.
    let decode = |x: &[f64]| {
        let rho_ss = x[0].sin().powi(2);
        let mag = x[1].sin().abs() * (rho_ss * (1.0 - rho_ss)).sqrt();
        let rho_sl = C64::from_polar(mag, x[2]);
        let t = x[3].abs().min(t_max);
        (rho_ss, rho_sl, t)
    };
    let f = |x: &[f64]| {
        let (rho_ss, rho_sl, t) = decode(x);
        SingleKaonInitial::new(rho_ss, 1.0 - rho_ss, rho_sl)
            .and_then(|init| purity_single(&init, t, params))
            .unwrap_or(f64::INFINITY)
    };
    let mut best: Option<crate::simplex::SimplexRun> = None;
    for a in [0.3, 0.8, 1.2] {
        for b in [0.0, 0.7] {
            for t in [0.1f64, 1.0, 5.0] {
                let run =
                    crate::simplex::nelder_mead(f, &[a, b, 0.5, t.min(t_max)], &[0.2, 0.3, 0.5, 0.3], 4000);
                if best.as_ref().is_none_or(|r| run.f_best < r.f_best) {
                    best = Some(run);
                }
            }
        }
    }
    let run = best.expect("non-empty start grid");
    let (rho_ss, rho_sl, t) = decode(&run.x_best);
    Ok(PurityMinimum { purity: run.f_best, rho_ss, rho_sl, t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn kaon_paper() -> MesonParameters {
        MesonParameters::default()
    }

    #[test]
    fn global_minimum_is_mixed() {
        let m = global_purity_minimum(&kaon_paper(), 50.0).unwrap();
        assert!((m.purity - 0.333068).abs() < 5e-5, "{m:?}");
        assert!((m.rho_ss - 2.0 / 3.0).abs() < 1e-2 && m.rho_sl.norm() < 1e-3);
        assert!((m.t - 0.694012).abs() < 1e-2);
    }

    #[test]
    fn k_short_at_zero_is_identity() {
        let s =
            evolve_single(&SingleKaonInitial::k_short(), 0.0, &kaon_paper(), OffDiagonalMode::Zero).unwrap();
        assert!((s.ss - Mat2::new(c(1.0), ZERO, ZERO, ZERO)).norm() < 1e-15);
        assert_eq!((s.p_from_l, s.p_from_s), (0.0, 0.0));
    }

    #[test]
    fn k_short_fully_decays() {
        let s =
            evolve_single(&SingleKaonInitial::k_short(), 60.0, &kaon_paper(), OffDiagonalMode::Zero).unwrap();
        assert!((s.p_from_s - 1.0).abs() < 1e-12 && s.p_from_l == 0.0);
        assert!((s.total_trace() - 1.0).abs() < 1e-12);
        assert!((s.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kaon_coherence_rotates_with_mass_difference() {
        let p = kaon_paper();
        let t = 1.3;
        let s = evolve_single(&SingleKaonInitial::kaon(), t, &p, OffDiagonalMode::Zero).unwrap();
        let expected = (C64::new(-p.gamma_mean(), p.delta_m()) * t).exp() * 0.5;
        assert!((s.ss[(0, 1)] - expected).norm() < 1e-15);
    }

    #[test]
    fn negative_time_is_rejected() {
        let p = kaon_paper();
        assert!(evolve_single(&SingleKaonInitial::kaon(), -1.0, &p, OffDiagonalMode::Zero).is_err());
        assert!(purity_single(&SingleKaonInitial::kaon(), -1.0, &p).is_err());
        assert!(integrate_master_equation(&SingleKaonInitial::kaon(), 1.0, &p, 0.0).is_err());
        assert!(integrate_master_equation(&SingleKaonInitial::kaon(), 1.0, &p, -1e-3).is_err());
    }

    #[test]
    fn invalid_initial_states_are_rejected() {
        assert!(SingleKaonInitial::new(0.6, 0.6, ZERO).is_err());
        assert!(SingleKaonInitial::new(0.5, 0.5, c(0.6)).is_err());
        assert!(SingleKaonInitial::new(-0.1, 1.1, ZERO).is_err());
        assert!(SingleKaonInitial::new(0.5, 0.5, C64::new(0.3, 0.4)).is_ok());
    }

    #[test]
    fn ode_matches_closed_form_for_kaon() {
        let p = kaon_paper();
        let init = SingleKaonInitial::kaon();
        let a = evolve_single(&init, 1.0, &p, OffDiagonalMode::Zero).unwrap();
        let b = integrate_master_equation(&init, 1.0, &p, 1e-4).unwrap();
        assert!((a.density_matrix() - b.density_matrix()).camax() < 1e-8);
    }

    #[test]
    fn ode_reproduces_formal_x() {
        let p = kaon_paper();
        let init = SingleKaonInitial::new(0.4, 0.6, C64::new(0.2, -0.35)).unwrap();
        let a = evolve_single(&init, 2.5, &p, OffDiagonalMode::FormalX).unwrap();
        let b = integrate_master_equation_with_mode(&init, 2.5, &p, 1e-3, OffDiagonalMode::FormalX).unwrap();
        assert!(a.ff_offdiag.norm() > 1e-3);
        assert!((a.density_matrix() - b.density_matrix()).camax() < 1e-10);
    }

    #[test]
    fn ode_k_long() {
        let p = kaon_paper();
        let b = integrate_master_equation(&SingleKaonInitial::k_long(), 1.0, &p, 1e-4).unwrap();
        assert!((b.ss[(1, 1)].re - (-p.gamma_l()).exp()).abs() < 1e-8);
        assert!(b.ss[(0, 0)].norm() < 1e-8 && b.ss[(0, 1)].norm() < 1e-8);
    }

    #[test]
    fn probabilities() {
        let p = kaon_paper();
        let pbar = QuasiSpin::antikaon().projector();
        let s0 = evolve_single(&SingleKaonInitial::antikaon(), 0.0, &p, OffDiagonalMode::Zero).unwrap();
        assert!((prob_yes(&s0, &pbar).unwrap() - 1.0).abs() < 1e-15);
        assert!((expectation_single(&s0, &pbar).unwrap() - 1.0).abs() < 1e-15);
        let k0 = evolve_single(&SingleKaonInitial::kaon(), 0.0, &p, OffDiagonalMode::Zero).unwrap();
        assert!((expectation_single(&k0, &pbar).unwrap() + 1.0).abs() < 1e-15);

        for t in [0.3, 2.0, 7.5, 40.0] {
            let s = evolve_single(&SingleKaonInitial::kaon(), t, &p, OffDiagonalMode::Zero).unwrap();
            let oracle = 0.25
                * ((-p.gamma_s() * t).exp() + (-p.gamma_l() * t).exp()
                    - 2.0 * (p.delta_m() * t).cos() * (-p.gamma_mean() * t).exp());
            assert!((prob_yes(&s, &pbar).unwrap() - oracle).abs() < 1e-14);
        }
        let late = evolve_single(&SingleKaonInitial::antikaon(), 5e4, &p, OffDiagonalMode::Zero).unwrap();
        assert!(prob_yes(&late, &pbar).unwrap() < 1e-12);
        assert!((expectation_single(&late, &pbar).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_projectors_are_rejected() {
        let s = evolve_single(&SingleKaonInitial::kaon(), 1.0, &kaon_paper(), OffDiagonalMode::Zero).unwrap();
        let bad = Mat2::new(c(0.5), ZERO, ZERO, c(0.5));
        assert!(prob_yes(&s, &bad).is_err());
        let non_herm = Mat2::new(c(1.0), c(1.0), ZERO, ZERO);
        assert!(expectation_single(&s, &non_herm).is_err());
    }

    #[test]
    fn purity_reference_values() {
        let p = kaon_paper();
        let ks = purity_single(&SingleKaonInitial::k_short(), LN_2, &p).unwrap();
        assert!((ks - 0.5).abs() < 1e-15);
        let k0 = purity_single(&SingleKaonInitial::kaon(), LN_2 / p.gamma_l(), &p).unwrap();
        assert!((k0 - 0.375).abs() < 1e-6);
        let mixed = SingleKaonInitial::mixed(2.0 / 3.0).unwrap();
        let m = purity_single(&mixed, 0.694012, &p).unwrap();
        assert!((m - 0.333068).abs() < 5e-5, "{m}");
    }

    #[test]
    fn closed_form_purity_matches_matrix() {
        let p = kaon_paper();
        let init = SingleKaonInitial::new(0.3, 0.7, C64::new(0.1, 0.4)).unwrap();
        for t in [0.0, 0.1, 1.0, 10.0, 300.0] {
            let s = evolve_single(&init, t, &p, OffDiagonalMode::Zero).unwrap();
            assert!((s.purity() - purity_single(&init, t, &p).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn k_short_purity_minimum_at_ln2() {
        let (t, v) = purity_minimum(&SingleKaonInitial::k_short(), &kaon_paper(), 50.0).unwrap();
        assert!((t - LN_2).abs() < 1e-6);
        assert!((v - 0.5).abs() < 1e-9);
    }

    #[test]
    fn quasispin_projectors() {
        for q in [QuasiSpin::kaon(), QuasiSpin::antikaon(), QuasiSpin::k_short(), QuasiSpin::k_long()] {
            let p = q.projector();
            validate_projector(&p).unwrap();
            assert!((p.trace().re - 1.0).abs() < 1e-15);
        }
        assert!(QuasiSpin::new(c(1.0), c(1.0)).is_err());
        let ks = QuasiSpin::k_short().mass_amplitudes();
        assert!((ks.0 - c(1.0)).norm() < 1e-15 && ks.1.norm() < 1e-15);
    }
}
