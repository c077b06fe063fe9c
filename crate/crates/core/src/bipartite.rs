// Copyright 2026 The kaonbell Authors
// SPDX-License-Identifier: Apache-2.0

//! Entangled kaon pairs evolved to two independent detection times.
//!
//! The evolved state is block diagonal with four 4×4 blocks
//! (surviving/final on each side). Cross blocks between surviving and final
//! components are dropped; they never enter a measurable quantity.
//!
//! Composite index is `2·left + right`. In the `ss`/`ff` blocks a final
//! index labels the decay channel by the mass eigenstate that fed it
//! (`0 = from K_S`, `1 = from K_L`).

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::Vector4;
use serde::{Deserialize, Serialize};

use crate::error::{check_time, domain, Error, Result};
use crate::linalg::{frobenius_sq, kron, trace_left, trace_right, Mat2, Mat4, C64, ZERO};
use crate::params::MesonParameters;
use crate::single_kaon::{
    decayed_fractions, surviving_weights, validate_projector, EvolvedSingleState, QuasiSpin,
};

const NORM_TOL: f64 = 1e-12;

/// Pure two-kaon state `Σ r_i e^{iφ_i}` over `|K_S K_S⟩, |K_S K_L⟩, |K_L K_S⟩, |K_L K_L⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PureTwoKaonState {
    pub r: [f64; 4],
    pub phi: [f64; 4],
}

impl PureTwoKaonState {
    /// Requires `Σ r_i² = 1` to 1e-12.
    pub fn new(r: [f64; 4], phi: [f64; 4]) -> Result<Self> {
        if r.iter().chain(phi.iter()).any(|x| !x.is_finite()) {
            return Err(domain("two-kaon state has non-finite entries"));
        }
        let n: f64 = r.iter().map(|x| x * x).sum();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(domain(format!("sum of r_i^2 is {n}, expected 1")));
        }
        Ok(Self { r, phi })
    }

    /// Rescales `r` to unit norm.
    pub fn normalized(r: [f64; 4], phi: [f64; 4]) -> Result<Self> {
        let n = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(domain("two-kaon amplitudes vanish"));
        }
        Self::new(r.map(|x| x / n), phi)
    }

    pub fn from_amplitudes(a: [C64; 4]) -> Result<Self> {
        Self::normalized(a.map(|z| z.norm()), a.map(|z| z.arg()))
    }

    /// Removes the global phase so that `φ₄ = 0`.
    pub fn gauge_fixed(&self) -> Self {
        let p4 = self.phi[3];
        Self { r: self.r, phi: self.phi.map(|p| wrap_phase(p - p4)) }
    }

    pub fn amplitudes(&self) -> [C64; 4] {
        std::array::from_fn(|i| C64::from_polar(self.r[i], self.phi[i]))
    }

    pub fn vector(&self) -> Vector4<C64> {
        Vector4::from(self.amplitudes())
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn density(&self) -> Mat4 {
        let v = self.vector();
        v * v.adjoint()
    }

    /// Left ↔ right exchange.
    pub fn swapped(&self) -> Self {
        Self {
            r: [self.r[0], self.r[2], self.r[1], self.r[3]],
            phi: [self.phi[0], self.phi[2], self.phi[1], self.phi[3]],
        }
    }

    /// Non-maximally entangled state violating CHSH with all phases zero.
    pub fn xi() -> Self {
        Self::normalized([-0.8335, -0.2446, -0.2446, 0.4308], [0.0; 4]).expect("valid")
    }

    /// Complex-phase state with the larger CHSH violation.
    pub fn chi() -> Self {
        Self::normalized([-0.7823, 0.1460, 0.1460, 0.5877], [-0.2751, -0.6784, -0.6784, 0.0]).expect("valid")
    }

    /// `phi+`, `phi-`, `psi+`, `psi-`, `xi` or `chi`.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "xi" => Ok(Self::xi()),
            "chi" => Ok(Self::chi()),
            other => Ok(bell_state(other.parse()?)),
        }
    }
}

pub(crate) fn wrap_phase(p: f64) -> f64 {
    let w = (p + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Maximally entangled states in the mass basis:
/// `φ± = (|K_SK_S⟩ ± |K_LK_L⟩)/√2`, `ψ± = (|K_SK_L⟩ ± |K_LK_S⟩)/√2`.
///
/// Rewritten in strangeness, `φ+ = (|K⁰K⁰⟩+|K̄⁰K̄⁰⟩)/√2` and
/// `ψ− = (|K⁰K̄⁰⟩−|K̄⁰K⁰⟩)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellState {
    #[serde(rename = "phi+")]
    PhiPlus,
    #[serde(rename = "phi-")]
    PhiMinus,
    #[serde(rename = "psi+")]
    PsiPlus,
    #[serde(rename = "psi-")]
    PsiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] =
        [BellState::PhiPlus, BellState::PhiMinus, BellState::PsiPlus, BellState::PsiMinus];

    pub fn name(self) -> &'static str {
        match self {
            BellState::PhiPlus => "phi+",
            BellState::PhiMinus => "phi-",
            BellState::PsiPlus => "psi+",
            BellState::PsiMinus => "psi-",
        }
    }
}

impl fmt::Display for BellState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BellState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BellState::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown state `{s}`")))
    }
}

pub fn bell_state(which: BellState) -> PureTwoKaonState {
    let h = FRAC_1_SQRT_2;
    let (r, phi) = match which {
        BellState::PhiPlus => ([h, 0.0, 0.0, h], [0.0; 4]),
        BellState::PhiMinus => ([h, 0.0, 0.0, h], [PI, 0.0, 0.0, 0.0]),
        BellState::PsiPlus => ([0.0, h, h, 0.0], [0.0; 4]),
        BellState::PsiMinus => ([0.0, h, h, 0.0], [0.0, 0.0, PI, 0.0]),
    };
    PureTwoKaonState { r, phi }
}

/// Two-kaon state at detection times `(t_l, t_r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BipartiteEvolvedState {
    /// Both kaons surviving.
    pub ssss: Mat4,
    /// Left surviving, right decayed.
    pub ssff: Mat4,
    /// Left decayed, right surviving.
    pub ffss: Mat4,
    /// Diagonal of the both-decayed block.
    pub ffff: [f64; 4],
    pub t_l: f64,
    pub t_r: f64,
}

/// Raw and dimension-normalized `Tr σ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Purity {
    pub raw: f64,
    pub normalized: f64,
}

/// Hilbert-space dimension of a kaon pair including decay channels.
pub const PAIR_DIMENSION: usize = 16;

/// `(d·Tr ρ² − 1)/(d − 1)`.
pub fn normalize_purity(raw: f64, dimension: usize) -> f64 {
    let d = dimension as f64;
    (d * raw - 1.0) / (d - 1.0)
}

impl BipartiteEvolvedState {
    pub fn total_trace(&self) -> f64 {
        self.ssss.trace().re + self.ssff.trace().re + self.ffss.trace().re + self.ffff.iter().sum::<f64>()
    }

    pub fn purity(&self) -> Purity {
        let raw = frobenius_sq(&self.ssss)
            + frobenius_sq(&self.ssff)
            + frobenius_sq(&self.ffss)
            + self.ffff.iter().map(|x| x * x).sum::<f64>();
        Purity { raw, normalized: normalize_purity(raw, PAIR_DIMENSION) }
    }

    /// Surviving part of the left reduced state.
    pub fn left_surviving(&self) -> Mat2 {
        trace_right(&self.ssss) + trace_right(&self.ssff)
    }

    /// Surviving part of the right reduced state.
    pub fn right_surviving(&self) -> Mat2 {
        trace_left(&self.ssss) + trace_left(&self.ffss)
    }

    /// Reduced state of the left kaon.
    pub fn left_reduced(&self) -> EvolvedSingleState {
        let dec = trace_right(&self.ffss);
        let both = [self.ffff[0] + self.ffff[1], self.ffff[2] + self.ffff[3]];
        EvolvedSingleState {
            ss: self.left_surviving(),
            p_from_l: dec[(1, 1)].re + both[1],
            p_from_s: dec[(0, 0)].re + both[0],
            ff_offdiag: ZERO,
            t: self.t_l,
        }
    }

    /// Reduced state of the right kaon.
    pub fn right_reduced(&self) -> EvolvedSingleState {
        let dec = trace_left(&self.ssff);
        let both = [self.ffff[0] + self.ffff[2], self.ffff[1] + self.ffff[3]];
        EvolvedSingleState {
            ss: self.right_surviving(),
            p_from_l: dec[(1, 1)].re + both[1],
            p_from_s: dec[(0, 0)].re + both[0],
            ff_offdiag: ZERO,
            t: self.t_r,
        }
    }

    /// Correlation `E = P(YY) + P(NN) − P(YN) − P(NY)` for projectors `p_l`, `p_r`.
    /// Decayed kaons count as NO.
    pub fn expectation(&self, p_l: &Mat2, p_r: &Mat2) -> Result<f64> {
        validate_projector(p_l)?;
        validate_projector(p_r)?;
        let y_l = (p_l * self.left_surviving()).trace().re;
        let y_r = (p_r * self.right_surviving()).trace().re;
        let yy = (kron(p_l, p_r) * self.ssss).trace().re;
        Ok(1.0 - 2.0 * y_l - 2.0 * y_r + 4.0 * yy)
    }
}

/// Builds `σ(t_l, t_r)` from the initial pure state with factorized weights.
pub fn evolve_bipartite(
    psi0: &PureTwoKaonState,
    t_l: f64,
    t_r: f64,
    params: &MesonParameters,
) -> Result<BipartiteEvolvedState> {
    check_time(t_l, "t_l")?;
    check_time(t_r, "t_r")?;
    let sigma0 = psi0.density();
    let (w_l, w_r) = (surviving_weights(t_l, params), surviving_weights(t_r, params));
    let (g_l, g_r) = (decayed_fractions(t_l, params), decayed_fractions(t_r, params));

    let ssss = Mat4::from_fn(|row, col| {
        let (n, l) = (row / 2, row % 2);
        let (m, k) = (col / 2, col % 2);
        sigma0[(row, col)] * w_l[(n, m)] * w_r[(l, k)]
    });
    let mut ssff = Mat4::zeros();
    let mut ffss = Mat4::zeros();
    let mut ffff = [0.0; 4];
    for a in 0..2 {
        for b in 0..2 {
            for f in 0..2 {
                // right kaon decayed through channel f
                ssff[(2 * a + f, 2 * b + f)] = sigma0[(2 * a + f, 2 * b + f)] * w_l[(a, b)] * g_r[f];
                // left kaon decayed through channel f
                ffss[(2 * f + a, 2 * f + b)] = sigma0[(2 * f + a, 2 * f + b)] * g_l[f] * w_r[(a, b)];
            }
            ffff[2 * a + b] = sigma0[(2 * a + b, 2 * a + b)].re * g_l[a] * g_r[b];
        }
    }
    Ok(BipartiteEvolvedState { ssss, ssff, ffss, ffff, t_l, t_r })
}

/// Reduced left state when the right kaon is measured at `t_r = 0`.
pub fn left_marginal(
    psi0: &PureTwoKaonState,
    t_l: f64,
    params: &MesonParameters,
) -> Result<EvolvedSingleState> {
    Ok(evolve_bipartite(psi0, t_l, 0.0, params)?.left_reduced())
}

/// Reduced right state when the left kaon is measured at `t_l = 0`.
pub fn right_marginal(
    psi0: &PureTwoKaonState,
    t_r: f64,
    params: &MesonParameters,
) -> Result<EvolvedSingleState> {
    Ok(evolve_bipartite(psi0, 0.0, t_r, params)?.right_reduced())
}

/// Correlation for arbitrary quasi-spin projectors via the evolved state.
pub fn expectation_matrix(
    psi0: &PureTwoKaonState,
    p_l: &Mat2,
    p_r: &Mat2,
    t_l: f64,
    t_r: f64,
    params: &MesonParameters,
) -> Result<f64> {
    evolve_bipartite(psi0, t_l, t_r, params)?.expectation(p_l, p_r)
}

/// Strangeness correlation `E_{K̄⁰,K̄⁰}(t_l, t_r)` in closed form.
pub fn expectation_closed_form(
    psi0: &PureTwoKaonState,
    t_l: f64,
    t_r: f64,
    params: &MesonParameters,
) -> Result<f64> {
    check_time(t_l, "t_l")?;
    check_time(t_r, "t_r")?;
    Ok(strangeness_correlation(psi0, t_l, t_r, params))
}

/// Unchecked closed form; the optimizer's inner loop.
#[inline]
pub(crate) fn strangeness_correlation(
    psi0: &PureTwoKaonState,
    t_l: f64,
    t_r: f64,
    params: &MesonParameters,
) -> f64 {
    let [r1, r2, r3, r4] = psi0.r;
    let [p1, p2, p3, p4] = psi0.phi;
    let (gs, gl, g, dm) = (params.gamma_s(), params.gamma_l(), params.gamma_mean(), params.delta_m());

    let sl = (-gs * t_l).exp();
    let ll = (-gl * t_l).exp();
    let sr = (-gs * t_r).exp();
    let lr = (-gl * t_r).exp();
    let ml = (-g * t_l).exp();
    let mr = (-g * t_r).exp();
    let (q1, q2, q3, q4) = (r1 * r1, r2 * r2, r3 * r3, r4 * r4);

    1.0 + q1 * sl * sr + q2 * sl * lr + q3 * ll * sr + q4 * ll * lr
        - q1 * (sl + sr)
        - q2 * (sl + lr)
        - q3 * (ll + sr)
        - q4 * (ll + lr)
        + 2.0 * r1 * r2 * (1.0 - sl) * (dm * t_r + p1 - p2).cos() * mr
        + 2.0 * r1 * r3 * (dm * t_l + p1 - p3).cos() * ml * (1.0 - sr)
        + 2.0 * r2 * r4 * (dm * t_l + p2 - p4).cos() * ml * (1.0 - lr)
        + 2.0 * r3 * r4 * (1.0 - ll) * (dm * t_r + p3 - p4).cos() * mr
        + 2.0 * r1 * r4 * (dm * (t_l + t_r) + p1 - p4).cos() * ml * mr
        + 2.0 * r2 * r3 * (dm * (t_l - t_r) + p2 - p3).cos() * ml * mr
}

/// `|K̄⁰⟩⟨K̄⁰|` in the mass basis.
pub fn antikaon_projector() -> Mat2 {
    QuasiSpin::antikaon().projector()
}

/// Purity of the evolved pair.
pub fn purity_bipartite(state: &BipartiteEvolvedState) -> Purity {
    state.purity()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::single_kaon::{evolve_single, OffDiagonalMode, SingleKaonInitial};

    fn params() -> MesonParameters {
        MesonParameters::default()
    }

    #[test]
    fn bell_states_in_strangeness_basis() {
        let k0 = QuasiSpin::kaon().mass_amplitudes();
        let kb = QuasiSpin::antikaon().mass_amplitudes();
        let prod = |a: (C64, C64), b: (C64, C64)| Vector4::new(a.0 * b.0, a.0 * b.1, a.1 * b.0, a.1 * b.1);
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let phi_plus = (prod(k0, k0) + prod(kb, kb)) * h;
        let psi_minus = (prod(k0, kb) - prod(kb, k0)) * h;
        assert!((bell_state(BellState::PhiPlus).vector() - phi_plus).norm() < 1e-15);
        assert!((bell_state(BellState::PsiMinus).vector() - psi_minus).norm() < 1e-15);
        for b in BellState::ALL {
            let s = bell_state(b);
            assert!((s.vector().norm() - 1.0).abs() < 1e-15);
            assert_eq!(b.name().parse::<BellState>().unwrap(), b);
        }
    }

    #[test]
    fn initial_time_is_the_pure_state() {
        let psi = PureTwoKaonState::chi();
        let s = evolve_bipartite(&psi, 0.0, 0.0, &params()).unwrap();
        assert!((s.ssss - psi.density()).norm() < 1e-15);
        assert!(s.ssff.norm() == 0.0 && s.ffss.norm() == 0.0 && s.ffff == [0.0; 4]);
        let pur = s.purity();
        assert!((pur.raw - 1.0).abs() < 1e-14 && (pur.normalized - 1.0).abs() < 1e-14);
    }

    #[test]
    fn phase_structure_of_coherences() {
        let p = params();
        let t = 0.8;
        let phi = evolve_bipartite(&bell_state(BellState::PhiPlus), t, t, &p).unwrap();
        let expected = (C64::new(-2.0 * p.gamma_mean(), 2.0 * p.delta_m()) * t).exp() * 0.5;
        assert!((phi.ssss[(0, 3)] - expected).norm() < 1e-15);

        let psi = evolve_bipartite(&bell_state(BellState::PsiMinus), t, t, &p).unwrap();
        // only the decay envelope survives: the phases of the two sides cancel
        let el = psi.ssss[(1, 2)];
        assert!((el - C64::new(-0.5 * (-2.0 * p.gamma_mean() * t).exp(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn correlation_reference_points() {
        let p = params();
        let pb = antikaon_projector();
        let psi_m = bell_state(BellState::PsiMinus);
        assert!((expectation_matrix(&psi_m, &pb, &pb, 0.0, 0.0, &p).unwrap() + 1.0).abs() < 1e-14);
        assert!((expectation_closed_form(&psi_m, 0.0, 0.0, &p).unwrap() + 1.0).abs() < 1e-14);
        let phi_p = bell_state(BellState::PhiPlus);
        assert!((expectation_matrix(&phi_p, &pb, &pb, 0.0, 0.0, &p).unwrap() - 1.0).abs() < 1e-14);
        for psi in [psi_m, phi_p, PureTwoKaonState::xi()] {
            let late = expectation_matrix(&psi, &pb, &pb, 1e5, 1e5, &p).unwrap();
            assert!((late - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_time_closed_form_reduces_to_interference() {
        // E(0,0) = 2(r1 r4 + r2 r3) for real amplitudes
        let psi = PureTwoKaonState::xi();
        let [r1, r2, r3, r4] = psi.r;
        let e = expectation_closed_form(&psi, 0.0, 0.0, &params()).unwrap();
        assert!((e - 2.0 * (r1 * r4 + r2 * r3)).abs() < 1e-14);
        let m = expectation_matrix(&psi, &antikaon_projector(), &antikaon_projector(), 0.0, 0.0, &params())
            .unwrap();
        assert!((e - m).abs() < 1e-14);
    }

    #[test]
    fn closed_form_matches_matrix_path_with_phases() {
        let p = params();
        let pb = antikaon_projector();
        let psi = PureTwoKaonState::chi();
        for (tl, tr) in [(0.0, 0.0), (1.79, 0.0), (0.3, 4.2), (12.0, 0.7), (300.0, 2.0)] {
            let a = expectation_closed_form(&psi, tl, tr, &p).unwrap();
            let b = expectation_matrix(&psi, &pb, &pb, tl, tr, &p).unwrap();
            assert!((a - b).abs() < 1e-13, "({tl},{tr}): {a} vs {b}");
        }
    }

    #[test]
    fn marginals_follow_single_kaon_evolution() {
        let p = params();
        let psi = PureTwoKaonState::chi();
        let rho = psi.density();
        let left0 = trace_right(&rho);
        let init = SingleKaonInitial::new(left0[(0, 0)].re, left0[(1, 1)].re, left0[(0, 1)]).unwrap();
        for t in [0.0, 0.5, 3.0, 250.0] {
            let m = left_marginal(&psi, t, &p).unwrap();
            let s = evolve_single(&init, t, &p, OffDiagonalMode::Zero).unwrap();
            assert!((m.density_matrix() - s.density_matrix()).norm() < 1e-12);
        }
        let psi_m = bell_state(BellState::PsiMinus);
        let m = left_marginal(&psi_m, 0.0, &p).unwrap();
        assert!((m.ss - Mat2::identity() * C64::new(0.5, 0.0)).norm() < 1e-15);
        let prod = PureTwoKaonState::new([1.0, 0.0, 0.0, 0.0], [0.0; 4]).unwrap();
        let r = right_marginal(&prod, 0.9, &p).unwrap();
        let s = evolve_single(&SingleKaonInitial::k_short(), 0.9, &p, OffDiagonalMode::Zero).unwrap();
        assert!((r.density_matrix() - s.density_matrix()).norm() < 1e-15);
    }

    #[test]
    fn purity_normalization() {
        assert_eq!(normalize_purity(1.0 / 16.0, 16), 0.0);
        assert_eq!(normalize_purity(1.0, 16), 1.0);
        assert_eq!(normalize_purity(0.25, 4), 0.0);
    }

    #[test]
    fn invalid_inputs() {
        assert!(PureTwoKaonState::new([1.0, 1.0, 0.0, 0.0], [0.0; 4]).is_err());
        assert!(PureTwoKaonState::normalized([0.0; 4], [0.0; 4]).is_err());
        assert!(evolve_bipartite(&PureTwoKaonState::xi(), -0.1, 0.0, &params()).is_err());
        assert!(expectation_closed_form(&PureTwoKaonState::xi(), 0.0, f64::NAN, &params()).is_err());
        assert!(PureTwoKaonState::by_name("omega").is_err());
        let bad = Mat2::identity() * C64::new(0.5, 0.0);
        let pb = antikaon_projector();
        assert!(expectation_matrix(&PureTwoKaonState::xi(), &bad, &pb, 0.0, 0.0, &params()).is_err());
    }

    #[test]
    fn gauge_fixing_removes_global_phase() {
        let psi = PureTwoKaonState::new([0.5; 4], [0.1, 0.2, 0.3, 1.0]).unwrap();
        let g = psi.gauge_fixed();
        assert_eq!(g.phi[3], 0.0);
        let e1 = expectation_closed_form(&psi, 0.4, 2.0, &params()).unwrap();
        let e2 = expectation_closed_form(&g, 0.4, 2.0, &params()).unwrap();
        assert!((e1 - e2).abs() < 1e-14);
    }
}
