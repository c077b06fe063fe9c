// Copyright 2026 The kaonbell Authors
// SPDX-License-Identifier: Apache-2.0

//! Concurrence, entanglement of formation and the PPT test.
//!
//! Only the surviving–surviving block of a kaon pair can carry
//! entanglement, and it is a two-qubit operator, so the Wootters formula
//! applies. The block is not renormalized by default: concurrence is
//! homogeneous of degree one, so the survival damping shows up in the value.

use serde::{Deserialize, Serialize};

use crate::bipartite::{BipartiteEvolvedState, PureTwoKaonState};
use crate::error::{check_time, domain, Result};
use crate::linalg::{
    c, hermitian_eigenvalues, hermiticity_defect, partial_transpose_right, sigma_y_y, sqrt_psd, Mat4,
};
use crate::params::MesonParameters;

const HERMITIAN_TOL: f64 = 1e-10;
const CLAMP_TOL: f64 = 1e-10;

/// Relative eigenvalue threshold for numerical rank.
const RANK_EPS: f64 = 64.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcurrenceResult {
    pub value: f64,
    /// Square roots of the eigenvalues of `σ σ̃`, descending.
    pub lambdas: [f64; 4],
}

/// `V` with `σ ≈ V V†` by diagonally pivoted Cholesky, stopping once the
/// residual diagonal is at round-off level. Unused columns stay zero. For
/// rank-deficient `σ` this keeps every entry of `V` accurate relative to the
/// entries of `σ`, which an eigen-decomposition does not.
fn psd_factor(sigma: &Mat4) -> Mat4 {
    let mut r = *sigma;
    let mut v = Mat4::zeros();
    let scale = (0..4).map(|i| r[(i, i)].re).fold(0.0, f64::max);
    for k in 0..4 {
        let (p, d) =
            (0..4).map(|i| (i, r[(i, i)].re)).fold((0, f64::MIN), |a, b| if b.1 > a.1 { b } else { a });
        if d.is_nan() || d <= RANK_EPS * scale {
            break;
        }
        let col = r.column(p) / c(d.sqrt());
        r -= col * col.adjoint();
        v.set_column(k, &col);
    }
    v
}

/// Wootters concurrence of a (possibly unnormalized) two-qubit block.
///
/// With any factorization `σ = V V†`, the `λ_i` are the singular values of
/// `τ = Vᵀ (σ_y⊗σ_y) V`; their squares are the eigenvalues of `σ σ̃`.
/// Working with `τ` keeps the small `λ_i` at round-off level instead of the
/// square root of round-off.
pub fn wootters_concurrence(block: &Mat4) -> Result<ConcurrenceResult> {
    if block.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(domain("block has non-finite entries"));
    }
    let defect = hermiticity_defect(block);
    if defect > HERMITIAN_TOL {
        return Err(domain(format!("block is not Hermitian (defect {defect:e})")));
    }
    let h = (block + block.adjoint()) * c(0.5);
    let min_ev = hermitian_eigenvalues(&h)[0];
    if min_ev < -CLAMP_TOL {
        return Err(domain(format!("block is not positive semidefinite (eigenvalue {min_ev:e})")));
    }
    let v = psd_factor(&h);
    let tau = v.transpose() * sigma_y_y() * v;
    let mut lambdas = [0.0; 4];
    lambdas.copy_from_slice(tau.singular_values().as_slice());
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let value = (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0);
    Ok(ConcurrenceResult { value, lambdas })
}

/// Same spectrum through the Hermitian product `√σ σ̃ √σ`. Slower to
/// converge for nearly pure blocks; kept as an independent cross-check.
pub fn wootters_concurrence_hermitian(block: &Mat4) -> Result<f64> {
    if hermiticity_defect(block) > HERMITIAN_TOL {
        return Err(domain("block is not Hermitian"));
    }
    let yy = sigma_y_y();
    let flipped = yy * block.conjugate() * yy;
    let root = sqrt_psd(block);
    let ev = hermitian_eigenvalues(&(root * flipped * root));
    let mut l = ev.map(|x| x.max(0.0).sqrt());
    l.sort_by(|a, b| b.total_cmp(a));
    Ok((l[0] - l[1] - l[2] - l[3]).max(0.0))
}

/// Concurrence of the block divided by its trace.
pub fn wootters_concurrence_normalized(block: &Mat4) -> Result<f64> {
    let tr = block.trace().re;
    if tr.is_nan() || tr <= 0.0 {
        return Ok(0.0);
    }
    Ok(wootters_concurrence(block)?.value / tr)
}

/// `2 |r₁r₄ e^{i(φ₁+φ₄)} − r₂r₃ e^{i(φ₂+φ₃)}| e^{−Γ(t_l+t_r)}`.
pub fn concurrence_closed_form(
    psi0: &PureTwoKaonState,
    t_l: f64,
    t_r: f64,
    params: &MesonParameters,
) -> Result<f64> {
    check_time(t_l, "t_l")?;
    check_time(t_r, "t_r")?;
    Ok(initial_concurrence(psi0) * (-params.gamma_mean() * (t_l + t_r)).exp())
}

/// Concurrence of the pure initial state.
pub fn initial_concurrence(psi0: &PureTwoKaonState) -> f64 {
    let a = psi0.amplitudes();
    2.0 * (a[0] * a[3] - a[1] * a[2]).norm()
}

fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// Entanglement of formation of a normalized two-qubit state from its concurrence.
pub fn eof_from_concurrence(c: f64) -> Result<f64> {
    if !(c.is_finite() && (-1e-12..=1.0 + 1e-12).contains(&c)) {
        return Err(domain(format!("concurrence must lie in [0, 1], got {c}")));
    }
    let c = c.clamp(0.0, 1.0);
    Ok(binary_entropy(0.5 * (1.0 + (1.0 - c * c).sqrt())))
}

/// Smallest eigenvalue of the right partial transpose of one block.
pub fn ppt_min_eigenvalue_block(block: &Mat4) -> f64 {
    hermitian_eigenvalues(&partial_transpose_right(block))[0]
}

/// Smallest eigenvalue of `σ^{T_r}` over all blocks; negative means entangled.
pub fn ppt_min_eigenvalue(state: &BipartiteEvolvedState) -> f64 {
    let ffff_min = state.ffff.iter().copied().fold(f64::INFINITY, f64::min);
    [&state.ssss, &state.ssff, &state.ffss].into_iter().map(ppt_min_eigenvalue_block).fold(ffff_min, f64::min)
}

/// Explicit Werner state `p |ψ⁻⟩⟨ψ⁻| + (1 − p) 𝟙/4`.
pub fn werner_matrix(p: f64) -> Mat4 {
    let psi = crate::bipartite::bell_state(crate::bipartite::BellState::PsiMinus).density();
    psi * c(p) + Mat4::identity() * c((1.0 - p) / 4.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bipartite::{bell_state, evolve_bipartite, BellState};
    use crate::linalg::C64;

    #[test]
    fn bell_state_is_maximally_entangled() {
        let psi = bell_state(BellState::PsiMinus);
        let r = wootters_concurrence(&psi.density()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12, "{r:?}");
        assert!((initial_concurrence(&psi) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn product_state_is_separable() {
        let psi = PureTwoKaonState::new([1.0, 0.0, 0.0, 0.0], [0.0; 4]).unwrap();
        assert!(wootters_concurrence(&psi.density()).unwrap().value < 1e-12);
    }

    #[test]
    fn reference_states() {
        let xi = initial_concurrence(&PureTwoKaonState::xi());
        let chi = initial_concurrence(&PureTwoKaonState::chi());
        assert!((xi - 0.8378).abs() < 5e-4, "{xi}");
        assert!((chi - 0.9403).abs() < 5e-4, "{chi}");
    }

    #[test]
    fn closed_form_matches_wootters_on_evolved_block() {
        let p = MesonParameters::default();
        let psi = PureTwoKaonState::chi();
        for (tl, tr) in [(0.0, 0.0), (0.5, 1.0), (3.0, 0.0), (8.0, 9.0)] {
            let s = evolve_bipartite(&psi, tl, tr, &p).unwrap();
            let w = wootters_concurrence(&s.ssss).unwrap().value;
            let cf = concurrence_closed_form(&psi, tl, tr, &p).unwrap();
            assert!((w - cf).abs() < 1e-10, "{w} vs {cf}");
        }
    }

    #[test]
    fn entanglement_of_formation() {
        assert_eq!(eof_from_concurrence(0.0).unwrap(), 0.0);
        assert!((eof_from_concurrence(1.0).unwrap() - 1.0).abs() < 1e-15);
        let mut prev = -1.0;
        for k in 0..100 {
            let e = eof_from_concurrence(k as f64 / 99.0).unwrap();
            assert!(e > prev);
            prev = e;
        }
        assert!(eof_from_concurrence(1.5).is_err());
        assert!(eof_from_concurrence(-0.1).is_err());
    }

    #[test]
    fn ppt_of_bell_state() {
        let p = MesonParameters::default();
        let s = evolve_bipartite(&bell_state(BellState::PsiMinus), 0.0, 0.0, &p).unwrap();
        assert!((ppt_min_eigenvalue(&s) + 0.5).abs() < 1e-12);
        let late = evolve_bipartite(&bell_state(BellState::PsiMinus), 1e5, 1e5, &p).unwrap();
        assert!(ppt_min_eigenvalue(&late) >= -1e-15);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let mut m = Mat4::identity() * c(0.25);
        m[(0, 1)] = C64::new(0.1, 0.0);
        assert!(wootters_concurrence(&m).is_err());
    }

    #[test]
    fn hermitian_route_agrees_on_mixed_states() {
        for p in [0.2, 0.6, 0.9] {
            let m = werner_matrix(p);
            let a = wootters_concurrence(&m).unwrap().value;
            let b = wootters_concurrence_hermitian(&m).unwrap();
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn werner_concurrence() {
        for p in [1.0 / 3.0, 0.5, 0.8, 1.0] {
            let cw = wootters_concurrence(&werner_matrix(p)).unwrap().value;
            assert!((cw - (1.5 * p - 0.5).max(0.0)).abs() < 1e-12, "p={p}: {cw}");
        }
    }
}
