// Copyright 2026 The kaonbell Authors
// SPDX-License-Identifier: Apache-2.0

//! Small dense complex matrices used throughout the crate.
//!
//! Two-particle operators are 4×4 with composite index `2·left + right`;
//! single-particle indices are `0 = K_S`, `1 = K_L`.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest absolute deviation from Hermiticity.
pub fn hermiticity_defect<const N: usize>(m: &nalgebra::SMatrix<C64, N, N>) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..N {
        for j in i..N {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues of a Hermitian 4×4 matrix, ascending.
pub fn hermitian_eigenvalues(m: &Mat4) -> [f64; 4] {
    let h = (m + m.adjoint()) * c(0.5);
    let mut ev = [0.0; 4];
    ev.copy_from_slice(h.symmetric_eigenvalues().as_slice());
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues of a Hermitian 2×2 matrix, ascending (closed form).
pub fn hermitian_eigenvalues2(m: &Mat2) -> [f64; 2] {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)].conj());
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    [mean - rad, mean + rad]
}

/// Principal square root of a Hermitian positive semidefinite 4×4 matrix.
/// Eigenvalues below zero (round-off) are clamped.
pub fn sqrt_psd(m: &Mat4) -> Mat4 {
    let h = (m + m.adjoint()) * c(0.5);
    let eig = h.symmetric_eigen();
    let mut out = Mat4::zeros();
    for k in 0..4 {
        let lam = eig.eigenvalues[k].max(0.0).sqrt();
        if lam == 0.0 {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        out += (v * v.adjoint()) * c(lam);
    }
    out
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, col| a[(r / 2, col / 2)] * b[(r % 2, col % 2)])
}

/// Transpose on the right factor only.
pub fn partial_transpose_right(m: &Mat4) -> Mat4 {
    Mat4::from_fn(|r, col| {
        let (n, l) = (r / 2, r % 2);
        let (mm, k) = (col / 2, col % 2);
        m[(2 * n + k, 2 * mm + l)]
    })
}

/// Trace over the right factor.
pub fn trace_right(m: &Mat4) -> Mat2 {
    Mat2::from_fn(|n, mm| m[(2 * n, 2 * mm)] + m[(2 * n + 1, 2 * mm + 1)])
}

/// Trace over the left factor.
pub fn trace_left(m: &Mat4) -> Mat2 {
    Mat2::from_fn(|l, k| m[(l, k)] + m[(2 + l, 2 + k)])
}

/// `Σ |m_ij|²`.
pub fn frobenius_sq<const N: usize>(m: &nalgebra::SMatrix<C64, N, N>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Real part of the trace.
pub fn trace_re<const N: usize>(m: &nalgebra::SMatrix<C64, N, N>) -> f64 {
    m.trace().re
}

/// `σ_y ⊗ σ_y`.
pub fn sigma_y_y() -> Mat4 {
    let sy = Mat2::new(ZERO, -I, I, ZERO);
    kron(&sy, &sy)
}
