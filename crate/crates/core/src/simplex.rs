// Copyright 2026 The kaonbell Authors
// SPDX-License-Identifier: Apache-2.0

//! Derivative-free local minimization.

/// Outcome of one simplex search.
#[derive(Debug, Clone)]
pub struct SimplexRun {
    pub x_best: Vec<f64>,
    pub f_best: f64,
    pub evals: usize,
    pub exhausted: bool,
}

/// Convergence threshold on the spread of objective values.
const F_TOL: f64 = 1e-10;
const X_TOL: f64 = 1e-9;
const MAX_RESTARTS: usize = 8;

/// Minimizes `f` with the dimension-adaptive Nelder–Mead simplex, restarting
/// around the incumbent after convergence until a restart stops improving
/// or `max_evals` is spent.
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64, x0: &[f64], steps: &[f64], max_evals: usize) -> SimplexRun {
    let n = x0.len();
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);

    let mut evals = 0usize;
    let mut best_x = x0.to_vec();
    let mut best_f = f64::INFINITY;
    let eval = |x: &[f64], evals: &mut usize, best_x: &mut Vec<f64>, best_f: &mut f64| -> Option<f64> {
        if *evals >= max_evals {
            return None;
        }
        *evals += 1;
        let v = f(x);
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v < *best_f {
            *best_f = v;
            best_x.copy_from_slice(x);
        }
        Some(v)
    };

    let mut scale = 1.0;
    let mut centre = x0.to_vec();
    'restarts: for _ in 0..=MAX_RESTARTS {
        let before = best_f;
        // simplex around the current centre
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut v = centre.clone();
            if k > 0 {
                v[k - 1] += scale * steps[k - 1];
            }
            let Some(fv) = eval(&v, &mut evals, &mut best_x, &mut best_f) else {
                break 'restarts;
            };
            simplex.push((v, fv));
        }

        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let spread = simplex[n].1 - simplex[0].1;
            let size = simplex[1..]
                .iter()
                .map(|(v, _)| v.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            if spread <= F_TOL && size <= X_TOL.max(F_TOL) || size <= X_TOL {
                break;
            }

            let mut centroid = vec![0.0; n];
            for (v, _) in &simplex[..n] {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x / nf;
                }
            }
            let along = |t: f64| -> Vec<f64> {
                centroid.iter().zip(&simplex[n].0).map(|(c, w)| c + t * (c - w)).collect()
            };

            let xr = along(alpha);
            let Some(fr) = eval(&xr, &mut evals, &mut best_x, &mut best_f) else {
                break 'restarts;
            };
            if fr < simplex[0].1 {
                let xe = along(beta);
                let Some(fe) = eval(&xe, &mut evals, &mut best_x, &mut best_f) else {
                    break 'restarts;
                };
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
                continue;
            }
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = along(gamma);
                let Some(fc) = eval(&xc, &mut evals, &mut best_x, &mut best_f) else {
                    break 'restarts;
                };
                (xc, fc)
            } else {
                let xc = along(-gamma);
                let Some(fc) = eval(&xc, &mut evals, &mut best_x, &mut best_f) else {
                    break 'restarts;
                };
                (xc, fc)
            };
            if fc < fr.min(simplex[n].1) {
                simplex[n] = (xc, fc);
                continue;
            }
            // shrink towards the best vertex
            let x_best = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                let v: Vec<f64> = x_best.iter().zip(&vertex.0).map(|(b, x)| b + delta * (x - b)).collect();
                let Some(fv) = eval(&v, &mut evals, &mut best_x, &mut best_f) else {
                    break 'restarts;
                };
                *vertex = (v, fv);
            }
        }

        if before.is_finite() && before - best_f <= F_TOL {
            break;
        }
        centre = best_x.clone();
        scale *= 0.5;
    }

    SimplexRun { x_best: best_x, f_best: best_f, exhausted: evals >= max_evals, evals }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_minimizes_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let run = nelder_mead(f, &[-1.2, 1.0], &[0.5, 0.5], 10_000);
        assert!(run.f_best < 1e-12, "{run:?}");
        assert!(run.evals <= 10_000);
    }

    #[test]
    fn budget_is_respected() {
        let f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let run = nelder_mead(f, &[3.0; 6], &[1.0; 6], 50);
        assert_eq!(run.evals, 50);
        assert!(run.exhausted);
    }
}
