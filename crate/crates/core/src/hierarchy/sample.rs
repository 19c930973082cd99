//! Randomized upper-bound oracle: rejection sampling over the
//! semialgebraic set.
//!
//! Proposals mix dense Gaussian symmetric tuples with diagonal sign
//! matrices; the latter satisfy squared-unitary and commutation
//! equalities exactly, which pure continuous sampling never hits.

use faer::Mat;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::NcProblem;
use crate::freealg::evaluate;
use crate::Mode;

/// Outcome of the sampling oracle.
#[derive(Debug, Clone)]
pub struct SampleReport {
    /// Least objective value over feasible samples, when any were found.
    pub best: Option<f64>,
    pub feasible: usize,
    pub trials: usize,
}

fn min_eig(m: &Mat<f64>) -> f64 {
    if m.nrows() == 1 {
        return m[(0, 0)];
    }
    m.self_adjoint_eigenvalues(faer::Side::Lower)
        .map(|ev| ev.into_iter().fold(f64::INFINITY, f64::min))
        .unwrap_or(f64::NAN)
}

fn max_abs(m: &Mat<f64>) -> f64 {
    let mut acc = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            acc = acc.max(m[(i, j)].abs());
        }
    }
    acc
}

/// Minimum over sampled feasible tuples of the least eigenvalue
/// (eigenvalue mode) or normalized trace (trace mode) of the objective.
/// Deterministic for a fixed seed. Finding no feasible sample is
/// reported, not an error.
pub fn sample_upper_bound(
    prob: &NcProblem,
    sizes: &[usize],
    trials: usize,
    seed: u64,
) -> SampleReport {
    assert!(trials >= 1, "at least one trial required");
    let sizes = if sizes.is_empty() { &[1usize][..] } else { sizes };
    let mut rng = StdRng::seed_from_u64(seed);
    let nvars = prob.nvars();
    let feas_tol = 1e-8;

    let mut best: Option<f64> = None;
    let mut feasible = 0usize;
    for trial in 0..trials {
        let r = sizes[trial % sizes.len()];
        let diagonal_signs = rng.random::<f64>() < 0.5;
        let mut point = Vec::with_capacity(nvars);
        for _ in 0..nvars {
            let m = if diagonal_signs {
                Mat::<f64>::from_fn(r, r, |i, j| {
                    if i == j {
                        if rng.random::<bool>() {
                            1.0
                        } else {
                            -1.0
                        }
                    } else {
                        0.0
                    }
                })
            } else {
                // Box-Muller normals on the upper triangle
                let mut m = Mat::<f64>::zeros(r, r);
                for i in 0..r {
                    for j in i..r {
                        let u1: f64 = rng.random::<f64>().max(1e-12);
                        let u2: f64 = rng.random();
                        let g = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
                        m[(i, j)] = g;
                        m[(j, i)] = g;
                    }
                }
                m
            };
            point.push(m);
        }

        let mut ok = true;
        for g in prob.inequalities() {
            let v = evaluate(g, &point).expect("sampler builds valid points");
            let scale = 1.0 + max_abs(&v);
            if min_eig(&v) < -feas_tol * scale {
                ok = false;
                break;
            }
        }
        if ok {
            for h in prob.equalities() {
                let v = evaluate(h, &point).expect("sampler builds valid points");
                if max_abs(&v) > feas_tol {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        feasible += 1;
        let value_mat = evaluate(prob.objective(), &point).expect("sampler builds valid points");
        let value = match prob.kind() {
            Mode::Eigenvalue => min_eig(&value_mat),
            Mode::Trace => (0..r).map(|i| value_mat[(i, i)]).sum::<f64>() / r as f64,
        };
        best = Some(best.map_or(value, |b: f64| b.min(value)));
    }
    SampleReport {
        best,
        feasible,
        trials,
    }
}
