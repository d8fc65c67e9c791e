//! Shared test oracles, independent of the library's solution paths.

// Each integration test compiles this module separately and uses a subset.
#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use walksolve::corrmath::{toeplitz_from_autocorr, CorrelationMatrix, DenseMatrix, RealVector};
use walksolve::mcsolve::SplitSystem;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
/// ascending. Used as the reference for Gershgorin containment and
/// spectral-radius checks; it shares no code with the library's power
/// iteration.
pub fn jacobi_eigenvalues(m: &DenseMatrix) -> Vec<f64> {
    assert!(m.is_square(), "jacobi oracle needs a square matrix");
    let n = m.rows();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off.sqrt() < 1e-13 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eig
}

/// Random Toeplitz instance with unit power and off-diagonal lag magnitudes
/// summing to `tail_mass`, plus a right-hand side in [-1, 1]^n. By
/// Gershgorin, every eigenvalue of `I - R` then has magnitude at most
/// `tail_mass`.
pub fn random_instance(
    rng: &mut ChaCha8Rng,
    n: usize,
    tail_mass: f64,
) -> (CorrelationMatrix, RealVector) {
    let weights: Vec<f64> = (0..n - 1).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = weights.iter().sum();
    let mut lags = vec![1.0];
    for w in &weights {
        let sign = if rng.random::<f64>() < 0.5 { -1.0 } else { 1.0 };
        lags.push(sign * tail_mass * w / total);
    }
    let b: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    (
        toeplitz_from_autocorr(&lags).unwrap(),
        RealVector::new(b).unwrap(),
    )
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Exact expectation of the walk score when every walk is cut off after at
/// most `cap` transient transitions, by exhaustive enumeration over all
/// paths weighted with their probabilities. Walks that absorb earlier
/// contribute their full score; walks still alive at the cap contribute
/// their partial score.
pub fn truncated_walk_expectation(sys: &SplitSystem, start: usize, cap: usize) -> f64 {
    fn go(sys: &SplitSystem, state: usize, left: usize, prob: f64, weight: f64, score: f64, acc: &mut f64) {
        let n = sys.n();
        if left == 0 {
            *acc += prob * score;
            return;
        }
        *acc += prob * sys.transitions().get(state, n) * score;
        for next in 0..n {
            let p = sys.transitions().get(state, next);
            if p > 0.0 {
                let w = weight * sys.values().get(state, next);
                go(sys, next, left - 1, prob * p, w, score + w * sys.rhs()[next], acc);
            }
        }
    }
    let mut acc = 0.0;
    go(sys, start, cap, 1.0, 1.0, sys.rhs()[start], &mut acc);
    acc
}
