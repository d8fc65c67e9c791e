//! Correlation-structured linear algebra.
//!
//! Everything here is small and dense on purpose: the matrices come from
//! filter lengths of at most a few dozen taps, and the direct solver is a
//! reference oracle where clarity beats speed. Toeplitz matrices are stored
//! by their autocorrelation sequence only; dense matrices are row-major.

use std::ops::Deref;

use thiserror::Error;

/// Errors from construction and solving in this module.
#[derive(Debug, Error)]
pub enum CorrMathError {
    #[error("autocorrelation sequence is empty")]
    EmptyAutocorr,
    #[error("non-finite entry at index {0}")]
    NonFinite(usize),
    #[error("lag-zero autocorrelation must be positive, got {0}")]
    NonPositivePower(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular or near-singular: pivot {pivot:.3e} below threshold {threshold:.3e}")]
    Singular { pivot: f64, threshold: f64 },
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
}

/// A vector of finite reals. Construction rejects NaN and infinities.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct RealVector(Vec<f64>);

impl RealVector {
    pub fn new(values: Vec<f64>) -> Result<Self, CorrMathError> {
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            return Err(CorrMathError::NonFinite(idx));
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl Deref for RealVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Symmetric Toeplitz matrix defined by its autocorrelation sequence:
/// entry `(i, j)` is `autocorr[|i - j|]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    autocorr: Vec<f64>,
}

/// Builds a [`CorrelationMatrix`] from the lags `r_0..r_{N-1}`.
///
/// Rejects empty sequences, non-finite entries, and `r_0 <= 0` (the zero-lag
/// value is the signal power).
pub fn toeplitz_from_autocorr(r: &[f64]) -> Result<CorrelationMatrix, CorrMathError> {
    if r.is_empty() {
        return Err(CorrMathError::EmptyAutocorr);
    }
    if let Some(idx) = r.iter().position(|v| !v.is_finite()) {
        return Err(CorrMathError::NonFinite(idx));
    }
    if r[0] <= 0.0 {
        return Err(CorrMathError::NonPositivePower(r[0]));
    }
    Ok(CorrelationMatrix {
        autocorr: r.to_vec(),
    })
}

impl CorrelationMatrix {
    pub fn n(&self) -> usize {
        self.autocorr.len()
    }

    pub fn autocorr(&self) -> &[f64] {
        &self.autocorr
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.autocorr[i.abs_diff(j)]
    }

    /// Materializes the full dense matrix.
    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.n();
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, self.entry(i, j));
            }
        }
        m
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self, CorrMathError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut entries = Vec::with_capacity(nrows * ncols);
        for row in rows {
            if row.len() != ncols {
                return Err(CorrMathError::DimensionMismatch(format!(
                    "ragged row: expected {ncols} columns, got {}",
                    row.len()
                )));
            }
            entries.extend_from_slice(row);
        }
        Ok(Self {
            rows: nrows,
            cols: ncols,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// `self * v` for a matching-length vector.
    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>, CorrMathError> {
        if v.len() != self.cols {
            return Err(CorrMathError::DimensionMismatch(format!(
                "matrix has {} columns, vector has length {}",
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| dot(self.row(i), v))
            .collect())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Maximum absolute row sum.
pub fn norm_inf(m: &DenseMatrix) -> f64 {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|x| x.abs()).sum())
        .fold(0.0, f64::max)
}

/// The full-sum Gershgorin disc `(center, radius)` of a symmetric Toeplitz
/// matrix: center `r_0`, radius the sum of the off-diagonal lag magnitudes.
///
/// This is the radius of the first row's disc. Interior rows see low lags on
/// both sides, so their discs can reach up to twice this radius; every
/// eigenvalue is therefore guaranteed inside `center ± 2 * radius`, and
/// inside `center ± radius` for matrices of size at most 2.
pub fn gershgorin_disc(r: &CorrelationMatrix) -> (f64, f64) {
    let center = r.autocorr()[0];
    let radius = r.autocorr()[1..].iter().map(|v| v.abs()).sum();
    (center, radius)
}

/// Relative pivot threshold for declaring a system singular.
const SINGULARITY_RTOL: f64 = 1e-12;

/// Solves `R w = b` by Gaussian elimination with partial pivoting.
///
/// This is the reference oracle for the Monte Carlo solver, so it favors a
/// plain dense factorization over fast Toeplitz recursions. A pivot whose
/// magnitude falls below `1e-12` times the largest entry of the original
/// matrix is treated as singular.
pub fn direct_solve(r: &CorrelationMatrix, b: &RealVector) -> Result<RealVector, CorrMathError> {
    let n = r.n();
    if b.len() != n {
        return Err(CorrMathError::DimensionMismatch(format!(
            "matrix is {n}x{n}, right-hand side has length {}",
            b.len()
        )));
    }
    let a = r.to_dense();
    let x = solve_dense(a, b.as_slice())?;
    RealVector::new(x)
}

/// Gaussian elimination with partial pivoting on a dense square system.
pub(crate) fn solve_dense(mut a: DenseMatrix, b: &[f64]) -> Result<Vec<f64>, CorrMathError> {
    if !a.is_square() {
        return Err(CorrMathError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let scale = a.entries().iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let threshold = SINGULARITY_RTOL * scale;
    let mut rhs = b.to_vec();

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&p, &q| {
                a.get(p, col)
                    .abs()
                    .partial_cmp(&a.get(q, col).abs())
                    .unwrap()
            })
            .unwrap();
        let pivot = a.get(pivot_row, col);
        if pivot.abs() < threshold || pivot == 0.0 {
            return Err(CorrMathError::Singular {
                pivot: pivot.abs(),
                threshold,
            });
        }
        if pivot_row != col {
            for j in 0..n {
                let tmp = a.get(col, j);
                a.set(col, j, a.get(pivot_row, j));
                a.set(pivot_row, j, tmp);
            }
            rhs.swap(col, pivot_row);
        }
        for row in col + 1..n {
            let factor = a.get(row, col) / a.get(col, col);
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                let v = a.get(row, j) - factor * a.get(col, j);
                a.set(row, j, v);
            }
            rhs[row] -= factor * rhs[col];
        }
    }

    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for (j, xj) in x.iter().enumerate().skip(row + 1) {
            acc -= a.get(row, j) * xj;
        }
        x[row] = acc / a.get(row, row);
    }
    Ok(x)
}

/// Result of power iteration for the spectral radius.
///
/// `converged` is false when the iteration ran out of budget; the value is
/// then still the best available estimate rather than an error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEstimate {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Estimates the spectral radius of a symmetric matrix by power iteration.
///
/// The iteration runs on `F^2`, which is positive semidefinite, so paired
/// `±lambda` eigenvalues of `F` cannot make the estimate oscillate. For
/// symmetric input the returned value is within `tol` of the true spectral
/// radius once `converged` is true.
pub fn spectral_radius(
    f: &DenseMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<SpectralEstimate, CorrMathError> {
    if !f.is_square() {
        return Err(CorrMathError::NotSquare {
            rows: f.rows(),
            cols: f.cols(),
        });
    }
    let n = f.rows();
    if n == 0 {
        return Ok(SpectralEstimate {
            value: 0.0,
            converged: true,
            iterations: 0,
        });
    }

    // Deterministic pseudo-random start vector, so a structured start cannot
    // sit exactly orthogonal to the dominant eigenspace.
    let mut x: Vec<f64> = {
        let mut state = 0x9E37_79B9_7F4A_7C15_u64;
        (0..n)
            .map(|_| {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect()
    };
    normalize(&mut x);

    let mut estimate = 0.0;
    let mut hits = 0;
    for iter in 1..=max_iter {
        // One application of F^2.
        let y = f.mul_vec(&x).expect("square by construction");
        let z = f.mul_vec(&y).expect("square by construction");
        let norm = norm2(&z);
        if norm == 0.0 {
            return Ok(SpectralEstimate {
                value: 0.0,
                converged: true,
                iterations: iter,
            });
        }
        let next = norm.sqrt();
        if (next - estimate).abs() <= 0.25 * tol {
            hits += 1;
            if hits >= 2 {
                return Ok(SpectralEstimate {
                    value: next,
                    converged: true,
                    iterations: iter,
                });
            }
        } else {
            hits = 0;
        }
        estimate = next;
        x = z;
        let inv = 1.0 / norm;
        for v in &mut x {
            *v *= inv;
        }
    }
    Ok(SpectralEstimate {
        value: estimate,
        converged: false,
        iterations: max_iter,
    })
}

fn normalize(x: &mut [f64]) {
    let n = norm2(x);
    if n > 0.0 {
        for v in x.iter_mut() {
            *v /= n;
        }
    } else if let Some(first) = x.first_mut() {
        *first = 1.0;
    }
}
