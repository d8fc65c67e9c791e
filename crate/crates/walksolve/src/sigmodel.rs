//! Stationary input generation, FIR plant simulation, and construction of
//! the correlation quantities `R` and `b`, both in closed form and from
//! sample estimates.
//!
//! Generation is keyed solely by `(model, n, seed)`: the same arguments
//! reproduce the same sequence bit for bit, regardless of what else runs in
//! the process.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corrmath::{toeplitz_from_autocorr, CorrelationMatrix, RealVector};

/// Maximum supported plant length.
pub const MAX_TAPS: usize = 64;

#[derive(Debug, Error)]
pub enum SigModelError {
    #[error("sample count must be at least 1, got {0}")]
    InvalidSampleCount(usize),
    #[error("impulse response must be non-empty")]
    EmptyImpulse,
    #[error("impulse response length {0} exceeds the supported maximum {MAX_TAPS}")]
    TooManyTaps(usize),
    #[error("maxlag {maxlag} must be smaller than the sample count {n}")]
    MaxLagTooLarge { maxlag: usize, n: usize },
    #[error("length mismatch: x has {x} samples, d has {d}")]
    LengthMismatch { x: usize, d: usize },
    #[error("requested {requested} correlation lags from only {available} samples")]
    NotEnoughSamples { requested: usize, available: usize },
    #[error("invalid input model: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    CorrMath(#[from] crate::corrmath::CorrMathError),
}

/// Wide-sense-stationary input process.
///
/// `IID` draws independent Gaussians; `AR1` is a first-order autoregression
/// `x_t = a x_{t-1} + e_t` with the innovation scaled so the stationary
/// variance equals `variance`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum InputModel {
    #[serde(rename = "IID")]
    Iid {
        #[serde(default = "default_variance")]
        variance: f64,
    },
    #[serde(rename = "AR1")]
    Ar1 {
        a: f64,
        #[serde(default = "default_variance")]
        variance: f64,
    },
}

fn default_variance() -> f64 {
    1.0
}

impl InputModel {
    pub fn iid_unit() -> Self {
        Self::Iid { variance: 1.0 }
    }

    pub fn variance(&self) -> f64 {
        match self {
            Self::Iid { variance } | Self::Ar1 { variance, .. } => *variance,
        }
    }

    pub fn validate(&self) -> Result<(), SigModelError> {
        let variance = self.variance();
        if !(variance.is_finite() && variance > 0.0) {
            return Err(SigModelError::InvalidModel(format!(
                "variance must be positive and finite, got {variance}"
            )));
        }
        if let Self::Ar1 { a, .. } = self {
            if !(a.is_finite() && a.abs() < 1.0) {
                return Err(SigModelError::InvalidModel(format!(
                    "AR(1) coefficient must satisfy |a| < 1, got {a}"
                )));
            }
        }
        Ok(())
    }
}

/// Unknown-system impulse response.
#[derive(Debug, Clone, PartialEq)]
pub struct Plant {
    h: RealVector,
}

impl Plant {
    pub fn new(h: RealVector) -> Result<Self, SigModelError> {
        if h.is_empty() {
            return Err(SigModelError::EmptyImpulse);
        }
        if h.len() > MAX_TAPS {
            return Err(SigModelError::TooManyTaps(h.len()));
        }
        Ok(Self { h })
    }

    pub fn taps(&self) -> &RealVector {
        &self.h
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// An input stream together with the plant output it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub x: Vec<f64>,
    pub d: Vec<f64>,
    pub seed: u64,
}

impl SampleSet {
    /// Generates `n` input samples from `model` and runs them through the
    /// plant.
    pub fn simulate(
        model: &InputModel,
        plant: &Plant,
        n: usize,
        seed: u64,
    ) -> Result<Self, SigModelError> {
        let x = generate_input(model, n, seed)?;
        let d = fir_output(plant.taps(), &x)?;
        Ok(Self { x, d, seed })
    }
}

/// Draws `n` samples of the given stationary process. Deterministic in
/// `(model, n, seed)`.
pub fn generate_input(model: &InputModel, n: usize, seed: u64) -> Result<Vec<f64>, SigModelError> {
    if n < 1 {
        return Err(SigModelError::InvalidSampleCount(n));
    }
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *model {
        InputModel::Iid { variance } => {
            let normal = Normal::new(0.0, variance.sqrt()).expect("validated std dev");
            Ok((0..n).map(|_| normal.sample(&mut rng)).collect())
        }
        InputModel::Ar1 { a, variance } => {
            // Start from the stationary distribution so every sample has the
            // target variance, not just the tail.
            let stationary = Normal::new(0.0, variance.sqrt()).expect("validated std dev");
            let innovation =
                Normal::new(0.0, (variance * (1.0 - a * a)).sqrt()).expect("validated std dev");
            let mut out = Vec::with_capacity(n);
            let mut prev = stationary.sample(&mut rng);
            out.push(prev);
            for _ in 1..n {
                prev = a * prev + innovation.sample(&mut rng);
                out.push(prev);
            }
            Ok(out)
        }
    }
}

/// FIR convolution `d_n = sum_k h_k x_{n-k}` with zero prehistory
/// (`x_m = 0` for `m < 0`).
pub fn fir_output(h: &RealVector, x: &[f64]) -> Result<Vec<f64>, SigModelError> {
    if h.is_empty() {
        return Err(SigModelError::EmptyImpulse);
    }
    let mut d = Vec::with_capacity(x.len());
    for n in 0..x.len() {
        let mut acc = 0.0;
        for (k, hk) in h.iter().enumerate() {
            if k > n {
                break;
            }
            acc += hk * x[n - k];
        }
        d.push(acc);
    }
    Ok(d)
}

/// Biased autocorrelation estimate `r_k = (1/n) sum_t x_t x_{t+k}` for
/// `k = 0..=maxlag`. The `1/n` normalization keeps the implied Toeplitz
/// matrix positive semidefinite.
pub fn estimate_autocorr(x: &[f64], maxlag: usize) -> Result<Vec<f64>, SigModelError> {
    let n = x.len();
    if maxlag >= n {
        return Err(SigModelError::MaxLagTooLarge { maxlag, n });
    }
    let scale = 1.0 / n as f64;
    Ok((0..=maxlag)
        .map(|k| {
            let sum: f64 = x[..n - k].iter().zip(&x[k..]).map(|(a, b)| a * b).sum();
            sum * scale
        })
        .collect())
}

/// Cross-correlation estimate `b_k = (1/n) sum_t x_{t-k} d_t` with zero
/// prehistory, for `k = 0..N-1`.
pub fn estimate_crosscorr(x: &[f64], d: &[f64], n: usize) -> Result<RealVector, SigModelError> {
    if x.len() != d.len() {
        return Err(SigModelError::LengthMismatch {
            x: x.len(),
            d: d.len(),
        });
    }
    if n > x.len() {
        return Err(SigModelError::NotEnoughSamples {
            requested: n,
            available: x.len(),
        });
    }
    let scale = 1.0 / x.len() as f64;
    let values = (0..n)
        .map(|k| {
            let sum: f64 = d[k..].iter().zip(&x[..x.len() - k]).map(|(dt, xt)| xt * dt).sum();
            sum * scale
        })
        .collect();
    Ok(RealVector::new(values)?)
}

/// Closed-form `R` and `b` for the given plant and input model.
///
/// IID input gives `r = [variance, 0, ...]` and `b = variance * h`; AR(1)
/// gives the geometric autocorrelation `r_k = variance * a^k` and `b = R h`.
pub fn exact_correlations(
    plant: &Plant,
    model: &InputModel,
) -> Result<(CorrelationMatrix, RealVector), SigModelError> {
    model.validate()?;
    let n = plant.len();
    let variance = model.variance();
    match *model {
        InputModel::Iid { .. } => {
            let mut r = vec![0.0; n];
            r[0] = variance;
            let b = plant.taps().iter().map(|hk| variance * hk).collect();
            Ok((toeplitz_from_autocorr(&r)?, RealVector::new(b)?))
        }
        InputModel::Ar1 { a, .. } => {
            let mut r = Vec::with_capacity(n);
            let mut pow = variance;
            for _ in 0..n {
                r.push(pow);
                pow *= a;
            }
            let matrix = toeplitz_from_autocorr(&r)?;
            let b = matrix.to_dense().mul_vec(plant.taps())?;
            Ok((matrix, RealVector::new(b)?))
        }
    }
}
