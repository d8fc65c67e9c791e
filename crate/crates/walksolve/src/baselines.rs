//! Classical adaptive baselines for the same identification problem: LMS,
//! NLMS, RLS, and Kaczmarz, each with an instrumented multiplication
//! counter.
//!
//! Counting convention: one real-by-real product in the update recursion
//! counts as one multiplication, a division counts as one, additions and
//! comparisons are free. Every arithmetic step in [`FilterState::step`] goes
//! through the counter, so the reported totals are measured, not asserted.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corrmath::DenseMatrix;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("parameter `{name}` for {algorithm}: {reason}")]
    InvalidParam {
        algorithm: &'static str,
        name: &'static str,
        reason: String,
    },
    #[error("unknown parameter `{0}` (strict parsing)")]
    UnknownParam(String),
    #[error("missing parameter `{name}` for {algorithm}")]
    MissingParam {
        algorithm: &'static str,
        name: &'static str,
    },
    #[error("regressor length {got} does not match filter length {expected}")]
    FrameLength { expected: usize, got: usize },
    #[error("update would divide by the zero-norm regressor")]
    ZeroNormRegressor,
    #[error("filter length must be at least 1")]
    EmptyFilter,
}

/// Algorithm tags. `Mcmc` appears only for complexity accounting and report
/// rows; its solver lives in [`crate::mcsolve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AlgorithmKind {
    #[serde(rename = "KACZMARZ")]
    Kaczmarz,
    #[serde(rename = "LMS")]
    Lms,
    #[serde(rename = "MCMC")]
    Mcmc,
    #[serde(rename = "NLMS")]
    Nlms,
    #[serde(rename = "RLS")]
    Rls,
}

impl AlgorithmKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Kaczmarz => "KACZMARZ",
            Self::Lms => "LMS",
            Self::Mcmc => "MCMC",
            Self::Nlms => "NLMS",
            Self::Rls => "RLS",
        }
    }
}

impl std::fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Typed per-algorithm parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlgorithmConfig {
    /// `w += mu * e * x`. The factor-2 gradient variant is folded into `mu`.
    Lms { mu: f64 },
    /// `w += mu / (epsilon + x'x) * e * x`. `epsilon = 0` is allowed but the
    /// update then refuses zero-norm regressors.
    Nlms { mu: f64, epsilon: f64 },
    /// Exponentially weighted recursion with forgetting factor `lambda` and
    /// inverse-correlation seed `P_0 = (1/delta) I`.
    Rls { lambda: f64, delta: f64 },
    /// Row projection `w += (d - w'x) / (x'x) * x`.
    Kaczmarz,
}

impl AlgorithmConfig {
    pub fn kind(&self) -> AlgorithmKind {
        match self {
            Self::Lms { .. } => AlgorithmKind::Lms,
            Self::Nlms { .. } => AlgorithmKind::Nlms,
            Self::Rls { .. } => AlgorithmKind::Rls,
            Self::Kaczmarz => AlgorithmKind::Kaczmarz,
        }
    }

    /// Builds a typed config from a tag and a name/value map, rejecting
    /// unknown names and missing or out-of-range values.
    pub fn from_params(
        kind: AlgorithmKind,
        params: &BTreeMap<String, f64>,
    ) -> Result<Self, BaselineError> {
        let algorithm = kind.name();
        let take = |name: &'static str| -> Result<f64, BaselineError> {
            params
                .get(name)
                .copied()
                .ok_or(BaselineError::MissingParam { algorithm, name })
        };
        let allowed: &[&str] = match kind {
            AlgorithmKind::Lms => &["mu"],
            AlgorithmKind::Nlms => &["mu", "epsilon"],
            AlgorithmKind::Rls => &["lambda", "delta"],
            AlgorithmKind::Kaczmarz | AlgorithmKind::Mcmc => &[],
        };
        if let Some(unknown) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(BaselineError::UnknownParam(unknown.clone()));
        }
        let config = match kind {
            AlgorithmKind::Lms => Self::Lms { mu: take("mu")? },
            AlgorithmKind::Nlms => Self::Nlms {
                mu: take("mu")?,
                epsilon: params.get("epsilon").copied().unwrap_or(0.0),
            },
            AlgorithmKind::Rls => Self::Rls {
                lambda: take("lambda")?,
                delta: take("delta")?,
            },
            AlgorithmKind::Kaczmarz => Self::Kaczmarz,
            AlgorithmKind::Mcmc => {
                return Err(BaselineError::InvalidParam {
                    algorithm,
                    name: "algorithm",
                    reason: "MCMC is not an adaptive baseline".to_string(),
                })
            }
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), BaselineError> {
        let bad = |algorithm, name, reason: String| BaselineError::InvalidParam {
            algorithm,
            name,
            reason,
        };
        match *self {
            Self::Lms { mu } => {
                if !(mu.is_finite() && mu > 0.0) {
                    return Err(bad("LMS", "mu", format!("must be positive, got {mu}")));
                }
            }
            Self::Nlms { mu, epsilon } => {
                if !(mu.is_finite() && mu > 0.0) {
                    return Err(bad("NLMS", "mu", format!("must be positive, got {mu}")));
                }
                if !(epsilon.is_finite() && epsilon >= 0.0) {
                    return Err(bad(
                        "NLMS",
                        "epsilon",
                        format!("must be nonnegative, got {epsilon}"),
                    ));
                }
            }
            Self::Rls { lambda, delta } => {
                if !(lambda.is_finite() && lambda > 0.0 && lambda <= 1.0) {
                    return Err(bad(
                        "RLS",
                        "lambda",
                        format!("must lie in (0, 1], got {lambda}"),
                    ));
                }
                if !(delta.is_finite() && delta > 0.0) {
                    return Err(bad("RLS", "delta", format!("must be positive, got {delta}")));
                }
            }
            Self::Kaczmarz => {}
        }
        Ok(())
    }
}

/// One adaptation step's view of the data: the `N` most recent input
/// samples, newest first, and the desired sample.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressorFrame {
    pub x: Vec<f64>,
    pub d: f64,
}

impl RegressorFrame {
    /// Builds the frame at sample index `t` from a full input stream, with
    /// zero prehistory.
    pub fn from_stream(x: &[f64], d: &[f64], t: usize, n: usize) -> Self {
        let window = (0..n)
            .map(|k| if t >= k { x[t - k] } else { 0.0 })
            .collect();
        Self { x: window, d: d[t] }
    }
}

/// Adaptive filter state: weights plus algorithm-private memory and the
/// cumulative multiplication count.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    config: AlgorithmConfig,
    weights: Vec<f64>,
    /// Inverse correlation estimate for RLS; unused elsewhere.
    inv_corr: Option<DenseMatrix>,
    mult_count: u64,
}

impl FilterState {
    /// Initializes weights to zero; RLS additionally seeds its
    /// inverse-correlation matrix with `(1/delta) I`.
    pub fn init(config: AlgorithmConfig, n: usize) -> Result<Self, BaselineError> {
        config.validate()?;
        if n == 0 {
            return Err(BaselineError::EmptyFilter);
        }
        let inv_corr = match config {
            AlgorithmConfig::Rls { delta, .. } => {
                let mut p = DenseMatrix::zeros(n, n);
                for i in 0..n {
                    p.set(i, i, 1.0 / delta);
                }
                Some(p)
            }
            _ => None,
        };
        Ok(Self {
            config,
            weights: vec![0.0; n],
            inv_corr,
            mult_count: 0,
        })
    }

    pub fn kind(&self) -> AlgorithmKind {
        self.config.kind()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mult_count(&self) -> u64 {
        self.mult_count
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    /// Runs one update and returns the prior error `e = d - w'x`.
    pub fn step(&mut self, frame: &RegressorFrame) -> Result<f64, BaselineError> {
        let n = self.weights.len();
        if frame.x.len() != n {
            return Err(BaselineError::FrameLength {
                expected: n,
                got: frame.x.len(),
            });
        }
        let mut ops = Ops::default();
        let error = match self.config {
            AlgorithmConfig::Lms { mu } => {
                let e = frame.d - ops.dot(&self.weights, &frame.x);
                let gain = ops.mul(mu, e);
                for (w, &x) in self.weights.iter_mut().zip(&frame.x) {
                    *w += ops.mul(gain, x);
                }
                e
            }
            AlgorithmConfig::Nlms { mu, epsilon } => {
                let e = frame.d - ops.dot(&self.weights, &frame.x);
                let power = ops.dot(&frame.x, &frame.x);
                let denom = epsilon + power;
                if denom == 0.0 {
                    return Err(BaselineError::ZeroNormRegressor);
                }
                let step_size = ops.div(mu, denom);
                let gain = ops.mul(step_size, e);
                for (w, &x) in self.weights.iter_mut().zip(&frame.x) {
                    *w += ops.mul(gain, x);
                }
                e
            }
            AlgorithmConfig::Kaczmarz => {
                let e = frame.d - ops.dot(&self.weights, &frame.x);
                let power = ops.dot(&frame.x, &frame.x);
                if power == 0.0 {
                    return Err(BaselineError::ZeroNormRegressor);
                }
                let inv_power = ops.div(1.0, power);
                let gain = ops.mul(e, inv_power);
                for (w, &x) in self.weights.iter_mut().zip(&frame.x) {
                    *w += ops.mul(gain, x);
                }
                e
            }
            AlgorithmConfig::Rls { lambda, .. } => {
                let p = self.inv_corr.as_mut().expect("seeded at init");
                let e = frame.d - ops.dot(&self.weights, &frame.x);
                // u = P x; P stays symmetric, so x'P is u transposed.
                let mut u = vec![0.0; n];
                for (i, slot) in u.iter_mut().enumerate() {
                    *slot = ops.dot(p.row(i), &frame.x);
                }
                let sigma = lambda + ops.dot(&frame.x, &u);
                let inv_sigma = ops.div(1.0, sigma);
                let gain: Vec<f64> = u.iter().map(|&ui| ops.mul(inv_sigma, ui)).collect();
                for (w, &k) in self.weights.iter_mut().zip(&gain) {
                    *w += ops.mul(k, e);
                }
                let inv_lambda = ops.div(1.0, lambda);
                for (i, &gi) in gain.iter().enumerate() {
                    for (j, &uj) in u.iter().enumerate() {
                        let updated = p.get(i, j) - ops.mul(gi, uj);
                        p.set(i, j, ops.mul(updated, inv_lambda));
                    }
                }
                e
            }
        };
        self.mult_count += ops.count;
        Ok(error)
    }
}

/// Per-iteration multiplication budget the implementation must meet.
///
/// LMS, NLMS, and Kaczmarz budgets are exact measured counts. RLS is a
/// quadratic bound with documented constant [`RLS_BUDGET_FACTOR`]; the
/// implemented recursion spends exactly `3N^2 + 4N + 2`. The MCMC entry is
/// the reference accounting of one multiplication per unknown per walk step.
pub fn mult_count_per_step(kind: AlgorithmKind, n: usize) -> u64 {
    let n = n as u64;
    match kind {
        AlgorithmKind::Lms => 2 * n + 1,
        AlgorithmKind::Nlms | AlgorithmKind::Kaczmarz => 3 * n + 2,
        AlgorithmKind::Rls => RLS_BUDGET_FACTOR * n * n,
        AlgorithmKind::Mcmc => n,
    }
}

/// `c` in the RLS budget `c * N^2`; covers the measured `3N^2 + 4N + 2`
/// count for every `N >= 1`.
pub const RLS_BUDGET_FACTOR: u64 = 9;

/// Exact multiplication count of the implemented RLS step.
pub fn rls_exact_count(n: usize) -> u64 {
    let n = n as u64;
    3 * n * n + 4 * n + 2
}

#[derive(Default)]
struct Ops {
    count: u64,
}

impl Ops {
    #[inline]
    fn mul(&mut self, a: f64, b: f64) -> f64 {
        self.count += 1;
        a * b
    }

    #[inline]
    fn div(&mut self, a: f64, b: f64) -> f64 {
        self.count += 1;
        a / b
    }

    #[inline]
    fn dot(&mut self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(&x, &y)| self.mul(x, y)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(x: &[f64], d: f64) -> RegressorFrame {
        RegressorFrame { x: x.to_vec(), d }
    }

    #[test]
    fn init_shapes() {
        let lms = FilterState::init(AlgorithmConfig::Lms { mu: 0.01 }, 2).unwrap();
        assert_eq!(lms.weights(), &[0.0, 0.0]);
        assert_eq!(lms.mult_count(), 0);

        let rls = FilterState::init(
            AlgorithmConfig::Rls {
                lambda: 1.0,
                delta: 1.0,
            },
            1,
        )
        .unwrap();
        assert_eq!(rls.inv_corr.as_ref().unwrap().get(0, 0), 1.0);

        let nlms = FilterState::init(
            AlgorithmConfig::Nlms {
                mu: 1.0,
                epsilon: 1e-8,
            },
            2,
        )
        .unwrap();
        assert_eq!(nlms.weights(), &[0.0, 0.0]);
    }

    #[test]
    fn init_rejects_bad_params() {
        assert!(FilterState::init(AlgorithmConfig::Lms { mu: 0.0 }, 2).is_err());
        assert!(FilterState::init(
            AlgorithmConfig::Rls {
                lambda: 1.2,
                delta: 1.0
            },
            2
        )
        .is_err());
        assert!(FilterState::init(
            AlgorithmConfig::Rls {
                lambda: 1.0,
                delta: 0.0
            },
            2
        )
        .is_err());
        assert!(FilterState::init(
            AlgorithmConfig::Nlms {
                mu: 1.0,
                epsilon: -1.0
            },
            2
        )
        .is_err());
        assert!(FilterState::init(AlgorithmConfig::Kaczmarz, 0).is_err());
    }

    #[test]
    fn from_params_strictness() {
        let mut params = BTreeMap::new();
        params.insert("mu".to_string(), 0.01);
        assert_eq!(
            AlgorithmConfig::from_params(AlgorithmKind::Lms, &params).unwrap(),
            AlgorithmConfig::Lms { mu: 0.01 }
        );
        params.insert("typo".to_string(), 1.0);
        assert!(matches!(
            AlgorithmConfig::from_params(AlgorithmKind::Lms, &params),
            Err(BaselineError::UnknownParam(_))
        ));
        assert!(matches!(
            AlgorithmConfig::from_params(AlgorithmKind::Rls, &BTreeMap::new()),
            Err(BaselineError::MissingParam { .. })
        ));
    }

    #[test]
    fn lms_single_step() {
        let mut state = FilterState::init(AlgorithmConfig::Lms { mu: 0.1 }, 2).unwrap();
        let e = state.step(&frame(&[1.0, 0.0], 1.0)).unwrap();
        assert_eq!(e, 1.0);
        assert_eq!(state.weights(), &[0.1, 0.0]);
    }

    #[test]
    fn nlms_exact_projection() {
        let mut state = FilterState::init(
            AlgorithmConfig::Nlms {
                mu: 1.0,
                epsilon: 0.0,
            },
            2,
        )
        .unwrap();
        let f = frame(&[1.0, 1.0], 2.0);
        state.step(&f).unwrap();
        assert_eq!(state.weights(), &[1.0, 1.0]);
        let posterior = f.d - state.weights().iter().zip(&f.x).map(|(w, x)| w * x).sum::<f64>();
        assert!(posterior.abs() < 1e-12);
    }

    #[test]
    fn nlms_posterior_error_vanishes_on_random_frames() {
        let mut state = FilterState::init(
            AlgorithmConfig::Nlms {
                mu: 1.0,
                epsilon: 0.0,
            },
            3,
        )
        .unwrap();
        for step_idx in 0..25 {
            let x: Vec<f64> = (0..3)
                .map(|k| ((step_idx * 3 + k) as f64 * 0.817).sin() + 0.2)
                .collect();
            let d = (step_idx as f64 * 1.3).cos();
            let f = frame(&x, d);
            state.step(&f).unwrap();
            let posterior =
                f.d - state.weights().iter().zip(&f.x).map(|(w, x)| w * x).sum::<f64>();
            assert!(posterior.abs() <= 1e-12, "step {step_idx}: {posterior}");
        }
    }

    #[test]
    fn rls_hand_trace() {
        // N = 1, delta = 1, lambda = 1, x = 1, d = 1:
        // sigma = 1 + 1 = 2, k = 1/2, w = 1/2, P = (1 - 1/2) = 1/2.
        let mut state = FilterState::init(
            AlgorithmConfig::Rls {
                lambda: 1.0,
                delta: 1.0,
            },
            1,
        )
        .unwrap();
        let e = state.step(&frame(&[1.0], 1.0)).unwrap();
        assert_eq!(e, 1.0);
        assert_eq!(state.weights(), &[0.5]);
        assert_eq!(state.inv_corr.as_ref().unwrap().get(0, 0), 0.5);
    }

    #[test]
    fn division_guards() {
        let mut kaczmarz = FilterState::init(AlgorithmConfig::Kaczmarz, 2).unwrap();
        assert!(matches!(
            kaczmarz.step(&frame(&[0.0, 0.0], 1.0)),
            Err(BaselineError::ZeroNormRegressor)
        ));

        let mut nlms = FilterState::init(
            AlgorithmConfig::Nlms {
                mu: 1.0,
                epsilon: 0.0,
            },
            2,
        )
        .unwrap();
        assert!(matches!(
            nlms.step(&frame(&[0.0, 0.0], 1.0)),
            Err(BaselineError::ZeroNormRegressor)
        ));

        // A positive epsilon absorbs the zero-norm case.
        let mut nlms = FilterState::init(
            AlgorithmConfig::Nlms {
                mu: 1.0,
                epsilon: 1e-8,
            },
            2,
        )
        .unwrap();
        assert!(nlms.step(&frame(&[0.0, 0.0], 1.0)).is_ok());
    }

    #[test]
    fn frame_length_guard() {
        let mut state = FilterState::init(AlgorithmConfig::Lms { mu: 0.1 }, 2).unwrap();
        assert!(matches!(
            state.step(&frame(&[1.0], 1.0)),
            Err(BaselineError::FrameLength { .. })
        ));
    }

    #[test]
    fn budget_table() {
        assert_eq!(mult_count_per_step(AlgorithmKind::Lms, 2), 5);
        assert_eq!(mult_count_per_step(AlgorithmKind::Nlms, 2), 8);
        assert_eq!(mult_count_per_step(AlgorithmKind::Kaczmarz, 2), 8);
        assert_eq!(mult_count_per_step(AlgorithmKind::Mcmc, 2), 2);
        assert_eq!(mult_count_per_step(AlgorithmKind::Rls, 2), 36);
    }

    #[test]
    fn measured_counts_match_budgets() {
        for n in [1usize, 2, 4, 8] {
            let configs = [
                AlgorithmConfig::Lms { mu: 0.01 },
                AlgorithmConfig::Nlms {
                    mu: 0.5,
                    epsilon: 1e-8,
                },
                AlgorithmConfig::Kaczmarz,
                AlgorithmConfig::Rls {
                    lambda: 0.99,
                    delta: 10.0,
                },
            ];
            for config in configs {
                let mut state = FilterState::init(config, n).unwrap();
                for step_idx in 0..5u64 {
                    let before = state.mult_count();
                    let x: Vec<f64> = (0..n).map(|k| ((k + 1) as f64 * 0.37).sin() + 0.1).collect();
                    state
                        .step(&frame(&x, (step_idx as f64 * 0.91).cos()))
                        .unwrap();
                    let measured = state.mult_count() - before;
                    match config.kind() {
                        AlgorithmKind::Rls => {
                            assert_eq!(measured, rls_exact_count(n));
                            assert!(measured <= mult_count_per_step(AlgorithmKind::Rls, n));
                        }
                        kind => assert_eq!(
                            measured,
                            mult_count_per_step(kind, n),
                            "{kind} at N = {n}"
                        ),
                    }
                }
            }
        }
    }

    #[test]
    fn frame_from_stream_zero_prehistory() {
        let x = [1.0, 2.0, 3.0];
        let d = [10.0, 20.0, 30.0];
        let f = RegressorFrame::from_stream(&x, &d, 0, 2);
        assert_eq!(f.x, vec![1.0, 0.0]);
        assert_eq!(f.d, 10.0);
        let f = RegressorFrame::from_stream(&x, &d, 2, 2);
        assert_eq!(f.x, vec![3.0, 2.0]);
        assert_eq!(f.d, 30.0);
    }

    #[test]
    fn rls_recovers_plant_exactly() {
        // lambda = 1 on noiseless data: after enough exciting frames the
        // only deviation left is the tiny ridge bias from P_0.
        use crate::sigmodel::{generate_input, InputModel};
        let h = [0.9, -0.5, 0.25, 0.1];
        let n = h.len();
        let x = generate_input(&InputModel::iid_unit(), 32, 17).unwrap();
        let d: Vec<f64> = (0..x.len())
            .map(|t| {
                (0..n)
                    .map(|k| if t >= k { h[k] * x[t - k] } else { 0.0 })
                    .sum()
            })
            .collect();
        let mut state = FilterState::init(
            AlgorithmConfig::Rls {
                lambda: 1.0,
                delta: 1e-9,
            },
            n,
        )
        .unwrap();
        for t in 0..x.len() {
            state.step(&RegressorFrame::from_stream(&x, &d, t, n)).unwrap();
        }
        let err: f64 = state
            .weights()
            .iter()
            .zip(&h)
            .map(|(w, h)| (w - h) * (w - h))
            .sum::<f64>()
            .sqrt();
        assert!(err <= 1e-6, "weight error {err}");
    }

    #[test]
    fn lms_stays_bounded() {
        use crate::sigmodel::{generate_input, InputModel};
        let h = [0.8, -0.4];
        let x = generate_input(&InputModel::iid_unit(), 10_000, 23).unwrap();
        let d: Vec<f64> = (0..x.len())
            .map(|t| h[0] * x[t] + if t >= 1 { h[1] * x[t - 1] } else { 0.0 })
            .collect();
        let mut state = FilterState::init(AlgorithmConfig::Lms { mu: 0.01 }, 2).unwrap();
        for t in 0..x.len() {
            state.step(&RegressorFrame::from_stream(&x, &d, t, 2)).unwrap();
            let norm: f64 = state.weights().iter().map(|w| w * w).sum::<f64>().sqrt();
            assert!(norm <= 10.0, "diverged at step {t}: {norm}");
        }
    }
}
