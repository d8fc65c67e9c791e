//! Experiment orchestration: build a problem from a config, run the Monte
//! Carlo solver and the adaptive baselines over an iteration ladder, and
//! assemble a machine-readable report.

pub mod config;
pub mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{
    mult_count_per_step, AlgorithmConfig, AlgorithmKind, BaselineError, FilterState,
    RegressorFrame,
};
use crate::corrmath::{self, norm2, CorrelationMatrix, RealVector};
use crate::mcsolve::{
    self, McSolveError, ProbabilityScheme, SolveOptions, Verdict, DEFAULT_MAX_STEPS,
};
use crate::sigmodel::{
    estimate_autocorr, estimate_crosscorr, exact_correlations, Plant, SampleSet, SigModelError,
};

pub use config::{AlgorithmEntry, CorrelationSource, ExperimentConfig, McmcSettings, WalksPolicy};
pub use report::{
    emit_report, to_csv_string, to_json_string, ExperimentReport, ReportFormat, ReportMetadata,
    ReportRow,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("iteration ladder needs {needed} samples but only {available} are available")]
    LadderExceedsSamples { needed: u64, available: u64 },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    SigModel(#[from] SigModelError),
    #[error(transparent)]
    McSolve(#[from] McSolveError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    CorrMath(#[from] corrmath::CorrMathError),
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Runs every configured algorithm over the iteration ladder and snapshots
/// `||h - w||_2` at each point. Deterministic given the config.
///
/// Baselines consume the generated sample stream one frame per iteration.
/// The Monte Carlo solver re-solves at each ladder point with the walk count
/// given by the configured policy (by default the ladder value itself, so
/// its unit of work per iteration matches the per-sample updates of the
/// baselines in the complexity accounting).
pub fn run_identification(config: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    config.validate()?;
    let plant = Plant::new(RealVector::new(config.plant_h.clone())?)?;
    let n = plant.len();
    let h = plant.taps().as_slice().to_vec();

    let needs_stream = config.baseline_entries().next().is_some()
        || matches!(config.correlation_source, CorrelationSource::Empirical { .. });
    let stream_len = match config.correlation_source {
        CorrelationSource::Exact => config.ladder_max(),
        CorrelationSource::Empirical { n_samples } => {
            if (n_samples as u64) < config.ladder_max() {
                return Err(HarnessError::LadderExceedsSamples {
                    needed: config.ladder_max(),
                    available: n_samples as u64,
                });
            }
            if n_samples <= n {
                return Err(HarnessError::Config(format!(
                    "EMPIRICAL mode needs more than {n} samples to estimate {n} lags"
                )));
            }
            n_samples as u64
        }
    };
    let samples = if needs_stream {
        Some(SampleSet::simulate(
            &config.input_model,
            &plant,
            stream_len as usize,
            config.seed,
        )?)
    } else {
        None
    };

    // Correlation quantities for the Monte Carlo solver.
    let correlations = if config.includes_mcmc() {
        Some(match config.correlation_source {
            CorrelationSource::Exact => exact_correlations(&plant, &config.input_model)?,
            CorrelationSource::Empirical { .. } => {
                let set = samples.as_ref().expect("stream generated for empirical mode");
                let lags = estimate_autocorr(&set.x, n - 1)?;
                let r = corrmath::toeplitz_from_autocorr(&lags)?;
                let b = estimate_crosscorr(&set.x, &set.d, n)?;
                (r, b)
            }
        })
    } else {
        None
    };

    let mut precheck = None;
    let mut forced_divergent = false;
    if let Some((r, _)) = &correlations {
        let check = mcsolve::precheck_convergence(r);
        if check.verdict == Verdict::Divergent {
            if !config.force {
                return Err(HarnessError::McSolve(McSolveError::Divergent {
                    rho: check.spectral_radius_f,
                }));
            }
            forced_divergent = true;
        }
        precheck = Some(check);
    }

    let mut rows = Vec::new();
    for entry in &config.algorithms {
        if entry.algorithm == AlgorithmKind::Mcmc {
            let (r, b) = correlations.as_ref().expect("built when MCMC is configured");
            let scheme = ProbabilityScheme {
                kind: config.mcmc.scheme,
                absorb: config.mcmc.absorb,
            };
            let started = Instant::now();
            for &point in &config.iteration_ladder {
                let walks = match config.mcmc.walks_per_point {
                    WalksPolicy::Ladder => point,
                    WalksPolicy::Fixed { walks } => walks,
                };
                let mut options = SolveOptions::new(scheme, walks, config.seed);
                options.max_steps = config.mcmc.max_steps;
                options.force = config.force;
                let solution = mcsolve::solve(r, b, &options)?;
                let diff: Vec<f64> = h
                    .iter()
                    .zip(solution.weights.iter())
                    .map(|(hi, wi)| hi - wi)
                    .collect();
                rows.push(ReportRow {
                    algorithm: AlgorithmKind::Mcmc,
                    iterations: point,
                    error_norm: norm2(&diff),
                    multiplications: mult_count_per_step(AlgorithmKind::Mcmc, n) * walks,
                    wall_ms: started.elapsed().as_secs_f64() * 1e3,
                });
            }
        } else {
            let set = samples.as_ref().expect("stream generated for baselines");
            let algo_config = AlgorithmConfig::from_params(entry.algorithm, &entry.params)?;
            let mut state = FilterState::init(algo_config, n)?;
            let started = Instant::now();
            let mut ladder_iter = config.iteration_ladder.iter().copied().peekable();
            for t in 0..config.ladder_max() {
                let frame = RegressorFrame::from_stream(&set.x, &set.d, t as usize, n);
                state.step(&frame)?;
                if ladder_iter.peek() == Some(&(t + 1)) {
                    ladder_iter.next();
                    let diff: Vec<f64> = h
                        .iter()
                        .zip(state.weights())
                        .map(|(hi, wi)| hi - wi)
                        .collect();
                    rows.push(ReportRow {
                        algorithm: entry.algorithm,
                        iterations: t + 1,
                        error_norm: norm2(&diff),
                        multiplications: state.mult_count(),
                        wall_ms: started.elapsed().as_secs_f64() * 1e3,
                    });
                }
            }
        }
    }
    rows.sort_by_key(|row| (row.algorithm, row.iterations));

    Ok(ExperimentReport {
        rows,
        metadata: ReportMetadata {
            config: config.clone(),
            precheck,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            forced_divergent,
        },
    })
}

/// One row of a walk-count study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub walks: u64,
    /// Mean over seeds and components of `|estimate - direct solution|`.
    pub mean_abs_error: f64,
    pub mean_stderr: f64,
}

/// Measures estimate error against the direct solver across a walk-count
/// ladder, averaged over seeds. Refuses divergent systems.
pub fn run_walk_study(
    r: &CorrelationMatrix,
    b: &RealVector,
    scheme: &ProbabilityScheme,
    walk_ladder: &[u64],
    seeds: &[u64],
) -> Result<Vec<StudyRow>, HarnessError> {
    if walk_ladder.is_empty() || seeds.is_empty() {
        return Err(HarnessError::Config(
            "walk ladder and seed list must be non-empty".to_string(),
        ));
    }
    let precheck = mcsolve::precheck_convergence(r);
    if precheck.verdict == Verdict::Divergent {
        return Err(HarnessError::McSolve(McSolveError::Divergent {
            rho: precheck.spectral_radius_f,
        }));
    }
    let reference = corrmath::direct_solve(r, b)?;
    let mut rows = Vec::with_capacity(walk_ladder.len());
    for &walks in walk_ladder {
        let mut abs_err_sum = 0.0;
        let mut stderr_sum = 0.0;
        let mut count = 0.0;
        for &seed in seeds {
            let mut options = SolveOptions::new(*scheme, walks, seed);
            options.max_steps = DEFAULT_MAX_STEPS;
            let solution = mcsolve::solve(r, b, &options)?;
            for (estimate, truth) in solution.estimates.iter().zip(reference.iter()) {
                abs_err_sum += (estimate.mean - truth).abs();
                stderr_sum += estimate.stderr;
                count += 1.0;
            }
        }
        rows.push(StudyRow {
            walks,
            mean_abs_error: abs_err_sum / count,
            mean_stderr: stderr_sum / count,
        });
    }
    Ok(rows)
}

/// Config for the `walks` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkStudyConfig {
    pub r: Vec<f64>,
    pub b: Vec<f64>,
    #[serde(default = "study_default_scheme")]
    pub scheme: mcsolve::SchemeKind,
    #[serde(default = "study_default_absorb")]
    pub absorb: f64,
    pub walk_ladder: Vec<u64>,
    pub seeds: Vec<u64>,
}

fn study_default_scheme() -> mcsolve::SchemeKind {
    mcsolve::SchemeKind::Uniform
}

fn study_default_absorb() -> f64 {
    mcsolve::DEFAULT_ABSORB
}

impl WalkStudyConfig {
    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn study_to_csv_string(rows: &[StudyRow]) -> String {
    let mut out = String::from("walks,mean_abs_error,mean_stderr\n");
    for row in rows {
        out.push_str(&format!(
            "{},{:.16e},{:.16e}\n",
            row.walks, row.mean_abs_error, row.mean_stderr
        ));
    }
    out
}

pub fn emit_study(rows: &[StudyRow], path: &Path) -> Result<(), HarnessError> {
    report::write_text(path, &study_to_csv_string(rows))
}
