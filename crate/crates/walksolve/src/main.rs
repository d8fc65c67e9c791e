//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 divergence refusal,
//! 3 marginal-convergence warning, 4 I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use walksolve::corrmath::{toeplitz_from_autocorr, CorrelationMatrix, RealVector};
use walksolve::harness::{
    self, emit_report, emit_study, ExperimentConfig, HarnessError, ReportFormat, WalkStudyConfig,
};
use walksolve::mcsolve::{
    self, McSolveError, ProbabilityScheme, SchemeKind, SolveOptions, Verdict, DEFAULT_ABSORB,
    DEFAULT_MAX_STEPS,
};

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_DIVERGENT: u8 = 2;
const EXIT_MARGINAL: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(
    name = "walksolve",
    version,
    about = "Random-walk Monte Carlo solver for Wiener-Hopf normal equations, \
             with adaptive-filter baselines and an experiment harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CliScheme {
    Uniform,
    Magnitude,
}

impl From<CliScheme> for SchemeKind {
    fn from(value: CliScheme) -> Self {
        match value {
            CliScheme::Uniform => SchemeKind::Uniform,
            CliScheme::Magnitude => SchemeKind::Magnitude,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the solution of R w = b by absorbing random walks.
    Solve {
        /// Autocorrelation lags r_0,r_1,... defining the Toeplitz matrix R.
        #[arg(long = "r", value_name = "CSV")]
        r: String,
        /// Right-hand-side vector, comma separated.
        #[arg(long = "b", value_name = "CSV")]
        b: String,
        #[arg(long, value_enum, default_value = "uniform")]
        scheme: CliScheme,
        /// Per-step absorption probability in (0, 1).
        #[arg(long, default_value_t = DEFAULT_ABSORB)]
        absorb: f64,
        /// Walks per unknown.
        #[arg(long)]
        walks: u64,
        #[arg(long)]
        seed: u64,
        /// Run even when the precheck reports divergence.
        #[arg(long)]
        force: bool,
        /// Cap on transient transitions per walk.
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: usize,
    },
    /// Report the convergence precheck for the splitting R = I - F.
    Precheck {
        #[arg(long = "r", value_name = "CSV")]
        r: String,
    },
    /// Run an identification experiment from a JSON config.
    Identify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Walk-count error study over a ladder of walk counts.
    Walks {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Minimum-walk counts and error lower bounds per series depth.
    Bounds {
        #[arg(long = "r", value_name = "CSV")]
        r: String,
        #[arg(long = "b", value_name = "CSV")]
        b: String,
        /// Component (unknown index) the walks start from.
        #[arg(long)]
        component: usize,
        /// Maximum series depth j.
        #[arg(long)]
        depth: usize,
        #[arg(long, value_enum, default_value = "uniform")]
        scheme: CliScheme,
        #[arg(long, default_value_t = DEFAULT_ABSORB)]
        absorb: f64,
    },
}

fn main() -> ExitCode {
    // Die quietly when a downstream pipe closes, like any other CSV-emitting
    // filter.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    McSolve(#[from] McSolveError),
    #[error(transparent)]
    CorrMath(#[from] walksolve::corrmath::CorrMathError),
}

fn exit_code_for(err: &CliError) -> u8 {
    match err {
        CliError::Usage(_) => EXIT_USAGE,
        CliError::McSolve(McSolveError::Divergent { .. }) => EXIT_DIVERGENT,
        CliError::McSolve(_) | CliError::CorrMath(_) => EXIT_USAGE,
        CliError::Harness(HarnessError::McSolve(McSolveError::Divergent { .. })) => EXIT_DIVERGENT,
        CliError::Harness(HarnessError::Io { .. }) => EXIT_IO,
        CliError::Harness(_) => EXIT_USAGE,
    }
}

fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Solve {
            r,
            b,
            scheme,
            absorb,
            walks,
            seed,
            force,
            max_steps,
        } => {
            let matrix = parse_matrix(&r)?;
            let rhs = parse_vector(&b, matrix.n())?;
            let options = SolveOptions {
                scheme: ProbabilityScheme {
                    kind: scheme.into(),
                    absorb,
                },
                walks,
                seed,
                max_steps,
                force,
            };
            let solution = mcsolve::solve(&matrix, &rhs, &options)?;
            print_precheck(&solution.precheck);
            println!("component,estimate,stderr,walks,mean_length,max_length,truncated_walks");
            for (i, est) in solution.estimates.iter().enumerate() {
                println!(
                    "{},{:.16e},{:.16e},{},{:.16e},{},{}",
                    i, est.mean, est.stderr, est.walks, est.mean_length, est.max_length,
                    est.truncated_walks
                );
            }
            Ok(warning_code(solution.precheck.verdict))
        }
        Command::Precheck { r } => {
            let matrix = parse_matrix(&r)?;
            let report = mcsolve::precheck_convergence(&matrix);
            print_precheck(&report);
            Ok(match report.verdict {
                Verdict::Convergent => EXIT_OK,
                Verdict::Divergent => EXIT_DIVERGENT,
                Verdict::Marginal => EXIT_MARGINAL,
            })
        }
        Command::Identify {
            config,
            out,
            format,
        } => {
            let format: ReportFormat = format
                .parse()
                .map_err(CliError::Usage)?;
            let config = ExperimentConfig::from_path(&config)?;
            let report = harness::run_identification(&config)?;
            emit_report(&report, format, &out)?;
            println!("wrote {} rows to {}", report.rows.len(), out.display());
            Ok(match report.metadata.precheck.map(|p| p.verdict) {
                Some(Verdict::Marginal) => EXIT_MARGINAL,
                _ => EXIT_OK,
            })
        }
        Command::Walks { config, out } => {
            let study = WalkStudyConfig::from_path(&config)?;
            let matrix = toeplitz_from_autocorr(&study.r)?;
            let rhs = parse_checked(study.b.clone(), matrix.n())?;
            let scheme = ProbabilityScheme {
                kind: study.scheme,
                absorb: study.absorb,
            };
            let precheck = mcsolve::precheck_convergence(&matrix);
            let rows =
                harness::run_walk_study(&matrix, &rhs, &scheme, &study.walk_ladder, &study.seeds)?;
            emit_study(&rows, &out)?;
            println!("wrote {} rows to {}", rows.len(), out.display());
            Ok(warning_code(precheck.verdict))
        }
        Command::Bounds {
            r,
            b,
            component,
            depth,
            scheme,
            absorb,
        } => {
            let matrix = parse_matrix(&r)?;
            let rhs = parse_vector(&b, matrix.n())?;
            let scheme = ProbabilityScheme {
                kind: scheme.into(),
                absorb,
            };
            let precheck = mcsolve::precheck_convergence(&matrix);
            let bounds = mcsolve::error_bounds(&matrix, &rhs, &scheme, component, depth)?;
            println!("depth,min_walks,lower_bound");
            for step in &bounds {
                println!("{},{},{:.16e}", step.depth, step.min_walks, step.lower_bound);
            }
            Ok(warning_code(precheck.verdict))
        }
    }
}

fn warning_code(verdict: Verdict) -> u8 {
    if verdict == Verdict::Marginal {
        EXIT_MARGINAL
    } else {
        EXIT_OK
    }
}

fn print_precheck(report: &mcsolve::PrecheckReport) {
    println!(
        "precheck: verdict={} rho_f={:.16e} gershgorin_center={:.16e} \
         gershgorin_radius={:.16e} interval_ok={} spectral_converged={}",
        report.verdict,
        report.spectral_radius_f,
        report.gershgorin_center,
        report.gershgorin_radius,
        report.eigen_interval_ok,
        report.spectral_converged,
    );
}

fn parse_csv(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Usage(format!("cannot parse `{tok}` as a number: {e}")))
        })
        .collect()
}

fn parse_matrix(text: &str) -> Result<CorrelationMatrix, CliError> {
    Ok(toeplitz_from_autocorr(&parse_csv(text)?)?)
}

fn parse_vector(text: &str, expected: usize) -> Result<RealVector, CliError> {
    parse_checked(parse_csv(text)?, expected)
}

fn parse_checked(values: Vec<f64>, expected: usize) -> Result<RealVector, CliError> {
    if values.len() != expected {
        return Err(CliError::Usage(format!(
            "expected {expected} values for b, got {}",
            values.len()
        )));
    }
    Ok(RealVector::new(values)?)
}
