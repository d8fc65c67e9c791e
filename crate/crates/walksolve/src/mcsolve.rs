//! Random-walk Monte Carlo solver for `R w = b`.
//!
//! The matrix is split as `R = I - F`, so the solution is the Neumann series
//! `w = (I + F + F^2 + ...) b`. Each entry `f_ij` is factored into a
//! transition probability and a value, `f_ij = p_ij v_ij`, and an extra
//! absorbing state is appended so every walk terminates. A walk started at
//! state `i` scores `b_i` plus, at every transient state it visits, the
//! running product of values times the source entry there. The expectation
//! of that score is exactly the series sum for `w_i`, term by term: the
//! walks that survive `t` transitions reproduce the `F^t b` term.
//!
//! Averaging many independent walks per unknown therefore estimates the
//! solution, with the usual `1/sqrt(walks)` Monte Carlo error decay. The
//! module also provides the convergence precheck (Gershgorin disc, spectral
//! radius of `F`, eigenvalue interval), minimum-walk counts per depth,
//! truncated series sums, and series-tail error lower bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corrmath::{
    self, gershgorin_disc, spectral_radius, CorrelationMatrix, DenseMatrix, RealVector,
};

/// Default per-step absorption probability.
pub const DEFAULT_ABSORB: f64 = 0.2;
/// Default cap on transient transitions per walk. Absorption makes walk
/// length geometric, so the cap only guards against misconfiguration.
pub const DEFAULT_MAX_STEPS: usize = 10_000;
/// Margin below 1 within which the spectral radius is flagged as marginal.
pub const DEFAULT_MARGIN: f64 = 1e-6;

/// Tolerance for transition-row stochasticity.
const ROW_SUM_TOL: f64 = 1e-12;
/// Tolerance for the `f = p * v` reconstruction on the transient block.
const SPLIT_TOL: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum McSolveError {
    #[error("absorption probability must lie strictly inside (0, 1), got {0}")]
    InvalidAbsorb(f64),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("transition row is malformed: {0}")]
    MalformedRow(String),
    #[error("random number {0} outside [0, 1)")]
    UniformOutOfRange(f64),
    #[error("walk step cap must be at least 1, got {0}")]
    InvalidMaxSteps(usize),
    #[error("walk count must be at least 1, got {0}")]
    InvalidWalks(u64),
    #[error("component index {index} out of range for {n} unknowns")]
    ComponentOutOfRange { index: usize, n: usize },
    #[error("series depth must be at least 1, got {0}")]
    InvalidDepth(usize),
    #[error("no transient path of length {depth} exists: all probability mass is absorbed earlier")]
    NoPath { depth: usize },
    #[error(
        "system is divergent: spectral radius of F is {rho:.6} >= 1; \
         pass force to run anyway"
    )]
    Divergent { rho: f64 },
    #[error(transparent)]
    CorrMath(#[from] corrmath::CorrMathError),
}

/// How the entries of `F` are factored into probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeKind {
    /// Every transient target of a nonzero row gets the same probability
    /// `(1 - absorb) / N`.
    #[serde(rename = "UNIFORM")]
    Uniform,
    /// Probabilities proportional to `|f_ij|`, which keeps the walk-score
    /// variance bounded whenever the row magnitudes sum below 1. Extension
    /// beyond the uniform rule, provided as a variance-reduction option.
    #[serde(rename = "MAGNITUDE")]
    Magnitude,
}

/// Probability factorization rule plus the absorption parameter.
///
/// For `UNIFORM` the absorption probability of every nonzero row equals
/// `absorb` exactly; for `MAGNITUDE` it is a floor (rows with no mass are
/// fully absorbing).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityScheme {
    pub kind: SchemeKind,
    pub absorb: f64,
}

impl ProbabilityScheme {
    pub fn uniform(absorb: f64) -> Self {
        Self {
            kind: SchemeKind::Uniform,
            absorb,
        }
    }

    pub fn magnitude(absorb: f64) -> Self {
        Self {
            kind: SchemeKind::Magnitude,
            absorb,
        }
    }

    fn validate(&self) -> Result<(), McSolveError> {
        if !(self.absorb.is_finite() && self.absorb > 0.0 && self.absorb < 1.0) {
            return Err(McSolveError::InvalidAbsorb(self.absorb));
        }
        Ok(())
    }
}

impl Default for ProbabilityScheme {
    fn default() -> Self {
        Self::uniform(DEFAULT_ABSORB)
    }
}

/// The splitting `R = I - F` together with its walk machinery: the value
/// matrix `V`, the `(N+1) x (N+1)` row-stochastic transition matrix whose
/// last state is absorbing, and the right-hand side.
#[derive(Debug, Clone)]
pub struct SplitSystem {
    n: usize,
    iteration: DenseMatrix,
    values: DenseMatrix,
    transitions: DenseMatrix,
    rhs: RealVector,
    scheme: ProbabilityScheme,
}

impl SplitSystem {
    pub fn n(&self) -> usize {
        self.n
    }

    /// The iteration matrix `F = I - R`.
    pub fn iteration_matrix(&self) -> &DenseMatrix {
        &self.iteration
    }

    pub fn values(&self) -> &DenseMatrix {
        &self.values
    }

    /// The `(N+1) x (N+1)` transition matrix; state `N` is absorbing.
    pub fn transitions(&self) -> &DenseMatrix {
        &self.transitions
    }

    pub fn rhs(&self) -> &RealVector {
        &self.rhs
    }

    pub fn scheme(&self) -> ProbabilityScheme {
        self.scheme
    }

    /// Per-step absorption probability from transient state `i`.
    pub fn absorb_probability(&self, i: usize) -> f64 {
        self.transitions.get(i, self.n)
    }

    fn validate(&self) -> Result<(), McSolveError> {
        let n = self.n;
        for i in 0..=n {
            let mut sum = 0.0;
            for j in 0..=n {
                let p = self.transitions.get(i, j);
                if !(0.0..=1.0).contains(&p) {
                    return Err(McSolveError::MalformedRow(format!(
                        "p[{i}][{j}] = {p} outside [0, 1]"
                    )));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(McSolveError::MalformedRow(format!(
                    "row {i} sums to {sum}, expected 1"
                )));
            }
        }
        // Absorbing state cannot be left.
        for j in 0..n {
            if self.transitions.get(n, j) != 0.0 {
                return Err(McSolveError::MalformedRow(
                    "absorbing state has an outgoing transition".to_string(),
                ));
            }
        }
        if self.transitions.get(n, n) != 1.0 {
            return Err(McSolveError::MalformedRow(
                "absorbing state must map to itself with probability 1".to_string(),
            ));
        }
        for i in 0..n {
            let p_absorb = self.transitions.get(i, n);
            if p_absorb + ROW_SUM_TOL < self.scheme.absorb {
                return Err(McSolveError::MalformedRow(format!(
                    "absorption probability {p_absorb} of row {i} below floor {}",
                    self.scheme.absorb
                )));
            }
            for j in 0..n {
                let p = self.transitions.get(i, j);
                let v = self.values.get(i, j);
                let f = self.iteration.get(i, j);
                if p == 0.0 && f != 0.0 {
                    return Err(McSolveError::MalformedRow(format!(
                        "zero-probability transition {i}->{j} carries nonzero weight {f}"
                    )));
                }
                if (p * v - f).abs() > SPLIT_TOL {
                    return Err(McSolveError::MalformedRow(format!(
                        "p*v = {} does not reconstruct f = {f} at ({i}, {j})",
                        p * v
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Splits `R` into `I - F`, returning `F`.
pub fn split(r: &CorrelationMatrix) -> DenseMatrix {
    let n = r.n();
    let mut f = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let id = if i == j { 1.0 } else { 0.0 };
            f.set(i, j, id - r.entry(i, j));
        }
    }
    f
}

/// Factors `F` into probabilities and values and appends the absorbing
/// state.
///
/// Rows of `F` with no mass become purely absorbing, so walks from those
/// states terminate immediately; this keeps the factorization consistent
/// (`p = 0` only where `f = 0`) and makes the identity-correlation case
/// exact with zero-length walks.
pub fn build_transition(
    f: &DenseMatrix,
    b: &RealVector,
    scheme: &ProbabilityScheme,
) -> Result<SplitSystem, McSolveError> {
    scheme.validate()?;
    if !f.is_square() {
        return Err(McSolveError::NotSquare {
            rows: f.rows(),
            cols: f.cols(),
        });
    }
    let n = f.rows();
    if b.len() != n {
        return Err(McSolveError::DimensionMismatch(format!(
            "F is {n}x{n}, b has length {}",
            b.len()
        )));
    }
    if f.entries().iter().any(|v| !v.is_finite()) {
        return Err(McSolveError::NonFinite("F"));
    }

    let mut values = DenseMatrix::zeros(n, n);
    let mut transitions = DenseMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        let row_mass: f64 = (0..n).map(|j| f.get(i, j).abs()).sum();
        if row_mass == 0.0 {
            transitions.set(i, n, 1.0);
            continue;
        }
        match scheme.kind {
            SchemeKind::Uniform => {
                let p = (1.0 - scheme.absorb) / n as f64;
                for j in 0..n {
                    transitions.set(i, j, p);
                    values.set(i, j, f.get(i, j) / p);
                }
                transitions.set(i, n, scheme.absorb);
            }
            SchemeKind::Magnitude => {
                for j in 0..n {
                    let fij = f.get(i, j);
                    if fij == 0.0 {
                        continue;
                    }
                    let p = (1.0 - scheme.absorb) * fij.abs() / row_mass;
                    transitions.set(i, j, p);
                    values.set(i, j, fij / p);
                }
                let assigned: f64 = (0..n).map(|j| transitions.get(i, j)).sum();
                transitions.set(i, n, 1.0 - assigned);
            }
        }
    }
    transitions.set(n, n, 1.0);

    let sys = SplitSystem {
        n,
        iteration: f.clone(),
        values,
        transitions,
        rhs: b.clone(),
        scheme: *scheme,
    };
    sys.validate()?;
    Ok(sys)
}

/// Maps a uniform draw `u` in `[0, 1)` to the state whose half-open
/// cumulative-probability interval contains it: the smallest `s` with
/// `u < p_0 + ... + p_s`. A boundary hit goes to the next state.
pub fn transition_rule(p_row: &[f64], u: f64) -> Result<usize, McSolveError> {
    if p_row.is_empty() {
        return Err(McSolveError::MalformedRow("empty row".to_string()));
    }
    let mut sum = 0.0;
    for (j, &p) in p_row.iter().enumerate() {
        if !(0.0..=1.0).contains(&p) {
            return Err(McSolveError::MalformedRow(format!(
                "entry {j} = {p} outside [0, 1]"
            )));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > ROW_SUM_TOL {
        return Err(McSolveError::MalformedRow(format!(
            "row sums to {sum}, expected 1"
        )));
    }
    if !(0.0..1.0).contains(&u) {
        return Err(McSolveError::UniformOutOfRange(u));
    }
    Ok(pick_state(p_row, u))
}

/// Unchecked cumulative scan used in the walk hot path; rows come from a
/// validated [`SplitSystem`]. Rounding that leaves `u` past the final
/// cumulative sum lands in the last state.
#[inline]
fn pick_state(p_row: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (idx, &p) in p_row.iter().enumerate() {
        acc += p;
        if u < acc {
            return idx;
        }
    }
    p_row.len() - 1
}

/// One walk's contribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkOutcome {
    /// Accumulated score: `b_start` plus the weighted source entries of
    /// every transient state visited.
    pub score: f64,
    /// Number of transient transitions taken before absorption or cutoff.
    pub length: u32,
    /// True when the step cap fired before absorption; the partial score
    /// still counts.
    pub truncated: bool,
}

/// Runs one walk from `start`, drawing uniforms from `next_u`.
pub fn run_walk(
    sys: &SplitSystem,
    start: usize,
    next_u: impl FnMut() -> f64,
    max_steps: usize,
) -> Result<WalkOutcome, McSolveError> {
    if max_steps < 1 {
        return Err(McSolveError::InvalidMaxSteps(max_steps));
    }
    if start >= sys.n {
        return Err(McSolveError::ComponentOutOfRange {
            index: start,
            n: sys.n,
        });
    }
    Ok(walk_inner(sys, start, next_u, max_steps))
}

fn walk_inner(
    sys: &SplitSystem,
    start: usize,
    mut next_u: impl FnMut() -> f64,
    max_steps: usize,
) -> WalkOutcome {
    let n = sys.n;
    let mut state = start;
    let mut weight = 1.0;
    let mut score = sys.rhs[start];
    let mut length = 0u32;
    loop {
        if length as usize >= max_steps {
            return WalkOutcome {
                score,
                length,
                truncated: true,
            };
        }
        let next = pick_state(sys.transitions.row(state), next_u());
        if next == n {
            return WalkOutcome {
                score,
                length,
                truncated: false,
            };
        }
        weight *= sys.values.get(state, next);
        score += weight * sys.rhs[next];
        state = next;
        length += 1;
    }
}

/// Monte Carlo estimate of one unknown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkEstimate {
    pub mean: f64,
    /// Sample standard deviation of the walk scores divided by
    /// `sqrt(walks)`; zero for a single walk.
    pub stderr: f64,
    pub walks: u64,
    pub mean_length: f64,
    pub max_length: u32,
    pub truncated_walks: u64,
}

/// Derives the RNG for one walk from `(seed, component, walk index)`.
///
/// The component offsets the ChaCha key (the offset map is a bijection on
/// u64, so distinct components can never collide) and the walk index selects
/// the stream, which makes every walk reproducible independently of
/// execution order or thread count.
fn walk_rng(seed: u64, component: usize, walk: u64) -> ChaCha8Rng {
    let component_seed =
        seed.wrapping_add((component as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut rng = ChaCha8Rng::seed_from_u64(component_seed);
    rng.set_stream(walk);
    rng
}

/// Averages `walks` independent walks from state `i` with the default step
/// cap.
pub fn estimate_component(
    sys: &SplitSystem,
    i: usize,
    walks: u64,
    seed: u64,
) -> Result<WalkEstimate, McSolveError> {
    estimate_component_with_cap(sys, i, walks, seed, DEFAULT_MAX_STEPS)
}

/// Averages `walks` independent walks from state `i`.
///
/// Walk `w` draws from an RNG derived from `(seed, i, w)`, and the samples
/// are reduced in walk order with pairwise summation, so the result is
/// identical no matter how the walks are scheduled across threads.
pub fn estimate_component_with_cap(
    sys: &SplitSystem,
    i: usize,
    walks: u64,
    seed: u64,
    max_steps: usize,
) -> Result<WalkEstimate, McSolveError> {
    if walks < 1 {
        return Err(McSolveError::InvalidWalks(walks));
    }
    if max_steps < 1 {
        return Err(McSolveError::InvalidMaxSteps(max_steps));
    }
    if i >= sys.n {
        return Err(McSolveError::ComponentOutOfRange { index: i, n: sys.n });
    }

    let mut samples = vec![
        WalkOutcome {
            score: 0.0,
            length: 0,
            truncated: false,
        };
        walks as usize
    ];
    samples
        .par_iter_mut()
        .enumerate()
        .with_min_len(256)
        .for_each(|(w, slot)| {
            let mut rng = walk_rng(seed, i, w as u64);
            *slot = walk_inner(sys, i, || rng.random::<f64>(), max_steps);
        });

    Ok(summarize(&samples))
}

fn summarize(samples: &[WalkOutcome]) -> WalkEstimate {
    let walks = samples.len() as u64;
    let n = samples.len() as f64;
    let first = samples[0].score;
    let all_equal = samples.iter().all(|s| s.score == first);

    // A constant sample has mean equal to that constant and zero spread;
    // summing would only introduce rounding.
    let (mean, stderr) = if all_equal {
        (first, 0.0)
    } else {
        let mean = pairwise_sum_by(samples, |s| s.score) / n;
        let var = pairwise_sum_by(samples, |s| {
            let d = s.score - mean;
            d * d
        }) / (n - 1.0);
        (mean, (var / n).sqrt())
    };
    let stderr = if walks == 1 { 0.0 } else { stderr };

    WalkEstimate {
        mean,
        stderr,
        walks,
        mean_length: pairwise_sum_by(samples, |s| s.length as f64) / n,
        max_length: samples.iter().map(|s| s.length).max().unwrap_or(0),
        truncated_walks: samples.iter().filter(|s| s.truncated).count() as u64,
    }
}

fn pairwise_sum_by(samples: &[WalkOutcome], f: impl Fn(&WalkOutcome) -> f64 + Copy) -> f64 {
    if samples.len() <= 32 {
        return samples.iter().map(f).sum();
    }
    let mid = samples.len() / 2;
    pairwise_sum_by(&samples[..mid], f) + pairwise_sum_by(&samples[mid..], f)
}

/// Convergence verdict for the splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "CONVERGENT")]
    Convergent,
    #[serde(rename = "DIVERGENT")]
    Divergent,
    #[serde(rename = "MARGINAL")]
    Marginal,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Convergent => "CONVERGENT",
            Verdict::Divergent => "DIVERGENT",
            Verdict::Marginal => "MARGINAL",
        };
        f.write_str(s)
    }
}

/// Result of the convergence precheck.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecheckReport {
    pub gershgorin_center: f64,
    pub gershgorin_radius: f64,
    pub spectral_radius_f: f64,
    /// True when the power iteration met its tolerance within budget; the
    /// radius is otherwise a best-effort estimate.
    pub spectral_converged: bool,
    /// All eigenvalues of `R` lie in the open interval (0, 2), equivalently
    /// all eigenvalues of `F` in (-1, 1).
    pub eigen_interval_ok: bool,
    pub verdict: Verdict,
}

/// Checks whether the Neumann series for `R = I - F` converges.
///
/// Convergent means the spectral radius of `F` sits below `1 - margin` with
/// the default margin of [`DEFAULT_MARGIN`]; estimates inside the margin are
/// flagged marginal rather than trusted.
pub fn precheck_convergence(r: &CorrelationMatrix) -> PrecheckReport {
    precheck_with_margin(r, DEFAULT_MARGIN)
}

pub fn precheck_with_margin(r: &CorrelationMatrix, margin: f64) -> PrecheckReport {
    let (center, radius) = gershgorin_disc(r);
    let f = split(r);
    let est = spectral_radius(&f, 1e-9, 50_000).expect("split matrix is square");
    let rho = est.value;
    let verdict = if rho < 1.0 - margin {
        Verdict::Convergent
    } else if rho < 1.0 {
        Verdict::Marginal
    } else {
        Verdict::Divergent
    };
    PrecheckReport {
        gershgorin_center: center,
        gershgorin_radius: radius,
        spectral_radius_f: rho,
        spectral_converged: est.converged,
        eigen_interval_ok: rho < 1.0,
        verdict,
    }
}

/// Options for [`solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub scheme: ProbabilityScheme,
    /// Walks per unknown.
    pub walks: u64,
    pub seed: u64,
    pub max_steps: usize,
    /// Run even when the precheck says divergent.
    pub force: bool,
}

impl SolveOptions {
    pub fn new(scheme: ProbabilityScheme, walks: u64, seed: u64) -> Self {
        Self {
            scheme,
            walks,
            seed,
            max_steps: DEFAULT_MAX_STEPS,
            force: false,
        }
    }
}

/// Full solver output.
#[derive(Debug, Clone)]
pub struct McmcSolution {
    pub weights: RealVector,
    pub estimates: Vec<WalkEstimate>,
    pub precheck: PrecheckReport,
}

/// Estimates every unknown of `R w = b` by independent random walks.
///
/// Refuses divergent systems unless `force` is set. Deterministic in
/// `(r, b, options)`.
pub fn solve(
    r: &CorrelationMatrix,
    b: &RealVector,
    options: &SolveOptions,
) -> Result<McmcSolution, McSolveError> {
    let precheck = precheck_convergence(r);
    if precheck.verdict == Verdict::Divergent && !options.force {
        return Err(McSolveError::Divergent {
            rho: precheck.spectral_radius_f,
        });
    }
    let f = split(r);
    let sys = build_transition(&f, b, &options.scheme)?;
    let mut estimates = Vec::with_capacity(sys.n());
    for i in 0..sys.n() {
        estimates.push(estimate_component_with_cap(
            &sys,
            i,
            options.walks,
            options.seed,
            options.max_steps,
        )?);
    }
    let weights = RealVector::new(estimates.iter().map(|e| e.mean).collect())
        .map_err(|_| McSolveError::NonFinite("walk estimates"))?;
    Ok(McmcSolution {
        weights,
        estimates,
        precheck,
    })
}

/// Minimum walks needed to cover every `depth`-step terminating point at
/// least once in expectation, minimized over all transient start states.
pub fn min_walks(sys: &SplitSystem, depth: usize) -> Result<u64, McSolveError> {
    min_product_walks(sys.transitions(), sys.n(), None, depth)
}

/// Same as [`min_walks`] but for walks started at `start`.
pub fn min_walks_from(sys: &SplitSystem, start: usize, depth: usize) -> Result<u64, McSolveError> {
    if start >= sys.n() {
        return Err(McSolveError::ComponentOutOfRange {
            index: start,
            n: sys.n(),
        });
    }
    min_product_walks(sys.transitions(), sys.n(), Some(start), depth)
}

/// Dynamic program over minimum path-probability products, restricted to
/// transitions with positive probability. Paths may revisit states.
fn min_product_walks(
    transitions: &DenseMatrix,
    n: usize,
    start: Option<usize>,
    depth: usize,
) -> Result<u64, McSolveError> {
    if depth < 1 {
        return Err(McSolveError::InvalidDepth(depth));
    }
    let mut current = vec![f64::INFINITY; n];
    match start {
        Some(s) => current[s] = 1.0,
        None => current.fill(1.0),
    }
    for _ in 0..depth {
        let mut next = vec![f64::INFINITY; n];
        for (from, &prod) in current.iter().enumerate() {
            if !prod.is_finite() {
                continue;
            }
            for (to, slot) in next.iter_mut().enumerate() {
                let p = transitions.get(from, to);
                if p > 0.0 {
                    let candidate = prod * p;
                    if candidate < *slot {
                        *slot = candidate;
                    }
                }
            }
        }
        current = next;
        if current.iter().all(|v| !v.is_finite()) {
            return Err(McSolveError::NoPath { depth });
        }
    }
    let min_prod = current.iter().copied().fold(f64::INFINITY, f64::min);
    if min_prod <= 0.0 || !min_prod.is_finite() {
        return Err(McSolveError::NoPath { depth });
    }
    Ok((1.0 / min_prod).ceil() as u64)
}

/// Partial Neumann sum: the `i`-th entry of `sum_{t=0}^{m-1} F^t b`.
pub fn truncated_sum(
    f: &DenseMatrix,
    b: &RealVector,
    i: usize,
    m: usize,
) -> Result<f64, McSolveError> {
    if m < 1 {
        return Err(McSolveError::InvalidDepth(m));
    }
    if !f.is_square() {
        return Err(McSolveError::NotSquare {
            rows: f.rows(),
            cols: f.cols(),
        });
    }
    if b.len() != f.rows() {
        return Err(McSolveError::DimensionMismatch(format!(
            "F is {}x{}, b has length {}",
            f.rows(),
            f.cols(),
            b.len()
        )));
    }
    if i >= b.len() {
        return Err(McSolveError::ComponentOutOfRange {
            index: i,
            n: b.len(),
        });
    }
    let mut acc: Vec<f64> = b.to_vec();
    let mut term: Vec<f64> = b.to_vec();
    for _ in 1..m {
        term = f.mul_vec(&term).expect("square by construction");
        for (a, t) in acc.iter_mut().zip(&term) {
            *a += t;
        }
    }
    Ok(acc[i])
}

/// One row of the error-bound table: after the minimum walk count for depth
/// `depth`, the estimate error cannot be below `lower_bound`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundStep {
    pub depth: usize,
    /// Minimum walks covering all `depth`-step terminating points; zero for
    /// depth 0, where no walks have run yet.
    pub min_walks: u64,
    /// `|w_i - s_{i,depth+1}|`: the series tail beyond what those walks can
    /// resolve.
    pub lower_bound: f64,
}

/// Error lower bounds for component `i` at depths `0..=j_max`, paired with
/// the minimum walk counts of the given scheme.
///
/// The reference solution comes from the direct solver, so this check runs
/// on an independent route from the walk estimator.
pub fn error_bounds(
    r: &CorrelationMatrix,
    b: &RealVector,
    scheme: &ProbabilityScheme,
    i: usize,
    j_max: usize,
) -> Result<Vec<BoundStep>, McSolveError> {
    let precheck = precheck_convergence(r);
    if precheck.verdict == Verdict::Divergent {
        return Err(McSolveError::Divergent {
            rho: precheck.spectral_radius_f,
        });
    }
    let w = corrmath::direct_solve(r, b)?;
    if i >= w.len() {
        return Err(McSolveError::ComponentOutOfRange { index: i, n: w.len() });
    }
    let f = split(r);
    let sys = build_transition(&f, b, scheme)?;
    let mut out = Vec::with_capacity(j_max + 1);
    for depth in 0..=j_max {
        // No path of this length means there are no terminating points left
        // to cover, so no walks are required for them.
        let walks = if depth == 0 {
            0
        } else {
            match min_walks_from(&sys, i, depth) {
                Ok(m) => m,
                Err(McSolveError::NoPath { .. }) => 0,
                Err(other) => return Err(other),
            }
        };
        let partial = truncated_sum(&f, b, i, depth + 1)?;
        out.push(BoundStep {
            depth,
            min_walks: walks,
            lower_bound: (w[i] - partial).abs(),
        });
    }
    Ok(out)
}
