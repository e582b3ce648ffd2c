//! Reconstruction metrics and the seeded experiment runner that compares
//! every recovery algorithm over a grid of measurement counts.
//!
//! A sweep fixes one ground-truth multitone signal, then for each
//! (measurement count, trial) cell draws a mask from a seed derived
//! deterministically from `(base_seed, M, trial)`, samples the signal once,
//! and hands the identical measurements to every configured algorithm.
//! Results are recorded per run — mean squared error, exact-support flag,
//! residual norm, iteration count, and a median-of-repeats timing — and
//! failures are captured as records rather than aborting the sweep.

mod report;

pub use report::{emit_csv, emit_plot_script, parse_csv};

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::convex::bp::basis_pursuit_eq;
use crate::convex::lp::LpSolverParams;
use crate::convex::{adaptive_gradient_traced, GradientParams};
use crate::linalg::{norm_l2, ComplexVector};
use crate::pursuit::{gradient_pursuit, omp, ols, RecoveryResult, StoppingRule};
use crate::rng::derive_seed;
use crate::sensing::{build_dictionary, draw_mask, sample, Dictionary, Measurements};
use crate::signal::{dft, generate_multitone, support_of_coeffs, MultitoneSpec, TimeSignal};
use crate::threshold::{iht, IhtParams, IhtVariant};

#[derive(Debug, Error)]
pub enum BenchmarkError {
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error("signal lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("benchmark I/O failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("record line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// The recovery algorithms the sweep can run, named as they appear in CSV
/// output and configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmId {
    Omp,
    Ols,
    Gp,
    AdaptiveGradient,
    L1eq,
    IhtTopk,
    IhtLambda,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 7] = [
        AlgorithmId::Omp,
        AlgorithmId::Ols,
        AlgorithmId::Gp,
        AlgorithmId::AdaptiveGradient,
        AlgorithmId::L1eq,
        AlgorithmId::IhtTopk,
        AlgorithmId::IhtLambda,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmId::Omp => "omp",
            AlgorithmId::Ols => "ols",
            AlgorithmId::Gp => "gp",
            AlgorithmId::AdaptiveGradient => "adaptive_gradient",
            AlgorithmId::L1eq => "l1eq",
            AlgorithmId::IhtTopk => "iht_topk",
            AlgorithmId::IhtLambda => "iht_lambda",
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmId {
    type Err = BenchmarkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AlgorithmId::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| BenchmarkError::InvalidConfig(format!("unknown algorithm '{s}'")))
    }
}

/// Stopping parameters shared by the three greedy pursuits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreedyConfig {
    /// Support budget; default is the ground-truth component count.
    pub max_atoms: Option<usize>,
    pub residual_tol: Option<f64>,
    pub max_iterations: usize,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        GreedyConfig {
            max_atoms: None,
            residual_tol: None,
            max_iterations: 200,
        }
    }
}

/// Parameters for the two hard-thresholding variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IhtConfig {
    /// Sparsity for the top-K variant; default is the ground-truth
    /// component count.
    pub k: Option<usize>,
    /// Threshold for the lambda variant; default is the square of a tenth
    /// of the largest true coefficient magnitude.
    pub lambda: Option<f64>,
    /// Gradient step; default estimates it from the dictionary's spectral
    /// norm.
    pub step: Option<f64>,
    pub max_iterations: usize,
    pub convergence_tol: f64,
}

impl Default for IhtConfig {
    fn default() -> Self {
        IhtConfig {
            k: None,
            lambda: None,
            step: None,
            max_iterations: 500,
            convergence_tol: 1e-6,
        }
    }
}

/// Schedule for the adaptive gradient method; `None` fields use the
/// data-derived defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradientConfig {
    pub delta_init: Option<f64>,
    pub delta_min: Option<f64>,
    pub shrink_factor: f64,
    pub inner_max_iterations: usize,
    pub oscillation_window: usize,
}

impl Default for GradientConfig {
    fn default() -> Self {
        let d = GradientParams::default();
        GradientConfig {
            delta_init: d.delta_init,
            delta_min: d.delta_min,
            shrink_factor: d.shrink_factor,
            inner_max_iterations: d.inner_max_iterations,
            oscillation_window: d.oscillation_window,
        }
    }
}

impl GradientConfig {
    fn to_params(&self) -> GradientParams {
        GradientParams {
            delta_init: self.delta_init,
            delta_min: self.delta_min,
            shrink_factor: self.shrink_factor,
            inner_max_iterations: self.inner_max_iterations,
            oscillation_window: self.oscillation_window,
        }
    }
}

/// Tolerances for the l1 linear-programming route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LpConfig {
    pub duality_gap_tol: f64,
    pub feasibility_tol: f64,
    pub max_iterations: usize,
}

impl Default for LpConfig {
    fn default() -> Self {
        let d = LpSolverParams::default();
        LpConfig {
            duality_gap_tol: d.duality_gap_tol,
            feasibility_tol: d.feasibility_tol,
            max_iterations: d.max_iterations,
        }
    }
}

impl LpConfig {
    fn to_params(&self) -> LpSolverParams {
        LpSolverParams {
            duality_gap_tol: self.duality_gap_tol,
            feasibility_tol: self.feasibility_tol,
            max_iterations: self.max_iterations,
        }
    }
}

fn default_timing_repeats() -> usize {
    5
}

/// Everything a sweep needs: the ground-truth signal, the measurement grid,
/// the algorithm roster, and per-algorithm parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub signal: MultitoneSpec,
    pub m_values: Vec<usize>,
    pub trials_per_m: usize,
    pub base_seed: u64,
    pub algorithms: Vec<AlgorithmId>,
    #[serde(default)]
    pub greedy: GreedyConfig,
    #[serde(default)]
    pub iht: IhtConfig,
    #[serde(default)]
    pub gradient: GradientConfig,
    #[serde(default)]
    pub lp: LpConfig,
    /// Runs per timing measurement; the recorded time is their median.
    #[serde(default = "default_timing_repeats")]
    pub timing_repeats: usize,
    /// Coefficient magnitude above which a bin counts as detected; default
    /// is half the smallest true coefficient magnitude.
    #[serde(default)]
    pub support_threshold: Option<f64>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), BenchmarkError> {
        let invalid = |msg: String| Err(BenchmarkError::InvalidConfig(msg));
        self.signal
            .validate()
            .map_err(|e| BenchmarkError::InvalidConfig(e.to_string()))?;
        if self.m_values.is_empty() {
            return invalid("m_values must not be empty".into());
        }
        for &m in &self.m_values {
            if m == 0 || m > self.signal.n {
                return invalid(format!(
                    "measurement count {m} outside 1..={}",
                    self.signal.n
                ));
            }
        }
        if self.trials_per_m == 0 {
            return invalid("trials_per_m must be >= 1".into());
        }
        if self.timing_repeats == 0 {
            return invalid("timing_repeats must be >= 1".into());
        }
        if let Some(t) = self.support_threshold {
            if !(t.is_finite() && t >= 0.0) {
                return invalid(format!(
                    "support_threshold must be finite and nonnegative, got {t}"
                ));
            }
        }
        self.gradient
            .to_params()
            .validate()
            .map_err(|e| BenchmarkError::InvalidConfig(e.to_string()))?;
        self.lp
            .to_params()
            .validate()
            .map_err(|e| BenchmarkError::InvalidConfig(e.to_string()))?;
        Ok(())
    }

    /// The detection threshold used for support comparisons.
    fn effective_threshold(&self) -> f64 {
        self.support_threshold.unwrap_or_else(|| {
            let min_amp = self
                .signal
                .components
                .iter()
                .map(|t| t.amplitude)
                .fold(f64::INFINITY, f64::min);
            if min_amp.is_finite() {
                0.5 * min_amp * (self.signal.n as f64).sqrt()
            } else {
                0.0
            }
        })
    }
}

/// One algorithm run in one sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRecord {
    pub algorithm: AlgorithmId,
    pub m: usize,
    pub trial: usize,
    /// Mean squared reconstruction error; `+inf` marks a failed run.
    pub mse: f64,
    pub support_exact: bool,
    pub residual_norm: f64,
    pub iterations: usize,
    /// Median wall time of the solve across the configured repeats.
    pub elapsed_us: u64,
    /// `"ok"` or the failure's name.
    pub status: String,
}

/// Mean squared error between two equally long signals: the average of
/// `|x[t] - x_hat[t]|^2`.
pub fn mse(x: &TimeSignal, x_hat: &TimeSignal) -> Result<f64, BenchmarkError> {
    if x.n() != x_hat.n() {
        return Err(BenchmarkError::LengthMismatch {
            left: x.n(),
            right: x_hat.n(),
        });
    }
    let total: f64 = x
        .samples()
        .iter()
        .zip(x_hat.samples())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    Ok(total / x.n() as f64)
}

/// Whether the recovered coefficients, thresholded at `threshold`, occupy
/// exactly the bins in `truth`.
pub fn support_match(truth: &[usize], result: &RecoveryResult, threshold: f64) -> bool {
    support_of_coeffs(result.coeffs.entries(), threshold) == truth
}

/// Runs every configured algorithm over the full `(M, trial)` grid.
///
/// Records come back sorted by `(algorithm name, M, trial)` and the whole
/// sweep is deterministic for a fixed config — apart from `elapsed_us` —
/// regardless of how many threads execute it.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<BenchmarkRecord>, BenchmarkError> {
    cfg.validate()?;
    let truth_signal = generate_multitone(&cfg.signal)
        .map_err(|e| BenchmarkError::InvalidConfig(e.to_string()))?;
    let truth_support = cfg.signal.support();
    let threshold = cfg.effective_threshold();
    let n = cfg.signal.n;

    let cells: Vec<(usize, usize)> = cfg
        .m_values
        .iter()
        .flat_map(|&m| (0..cfg.trials_per_m).map(move |trial| (m, trial)))
        .collect();
    let mut records: Vec<BenchmarkRecord> = cells
        .par_iter()
        .flat_map_iter(|&(m, trial)| {
            let seed = derive_seed(cfg.base_seed, m as u64, trial as u64);
            let mask = draw_mask(n, m, seed).expect("m validated against n");
            let y = sample(&truth_signal, &mask).expect("mask drawn for this length");
            let d = build_dictionary(n, &mask, true).expect("mask is nonempty");
            cfg.algorithms
                .iter()
                .map(|&alg| {
                    run_cell(
                        alg,
                        &d,
                        &y,
                        cfg,
                        threshold,
                        &truth_signal,
                        &truth_support,
                        m,
                        trial,
                    )
                })
                .collect::<Vec<_>>()
        })
        .collect();
    records.sort_by(|a, b| {
        a.algorithm
            .name()
            .cmp(b.algorithm.name())
            .then(a.m.cmp(&b.m))
            .then(a.trial.cmp(&b.trial))
    });
    Ok(records)
}

#[allow(clippy::too_many_arguments)]
fn run_cell(
    alg: AlgorithmId,
    d: &Dictionary,
    y: &Measurements,
    cfg: &ExperimentConfig,
    threshold: f64,
    truth_signal: &TimeSignal,
    truth_support: &[usize],
    m: usize,
    trial: usize,
) -> BenchmarkRecord {
    let mut durations = Vec::with_capacity(cfg.timing_repeats);
    let started = Instant::now();
    let outcome = run_algorithm(alg, d, y, cfg, threshold);
    durations.push(started.elapsed());
    for _ in 1..cfg.timing_repeats {
        let again = Instant::now();
        let _ = run_algorithm(alg, d, y, cfg, threshold);
        durations.push(again.elapsed());
    }
    let elapsed_us = median_duration_us(&mut durations);
    match outcome {
        Ok(result) => {
            let reconstruction = result.reconstruct();
            let mse = mse(truth_signal, &reconstruction)
                .expect("reconstruction has the configured length");
            BenchmarkRecord {
                algorithm: alg,
                m,
                trial,
                mse,
                support_exact: support_match(truth_support, &result, threshold),
                residual_norm: result.residual_norm,
                iterations: result.iterations,
                elapsed_us,
                status: "ok".into(),
            }
        }
        Err(status) => BenchmarkRecord {
            algorithm: alg,
            m,
            trial,
            mse: f64::INFINITY,
            support_exact: false,
            residual_norm: f64::INFINITY,
            iterations: 0,
            elapsed_us,
            status,
        },
    }
}

fn run_algorithm(
    alg: AlgorithmId,
    d: &Dictionary,
    y: &Measurements,
    cfg: &ExperimentConfig,
    threshold: f64,
) -> Result<RecoveryResult, String> {
    let k_true = cfg.signal.components.len();
    match alg {
        AlgorithmId::Omp | AlgorithmId::Ols | AlgorithmId::Gp => {
            let g = &cfg.greedy;
            let stop = StoppingRule::new(
                Some(g.max_atoms.unwrap_or(k_true)),
                g.residual_tol,
                g.max_iterations,
            )
            .map_err(debug_label)?;
            match alg {
                AlgorithmId::Omp => omp(d, y, &stop).map_err(debug_label),
                AlgorithmId::Ols => ols(d, y, &stop).map_err(debug_label),
                _ => gradient_pursuit(d, y, &stop).map_err(debug_label),
            }
        }
        AlgorithmId::AdaptiveGradient => {
            let params = cfg.gradient.to_params();
            let (signal, trace) =
                adaptive_gradient_traced(y, d.cols(), &params).map_err(debug_label)?;
            let spectrum = dft(&signal);
            let support = support_of_coeffs(spectrum.coeffs(), threshold);
            let resampled = sample(&signal, d.mask()).map_err(debug_label)?;
            let residual: Vec<Complex64> = y
                .values
                .entries()
                .iter()
                .zip(resampled.values.entries())
                .map(|(a, b)| a - b)
                .collect();
            Ok(RecoveryResult {
                coeffs: ComplexVector::new(spectrum.coeffs().to_vec())
                    .expect("transform output is finite"),
                support,
                residual_norm: norm_l2(&residual),
                iterations: trace.total_sweeps,
                elapsed: Duration::ZERO,
            })
        }
        AlgorithmId::L1eq => basis_pursuit_eq(d, y, &cfg.lp.to_params()).map_err(debug_label),
        AlgorithmId::IhtTopk | AlgorithmId::IhtLambda => {
            let c = &cfg.iht;
            let variant = if alg == AlgorithmId::IhtTopk {
                IhtVariant::TopK(c.k.unwrap_or(k_true))
            } else {
                IhtVariant::LambdaThreshold(c.lambda.unwrap_or_else(|| {
                    let max_amp = cfg
                        .signal
                        .components
                        .iter()
                        .map(|t| t.amplitude)
                        .fold(0.0f64, f64::max);
                    (0.1 * max_amp * (cfg.signal.n as f64).sqrt()).powi(2)
                }))
            };
            let params = IhtParams::new(variant, c.step, c.max_iterations, c.convergence_tol)
                .map_err(debug_label)?;
            iht(d, y, &params).map_err(debug_label)
        }
    }
}

/// Converts an error's debug head (`MaxIterations { .. }`) into the
/// snake-case status label (`max_iterations`) used in records.
fn debug_label<E: fmt::Debug>(e: E) -> String {
    let repr = format!("{e:?}");
    let head = repr
        .split([' ', '(', '{'])
        .next()
        .unwrap_or("error");
    let mut label = String::with_capacity(head.len() + 4);
    for ch in head.chars() {
        if ch.is_ascii_uppercase() {
            if !label.is_empty() {
                label.push('_');
            }
            label.push(ch.to_ascii_lowercase());
        } else {
            label.push(ch);
        }
    }
    label
}

fn median_duration_us(durations: &mut [Duration]) -> u64 {
    durations.sort_unstable();
    let mid = durations.len() / 2;
    let median = if durations.len() % 2 == 1 {
        durations[mid]
    } else {
        (durations[mid - 1] + durations[mid]) / 2
    };
    median.as_micros() as u64
}
