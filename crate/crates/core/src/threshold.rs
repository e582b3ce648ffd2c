//! Iterative hard thresholding with a magnitude cutoff or keep-top-K
//! nonlinearity.
//!
//! The iteration is the Landweber step followed by the threshold operator:
//! `l <- T(l + mu * A^H (y - A l))` from `l = 0`. With the automatic step
//! `mu = 0.99 / sigma_max(A)^2` the thresholded objective
//! `|y - A l|^2 + lambda * |l|_0` never increases for the cutoff variant,
//! and the plain squared residual never increases for keep-top-K.

use std::time::Instant;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{self, ComplexVector, LinalgError};
use crate::pursuit::RecoveryResult;
use crate::sensing::{Dictionary, Measurements};

/// Iteration count and seed for the power-iteration step-size estimate.
/// The dictionary's spectrum is flat (its rows are orthonormal up to one
/// scale), so the estimate is exact after a handful of iterations.
const STEP_ESTIMATE_ITERATIONS: usize = 50;
const STEP_ESTIMATE_SEED: u64 = 0x5EED_1117;

#[derive(Debug, Error)]
pub enum IhtError {
    #[error("top-K threshold needs 1 <= K <= {n}, got {k}")]
    KOutOfRange { k: usize, n: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("dictionary has {rows} rows but measurements have {len} values")]
    DimensionMismatch { rows: usize, len: usize },
    #[error("dictionary and measurements come from different sample masks")]
    MaskMismatch,
    #[error("step-size estimation failed: {0}")]
    StepEstimation(#[from] LinalgError),
}

/// Which entries survive each iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IhtVariant {
    /// Zero every entry with magnitude at or below sqrt(lambda).
    LambdaThreshold(f64),
    /// Keep the K largest magnitudes, ties to the lowest index.
    TopK(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IhtParams {
    variant: IhtVariant,
    step: Option<f64>,
    max_iterations: usize,
    convergence_tol: f64,
}

impl IhtParams {
    /// `step = None` selects the automatic `0.99 / sigma_max(A)^2`.
    pub fn new(
        variant: IhtVariant,
        step: Option<f64>,
        max_iterations: usize,
        convergence_tol: f64,
    ) -> Result<Self, IhtError> {
        match variant {
            IhtVariant::LambdaThreshold(l) if !(l.is_finite() && l >= 0.0) => {
                return Err(IhtError::InvalidParams(format!(
                    "lambda must be finite and nonnegative, got {l}"
                )));
            }
            IhtVariant::TopK(0) => {
                return Err(IhtError::InvalidParams("top-K needs K >= 1".into()));
            }
            _ => {}
        }
        if let Some(s) = step {
            if !(s.is_finite() && s > 0.0) {
                return Err(IhtError::InvalidParams(format!(
                    "step must be finite and positive, got {s}"
                )));
            }
        }
        if max_iterations == 0 {
            return Err(IhtError::InvalidParams("max_iterations must be >= 1".into()));
        }
        if !(convergence_tol.is_finite() && convergence_tol >= 0.0) {
            return Err(IhtError::InvalidParams(format!(
                "convergence_tol must be finite and nonnegative, got {convergence_tol}"
            )));
        }
        Ok(IhtParams {
            variant,
            step,
            max_iterations,
            convergence_tol,
        })
    }

    pub fn variant(&self) -> IhtVariant {
        self.variant
    }

    pub fn step(&self) -> Option<f64> {
        self.step
    }

    pub fn max_iterations(&self) -> usize {
        self.max_iterations
    }

    pub fn convergence_tol(&self) -> f64 {
        self.convergence_tol
    }
}

/// Zeroes every entry with `|v_i| <= sqrt(lambda)`; the cutoff is inclusive
/// and the square root places `lambda` on the scale of the sparsity-penalty
/// weight it descends from.
pub fn hard_threshold(v: &ComplexVector, lambda: f64) -> ComplexVector {
    assert!(
        lambda.is_finite() && lambda >= 0.0,
        "lambda must be finite and nonnegative"
    );
    let cut = lambda.sqrt();
    let out: Vec<Complex64> = v
        .entries()
        .iter()
        .map(|&z| {
            if z.norm() <= cut {
                Complex64::new(0.0, 0.0)
            } else {
                z
            }
        })
        .collect();
    ComplexVector::new(out).expect("thresholding preserves finiteness")
}

/// Keeps the `k` largest-magnitude entries and zeroes the rest; magnitude
/// ties keep the lowest index.
pub fn top_k_threshold(v: &ComplexVector, k: usize) -> Result<ComplexVector, IhtError> {
    let n = v.len();
    if k == 0 || k > n {
        return Err(IhtError::KOutOfRange { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort on descending magnitude leaves equal magnitudes in index
    // order, so the lowest indices win ties.
    order.sort_by(|&a, &b| {
        v.entries()[b]
            .norm_sqr()
            .partial_cmp(&v.entries()[a].norm_sqr())
            .expect("finite magnitudes compare")
    });
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for &i in order.iter().take(k) {
        out[i] = v.entries()[i];
    }
    Ok(ComplexVector::new(out).expect("thresholding preserves finiteness"))
}

/// Per-iteration trace of an IHT run.
#[derive(Debug, Clone)]
pub struct IhtTrace {
    /// For the cutoff variant, the thresholded objective
    /// `|y - A l|^2 + lambda * |l|_0` after each iteration; for top-K, the
    /// plain squared residual.
    pub objectives: Vec<f64>,
    /// The step size actually used.
    pub step: f64,
}

/// Iterative hard thresholding; see the module docs for the iteration.
pub fn iht(
    d: &Dictionary,
    y: &Measurements,
    params: &IhtParams,
) -> Result<RecoveryResult, IhtError> {
    iht_traced(d, y, params).map(|(result, _)| result)
}

/// [`iht`] plus its per-iteration objective trace.
pub fn iht_traced(
    d: &Dictionary,
    y: &Measurements,
    params: &IhtParams,
) -> Result<(RecoveryResult, IhtTrace), IhtError> {
    let start = Instant::now();
    if d.rows() != y.m() {
        return Err(IhtError::DimensionMismatch {
            rows: d.rows(),
            len: y.m(),
        });
    }
    if d.mask() != &y.mask {
        return Err(IhtError::MaskMismatch);
    }
    let n = d.cols();
    if let IhtVariant::TopK(k) = params.variant {
        if k > n {
            return Err(IhtError::KOutOfRange { k, n });
        }
    }
    let step = match params.step {
        Some(s) => s,
        None => {
            let sigma_sq =
                linalg::spectral_norm_sq_estimate(d.matrix(), STEP_ESTIMATE_ITERATIONS, STEP_ESTIMATE_SEED)?;
            0.99 / sigma_sq
        }
    };
    let yv = y.values.entries();
    let mut l = ComplexVector::zeros(n);
    let mut trace = IhtTrace {
        objectives: Vec::new(),
        step,
    };
    let mut iterations = 0usize;
    let mut residual_norm = linalg::norm_l2(yv);
    while iterations < params.max_iterations {
        iterations += 1;
        let al = d.apply(l.entries());
        let r: Vec<Complex64> = yv.iter().zip(&al).map(|(a, b)| a - b).collect();
        let g = d.apply_adjoint(&r);
        let candidate: Vec<Complex64> = l
            .entries()
            .iter()
            .zip(&g)
            .map(|(&li, &gi)| li + step * gi)
            .collect();
        let candidate = ComplexVector::new(candidate).expect("iterate stays finite");
        let next = match params.variant {
            IhtVariant::LambdaThreshold(lambda) => hard_threshold(&candidate, lambda),
            IhtVariant::TopK(k) => top_k_threshold(&candidate, k)?,
        };
        let delta = next
            .entries()
            .iter()
            .zip(l.entries())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let prev_norm = l.norm_l2();
        let (_, new_residual) = d.residual(yv, next.entries());
        residual_norm = new_residual;
        let objective = match params.variant {
            IhtVariant::LambdaThreshold(lambda) => {
                let l0 = next.entries().iter().filter(|z| z.norm() > 0.0).count();
                new_residual * new_residual + lambda * l0 as f64
            }
            IhtVariant::TopK(_) => new_residual * new_residual,
        };
        trace.objectives.push(objective);
        l = next;
        if delta <= params.convergence_tol * (1.0 + prev_norm) {
            break;
        }
    }
    let support: Vec<usize> = l
        .entries()
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > 0.0)
        .map(|(i, _)| i)
        .collect();
    let coeffs: Vec<Complex64> = l
        .entries()
        .iter()
        .enumerate()
        .map(|(j, &z)| d.coefficient_to_unitary(j, z))
        .collect();
    let result = RecoveryResult {
        coeffs: ComplexVector::new(coeffs).expect("iterate stays finite"),
        support,
        residual_norm,
        iterations,
        elapsed: start.elapsed(),
    };
    Ok((result, trace))
}
