//! Equality-constrained l1 minimization over a sampling dictionary,
//! reformulated as a standard-form linear program and handed to the
//! interior-point solver.
//!
//! With `u = p - q`, `p, q >= 0`, the problem
//!
//! ```text
//! minimize ||u||_1   subject to   A u = y
//! ```
//!
//! becomes `min 1'(p + q)` subject to `[B  -B][p; q] = [Re y; Im y]` where
//! `B` stacks the real and imaginary parts of the dictionary. The split is
//! exact for real coefficient vectors; measurements that cannot come from a
//! real coefficient vector show up as inconsistent constraint rows and are
//! reported as infeasible.

use std::time::Instant;

use num_complex::Complex64;

use super::lp::{lp_primal_dual_solve, LpSolverParams, LpStatus, RealMatrix};
use super::ConvexError;
use crate::linalg::ComplexVector;
use crate::pursuit::RecoveryResult;
use crate::sensing::{Dictionary, Measurements};

/// Entries at or below this fraction of the peak coefficient are treated as
/// solver dust and zeroed.
const DUST_REL: f64 = 1e-12;

/// Optimality evidence for a basis-pursuit solve.
#[derive(Debug, Clone)]
pub struct BpCertificate {
    pub status: LpStatus,
    /// `|primal_objective - dual_objective|` at exit.
    pub gap: f64,
    /// `||u||_1` in dictionary coordinates.
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `||A u - y||_2` of the returned solution.
    pub feasibility: f64,
    pub lp_iterations: usize,
}

/// [`basis_pursuit_eq`] that also hands back the solver's certificate.
///
/// An `Ok` is returned both for proven optima and for iteration-capped
/// solves (check [`BpCertificate::status`]); infeasible splits — which for
/// exact measurement arithmetic means the data cannot come from a real
/// coefficient vector — are errors.
pub fn basis_pursuit_eq_certified(
    d: &Dictionary,
    y: &Measurements,
    params: &LpSolverParams,
) -> Result<(RecoveryResult, BpCertificate), ConvexError> {
    let started = Instant::now();
    if d.mask() != &y.mask {
        return Err(ConvexError::MaskMismatch);
    }
    let m = d.rows();
    let n = d.cols();
    if m >= n {
        return Err(ConvexError::NotUnderdetermined { m, n });
    }
    let (c, a_lp, b) = real_split_program(d, y);
    let lp = lp_primal_dual_solve(&c, &a_lp, &b, params)?;
    match lp.status {
        LpStatus::Infeasible => {
            return Err(ConvexError::Infeasible(
                "the measurements admit no real coefficient vector; the split \
                 equality rows contradict each other"
                    .into(),
            ))
        }
        LpStatus::Unbounded => return Err(ConvexError::Unbounded),
        LpStatus::Optimal | LpStatus::MaxIterations => {}
    }

    // Fold the split back together and drop solver dust.
    let mut u: Vec<f64> = (0..n).map(|j| lp.primal[j] - lp.primal[n + j]).collect();
    let peak = u.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
    let mut support = Vec::new();
    for (j, v) in u.iter_mut().enumerate() {
        if v.abs() <= DUST_REL * peak {
            *v = 0.0;
        } else {
            support.push(j);
        }
    }
    let dict_coeffs: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let (_, feasibility) = d.residual(y.values.entries(), &dict_coeffs);
    let coeffs: Vec<Complex64> = dict_coeffs
        .iter()
        .enumerate()
        .map(|(j, &v)| d.coefficient_to_unitary(j, v))
        .collect();
    let primal_objective: f64 = u.iter().map(|v| v.abs()).sum();
    let dual_objective: f64 = b.iter().zip(&lp.dual).map(|(&bi, &li)| bi * li).sum();
    let result = RecoveryResult {
        coeffs: ComplexVector::new(coeffs).expect("folded coefficients are finite"),
        support,
        residual_norm: feasibility,
        iterations: lp.iterations,
        elapsed: started.elapsed(),
    };
    let certificate = BpCertificate {
        status: lp.status,
        gap: lp.gap,
        primal_objective,
        dual_objective,
        feasibility,
        lp_iterations: lp.iterations,
    };
    Ok((result, certificate))
}

/// Minimum-l1 recovery of dictionary coefficients reproducing `y` exactly.
///
/// Errors unless the solver proves optimality; use
/// [`basis_pursuit_eq_certified`] to inspect partial solves.
pub fn basis_pursuit_eq(
    d: &Dictionary,
    y: &Measurements,
    params: &LpSolverParams,
) -> Result<RecoveryResult, ConvexError> {
    let (result, certificate) = basis_pursuit_eq_certified(d, y, params)?;
    match certificate.status {
        LpStatus::Optimal => Ok(result),
        LpStatus::MaxIterations => Err(ConvexError::MaxIterations {
            gap: certificate.gap,
        }),
        // `basis_pursuit_eq_certified` already turned these into errors.
        LpStatus::Infeasible | LpStatus::Unbounded => unreachable!(),
    }
}

/// The real standard-form program equivalent to `min ||u||_1, A u = y` for
/// real `u`: objective, constraint matrix `[B  -B]`, and stacked
/// real/imaginary right-hand side.
pub(crate) fn real_split_program(
    d: &Dictionary,
    y: &Measurements,
) -> (Vec<f64>, RealMatrix, Vec<f64>) {
    let m = d.rows();
    let n = d.cols();
    let a = d.matrix();
    let a_lp = RealMatrix::from_fn(2 * m, 2 * n, |i, j| {
        let entry = if i < m { a.get(i, j % n) } else { a.get(i - m, j % n) };
        let part = if i < m { entry.re } else { entry.im };
        if j < n {
            part
        } else {
            -part
        }
    });
    let mut b = Vec::with_capacity(2 * m);
    b.extend(y.values.entries().iter().map(|z| z.re));
    b.extend(y.values.entries().iter().map(|z| z.im));
    (vec![1.0; 2 * n], a_lp, b)
}
