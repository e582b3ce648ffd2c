//! Greedy pursuit solvers: orthogonal matching pursuit, orthogonal least
//! squares, and gradient pursuit.
//!
//! All three share the same outer loop — grow a support one atom at a time,
//! update coefficients, update the measurement residual — and differ in how
//! the atom is chosen and how the coefficients are refreshed:
//!
//! * `omp` selects the atom most correlated with the residual and re-solves
//!   the least-squares problem on the grown support every iteration.
//! * `ols` selects the atom whose inclusion minimizes the post-solve
//!   residual norm, tracked incrementally through an orthonormal basis of
//!   the selected columns.
//! * `gradient_pursuit` selects like `omp` but replaces the exact solve
//!   with a single exact-line-search step along the restricted gradient.
//!   Selection may revisit an atom already in the support (the support is a
//!   set union), and once the atom budget is reached further iterations
//!   refine the held coefficients; iteration therefore continues past the
//!   budget until the residual tolerance, the iteration cap, or stagnation
//!   at the arithmetic noise floor stops it.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{self, ComplexVector, LinalgError};
use crate::sensing::{Dictionary, Measurements};

/// Relative residual improvement below which a gradient-pursuit iteration
/// counts as stagnant; two consecutive stagnant iterations stop the solver.
const GP_STAGNATION_RTOL: f64 = 1e-13;
const GP_STAGNATION_PATIENCE: usize = 2;

#[derive(Debug, Error)]
pub enum PursuitError {
    #[error("every candidate atom is forbidden")]
    AllForbidden,
    #[error("update direction vanished with residual norm {residual_norm:.3e}")]
    ZeroDirection { residual_norm: f64 },
    #[error("measurements are empty")]
    EmptyMeasurements,
    #[error("dictionary has {rows} rows but measurements have {len} values")]
    DimensionMismatch { rows: usize, len: usize },
    #[error("dictionary and measurements come from different sample masks")]
    MaskMismatch,
    #[error("stopping rule needs max_atoms or residual_tol, and max_iterations >= 1")]
    InvalidStoppingRule,
    #[error("selected atoms are rank deficient")]
    RankDeficient(#[from] LinalgError),
}

/// When to stop growing / refining: an atom budget, a residual tolerance
/// (absolute, compare against `tol * norm(y)` at the call site for a
/// relative rule), and a hard iteration cap. At least one of the first two
/// must be set.
#[derive(Debug, Clone, PartialEq)]
pub struct StoppingRule {
    max_atoms: Option<usize>,
    residual_tol: Option<f64>,
    max_iterations: usize,
}

impl StoppingRule {
    pub fn new(
        max_atoms: Option<usize>,
        residual_tol: Option<f64>,
        max_iterations: usize,
    ) -> Result<Self, PursuitError> {
        let tol_ok = residual_tol.is_none_or(|t| t.is_finite() && t >= 0.0);
        let atoms_ok = max_atoms.is_none_or(|k| k >= 1);
        let any_set = max_atoms.is_some() || residual_tol.is_some();
        if !any_set || !tol_ok || !atoms_ok || max_iterations == 0 {
            return Err(PursuitError::InvalidStoppingRule);
        }
        Ok(StoppingRule {
            max_atoms,
            residual_tol,
            max_iterations,
        })
    }

    /// Budget-only rule: grow to exactly `k` atoms (or fewer if the
    /// residual hits zero first).
    pub fn with_max_atoms(k: usize, max_iterations: usize) -> Result<Self, PursuitError> {
        StoppingRule::new(Some(k), None, max_iterations)
    }

    pub fn max_atoms(&self) -> Option<usize> {
        self.max_atoms
    }

    pub fn residual_tol(&self) -> Option<f64> {
        self.residual_tol
    }

    pub fn max_iterations(&self) -> usize {
        self.max_iterations
    }

    fn residual_met(&self, norm: f64) -> bool {
        self.residual_tol.is_some_and(|t| norm <= t)
    }

    fn budget_full(&self, support_len: usize) -> bool {
        self.max_atoms.is_some_and(|k| support_len >= k)
    }
}

/// State threaded through one pursuit run: support in selection order, the
/// coefficients paired with it, the measurement residual, and the iteration
/// counter.
#[derive(Debug, Clone)]
pub struct PursuitState {
    pub support: Vec<usize>,
    pub coeffs_on_support: Vec<Complex64>,
    pub residual: Vec<Complex64>,
    pub iteration: usize,
}

impl PursuitState {
    fn start_from(y: &[Complex64]) -> Self {
        PursuitState {
            support: Vec::new(),
            coeffs_on_support: Vec::new(),
            residual: y.to_vec(),
            iteration: 0,
        }
    }
}

/// Final output of any recovery algorithm: the full-length coefficient
/// vector on the unitary-DFT scale (zeros off support), the sorted support,
/// and run statistics.
#[derive(Debug, Clone)]
pub struct RecoveryResult {
    pub coeffs: ComplexVector,
    pub support: Vec<usize>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub elapsed: Duration,
}

impl RecoveryResult {
    /// Time-domain reconstruction of the recovered spectrum.
    pub fn reconstruct(&self) -> crate::signal::TimeSignal {
        let spectrum = crate::signal::Spectrum::new(self.coeffs.entries().to_vec())
            .expect("recovered coefficients are finite and nonempty");
        crate::signal::idft(&spectrum)
    }
}

/// Index of the largest-magnitude entry of `g` outside `forbidden`; ties go
/// to the lowest index.
pub fn select_atom(g: &[Complex64], forbidden: &[usize]) -> Result<usize, PursuitError> {
    let mut blocked = vec![false; g.len()];
    for &i in forbidden {
        if i < blocked.len() {
            blocked[i] = true;
        }
    }
    let mut best: Option<(usize, f64)> = None;
    for (i, z) in g.iter().enumerate() {
        if blocked[i] {
            continue;
        }
        let mag = z.norm_sqr();
        // Strict comparison keeps the lowest index on ties.
        if best.is_none_or(|(_, m)| mag > m) {
            best = Some((i, mag));
        }
    }
    best.map(|(i, _)| i).ok_or(PursuitError::AllForbidden)
}

fn check_inputs(d: &Dictionary, y: &Measurements) -> Result<(), PursuitError> {
    if y.m() == 0 {
        return Err(PursuitError::EmptyMeasurements);
    }
    if d.rows() != y.m() {
        return Err(PursuitError::DimensionMismatch {
            rows: d.rows(),
            len: y.m(),
        });
    }
    if d.mask() != &y.mask {
        return Err(PursuitError::MaskMismatch);
    }
    Ok(())
}

fn finish(state: PursuitState, d: &Dictionary, start: Instant) -> RecoveryResult {
    let mut full = vec![Complex64::new(0.0, 0.0); d.cols()];
    for (&j, &z) in state.support.iter().zip(&state.coeffs_on_support) {
        full[j] = d.coefficient_to_unitary(j, z);
    }
    let mut support = state.support;
    support.sort_unstable();
    RecoveryResult {
        coeffs: ComplexVector::new(full).expect("pursuit coefficients are finite"),
        support,
        residual_norm: linalg::norm_l2(&state.residual),
        iterations: state.iteration,
        elapsed: start.elapsed(),
    }
}

/// Orthogonal matching pursuit: correlate, take the best new atom, re-solve
/// the least-squares problem on the grown support, repeat.
pub fn omp(
    d: &Dictionary,
    y: &Measurements,
    stop: &StoppingRule,
) -> Result<RecoveryResult, PursuitError> {
    let start = Instant::now();
    check_inputs(d, y)?;
    let yv = y.values.entries();
    let mut state = PursuitState::start_from(yv);
    if linalg::norm_l2(yv) == 0.0 {
        return Ok(finish(state, d, start));
    }
    while state.iteration < stop.max_iterations() {
        state.iteration += 1;
        let g = d.apply_adjoint(&state.residual);
        let atom = select_atom(&g, &state.support)?;
        state.support.push(atom);
        let a_sub = d.matrix().select_columns(&state.support);
        state.coeffs_on_support = linalg::least_squares_solve(&a_sub, yv)?;
        let approx = a_sub.mul_vec(&state.coeffs_on_support);
        for (r, (orig, ap)) in state.residual.iter_mut().zip(yv.iter().zip(&approx)) {
            *r = orig - ap;
        }
        let rnorm = linalg::norm_l2(&state.residual);
        if rnorm == 0.0 || stop.residual_met(rnorm) || stop.budget_full(state.support.len()) {
            break;
        }
    }
    Ok(finish(state, d, start))
}

/// Orthogonal least squares: pick the atom whose inclusion gives the
/// smallest post-solve residual.
///
/// An orthonormal basis `Q` of the selected columns is grown one vector per
/// iteration. For a candidate column `a_i`, the drop in squared residual
/// from adding it is `|<a_i, r>|^2 / nu_i^2`, where `nu_i` is the norm of
/// `a_i`'s component orthogonal to `span(Q)` — and `nu_i` can be updated
/// from the previous iteration with a single inner product, so a full scan
/// costs two dictionary applications rather than one factorization per
/// candidate. A naive per-candidate re-solve serves as the test oracle.
pub fn ols(
    d: &Dictionary,
    y: &Measurements,
    stop: &StoppingRule,
) -> Result<RecoveryResult, PursuitError> {
    let start = Instant::now();
    check_inputs(d, y)?;
    let yv = y.values.entries();
    let mut state = PursuitState::start_from(yv);
    if linalg::norm_l2(yv) == 0.0 {
        return Ok(finish(state, d, start));
    }
    let n = d.cols();
    // Squared norms of each column's component orthogonal to the selected
    // span; starts at the plain column norms.
    let mut ortho_sq: Vec<f64> = (0..n)
        .map(|j| linalg::norm_l2(&d.matrix().column(j)).powi(2))
        .collect();
    let col_floor = 1e-24 * ortho_sq.iter().cloned().fold(0.0, f64::max);
    let mut q_basis: Vec<Vec<Complex64>> = Vec::new();
    while state.iteration < stop.max_iterations() {
        state.iteration += 1;
        let g = d.apply_adjoint(&state.residual);
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            if state.support.contains(&j) || ortho_sq[j] <= col_floor {
                continue;
            }
            let gain = g[j].norm_sqr() / ortho_sq[j];
            if best.is_none_or(|(_, b)| gain > b) {
                best = Some((j, gain));
            }
        }
        let (atom, _) = best.ok_or(PursuitError::AllForbidden)?;
        state.support.push(atom);
        // Orthogonalize the new column against the basis (twice, for
        // stability) and extend it.
        let mut q = d.matrix().column(atom);
        for _ in 0..2 {
            for prev in &q_basis {
                let proj = linalg::dot_conj(prev, &q);
                for (qe, pe) in q.iter_mut().zip(prev) {
                    *qe -= proj * pe;
                }
            }
        }
        let qn = linalg::norm_l2(&q);
        if qn * qn <= col_floor {
            return Err(PursuitError::RankDeficient(LinalgError::RankDeficient {
                index: state.support.len() - 1,
                pivot: qn,
            }));
        }
        q.iter_mut().for_each(|z| *z /= qn);
        // Deflate every candidate's orthogonal component by the new basis
        // vector: nu_j^2 -= |<q, a_j>|^2.
        let qg = d.apply_adjoint(&q);
        for j in 0..n {
            ortho_sq[j] = (ortho_sq[j] - qg[j].norm_sqr()).max(0.0);
        }
        // Residual loses its component along q.
        let proj = linalg::dot_conj(&q, &state.residual);
        for (r, qe) in state.residual.iter_mut().zip(&q) {
            *r -= proj * qe;
        }
        q_basis.push(q);
        let rnorm = linalg::norm_l2(&state.residual);
        if rnorm == 0.0 || stop.residual_met(rnorm) || stop.budget_full(state.support.len()) {
            break;
        }
    }
    // One full solve on the final support produces the reported
    // coefficients.
    let a_sub = d.matrix().select_columns(&state.support);
    state.coeffs_on_support = linalg::least_squares_solve(&a_sub, yv)?;
    let approx = a_sub.mul_vec(&state.coeffs_on_support);
    for (r, (orig, ap)) in state.residual.iter_mut().zip(yv.iter().zip(&approx)) {
        *r = orig - ap;
    }
    Ok(finish(state, d, start))
}

/// Per-iteration trace of a gradient-pursuit run.
#[derive(Debug, Clone, Default)]
pub struct GpTrace {
    /// Residual norm after each iteration.
    pub residual_norms: Vec<f64>,
    /// Support size after each iteration.
    pub support_sizes: Vec<usize>,
}

/// Gradient pursuit: OMP's selection with a one-step exact line search
/// along the gradient restricted to the support instead of a full solve.
pub fn gradient_pursuit(
    d: &Dictionary,
    y: &Measurements,
    stop: &StoppingRule,
) -> Result<RecoveryResult, PursuitError> {
    gradient_pursuit_traced(d, y, stop).map(|(result, _)| result)
}

/// [`gradient_pursuit`] plus its per-iteration trace.
pub fn gradient_pursuit_traced(
    d: &Dictionary,
    y: &Measurements,
    stop: &StoppingRule,
) -> Result<(RecoveryResult, GpTrace), PursuitError> {
    let start = Instant::now();
    check_inputs(d, y)?;
    let yv = y.values.entries();
    let mut state = PursuitState::start_from(yv);
    let mut trace = GpTrace::default();
    if linalg::norm_l2(yv) == 0.0 {
        return Ok((finish(state, d, start), trace));
    }
    let mut rnorm = linalg::norm_l2(yv);
    let mut stagnant = 0usize;
    while state.iteration < stop.max_iterations() {
        state.iteration += 1;
        let at_capacity = stop.budget_full(state.support.len());
        // Selection phase: below budget, the best atom over the whole
        // dictionary joins the support (a repeat selection leaves it
        // unchanged); at the budget the support is frozen and the
        // iteration only refines.
        if !at_capacity {
            let g = d.apply_adjoint(&state.residual);
            let atom = select_atom(&g, &[])?;
            if !state.support.contains(&atom) {
                state.support.push(atom);
                state.coeffs_on_support.push(Complex64::new(0.0, 0.0));
            }
        }
        // Direction restricted to the support: d_G = A_G^H r.
        let cols: Vec<Vec<Complex64>> = state
            .support
            .iter()
            .map(|&j| d.matrix().column(j))
            .collect();
        let dir: Vec<Complex64> = cols
            .iter()
            .map(|c| linalg::dot_conj(c, &state.residual))
            .collect();
        // Its image c = A_G d_G and the exact line-search step.
        let mut c = vec![Complex64::new(0.0, 0.0); d.rows()];
        for (col, &w) in cols.iter().zip(&dir) {
            for (ce, ae) in c.iter_mut().zip(col) {
                *ce += w * ae;
            }
        }
        let c_sq = c.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if c_sq == 0.0 {
            if rnorm == 0.0 {
                break;
            }
            return Err(PursuitError::ZeroDirection {
                residual_norm: rnorm,
            });
        }
        let step = linalg::dot_conj(&c, &state.residual) / c_sq;
        for (z, &w) in state.coeffs_on_support.iter_mut().zip(&dir) {
            *z += step * w;
        }
        for (r, ce) in state.residual.iter_mut().zip(&c) {
            *r -= step * ce;
        }
        let new_norm = linalg::norm_l2(&state.residual);
        trace.residual_norms.push(new_norm);
        trace.support_sizes.push(state.support.len());
        // Stagnation: no meaningful decrease twice in a row means the
        // iteration has hit its arithmetic floor.
        if new_norm > rnorm * (1.0 - GP_STAGNATION_RTOL) {
            stagnant += 1;
        } else {
            stagnant = 0;
        }
        rnorm = new_norm;
        if rnorm == 0.0 || stop.residual_met(rnorm) || stagnant >= GP_STAGNATION_PATIENCE {
            break;
        }
    }
    Ok((finish(state, d, start), trace))
}
