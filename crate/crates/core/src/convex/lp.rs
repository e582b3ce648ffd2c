//! Dense primal-dual interior-point solver for linear programs in standard
//! form:
//!
//! ```text
//! minimize    c'x
//! subject to  A x = b,  x >= 0
//! ```
//!
//! The solver runs a predictor-corrector iteration on the perturbed KKT
//! conditions, eliminating the step equations down to a symmetric
//! positive-definite normal system per iteration. Exactly dependent
//! constraint rows are detected and removed up front (their dual weights are
//! reported as zero), so callers may hand over redundant row sets such as
//! real/imaginary splits of conjugate-symmetric systems.

use super::ConvexError;

/// Fraction of the distance to the positivity boundary taken each step.
const STEP_FRACTION: f64 = 0.9995;
/// Columns whose scaling weight falls below `max_weight` times this are
/// skipped when accumulating the normal matrix.
const WEIGHT_SKIP_REL: f64 = 1e-17;
/// A row whose component orthogonal to the previous rows is below this
/// (relative to 1 + its own norm) is treated as linearly dependent.
const ROW_DEP_TOL: f64 = 1e-10;
/// Step sizes below this count as a stall.
const STALL_STEP: f64 = 1e-10;
/// Consecutive stalled iterations before the solve is abandoned.
const STALL_PATIENCE: usize = 2;
/// Iterate-norm growth factor that counts as divergence.
const DIVERGENCE_FACTOR: f64 = 1e10;
/// Objective magnitude (relative to the problem scale) treated as unbounded.
const OBJECTIVE_BLOWUP: f64 = 1e12;
/// Rounds of iterative refinement applied to each normal-equation solve.
const REFINEMENT_ROUNDS: usize = 2;

/// Dense row-major matrix of finite `f64` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, ConvexError> {
        if data.len() != rows * cols {
            return Err(ConvexError::LengthMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(ConvexError::InvalidParams(
                "matrix entries must be finite".into(),
            ));
        }
        Ok(RealMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RealMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `A v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "operand length mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `A' v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows, "operand length mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (o, &aij) in out.iter_mut().zip(self.row(i)) {
                *o += vi * aij;
            }
        }
        out
    }
}

/// Stopping tolerances and the iteration cap for [`lp_primal_dual_solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolverParams {
    /// Absolute bound on `|c'x - b'lambda|` required for optimality.
    pub duality_gap_tol: f64,
    /// Relative bound on the primal/dual residual norms and complementarity.
    pub feasibility_tol: f64,
    pub max_iterations: usize,
}

impl Default for LpSolverParams {
    fn default() -> Self {
        LpSolverParams {
            duality_gap_tol: 1e-8,
            feasibility_tol: 1e-8,
            max_iterations: 100,
        }
    }
}

impl LpSolverParams {
    pub fn validate(&self) -> Result<(), ConvexError> {
        if !(self.duality_gap_tol.is_finite() && self.duality_gap_tol > 0.0) {
            return Err(ConvexError::InvalidParams(format!(
                "duality_gap_tol must be finite and positive, got {}",
                self.duality_gap_tol
            )));
        }
        if !(self.feasibility_tol.is_finite() && self.feasibility_tol > 0.0) {
            return Err(ConvexError::InvalidParams(format!(
                "feasibility_tol must be finite and positive, got {}",
                self.feasibility_tol
            )));
        }
        if self.max_iterations == 0 {
            return Err(ConvexError::InvalidParams(
                "max_iterations must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// How a solve ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    /// All residuals and the duality gap met their tolerances.
    Optimal,
    /// The equality constraints admit no nonnegative solution.
    Infeasible,
    /// The objective decreases without bound over the feasible set.
    Unbounded,
    /// The iteration cap was reached (or progress stalled) first.
    MaxIterations,
}

/// Solver output. `dual` always has one entry per row of the *original*
/// constraint matrix; rows removed as dependent carry weight zero.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    /// `|c'x - b'lambda|` at exit.
    pub gap: f64,
    pub iterations: usize,
    pub status: LpStatus,
}

/// Solves `min c'x  s.t.  Ax = b, x >= 0`.
///
/// All solve outcomes — including infeasibility and unboundedness — are
/// reported through [`LpSolution::status`]; `Err` is reserved for malformed
/// input (dimension mismatches, non-finite data, bad parameters).
pub fn lp_primal_dual_solve(
    c: &[f64],
    a: &RealMatrix,
    b: &[f64],
    params: &LpSolverParams,
) -> Result<LpSolution, ConvexError> {
    params.validate()?;
    let n = a.cols();
    let m_orig = a.rows();
    if n == 0 {
        return Err(ConvexError::InvalidParams(
            "the program needs at least one variable".into(),
        ));
    }
    if c.len() != n {
        return Err(ConvexError::LengthMismatch {
            expected: n,
            got: c.len(),
        });
    }
    if b.len() != m_orig {
        return Err(ConvexError::LengthMismatch {
            expected: m_orig,
            got: b.len(),
        });
    }
    if c.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(ConvexError::InvalidParams(
            "objective and right-hand side must be finite".into(),
        ));
    }

    let b_peak = b.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
    let red = match reduce_rows(a, b, b_peak) {
        Ok(red) => red,
        Err(RowInconsistency) => {
            return Ok(LpSolution {
                primal: vec![0.0; n],
                dual: vec![0.0; m_orig],
                gap: f64::INFINITY,
                iterations: 0,
                status: LpStatus::Infeasible,
            })
        }
    };

    if red.kept.is_empty() {
        // Every row was redundant with zero right-hand side: the feasible
        // set is just the nonnegative orthant.
        let status = if c.iter().all(|&cj| cj >= 0.0) {
            LpStatus::Optimal
        } else {
            LpStatus::Unbounded
        };
        return Ok(LpSolution {
            primal: vec![0.0; n],
            dual: vec![0.0; m_orig],
            gap: if status == LpStatus::Optimal {
                0.0
            } else {
                f64::INFINITY
            },
            iterations: 0,
            status,
        });
    }

    let m = red.kept.len();
    let a_red = &red.a;
    let b_red = &red.b;
    // Column-major copy so the normal-matrix accumulation walks
    // contiguous memory.
    let mut at = vec![0.0; n * m];
    for i in 0..m {
        for (k, &v) in a_red.row(i).iter().enumerate() {
            at[k * m + i] = v;
        }
    }

    let scale = 1.0 + norm2(b_red) + norm2(c);
    let ftol = params.feasibility_tol;
    let mut normal = NormalSystem::new(m);

    // Starting point: the minimum-norm solution of Ax = b and the
    // least-squares dual estimate, both shifted into the strict interior.
    normal.accumulate(&at, n, &vec![1.0; n]);
    normal.factor();
    let w = normal.solve(b_red);
    let x_tilde = a_red.tr_mul_vec(&w);
    let lam_ls = normal.solve(&a_red.mul_vec(c));
    let s_tilde: Vec<f64> = c
        .iter()
        .zip(a_red.tr_mul_vec(&lam_ls))
        .map(|(&cj, aj)| cj - aj)
        .collect();
    let shift_x = x_tilde.iter().cloned().fold(0.0f64, f64::min) * -1.5;
    let shift_s = s_tilde.iter().cloned().fold(0.0f64, f64::min) * -1.5;
    let x_hat: Vec<f64> = x_tilde.iter().map(|&v| v + shift_x.max(0.0)).collect();
    let s_hat: Vec<f64> = s_tilde.iter().map(|&v| v + shift_s.max(0.0)).collect();
    let cross = dot(&x_hat, &s_hat);
    let sum_x: f64 = x_hat.iter().sum();
    let sum_s: f64 = s_hat.iter().sum();
    let pad_x = if cross > 0.0 && sum_s > 0.0 {
        0.5 * cross / sum_s
    } else {
        1.0
    };
    let pad_s = if cross > 0.0 && sum_x > 0.0 {
        0.5 * cross / sum_x
    } else {
        1.0
    };
    let mut x: Vec<f64> = x_hat.iter().map(|&v| v + pad_x).collect();
    let mut s: Vec<f64> = s_hat.iter().map(|&v| v + pad_s).collect();
    let mut lam = lam_ls;
    let norm_x0 = norm2(&x);
    let norm_dual0 = norm2(&s).max(norm2(&lam));

    let mut iterations = 0usize;
    let mut gap;
    let mut stalled = 0usize;
    let status = loop {
        let r_b: Vec<f64> = a_red
            .mul_vec(&x)
            .iter()
            .zip(b_red)
            .map(|(ax, &bi)| ax - bi)
            .collect();
        let r_c: Vec<f64> = a_red
            .tr_mul_vec(&lam)
            .iter()
            .zip(s.iter())
            .zip(c)
            .map(|((at_lam, &si), &ci)| at_lam + si - ci)
            .collect();
        let cx = dot(c, &x);
        let b_lam = dot(b_red, &lam);
        gap = (cx - b_lam).abs();
        let comp = dot(&x, &s);
        if norm2(&r_b) <= ftol * scale
            && norm2(&r_c) <= ftol * scale
            && comp <= ftol * scale
            && gap <= params.duality_gap_tol
        {
            break LpStatus::Optimal;
        }
        if cx < -OBJECTIVE_BLOWUP * scale {
            break LpStatus::Unbounded;
        }
        if iterations >= params.max_iterations {
            break LpStatus::MaxIterations;
        }

        let mu = comp / n as f64;
        let d: Vec<f64> = x.iter().zip(&s).map(|(&xi, &si)| xi / si).collect();
        normal.accumulate(&at, n, &d);
        normal.factor();

        // Predictor: pure Newton step on the unperturbed conditions.
        let r_xs_aff: Vec<f64> = x.iter().zip(&s).map(|(&xi, &si)| xi * si).collect();
        let (dx_a, _, ds_a) = step_directions(a_red, &normal, &d, &x, &s, &r_b, &r_c, &r_xs_aff);
        let alpha_p_aff = max_step(&x, &dx_a).min(1.0);
        let alpha_d_aff = max_step(&s, &ds_a).min(1.0);
        let mu_aff = (0..n)
            .map(|k| (x[k] + alpha_p_aff * dx_a[k]) * (s[k] + alpha_d_aff * ds_a[k]))
            .sum::<f64>()
            / n as f64;
        let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);

        // Corrector: recenter and compensate the predictor's second-order
        // complementarity error, reusing the factorization.
        let r_xs: Vec<f64> = (0..n)
            .map(|k| x[k] * s[k] - sigma * mu + dx_a[k] * ds_a[k])
            .collect();
        let (dx, dl, ds) = step_directions(a_red, &normal, &d, &x, &s, &r_b, &r_c, &r_xs);
        let alpha_p = (STEP_FRACTION * max_step(&x, &dx)).min(1.0);
        let alpha_d = (STEP_FRACTION * max_step(&s, &ds)).min(1.0);
        for k in 0..n {
            x[k] += alpha_p * dx[k];
            s[k] += alpha_d * ds[k];
        }
        for (li, di) in lam.iter_mut().zip(&dl) {
            *li += alpha_d * di;
        }
        iterations += 1;

        if norm2(&x) > DIVERGENCE_FACTOR * (1.0 + norm_x0) && cx < 0.0 {
            break LpStatus::Unbounded;
        }
        if norm2(&s).max(norm2(&lam)) > DIVERGENCE_FACTOR * (1.0 + norm_dual0)
            && norm2(&r_b) > ftol * scale
        {
            break LpStatus::Infeasible;
        }
        if alpha_p.min(alpha_d) < STALL_STEP {
            stalled += 1;
        } else {
            stalled = 0;
        }
        if stalled >= STALL_PATIENCE {
            break if norm2(&r_b) > ftol.sqrt() * scale {
                LpStatus::Infeasible
            } else {
                LpStatus::MaxIterations
            };
        }
    };

    let mut dual = vec![0.0; m_orig];
    for (&row, &weight) in red.kept.iter().zip(&lam) {
        dual[row] = weight;
    }
    Ok(LpSolution {
        primal: x,
        dual,
        gap,
        iterations,
        status,
    })
}

struct RowInconsistency;

struct ReducedRows {
    a: RealMatrix,
    b: Vec<f64>,
    /// Original index of each kept row.
    kept: Vec<usize>,
}

/// Drops rows that are linear combinations of earlier rows, verifying that
/// their right-hand sides agree with that combination. The surviving system
/// has full row rank and the same solution set.
#[allow(clippy::needless_range_loop)]
fn reduce_rows(a: &RealMatrix, b: &[f64], b_peak: f64) -> Result<ReducedRows, RowInconsistency> {
    let n = a.cols();
    let consistency_tol = 1e-9 * (1.0 + b_peak);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut basis_rhs: Vec<f64> = Vec::new();
    let mut kept = Vec::new();
    let mut kept_data = Vec::new();
    let mut kept_b = Vec::new();
    for i in 0..a.rows() {
        let mut v = a.row(i).to_vec();
        let mut beta = b[i];
        let own_norm = norm2(&v);
        // Two orthogonalization passes keep the basis orthonormal to
        // working precision even for nearly dependent rows.
        for _ in 0..2 {
            for (q, &q_rhs) in basis.iter().zip(&basis_rhs) {
                let coeff = dot(q, &v);
                for (vj, qj) in v.iter_mut().zip(q) {
                    *vj -= coeff * qj;
                }
                beta -= coeff * q_rhs;
            }
        }
        let leftover = norm2(&v);
        if leftover <= ROW_DEP_TOL * (1.0 + own_norm) {
            if beta.abs() > consistency_tol {
                return Err(RowInconsistency);
            }
            continue;
        }
        for vj in v.iter_mut() {
            *vj /= leftover;
        }
        basis.push(v);
        basis_rhs.push(beta / leftover);
        kept.push(i);
        kept_data.extend_from_slice(a.row(i));
        kept_b.push(b[i]);
    }
    Ok(ReducedRows {
        a: RealMatrix {
            rows: kept.len(),
            cols: n,
            data: kept_data,
        },
        b: kept_b,
        kept,
    })
}

/// Solves one Newton system for the given complementarity target by
/// eliminating onto the normal equations.
#[allow(clippy::too_many_arguments)]
fn step_directions(
    a: &RealMatrix,
    normal: &NormalSystem,
    d: &[f64],
    x: &[f64],
    s: &[f64],
    r_b: &[f64],
    r_c: &[f64],
    r_xs: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = d.len();
    let t: Vec<f64> = (0..n).map(|k| d[k] * r_c[k] - r_xs[k] / s[k]).collect();
    let rhs: Vec<f64> = a
        .mul_vec(&t)
        .iter()
        .zip(r_b)
        .map(|(at, &rbi)| -rbi - at)
        .collect();
    let dl = normal.solve(&rhs);
    let at_dl = a.tr_mul_vec(&dl);
    let dx: Vec<f64> = (0..n).map(|k| d[k] * at_dl[k] + t[k]).collect();
    let ds: Vec<f64> = (0..n).map(|k| (-r_xs[k] - s[k] * dx[k]) / x[k]).collect();
    (dx, dl, ds)
}

/// Longest step in `[0, inf)` keeping `v + alpha dv` nonnegative.
fn max_step(v: &[f64], dv: &[f64]) -> f64 {
    let mut alpha = f64::INFINITY;
    for (&vi, &di) in v.iter().zip(dv) {
        if di < 0.0 {
            alpha = alpha.min(-vi / di);
        }
    }
    alpha
}

/// The weighted Gram matrix `A diag(d) A'` with its Cholesky factor, plus
/// refinement of solves against the unmodified matrix when the factorization
/// needed a diagonal boost.
struct NormalSystem {
    dim: usize,
    /// Lower triangle of the assembled matrix, row-major.
    gram: Vec<f64>,
    /// Lower-triangular Cholesky factor of the (possibly boosted) matrix.
    factor: Vec<f64>,
}

impl NormalSystem {
    fn new(dim: usize) -> Self {
        NormalSystem {
            dim,
            gram: vec![0.0; dim * dim],
            factor: vec![0.0; dim * dim],
        }
    }

    /// Rebuilds the Gram matrix, skipping columns whose weight is so small
    /// they cannot influence the factorization.
    fn accumulate(&mut self, at: &[f64], n_cols: usize, weights: &[f64]) {
        let m = self.dim;
        self.gram.fill(0.0);
        let w_max = weights.iter().cloned().fold(0.0f64, f64::max);
        let skip_below = w_max * WEIGHT_SKIP_REL;
        for (k, &w) in weights.iter().enumerate().take(n_cols) {
            if w <= skip_below {
                continue;
            }
            let col = &at[k * m..(k + 1) * m];
            for i in 0..m {
                let scaled = w * col[i];
                if scaled == 0.0 {
                    continue;
                }
                let row = &mut self.gram[i * m..i * m + i + 1];
                for (rj, &cj) in row.iter_mut().zip(col) {
                    *rj += scaled * cj;
                }
            }
        }
    }

    /// Cholesky-factors the assembled matrix, adding progressively larger
    /// diagonal boosts until the factorization goes through.
    fn factor(&mut self) {
        let m = self.dim;
        let max_diag = (0..m)
            .map(|i| self.gram[i * m + i])
            .fold(0.0f64, f64::max)
            .max(1e-300);
        let mut boost = 0.0;
        loop {
            self.factor.copy_from_slice(&self.gram);
            if boost > 0.0 {
                for i in 0..m {
                    self.factor[i * m + i] += boost;
                }
            }
            if cholesky_in_place(&mut self.factor, m) {
                return;
            }
            boost = if boost == 0.0 {
                max_diag * 1e-14
            } else {
                boost * 100.0
            };
        }
    }

    /// Solves against the factored matrix, then polishes the answer against
    /// the unmodified Gram matrix so a diagonal boost does not bias it.
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut z = cholesky_solve(&self.factor, self.dim, rhs);
        for _ in 0..REFINEMENT_ROUNDS {
            let mz = sym_mul(&self.gram, self.dim, &z);
            let resid: Vec<f64> = rhs.iter().zip(&mz).map(|(&r, &p)| r - p).collect();
            let correction = cholesky_solve(&self.factor, self.dim, &resid);
            for (zi, ci) in z.iter_mut().zip(&correction) {
                *zi += ci;
            }
        }
        z
    }
}

/// In-place Cholesky on the lower triangle; `false` if a pivot is not
/// strictly positive.
fn cholesky_in_place(l: &mut [f64], dim: usize) -> bool {
    for i in 0..dim {
        for j in 0..=i {
            let mut sum = l[i * dim + j];
            for k in 0..j {
                sum -= l[i * dim + k] * l[j * dim + k];
            }
            if i == j {
                if !(sum.is_finite() && sum > 0.0) {
                    return false;
                }
                l[i * dim + i] = sum.sqrt();
            } else {
                l[i * dim + j] = sum / l[j * dim + j];
            }
        }
    }
    true
}

fn cholesky_solve(l: &[f64], dim: usize, rhs: &[f64]) -> Vec<f64> {
    let mut y = rhs.to_vec();
    for i in 0..dim {
        let mut sum = y[i];
        for k in 0..i {
            sum -= l[i * dim + k] * y[k];
        }
        y[i] = sum / l[i * dim + i];
    }
    for i in (0..dim).rev() {
        let mut sum = y[i];
        for k in i + 1..dim {
            sum -= l[k * dim + i] * y[k];
        }
        y[i] = sum / l[i * dim + i];
    }
    y
}

/// Symmetric matrix-vector product using only the stored lower triangle.
fn sym_mul(lower: &[f64], dim: usize, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for i in 0..dim {
        let row = &lower[i * dim..i * dim + i + 1];
        let mut acc = row[i] * v[i];
        for j in 0..i {
            acc += row[j] * v[j];
            out[j] += row[j] * v[i];
        }
        out[i] += acc;
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}
