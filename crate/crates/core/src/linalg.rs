//! Dense complex vectors and matrices, Householder QR least squares, and a
//! power-iteration estimate of the largest squared singular value.
//!
//! Everything here is self-contained: the recovery algorithms only need a
//! handful of operations on small dense systems, so no external linear
//! algebra backend is assumed.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("entries must be finite")]
    NonFinite,
    #[error("rank deficient: |R[{index},{index}]| = {pivot:.3e} is below tolerance")]
    RankDeficient { index: usize, pivot: f64 },
    #[error("matrix has no nonzero entry")]
    ZeroMatrix,
}

fn all_finite(entries: &[Complex64]) -> bool {
    entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Column vector of complex doubles. Construction checks that every entry is
/// finite; the numeric code can then assume well-formed values throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    entries: Vec<Complex64>,
}

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self, LinalgError> {
        if !all_finite(&entries) {
            return Err(LinalgError::NonFinite);
        }
        Ok(ComplexVector { entries })
    }

    pub fn zeros(n: usize) -> Self {
        ComplexVector {
            entries: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.entries
    }

    pub fn norm_l2(&self) -> f64 {
        norm_l2(&self.entries)
    }
}

/// Euclidean norm of a complex slice.
pub fn norm_l2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Inner product `<a, b> = a^H b` (conjugate-linear in the first argument).
pub fn dot_conj(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if !all_finite(&data) {
            return Err(LinalgError::NonFinite);
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// New matrix formed from the given columns, in the given order.
    pub fn select_columns(&self, indices: &[usize]) -> ComplexMatrix {
        let mut data = Vec::with_capacity(self.rows * indices.len());
        for i in 0..self.rows {
            let row = self.row(i);
            for &j in indices {
                data.push(row[j]);
            }
        }
        ComplexMatrix {
            rows: self.rows,
            cols: indices.len(),
            data,
        }
    }

    /// `A v`.
    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols, "mul_vec dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .map(|(a, x)| a * x)
                    .sum::<Complex64>()
            })
            .collect()
    }

    /// `A^H v` (conjugate transpose times vector).
    pub fn adjoint_mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.rows, "adjoint_mul_vec dimension mismatch");
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * vi;
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm_l2(&self.data)
    }
}

/// Relative pivot tolerance below which the QR factorization reports rank
/// deficiency.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Solves `min_x || A x - b ||_2` for `A` with `rows >= cols` by Householder
/// QR factorization.
///
/// # Errors
///
/// * [`LinalgError::DimensionMismatch`] when `b` does not match the row count
///   or the system is wider than tall.
/// * [`LinalgError::RankDeficient`] when a diagonal entry of `R` falls below
///   `RANK_TOLERANCE` times the Frobenius norm of `A`.
#[allow(clippy::needless_range_loop)]
pub fn least_squares_solve(a: &ComplexMatrix, b: &[Complex64]) -> Result<Vec<Complex64>, LinalgError> {
    let (m, n) = (a.rows, a.cols);
    if b.len() != m {
        return Err(LinalgError::DimensionMismatch(format!(
            "matrix has {m} rows but right-hand side has {} entries",
            b.len()
        )));
    }
    if m < n {
        return Err(LinalgError::DimensionMismatch(format!(
            "least squares needs rows >= cols, got {m}x{n}"
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if !all_finite(b) {
        return Err(LinalgError::NonFinite);
    }

    let pivot_floor = RANK_TOLERANCE * a.frobenius_norm();
    let mut r = a.clone();
    let mut rhs = b.to_vec();

    // Householder reflections, applied column by column; the reflector for
    // column k zeroes entries below the diagonal while accumulating Q^H b.
    for k in 0..n {
        // Build the reflector v from the k-th column tail.
        let mut v: Vec<Complex64> = (k..m).map(|i| r.get(i, k)).collect();
        let x_norm = norm_l2(&v);
        if x_norm > 0.0 {
            let x0 = v[0];
            // alpha = -exp(i*arg(x0)) * ||x||; choosing the sign away from x0
            // avoids cancellation.
            let phase = if x0.norm() == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                x0 / x0.norm()
            };
            let alpha = -phase * x_norm;
            v[0] -= alpha;
            let v_norm_sq = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
            if v_norm_sq > 0.0 {
                let beta = 2.0 / v_norm_sq;
                // Apply H = I - beta v v^H to the trailing columns of R.
                for j in k..n {
                    let mut proj = Complex64::new(0.0, 0.0);
                    for (t, vi) in v.iter().enumerate() {
                        proj += vi.conj() * r.get(k + t, j);
                    }
                    proj *= beta;
                    for (t, vi) in v.iter().enumerate() {
                        let cur = r.get(k + t, j);
                        r.set(k + t, j, cur - proj * vi);
                    }
                }
                // ... and to the right-hand side.
                let mut proj = Complex64::new(0.0, 0.0);
                for (t, vi) in v.iter().enumerate() {
                    proj += vi.conj() * rhs[k + t];
                }
                proj *= beta;
                for (t, vi) in v.iter().enumerate() {
                    rhs[k + t] -= proj * vi;
                }
            }
        }
        let pivot = r.get(k, k).norm();
        if pivot <= pivot_floor {
            return Err(LinalgError::RankDeficient { index: k, pivot });
        }
    }

    // Back substitution on the upper-triangular system R x = Q^H b.
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for k in (0..n).rev() {
        let mut acc = rhs[k];
        for j in k + 1..n {
            acc -= r.get(k, j) * x[j];
        }
        x[k] = acc / r.get(k, k);
    }
    Ok(x)
}

/// Estimates the largest squared singular value of `A` (the spectral norm of
/// `A^H A`) by power iteration from a seeded random start vector.
///
/// The returned value is the Rayleigh quotient of the final iterate, so it
/// never exceeds the true value and is nondecreasing in `iterations`.
///
/// # Errors
///
/// [`LinalgError::ZeroMatrix`] when `A` has no nonzero entry.
pub fn spectral_norm_sq_estimate(
    a: &ComplexMatrix,
    iterations: usize,
    seed: u64,
) -> Result<f64, LinalgError> {
    if a.frobenius_norm() == 0.0 {
        return Err(LinalgError::ZeroMatrix);
    }
    let n = a.cols;
    let mut gen = crate::rng::SplitMix64::new(seed);
    let mut v: Vec<Complex64> = Vec::new();

    // A random start vector is orthogonal to the dominant eigenvector with
    // probability zero; redraw on the (pathological) zero image.
    for _attempt in 0..8 {
        v = (0..n)
            .map(|_| Complex64::new(2.0 * gen.next_f64() - 1.0, 2.0 * gen.next_f64() - 1.0))
            .collect();
        let nv = norm_l2(&v);
        if nv == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= nv);
        if norm_l2(&a.mul_vec(&v)) > 0.0 {
            break;
        }
    }

    for _ in 0..iterations {
        let w = a.mul_vec(&v);
        if norm_l2(&w) == 0.0 {
            return Ok(0.0);
        }
        let mut next = a.adjoint_mul_vec(&w);
        let nn = norm_l2(&next);
        if nn == 0.0 {
            return Ok(0.0);
        }
        next.iter_mut().for_each(|z| *z /= nn);
        v = next;
    }
    // Rayleigh quotient ||A v||^2 for the unit-norm final iterate.
    Ok(a.mul_vec(&v).iter().map(|z| z.norm_sqr()).sum())
}
