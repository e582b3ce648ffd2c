//! Random time-domain sampling and the partial inverse-DFT dictionary.
//!
//! Measurements keep `M` of the `N` time samples, chosen uniformly without
//! replacement by a seeded draw. Row `m` of the dictionary is the
//! `indices[m]`-th row of the `N x N` unitary inverse-DFT matrix, so that
//! `A u` evaluates the time signal with spectrum `u` at the kept instants.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{ComplexMatrix, ComplexVector};
use crate::rng::SplitMix64;
use crate::signal::{self, TimeSignal};

#[derive(Debug, Error)]
pub enum SensingError {
    #[error("cannot keep {m} of {n} samples")]
    MTooLarge { m: usize, n: usize },
    #[error("mask must keep at least one sample")]
    EmptyMask,
    #[error("mask index {index} is out of range for length {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("mask indices must be strictly increasing")]
    NotStrictlyIncreasing,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed index on line {line}")]
    Parse { line: usize },
}

/// Strictly increasing set of kept time indices within a length-`n` frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleMask {
    n: usize,
    indices: Vec<usize>,
}

impl SampleMask {
    pub fn new(n: usize, indices: Vec<usize>) -> Result<Self, SensingError> {
        if indices.is_empty() {
            return Err(SensingError::EmptyMask);
        }
        for pair in indices.windows(2) {
            if pair[1] <= pair[0] {
                return Err(SensingError::NotStrictlyIncreasing);
            }
        }
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(SensingError::IndexOutOfRange { index: last, n });
            }
        }
        Ok(SampleMask { n, indices })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Time indices not kept by the mask, ascending.
    pub fn complement(&self) -> Vec<usize> {
        let mut kept = vec![false; self.n];
        for &i in &self.indices {
            kept[i] = true;
        }
        (0..self.n).filter(|&i| !kept[i]).collect()
    }
}

/// The kept samples of one signal, together with the mask that selected
/// them.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurements {
    pub mask: SampleMask,
    pub values: ComplexVector,
}

impl Measurements {
    pub fn new(mask: SampleMask, values: ComplexVector) -> Result<Self, SensingError> {
        if values.len() != mask.m() {
            return Err(SensingError::LengthMismatch {
                expected: mask.m(),
                got: values.len(),
            });
        }
        Ok(Measurements { mask, values })
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }
}

/// Draws a uniformly random mask keeping exactly `m` of `n` indices.
///
/// A seeded Fisher-Yates partial shuffle makes every m-subset exactly
/// equally likely; the generator is documented in [`crate::rng`], so a mask
/// is fully reproducible from `(n, m, seed)`.
pub fn draw_mask(n: usize, m: usize, seed: u64) -> Result<SampleMask, SensingError> {
    if m == 0 {
        return Err(SensingError::EmptyMask);
    }
    if m > n {
        return Err(SensingError::MTooLarge { m, n });
    }
    let mut pool: Vec<usize> = (0..n).collect();
    let mut gen = SplitMix64::new(seed);
    for i in 0..m {
        let j = i + gen.next_below((n - i) as u64) as usize;
        pool.swap(i, j);
    }
    let mut indices: Vec<usize> = pool[..m].to_vec();
    indices.sort_unstable();
    SampleMask::new(n, indices)
}

/// Restricts a full signal to the masked instants.
pub fn sample(x: &TimeSignal, mask: &SampleMask) -> Result<Measurements, SensingError> {
    if x.n() != mask.n() {
        return Err(SensingError::LengthMismatch {
            expected: mask.n(),
            got: x.n(),
        });
    }
    let values: Vec<Complex64> = mask.indices().iter().map(|&i| x.samples()[i]).collect();
    Measurements::new(
        mask.clone(),
        ComplexVector::new(values).expect("samples of a valid signal are finite"),
    )
}

/// Partial inverse-DFT dictionary: `M x N` matrix whose row `m` is row
/// `mask.indices()[m]` of the unitary inverse-DFT matrix, optionally with
/// columns normalized to unit Euclidean length.
#[derive(Debug, Clone)]
pub struct Dictionary {
    mask: SampleMask,
    a: ComplexMatrix,
    column_norms: Vec<f64>,
    normalized: bool,
}

impl Dictionary {
    pub fn mask(&self) -> &SampleMask {
        &self.mask
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.a
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn cols(&self) -> usize {
        self.a.cols()
    }

    /// Column norms of the unnormalized dictionary (before any scaling).
    pub fn column_norms(&self) -> &[f64] {
        &self.column_norms
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Converts a coefficient for column `j` of this dictionary to the
    /// unitary-DFT scale, undoing column normalization when present.
    pub fn coefficient_to_unitary(&self, j: usize, v: Complex64) -> Complex64 {
        if self.normalized {
            v / self.column_norms[j]
        } else {
            v
        }
    }

    /// `A l`, evaluated through the FFT when the frame length is a power of
    /// two and by dense multiplication otherwise.
    pub fn apply(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(coeffs.len(), self.cols(), "apply dimension mismatch");
        let n = self.mask.n();
        if !n.is_power_of_two() {
            return self.a.mul_vec(coeffs);
        }
        let scaled: Vec<Complex64> = if self.normalized {
            coeffs
                .iter()
                .zip(&self.column_norms)
                .map(|(c, &nrm)| c / nrm)
                .collect()
        } else {
            coeffs.to_vec()
        };
        let time = signal::transform(&scaled, false);
        self.mask.indices().iter().map(|&i| time[i]).collect()
    }

    /// `A^H v`, the correlation of measurements with every column.
    pub fn apply_adjoint(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.rows(), "apply_adjoint dimension mismatch");
        let n = self.mask.n();
        if !n.is_power_of_two() {
            return self.a.adjoint_mul_vec(v);
        }
        let mut embedded = vec![Complex64::new(0.0, 0.0); n];
        for (&i, &val) in self.mask.indices().iter().zip(v) {
            embedded[i] = val;
        }
        let mut u = signal::transform(&embedded, true);
        if self.normalized {
            for (z, &nrm) in u.iter_mut().zip(&self.column_norms) {
                *z /= nrm;
            }
        }
        u
    }

    /// Measurement-domain residual `y - A l` and its norm.
    pub fn residual(&self, y: &[Complex64], coeffs: &[Complex64]) -> (Vec<Complex64>, f64) {
        let al = self.apply(coeffs);
        let r: Vec<Complex64> = y.iter().zip(&al).map(|(a, b)| a - b).collect();
        let norm = crate::linalg::norm_l2(&r);
        (r, norm)
    }
}

/// Builds the partial inverse-DFT dictionary for a mask.
#[allow(clippy::needless_range_loop)]
pub fn build_dictionary(n: usize, mask: &SampleMask, normalize: bool) -> Result<Dictionary, SensingError> {
    if mask.n() != n {
        return Err(SensingError::LengthMismatch {
            expected: n,
            got: mask.n(),
        });
    }
    let m = mask.m();
    let scale = 1.0 / (n as f64).sqrt();
    // Integer angle reduction keeps entries exact for large bin*time
    // products.
    let table: Vec<Complex64> = (0..n)
        .map(|t| {
            let ang = 2.0 * std::f64::consts::PI * t as f64 / n as f64;
            Complex64::new(ang.cos(), ang.sin())
        })
        .collect();
    let mut data = Vec::with_capacity(m * n);
    for &row_t in mask.indices() {
        for k in 0..n {
            data.push(scale * table[(k * row_t) % n]);
        }
    }
    let mut a = ComplexMatrix::new(m, n, data).expect("dictionary entries are finite");
    let column_norms: Vec<f64> = (0..n)
        .map(|j| {
            (0..m)
                .map(|i| a.get(i, j).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    if normalize {
        for i in 0..m {
            for j in 0..n {
                let v = a.get(i, j) / column_norms[j];
                a.set(i, j, v);
            }
        }
    }
    Ok(Dictionary {
        mask: mask.clone(),
        a,
        column_norms,
        normalized: normalize,
    })
}

/// Largest normalized inner product between two distinct columns.
///
/// For a partial inverse-DFT dictionary the inner product of columns `i` and
/// `j` depends only on `(j - i) mod N`, so the maximum is found from the
/// spectrum of the mask indicator rather than from all column pairs.
pub fn mutual_coherence(d: &Dictionary) -> f64 {
    let n = d.cols();
    let m = d.rows();
    if n < 2 {
        return 0.0;
    }
    // <a_i, a_j> = (1/N) sum_{t in mask} exp(+j 2 pi (j - i) t / N); with
    // unit-normalized columns the denominator is M/N.
    let mut indicator = vec![Complex64::new(0.0, 0.0); n];
    for &t in d.mask.indices() {
        indicator[t] = Complex64::new(1.0, 0.0);
    }
    let spec = signal::transform(&indicator, true);
    let scale = (n as f64).sqrt() / m as f64;
    spec.iter()
        .skip(1)
        .map(|z| z.norm() * scale)
        .fold(0.0, f64::max)
}

/// Writes a mask as CSV: one index per line, no header.
pub fn write_mask_csv(mask: &SampleMask, w: &mut impl Write) -> Result<(), SensingError> {
    for &i in mask.indices() {
        writeln!(w, "{i}")?;
    }
    Ok(())
}

/// Reads a mask written by [`write_mask_csv`]; `n` supplies the frame length
/// the indices must fit in.
pub fn read_mask_csv(n: usize, r: impl BufRead) -> Result<SampleMask, SensingError> {
    let mut indices = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: usize = line.parse().map_err(|_| SensingError::Parse { line: idx + 1 })?;
        indices.push(v);
    }
    SampleMask::new(n, indices)
}
