//! Multitone test signals and the unitary discrete Fourier transform.
//!
//! A multitone signal is a sum of complex exponentials on integer frequency
//! bins; its spectrum is exactly sparse, which makes it the standard test
//! input for the recovery algorithms in this crate. Both transform
//! directions carry the symmetric `1/sqrt(N)` factor, so they are unitary
//! and Parseval holds without bookkeeping.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::ComplexVector;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("bin {bin} appears more than once")]
    DuplicateBin { bin: usize },
    #[error("bin {bin} is out of range for length {n}")]
    BinOutOfRange { bin: usize, n: usize },
    #[error("amplitude for bin {bin} must be finite and nonzero")]
    InvalidAmplitude { bin: usize },
    #[error("signal length must be at least 1")]
    ZeroLength,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed CSV record on line {line}")]
    Parse { line: usize },
}

/// One spectral component: an integer frequency bin and a real amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tone {
    pub bin: usize,
    pub amplitude: f64,
}

/// Description of a multitone signal of length `n`:
/// `x[t] = sum_i amplitude_i * exp(+j 2 pi bin_i t / n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultitoneSpec {
    pub n: usize,
    pub components: Vec<Tone>,
}

impl MultitoneSpec {
    pub fn new(n: usize, components: Vec<Tone>) -> Result<Self, SignalError> {
        let spec = MultitoneSpec { n, components };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks bins are distinct and in range and amplitudes are usable;
    /// deserialized specs must be validated before use.
    pub fn validate(&self) -> Result<(), SignalError> {
        if self.n == 0 {
            return Err(SignalError::ZeroLength);
        }
        let mut seen = vec![false; self.n];
        for tone in &self.components {
            if tone.bin >= self.n {
                return Err(SignalError::BinOutOfRange {
                    bin: tone.bin,
                    n: self.n,
                });
            }
            if seen[tone.bin] {
                return Err(SignalError::DuplicateBin { bin: tone.bin });
            }
            seen[tone.bin] = true;
            if !tone.amplitude.is_finite() || tone.amplitude == 0.0 {
                return Err(SignalError::InvalidAmplitude { bin: tone.bin });
            }
        }
        Ok(())
    }

    /// Bins of the components in ascending order.
    pub fn support(&self) -> Vec<usize> {
        let mut bins: Vec<usize> = self.components.iter().map(|t| t.bin).collect();
        bins.sort_unstable();
        bins
    }
}

/// Time-domain signal of complex samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    samples: ComplexVector,
}

impl TimeSignal {
    pub fn new(samples: Vec<Complex64>) -> Result<Self, SignalError> {
        let samples = ComplexVector::new(samples)
            .map_err(|_| SignalError::InvalidAmplitude { bin: 0 })?;
        if samples.is_empty() {
            return Err(SignalError::ZeroLength);
        }
        Ok(TimeSignal { samples })
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[Complex64] {
        self.samples.entries()
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples.into_vec()
    }
}

/// Frequency-domain coefficients on the unitary DFT scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    coeffs: ComplexVector,
}

impl Spectrum {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self, SignalError> {
        let coeffs = ComplexVector::new(coeffs)
            .map_err(|_| SignalError::InvalidAmplitude { bin: 0 })?;
        if coeffs.is_empty() {
            return Err(SignalError::ZeroLength);
        }
        Ok(Spectrum { coeffs })
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        self.coeffs.entries()
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs.into_vec()
    }
}

/// Table of the `n` roots of unity `exp(-j 2 pi t / n)`, `t = 0..n`.
pub(crate) fn root_table(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|t| {
            let ang = -2.0 * std::f64::consts::PI * t as f64 / n as f64;
            Complex64::new(ang.cos(), ang.sin())
        })
        .collect()
}

/// Synthesizes the time-domain samples of a multitone spec.
///
/// Angles are reduced as integers modulo `n` before evaluation, so bins far
/// from zero lose no precision.
pub fn generate_multitone(spec: &MultitoneSpec) -> Result<TimeSignal, SignalError> {
    spec.validate()?;
    let n = spec.n;
    let table = root_table(n);
    let mut samples = vec![Complex64::new(0.0, 0.0); n];
    for tone in &spec.components {
        for (t, s) in samples.iter_mut().enumerate() {
            // exp(+j 2 pi bin t / n) is the conjugate of the forward root.
            let w = table[(tone.bin * t) % n].conj();
            *s += tone.amplitude * w;
        }
    }
    TimeSignal::new(samples)
}

fn is_power_of_two(n: usize) -> bool {
    n != 0 && n & (n - 1) == 0
}

/// In-place iterative radix-2 transform. `sign = -1` is the forward
/// direction `exp(-j 2 pi k t / n)`; no scaling is applied here.
fn fft_pow2(buf: &mut [Complex64], sign: f64) {
    let n = buf.len();
    debug_assert!(is_power_of_two(n));
    // Bit-reversal permutation.
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
    // Precompute half-table of roots in the requested direction.
    let half: Vec<Complex64> = (0..n / 2)
        .map(|t| {
            let ang = sign * 2.0 * std::f64::consts::PI * t as f64 / n as f64;
            Complex64::new(ang.cos(), ang.sin())
        })
        .collect();
    let mut len = 2;
    while len <= n {
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..len / 2 {
                let w = half[k * stride];
                let u = buf[start + k];
                let v = buf[start + k + len / 2] * w;
                buf[start + k] = u + v;
                buf[start + k + len / 2] = u - v;
            }
        }
        len <<= 1;
    }
}

/// O(n^2) transform by direct summation with integer angle reduction.
fn transform_direct(input: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = input.len();
    let table = root_table(n);
    (0..n)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (t, &x) in input.iter().enumerate() {
                let mut w = table[(k * t) % n];
                if sign > 0.0 {
                    w = w.conj();
                }
                acc += x * w;
            }
            acc
        })
        .collect()
}

/// Unitary transform core: radix-2 FFT for powers of two, direct summation
/// otherwise. The direct form is retained both as the fallback and as the
/// reference the FFT path is tested against.
pub(crate) fn transform(input: &[Complex64], forward: bool) -> Vec<Complex64> {
    let n = input.len();
    let sign = if forward { -1.0 } else { 1.0 };
    let mut out = if is_power_of_two(n) {
        let mut buf = input.to_vec();
        fft_pow2(&mut buf, sign);
        buf
    } else {
        transform_direct(input, sign)
    };
    let scale = 1.0 / (n as f64).sqrt();
    out.iter_mut().for_each(|z| *z *= scale);
    out
}

/// Unitary forward DFT: `X[k] = n^{-1/2} sum_t x[t] exp(-j 2 pi k t / n)`.
pub fn dft(x: &TimeSignal) -> Spectrum {
    Spectrum {
        coeffs: ComplexVector::new(transform(x.samples(), true))
            .expect("transform of finite input is finite"),
    }
}

/// Unitary inverse DFT: `x[t] = n^{-1/2} sum_k X[k] exp(+j 2 pi k t / n)`.
pub fn idft(u: &Spectrum) -> TimeSignal {
    TimeSignal {
        samples: ComplexVector::new(transform(u.coeffs(), false))
            .expect("transform of finite input is finite"),
    }
}

/// Indices whose coefficient magnitude is strictly above `threshold`,
/// ascending.
pub fn support_of(u: &Spectrum, threshold: f64) -> Vec<usize> {
    support_of_coeffs(u.coeffs(), threshold)
}

/// [`support_of`] on a raw coefficient slice.
pub fn support_of_coeffs(coeffs: &[Complex64], threshold: f64) -> Vec<usize> {
    coeffs
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > threshold)
        .map(|(k, _)| k)
        .collect()
}

/// Writes a signal as CSV: one `re,im` pair per line, no header, 17
/// significant digits (lossless for f64).
pub fn write_signal_csv(x: &TimeSignal, w: &mut impl Write) -> Result<(), SignalError> {
    for s in x.samples() {
        writeln!(w, "{:.16e},{:.16e}", s.re, s.im)?;
    }
    Ok(())
}

/// Reads a signal written by [`write_signal_csv`].
pub fn read_signal_csv(r: impl BufRead) -> Result<TimeSignal, SignalError> {
    let mut samples = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let re = parts.next().and_then(|s| s.trim().parse::<f64>().ok());
        let im = parts.next().and_then(|s| s.trim().parse::<f64>().ok());
        match (re, im, parts.next()) {
            (Some(re), Some(im), None) => samples.push(Complex64::new(re, im)),
            _ => return Err(SignalError::Parse { line: idx + 1 }),
        }
    }
    if samples.is_empty() {
        return Err(SignalError::ZeroLength);
    }
    TimeSignal::new(samples)
}
