//! Recovery of sparse multitone signals from a random subset of their time
//! samples, together with a reproducible benchmark harness.
//!
//! A length-N signal whose discrete Fourier spectrum has only K nonzero bins
//! is observed through M < N randomly chosen time samples. The modules here
//! cover the whole pipeline:
//!
//! * [`signal`] — multitone test signals and the unitary DFT,
//! * [`sensing`] — sample masks, measurements, and the partial inverse-DFT
//!   dictionary,
//! * [`pursuit`] — greedy recovery (matching pursuit variants),
//! * [`convex`] — missing-sample gradient descent on spectral concentration
//!   and equality-constrained l1 minimization via an interior-point solver,
//! * [`threshold`] — iterative hard thresholding,
//! * [`benchmark`] — seeded experiment sweeps, CSV records, and plot scripts,
//! * [`linalg`] / [`rng`] — the dense complex linear algebra and the
//!   deterministic generator everything above is built on.

pub mod benchmark;
pub mod convex;
pub mod linalg;
pub mod pursuit;
pub mod rng;
pub mod sensing;
pub mod signal;
pub mod threshold;

#[cfg(test)]
pub(crate) mod testutil;
