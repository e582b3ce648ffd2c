//! Shared fixtures for the unit tests.

use num_complex::Complex64;

use crate::rng::SplitMix64;
use crate::signal::{MultitoneSpec, TimeSignal, Tone};

/// The five-tone length-512 signal used throughout the benchmark:
/// bins {28, 26, 6, 42, 90} with amplitudes {3.5, 1.5, 4.4, 1.8, 3.0}.
pub fn reference_spec() -> MultitoneSpec {
    MultitoneSpec::new(
        512,
        vec![
            Tone { bin: 28, amplitude: 3.5 },
            Tone { bin: 26, amplitude: 1.5 },
            Tone { bin: 6, amplitude: 4.4 },
            Tone { bin: 42, amplitude: 1.8 },
            Tone { bin: 90, amplitude: 3.0 },
        ],
    )
    .unwrap()
}

pub fn random_complex(g: &mut SplitMix64) -> Complex64 {
    Complex64::new(2.0 * g.next_f64() - 1.0, 2.0 * g.next_f64() - 1.0)
}

pub fn random_signal(n: usize, seed: u64) -> TimeSignal {
    let mut g = SplitMix64::new(seed);
    TimeSignal::new((0..n).map(|_| random_complex(&mut g)).collect()).unwrap()
}

/// Gaussian elimination with partial pivoting on a square system given in
/// row-major form. `None` when the matrix is singular at working precision.
pub fn solve_real_square(a: &[f64], dim: usize, b: &[f64]) -> Option<Vec<f64>> {
    assert_eq!(a.len(), dim * dim);
    assert_eq!(b.len(), dim);
    let w = dim + 1;
    let mut m = vec![0.0; dim * w];
    for i in 0..dim {
        m[i * w..i * w + dim].copy_from_slice(&a[i * dim..(i + 1) * dim]);
        m[i * w + dim] = b[i];
    }
    for col in 0..dim {
        let (mut pivot, mut best) = (col, m[col * w + col].abs());
        for r in col + 1..dim {
            let v = m[r * w + col].abs();
            if v > best {
                pivot = r;
                best = v;
            }
        }
        if best < 1e-12 {
            return None;
        }
        if pivot != col {
            for j in col..w {
                m.swap(pivot * w + j, col * w + j);
            }
        }
        for r in col + 1..dim {
            let factor = m[r * w + col] / m[col * w + col];
            if factor == 0.0 {
                continue;
            }
            for j in col..w {
                m[r * w + j] -= factor * m[col * w + j];
            }
        }
    }
    let mut x = vec![0.0; dim];
    for i in (0..dim).rev() {
        let mut sum = m[i * w + dim];
        for j in i + 1..dim {
            sum -= m[i * w + j] * x[j];
        }
        x[i] = sum / m[i * w + i];
    }
    Some(x)
}

/// Brute-force optimum of `min c'x  s.t.  Ax = b, x >= 0` by enumerating
/// every basic solution. Dependent rows are eliminated first (row
/// operations leave the feasible set untouched), so redundant systems are
/// fine. `None` when no feasible basic solution exists.
pub fn lp_vertex_oracle(c: &[f64], a: &[f64], m: usize, n: usize, b: &[f64]) -> Option<f64> {
    assert_eq!(a.len(), m * n);
    assert_eq!(b.len(), m);
    assert_eq!(c.len(), n);
    // Row-echelon pass over [A | b] to find an equivalent full-row-rank
    // system.
    let w = n + 1;
    let mut work = vec![0.0; m * w];
    for i in 0..m {
        work[i * w..i * w + n].copy_from_slice(&a[i * n..(i + 1) * n]);
        work[i * w + n] = b[i];
    }
    let mut rank = 0;
    for col in 0..n {
        let (mut pivot, mut best) = (rank, 0.0);
        for r in rank..m {
            let v = work[r * w + col].abs();
            if v > best {
                pivot = r;
                best = v;
            }
        }
        if best < 1e-10 {
            continue;
        }
        if pivot != rank {
            for j in 0..w {
                work.swap(pivot * w + j, rank * w + j);
            }
        }
        for r in rank + 1..m {
            let factor = work[r * w + col] / work[rank * w + col];
            if factor == 0.0 {
                continue;
            }
            for j in col..w {
                work[r * w + j] -= factor * work[rank * w + j];
            }
        }
        rank += 1;
        if rank == m {
            break;
        }
    }
    for r in rank..m {
        if work[r * w + n].abs() > 1e-9 {
            return None; // 0 = nonzero: inconsistent system
        }
    }
    if rank == 0 {
        return Some(0.0); // only x = 0 is a basic solution of 0x = 0
    }

    let mut best: Option<f64> = None;
    let mut combo: Vec<usize> = (0..rank).collect();
    let mut basis = vec![0.0; rank * rank];
    let rhs: Vec<f64> = (0..rank).map(|i| work[i * w + n]).collect();
    loop {
        for (j, &col) in combo.iter().enumerate() {
            for i in 0..rank {
                basis[i * rank + j] = work[i * w + col];
            }
        }
        if let Some(xb) = solve_real_square(&basis, rank, &rhs) {
            if xb.iter().all(|&v| v >= -1e-9) {
                let objective: f64 = combo.iter().zip(&xb).map(|(&col, &v)| c[col] * v).sum();
                best = Some(best.map_or(objective, |cur: f64| cur.min(objective)));
            }
        }
        // Advance to the next size-`rank` column subset.
        let mut i = rank;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if combo[i] != i + n - rank {
                combo[i] += 1;
                for j in i + 1..rank {
                    combo[j] = combo[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// A random sparse spec with `k` distinct bins and amplitudes in `[1, 5]`.
pub fn random_sparse_spec(n: usize, k: usize, seed: u64) -> MultitoneSpec {
    let mut g = SplitMix64::new(seed);
    let mut bins = Vec::with_capacity(k);
    while bins.len() < k {
        let bin = g.next_below(n as u64) as usize;
        if !bins.contains(&bin) {
            bins.push(bin);
        }
    }
    let components = bins
        .into_iter()
        .map(|bin| Tone {
            bin,
            amplitude: 1.0 + 4.0 * g.next_f64(),
        })
        .collect();
    MultitoneSpec::new(n, components).unwrap()
}
