//! CSV serialization for benchmark records and a gnuplot script generator
//! for the median-error-versus-measurements figure.

use std::io::{BufRead, Write};

use super::{AlgorithmId, BenchmarkError, BenchmarkRecord};

const HEADER: &str = "algorithm,M,trial,mse,support_exact,residual_norm,iterations,elapsed_us,status";

/// Formats a float with 12 significant digits; non-finite values become the
/// empty field.
fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.11e}")
    } else {
        String::new()
    }
}

fn parse_float(field: &str, line: usize, name: &str) -> Result<f64, BenchmarkError> {
    if field.is_empty() {
        return Ok(f64::INFINITY);
    }
    field.parse().map_err(|_| BenchmarkError::Parse {
        line,
        message: format!("bad {name} value '{field}'"),
    })
}

/// Writes records as CSV with a fixed header and one row per record.
pub fn emit_csv<W: Write>(records: &[BenchmarkRecord], dest: &mut W) -> Result<(), BenchmarkError> {
    writeln!(dest, "{HEADER}")?;
    for r in records {
        writeln!(
            dest,
            "{},{},{},{},{},{},{},{},{}",
            r.algorithm.name(),
            r.m,
            r.trial,
            fmt_float(r.mse),
            u8::from(r.support_exact),
            fmt_float(r.residual_norm),
            r.iterations,
            r.elapsed_us,
            r.status,
        )?;
    }
    Ok(())
}

/// Reads back CSV produced by [`emit_csv`]; empty float fields decode as
/// `+inf`.
pub fn parse_csv<R: BufRead>(src: R) -> Result<Vec<BenchmarkRecord>, BenchmarkError> {
    let mut lines = src.lines().enumerate();
    match lines.next() {
        Some((_, Ok(first))) if first == HEADER => {}
        Some((_, Ok(first))) => {
            return Err(BenchmarkError::Parse {
                line: 1,
                message: format!("unexpected header '{first}'"),
            });
        }
        Some((_, Err(e))) => return Err(e.into()),
        None => {
            return Err(BenchmarkError::Parse {
                line: 1,
                message: "missing header".into(),
            });
        }
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(BenchmarkError::Parse {
                line: lineno,
                message: format!("expected 9 fields, got {}", fields.len()),
            });
        }
        let parse_int = |field: &str, name: &str| -> Result<u64, BenchmarkError> {
            field.parse().map_err(|_| BenchmarkError::Parse {
                line: lineno,
                message: format!("bad {name} value '{field}'"),
            })
        };
        records.push(BenchmarkRecord {
            algorithm: fields[0].parse().map_err(|_| BenchmarkError::Parse {
                line: lineno,
                message: format!("unknown algorithm '{}'", fields[0]),
            })?,
            m: parse_int(fields[1], "M")? as usize,
            trial: parse_int(fields[2], "trial")? as usize,
            mse: parse_float(fields[3], lineno, "mse")?,
            support_exact: match fields[4] {
                "0" => false,
                "1" => true,
                other => {
                    return Err(BenchmarkError::Parse {
                        line: lineno,
                        message: format!("bad support_exact value '{other}'"),
                    });
                }
            },
            residual_norm: parse_float(fields[5], lineno, "residual_norm")?,
            iterations: parse_int(fields[6], "iterations")? as usize,
            elapsed_us: parse_int(fields[7], "elapsed_us")?,
            status: fields[8].to_string(),
        });
    }
    Ok(records)
}

/// Median of a slice, failures included; `None` for an empty slice.
fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    })
}

/// Writes a self-contained gnuplot script plotting median reconstruction
/// error against the measurement count, one series per algorithm, log-scale
/// vertical axis. Failed runs count as infinite error, so a median only
/// appears once at least half the trials at that point succeed.
pub fn emit_plot_script<W: Write>(
    records: &[BenchmarkRecord],
    dest: &mut W,
) -> Result<(), BenchmarkError> {
    writeln!(dest, "# Median reconstruction error vs. available samples.")?;
    writeln!(dest, "set logscale y")?;
    writeln!(dest, "set xlabel 'available samples M'")?;
    writeln!(dest, "set ylabel 'median MSE'")?;
    writeln!(dest, "set grid")?;
    writeln!(dest, "set key top right")?;

    let mut plotted = Vec::new();
    for alg in AlgorithmId::ALL {
        let of_alg: Vec<&BenchmarkRecord> =
            records.iter().filter(|r| r.algorithm == alg).collect();
        if of_alg.is_empty() {
            continue;
        }
        let mut m_values: Vec<usize> = of_alg.iter().map(|r| r.m).collect();
        m_values.sort_unstable();
        m_values.dedup();
        let mut rows = Vec::new();
        for m in m_values {
            let mut errs: Vec<f64> = of_alg
                .iter()
                .filter(|r| r.m == m)
                .map(|r| r.mse)
                .collect();
            if let Some(med) = median(&mut errs) {
                if med.is_finite() {
                    rows.push((m, med));
                }
            }
        }
        writeln!(dest, "${} << EOD", alg.name())?;
        for (m, med) in &rows {
            writeln!(dest, "{m} {med:.11e}")?;
        }
        writeln!(dest, "EOD")?;
        if !rows.is_empty() {
            plotted.push(alg.name());
        }
    }

    if !plotted.is_empty() {
        let series: Vec<String> = plotted
            .iter()
            .map(|name| format!("${name} using 1:2 with linespoints title '{name}'"))
            .collect();
        writeln!(dest, "plot {}", series.join(", \\\n     "))?;
    }
    Ok(())
}
