//! Command-line driver: generate test signals, run single recoveries, run
//! full benchmark sweeps, and inspect sensing-matrix coherence.
//!
//! Exit codes: `0` on success, `1` for usage errors (bad flags, missing or
//! contradictory arguments), `2` for runtime failures (file I/O, malformed
//! config or signal files, solver failures).

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use sigrec::benchmark::{
    emit_csv, emit_plot_script, mse, run_sweep, AlgorithmId, ExperimentConfig, GreedyConfig,
    IhtConfig,
};
use sigrec::convex::lp::LpSolverParams;
use sigrec::convex::{adaptive_gradient_traced, GradientParams};
use sigrec::linalg::{norm_l2, ComplexVector};
use sigrec::pursuit::{gradient_pursuit, omp, ols, RecoveryResult, StoppingRule};
use sigrec::rng::SplitMix64;
use sigrec::sensing::{build_dictionary, draw_mask, mutual_coherence, sample, Dictionary, Measurements};
use sigrec::signal::{
    dft, generate_multitone, read_signal_csv, support_of_coeffs, write_signal_csv, MultitoneSpec,
    Tone,
};
use sigrec::threshold::{iht, IhtParams, IhtVariant};

/// TOML source of the experiment selected by `--config paper_experiment`.
const BUNDLED_EXPERIMENT: &str = include_str!("../../../configs/paper_experiment.toml");

#[derive(Parser)]
#[command(
    name = "sigrec",
    version,
    about = "Sparse signal recovery from partial frequency-domain measurements",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a sparse multitone signal and write it as CSV.
    Generate {
        /// Tone layout: 'paper' for the bundled five-tone reference signal,
        /// or a TOML file path.
        #[arg(long)]
        spec: Option<String>,
        /// Signal length for a randomly drawn layout.
        #[arg(long)]
        n: Option<usize>,
        /// Number of random tones (distinct bins, amplitudes uniform in [1, 5)).
        #[arg(long)]
        k: Option<usize>,
        /// Seed for the random layout.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Destination CSV file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample a signal at random time points and reconstruct it.
    Recover {
        /// Full time-domain signal CSV to sample (alternative to --spec).
        signal_csv: Option<PathBuf>,
        /// Ground truth: 'paper' for the bundled five-tone reference signal,
        /// or a TOML file path. Enables the MSE report line.
        #[arg(long)]
        spec: Option<String>,
        /// Recovery algorithm.
        #[arg(long, value_parser = parse_algorithm)]
        algorithm: AlgorithmId,
        /// Expected signal length (checked against the spec or CSV).
        #[arg(long)]
        n: Option<usize>,
        /// Number of random measurements to keep.
        #[arg(long)]
        m: usize,
        /// Sparsity budget for greedy and top-K methods; defaults to the
        /// spec's tone count.
        #[arg(long)]
        k: Option<usize>,
        /// Seed for the measurement mask.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the full benchmark grid from a config file; write records CSV and
    /// a gnuplot script.
    Sweep {
        /// Experiment file: 'paper_experiment' for the bundled sweep, or a
        /// TOML file path.
        #[arg(long)]
        config: String,
        /// Output directory for records.csv and plot.gp.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Worker threads for the sweep (default: one per CPU).
        #[arg(long)]
        jobs: Option<usize>,
        /// Override the config's base_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Restrict the sweep to a single measurement count.
        #[arg(long)]
        m: Option<usize>,
        /// Restrict the sweep to a single algorithm.
        #[arg(long, value_parser = parse_algorithm)]
        algorithm: Option<AlgorithmId>,
    },
    /// Report the mutual coherence of a random partial-frequency dictionary.
    Coherence {
        /// Signal length.
        #[arg(long)]
        n: usize,
        /// Number of measurements.
        #[arg(long)]
        m: usize,
        /// Seed for the measurement mask.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_algorithm(s: &str) -> Result<AlgorithmId, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = AlgorithmId::ALL.iter().map(|a| a.name()).collect();
        format!("unknown algorithm '{s}' (expected one of: {})", names.join(", "))
    })
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn runtime(e: impl ToString) -> CliError {
    CliError::Runtime(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate {
            spec,
            n,
            k,
            seed,
            out,
        } => cmd_generate(spec.as_deref(), n, k, seed, &out),
        Command::Recover {
            signal_csv,
            spec,
            algorithm,
            n,
            m,
            k,
            seed,
        } => cmd_recover(signal_csv.as_deref(), spec.as_deref(), algorithm, n, m, k, seed),
        Command::Sweep {
            config,
            out,
            jobs,
            seed,
            m,
            algorithm,
        } => cmd_sweep(&config, &out, jobs, seed, m, algorithm),
        Command::Coherence { n, m, seed } => cmd_coherence(n, m, seed),
    }
}

/// The five-tone reference signal selected by `--spec paper`.
fn builtin_signal() -> MultitoneSpec {
    let tones = [(28, 3.5), (26, 1.5), (6, 4.4), (42, 1.8), (90, 3.0)]
        .into_iter()
        .map(|(bin, amplitude)| Tone { bin, amplitude })
        .collect();
    MultitoneSpec::new(512, tones).expect("builtin layout is valid")
}

fn resolve_spec(arg: &str) -> Result<MultitoneSpec, CliError> {
    if arg == "paper" {
        return Ok(builtin_signal());
    }
    let text = fs::read_to_string(arg)
        .map_err(|e| runtime(format!("cannot read signal spec '{arg}': {e}")))?;
    let spec: MultitoneSpec = toml::from_str(&text)
        .map_err(|e| runtime(format!("malformed signal spec '{arg}': {e}")))?;
    spec.validate()
        .map_err(|e| runtime(format!("invalid signal spec '{arg}': {e}")))?;
    Ok(spec)
}

fn cmd_generate(
    spec: Option<&str>,
    n: Option<usize>,
    k: Option<usize>,
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    let spec = match spec {
        Some(arg) => {
            let spec = resolve_spec(arg)?;
            if let Some(n) = n {
                if n != spec.n {
                    return Err(usage(format!(
                        "--n {n} contradicts the spec's length {}",
                        spec.n
                    )));
                }
            }
            if let Some(k) = k {
                if k != spec.components.len() {
                    return Err(usage(format!(
                        "--k {k} contradicts the spec's {} tones",
                        spec.components.len()
                    )));
                }
            }
            spec
        }
        None => {
            let n = n.ok_or_else(|| usage("--n is required without --spec"))?;
            let k = k.ok_or_else(|| usage("--k is required without --spec"))?;
            random_layout(n, k, seed)?
        }
    };
    let signal = generate_multitone(&spec).map_err(runtime)?;
    let mut file = fs::File::create(out)
        .map_err(|e| runtime(format!("cannot create '{}': {e}", out.display())))?;
    write_signal_csv(&signal, &mut file).map_err(runtime)?;
    let bins: Vec<String> = spec
        .components
        .iter()
        .map(|t| format!("{} (amplitude {:.4})", t.bin, t.amplitude))
        .collect();
    println!(
        "wrote {}-sample signal with {} tones to {}",
        spec.n,
        spec.components.len(),
        out.display()
    );
    println!("tones: {}", bins.join(", "));
    Ok(())
}

/// Draws `k` distinct bins uniformly and amplitudes uniform in `[1, 5)`.
fn random_layout(n: usize, k: usize, seed: u64) -> Result<MultitoneSpec, CliError> {
    if k == 0 || k > n {
        return Err(usage(format!("--k must be in 1..={n}, got {k}")));
    }
    let mut rng = SplitMix64::new(seed);
    let mut bins = BTreeSet::new();
    while bins.len() < k {
        bins.insert(rng.next_below(n as u64) as usize);
    }
    let components = bins
        .into_iter()
        .map(|bin| Tone {
            bin,
            amplitude: 1.0 + 4.0 * rng.next_f64(),
        })
        .collect();
    MultitoneSpec::new(n, components).map_err(runtime)
}

fn cmd_recover(
    signal_csv: Option<&Path>,
    spec: Option<&str>,
    algorithm: AlgorithmId,
    n_flag: Option<usize>,
    m: usize,
    k_flag: Option<usize>,
    seed: u64,
) -> Result<(), CliError> {
    let (truth, spec) = match (signal_csv, spec) {
        (Some(_), Some(_)) => {
            return Err(usage(
                "pass either a signal CSV or --spec, not both",
            ));
        }
        (None, None) => {
            return Err(usage(
                "a signal source is required: a signal CSV path or --spec",
            ));
        }
        (Some(path), None) => {
            let file = fs::File::open(path)
                .map_err(|e| runtime(format!("cannot read '{}': {e}", path.display())))?;
            let signal = read_signal_csv(BufReader::new(file))
                .map_err(|e| runtime(format!("malformed signal CSV '{}': {e}", path.display())))?;
            (signal, None)
        }
        (None, Some(arg)) => {
            let spec = resolve_spec(arg)?;
            let signal = generate_multitone(&spec).map_err(runtime)?;
            (signal, Some(spec))
        }
    };
    let n = truth.n();
    if let Some(n_flag) = n_flag {
        if n_flag != n {
            return Err(usage(format!(
                "--n {n_flag} contradicts the signal's length {n}"
            )));
        }
    }
    let k = k_flag.or_else(|| spec.as_ref().map(|s| s.components.len()));

    let mask = draw_mask(n, m, seed).map_err(runtime)?;
    let y = sample(&truth, &mask).map_err(runtime)?;
    let d = build_dictionary(n, &mask, true).map_err(runtime)?;
    let result = run_recovery(algorithm, &d, &y, k, spec.as_ref())?;

    let mut support = result.support.clone();
    support.sort_unstable();
    let support_text: Vec<String> = support.iter().map(usize::to_string).collect();
    println!("algorithm: {algorithm}");
    println!("measurements: {m} of {n}");
    println!("support: {{{}}}", support_text.join(", "));
    if support.is_empty() {
        println!("coefficients: (none above threshold)");
    } else {
        println!("coefficients (bin: value, implied tone amplitude):");
        let scale = (n as f64).sqrt();
        for &bin in &support {
            let c = result.coeffs.entries()[bin];
            println!(
                "  {bin}: {:+.6e} {:+.6e}j  |c|/sqrt(N) = {:.4}",
                c.re,
                c.im,
                c.norm() / scale
            );
        }
    }
    println!("residual norm: {:.6e}", result.residual_norm);
    println!("iterations: {}", result.iterations);
    if spec.is_some() {
        let error = mse(&truth, &result.reconstruct()).map_err(runtime)?;
        println!("mse vs ground truth: {:.6e}", error);
    }
    println!("elapsed: {:.3} ms", result.elapsed.as_secs_f64() * 1e3);
    Ok(())
}

fn run_recovery(
    algorithm: AlgorithmId,
    d: &Dictionary,
    y: &Measurements,
    k: Option<usize>,
    spec: Option<&MultitoneSpec>,
) -> Result<RecoveryResult, CliError> {
    let greedy = GreedyConfig::default();
    let iht_defaults = IhtConfig::default();
    let need_k = || {
        k.ok_or_else(|| usage("--k is required for this algorithm when no spec is given"))
    };
    match algorithm {
        AlgorithmId::Omp | AlgorithmId::Ols | AlgorithmId::Gp => {
            let stop = StoppingRule::new(Some(need_k()?), None, greedy.max_iterations)
                .map_err(runtime)?;
            let run = match algorithm {
                AlgorithmId::Omp => omp,
                AlgorithmId::Ols => ols,
                _ => gradient_pursuit,
            };
            run(d, y, &stop).map_err(runtime)
        }
        AlgorithmId::IhtTopk => {
            let params = IhtParams::new(
                IhtVariant::TopK(need_k()?),
                iht_defaults.step,
                iht_defaults.max_iterations,
                iht_defaults.convergence_tol,
            )
            .map_err(runtime)?;
            iht(d, y, &params).map_err(runtime)
        }
        AlgorithmId::IhtLambda => {
            let spec = spec.ok_or_else(|| {
                usage("iht_lambda needs --spec to derive its threshold; use iht_topk for raw CSV input")
            })?;
            let max_amp = spec
                .components
                .iter()
                .map(|t| t.amplitude)
                .fold(0.0f64, f64::max);
            let lambda = (0.1 * max_amp * (spec.n as f64).sqrt()).powi(2);
            let params = IhtParams::new(
                IhtVariant::LambdaThreshold(lambda),
                iht_defaults.step,
                iht_defaults.max_iterations,
                iht_defaults.convergence_tol,
            )
            .map_err(runtime)?;
            iht(d, y, &params).map_err(runtime)
        }
        AlgorithmId::L1eq => {
            sigrec::convex::bp::basis_pursuit_eq(d, y, &LpSolverParams::default()).map_err(runtime)
        }
        AlgorithmId::AdaptiveGradient => {
            let started = Instant::now();
            let (signal, trace) =
                adaptive_gradient_traced(y, d.cols(), &GradientParams::default())
                    .map_err(runtime)?;
            let elapsed = started.elapsed();
            let spectrum = dft(&signal);
            let threshold = match spec {
                Some(s) => {
                    let min_amp = s
                        .components
                        .iter()
                        .map(|t| t.amplitude)
                        .fold(f64::INFINITY, f64::min);
                    0.5 * min_amp * (s.n as f64).sqrt()
                }
                None => {
                    1e-3 * spectrum
                        .coeffs()
                        .iter()
                        .map(|c| c.norm())
                        .fold(0.0f64, f64::max)
                }
            };
            let support = support_of_coeffs(spectrum.coeffs(), threshold);
            let resampled = sample(&signal, d.mask()).map_err(runtime)?;
            let residual: Vec<_> = y
                .values
                .entries()
                .iter()
                .zip(resampled.values.entries())
                .map(|(a, b)| a - b)
                .collect();
            Ok(RecoveryResult {
                coeffs: ComplexVector::new(spectrum.coeffs().to_vec()).map_err(runtime)?,
                support,
                residual_norm: norm_l2(&residual),
                iterations: trace.total_sweeps,
                elapsed,
            })
        }
    }
}

fn cmd_sweep(
    config: &str,
    out: &Path,
    jobs: Option<usize>,
    seed: Option<u64>,
    m: Option<usize>,
    algorithm: Option<AlgorithmId>,
) -> Result<(), CliError> {
    let text = if config == "paper_experiment" {
        BUNDLED_EXPERIMENT.to_string()
    } else {
        fs::read_to_string(config)
            .map_err(|e| runtime(format!("cannot read config '{config}': {e}")))?
    };
    let mut cfg: ExperimentConfig = toml::from_str(&text)
        .map_err(|e| runtime(format!("malformed config '{config}': {e}")))?;
    if let Some(seed) = seed {
        cfg.base_seed = seed;
    }
    if let Some(m) = m {
        cfg.m_values = vec![m];
    }
    if let Some(algorithm) = algorithm {
        cfg.algorithms = vec![algorithm];
    }

    let records = match jobs {
        Some(jobs) if jobs >= 1 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(runtime)?;
            pool.install(|| run_sweep(&cfg)).map_err(runtime)?
        }
        Some(_) => return Err(usage("--jobs must be at least 1")),
        None => run_sweep(&cfg).map_err(runtime)?,
    };

    fs::create_dir_all(out)
        .map_err(|e| runtime(format!("cannot create '{}': {e}", out.display())))?;
    let csv_path = out.join("records.csv");
    let mut csv = fs::File::create(&csv_path)
        .map_err(|e| runtime(format!("cannot create '{}': {e}", csv_path.display())))?;
    emit_csv(&records, &mut csv).map_err(runtime)?;
    csv.flush().map_err(runtime)?;
    let plot_path = out.join("plot.gp");
    let mut plot = fs::File::create(&plot_path)
        .map_err(|e| runtime(format!("cannot create '{}': {e}", plot_path.display())))?;
    emit_plot_script(&records, &mut plot).map_err(runtime)?;
    plot.flush().map_err(runtime)?;

    println!(
        "wrote {} records to {} and a plot script to {}",
        records.len(),
        csv_path.display(),
        plot_path.display()
    );
    Ok(())
}

fn cmd_coherence(n: usize, m: usize, seed: u64) -> Result<(), CliError> {
    if m == 0 || m > n {
        return Err(usage(format!("--m must be in 1..={n}, got {m}")));
    }
    let mask = draw_mask(n, m, seed).map_err(runtime)?;
    let d = build_dictionary(n, &mask, true).map_err(runtime)?;
    println!(
        "mutual coherence of a {m}x{n} dictionary (seed {seed}): {:.6}",
        mutual_coherence(&d)
    );
    Ok(())
}
