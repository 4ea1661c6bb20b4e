//! Command-line driver: parses arguments and the run configuration, calls into
//! `threshold_core`, and writes JSON (single results) or CSV (sweeps).
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use threshold_core::error::Error as CoreError;
use threshold_core::oracle::fd_lowest_eigenvalue_auto;
use threshold_core::potentials::make_potential;
use threshold_core::randomwalk::{growth_fit, occupation_time};
use threshold_core::solver::{solve_lambda, SolverConfig};
use threshold_core::sweep::{
    critical_lambda_3d, invert_epsilon, linear_spaced, log_spaced, sweep_lambda, threshold_lambda_1d,
    threshold_lambda_2d, Convention,
};
use threshold_core::Dimension;

use config::{ConfigError, OutputFormat, RunConfig, Spacing};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

const DEFAULT_SWEEP_POINTS: usize = 9;

#[derive(Debug, Parser)]
#[command(name = "threshold", version, about = "Threshold bound states of -Δ - λV via Green's-function iteration")]
#[command(after_help = config::keys_help())]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coupling λ at one binding energy; prints {epsilon, lambda, iterations, residual, converged}
    #[command(after_help = config::keys_help())]
    Solve {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, allow_negative_numbers = true)]
        epsilon: f64,
    },
    /// λ(ε) over a range of ε; writes CSV (epsilon,lambda,iterations,residual,converged) or JSON
    #[command(after_help = config::keys_help())]
    Sweep {
        #[command(flatten)]
        config: ConfigArg,
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long)]
        points: Option<usize>,
        /// log or linear
        #[arg(long)]
        spacing: Option<String>,
        /// Output file (overrides output.path); standard output if neither is set
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Binding energy ε at coupling λ; prints {lambda, epsilon}
    #[command(after_help = config::keys_help())]
    Invert {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[command(flatten)]
        range: RangeArgs,
    },
    /// Analytic weak-coupling law (n = 1 or 2); prints {lambda}
    #[command(after_help = config::keys_help())]
    Threshold {
        #[arg(long)]
        dim: u32,
        #[arg(long, allow_negative_numbers = true)]
        epsilon: f64,
        #[arg(long, allow_negative_numbers = true)]
        moment: f64,
        /// n = 2 constant: paper (2π) or consistent (4π, default)
        #[arg(long)]
        convention: Option<String>,
        /// n = 1: use ε = ½ λ² (∫V)² instead of ε = λ² (∫V)² / 4
        #[arg(long)]
        half_factor: bool,
    },
    /// Critical coupling of a 3D potential from λ = λ_c + a√ε; prints {lambda_c, slope, fit_residual}
    #[command(after_help = config::keys_help())]
    Critical {
        #[command(flatten)]
        config: ConfigArg,
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Finite-difference ground state at coupling λ; prints {epsilon} (null if unbound)
    #[command(after_help = config::keys_help())]
    Oracle {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        /// Finite-difference mesh points
        #[arg(long, default_value_t = 4000)]
        mesh_points: usize,
    },
    /// Origin visits of lattice random walks; prints a WalkResult, or a growth fit with --ladder
    #[command(after_help = config::keys_help())]
    Walk {
        #[arg(long)]
        dim: u32,
        /// Walk length (required unless --ladder is given)
        #[arg(long, value_parser = parse_count)]
        steps: Option<u64>,
        #[arg(long, value_parser = parse_count)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        /// Comma-separated increasing step counts; fits sqrt / log / saturating growth
        #[arg(long, value_delimiter = ',', value_parser = parse_count)]
        ladder: Option<Vec<u64>>,
    },
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// Run configuration file
    #[arg(long)]
    config: PathBuf,
}

#[derive(Debug, Args)]
struct RangeArgs {
    /// Smallest ε (overrides sweep.eps_min)
    #[arg(long, allow_negative_numbers = true)]
    eps_min: Option<f64>,
    /// Largest ε (overrides sweep.eps_max)
    #[arg(long, allow_negative_numbers = true)]
    eps_max: Option<f64>,
}

/// Accepts plain integers and exact integer values written like `1e5`.
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    match s.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 => Ok(x as u64),
        _ => Err(format!("expected a nonnegative integer, got '{s}'")),
    }
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(format!("i/o error: {e}"))
    }
}

/// Runs the command line `argv` (including the program name) and returns the exit code.
pub fn run<S: AsRef<str>>(argv: &[S], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv.iter().map(|s| s.as_ref())) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Numerical(m)) => {
            let _ = writeln!(stderr, "numerical failure: {m}");
            EXIT_NUMERICAL
        }
    }
}

fn load(config: &ConfigArg) -> Result<(RunConfig, SolverConfig), Failure> {
    let run = RunConfig::from_file(&config.config)?;
    let potential = make_potential(run.potential.clone())?;
    let solver = SolverConfig::with_options(potential, &run.solver)?;
    Ok((run, solver))
}

fn require_positive(name: &str, value: f64) -> Result<(), Failure> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Failure::Usage(format!("invalid {name}: must be a positive finite number, got {value}")))
    }
}

fn range(run: &RunConfig, args: &RangeArgs) -> Result<(f64, f64), Failure> {
    let lo = args
        .eps_min
        .or(run.sweep.eps_min)
        .ok_or_else(|| Failure::Usage("eps_min: pass --eps-min or set sweep.eps_min".into()))?;
    let hi = args
        .eps_max
        .or(run.sweep.eps_max)
        .ok_or_else(|| Failure::Usage("eps_max: pass --eps-max or set sweep.eps_max".into()))?;
    require_positive("eps_min", lo)?;
    require_positive("eps_max", hi)?;
    if !(hi > lo) {
        return Err(Failure::Usage(format!("invalid eps_max: must exceed eps_min ({lo}), got {hi}")));
    }
    Ok((lo, hi))
}

fn print_json(stdout: &mut dyn Write, value: &impl serde::Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string(value).map_err(|e| Failure::Usage(format!("json: {e}")))?;
    writeln!(stdout, "{text}")?;
    Ok(())
}

fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Solve { config, epsilon } => {
            require_positive("epsilon", epsilon)?;
            let (_, cfg) = load(&config)?;
            let r = solve_lambda(&cfg, epsilon)?;
            print_json(
                stdout,
                &json!({
                    "epsilon": r.epsilon,
                    "lambda": r.lambda,
                    "iterations": r.iterations,
                    "residual": r.residual,
                    "converged": r.converged,
                }),
            )?;
            if r.converged {
                Ok(())
            } else {
                Err(Failure::Numerical(format!(
                    "not converged after {} iterations (residual {:e})",
                    r.iterations, r.residual
                )))
            }
        }
        Command::Sweep { config, range: range_args, points, spacing, out } => {
            let (run, cfg) = load(&config)?;
            let (lo, hi) = range(&run, &range_args)?;
            let n = points.or(run.sweep.points).unwrap_or(DEFAULT_SWEEP_POINTS);
            let spacing = match spacing.as_deref() {
                None => run.sweep.spacing,
                Some("log") => Spacing::Log,
                Some("linear") => Spacing::Linear,
                Some(s) => return Err(Failure::Usage(format!("invalid spacing: expected log or linear, got '{s}'"))),
            };
            let eps = match spacing {
                Spacing::Log => log_spaced(lo, hi, n)?,
                Spacing::Linear => linear_spaced(lo, hi, n)?,
            };
            let result = sweep_lambda(&cfg, &eps)?;
            for a in &result.anomalies {
                writeln!(stderr, "warning: {a}")?;
            }
            let body = match run.output_format {
                OutputFormat::Csv => result.to_csv(),
                OutputFormat::Json => {
                    serde_json::to_string_pretty(&result).map_err(|e| Failure::Usage(format!("json: {e}")))? + "\n"
                }
            };
            match out.or(run.output_path) {
                Some(path) => {
                    let mut file = BufWriter::new(File::create(&path).map_err(|e| {
                        Failure::Usage(format!("cannot create {}: {e}", path.display()))
                    })?);
                    file.write_all(body.as_bytes())?;
                    file.flush()?;
                }
                None => stdout.write_all(body.as_bytes())?,
            }
            Ok(())
        }
        Command::Invert { config, lambda, range: range_args } => {
            require_positive("lambda", lambda)?;
            let (run, cfg) = load(&config)?;
            let bracket = range(&run, &range_args)?;
            let epsilon = invert_epsilon(&cfg, lambda, bracket)?;
            print_json(stdout, &json!({ "lambda": lambda, "epsilon": epsilon }))
        }
        Command::Threshold { dim, epsilon, moment, convention, half_factor } => {
            require_positive("epsilon", epsilon)?;
            require_positive("moment", moment)?;
            let dimension = Dimension::new(dim)?;
            let lambda = match dimension {
                Dimension::One => {
                    if convention.is_some() {
                        return Err(Failure::Usage("--convention applies to --dim 2 only".into()));
                    }
                    if half_factor {
                        // ε = ½ λ² m²
                        (2.0 * epsilon).sqrt() / moment
                    } else {
                        threshold_lambda_1d(epsilon, moment)?
                    }
                }
                Dimension::Two => {
                    if half_factor {
                        return Err(Failure::Usage("--half-factor applies to --dim 1 only".into()));
                    }
                    let c = match convention.as_deref() {
                        None => Convention::default(),
                        Some(s) => s.parse::<Convention>()?,
                    };
                    threshold_lambda_2d(epsilon, moment, c)?
                }
                Dimension::Three => {
                    return Err(Failure::Usage(
                        "there is no weak-coupling law in 3 dimensions; use the critical subcommand".into(),
                    ))
                }
            };
            print_json(stdout, &json!({ "lambda": lambda }))
        }
        Command::Critical { config, range: range_args, points } => {
            let (run, cfg) = load(&config)?;
            let (lo, hi) = range(&run, &range_args)?;
            let n = points.or(run.sweep.points).unwrap_or(DEFAULT_SWEEP_POINTS);
            let fit = critical_lambda_3d(&cfg, &log_spaced(lo, hi, n)?)?;
            if fit.flagged {
                writeln!(stderr, "warning: max relative fit residual {:e} exceeds 1e-2", fit.fit_residual)?;
            }
            print_json(
                stdout,
                &json!({ "lambda_c": fit.lambda_c, "slope": fit.slope, "fit_residual": fit.fit_residual }),
            )
        }
        Command::Oracle { config, lambda, mesh_points } => {
            require_positive("lambda", lambda)?;
            let run = RunConfig::from_file(&config.config)?;
            let potential = make_potential(run.potential)?;
            let fd = fd_lowest_eigenvalue_auto(&potential, lambda, mesh_points)?;
            if fd.flagged {
                writeln!(
                    stderr,
                    "warning: estimated discretization error {:e} exceeds the requested accuracy; increase --mesh-points",
                    fd.error_estimate.unwrap_or(f64::NAN)
                )?;
            }
            print_json(stdout, &json!({ "epsilon": fd.epsilon }))
        }
        Command::Walk { dim, steps, trials, seed, ladder } => {
            let dimension = Dimension::new(dim)?;
            match (ladder, steps) {
                (Some(ladder), _) => print_json(stdout, &growth_fit(dimension, &ladder, trials, seed)?),
                (None, Some(steps)) => print_json(stdout, &occupation_time(dimension, steps, trials, seed)?),
                (None, None) => Err(Failure::Usage("walk needs --steps or --ladder".into())),
            }
        }
    }
}
