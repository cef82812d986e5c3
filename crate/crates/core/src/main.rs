//! Batch front end for the attitude simulator.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::{Matrix3, Vector3};

use attsim::config::{parse_config, parse_config_list, ConfigError, ResolvedConfig};
use attsim::rigid_body::InertiaPair;
use attsim::run::{run_compare, run_simulate, run_solve, RunError, SimulateSummary};
use attsim::solver::{InitialGuess, SolverOptions};

#[derive(Parser)]
#[command(
    name = "attsim",
    version,
    about = "Structure-preserving rigid-body attitude simulator on SO(3)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate a trajectory and write it as CSV.
    Simulate {
        /// Path to the JSON configuration (an array of configs with --sweep).
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path (a directory with --sweep).
        #[arg(long)]
        out: PathBuf,
        /// Treat the config as a list and run each entry concurrently,
        /// writing run_<index>.csv files into the --out directory.
        #[arg(long)]
        sweep: bool,
    },
    /// Run the variational integrator and the RK4 baseline side by side.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Add a third series: RK4 with per-step polar reprojection.
        #[arg(long)]
        project: bool,
    },
    /// Solve a single implicit step equation.
    Solve {
        /// Inertia: three principal moments "a,b,c" or nine row-major
        /// entries of the full symmetric matrix.
        #[arg(long)]
        inertia: String,
        /// Step size in seconds.
        #[arg(long = "h")]
        h: f64,
        /// Body angular momentum "x,y,z".
        #[arg(long)]
        pi: String,
        /// Newton step scale in (0, 1].
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Absolute tolerance on the residual 2-norm.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 50)]
        max_iters: u32,
        /// Initial guess strategy.
        #[arg(long, value_enum, default_value_t = GuessArg::Momentum)]
        w0: GuessArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GuessArg {
    Zero,
    Momentum,
}

impl From<GuessArg> for InitialGuess {
    fn from(g: GuessArg) -> Self {
        match g {
            GuessArg::Zero => InitialGuess::Zero,
            GuessArg::Momentum => InitialGuess::MomentumGuess,
        }
    }
}

fn parse_csv_floats(name: &str, text: &str) -> Result<Vec<f64>, RunError> {
    text.split(',')
        .map(|cell| {
            cell.trim().parse::<f64>().map_err(|_| {
                RunError::Config(ConfigError::Invalid {
                    message: format!("{name}: {cell:?} is not a number"),
                })
            })
        })
        .collect()
}

fn parse_inertia_arg(text: &str) -> Result<InertiaPair, RunError> {
    let values = parse_csv_floats("inertia", text)?;
    let j = match values.len() {
        3 => Matrix3::from_diagonal(&Vector3::new(values[0], values[1], values[2])),
        9 => Matrix3::from_row_slice(&values),
        n => {
            return Err(RunError::Config(ConfigError::Invalid {
                message: format!("inertia: expected 3 or 9 comma-separated values, got {n}"),
            }))
        }
    };
    InertiaPair::from_inertia(&j).map_err(|e| {
        RunError::Config(ConfigError::Invalid {
            message: format!("inertia: {e}"),
        })
    })
}

fn parse_vec3_arg(name: &str, text: &str) -> Result<Vector3<f64>, RunError> {
    let values = parse_csv_floats(name, text)?;
    if values.len() != 3 {
        return Err(RunError::Config(ConfigError::Invalid {
            message: format!(
                "{name}: expected 3 comma-separated values, got {}",
                values.len()
            ),
        }));
    }
    Ok(Vector3::new(values[0], values[1], values[2]))
}

fn read_file(path: &Path) -> Result<String, RunError> {
    std::fs::read_to_string(path).map_err(RunError::Io)
}

fn print_summary<T: serde::Serialize>(summary: &T) {
    // One JSON object per line on stdout.
    println!(
        "{}",
        serde_json::to_string(summary).expect("summaries always serialize")
    );
}

/// Sweep entry outcome, kept in input order.
#[derive(serde::Serialize)]
struct SweepEntry {
    run: usize,
    csv: String,
    #[serde(flatten)]
    summary: SimulateSummary,
}

fn run_sweep(configs: &[ResolvedConfig], out_dir: &Path) -> Result<Vec<SweepEntry>, RunError> {
    std::fs::create_dir_all(out_dir)?;
    let next = AtomicUsize::new(0);
    let results: Vec<Mutex<Option<Result<SweepEntry, RunError>>>> =
        configs.iter().map(|_| Mutex::new(None)).collect();
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(configs.len().max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= configs.len() {
                    break;
                }
                let csv = out_dir.join(format!("run_{i:03}.csv"));
                let outcome = run_simulate(&configs[i], &csv).map(|summary| SweepEntry {
                    run: i,
                    csv: csv.display().to_string(),
                    summary,
                });
                *results[i].lock().unwrap() = Some(outcome);
            });
        }
    });

    results
        .into_iter()
        .map(|slot| slot.into_inner().unwrap().expect("every run was executed"))
        .collect()
}

fn execute(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Simulate { config, out, sweep } => {
            let text = read_file(&config)?;
            if sweep {
                let configs = parse_config_list(&text)?;
                if configs.is_empty() {
                    return Err(RunError::Config(ConfigError::Invalid {
                        message: "sweep config list is empty".to_string(),
                    }));
                }
                let entries = run_sweep(&configs, &out)?;
                print_summary(&entries);
            } else {
                let cfg = parse_config(&text)?;
                let summary = run_simulate(&cfg, &out)?;
                print_summary(&summary);
            }
            Ok(())
        }
        Command::Compare {
            config,
            out,
            project,
        } => {
            let text = read_file(&config)?;
            let cfg = parse_config(&text)?;
            let summary = run_compare(&cfg, &out, project)?;
            print_summary(&summary);
            Ok(())
        }
        Command::Solve {
            inertia,
            h,
            pi,
            alpha,
            tol,
            max_iters,
            w0,
        } => {
            let inertia = parse_inertia_arg(&inertia)?;
            let pi = parse_vec3_arg("pi", &pi)?;
            let opts = SolverOptions {
                alpha,
                tol,
                max_iters,
                w0_strategy: w0.into(),
            };
            let summary = run_solve(&inertia, h, pi, &opts)?;
            print_summary(&summary);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}: {}", err.category(), strip_category(&err));
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

/// The Display impl already leads with the category; avoid printing it
/// twice.
fn strip_category(err: &RunError) -> String {
    let text = err.to_string();
    match text.split_once(": ") {
        Some((_, rest)) => rest.to_string(),
        None => text,
    }
}
