use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use moqd_core::metrics::{self, compute_bounds, NormalizationBounds};
use moqd_core::runner::{run_with, RunConfig};
use moqd_core::{snapshot, MoArchive};

#[derive(Parser)]
#[command(name = "moqd", version, about = "Multi-objective quality-diversity runs and archive tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a run described by a TOML config file.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the archive metrics of a snapshot.
    Metrics {
        snapshot: PathBuf,
        /// Hypervolume reference point, comma separated.
        #[arg(long = "ref", value_delimiter = ',', allow_hyphen_values = true, required = true)]
        reference: Vec<f64>,
    },
    /// Normalize sparsity metrics across snapshots with shared fitness bounds.
    Normalize {
        #[arg(required = true)]
        snapshots: Vec<PathBuf>,
    },
    /// Print the Pareto front stored in one cell.
    Inspect {
        snapshot: PathBuf,
        #[arg(long)]
        cell: usize,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<moqd_core::Error> for Failure {
    fn from(e: moqd_core::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            eprintln!("moqd: {}", msg.lines().next().unwrap_or("invalid arguments"));
            return ExitCode::from(1);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("moqd: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("moqd: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &PathBuf) -> Result<MoArchive, Failure> {
    snapshot::load(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run {
            config,
            seed,
            iterations,
            out,
        } => {
            let mut cfg = RunConfig::from_file(&config).map_err(|e| Failure::Usage(e.to_string()))?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(n) = iterations {
                cfg.iterations = n;
            }
            if let Some(dir) = out {
                cfg.output_dir = dir;
            }
            cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let every = cfg.snapshot_every;
            let artifacts = run_with(&cfg, |row| {
                if row.iteration % every == 0 {
                    eprintln!(
                        "iter {:>6}  moqd_score {:.4e}  coverage {:.3}",
                        row.iteration, row.moqd_score, row.coverage
                    );
                }
            })?;
            println!("{}", artifacts.output_dir.display());
            Ok(())
        }
        Command::Metrics { snapshot, reference } => {
            let archive = load(&snapshot)?;
            let m = archive.num_objectives().unwrap_or(reference.len());
            if reference.len() != m {
                return Err(Failure::Usage(format!("--ref needs {m} values, got {}", reference.len())));
            }
            let bounds = compute_bounds([&archive])
                .or_else(|_| NormalizationBounds::new(vec![0.0; m], vec![1.0; m]))?;
            println!("moqd_score,moqd_sparsity,global_hypervolume,global_sparsity,max_sum_scores,coverage");
            println!(
                "{},{},{},{},{},{}",
                metrics::moqd_score(&archive, &reference)?,
                metrics::moqd_sparsity(&archive, &bounds),
                metrics::global_hypervolume(&archive, &reference)?,
                metrics::global_sparsity(&archive, &bounds),
                metrics::max_sum_scores(&archive).map(|v| v.to_string()).unwrap_or_default(),
                metrics::coverage(&archive)
            );
            Ok(())
        }
        Command::Normalize { snapshots } => {
            let archives = snapshots.iter().map(load).collect::<Result<Vec<_>, _>>()?;
            let bounds = compute_bounds(&archives)?;
            println!("min,{}", join(bounds.min()));
            println!("max,{}", join(bounds.max()));
            println!("snapshot,moqd_sparsity,global_sparsity");
            for (path, archive) in snapshots.iter().zip(&archives) {
                println!(
                    "{},{},{}",
                    path.display(),
                    metrics::moqd_sparsity(archive, &bounds),
                    metrics::global_sparsity(archive, &bounds)
                );
            }
            Ok(())
        }
        Command::Inspect { snapshot, cell } => {
            let archive = load(&snapshot)?;
            let front = archive.front(cell).ok_or_else(|| {
                Failure::Usage(format!("cell {cell} out of range (archive has {} cells)", archive.num_cells()))
            })?;
            println!("cell {cell} centroid {}", join(&archive.tessellation().centroids()[cell]));
            println!("fitness\tfeature\torigin\tpref");
            for s in front.members() {
                let pref = s.pref.as_ref().map_or_else(|| "-".to_string(), |p| join(p));
                println!("{}\t{}\t{}\t{pref}", join(&s.fitness), join(&s.feature), s.origin);
            }
            Ok(())
        }
    }
}
