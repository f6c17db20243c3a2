use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use alig::harness::{
    compare_rules, parse_grid, parse_problem_arg, parse_rules, run, sweep, CellOutcome,
    RawConfig, SortMetric,
};
use alig::problems::check_gradients;

#[derive(Parser)]
#[command(name = "alig", version, about = "Adaptive Polyak step-size optimization harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a single experiment config.
    Run {
        /// Path to a key-value config file.
        #[arg(long)]
        config: PathBuf,
        /// Override the config's out_dir.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config's run seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the Cartesian product of a value grid over a base config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Grid file: `key = v1, v2, ...` per line.
        #[arg(long)]
        grid: PathBuf,
        /// Max cells running concurrently.
        #[arg(long, default_value_t = 1)]
        parallelism: usize,
        /// Override the config's out_dir (cells get subdirectories).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Metric ordering the results table.
        #[arg(long, value_enum, default_value_t = SortArg::FinalFullLoss)]
        sort_by: SortArg,
    },
    /// Run several step rules against the identical sample sequence.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Rules file: one rule per blank-line-separated block.
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify analytic gradients against central finite differences.
    Gradcheck {
        /// Inline problem spec, e.g. `two_moons_mlp,n=200,width=32,noise=0.1,seed=0`.
        #[arg(long)]
        problem: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Finite-difference half-step.
        #[arg(long, default_value_t = 1e-6)]
        h: f64,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the version.
    Version,
}

#[derive(Clone, Copy, ValueEnum)]
enum SortArg {
    FinalFullLoss,
    BestFullLoss,
    FinalAccuracy,
}

impl From<SortArg> for SortMetric {
    fn from(arg: SortArg) -> Self {
        match arg {
            SortArg::FinalFullLoss => SortMetric::FinalFullLoss,
            SortArg::BestFullLoss => SortMetric::BestFullLoss,
            SortArg::FinalAccuracy => SortMetric::FinalAccuracy,
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn load_raw(
    path: &PathBuf,
    out: Option<PathBuf>,
    seed: Option<u64>,
) -> alig::Result<RawConfig> {
    let text = fs::read_to_string(path)?;
    let mut overrides: Vec<(String, String)> = Vec::new();
    if let Some(out) = out {
        overrides.push(("out_dir".into(), out.display().to_string()));
    }
    if let Some(seed) = seed {
        overrides.push(("seed".into(), seed.to_string()));
    }
    RawConfig::parse(&text)?.with_overrides(&overrides)
}

fn execute(cli: Cli) -> alig::Result<()> {
    match cli.command {
        Command::Run { config, out, seed } => {
            let config = load_raw(&config, out, seed)?.build()?;
            let summary = run(&config)?;
            println!("run complete: {}", config.out_dir.display());
            println!("  steps_taken          = {}", summary.steps_taken);
            println!("  final_full_loss      = {}", summary.final_full_loss);
            println!("  best_full_loss       = {}", summary.best_full_loss);
            if let Some(acc) = summary.final_accuracy {
                println!("  final_accuracy       = {acc}");
            }
            println!(
                "  interpolation_resid  = {}",
                summary.interpolation_residual_final
            );
            Ok(())
        }
        Command::Sweep {
            config,
            grid,
            parallelism,
            out,
            sort_by,
        } => {
            let raw = load_raw(&config, out, None)?;
            let out_root = raw.build()?.out_dir;
            let grid = parse_grid(&fs::read_to_string(grid)?)?;
            let table = sweep(&raw, &grid, parallelism, &out_root, sort_by.into())?;
            let failed = table
                .cells
                .iter()
                .filter(|c| matches!(c.outcome, CellOutcome::Failed(_)))
                .count();
            println!(
                "sweep complete: {} cells ({} failed), table at {}",
                table.cells.len(),
                failed,
                out_root.join("table.txt").display()
            );
            if let Ok(rendered) = fs::read_to_string(out_root.join("table.txt")) {
                print!("{rendered}");
            }
            Ok(())
        }
        Command::Compare { config, rules, out } => {
            let config = load_raw(&config, out, None)?.build()?;
            let rules = parse_rules(&fs::read_to_string(rules)?)?;
            let table = compare_rules(&config, &rules)?;
            println!("compare complete: {}", config.out_dir.display());
            for entry in &table.entries {
                match &entry.outcome {
                    Ok(s) => println!(
                        "  {:<18} final_full_loss = {}",
                        entry.label, s.final_full_loss
                    ),
                    Err(e) => println!("  {:<18} failed: {e}", entry.label),
                }
            }
            Ok(())
        }
        Command::Gradcheck {
            problem,
            trials,
            h,
            tol,
            seed,
        } => {
            let spec = parse_problem_arg(&problem)?;
            let objective = spec.build()?;
            let report = check_gradients(objective.as_ref(), trials, h, tol, seed)?;
            println!(
                "gradcheck {}: {} trials, max relative error {:e} (tol {:e})",
                spec.kind_name(),
                report.trials,
                report.max_rel_error,
                report.tol
            );
            if report.passed() {
                println!("PASS");
                Ok(())
            } else {
                for failure in report.failures.iter().take(5) {
                    eprintln!(
                        "  coordinate {} (sample {}): analytic {:e}, numeric {:e}, rel {:e}",
                        failure.coordinate,
                        failure.sample,
                        failure.analytic,
                        failure.numeric,
                        failure.rel_error
                    );
                }
                Err(alig::Error::InvalidArgument(format!(
                    "gradient check failed on {} coordinates",
                    report.failures.len()
                )))
            }
        }
        Command::Version => {
            println!("alig {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    }
}
