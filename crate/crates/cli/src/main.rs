use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use scorebo::harness::{bench_suite, emit_plots, load_config, run_experiment, ExperimentConfig, Manifest, Suite};

#[derive(Parser)]
#[command(name = "scorebo", version, about = "Run SAL / SCoreBO experiments and plot their results")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Al,
    Bo,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a JSON config or a previous run's manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Run only this seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (overrides `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Concurrent seeds (overrides `workers`).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run a predefined benchmark suite.
    Bench {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Number of seeds per task and method.
        #[arg(long)]
        seeds: Option<u64>,
        /// Query budget (defaults to 25 (D + 3)).
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        workers: Option<usize>,
        /// Write the suite's config files without running them.
        #[arg(long)]
        dry_run: bool,
    },
    /// Plot one metric for every method found under a result directory.
    Plot {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        metric: String,
    },
}

fn report(manifest: &Manifest) -> bool {
    let dir = manifest.config.run_dir();
    for s in &manifest.seeds {
        match &s.error {
            None => eprintln!("seed {}: {} rows in {:.1}s", s.seed, s.rows, s.wall_time_s),
            Some(e) => eprintln!("seed {} failed: {e}", s.seed),
        }
    }
    eprintln!("results in {}", dir.display());
    manifest.failed_seeds() == 0
}

fn run(mut cfg: ExperimentConfig, seed: Option<u64>, out: Option<PathBuf>, workers: Option<usize>) -> scorebo::Result<bool> {
    if let Some(s) = seed {
        cfg.seeds = vec![s];
    }
    if let Some(o) = out {
        cfg.output_dir = o;
    }
    if let Some(w) = workers {
        cfg.workers = w;
    }
    Ok(report(&run_experiment(&cfg)?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, seed, out, workers } => load_config(&config).and_then(|cfg| run(cfg, seed, out, workers)),
        Command::Bench { suite, out, seeds, budget, workers, dry_run } => {
            let suite = match suite {
                SuiteArg::Al => Suite::Al,
                SuiteArg::Bo => Suite::Bo,
            };
            let mut all_ok = true;
            let mut outcome = Ok(());
            for mut cfg in bench_suite(suite, &out) {
                if let Some(n) = seeds {
                    cfg.seeds = (0..n).collect();
                }
                cfg.budget = budget.or(cfg.budget);
                cfg.workers = workers.unwrap_or(cfg.workers);
                if dry_run {
                    let path = cfg.output_dir.join(format!("{}.json", cfg.label()));
                    let written = std::fs::create_dir_all(&cfg.output_dir)
                        .map_err(scorebo::Error::from)
                        .and_then(|_| Ok(std::fs::write(&path, serde_json::to_string_pretty(&cfg)?)?));
                    if let Err(e) = written {
                        outcome = Err(e);
                        break;
                    }
                    println!("{}", path.display());
                    continue;
                }
                eprintln!("== {} / {}", cfg.task, cfg.label());
                match run(cfg, None, None, None) {
                    Ok(ok) => all_ok &= ok,
                    Err(e) => {
                        eprintln!("error: {e}");
                        all_ok = false;
                    }
                }
            }
            outcome.map(|_| all_ok)
        }
        Command::Plot { dir, metric } => emit_plots(&dir, &metric).map(|p| {
            println!("{}", p.display());
            true
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
