use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use kickrl::checks::all_checks;
use kickrl::harness::{
    compare_encodings, emit_plot, load_run, parse_config, run_experiment, ExperimentConfig,
    RunResult,
};
use kickrl::obs::Encoding;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "kickrl",
    about = "Kick-motion DQN workbench: train per observation encoding, plot and compare learning curves",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one seeded training experiment from a config file.
    Train {
        /// Config file in `key = value` syntax (see `print-config`).
        #[arg(long)]
        config: PathBuf,
        /// Override the observation encoding (acs, rcs, rcs+N).
        #[arg(long)]
        encoding: Option<String>,
        /// Override the seed list, comma-separated.
        #[arg(long)]
        seeds: Option<String>,
    },
    /// Render the seed-median learning curves of one or more runs as SVG.
    Plot {
        /// Run directories produced by `train`.
        #[arg(long, num_args = 1.., required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Report threshold crossings of runs trained with identical
    /// hyperparameters.
    Compare {
        /// Run directories produced by `train`.
        #[arg(long, num_args = 1.., required = true)]
        runs: Vec<PathBuf>,
        /// Moving-average level a run must exceed.
        #[arg(long, default_value_t = -4.0, allow_negative_numbers = true)]
        threshold: f64,
    },
    /// Run the frame and observation property suites and print pass/fail.
    CheckFrames,
    /// Print the default configuration in config-file syntax.
    PrintConfig,
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    Ok(parse_config(&text)?)
}

fn train(config: PathBuf, encoding: Option<String>, seeds: Option<String>) -> Result<()> {
    let mut cfg = load_config(&config)?;
    if let Some(e) = encoding {
        cfg.encoding = e
            .parse::<Encoding>()
            .map_err(|msg| anyhow::anyhow!("--encoding: {msg}"))?;
    }
    if let Some(s) = seeds {
        cfg.seeds = s
            .split(',')
            .map(|t| t.trim().parse::<u64>().with_context(|| format!("--seeds: bad seed {t:?}")))
            .collect::<Result<_>>()?;
    }

    let result = run_experiment(&cfg)?;
    println!(
        "trained {} for {} episodes x {} seeds in {:.1}s -> {}",
        cfg.encoding,
        cfg.episodes,
        cfg.seeds.len(),
        result.duration.as_secs_f64(),
        cfg.run_dir().display()
    );
    let report = compare_encodings(std::slice::from_ref(&result), -4.0)?;
    print!("{report}");
    Ok(())
}

fn load_runs(dirs: &[PathBuf]) -> Result<Vec<RunResult>> {
    dirs.iter()
        .map(|d| load_run(d).with_context(|| format!("loading run {}", d.display())))
        .collect()
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Train {
            config,
            encoding,
            seeds,
        } => train(config, encoding, seeds),
        Command::Plot { runs, out } => {
            let results = load_runs(&runs)?;
            emit_plot(&results, &out)?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Compare { runs, threshold } => {
            let results = load_runs(&runs)?;
            let report = compare_encodings(&results, threshold)?;
            print!("{report}");
            Ok(())
        }
        Command::CheckFrames => {
            let outcomes = all_checks();
            for o in &outcomes {
                println!("{o}");
            }
            if outcomes.iter().any(|o| !o.passed) {
                bail!("property checks failed");
            }
            Ok(())
        }
        Command::PrintConfig => {
            print!("{}", ExperimentConfig::default().to_config_string());
            Ok(())
        }
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
