use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use composenet::harness::{run, ExperimentConfig, Verb};

#[derive(Parser)]
#[command(
    name = "composenet",
    version,
    about = "Train and evaluate skill-composition agents"
)]
struct Cli {
    #[command(subcommand)]
    verb: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides `train.seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Pre-train the six skill trunks and the shared policy layer.
    TrainSkills(Common),
    /// Train the configured method on one task.
    Train(Common),
    /// Train one composition layer on several tasks of the same template.
    TransferTrain(Common),
    /// Greedy evaluation of a trained checkpoint, with trace dumps.
    Eval(Common),
    /// Evaluate a transferred composition layer without updates.
    ZeroShot(Common),
    /// Train a composition with substituted skills.
    AblateSkills(Common),
    /// Train a fresh policy layer on one frozen trunk.
    AblatePolicy(Common),
    /// Draw learning curves from metrics files.
    Plot(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (verb, args) = match cli.verb {
        Command::TrainSkills(a) => (Verb::TrainSkills, a),
        Command::Train(a) => (Verb::Train, a),
        Command::TransferTrain(a) => (Verb::TransferTrain, a),
        Command::Eval(a) => (Verb::Eval, a),
        Command::ZeroShot(a) => (Verb::ZeroShot, a),
        Command::AblateSkills(a) => (Verb::AblateSkills, a),
        Command::AblatePolicy(a) => (Verb::AblatePolicy, a),
        Command::Plot(a) => (Verb::Plot, a),
    };
    let result = ExperimentConfig::load(&args.config).and_then(|mut cfg| {
        if let Some(seed) = args.seed {
            cfg.train.seed = seed;
        }
        run(verb, &cfg)
    });
    match result {
        Ok(report) => {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for line in &report.summary {
                println!("{line}");
            }
            if let Some(c) = &report.checkpoint {
                println!("checkpoint: {}", c.display());
            }
            for m in &report.metrics {
                println!("metrics: {}", m.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
