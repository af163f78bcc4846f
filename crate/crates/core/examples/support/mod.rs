//! Helpers shared by the examples.
#![allow(dead_code)]

use std::path::Path;

use composenet::harness::Checkpoint;
use composenet::numcore::ParamSet;
use composenet::trainer::{train_skills, MetricsRow, TrainConfig};

/// Loads a skills checkpoint from the first CLI argument, or trains a small set of
/// skills when none is given. The quick skills are weak; pass a checkpoint from
/// `composenet train-skills --config configs/skills.toml` for meaningful numbers.
pub fn skills_from_args() -> ParamSet {
    if let Some(path) = std::env::args().nth(1) {
        let ck = Checkpoint::load(Path::new(&path)).unwrap_or_else(|e| {
            eprintln!("{e}");
            std::process::exit(2)
        });
        println!("skills loaded from {path}");
        return ck.params;
    }
    println!("no skills checkpoint given; training quick skills (200k steps)");
    let cfg = TrainConfig {
        workers: 6,
        total_steps: 200_000,
        eval_interval: 200_000,
        eval_episodes: 20,
        ..TrainConfig::default()
    };
    train_skills(&cfg, None).expect("skill training").params
}

pub fn print_row(r: &MetricsRow) {
    println!(
        "{:>8} {:<22} return {:+.3} length {:5.1} success {:.2}",
        r.steps, r.task, r.mean_return, r.mean_length, r.success_rate
    );
}

/// Small budget, frequent evaluation.
pub fn quick(total_steps: u64) -> TrainConfig {
    TrainConfig {
        workers: 2,
        total_steps,
        eval_interval: total_steps / 4,
        eval_episodes: 50,
        ..TrainConfig::default()
    }
}
