//! Pre-trains the six base skills jointly and saves them.
//!
//!     cargo run --release --example train_skills -- [total_steps] [out.ckpt]
//!
//! About 3M steps are needed for strong skills.

use composenet::harness::Checkpoint;
use composenet::model::Skill;
use composenet::trainer::{evaluate, evaluate_random, skill_network, train_skills, TrainConfig};

mod support;

fn main() -> composenet::Result<()> {
    let steps: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("total_steps"))
        .unwrap_or(300_000);
    let out = std::env::args()
        .nth(2)
        .unwrap_or_else(|| "skills.ckpt".into());
    let cfg = TrainConfig {
        workers: 6,
        total_steps: steps,
        eval_interval: (steps / 5).max(1),
        eval_episodes: 50,
        ..TrainConfig::default()
    };
    let outcome = train_skills(&cfg, Some(&support::print_row))?;
    for s in Skill::all() {
        let spec = s.task().parse()?;
        let e = evaluate(&skill_network(s), &spec, &outcome.params, 200, 1, 100)?;
        let r = evaluate_random(&spec, 200, 1, 100)?;
        println!(
            "{s}: greedy success {:.2} length {:.1}; random success {:.2} length {:.1}",
            e.success_rate, e.mean_length, r.success_rate, r.mean_length
        );
    }
    Checkpoint::new(outcome.params)
        .with_meta("steps", outcome.steps)
        .save(out.as_ref())?;
    println!("saved {out}");
    Ok(())
}
