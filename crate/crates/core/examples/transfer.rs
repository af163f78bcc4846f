//! Trains one composition layer on four "while" tasks, evaluates it zero-shot on a
//! held-out one, then fine-tunes from it.
//!
//!     cargo run --release --example transfer -- [skills.ckpt]

use composenet::harness::{random_init_eval, zero_shot_eval};
use composenet::tasklang::TaskSpec;
use composenet::trainer::{train_composition, train_multitask_composition};

mod support;

fn main() -> composenet::Result<()> {
    let skills = support::skills_from_args();
    let sources: Vec<TaskSpec> = ["!r U g", "!g U r", "!b U r", "!b U g"]
        .iter()
        .map(|t| t.parse())
        .collect::<composenet::Result<_>>()?;
    let held: TaskSpec = "!g U b".parse()?;
    let mt = train_multitask_composition(
        &skills,
        &sources,
        &support::quick(300_000),
        Some(&support::print_row),
    )?;

    let z = zero_shot_eval(&skills, &mt.params, &held, 200, 0, 100)?;
    let r = random_init_eval(&skills, &held, 200, 0, 100)?;
    println!(
        "held-out {}: zero-shot {:+.3}, random init {:+.3}",
        held.formula, z.mean_return, r.mean_return
    );

    train_composition(
        &skills,
        &held,
        &support::quick(100_000),
        Some(&mt.params),
        Some(&support::print_row),
    )?;
    Ok(())
}
