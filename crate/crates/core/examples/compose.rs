//! Trains a composition layer over frozen skills for one task.
//!
//!     cargo run --release --example compose -- [skills.ckpt] [task]

use composenet::model::build_tree;
use composenet::tasklang::TaskSpec;
use composenet::trainer::train_composition;

mod support;

fn main() -> composenet::Result<()> {
    let skills = support::skills_from_args();
    let task = std::env::args().nth(2).unwrap_or_else(|| "!g U b".into());
    let spec: TaskSpec = task.parse()?;
    let tree = build_tree(&spec);
    println!(
        "{task}: leaves {:?}, layers {:?}",
        tree.leaves(),
        tree.layers()
    );
    let outcome = train_composition(
        &skills,
        &spec,
        &support::quick(200_000),
        None,
        Some(&support::print_row),
    )?;
    let trained: Vec<&str> = outcome
        .params
        .names()
        .filter(|n| !outcome.params.is_frozen(n))
        .collect();
    println!("trainable after training: {trained:?}");
    Ok(())
}
