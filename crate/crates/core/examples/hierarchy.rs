//! A depth-2 composition: "(!g & !b) U r" composes evade_g with evade_b first, then
//! the result with collect_r. The inner layer can start from a layer trained on
//! "and" tasks and the outer one from a layer trained on "while" tasks.
//!
//!     cargo run --release --example hierarchy -- [skills.ckpt]

use composenet::model::{build_tree, child_layer, Network, ROOT_LAYER};
use composenet::tasklang::TaskSpec;
use composenet::trainer::{train_multitask_composition, train_network, transfer_layer_as};

mod support;

fn parse_all(ts: &[&str]) -> composenet::Result<Vec<TaskSpec>> {
    ts.iter().map(|t| t.parse()).collect()
}

fn main() -> composenet::Result<()> {
    let skills = support::skills_from_args();
    let spec: TaskSpec = "(!g & !b) U r".parse()?;
    let tree = build_tree(&spec);
    println!("depth {} layers {:?}", tree.depth(), tree.layers());

    let and = train_multitask_composition(
        &skills,
        &parse_all(&["G !r & G !g", "G !g & G !b"])?,
        &support::quick(100_000),
        None,
    )?;
    let whl = train_multitask_composition(
        &skills,
        &parse_all(&["!g U r", "!b U r"])?,
        &support::quick(100_000),
        None,
    )?;

    let mut params = skills.clone();
    transfer_layer_as(&mut params, &whl.params, ROOT_LAYER, ROOT_LAYER)?;
    transfer_layer_as(
        &mut params,
        &and.params,
        ROOT_LAYER,
        &child_layer(ROOT_LAYER, 1),
    )?;
    println!("transfer-initialized:");
    train_network(
        params,
        Network::Tree(tree.clone()),
        &spec,
        &support::quick(100_000),
        Some(&support::print_row),
    )?;
    println!("random init:");
    train_network(
        skills,
        Network::Tree(tree),
        &spec,
        &support::quick(100_000),
        Some(&support::print_row),
    )?;
    Ok(())
}
