//! Plays one scripted episode on a "!b U r" board and prints the per-tick trace.
//! Blue is an enemy that chases the agent; red is the target.

use composenet::gridworld::{bfs_distance_and_step, Action, Cell};
use composenet::harness::scripted_trace;
use composenet::tasklang::TaskSpec;
use rand::{Rng, SeedableRng};

fn main() -> composenet::Result<()> {
    let spec: TaskSpec = "!b U r".parse()?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let actions: Vec<Action> = (0..100)
        .map(|_| Action::from_index(rng.gen_range(0..4)))
        .collect();
    print!("{}", scripted_trace(&spec, 7, &actions)?);

    let (d, step) = bfs_distance_and_step(Cell::new(2, 2), Cell::new(9, 5));
    println!("enemy at (2,2) chasing (9,5): distance {d}, first move {step:?}");
    Ok(())
}
