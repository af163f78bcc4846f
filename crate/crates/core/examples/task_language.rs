//! Parses every supported task, shows what it compiles to, and runs the reward
//! monitor on a short event sequence.

use composenet::gridworld::{Color, EventSet};
use composenet::model::build_tree;
use composenet::tasklang::{brute_force_satisfies, catalog, MonitorState, TaskSpec};

fn main() -> composenet::Result<()> {
    for text in catalog() {
        let spec: TaskSpec = text.parse()?;
        let tree = build_tree(&spec);
        let leaves: Vec<String> = tree.leaves().iter().map(|s| s.to_string()).collect();
        println!(
            "{:<16} key {:<18} roles {:?} reward {:?} leaves [{}]",
            text,
            spec.key(),
            spec.roles,
            spec.reward_mode,
            leaves.join(", ")
        );
    }

    match "!x U r".parse::<TaskSpec>() {
        Err(e) => println!("\nrejected: {e}"),
        Ok(_) => unreachable!(),
    }

    let spec: TaskSpec = "F(r & F g)".parse()?;
    let mut monitor = MonitorState::new();
    let mut trace = Vec::new();
    for collected in [None, Some(Color::Red), None, Some(Color::Green)] {
        let mut ev = EventSet::default();
        let mut props = [false; 3];
        if let Some(c) = collected {
            ev.collected[c.index()] = true;
            props[c.index()] = true;
        }
        trace.push(props);
        let (reward, done) = monitor.step(&spec, &ev, false)?;
        println!(
            "{}: event {:?} reward {reward} done {done} oracle {:?}",
            spec.formula,
            collected,
            brute_force_satisfies(&spec.formula, &trace, false)
        );
    }
    Ok(())
}
