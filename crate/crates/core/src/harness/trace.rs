use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::gridworld::{reset, trace_line, Action, EventSet, WorldState};
use crate::model::{input_tensor, Eager, Network};
use crate::numcore::{argmax, ParamSet};
use crate::tasklang::{MonitorState, TaskSpec};
use crate::trainer::{eval_seed, mix_seed};

/// Replays scripted actions from the reset state of `seed`; one line per tick, the
/// reset state first.
pub fn scripted_trace(spec: &TaskSpec, seed: u64, actions: &[Action]) -> Result<String> {
    let mut env = reset(&spec.grid_config(), seed);
    let mut monitor = MonitorState::new();
    let mut out = String::new();
    let _ = writeln!(out, "{}", trace_line(&env, &EventSet::default()));
    for &a in actions {
        if !step_line(&mut env, &mut monitor, spec, a, &mut out)? {
            break;
        }
    }
    Ok(out)
}

fn step_line(
    env: &mut WorldState,
    monitor: &mut MonitorState,
    spec: &TaskSpec,
    a: Action,
    out: &mut String,
) -> Result<bool> {
    let step = env.step(a)?;
    let (reward, done) = monitor.step(spec, &step.events, step.truncated)?;
    let _ = writeln!(
        out,
        "{} action={a:?} reward={reward}",
        trace_line(env, &step.events)
    );
    Ok(!done)
}

/// Greedy rollout of evaluation episode `episode` for the run seed `seed`.
pub fn greedy_trace(
    net: &Network,
    spec: &TaskSpec,
    params: &ParamSet,
    seed: u64,
    episode: usize,
    max_steps: usize,
) -> Result<String> {
    let mut cfg = spec.grid_config();
    cfg.max_steps = max_steps;
    let mut env = reset(&cfg, eval_seed(seed, episode));
    let mut monitor = MonitorState::new();
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x7ACE));
    let mut out = String::new();
    let _ = writeln!(out, "{}", trace_line(&env, &EventSet::default()));
    loop {
        let obs = env.render();
        let (logits, _) = net.forward(&mut Eager, params, &input_tensor(&obs)?)?;
        let a = net.env_action(params, &obs, argmax(logits.data()), &mut rng)?;
        if !step_line(&mut env, &mut monitor, spec, a, &mut out)? {
            break;
        }
    }
    Ok(out)
}
