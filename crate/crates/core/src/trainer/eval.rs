use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::mix_seed;
use crate::error::Result;
use crate::gridworld::{reset, Action, GridConfig};
use crate::model::{input_tensor, Eager, Network};
use crate::numcore::{argmax, ParamSet};
use crate::tasklang::{MonitorState, MonitorStatus, TaskSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalStats {
    pub mean_return: f64,
    pub mean_length: f64,
    pub success_rate: f64,
    pub episodes: usize,
}

/// Seed of evaluation episode `i`; depends only on the run seed so every method is
/// evaluated on the same start states.
pub fn eval_seed(seed: u64, i: usize) -> u64 {
    mix_seed(seed ^ 0x5EED_0E7A_1000_0000, i as u64)
}

fn grid(spec: &TaskSpec, max_steps: usize) -> GridConfig {
    let mut g = spec.grid_config();
    g.max_steps = max_steps;
    g
}

fn run_episodes(
    spec: &TaskSpec,
    episodes: usize,
    seed: u64,
    max_steps: usize,
    mut policy: impl FnMut(&crate::gridworld::Observation, &mut ChaCha8Rng) -> Result<Action>,
) -> Result<EvalStats> {
    let cfg = grid(spec, max_steps);
    let (mut ret, mut len, mut wins) = (0.0f64, 0.0f64, 0usize);
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0xAC7));
    for i in 0..episodes {
        let mut env = reset(&cfg, eval_seed(seed, i));
        let mut monitor = MonitorState::new();
        let mut obs = env.render();
        loop {
            let a = policy(&obs, &mut rng)?;
            let step = env.step(a)?;
            let (r, done) = monitor.step(spec, &step.events, step.truncated)?;
            ret += r as f64;
            obs = step.observation;
            if done {
                break;
            }
        }
        len += env.step_count as f64;
        if monitor.status == MonitorStatus::Success {
            wins += 1;
        }
    }
    let n = episodes as f64;
    Ok(EvalStats {
        mean_return: ret / n,
        mean_length: len / n,
        success_rate: wins as f64 / n,
        episodes,
    })
}

/// Greedy (argmax) evaluation with no parameter updates.
pub fn evaluate(
    net: &Network,
    spec: &TaskSpec,
    params: &ParamSet,
    episodes: usize,
    seed: u64,
    max_steps: usize,
) -> Result<EvalStats> {
    run_episodes(spec, episodes, seed, max_steps, |obs, rng| {
        let x = input_tensor(obs)?;
        let (logits, _) = net.forward(&mut Eager, params, &x)?;
        let choice = argmax(logits.data());
        net.env_action(params, obs, choice, rng)
    })
}

/// Uniform random policy on the same evaluation episodes.
pub fn evaluate_random(
    spec: &TaskSpec,
    episodes: usize,
    seed: u64,
    max_steps: usize,
) -> Result<EvalStats> {
    run_episodes(spec, episodes, seed, max_steps, |_, rng| {
        Ok(Action::from_index(rng.gen_range(0..4)))
    })
}
