//! Advantage actor-critic training: n-step returns, the actor-critic loss, synchronous
//! and asynchronous worker loops, greedy evaluation and the three training phases.

mod eval;
mod loss;
mod phases;
mod returns;
mod workers;

pub use eval::{eval_seed, evaluate, evaluate_random, EvalStats};
pub use loss::{actor_critic_loss, rollout_gradients, LossCoefficients, LossParts};
pub use phases::{
    skill_network, train_composition, train_multitask_composition, train_network, train_skills,
    transfer_layer_as, transfer_layers, TransferMap,
};
pub use returns::compute_returns_advantages;
pub use workers::run_training;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Network;
use crate::numcore::{ParamSet, RmsProp};
use crate::tasklang::TaskSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ExecutionMode {
    /// Workers step in lockstep; their gradients are summed into one update.
    #[default]
    Sync,
    /// Workers run on threads against parameter snapshots; one owner applies updates.
    Async,
}

/// Actor-critic hyperparameters and run budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub workers: usize,
    pub mode: ExecutionMode,
    pub rollout_len: usize,
    pub gamma: f32,
    pub entropy_coef: f32,
    pub value_coef: f32,
    pub learning_rate: f32,
    pub rms_decay: f32,
    pub rms_epsilon: f32,
    pub max_grad_norm: f32,
    pub total_steps: u64,
    pub seed: u64,
    pub eval_interval: u64,
    pub eval_episodes: usize,
    pub max_episode_steps: usize,
    /// Stop after this many consecutive evaluations without improvement of the best
    /// mean eval return by more than `plateau_delta`; 0 disables early stopping.
    pub plateau_patience: usize,
    pub plateau_delta: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            workers: 1,
            mode: ExecutionMode::Sync,
            rollout_len: 20,
            gamma: 0.99,
            entropy_coef: 0.01,
            value_coef: 0.5,
            learning_rate: 7e-4,
            rms_decay: 0.99,
            rms_epsilon: 1e-5,
            max_grad_norm: 40.0,
            total_steps: 1_000_000,
            seed: 0,
            eval_interval: 50_000,
            eval_episodes: 200,
            max_episode_steps: 100,
            plateau_patience: 0,
            plateau_delta: 0.01,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.workers == 0 {
            problems.push("workers must be at least 1".to_string());
        }
        if self.rollout_len == 0 {
            problems.push("rollout_len must be at least 1".to_string());
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            problems.push(format!("gamma must lie in (0, 1], got {}", self.gamma));
        }
        if self.total_steps == 0 {
            problems.push("total_steps must be positive".to_string());
        }
        if self.eval_interval == 0 {
            problems.push("eval_interval must be positive".to_string());
        }
        if self.eval_episodes == 0 {
            problems.push("eval_episodes must be positive".to_string());
        }
        if self.max_episode_steps == 0 {
            problems.push("max_episode_steps must be positive".to_string());
        }
        if !(self.learning_rate > 0.0)
            || !(0.0..1.0).contains(&self.rms_decay)
            || !(self.rms_epsilon > 0.0)
        {
            problems.push(
                "optimizer needs learning_rate > 0, 0 <= rms_decay < 1, rms_epsilon > 0"
                    .to_string(),
            );
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    pub fn optimizer(&self) -> RmsProp {
        RmsProp::new(
            self.learning_rate,
            self.rms_decay,
            self.rms_epsilon,
            Some(self.max_grad_norm),
        )
    }

    pub fn coefficients(&self) -> LossCoefficients {
        LossCoefficients {
            value: self.value_coef,
            entropy: self.entropy_coef,
        }
    }
}

/// A task together with the network that plays it.
#[derive(Debug, Clone)]
pub struct TaskBinding {
    pub spec: TaskSpec,
    pub net: Network,
}

/// How workers are assigned to tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// Worker `w` always plays task `w mod N`.
    Pinned,
    /// Each worker advances to the next task after every episode.
    RoundRobin,
}

/// Ordered transitions from one worker plus the bootstrap value.
#[derive(Debug, Clone, Default)]
pub struct RolloutBatch {
    pub binding: usize,
    /// Encoded observations, flattened `[T, INPUT_DIM]`.
    pub obs: Vec<f32>,
    pub actions: Vec<usize>,
    pub rewards: Vec<f32>,
    pub dones: Vec<bool>,
    pub values: Vec<f32>,
    pub log_probs: Vec<f32>,
    /// Value of the state after the last transition; 0 when it was terminal.
    pub bootstrap: f32,
}

impl RolloutBatch {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// One evaluation point of a learning curve.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub steps: u64,
    pub task: String,
    pub mean_return: f64,
    pub mean_length: f64,
    pub success_rate: f64,
    pub entropy: f64,
    pub seed: u64,
    pub wall_clock_secs: f64,
}

/// Result of a training run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ParamSet,
    pub curve: Vec<MetricsRow>,
    pub steps: u64,
    pub updates: u64,
}

impl TrainOutcome {
    /// Rows of the learning curve for one task key.
    pub fn curve_for(&self, task: &str) -> Vec<&MetricsRow> {
        self.curve.iter().filter(|r| r.task == task).collect()
    }

    pub fn final_row(&self, task: &str) -> Option<&MetricsRow> {
        self.curve_for(task).into_iter().last()
    }
}

/// SplitMix64 finalizer, used to derive independent seeds.
pub fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(0x6A09_E667_F3BC_C909);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of training episode `episode` on worker `worker`; identical across methods.
pub fn train_env_seed(seed: u64, worker: usize, episode: u64) -> u64 {
    mix_seed(mix_seed(seed, worker as u64 + 1), episode)
}

#[cfg(test)]
mod tests;
