//! Network graph: per-skill trunks, the shared policy layer, per-task value heads,
//! composition layers and recursive composition trees.
//!
//! Parameter names follow a fixed scheme that checkpoints and transfer rely on:
//! `trunk.<skill>.fc{1,2,3}.*`, `policy.*`, `comp.<node-path>.*`, `value.<task>.*`.

mod backend;
mod nets;
mod tree;

pub use backend::{Backend, Eager, Taped};
pub use nets::{MetaController, Network, PolicyRetrain, ScratchAgent};
pub use tree::{build_tree, CompositionTree, TreeNode};
pub use tree::{child_layer, ROOT_LAYER};

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gridworld::{Color, Observation, AGENT_INTENSITY, GRID_SIZE};
use crate::numcore::{Activation, ParamSet, Tensor};

pub const OBS_DIM: usize = crate::gridworld::NUM_CELLS;
/// Width of the trunk input produced by [`encode`].
pub const INPUT_DIM: usize = 4 * OBS_DIM;
pub const HIDDEN_DIM: usize = 128;
pub const EMBED_DIM: usize = 128;
pub const NUM_ACTIONS: usize = 4;

pub const POLICY: &str = "policy";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SkillKind {
    Collect,
    Evade,
}

/// One of the six base skills.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Skill {
    pub kind: SkillKind,
    pub color: Color,
}

impl Skill {
    pub const fn collect(color: Color) -> Self {
        Skill {
            kind: SkillKind::Collect,
            color,
        }
    }

    pub const fn evade(color: Color) -> Self {
        Skill {
            kind: SkillKind::Evade,
            color,
        }
    }

    pub fn all() -> [Skill; 6] {
        [
            Skill::collect(Color::Red),
            Skill::collect(Color::Green),
            Skill::collect(Color::Blue),
            Skill::evade(Color::Red),
            Skill::evade(Color::Green),
            Skill::evade(Color::Blue),
        ]
    }

    pub fn name(&self) -> String {
        self.to_string()
    }

    /// Task expression that trains this skill.
    pub fn task(&self) -> String {
        match self.kind {
            SkillKind::Collect => format!("F {}", self.color),
            SkillKind::Evade => format!("G !{}", self.color),
        }
    }

    pub fn trunk_prefix(&self) -> String {
        format!("trunk.{self}")
    }
}

impl fmt::Display for Skill {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            SkillKind::Collect => "collect",
            SkillKind::Evade => "evade",
        };
        write!(f, "{k}_{}", self.color)
    }
}

impl std::str::FromStr for Skill {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown skill id `{s}`"));
        let (kind, color) = s.split_once('_').ok_or_else(bad)?;
        let mut chars = color.chars();
        let color = match (chars.next(), chars.next()) {
            (Some(c), None) => Color::from_letter(c).ok_or_else(bad)?,
            _ => return Err(bad()),
        };
        match kind {
            "collect" => Ok(Skill::collect(color)),
            "evade" => Ok(Skill::evade(color)),
            _ => Err(bad()),
        }
    }
}

/// Adds trunk weights `INPUT_DIM → 128 → 128 → 128` for `skill` (or any prefix with that shape).
pub fn init_trunk<R: Rng>(params: &mut ParamSet, prefix: &str, rng: &mut R) {
    params.init_dense(&format!("{prefix}.fc1"), INPUT_DIM, HIDDEN_DIM, rng);
    params.init_dense(&format!("{prefix}.fc2"), HIDDEN_DIM, HIDDEN_DIM, rng);
    params.init_dense(&format!("{prefix}.fc3"), HIDDEN_DIM, EMBED_DIM, rng);
}

pub fn init_policy<R: Rng>(params: &mut ParamSet, prefix: &str, rng: &mut R) {
    params.init_dense(prefix, EMBED_DIM, NUM_ACTIONS, rng);
}

pub fn init_composition<R: Rng>(params: &mut ParamSet, prefix: &str, rng: &mut R) {
    params.init_dense(prefix, 2 * EMBED_DIM, EMBED_DIM, rng);
}

pub fn init_value<R: Rng>(params: &mut ParamSet, prefix: &str, rng: &mut R) {
    params.init_dense(prefix, EMBED_DIM, 1, rng);
}

/// Decodes a grayscale observation into the trunk input: four one-hot 15×15 planes
/// holding the agent's cell, then the red, green and blue objects at their offset from
/// the agent (agent at the centre, offsets taken modulo the grid size). Objects hidden
/// by draw priority are absent from their plane.
pub fn encode(obs: &Observation) -> Vec<f32> {
    let px = obs.pixels();
    let mut out = vec![0.0f32; INPUT_DIM];
    let Some(agent) = px.iter().position(|&v| v == AGENT_INTENSITY) else {
        return out;
    };
    out[agent] = 1.0;
    let (ar, ac) = (agent / GRID_SIZE, agent % GRID_SIZE);
    let centre = GRID_SIZE / 2;
    for (i, &v) in px.iter().enumerate() {
        let Some(c) = Color::ALL.into_iter().find(|c| c.intensity() == v) else {
            continue;
        };
        let r = (i / GRID_SIZE + GRID_SIZE + centre - ar) % GRID_SIZE;
        let col = (i % GRID_SIZE + GRID_SIZE + centre - ac) % GRID_SIZE;
        out[(c.index() + 1) * OBS_DIM + r * GRID_SIZE + col] = 1.0;
    }
    out
}

/// A single encoded observation shaped `[1, INPUT_DIM]`.
pub fn input_tensor(obs: &Observation) -> Result<Tensor> {
    Tensor::new(vec![1, INPUT_DIM], encode(obs))
}

/// Embedding of a batch of encoded observations (`[B, INPUT_DIM]`) through one trunk.
pub fn trunk_forward<B: Backend>(
    b: &mut B,
    params: &ParamSet,
    prefix: &str,
    obs: &B::V,
) -> Result<B::V> {
    let h = b.dense(params, &format!("{prefix}.fc1"), obs, Activation::Relu)?;
    let h = b.dense(params, &format!("{prefix}.fc2"), &h, Activation::Relu)?;
    b.dense(params, &format!("{prefix}.fc3"), &h, Activation::Relu)
}

/// Action logits from an embedding, through the shared policy layer.
pub fn policy_logits<B: Backend>(b: &mut B, params: &ParamSet, emb: &B::V) -> Result<B::V> {
    b.dense(params, POLICY, emb, Activation::None)
}

/// Action distribution for an embedding, whatever produced it.
pub fn policy_forward(params: &ParamSet, emb: &Tensor) -> Result<Tensor> {
    if emb.last_dim() != EMBED_DIM {
        return Err(Error::Shape(format!(
            "policy layer expects {EMBED_DIM}-dim embeddings, got {:?}",
            emb.shape()
        )));
    }
    let logits = policy_logits(&mut Eager, params, emb)?;
    Ok(crate::numcore::softmax(&logits))
}

/// `relu(W·[e1; e2] + b)`; slot order matters.
pub fn compose_forward<B: Backend>(
    b: &mut B,
    params: &ParamSet,
    prefix: &str,
    e1: &B::V,
    e2: &B::V,
) -> Result<B::V> {
    let x = b.concat(e1, e2)?;
    b.dense(params, prefix, &x, Activation::Relu)
}
