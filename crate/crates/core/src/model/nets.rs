use rand::Rng;

use super::{
    init_policy, init_trunk, init_value, input_tensor, policy_forward, trunk_forward, Backend,
    CompositionTree, Eager, Skill, EMBED_DIM, NUM_ACTIONS, POLICY,
};
use crate::error::{Error, Result};
use crate::gridworld::{Action, Observation};
use crate::numcore::{sample_categorical, Activation, ParamSet};

/// One trunk-shaped network with its own policy layer and value head, all trainable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScratchAgent {
    pub prefix: String,
    pub value_head: String,
}

impl ScratchAgent {
    pub fn new(task_key: &str) -> Self {
        ScratchAgent {
            prefix: "scratch".into(),
            value_head: format!("value.{task_key}"),
        }
    }

    pub fn policy_prefix(&self) -> String {
        format!("{}.policy", self.prefix)
    }

    /// Trunk plus policy-layer parameter count (the value head is excluded).
    pub fn capacity(&self, params: &ParamSet) -> usize {
        params.count_prefix(&format!("{}.", self.prefix))
    }
}

/// A frozen skill trunk under a fresh, trainable policy layer; no composition layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyRetrain {
    pub trunk: Skill,
    pub policy: String,
    pub value_head: String,
}

impl PolicyRetrain {
    pub fn new(trunk: Skill, task_key: &str) -> Self {
        PolicyRetrain {
            trunk,
            policy: "retrain.policy".into(),
            value_head: format!("value.{task_key}"),
        }
    }
}

/// Picks one of the task's skills every step; the chosen skill's frozen policy then
/// produces the environment action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaController {
    pub skills: Vec<Skill>,
    pub prefix: String,
    pub value_head: String,
}

impl MetaController {
    pub fn new(skills: Vec<Skill>, task_key: &str) -> Self {
        MetaController {
            skills,
            prefix: "meta".into(),
            value_head: format!("value.{task_key}"),
        }
    }

    pub fn selector_prefix(&self) -> String {
        format!("{}.select", self.prefix)
    }
}

/// Every network the trainer can optimize.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Network {
    Tree(CompositionTree),
    Scratch(ScratchAgent),
    Retrain(PolicyRetrain),
    Meta(MetaController),
}

fn require_skills(params: &mut ParamSet, skills: &[Skill]) -> Result<()> {
    for s in skills {
        if !params.contains(&format!("{}.fc1.weight", s.trunk_prefix())) {
            return Err(Error::MissingPrerequisite(format!(
                "skill `{s}` has no trained trunk"
            )));
        }
        params.freeze_prefix(&format!("{}.", s.trunk_prefix()));
    }
    Ok(())
}

fn ensure_value<R: Rng>(params: &mut ParamSet, head: &str, rng: &mut R) {
    if !params.contains(&format!("{head}.weight")) {
        init_value(params, head, rng);
    }
}

impl Network {
    /// Size of the network's output distribution.
    pub fn num_outputs(&self) -> usize {
        match self {
            Network::Meta(m) => m.skills.len(),
            _ => NUM_ACTIONS,
        }
    }

    pub fn value_head(&self) -> &str {
        match self {
            Network::Tree(t) => &t.value_head,
            Network::Scratch(s) => &s.value_head,
            Network::Retrain(r) => &r.value_head,
            Network::Meta(m) => &m.value_head,
        }
    }

    /// Pre-trained skills this network reads (and keeps frozen).
    pub fn skills(&self) -> Vec<Skill> {
        match self {
            Network::Tree(t) => t.leaves(),
            Network::Scratch(_) => vec![],
            Network::Retrain(r) => vec![r.trunk],
            Network::Meta(m) => m.skills.clone(),
        }
    }

    /// Initializes whatever trainable parameters are missing and freezes every
    /// pre-trained parameter the network reads.
    pub fn prepare<R: Rng>(&self, params: &mut ParamSet, rng: &mut R) -> Result<()> {
        match self {
            Network::Tree(t) => t.prepare(params, rng),
            Network::Scratch(s) => {
                if !params.contains(&format!("{}.fc1.weight", s.prefix)) {
                    init_trunk(params, &s.prefix, rng);
                    init_policy(params, &s.policy_prefix(), rng);
                }
                ensure_value(params, &s.value_head, rng);
                Ok(())
            }
            Network::Retrain(r) => {
                require_skills(params, &[r.trunk])?;
                if !params.contains(&format!("{}.weight", r.policy)) {
                    init_policy(params, &r.policy, rng);
                }
                ensure_value(params, &r.value_head, rng);
                Ok(())
            }
            Network::Meta(m) => {
                require_skills(params, &m.skills)?;
                if !params.contains(POLICY_WEIGHT) {
                    return Err(Error::MissingPrerequisite(
                        "shared policy layer missing".into(),
                    ));
                }
                params.freeze_prefix(&format!("{POLICY}."));
                if !params.contains(&format!("{}.fc1.weight", m.prefix)) {
                    init_trunk(params, &m.prefix, rng);
                    params.init_dense(&m.selector_prefix(), EMBED_DIM, m.skills.len(), rng);
                }
                ensure_value(params, &m.value_head, rng);
                Ok(())
            }
        }
    }

    /// Logits `[B, num_outputs]` and values `[B, 1]` for observations `[B, 225]`.
    pub fn forward<B: Backend>(
        &self,
        b: &mut B,
        params: &ParamSet,
        obs: &B::V,
    ) -> Result<(B::V, B::V)> {
        match self {
            Network::Tree(t) => t.forward(b, params, obs),
            Network::Scratch(s) => {
                let emb = trunk_forward(b, params, &s.prefix, obs)?;
                let logits = b.dense(params, &s.policy_prefix(), &emb, Activation::None)?;
                let value = b.dense(params, &s.value_head, &emb, Activation::None)?;
                Ok((logits, value))
            }
            Network::Retrain(r) => {
                let emb = trunk_forward(b, params, &r.trunk.trunk_prefix(), obs)?;
                let logits = b.dense(params, &r.policy, &emb, Activation::None)?;
                let value = b.dense(params, &r.value_head, &emb, Activation::None)?;
                Ok((logits, value))
            }
            Network::Meta(m) => {
                let emb = trunk_forward(b, params, &m.prefix, obs)?;
                let logits = b.dense(params, &m.selector_prefix(), &emb, Activation::None)?;
                let value = b.dense(params, &m.value_head, &emb, Activation::None)?;
                Ok((logits, value))
            }
        }
    }

    /// Maps the network's chosen output to an environment action. Only the
    /// meta-controller differs from the identity: it samples from the selected skill's
    /// policy, in training and evaluation alike. Greedy evaluation applies to the
    /// selector's choice.
    pub fn env_action<R: Rng>(
        &self,
        params: &ParamSet,
        obs: &Observation,
        choice: usize,
        rng: &mut R,
    ) -> Result<Action> {
        match self {
            Network::Meta(m) => {
                let skill = m.skills[choice];
                let x = input_tensor(obs)?;
                let emb = trunk_forward(&mut Eager, params, &skill.trunk_prefix(), &x)?;
                let probs = policy_forward(params, &emb)?;
                Ok(Action::from_index(sample_categorical(probs.data(), rng)))
            }
            _ => Ok(Action::from_index(choice)),
        }
    }
}

const POLICY_WEIGHT: &str = "policy.weight";
