use rand::Rng;

use super::{
    compose_forward, init_composition, init_value, policy_logits, trunk_forward, Backend, Skill,
    POLICY,
};
use crate::error::{Error, Result};
use crate::numcore::{Activation, ParamSet};
use crate::tasklang::{TaskSpec, Template};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeNode {
    Leaf(Skill),
    /// A composition layer with parameter prefix `layer`; slot 1 then slot 2.
    Compose {
        layer: String,
        slots: Box<(TreeNode, TreeNode)>,
    },
}

impl TreeNode {
    fn node(layer: &str, a: TreeNode, b: TreeNode) -> TreeNode {
        TreeNode::Compose {
            layer: layer.to_string(),
            slots: Box::new((a, b)),
        }
    }

    fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf(_) => 0,
            TreeNode::Compose { slots, .. } => 1 + slots.0.depth().max(slots.1.depth()),
        }
    }

    fn collect_leaves(&self, out: &mut Vec<Skill>) {
        match self {
            TreeNode::Leaf(s) => out.push(*s),
            TreeNode::Compose { slots, .. } => {
                slots.0.collect_leaves(out);
                slots.1.collect_leaves(out);
            }
        }
    }

    fn collect_layers(&self, out: &mut Vec<String>) {
        if let TreeNode::Compose { layer, slots } = self {
            out.push(layer.clone());
            slots.0.collect_layers(out);
            slots.1.collect_layers(out);
        }
    }

    fn replace_leaves(&mut self, it: &mut impl Iterator<Item = Skill>) {
        match self {
            TreeNode::Leaf(s) => *s = it.next().expect("leaf count checked by caller"),
            TreeNode::Compose { slots, .. } => {
                slots.0.replace_leaves(it);
                slots.1.replace_leaves(it);
            }
        }
    }

    pub fn embed<B: Backend>(&self, b: &mut B, params: &ParamSet, obs: &B::V) -> Result<B::V> {
        match self {
            TreeNode::Leaf(skill) => trunk_forward(b, params, &skill.trunk_prefix(), obs),
            TreeNode::Compose { layer, slots } => {
                let e1 = slots.0.embed(b, params, obs)?;
                let e2 = slots.1.embed(b, params, obs)?;
                compose_forward(b, params, layer, &e1, &e2)
            }
        }
    }
}

/// Skill trunks wired through composition layers into the shared policy layer and a
/// task-specific value head. A single leaf is the degenerate tree used for skills.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositionTree {
    pub root: TreeNode,
    pub value_head: String,
}

pub const ROOT_LAYER: &str = "comp.root";

/// Parameter prefix of the composition layer in `slot` (1 or 2) below `parent`.
pub fn child_layer(parent: &str, slot: usize) -> String {
    format!("{parent}.{slot}")
}

/// Wires the tree for a compiled task. Until nodes put the evade side in slot 1 and the
/// collect side in slot 2; symmetric nodes use canonical color order.
pub fn build_tree(spec: &TaskSpec) -> CompositionTree {
    use TreeNode::Leaf;
    let c = Skill::collect;
    let e = Skill::evade;
    let root = match spec.template {
        Template::Collect(x) => Leaf(c(x)),
        Template::Evade(x) => Leaf(e(x)),
        Template::While { evade, collect } => {
            TreeNode::node(ROOT_LAYER, Leaf(e(evade)), Leaf(c(collect)))
        }
        Template::Or(a, b) => TreeNode::node(ROOT_LAYER, Leaf(c(a)), Leaf(c(b))),
        Template::AndEvade(a, b) => TreeNode::node(ROOT_LAYER, Leaf(e(a)), Leaf(e(b))),
        Template::Then { first, second } => {
            TreeNode::node(ROOT_LAYER, Leaf(c(first)), Leaf(c(second)))
        }
        Template::EvadeBothWhile {
            evade: (p, q),
            collect,
        } => TreeNode::node(
            ROOT_LAYER,
            TreeNode::node(&child_layer(ROOT_LAYER, 1), Leaf(e(p)), Leaf(e(q))),
            Leaf(c(collect)),
        ),
        Template::WhileEither {
            evade,
            collect: (s, t),
        } => TreeNode::node(
            ROOT_LAYER,
            Leaf(e(evade)),
            TreeNode::node(&child_layer(ROOT_LAYER, 2), Leaf(c(s)), Leaf(c(t))),
        ),
    };
    CompositionTree {
        root,
        value_head: format!("value.{}", spec.key()),
    }
}

impl CompositionTree {
    pub fn new(root: TreeNode, value_head: impl Into<String>) -> Self {
        CompositionTree {
            root,
            value_head: value_head.into(),
        }
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Leaves in slot order (depth-first, slot 1 before slot 2).
    pub fn leaves(&self) -> Vec<Skill> {
        let mut out = Vec::new();
        self.root.collect_leaves(&mut out);
        out
    }

    /// Composition-layer prefixes, root first.
    pub fn layers(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.root.collect_layers(&mut out);
        out
    }

    /// Same wiring with different skills at the leaves (slot order).
    pub fn with_leaves(&self, leaves: &[Skill]) -> Result<Self> {
        if leaves.len() != self.leaves().len() {
            return Err(Error::Config(format!(
                "tree has {} leaves, {} substitutes given",
                self.leaves().len(),
                leaves.len()
            )));
        }
        let mut t = self.clone();
        t.root.replace_leaves(&mut leaves.iter().copied());
        Ok(t)
    }

    /// Checks that skills and the policy layer exist, adds any missing composition
    /// layers and the value head, and freezes trunks and the policy layer.
    pub fn prepare<R: Rng>(&self, params: &mut ParamSet, rng: &mut R) -> Result<()> {
        for s in self.leaves() {
            let w = format!("{}.fc1.weight", s.trunk_prefix());
            if !params.contains(&w) {
                return Err(Error::MissingPrerequisite(format!(
                    "skill `{s}` has no trained trunk"
                )));
            }
            params.freeze_prefix(&format!("{}.", s.trunk_prefix()));
        }
        if !params.contains("policy.weight") {
            return Err(Error::MissingPrerequisite(
                "shared policy layer missing".into(),
            ));
        }
        params.freeze_prefix(&format!("{POLICY}."));
        for layer in self.layers() {
            if !params.contains(&format!("{layer}.weight")) {
                init_composition(params, &layer, rng);
            }
        }
        if !params.contains(&format!("{}.weight", self.value_head)) {
            init_value(params, &self.value_head, rng);
        }
        Ok(())
    }

    /// Logits `[B, 4]` and values `[B, 1]`.
    pub fn forward<B: Backend>(
        &self,
        b: &mut B,
        params: &ParamSet,
        obs: &B::V,
    ) -> Result<(B::V, B::V)> {
        let emb = self.root.embed(b, params, obs)?;
        let logits = policy_logits(b, params, &emb)?;
        let value = b.dense(params, &self.value_head, &emb, Activation::None)?;
        Ok((logits, value))
    }
}
