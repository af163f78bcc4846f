//! Shared helpers for the integration tests: an independent f64 re-implementation
//! of the network and loss used as a finite-difference oracle.
#![allow(dead_code)]

use std::collections::BTreeMap;

use composenet::model::{CompositionTree, TreeNode, EMBED_DIM};
use composenet::numcore::ParamSet;

/// Parameters widened to f64.
#[derive(Clone)]
pub struct P64(pub BTreeMap<String, (Vec<usize>, Vec<f64>)>);

impl P64 {
    pub fn from(params: &ParamSet) -> Self {
        P64(params
            .iter()
            .map(|(n, t)| {
                (
                    n.to_string(),
                    (
                        t.shape().to_vec(),
                        t.data().iter().map(|&v| v as f64).collect(),
                    ),
                )
            })
            .collect())
    }

    fn w(&self, name: &str) -> &(Vec<usize>, Vec<f64>) {
        self.0
            .get(name)
            .unwrap_or_else(|| panic!("oracle: missing {name}"))
    }
}

/// `act(x·Wᵀ + b)` row by row, with plain triple loops.
pub fn dense64(p: &P64, prefix: &str, x: &[f64], rows: usize, relu: bool) -> Vec<f64> {
    let (shape, w) = p.w(&format!("{prefix}.weight"));
    let (_, b) = p.w(&format!("{prefix}.bias"));
    let (n_out, n_in) = (shape[0], shape[1]);
    assert_eq!(x.len(), rows * n_in, "oracle: {prefix} input width");
    let mut y = vec![0.0; rows * n_out];
    for r in 0..rows {
        for o in 0..n_out {
            let mut s = b[o];
            for i in 0..n_in {
                s += w[o * n_in + i] * x[r * n_in + i];
            }
            y[r * n_out + o] = if relu { s.max(0.0) } else { s };
        }
    }
    y
}

pub fn embed64(p: &P64, node: &TreeNode, x: &[f64], rows: usize) -> Vec<f64> {
    match node {
        TreeNode::Leaf(s) => {
            let pre = s.trunk_prefix();
            let h = dense64(p, &format!("{pre}.fc1"), x, rows, true);
            let h = dense64(p, &format!("{pre}.fc2"), &h, rows, true);
            dense64(p, &format!("{pre}.fc3"), &h, rows, true)
        }
        TreeNode::Compose { layer, slots } => {
            let a = embed64(p, &slots.0, x, rows);
            let b = embed64(p, &slots.1, x, rows);
            let mut cat = Vec::with_capacity(rows * 2 * EMBED_DIM);
            for r in 0..rows {
                cat.extend_from_slice(&a[r * EMBED_DIM..(r + 1) * EMBED_DIM]);
                cat.extend_from_slice(&b[r * EMBED_DIM..(r + 1) * EMBED_DIM]);
            }
            dense64(p, layer, &cat, rows, true)
        }
    }
}

/// Actor-critic loss of a composition tree:
/// `−Σ log π(a|s)·A + c_v·Σ(R − V)² − c_e·Σ H(π)`.
#[allow(clippy::too_many_arguments)]
pub fn tree_loss64(
    p: &P64,
    tree: &CompositionTree,
    x: &[f64],
    rows: usize,
    actions: &[usize],
    returns: &[f64],
    adv: &[f64],
    c_v: f64,
    c_e: f64,
) -> f64 {
    let emb = embed64(p, &tree.root, x, rows);
    let logits = dense64(p, "policy", &emb, rows, false);
    let values = dense64(p, &tree.value_head, &emb, rows, false);
    let k = logits.len() / rows;
    let mut loss = 0.0;
    for r in 0..rows {
        let row = &logits[r * k..(r + 1) * k];
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        let logp: Vec<f64> = row.iter().map(|v| v - lse).collect();
        let h: f64 = -logp.iter().map(|l| l.exp() * l).sum::<f64>();
        loss += -logp[actions[r]] * adv[r];
        loss += c_v * (returns[r] - values[r]).powi(2);
        loss -= c_e * h;
    }
    loss
}

/// Untrained stand-ins for the six skills plus the policy layer.
pub fn random_skills(seed: u64) -> ParamSet {
    use composenet::model::{init_policy, init_trunk, Skill, POLICY};
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut p = ParamSet::new();
    for s in Skill::all() {
        init_trunk(&mut p, &s.trunk_prefix(), &mut rng);
    }
    init_policy(&mut p, POLICY, &mut rng);
    p
}

/// Bit patterns of every frozen parameter.
pub fn frozen_bytes(p: &ParamSet) -> Vec<(String, Vec<u32>)> {
    let names: Vec<&str> = p.frozen_names().collect();
    p.snapshot_bytes(names)
}

/// Encoded observations of `rows` random reset states.
pub fn random_inputs(rows: usize, seed: u64) -> Vec<f32> {
    use composenet::gridworld::{reset, GridConfig, Role};
    use composenet::model::encode;
    let cfg = GridConfig::new([Role::Target, Role::Enemy, Role::Enemy]);
    (0..rows)
        .flat_map(|i| encode(&reset(&cfg, seed * 1000 + i as u64).render()))
        .collect()
}
