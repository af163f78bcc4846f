use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{mix_seed, run_training, MetricsRow, Schedule, TaskBinding, TrainConfig, TrainOutcome};
use crate::error::{Error, Result};
use crate::model::{
    build_tree, init_policy, init_trunk, init_value, CompositionTree, Network, Skill, TreeNode,
    POLICY,
};
use crate::numcore::ParamSet;
use crate::tasklang::TaskSpec;

/// Composition-layer parameters copied from a transfer-init checkpoint.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransferMap {
    pub copied: Vec<String>,
}

fn init_rng(cfg: &TrainConfig, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, salt))
}

/// The degenerate one-leaf tree a skill is trained through.
pub fn skill_network(skill: Skill) -> Network {
    Network::Tree(CompositionTree::new(
        TreeNode::Leaf(skill),
        format!("value.{skill}"),
    ))
}

/// Joint pre-training of all six skill trunks and the shared policy layer.
///
/// With at least six workers each worker is pinned to one skill; with fewer, workers
/// rotate through the skills one episode at a time so every skill is trained.
pub fn train_skills(
    cfg: &TrainConfig,
    progress: Option<&dyn Fn(&MetricsRow)>,
) -> Result<TrainOutcome> {
    let mut rng = init_rng(cfg, 0x5C1115);
    let mut params = ParamSet::new();
    let mut bindings = Vec::new();
    for skill in Skill::all() {
        init_trunk(&mut params, &skill.trunk_prefix(), &mut rng);
        init_value(&mut params, &format!("value.{skill}"), &mut rng);
        bindings.push(TaskBinding {
            spec: skill.task().parse()?,
            net: skill_network(skill),
        });
    }
    init_policy(&mut params, POLICY, &mut rng);
    let schedule = if cfg.workers >= bindings.len() {
        Schedule::Pinned
    } else {
        Schedule::RoundRobin
    };
    run_training(params, &bindings, schedule, cfg, progress)
}

/// Copies every composition layer (`comp.*`) of `src` into `dst` as trainable
/// parameters, overwriting any existing values.
pub fn transfer_layers(dst: &mut ParamSet, src: &ParamSet) -> Result<TransferMap> {
    let mut map = TransferMap::default();
    for (name, t) in src.iter() {
        if name.starts_with("comp.") {
            dst.unfreeze(name);
            dst.insert(name, t.clone());
            map.copied.push(name.to_string());
        }
    }
    if map.copied.is_empty() {
        return Err(Error::MissingPrerequisite(
            "transfer-init checkpoint has no composition layers".into(),
        ));
    }
    Ok(map)
}

/// Copies the single composition layer `from` of `src` into `dst` under the name `to`.
/// Used to seed one node of a deeper tree from a layer trained elsewhere.
pub fn transfer_layer_as(
    dst: &mut ParamSet,
    src: &ParamSet,
    from: &str,
    to: &str,
) -> Result<TransferMap> {
    let mut map = TransferMap::default();
    for part in ["weight", "bias"] {
        let t = src.get(&format!("{from}.{part}")).map_err(|_| {
            Error::MissingPrerequisite(format!("transfer source has no layer `{from}`"))
        })?;
        let name = format!("{to}.{part}");
        dst.unfreeze(&name);
        dst.insert(name.clone(), t.clone());
        map.copied.push(name);
    }
    Ok(map)
}

/// Prepares `net` on top of `params` and trains it on one task.
pub fn train_network(
    mut params: ParamSet,
    net: Network,
    spec: &TaskSpec,
    cfg: &TrainConfig,
    progress: Option<&dyn Fn(&MetricsRow)>,
) -> Result<TrainOutcome> {
    let mut rng = init_rng(cfg, 0xC0DE);
    net.prepare(&mut params, &mut rng)?;
    let bindings = [TaskBinding {
        spec: spec.clone(),
        net,
    }];
    run_training(params, &bindings, Schedule::Pinned, cfg, progress)
}

/// Trains composition layers on frozen skills for one task, optionally starting
/// from the composition layers of `transfer`.
pub fn train_composition(
    skills: &ParamSet,
    spec: &TaskSpec,
    cfg: &TrainConfig,
    transfer: Option<&ParamSet>,
    progress: Option<&dyn Fn(&MetricsRow)>,
) -> Result<TrainOutcome> {
    let mut params = skills.clone();
    if let Some(src) = transfer {
        transfer_layers(&mut params, src)?;
    }
    train_network(params, Network::Tree(build_tree(spec)), spec, cfg, progress)
}

/// One composition layer shared by several tasks of the same template; episodes cycle
/// through the tasks and each task keeps its own value head.
pub fn train_multitask_composition(
    skills: &ParamSet,
    specs: &[TaskSpec],
    cfg: &TrainConfig,
    progress: Option<&dyn Fn(&MetricsRow)>,
) -> Result<TrainOutcome> {
    let first = specs
        .first()
        .ok_or_else(|| Error::Config("multitask composition needs at least one task".into()))?;
    if let Some(bad) = specs
        .iter()
        .find(|s| s.template.kind() != first.template.kind())
    {
        return Err(Error::Config(format!(
            "tasks must share one template: `{}` is {:?} but `{}` is {:?}",
            first.formula,
            first.template.kind(),
            bad.formula,
            bad.template.kind()
        )));
    }
    let mut params = skills.clone();
    let mut rng = init_rng(cfg, 0xC0DE);
    let mut bindings = Vec::new();
    for spec in specs {
        let net = Network::Tree(build_tree(spec));
        net.prepare(&mut params, &mut rng)?;
        bindings.push(TaskBinding {
            spec: spec.clone(),
            net,
        });
    }
    run_training(params, &bindings, Schedule::RoundRobin, cfg, progress)
}
