//! The two comparison agents: a single network trained from scratch and a
//! meta-controller that picks one pre-trained skill every step.

use crate::error::Result;
use crate::model::{build_tree, MetaController, Network, ScratchAgent, Skill};
use crate::numcore::ParamSet;
use crate::tasklang::TaskSpec;
use crate::trainer::{train_network, MetricsRow, TrainConfig, TrainOutcome};

/// Skills a task's composition tree reads, in slot order.
pub fn relevant_skills(spec: &TaskSpec) -> Vec<Skill> {
    build_tree(spec).leaves()
}

pub fn scratch_network(spec: &TaskSpec) -> Network {
    Network::Scratch(ScratchAgent::new(&spec.key()))
}

pub fn metacontroller_network(spec: &TaskSpec) -> Network {
    Network::Meta(MetaController::new(relevant_skills(spec), &spec.key()))
}

/// Actor-critic on the composed task from a random initialization.
pub fn scratch_train(
    spec: &TaskSpec,
    cfg: &TrainConfig,
    progress: Option<&dyn Fn(&MetricsRow)>,
) -> Result<TrainOutcome> {
    train_network(ParamSet::new(), scratch_network(spec), spec, cfg, progress)
}

/// Trains a selector over the task's relevant skills; the chosen skill's frozen
/// policy samples the environment action.
pub fn metacontroller_train(
    spec: &TaskSpec,
    skills: &ParamSet,
    cfg: &TrainConfig,
    progress: Option<&dyn Fn(&MetricsRow)>,
) -> Result<TrainOutcome> {
    train_network(
        skills.clone(),
        metacontroller_network(spec),
        spec,
        cfg,
        progress,
    )
}
