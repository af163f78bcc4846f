//! Experiment configuration files (TOML).
//!
//! ```toml
//! version = 1
//! name = "while_g_b"
//! method = "composenet"          # composenet | scratch | metacontroller |
//!                                # ablation_wrong_skills | ablation_policy_retrain
//! tasks = ["!g U b"]
//! skills_checkpoint = "../skills/checkpoint.ckpt"
//! output_dir = "runs/while_g_b"
//!
//! [train]
//! workers = 1
//! total_steps = 500000
//! seed = 0
//! ```
//!
//! Relative paths are resolved against the directory holding the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{build_tree, Skill};
use crate::tasklang::TaskSpec;
use crate::trainer::TrainConfig;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Composenet,
    Scratch,
    Metacontroller,
    AblationWrongSkills,
    AblationPolicyRetrain,
}

impl Method {
    pub fn needs_skills(self) -> bool {
        self != Method::Scratch
    }
}

/// Which CLI verb a config is validated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verb {
    TrainSkills,
    Train,
    TransferTrain,
    Eval,
    ZeroShot,
    AblateSkills,
    AblatePolicy,
    Plot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotConfig {
    /// Metrics files to draw.
    pub inputs: Vec<PathBuf>,
    /// Output SVG path.
    pub output: PathBuf,
    #[serde(default)]
    pub title: Option<String>,
}

fn default_trace_episodes() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub name: String,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub tasks: Vec<String>,
    /// Source tasks for multi-task composition training (`transfer-train`).
    #[serde(default)]
    pub transfer_tasks: Vec<String>,
    #[serde(default)]
    pub skills_checkpoint: Option<PathBuf>,
    /// Checkpoint whose composition layers initialize the tree.
    #[serde(default)]
    pub transfer_init: Option<PathBuf>,
    /// Skills placed at the tree leaves (slot order) for the wrong-skills ablation.
    #[serde(default)]
    pub substitute_skills: Vec<String>,
    /// Trunk under a fresh policy layer for the policy-retrain ablation.
    #[serde(default)]
    pub retrain_trunk: Option<String>,
    pub output_dir: PathBuf,
    /// Greedy evaluation episodes dumped as traces by `eval`.
    #[serde(default = "default_trace_episodes")]
    pub trace_episodes: usize,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub plot: Option<PlotConfig>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))
    }

    /// Reads a config file and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output_dir);
        self.skills_checkpoint.iter_mut().for_each(fix);
        self.transfer_init.iter_mut().for_each(fix);
        if let Some(plot) = &mut self.plot {
            plot.inputs.iter_mut().for_each(fix);
            fix(&mut plot.output);
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self)
            .map_err(|e| Error::Config(format!("config cannot be serialized: {e}")))
    }

    /// SHA-256 of the canonical serialization; identifies the exact run settings.
    pub fn hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.to_toml()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn specs(&self) -> Result<Vec<TaskSpec>> {
        self.tasks.iter().map(|t| t.parse()).collect()
    }

    pub fn transfer_specs(&self) -> Result<Vec<TaskSpec>> {
        self.transfer_tasks.iter().map(|t| t.parse()).collect()
    }

    pub fn substitutes(&self) -> Result<Vec<Skill>> {
        self.substitute_skills.iter().map(|s| s.parse()).collect()
    }

    /// Effective method for a verb; the ablation verbs imply their method.
    pub fn method_for(&self, verb: Verb) -> Method {
        match verb {
            Verb::AblateSkills => Method::AblationWrongSkills,
            Verb::AblatePolicy => Method::AblationPolicyRetrain,
            _ => self.method,
        }
    }

    /// Whether the verb reads the skills checkpoint.
    pub fn needs_skills(&self, verb: Verb) -> bool {
        match verb {
            Verb::Train | Verb::AblateSkills | Verb::AblatePolicy => {
                self.method_for(verb).needs_skills()
            }
            Verb::TransferTrain | Verb::ZeroShot => true,
            Verb::TrainSkills | Verb::Eval | Verb::Plot => false,
        }
    }

    /// Checks every field the verb needs and reports all problems at once.
    pub fn validate(&self, verb: Verb) -> Result<()> {
        let mut problems = Vec::new();
        if self.version != CONFIG_VERSION {
            problems.push(format!(
                "version: expected {CONFIG_VERSION}, got {}",
                self.version
            ));
        }
        if self.name.is_empty()
            || self
                .name
                .contains(|c: char| c == '/' || c == '\\' || c.is_whitespace())
        {
            problems.push(format!(
                "name: `{}` must be non-empty without slashes or spaces",
                self.name
            ));
        }
        if let Err(Error::Config(m)) = self.train.validate() {
            problems.push(format!("train: {m}"));
        }
        let mut specs = Vec::new();
        for (i, t) in self.tasks.iter().enumerate() {
            match t.parse::<TaskSpec>() {
                Ok(s) => specs.push(s),
                Err(e) => problems.push(format!("tasks[{i}]: {e}")),
            }
        }
        let mut transfer = Vec::new();
        for (i, t) in self.transfer_tasks.iter().enumerate() {
            match t.parse::<TaskSpec>() {
                Ok(s) => transfer.push(s),
                Err(e) => problems.push(format!("transfer_tasks[{i}]: {e}")),
            }
        }
        let method = self.method_for(verb);
        let needs_task = matches!(
            verb,
            Verb::Train | Verb::Eval | Verb::ZeroShot | Verb::AblateSkills | Verb::AblatePolicy
        );
        if needs_task && self.tasks.is_empty() {
            problems.push("tasks: at least one task expression is required".into());
        }
        if matches!(verb, Verb::Train | Verb::AblateSkills | Verb::AblatePolicy)
            && self.tasks.len() > 1
        {
            problems.push("tasks: training runs take exactly one task".into());
        }
        if self.needs_skills(verb) && self.skills_checkpoint.is_none() {
            problems.push(format!("skills_checkpoint: required for method {method:?}"));
        }
        if verb == Verb::ZeroShot && self.transfer_init.is_none() {
            problems.push(
                "transfer_init: zero-shot evaluation needs a trained composition checkpoint".into(),
            );
        }
        if verb == Verb::TransferTrain {
            if self.transfer_tasks.is_empty() {
                problems.push("transfer_tasks: at least one source task is required".into());
            }
            if let Some(first) = transfer.first() {
                if let Some(bad) = transfer
                    .iter()
                    .find(|s| s.template.kind() != first.template.kind())
                {
                    problems.push(format!(
                        "transfer_tasks: `{}` and `{}` have different templates",
                        first.formula, bad.formula
                    ));
                }
            }
        }
        let training = matches!(
            verb,
            Verb::Train | Verb::AblateSkills | Verb::AblatePolicy | Verb::Eval
        );
        if training && method == Method::AblationWrongSkills {
            match self.substitutes() {
                Err(e) => problems.push(format!("substitute_skills: {e}")),
                Ok(subs) => {
                    if let Some(spec) = specs.first() {
                        let leaves = build_tree(spec).leaves().len();
                        if subs.len() != leaves {
                            problems.push(format!(
                                "substitute_skills: task `{}` has {leaves} leaves, {} skills given",
                                spec.formula,
                                subs.len()
                            ));
                        }
                    }
                }
            }
        }
        if training && method == Method::AblationPolicyRetrain {
            match &self.retrain_trunk {
                None => {
                    problems.push("retrain_trunk: required for the policy-retrain ablation".into())
                }
                Some(s) => {
                    if let Err(e) = s.parse::<Skill>() {
                        problems.push(format!("retrain_trunk: {e}"));
                    }
                }
            }
        }
        if verb == Verb::Plot {
            match &self.plot {
                None => problems.push("plot: section required".into()),
                Some(p) if p.inputs.is_empty() => {
                    problems.push("plot.inputs: at least one metrics file".into())
                }
                Some(_) => {}
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("\n")))
        }
    }
}
