//! Experiment orchestration: configs, checkpoints, metrics files, ablations,
//! zero-shot evaluation, plots and traces.

mod checkpoint;
mod config;
mod metrics;
mod plot;
mod trace;

pub use checkpoint::{Checkpoint, CHECKPOINT_VERSION};
pub use config::{ExperimentConfig, Method, PlotConfig, Verb, CONFIG_VERSION};
pub use metrics::{metrics_path, read_metrics, reward_mode_label, MetricsRecord, MetricsWriter};
pub use plot::{build_chart, emit_plots, render_svg, Chart, Series};
pub use trace::{greedy_trace, scripted_trace};

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baselines::{metacontroller_network, scratch_network};
use crate::error::{Error, Result};
use crate::model::{build_tree, Network, PolicyRetrain, Skill};
use crate::numcore::ParamSet;
use crate::tasklang::TaskSpec;
use crate::trainer::{
    evaluate, mix_seed, train_multitask_composition, train_network, train_skills, transfer_layers,
    EvalStats, MetricsRow, TrainConfig, TrainOutcome,
};

pub const CHECKPOINT_FILE: &str = "checkpoint.ckpt";

pub fn checkpoint_path(dir: &Path) -> PathBuf {
    dir.join(CHECKPOINT_FILE)
}

/// Curve label used in metrics files and plot legends.
pub fn method_label(method: Method, cfg: &ExperimentConfig) -> String {
    match method {
        Method::Composenet => "composenet".into(),
        Method::Scratch => "scratch".into(),
        Method::Metacontroller => "metacontroller".into(),
        Method::AblationWrongSkills => format!("C({})", cfg.substitute_skills.join(",")),
        Method::AblationPolicyRetrain => {
            format!("retrain({})", cfg.retrain_trunk.clone().unwrap_or_default())
        }
    }
}

/// The network a method trains on a task.
pub fn network_for(method: Method, spec: &TaskSpec, cfg: &ExperimentConfig) -> Result<Network> {
    Ok(match method {
        Method::Composenet => Network::Tree(build_tree(spec)),
        Method::Scratch => scratch_network(spec),
        Method::Metacontroller => metacontroller_network(spec),
        Method::AblationWrongSkills => {
            Network::Tree(build_tree(spec).with_leaves(&cfg.substitutes()?)?)
        }
        Method::AblationPolicyRetrain => {
            let trunk: Skill = cfg
                .retrain_trunk
                .as_deref()
                .ok_or_else(|| Error::Config("retrain_trunk missing".into()))?
                .parse()?;
            Network::Retrain(PolicyRetrain::new(trunk, &spec.key()))
        }
    })
}

/// Trains the task's composition tree with its leaves replaced by `substitutes`
/// (slot order). Returns a warning when the substitutes equal the correct skills.
pub fn ablate_wrong_skills(
    spec: &TaskSpec,
    substitutes: &[Skill],
    skills: &ParamSet,
    cfg: &TrainConfig,
    progress: Option<&dyn Fn(&MetricsRow)>,
) -> Result<(TrainOutcome, Vec<String>)> {
    let tree = build_tree(spec);
    let mut warnings = Vec::new();
    if tree.leaves() == substitutes {
        warnings.push(format!(
            "substitute skills equal the correct skills of `{}`; this is the normal condition",
            spec.formula
        ));
    }
    let net = Network::Tree(tree.with_leaves(substitutes)?);
    Ok((
        train_network(skills.clone(), net, spec, cfg, progress)?,
        warnings,
    ))
}

/// A fresh policy layer and value head on one frozen trunk, no composition layer.
pub fn ablate_policy_retrain(
    spec: &TaskSpec,
    trunk: Skill,
    skills: &ParamSet,
    cfg: &TrainConfig,
    progress: Option<&dyn Fn(&MetricsRow)>,
) -> Result<TrainOutcome> {
    let net = Network::Retrain(PolicyRetrain::new(trunk, &spec.key()));
    train_network(skills.clone(), net, spec, cfg, progress)
}

/// Greedy evaluation of `spec`'s tree with composition layers taken from `transfer`
/// and no gradient updates. Neither input is modified.
pub fn zero_shot_eval(
    skills: &ParamSet,
    transfer: &ParamSet,
    spec: &TaskSpec,
    episodes: usize,
    seed: u64,
    max_steps: usize,
) -> Result<EvalStats> {
    let tree = build_tree(spec);
    let mut params = skills.clone();
    for layer in tree.layers() {
        for part in ["weight", "bias"] {
            let name = format!("{layer}.{part}");
            if !transfer.contains(&name) {
                return Err(Error::MissingPrerequisite(format!(
                    "transfer checkpoint lacks `{name}`"
                )));
            }
        }
    }
    transfer_layers(&mut params, transfer)?;
    // The value head does not affect greedy actions; it only has to exist.
    tree.prepare(
        &mut params,
        &mut ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x2E50)),
    )?;
    evaluate(
        &Network::Tree(tree),
        spec,
        &params,
        episodes,
        seed,
        max_steps,
    )
}

/// Same tree with freshly initialized composition layers, as a control condition.
pub fn random_init_eval(
    skills: &ParamSet,
    spec: &TaskSpec,
    episodes: usize,
    seed: u64,
    max_steps: usize,
) -> Result<EvalStats> {
    let tree = build_tree(spec);
    let mut params = skills.clone();
    tree.prepare(
        &mut params,
        &mut ChaCha8Rng::seed_from_u64(mix_seed(seed, 0xC0DE)),
    )?;
    evaluate(
        &Network::Tree(tree),
        spec,
        &params,
        episodes,
        seed,
        max_steps,
    )
}

/// What a run wrote and a short human-readable summary.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub checkpoint: Option<PathBuf>,
    pub metrics: Vec<PathBuf>,
    pub artifacts: Vec<PathBuf>,
    pub summary: Vec<String>,
    pub warnings: Vec<String>,
}

fn load_optional(path: &Option<PathBuf>) -> Result<Option<Checkpoint>> {
    path.as_deref().map(Checkpoint::load).transpose()
}

fn summarize(outcome: &TrainOutcome, report: &mut RunReport) {
    let mut tasks: Vec<&str> = outcome.curve.iter().map(|r| r.task.as_str()).collect();
    tasks.dedup();
    tasks.sort();
    tasks.dedup();
    for t in tasks {
        if let Some(r) = outcome.final_row(t) {
            report.summary.push(format!(
                "{t}: steps {} mean return {:.4} mean length {:.2} success {:.3}",
                r.steps, r.mean_return, r.mean_length, r.success_rate
            ));
        }
    }
}

fn save_outcome(
    outcome: &TrainOutcome,
    cfg: &ExperimentConfig,
    label: &str,
    hash: &str,
) -> Result<PathBuf> {
    let path = checkpoint_path(&cfg.output_dir);
    Checkpoint::new(outcome.params.clone())
        .with_meta("experiment", &cfg.name)
        .with_meta("method", label)
        .with_meta("seed", cfg.train.seed)
        .with_meta("steps", outcome.steps)
        .with_meta("updates", outcome.updates)
        .with_meta("config_sha256", hash)
        .save(&path)?;
    Ok(path)
}

/// Runs one CLI verb. The config is validated and prerequisite checkpoints are
/// loaded before any environment is created.
pub fn run(verb: Verb, cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate(verb)?;
    let mut report = RunReport::default();
    if verb == Verb::Plot {
        let plot = cfg.plot.as_ref().expect("validated");
        let title = plot.title.clone().unwrap_or_else(|| cfg.name.clone());
        let chart = emit_plots(&plot.inputs, &plot.output, &title)?;
        report.summary.push(format!(
            "{} series written to {}",
            chart.series.len(),
            plot.output.display()
        ));
        report.artifacts.push(plot.output.clone());
        return Ok(report);
    }

    let method = cfg.method_for(verb);
    let specs = cfg.specs()?;
    let skills = if cfg.needs_skills(verb) {
        load_optional(&cfg.skills_checkpoint)?
    } else {
        None
    };
    let transfer = load_optional(&cfg.transfer_init)?;
    let hash = cfg.hash()?;
    let seed = cfg.train.seed;
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;

    let writer = |label: &str, specs: &[TaskSpec]| {
        let modes = specs.iter().map(|s| (s.key(), s.reward_mode)).collect();
        MetricsWriter::create(
            &metrics_path(&cfg.output_dir, &cfg.name, seed),
            &cfg.name,
            label,
            &hash,
            modes,
        )
    };

    match verb {
        Verb::TrainSkills => {
            let skill_specs: Vec<TaskSpec> = Skill::all()
                .iter()
                .map(|s| s.task().parse())
                .collect::<Result<_>>()?;
            let w = writer("skills", &skill_specs)?;
            let outcome = train_skills(&cfg.train, Some(&|r: &MetricsRow| w.record(r)))?;
            report.metrics.push(w.finish()?);
            summarize(&outcome, &mut report);
            report.checkpoint = Some(save_outcome(&outcome, cfg, "skills", &hash)?);
        }
        Verb::Train | Verb::AblateSkills | Verb::AblatePolicy => {
            let spec = &specs[0];
            let label = method_label(method, cfg);
            let mut params = skills.map(|c| c.params).unwrap_or_default();
            if let Some(t) = &transfer {
                if method != Method::Composenet {
                    return Err(Error::Config(
                        "transfer_init: only the composenet method uses it".into(),
                    ));
                }
                transfer_layers(&mut params, &t.params)?;
            }
            if method == Method::AblationWrongSkills
                && build_tree(spec).leaves() == cfg.substitutes()?
            {
                report.warnings.push(format!(
                    "substitute skills equal the correct skills of `{}`; this is the normal condition",
                    spec.formula
                ));
            }
            let net = network_for(method, spec, cfg)?;
            let w = writer(&label, std::slice::from_ref(spec))?;
            let outcome = train_network(
                params,
                net,
                spec,
                &cfg.train,
                Some(&|r: &MetricsRow| w.record(r)),
            )?;
            report.metrics.push(w.finish()?);
            summarize(&outcome, &mut report);
            report.checkpoint = Some(save_outcome(&outcome, cfg, &label, &hash)?);
        }
        Verb::TransferTrain => {
            let sources = cfg.transfer_specs()?;
            let skills = skills.expect("validated").params;
            let w = writer("transfer", &sources)?;
            let outcome = train_multitask_composition(
                &skills,
                &sources,
                &cfg.train,
                Some(&|r: &MetricsRow| w.record(r)),
            )?;
            report.metrics.push(w.finish()?);
            summarize(&outcome, &mut report);
            report.checkpoint = Some(save_outcome(&outcome, cfg, "transfer", &hash)?);
            for spec in &specs {
                let z = zero_shot_eval(
                    &skills,
                    &outcome.params,
                    spec,
                    cfg.train.eval_episodes,
                    seed,
                    cfg.train.max_episode_steps,
                )?;
                report.summary.push(format!(
                    "zero-shot {}: mean return {:.4} mean length {:.2}",
                    spec.key(),
                    z.mean_return,
                    z.mean_length
                ));
            }
        }
        Verb::ZeroShot => {
            let skills = skills.expect("validated").params;
            let transfer = transfer.expect("validated").params;
            let path = cfg
                .output_dir
                .join(format!("{}.zero_shot.seed{seed}.csv", cfg.name));
            let mut w = csv::Writer::from_path(&path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            for spec in &specs {
                let (ep, ms) = (cfg.train.eval_episodes, cfg.train.max_episode_steps);
                let z = zero_shot_eval(&skills, &transfer, spec, ep, seed, ms)?;
                let c = random_init_eval(&skills, spec, ep, seed, ms)?;
                for (condition, s) in [("transfer", z), ("random_init", c)] {
                    w.serialize((
                        spec.key(),
                        condition,
                        seed,
                        s.mean_return,
                        s.mean_length,
                        s.success_rate,
                    ))
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                    report.summary.push(format!(
                        "{} {condition}: mean return {:.4} mean length {:.2}",
                        spec.key(),
                        s.mean_return,
                        s.mean_length
                    ));
                }
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
            report.artifacts.push(path);
        }
        Verb::Eval => {
            let ckpt = Checkpoint::load(&checkpoint_path(&cfg.output_dir))?;
            let label = method_label(method, cfg);
            let path = cfg
                .output_dir
                .join(format!("{}.eval.seed{seed}.csv", cfg.name));
            let mut w = csv::Writer::from_path(&path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            for spec in &specs {
                let net = network_for(method, spec, cfg)?;
                let (ep, ms) = (cfg.train.eval_episodes, cfg.train.max_episode_steps);
                let s = evaluate(&net, spec, &ckpt.params, ep, seed, ms)?;
                w.serialize((
                    spec.key(),
                    &label,
                    seed,
                    s.mean_return,
                    s.mean_length,
                    s.success_rate,
                ))
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                report.summary.push(format!(
                    "{}: mean return {:.4} mean length {:.2} success {:.3}",
                    spec.key(),
                    s.mean_return,
                    s.mean_length,
                    s.success_rate
                ));
                for i in 0..cfg.trace_episodes {
                    let text = greedy_trace(&net, spec, &ckpt.params, seed, i, ms)?;
                    let tp = cfg
                        .output_dir
                        .join("traces")
                        .join(format!("{}.seed{seed}.ep{i}.txt", spec.key()));
                    std::fs::create_dir_all(tp.parent().expect("has parent"))
                        .map_err(|e| Error::io(&tp, e))?;
                    std::fs::write(&tp, text).map_err(|e| Error::io(&tp, e))?;
                    report.artifacts.push(tp);
                }
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
            report.artifacts.push(path);
        }
        Verb::Plot => unreachable!("handled above"),
    }
    Ok(report)
}
