use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;
use std::sync::{Arc, RwLock};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    evaluate, mix_seed, rollout_gradients, train_env_seed, MetricsRow, RolloutBatch, Schedule,
    TaskBinding, TrainConfig, TrainOutcome,
};
use crate::error::{Error, Result};
use crate::gridworld::{reset, GridConfig, Observation, WorldState};
use crate::model::{input_tensor, Eager};
use crate::numcore::{entropy, sample_categorical, softmax, GradMap, ParamSet};
use crate::tasklang::MonitorState;

struct Worker {
    id: usize,
    binding: usize,
    episode: u64,
    env: WorldState,
    monitor: MonitorState,
    obs: Observation,
    rng: ChaCha8Rng,
}

fn grid_for(binding: &TaskBinding, cfg: &TrainConfig) -> GridConfig {
    let mut g = binding.spec.grid_config();
    g.max_steps = cfg.max_episode_steps;
    g
}

impl Worker {
    fn new(id: usize, bindings: &[TaskBinding], cfg: &TrainConfig) -> Worker {
        let binding = id % bindings.len();
        let env = reset(
            &grid_for(&bindings[binding], cfg),
            train_env_seed(cfg.seed, id, 0),
        );
        Worker {
            id,
            binding,
            episode: 0,
            obs: env.render(),
            env,
            monitor: MonitorState::new(),
            rng: ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, 0xA11CE + id as u64)),
        }
    }

    fn next_episode(&mut self, bindings: &[TaskBinding], schedule: Schedule, cfg: &TrainConfig) {
        self.episode += 1;
        if schedule == Schedule::RoundRobin {
            self.binding = (self.binding + 1) % bindings.len();
        }
        self.env = reset(
            &grid_for(&bindings[self.binding], cfg),
            train_env_seed(cfg.seed, self.id, self.episode),
        );
        self.obs = self.env.render();
        self.monitor = MonitorState::new();
    }

    /// Up to `rollout_len` transitions of the current episode. Returns the batch and
    /// the summed policy entropy over its steps.
    fn rollout(
        &mut self,
        params: &ParamSet,
        bindings: &[TaskBinding],
        schedule: Schedule,
        cfg: &TrainConfig,
    ) -> Result<(RolloutBatch, f64)> {
        let b = &bindings[self.binding];
        let mut batch = RolloutBatch {
            binding: self.binding,
            ..RolloutBatch::default()
        };
        let mut ent = 0.0f64;
        let mut ended = false;
        for _ in 0..cfg.rollout_len {
            let x = input_tensor(&self.obs)?;
            let (logits, value) = b.net.forward(&mut Eager, params, &x)?;
            let probs = softmax(&logits).into_data();
            if !probs.iter().all(|p| p.is_finite()) {
                return Err(Error::Numeric(format!(
                    "non-finite policy output on task {}",
                    b.spec.key()
                )));
            }
            ent += entropy(&probs) as f64;
            let choice = sample_categorical(&probs, &mut self.rng);
            let action = b.net.env_action(params, &self.obs, choice, &mut self.rng)?;
            let step = self.env.step(action)?;
            let (reward, done) = self.monitor.step(&b.spec, &step.events, step.truncated)?;
            batch.obs.extend_from_slice(x.data());
            batch.actions.push(choice);
            batch.rewards.push(reward);
            batch.dones.push(done);
            batch.values.push(value.data()[0]);
            batch
                .log_probs
                .push(probs[choice].max(f32::MIN_POSITIVE).ln());
            self.obs = step.observation;
            if done {
                ended = true;
                break;
            }
        }
        if ended {
            batch.bootstrap = 0.0;
            self.next_episode(bindings, schedule, cfg);
        } else {
            let x = input_tensor(&self.obs)?;
            let (_, value) = b.net.forward(&mut Eager, params, &x)?;
            batch.bootstrap = value.data()[0];
        }
        Ok((batch, ent))
    }
}

fn add_grads(acc: &mut GradMap, g: GradMap) {
    for (k, v) in g {
        match acc.get_mut(&k) {
            Some(a) => a
                .data_mut()
                .iter_mut()
                .zip(v.data())
                .for_each(|(x, y)| *x += y),
            None => {
                acc.insert(k, v);
            }
        }
    }
}

/// Bookkeeping shared by both execution modes: evaluation schedule, curve rows and
/// the plateau stop rule.
struct Recorder<'a> {
    cfg: &'a TrainConfig,
    bindings: &'a [TaskBinding],
    start: Instant,
    next_eval: u64,
    curve: Vec<MetricsRow>,
    ent_sum: f64,
    ent_count: usize,
    best: f64,
    stale: usize,
    progress: Option<&'a dyn Fn(&MetricsRow)>,
}

impl<'a> Recorder<'a> {
    fn record_rollout(&mut self, ent: f64, n: usize) {
        self.ent_sum += ent;
        self.ent_count += n;
    }

    /// Evaluates every task; returns true when the plateau rule asks to stop.
    fn evaluate(&mut self, params: &ParamSet, steps: u64) -> Result<bool> {
        let entropy = if self.ent_count > 0 {
            self.ent_sum / self.ent_count as f64
        } else {
            (4f64).ln()
        };
        self.ent_sum = 0.0;
        self.ent_count = 0;
        let mut total = 0.0;
        for b in self.bindings {
            let stats = evaluate(
                &b.net,
                &b.spec,
                params,
                self.cfg.eval_episodes,
                self.cfg.seed,
                self.cfg.max_episode_steps,
            )?;
            total += stats.mean_return;
            let row = MetricsRow {
                steps,
                task: b.spec.key(),
                mean_return: stats.mean_return,
                mean_length: stats.mean_length,
                success_rate: stats.success_rate,
                entropy,
                seed: self.cfg.seed,
                wall_clock_secs: self.start.elapsed().as_secs_f64(),
            };
            if let Some(p) = self.progress {
                p(&row);
            }
            self.curve.push(row);
        }
        let mean = total / self.bindings.len() as f64;
        if mean > self.best + self.cfg.plateau_delta {
            self.best = mean;
            self.stale = 0;
        } else {
            self.stale += 1;
        }
        Ok(self.cfg.plateau_patience > 0 && self.stale >= self.cfg.plateau_patience)
    }

    /// Runs due evaluations; returns true when training should stop early.
    fn maybe_evaluate(&mut self, params: &ParamSet, steps: u64) -> Result<bool> {
        if steps >= self.next_eval && steps < self.cfg.total_steps {
            while self.next_eval <= steps {
                self.next_eval += self.cfg.eval_interval;
            }
            return self.evaluate(params, steps);
        }
        Ok(false)
    }
}

/// Trains `params` on the given tasks. Parameters must already be prepared (all
/// present, pre-trained ones frozen). Evaluates at step 0, every `eval_interval`
/// environment steps and at the end.
pub fn run_training(
    params: ParamSet,
    bindings: &[TaskBinding],
    schedule: Schedule,
    cfg: &TrainConfig,
    progress: Option<&dyn Fn(&MetricsRow)>,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if bindings.is_empty() {
        return Err(Error::Config("no tasks to train on".into()));
    }
    let mut rec = Recorder {
        cfg,
        bindings,
        start: Instant::now(),
        next_eval: cfg.eval_interval,
        curve: Vec::new(),
        ent_sum: 0.0,
        ent_count: 0,
        best: f64::NEG_INFINITY,
        stale: 0,
        progress,
    };
    rec.evaluate(&params, 0)?;
    let (params, steps, updates) = match cfg.mode {
        super::ExecutionMode::Sync => run_sync(params, bindings, schedule, cfg, &mut rec)?,
        super::ExecutionMode::Async => run_async(params, bindings, schedule, cfg, &mut rec)?,
    };
    rec.evaluate(&params, steps)?;
    Ok(TrainOutcome {
        params,
        curve: rec.curve,
        steps,
        updates,
    })
}

fn run_sync(
    mut params: ParamSet,
    bindings: &[TaskBinding],
    schedule: Schedule,
    cfg: &TrainConfig,
    rec: &mut Recorder,
) -> Result<(ParamSet, u64, u64)> {
    let mut workers: Vec<Worker> = (0..cfg.workers)
        .map(|w| Worker::new(w, bindings, cfg))
        .collect();
    let mut opt = cfg.optimizer();
    let (mut steps, mut updates) = (0u64, 0u64);
    while steps < cfg.total_steps {
        let mut grads = GradMap::new();
        for w in workers.iter_mut() {
            let (batch, ent) = w.rollout(&params, bindings, schedule, cfg)?;
            rec.record_rollout(ent, batch.len());
            steps += batch.len() as u64;
            let (g, _) = rollout_gradients(
                &bindings[batch.binding].net,
                &params,
                &batch,
                cfg.gamma,
                cfg.coefficients(),
            )?;
            add_grads(&mut grads, g);
        }
        opt.step(&mut params, &grads)?;
        updates += 1;
        if rec.maybe_evaluate(&params, steps)? {
            break;
        }
    }
    Ok((params, steps, updates))
}

enum Msg {
    Grads {
        grads: GradMap,
        transitions: usize,
        entropy: f64,
    },
    Failed(Error),
}

fn run_async(
    mut params: ParamSet,
    bindings: &[TaskBinding],
    schedule: Schedule,
    cfg: &TrainConfig,
    rec: &mut Recorder,
) -> Result<(ParamSet, u64, u64)> {
    let snapshot = RwLock::new(Arc::new(params.clone()));
    let stop = AtomicBool::new(false);
    let mut opt = cfg.optimizer();
    let (mut steps, mut updates) = (0u64, 0u64);
    let (tx, rx) = mpsc::sync_channel::<Msg>(cfg.workers);
    let outcome: Result<()> = std::thread::scope(|scope| {
        for w in 0..cfg.workers {
            let tx = tx.clone();
            let (snapshot, stop) = (&snapshot, &stop);
            scope.spawn(move || {
                let mut worker = Worker::new(w, bindings, cfg);
                while !stop.load(Ordering::Relaxed) {
                    let current = Arc::clone(&snapshot.read().expect("snapshot lock poisoned"));
                    let msg = worker
                        .rollout(&current, bindings, schedule, cfg)
                        .and_then(|(batch, ent)| {
                            let net = &bindings[batch.binding].net;
                            let (g, _) = rollout_gradients(
                                net,
                                &current,
                                &batch,
                                cfg.gamma,
                                cfg.coefficients(),
                            )?;
                            Ok(Msg::Grads {
                                grads: g,
                                transitions: batch.len(),
                                entropy: ent,
                            })
                        })
                        .unwrap_or_else(Msg::Failed);
                    let failed = matches!(msg, Msg::Failed(_));
                    if tx.send(msg).is_err() || failed {
                        break;
                    }
                }
            });
        }
        drop(tx);
        let mut result = Ok(());
        while steps < cfg.total_steps {
            let Ok(msg) = rx.recv() else { break };
            match msg {
                Msg::Failed(e) => {
                    result = Err(e);
                    break;
                }
                Msg::Grads {
                    grads,
                    transitions,
                    entropy,
                } => {
                    rec.record_rollout(entropy, transitions);
                    steps += transitions as u64;
                    if let Err(e) = opt.step(&mut params, &grads) {
                        result = Err(e);
                        break;
                    }
                    updates += 1;
                    *snapshot.write().expect("snapshot lock poisoned") = Arc::new(params.clone());
                    match rec.maybe_evaluate(&params, steps) {
                        Ok(true) => break,
                        Ok(false) => {}
                        Err(e) => {
                            result = Err(e);
                            break;
                        }
                    }
                }
            }
        }
        stop.store(true, Ordering::Relaxed);
        // Drain so no worker stays blocked on a full channel.
        while rx.recv().is_ok() {}
        result
    });
    outcome?;
    Ok((params, steps, updates))
}
