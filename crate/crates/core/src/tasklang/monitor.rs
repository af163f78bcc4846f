use super::{RewardMode, TaskSpec, Template};
use crate::error::{Error, Result};
use crate::gridworld::{EventSet, Role};

pub const SURVIVAL_REWARD: f32 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonitorStatus {
    Running,
    Success,
    Failure,
}

/// Per-episode reward monitor. Collection flags latch; collisions are instantaneous.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonitorState {
    pub collected: [bool; 3],
    pub status: MonitorStatus,
}

impl Default for MonitorState {
    fn default() -> Self {
        MonitorState {
            collected: [false; 3],
            status: MonitorStatus::Running,
        }
    }
}

impl MonitorState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_done(&self) -> bool {
        self.status != MonitorStatus::Running
    }

    /// Consumes one tick of events and returns `(reward, done)`.
    pub fn step(
        &mut self,
        spec: &TaskSpec,
        events: &EventSet,
        truncated: bool,
    ) -> Result<(f32, bool)> {
        if self.is_done() {
            return Err(Error::Usage(
                "monitor stepped after the episode ended".into(),
            ));
        }
        let fresh: [bool; 3] = std::array::from_fn(|i| {
            events.collected[i] && spec.roles[i] == Role::Target && !self.collected[i]
        });
        let had = self.collected;
        for (latch, f) in self.collected.iter_mut().zip(fresh) {
            *latch |= f;
        }
        let caught = spec.enemies().any(|c| events.colliding[c.index()]);

        let (reward, status) = match spec.reward_mode {
            RewardMode::Survival => {
                if caught {
                    (0.0, MonitorStatus::Failure)
                } else if truncated {
                    (SURVIVAL_REWARD, MonitorStatus::Success)
                } else {
                    (SURVIVAL_REWARD, MonitorStatus::Running)
                }
            }
            RewardMode::Goal => {
                let got = |c: crate::gridworld::Color| fresh[c.index()];
                let (success, impossible) = match spec.template {
                    Template::Collect(c)
                    | Template::While { collect: c, .. }
                    | Template::EvadeBothWhile { collect: c, .. } => (got(c), false),
                    Template::Or(a, b)
                    | Template::WhileEither {
                        collect: (a, b), ..
                    } => (got(a) || got(b), false),
                    Template::Then { first, second } => {
                        let first_done = had[first.index()] || got(first);
                        (first_done && got(second), !first_done && got(second))
                    }
                    Template::Evade(_) | Template::AndEvade(..) => (false, false),
                };
                if success {
                    (1.0, MonitorStatus::Success)
                } else if caught {
                    (-1.0, MonitorStatus::Failure)
                } else if impossible || truncated {
                    (0.0, MonitorStatus::Failure)
                } else {
                    (0.0, MonitorStatus::Running)
                }
            }
        };
        self.status = status;
        Ok((reward, self.is_done()))
    }
}
