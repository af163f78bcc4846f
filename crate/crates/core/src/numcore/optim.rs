use std::collections::BTreeMap;

use super::{GradMap, ParamSet};
use crate::error::{Error, Result};

/// RMSProp with an optional global-norm gradient clip.
///
/// Per coordinate: `ms ← decay·ms + (1−decay)·g²`, `θ ← θ − lr·g / (√ms + ε)`.
/// The second-moment state is keyed by parameter name and persists across calls.
#[derive(Debug, Clone)]
pub struct RmsProp {
    pub lr: f32,
    pub decay: f32,
    pub epsilon: f32,
    pub max_grad_norm: Option<f32>,
    square_avg: BTreeMap<String, Vec<f32>>,
}

/// Diagnostics from one optimizer step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    pub grad_norm: f32,
    pub clipped: bool,
}

impl Default for RmsProp {
    fn default() -> Self {
        RmsProp::new(7e-4, 0.99, 1e-5, Some(40.0))
    }
}

impl RmsProp {
    pub fn new(lr: f32, decay: f32, epsilon: f32, max_grad_norm: Option<f32>) -> Self {
        RmsProp {
            lr,
            decay,
            epsilon,
            max_grad_norm,
            square_avg: BTreeMap::new(),
        }
    }

    /// Applies one update. Validation happens before any parameter is touched, so a
    /// rejected step leaves `params` and the optimizer state unchanged.
    pub fn step(&mut self, params: &mut ParamSet, grads: &GradMap) -> Result<StepStats> {
        let mut sq = 0.0f64;
        for (name, g) in grads {
            if params.is_frozen(name) {
                return Err(Error::Usage(format!(
                    "gradient supplied for frozen parameter `{name}`"
                )));
            }
            let p = params.get(name).map_err(|_| {
                Error::Usage(format!("gradient supplied for unknown parameter `{name}`"))
            })?;
            if p.shape() != g.shape() {
                return Err(Error::Shape(format!(
                    "gradient for `{name}` has shape {:?}, parameter has {:?}",
                    g.shape(),
                    p.shape()
                )));
            }
            if let Some(bad) = g.data().iter().position(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!(
                    "non-finite gradient in `{name}` at flat index {bad} ({})",
                    g.data()[bad]
                )));
            }
            sq += g.sq_norm();
        }
        let grad_norm = sq.sqrt() as f32;
        let scale = match self.max_grad_norm {
            Some(max) if grad_norm > max => max / grad_norm,
            _ => 1.0,
        };
        for (name, g) in grads {
            let p = params.get_mut(name).expect("validated above");
            let ms = self
                .square_avg
                .entry(name.clone())
                .or_insert_with(|| vec![0.0; g.len()]);
            for ((w, m), &gi) in p.data_mut().iter_mut().zip(ms.iter_mut()).zip(g.data()) {
                let gi = gi * scale;
                *m = self.decay * *m + (1.0 - self.decay) * gi * gi;
                *w -= self.lr * gi / (m.sqrt() + self.epsilon);
            }
        }
        Ok(StepStats {
            grad_norm,
            clipped: scale < 1.0,
        })
    }
}
