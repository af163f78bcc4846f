use super::RolloutBatch;
use crate::error::{Error, Result};
use crate::model::{Network, Taped, INPUT_DIM};
use crate::numcore::{GradMap, GradTape, ParamSet, Tensor};

/// Per-rollout loss components (sums over the rollout).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossParts {
    pub policy: f32,
    pub value: f32,
    pub entropy: f32,
    pub total: f32,
    pub transitions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossCoefficients {
    pub value: f32,
    pub entropy: f32,
}

/// Records `−Σ log π(a_t|s_t)·A_t + c_v·Σ(R_t − V(s_t))² − c_e·Σ H(π(·|s_t))` on a tape.
/// Advantages and returns enter as constants.
pub fn actor_critic_loss(
    tape: &mut GradTape,
    net: &Network,
    params: &ParamSet,
    obs: Tensor,
    actions: &[usize],
    returns: &[f32],
    advantages: &[f32],
    coef: LossCoefficients,
) -> Result<(crate::numcore::Var, LossParts)> {
    let n = actions.len();
    let mut b = Taped { tape };
    let x = b.tape.constant(obs);
    let (logits, values) = net.forward(&mut b, params, &x)?;
    let tape = b.tape;
    let logp = tape.log_softmax(logits);
    let picked = tape.gather(logp, actions)?;
    let adv = tape.constant(Tensor::from_vec(advantages.to_vec()));
    let weighted = tape.mul(picked, adv)?;
    let pg = tape.sum(weighted);
    let policy_loss = tape.scale(pg, -1.0);

    let v = tape.flatten(values);
    let ret = tape.constant(Tensor::from_vec(returns.to_vec()));
    let diff = tape.sub(ret, v)?;
    let sq = tape.square(diff);
    let sq = tape.sum(sq);
    let value_loss = tape.scale(sq, coef.value);

    let p = tape.exp(logp);
    let plogp = tape.mul(p, logp)?;
    let neg_h = tape.sum(plogp);
    let ent_term = tape.scale(neg_h, coef.entropy);

    let total = tape.add(policy_loss, value_loss)?;
    let total = tape.add(total, ent_term)?;

    let parts = LossParts {
        policy: tape.value(policy_loss).data()[0],
        value: tape.value(value_loss).data()[0],
        entropy: -tape.value(neg_h).data()[0],
        total: tape.value(total).data()[0],
        transitions: n,
    };
    if !parts.total.is_finite() {
        return Err(Error::Numeric(format!(
            "non-finite loss (policy {}, value {}, entropy {})",
            parts.policy, parts.value, parts.entropy
        )));
    }
    Ok((total, parts))
}

/// Gradients of the actor-critic loss for one rollout.
pub fn rollout_gradients(
    net: &Network,
    params: &ParamSet,
    batch: &RolloutBatch,
    gamma: f32,
    coef: LossCoefficients,
) -> Result<(GradMap, LossParts)> {
    let (returns, adv) =
        super::compute_returns_advantages(&batch.rewards, &batch.values, batch.bootstrap, gamma);
    let obs = Tensor::new(vec![batch.actions.len(), INPUT_DIM], batch.obs.clone())?;
    let mut tape = GradTape::new();
    let (loss, parts) = actor_critic_loss(
        &mut tape,
        net,
        params,
        obs,
        &batch.actions,
        &returns,
        &adv,
        coef,
    )?;
    Ok((tape.backward(loss)?, parts))
}
