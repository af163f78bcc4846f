use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::model::{Eager, ScratchAgent, INPUT_DIM};
use crate::numcore::{softmax, Tensor};

#[test]
fn returns_single_terminal_transition() {
    let (r, a) = compute_returns_advantages(&[1.0], &[0.0], 0.0, 0.99);
    assert_eq!(r, vec![1.0]);
    assert_eq!(a, vec![1.0]);
}

#[test]
fn returns_hand_recursion() {
    let (r, _) = compute_returns_advantages(&[0.0, 0.0, 1.0], &[0.0; 3], 0.0, 0.99);
    let expect = [0.9801f32, 0.99, 1.0];
    for (x, e) in r.iter().zip(expect) {
        assert!((x - e).abs() < 1e-6, "{r:?}");
    }
}

#[test]
fn returns_zero_rewards_zero_bootstrap() {
    let (r, a) = compute_returns_advantages(&[0.0; 5], &[0.5; 5], 0.0, 0.99);
    assert!(r.iter().all(|&x| x == 0.0));
    assert!(a.iter().all(|&x| x == -0.5));
}

proptest! {
    #[test]
    fn returns_match_direct_summation(
        rewards in proptest::collection::vec(-1.0f32..1.0, 1..25),
        bootstrap in -2.0f32..2.0,
        gamma in 0.5f32..=1.0,
    ) {
        let values = vec![0.0; rewards.len()];
        let (r, _) = compute_returns_advantages(&rewards, &values, bootstrap, gamma);
        let n = rewards.len();
        for t in 0..n {
            let mut direct = (gamma as f64).powi((n - t) as i32) * bootstrap as f64;
            for (k, &rk) in rewards[t..].iter().enumerate() {
                direct += (gamma as f64).powi(k as i32) * rk as f64;
            }
            prop_assert!((r[t] as f64 - direct).abs() < 1e-4, "t={} {} vs {}", t, r[t], direct);
        }
    }
}

fn scratch_params(seed: u64) -> (Network, ParamSet) {
    let net = Network::Scratch(ScratchAgent::new("collect_r"));
    let mut params = ParamSet::new();
    net.prepare(&mut params, &mut ChaCha8Rng::seed_from_u64(seed))
        .unwrap();
    (net, params)
}

fn sparse_obs(rng: &mut ChaCha8Rng, n: usize) -> Vec<f32> {
    let mut obs = vec![0.0; n * INPUT_DIM];
    for row in obs.chunks_exact_mut(INPUT_DIM) {
        for v in [1.0, 0.3, 0.5, 0.7] {
            row[rng.gen_range(0..INPUT_DIM)] = v;
        }
    }
    obs
}

#[test]
fn uniform_policy_entropy_is_ln4_per_step() {
    let (net, mut params) = scratch_params(1);
    let w = params
        .get("scratch.policy.weight")
        .unwrap()
        .shape()
        .to_vec();
    params.insert("scratch.policy.weight", Tensor::zeros(&w));
    params.insert("scratch.policy.bias", Tensor::zeros(&[4]));
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let batch = RolloutBatch {
        obs: sparse_obs(&mut rng, 3),
        actions: vec![0, 1, 2],
        rewards: vec![0.0; 3],
        dones: vec![false; 3],
        values: vec![0.0; 3],
        log_probs: vec![0.25f32.ln(); 3],
        bootstrap: 0.0,
        binding: 0,
    };
    let coef = LossCoefficients {
        value: 0.5,
        entropy: 0.01,
    };
    let (_, parts) = rollout_gradients(&net, &params, &batch, 0.99, coef).unwrap();
    assert!(
        (parts.entropy - 3.0 * 4f32.ln()).abs() < 1e-5,
        "{}",
        parts.entropy
    );
}

#[test]
fn zero_advantage_and_exact_values_leave_only_entropy() {
    let (net, params) = scratch_params(3);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let obs = sparse_obs(&mut rng, 4);
    let x = Tensor::new(vec![4, INPUT_DIM], obs.clone()).unwrap();
    let (_, v) = net.forward(&mut Eager, &params, &x).unwrap();
    let returns = v.data().to_vec();
    let mut tape = crate::numcore::GradTape::new();
    let coef = LossCoefficients {
        value: 0.5,
        entropy: 0.01,
    };
    let (loss, parts) = actor_critic_loss(
        &mut tape,
        &net,
        &params,
        x,
        &[0, 1, 2, 3],
        &returns,
        &[0.0; 4],
        coef,
    )
    .unwrap();
    assert_eq!(parts.policy, 0.0);
    assert!(parts.value.abs() < 1e-12);
    assert!((parts.total + 0.01 * parts.entropy).abs() < 1e-6);
    let grads = tape.backward(loss).unwrap();
    // Value head only sees the squared error, whose gradient vanishes at an exact fit.
    assert!(grads["value.collect_r.weight"]
        .data()
        .iter()
        .all(|g| g.abs() < 1e-6));
}

#[test]
fn policy_gradient_raises_probability_of_rewarded_action() {
    let (net, mut params) = scratch_params(5);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let obs = sparse_obs(&mut rng, 1);
    let x = Tensor::new(vec![1, INPUT_DIM], obs.clone()).unwrap();
    let prob0 = |params: &ParamSet| {
        let (logits, _) = net.forward(&mut Eager, params, &x).unwrap();
        softmax(&logits).data()[0]
    };
    let before = prob0(&params);
    let mut opt = TrainConfig::default().optimizer();
    for _ in 0..50 {
        let batch = RolloutBatch {
            obs: obs.clone(),
            actions: vec![0],
            rewards: vec![1.0],
            dones: vec![true],
            values: vec![0.0],
            log_probs: vec![0.0],
            bootstrap: 0.0,
            binding: 0,
        };
        let coef = LossCoefficients {
            value: 0.5,
            entropy: 0.0,
        };
        let (g, _) = rollout_gradients(&net, &params, &batch, 0.99, coef).unwrap();
        opt.step(&mut params, &g).unwrap();
    }
    let after = prob0(&params);
    assert!(after > before + 0.1, "{before} -> {after}");
}
