/// Discounted n-step returns and advantages for one rollout.
///
/// `R_t = r_t + γ·R_{t+1}` with `R_T = bootstrap` (0 when the rollout ended the
/// episode), and `A_t = R_t − V(s_t)`.
pub fn compute_returns_advantages(
    rewards: &[f32],
    values: &[f32],
    bootstrap: f32,
    gamma: f32,
) -> (Vec<f32>, Vec<f32>) {
    assert_eq!(rewards.len(), values.len(), "one value estimate per reward");
    let mut returns = vec![0.0f32; rewards.len()];
    let mut next = bootstrap;
    for t in (0..rewards.len()).rev() {
        next = rewards[t] + gamma * next;
        returns[t] = next;
    }
    let adv = returns.iter().zip(values).map(|(r, v)| r - v).collect();
    (returns, adv)
}
