//! Seeded episode simulation and Monte Carlo return estimation.

use rand::Rng;

use super::{Compiled, DeterministicPolicy, MomdpError, Successor, TabularMomdp};
use crate::rng::{stream_rng, STREAM_ENV};
use crate::scalar::Scalar;
use crate::vector::ObjectiveVector;

/// One transition of a recorded episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeStep<F> {
    pub state: String,
    pub action: String,
    pub reward: ObjectiveVector<F>,
    pub successor: Successor,
}

/// A full trajectory with its undiscounted return.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult<F> {
    pub steps: Vec<EpisodeStep<F>>,
    pub return_total: ObjectiveVector<F>,
    /// True when the horizon cut the episode off in a non-terminal state.
    pub truncated: bool,
}

/// Runs one episode under `policy`, recording every step. Episodes truncate
/// at the environment horizon.
pub fn simulate_episode<F: Scalar, R: Rng>(
    env: &TabularMomdp<F>,
    policy: &DeterministicPolicy,
    rng: &mut R,
) -> Result<EpisodeResult<F>, MomdpError> {
    let compiled = env.compile()?;
    let actions = compiled.resolve_policy(policy)?;
    Ok(run_episode(&compiled, &actions, rng))
}

pub(crate) fn run_episode<F: Scalar, R: Rng>(
    compiled: &Compiled<'_, F>,
    actions: &[usize],
    rng: &mut R,
) -> EpisodeResult<F> {
    let mut steps = Vec::with_capacity(compiled.horizon());
    let mut total = ObjectiveVector::zeros(compiled.num_objectives());
    let mut state = compiled.start;
    let mut truncated = false;
    for depth in 0..compiled.horizon() {
        let a = actions[state];
        let outcome_idx = compiled.sample(state, a, rng);
        let outcome = &compiled.states[state].actions[a].outcomes[outcome_idx];
        total.add_assign(&outcome.reward);
        let def = &compiled.env.states[state];
        steps.push(EpisodeStep {
            state: def.id.clone(),
            action: def.actions[a].name.clone(),
            reward: outcome.reward.clone(),
            successor: match outcome.successor {
                None => Successor::Terminal,
                Some(s) => Successor::State(compiled.env.states[s].id.clone()),
            },
        });
        match outcome.successor {
            None => break,
            Some(next) => {
                state = next;
                if depth + 1 == compiled.horizon() {
                    truncated = true;
                }
            }
        }
    }
    EpisodeResult { steps, return_total: total, truncated }
}

/// Sample mean and per-objective standard error of the episodic return over
/// `n_episodes` seeded episodes. Episode `i` draws from the environment
/// stream of `(seed, i)`, so results are reproducible and episodes may be
/// farmed out in any order.
pub fn monte_carlo_return<F: Scalar>(
    env: &TabularMomdp<F>,
    policy: &DeterministicPolicy,
    n_episodes: u64,
    seed: u64,
) -> Result<(ObjectiveVector<F>, ObjectiveVector<F>), MomdpError> {
    assert!(n_episodes >= 1, "n_episodes must be at least 1");
    let compiled = env.compile()?;
    let actions = compiled.resolve_policy(policy)?;
    let m = compiled.num_objectives();

    // Welford's online mean/M2; exact for constant samples, so deterministic
    // policies report stderr exactly zero.
    let mut mean = vec![F::zero(); m];
    let mut m2 = vec![F::zero(); m];
    let mut episode_return = vec![F::zero(); m];
    for episode in 0..n_episodes {
        let mut rng = stream_rng(seed, episode, STREAM_ENV);
        episode_return.iter_mut().for_each(|x| *x = F::zero());
        let mut state = compiled.start;
        for _ in 0..compiled.horizon() {
            let a = actions[state];
            let outcome_idx = compiled.sample(state, a, &mut rng);
            let outcome = &compiled.states[state].actions[a].outcomes[outcome_idx];
            for (acc, r) in episode_return.iter_mut().zip(outcome.reward.iter()) {
                *acc = *acc + *r;
            }
            match outcome.successor {
                None => break,
                Some(next) => state = next,
            }
        }
        let n = F::from_u64(episode + 1).expect("episode count fits scalar");
        for i in 0..m {
            let delta = episode_return[i] - mean[i];
            mean[i] = mean[i] + delta / n;
            m2[i] = m2[i] + delta * (episode_return[i] - mean[i]);
        }
    }

    let stderr = if n_episodes == 1 {
        ObjectiveVector::zeros(m)
    } else {
        let n = F::from_u64(n_episodes).expect("episode count fits scalar");
        let n_minus_one = F::from_u64(n_episodes - 1).expect("episode count fits scalar");
        ObjectiveVector::new(
            m2.iter().map(|v| (v.max(F::zero()) / n_minus_one / n).sqrt()).collect(),
        )
    };
    Ok((ObjectiveVector::new(mean), stderr))
}
