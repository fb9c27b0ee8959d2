//! Exact policy evaluation by backward induction over the horizon.

use super::{Compiled, DeterministicPolicy, MomdpError, TabularMomdp};
use crate::scalar::Scalar;
use crate::vector::ObjectiveVector;

/// Exact expected undiscounted episodic return of `policy`.
///
/// Errors when the horizon does not guarantee termination under the policy
/// (some trajectory would be truncated), naming an offending cycle or path.
pub fn expected_return_exact<F: Scalar>(
    env: &TabularMomdp<F>,
    policy: &DeterministicPolicy,
) -> Result<ObjectiveVector<F>, MomdpError> {
    let compiled = env.compile()?;
    let actions = compiled.resolve_policy(policy)?;
    check_termination(&compiled, &actions)?;
    Ok(evaluate(&compiled, &actions))
}

pub(crate) fn evaluate<F: Scalar>(compiled: &Compiled<'_, F>, actions: &[usize]) -> ObjectiveVector<F> {
    let m = compiled.num_objectives();
    let n = compiled.states.len();
    // Value-to-go with d steps already taken; beyond the horizon it is zero.
    let mut next = vec![ObjectiveVector::zeros(m); n];
    let mut current = vec![ObjectiveVector::zeros(m); n];
    for _ in (0..compiled.horizon()).rev() {
        for s in 0..n {
            let action = &compiled.states[s].actions[actions[s]];
            let mut value = action.mean_reward.clone();
            for outcome in &action.outcomes {
                if let Some(successor) = outcome.successor {
                    value.add_scaled(outcome.probability, &next[successor]);
                }
            }
            current[s] = value;
        }
        std::mem::swap(&mut current, &mut next);
    }
    next[compiled.start].clone()
}

/// Verifies every trajectory under `actions` reaches a terminal outcome
/// within the horizon. On failure reconstructs a witness trajectory and
/// reports the cycle it contains (or the path itself for cycle-free cases).
pub(crate) fn check_termination<F: Scalar>(
    compiled: &Compiled<'_, F>,
    actions: &[usize],
) -> Result<(), MomdpError> {
    let n = compiled.states.len();
    let horizon = compiled.horizon();
    // predecessors[d][s] = some state at depth d-1 leading to s at depth d
    let mut reachable = vec![vec![false; n]; horizon + 1];
    let mut predecessor = vec![vec![usize::MAX; n]; horizon + 1];
    reachable[0][compiled.start] = true;
    for depth in 0..horizon {
        for s in 0..n {
            if !reachable[depth][s] {
                continue;
            }
            for outcome in &compiled.states[s].actions[actions[s]].outcomes {
                if let Some(successor) = outcome.successor {
                    if !reachable[depth + 1][successor] {
                        reachable[depth + 1][successor] = true;
                        predecessor[depth + 1][successor] = s;
                    }
                }
            }
        }
    }
    let Some(stuck) = (0..n).find(|&s| reachable[horizon][s]) else {
        return Ok(());
    };

    let mut path = vec![stuck];
    let mut state = stuck;
    for depth in (1..=horizon).rev() {
        state = predecessor[depth][state];
        path.push(state);
    }
    path.reverse();
    let names: Vec<&str> = path.iter().map(|&s| compiled.env.states[s].id.as_str()).collect();

    // A repeated state in the witness exposes the cycle.
    let witness = 'cycle: {
        for i in 0..names.len() {
            for j in i + 1..names.len() {
                if names[i] == names[j] {
                    break 'cycle format!("cycle {}", names[i..=j].join(" -> "));
                }
            }
        }
        format!("path {}", names.join(" -> "))
    };
    Err(MomdpError::HorizonInsufficient { horizon, witness })
}

/// Forward-reachable states (any depth within the horizon) under `actions`.
pub(crate) fn reachable_states<F: Scalar>(compiled: &Compiled<'_, F>, actions: &[usize]) -> Vec<bool> {
    let n = compiled.states.len();
    let mut reachable = vec![false; n];
    let mut frontier = vec![compiled.start];
    reachable[compiled.start] = true;
    let mut depth = 0;
    while !frontier.is_empty() && depth < compiled.horizon() {
        let mut next = Vec::new();
        for &s in &frontier {
            for outcome in &compiled.states[s].actions[actions[s]].outcomes {
                if let Some(successor) = outcome.successor {
                    if !reachable[successor] {
                        reachable[successor] = true;
                        next.push(successor);
                    }
                }
            }
        }
        frontier = next;
        depth += 1;
    }
    reachable
}
