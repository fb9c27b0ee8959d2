//! Multi-policy dynamic programming: backward set-based Bellman backups that
//! keep every non-dominated value vector per state, each tagged with the
//! partial policy achieving it. The tags answer the question a bare value
//! set leaves open under stochastic transitions: which action to take in
//! each encountered state to realise a chosen vector.

use std::collections::{BTreeMap, HashMap};

use itertools::Itertools;

use super::{pareto_filter, OracleError};
use crate::momdp::{Compiled, DeterministicPolicy, TabularMomdp};
use crate::scalar::Scalar;
use crate::vector::ObjectiveVector;

/// Default bound on the size of any per-state value set (and on the number
/// of backup combinations considered per state).
pub const DEFAULT_SET_CAP: usize = 100_000;

/// A value vector achievable from a state, tagged with the action choices
/// that achieve it (only states the tagged policy can reach are assigned).
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedValue<F> {
    pub value: ObjectiveVector<F>,
    pub choices: BTreeMap<String, String>,
}

impl<F: Scalar> TaggedValue<F> {
    /// The tag as a (partial) deterministic policy.
    pub fn policy(&self) -> DeterministicPolicy {
        DeterministicPolicy::new(self.choices.iter().map(|(s, a)| (s.clone(), a.clone())))
    }
}

/// Per-state non-dominated value sets. `by_state` holds each reachable
/// state's set at the shallowest depth where the state occurs.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoDp<F> {
    pub start_set: Vec<TaggedValue<F>>,
    pub by_state: BTreeMap<String, Vec<TaggedValue<F>>>,
}

type Tag = BTreeMap<usize, usize>;
type TaggedSet<F> = Vec<(ObjectiveVector<F>, Tag)>;
type Memo<F> = HashMap<(usize, usize), TaggedSet<F>>;

/// Merges two partial policies; `None` when they disagree on some state.
/// Disagreeing combinations are not realisable by a stationary policy and
/// are dropped, so on reconvergent environments the sets may omit vectors
/// only a non-stationary policy could achieve.
fn merge_tags(into: &mut Tag, from: &Tag) -> bool {
    for (&state, &action) in from {
        match into.get(&state) {
            Some(&existing) if existing != action => return false,
            Some(_) => {}
            None => {
                into.insert(state, action);
            }
        }
    }
    true
}

pub fn pareto_dp<F: Scalar>(env: &TabularMomdp<F>) -> Result<ParetoDp<F>, OracleError> {
    pareto_dp_capped(env, DEFAULT_SET_CAP)
}

pub fn pareto_dp_capped<F: Scalar>(
    env: &TabularMomdp<F>,
    cap: usize,
) -> Result<ParetoDp<F>, OracleError> {
    let compiled = env.compile()?;
    let mut memo: Memo<F> = HashMap::new();
    backup(&compiled, compiled.start, 0, cap, &mut memo)?;

    // Shallowest occurrence depth of each state reachable from the start
    // under any action sequence; the recursion above has already filled the
    // memo at those depths.
    let mut depth_of = vec![usize::MAX; compiled.states.len()];
    depth_of[compiled.start] = 0;
    let mut frontier = vec![compiled.start];
    let mut depth = 0;
    while !frontier.is_empty() && depth < compiled.horizon() {
        let mut next = Vec::new();
        for &s in &frontier {
            for action in &compiled.states[s].actions {
                for outcome in &action.outcomes {
                    if let Some(successor) = outcome.successor {
                        if depth_of[successor] == usize::MAX {
                            depth_of[successor] = depth + 1;
                            next.push(successor);
                        }
                    }
                }
            }
        }
        frontier = next;
        depth += 1;
    }

    let publish = |set: &TaggedSet<F>| -> Vec<TaggedValue<F>> {
        set.iter()
            .map(|(value, tag)| TaggedValue {
                value: value.clone(),
                choices: tag
                    .iter()
                    .map(|(&s, &a)| {
                        (env.states[s].id.clone(), env.states[s].actions[a].name.clone())
                    })
                    .collect(),
            })
            .collect()
    };

    let mut by_state = BTreeMap::new();
    for (s, state) in env.states.iter().enumerate() {
        if depth_of[s] != usize::MAX {
            by_state.insert(state.id.clone(), publish(&memo[&(s, depth_of[s])]));
        }
    }
    let start_set = publish(&memo[&(compiled.start, 0)]);
    Ok(ParetoDp { start_set, by_state })
}

fn backup<F: Scalar>(
    compiled: &Compiled<'_, F>,
    state: usize,
    depth: usize,
    cap: usize,
    memo: &mut Memo<F>,
) -> Result<(), OracleError> {
    if memo.contains_key(&(state, depth)) {
        return Ok(());
    }
    // Recursion terminates: depth strictly increases towards the horizon.
    let mut candidates: TaggedSet<F> = Vec::new();
    for (a, action) in compiled.states[state].actions.iter().enumerate() {
        let mut successor_sets: Vec<(usize, F)> = Vec::new(); // (state, weight)
        for outcome in &action.outcomes {
            if let Some(successor) = outcome.successor {
                if depth + 1 < compiled.horizon() {
                    backup(compiled, successor, depth + 1, cap, memo)?;
                } else {
                    // Truncation: one more step would exceed the horizon, so
                    // the continuation value is zero.
                    memo.entry((successor, depth + 1))
                        .or_insert_with(|| vec![(ObjectiveVector::zeros(compiled.num_objectives()), Tag::new())]);
                }
                successor_sets.push((successor, outcome.probability));
            }
        }

        let choice_lists: Vec<Vec<usize>> = successor_sets
            .iter()
            .map(|(s, _)| (0..memo[&(*s, depth + 1)].len()).collect())
            .collect();
        let combinations: u128 = choice_lists.iter().map(|l| l.len() as u128).product();
        if combinations > cap as u128 {
            return Err(OracleError::SetCapExceeded {
                state: compiled.env.states[state].id.clone(),
                cap,
            });
        }

        if successor_sets.is_empty() {
            let mut tag = Tag::new();
            tag.insert(state, a);
            candidates.push((action.mean_reward.clone(), tag));
            continue;
        }
        for combo in choice_lists.into_iter().multi_cartesian_product() {
            let mut value = action.mean_reward.clone();
            let mut tag = Tag::new();
            tag.insert(state, a);
            let mut consistent = true;
            for ((successor, weight), pick) in successor_sets.iter().zip(combo) {
                let (succ_value, succ_tag) = &memo[&(*successor, depth + 1)][pick];
                if !merge_tags(&mut tag, succ_tag) {
                    consistent = false;
                    break;
                }
                value.add_scaled(*weight, succ_value);
            }
            if consistent {
                candidates.push((value, tag));
            }
        }
    }

    let values: Vec<ObjectiveVector<F>> = candidates.iter().map(|(v, _)| v.clone()).collect();
    let keep = pareto_filter(&values);
    if keep.len() > cap {
        return Err(OracleError::SetCapExceeded {
            state: compiled.env.states[state].id.clone(),
            cap,
        });
    }
    let set: TaggedSet<F> = keep.into_iter().map(|i| candidates[i].clone()).collect();
    memo.insert((state, depth), set);
    Ok(())
}
