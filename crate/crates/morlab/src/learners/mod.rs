//! Model-free value-based MORL agents: linear-scalarised Q-learning on the
//! plain state, and TLO Q-learning conditioned on the accrued reward vector.
//!
//! Both learn vector-valued Q estimates with the one-step Q-learning backup
//! `Q ← Q + α (r + Q(s', a*) − Q)` where `a*` is the greedy action at the
//! successor under the agent's own action ordering (greedy-successor
//! bootstrap) and the bootstrap is zero at terminal or truncated steps.

mod qtable;

pub use qtable::{dequantise, quantise_accrued, AugmentedState, QEntry, QTable, ACCRUED_SCALE};

use std::collections::{BTreeMap, HashSet, VecDeque};

use rand::Rng;
use thiserror::Error;

use crate::momdp::{Compiled, DeterministicPolicy, MomdpError, TabularMomdp};
use crate::rng::{stream_rng, STREAM_ENV, STREAM_EXPLORE};
use crate::scalar::Scalar;
use crate::scalarise::{dot, tlo_compare, LinearWeights, TloParams};
use crate::vector::ObjectiveVector;

/// What the Q-values and action selection are conditioned on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conditioning {
    /// Current base state only; sound for linear scalarisation.
    Plain,
    /// Base state plus the episode's accrued reward vector; required for
    /// non-linear action orderings.
    Accrued,
}

impl std::fmt::Display for Conditioning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Conditioning::Plain => write!(f, "plain"),
            Conditioning::Accrued => write!(f, "accrued"),
        }
    }
}

/// Learning-rate schedule evaluated on the per-key visit count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaSchedule<F> {
    Constant(F),
    /// `(1 + visits)^-exponent`: starts at 1 (the first update adopts its
    /// target outright) and decays polynomially for tight late-stage
    /// convergence.
    VisitDecay { exponent: F },
}

impl<F: Scalar> AlphaSchedule<F> {
    pub fn rate(&self, prior_visits: u64) -> F {
        match self {
            AlphaSchedule::Constant(a) => *a,
            AlphaSchedule::VisitDecay { exponent } => {
                let n = F::from_u64(prior_visits + 1).expect("visit count fits scalar");
                n.powf(-*exponent)
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            AlphaSchedule::Constant(a) => format!("constant {a}"),
            AlphaSchedule::VisitDecay { exponent } => format!("visit decay (1+n)^-{exponent}"),
        }
    }
}

/// Exploration schedule (epsilon-greedy), evaluated on the episode index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonSchedule<F> {
    Constant(F),
    /// Linear anneal from `start` to `end` over the first `over_episodes`
    /// episodes, then constant at `end`. Front-loaded exploration feeds the
    /// rarely-visited augmented states before the learning rates decay.
    LinearDecay { start: F, end: F, over_episodes: u64 },
}

impl<F: Scalar> EpsilonSchedule<F> {
    pub fn rate(&self, episode: u64) -> F {
        match self {
            EpsilonSchedule::Constant(e) => *e,
            EpsilonSchedule::LinearDecay { start, end, over_episodes } => {
                if episode >= *over_episodes {
                    *end
                } else {
                    let progress = F::from_u64(episode).expect("episode fits scalar")
                        / F::from_u64(*over_episodes).expect("episode fits scalar");
                    *start + (*end - *start) * progress
                }
            }
        }
    }

    /// The smallest and largest rates the schedule can produce.
    pub fn bounds(&self) -> (F, F) {
        match self {
            EpsilonSchedule::Constant(e) => (*e, *e),
            EpsilonSchedule::LinearDecay { start, end, .. } => (start.min(*end), start.max(*end)),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            EpsilonSchedule::Constant(e) => format!("constant {e}"),
            EpsilonSchedule::LinearDecay { start, end, over_episodes } => {
                format!("linear {start} -> {end} over {over_episodes} episodes")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig<F> {
    pub episodes: u64,
    pub alpha: AlphaSchedule<F>,
    pub epsilon: EpsilonSchedule<F>,
    pub seed: u64,
    pub conditioning: Conditioning,
    /// Value unvisited entries start from; `None` means zero vectors.
    /// Initialising at per-objective return upper bounds makes every action
    /// greedy until tried, which keeps threshold-pivotal actions supplied
    /// with data instead of starving on the epsilon share alone.
    pub initial_q: Option<ObjectiveVector<F>>,
}

impl<F: Scalar> LearnerConfig<F> {
    pub fn new(episodes: u64, seed: u64, conditioning: Conditioning) -> Self {
        LearnerConfig {
            episodes,
            alpha: AlphaSchedule::Constant(F::of(0.1)),
            epsilon: EpsilonSchedule::Constant(F::of(0.1)),
            seed,
            conditioning,
            initial_q: None,
        }
    }

    pub fn with_alpha(mut self, alpha: AlphaSchedule<F>) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_epsilon(mut self, epsilon: EpsilonSchedule<F>) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_initial_q(mut self, initial_q: ObjectiveVector<F>) -> Self {
        self.initial_q = Some(initial_q);
        self
    }
}

/// Greedy action ordering used during learning.
#[derive(Debug, Clone, PartialEq)]
pub enum Selector<F> {
    Linear(LinearWeights<F>),
    Tlo(TloParams<F>),
}

impl<F: Scalar> Selector<F> {
    pub fn required_conditioning(&self) -> Conditioning {
        match self {
            Selector::Linear(_) => Conditioning::Plain,
            Selector::Tlo(_) => Conditioning::Accrued,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Selector::Linear(w) => {
                let ws: Vec<String> = w.as_slice().iter().map(|x| format!("{x}")).collect();
                format!("linear({})", ws.join(","))
            }
            Selector::Tlo(t) => {
                let ts: Vec<String> =
                    t.thresholds.iter().map(|(i, v)| format!("objective {i} >= {v}")).collect();
                format!("tlo({}; payoff objective {})", ts.join(", "), t.payoff)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnerError {
    #[error(transparent)]
    Momdp(#[from] MomdpError),
    #[error("{selector} selection requires {required} conditioning, got {got}")]
    ConditioningMismatch { selector: String, required: Conditioning, got: Conditioning },
    #[error("alpha must be in (0, 1], got {0}")]
    BadAlpha(f64),
    #[error("epsilon must be in [0, 1], got {0}")]
    BadEpsilon(f64),
    #[error("selector references objective {index}, but the environment has {count} objectives")]
    SelectorObjective { index: usize, count: usize },
    #[error("initial Q vector has {len} components (need {expected}, all finite)")]
    BadInitialQ { len: usize, expected: usize },
    #[error("q-table does not cover reachable state `{state}` with accrued {accrued:?}")]
    UncoveredState { state: String, accrued: Vec<f64> },
    #[error("q-table has no visits for action `{action}` at reachable state `{state}` with accrued {accrued:?}")]
    UncoveredAction { state: String, accrued: Vec<f64>, action: String },
    #[error("greedy choice at state `{0}` differs across accrued-reward contexts")]
    AmbiguousGreedy(String),
    #[error("state graph has a cycle through `{0}`; analytic backups need an acyclic environment")]
    CyclicStateGraph(String),
}

/// Configuration record for a completed training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingLog {
    pub episodes: u64,
    pub seed: u64,
    pub selector: String,
    pub conditioning: Conditioning,
    pub alpha: String,
    pub epsilon: String,
    pub initial_q: String,
    /// Bootstrap form of the update rule.
    pub bootstrap: &'static str,
}

fn validate_config<F: Scalar>(
    env: &TabularMomdp<F>,
    selector: &Selector<F>,
    config: &LearnerConfig<F>,
) -> Result<(), LearnerError> {
    let required = selector.required_conditioning();
    if config.conditioning != required {
        return Err(LearnerError::ConditioningMismatch {
            selector: selector.describe(),
            required,
            got: config.conditioning,
        });
    }
    match config.alpha {
        AlphaSchedule::Constant(a) => {
            let a = a.to_f64_lossy();
            if !(a > 0.0 && a <= 1.0) {
                return Err(LearnerError::BadAlpha(a));
            }
        }
        AlphaSchedule::VisitDecay { exponent } => {
            let e = exponent.to_f64_lossy();
            if e <= 0.0 {
                return Err(LearnerError::BadAlpha(e));
            }
        }
    }
    let (low, high) = config.epsilon.bounds();
    if !(low.to_f64_lossy() >= 0.0 && high.to_f64_lossy() <= 1.0) {
        return Err(LearnerError::BadEpsilon(high.to_f64_lossy()));
    }
    let max_index = match selector {
        Selector::Linear(w) => w.len().saturating_sub(1),
        Selector::Tlo(t) => t.max_objective_index(),
    };
    if max_index >= env.num_objectives {
        return Err(LearnerError::SelectorObjective { index: max_index, count: env.num_objectives });
    }
    if let Selector::Linear(w) = selector {
        if w.len() != env.num_objectives {
            return Err(LearnerError::SelectorObjective {
                index: w.len().saturating_sub(1),
                count: env.num_objectives,
            });
        }
    }
    if let Some(initial) = &config.initial_q {
        if initial.len() != env.num_objectives || !initial.is_finite() {
            return Err(LearnerError::BadInitialQ {
                len: initial.len(),
                expected: env.num_objectives,
            });
        }
    }
    Ok(())
}

fn augmented_key<F: Scalar>(
    state: usize,
    accrued: &ObjectiveVector<F>,
    conditioning: Conditioning,
) -> AugmentedState {
    match conditioning {
        Conditioning::Plain => AugmentedState { state, accrued: Vec::new() },
        Conditioning::Accrued => AugmentedState { state, accrued: quantise_accrued(accrued) },
    }
}

/// Greedy action at an augmented state: for linear selection the weighted
/// Q-value, for TLO the ordering of `Q + accrued` (the return the episode
/// would realise). Unvisited entries read as the table's initial vector;
/// ties break to the lowest action index.
fn greedy_action<F: Scalar>(
    table: &QTable<F>,
    key: &AugmentedState,
    n_actions: usize,
    accrued: &ObjectiveVector<F>,
    selector: &Selector<F>,
) -> usize {
    let entries = table.entries(key);
    let q_of = |a: usize| -> &ObjectiveVector<F> {
        entries.and_then(|es| es.get(a)).map_or(table.initial(), |e| &e.q)
    };
    match selector {
        Selector::Linear(w) => {
            let mut best = 0;
            let mut best_score = F::neg_infinity();
            for a in 0..n_actions {
                let score = dot(q_of(a), w.as_slice());
                if score > best_score {
                    best_score = score;
                    best = a;
                }
            }
            best
        }
        Selector::Tlo(params) => {
            let mut best = 0;
            let mut best_candidate: Option<ObjectiveVector<F>> = None;
            for a in 0..n_actions {
                let candidate = q_of(a).plus(accrued);
                let better = match &best_candidate {
                    None => true,
                    Some(current) => {
                        tlo_compare(&candidate, current, params) == std::cmp::Ordering::Greater
                    }
                };
                if better {
                    best_candidate = Some(candidate);
                    best = a;
                }
            }
            best
        }
    }
}

/// Trains a tabular agent with epsilon-greedy exploration. Environment
/// outcomes and exploration draws consume separate per-episode streams, so
/// identical `(env, selector, config)` produce identical Q-tables.
pub fn train<F: Scalar>(
    env: &TabularMomdp<F>,
    selector: &Selector<F>,
    config: &LearnerConfig<F>,
) -> Result<(QTable<F>, TrainingLog), LearnerError> {
    validate_config(env, selector, config)?;
    let compiled = env.compile()?;
    let m = compiled.num_objectives();
    let mut table = match &config.initial_q {
        Some(initial) => QTable::with_initial(initial.clone()),
        None => QTable::new(m),
    };

    for episode in 0..config.episodes {
        let mut env_rng = stream_rng(config.seed, episode, STREAM_ENV);
        let mut explore_rng = stream_rng(config.seed, episode, STREAM_EXPLORE);
        let epsilon = config.epsilon.rate(episode).to_f64_lossy();

        let mut state = compiled.start;
        let mut accrued = ObjectiveVector::zeros(m);
        for depth in 0..compiled.horizon() {
            let n_actions = compiled.states[state].actions.len();
            let key = augmented_key(state, &accrued, config.conditioning);
            let action = if explore_rng.gen::<f64>() < epsilon {
                explore_rng.gen_range(0..n_actions)
            } else {
                greedy_action(&table, &key, n_actions, &accrued, selector)
            };

            let outcome_idx = compiled.sample(state, action, &mut env_rng);
            let outcome = &compiled.states[state].actions[action].outcomes[outcome_idx];
            let mut accrued_next = accrued.clone();
            accrued_next.add_assign(&outcome.reward);

            // Truncation at the horizon counts as terminal for the update.
            let bootstrap = match outcome.successor {
                Some(successor) if depth + 1 < compiled.horizon() => {
                    let next_key = augmented_key(successor, &accrued_next, config.conditioning);
                    let next_actions = compiled.states[successor].actions.len();
                    let greedy =
                        greedy_action(&table, &next_key, next_actions, &accrued_next, selector);
                    Some(
                        table
                            .value(&next_key, greedy)
                            .cloned()
                            .unwrap_or_else(|| table.initial().clone()),
                    )
                }
                _ => None,
            };

            let entries = table.entries_mut(&key, n_actions);
            let entry = &mut entries[action];
            let alpha = config.alpha.rate(entry.visits);
            let q = entry.q.as_mut_slice();
            for i in 0..m {
                let target = outcome.reward[i]
                    + bootstrap.as_ref().map_or(F::zero(), |b| b[i]);
                q[i] = q[i] + alpha * (target - q[i]);
            }
            entry.visits += 1;

            match outcome.successor {
                None => break,
                Some(successor) => {
                    state = successor;
                    accrued = accrued_next;
                }
            }
        }
    }

    let log = TrainingLog {
        episodes: config.episodes,
        seed: config.seed,
        selector: selector.describe(),
        conditioning: config.conditioning,
        alpha: config.alpha.describe(),
        epsilon: config.epsilon.describe(),
        initial_q: match &config.initial_q {
            Some(initial) => format!("{initial}"),
            None => "zeros".to_owned(),
        },
        bootstrap: "greedy-successor",
    };
    Ok((table, log))
}

/// Follows greedy selection along the accrued-reward trajectories the greedy
/// policy itself induces, producing a deterministic state→action map.
///
/// Every action of every reached augmented state must have been visited;
/// otherwise extraction fails naming the uncovered key. States the greedy
/// policy never reaches are assigned their first action.
pub fn extract_greedy_policy<F: Scalar>(
    env: &TabularMomdp<F>,
    table: &QTable<F>,
    selector: &Selector<F>,
) -> Result<DeterministicPolicy, LearnerError> {
    let compiled = env.compile()?;
    let conditioning = selector.required_conditioning();
    let m = compiled.num_objectives();

    let mut choices: BTreeMap<usize, usize> = BTreeMap::new();
    let mut seen: HashSet<AugmentedState> = HashSet::new();
    let mut queue: VecDeque<(usize, ObjectiveVector<F>, usize)> = VecDeque::new();
    queue.push_back((compiled.start, ObjectiveVector::zeros(m), 0));

    while let Some((state, accrued, depth)) = queue.pop_front() {
        let key = augmented_key(state, &accrued, conditioning);
        if !seen.insert(key.clone()) {
            continue;
        }
        let state_name = || compiled.env.states[state].id.clone();
        let Some(entries) = table.entries(&key) else {
            return Err(LearnerError::UncoveredState {
                state: state_name(),
                accrued: dequantise(&key.accrued),
            });
        };
        if let Some(unvisited) = entries.iter().position(|e| e.visits == 0) {
            return Err(LearnerError::UncoveredAction {
                state: state_name(),
                accrued: dequantise(&key.accrued),
                action: compiled.env.states[state].actions[unvisited].name.clone(),
            });
        }
        let n_actions = compiled.states[state].actions.len();
        let action = greedy_action(table, &key, n_actions, &accrued, selector);
        if let Some(&existing) = choices.get(&state) {
            if existing != action {
                return Err(LearnerError::AmbiguousGreedy(state_name()));
            }
        } else {
            choices.insert(state, action);
        }
        if depth + 1 < compiled.horizon() {
            for outcome in &compiled.states[state].actions[action].outcomes {
                if let Some(successor) = outcome.successor {
                    let mut accrued_next = accrued.clone();
                    accrued_next.add_assign(&outcome.reward);
                    queue.push_back((successor, accrued_next, depth + 1));
                }
            }
        }
    }

    Ok(DeterministicPolicy::new(env.states.iter().enumerate().map(|(s, state)| {
        let action = choices.get(&s).copied().unwrap_or(0);
        (state.id.clone(), state.actions[action].name.clone())
    })))
}

/// Analytic action values per state under the selector's own backward
/// reasoning: successor choices are fixed by greedy selection on exact mean
/// values, then each state's Q-vector is backed up exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticValues<F> {
    /// Exact Q-vectors per state, in declared state/action order.
    pub q: BTreeMap<String, Vec<(String, ObjectiveVector<F>)>>,
    pub policy: DeterministicPolicy,
}

/// Computes the fixed point of greedy backward reasoning on exact values:
/// the action the learner's ordering would settle on at each state, without
/// any learning. Requires an acyclic state graph.
pub fn analytic_greedy_policy<F: Scalar>(
    env: &TabularMomdp<F>,
    selector: &Selector<F>,
) -> Result<AnalyticValues<F>, LearnerError> {
    let compiled = env.compile()?;
    let order = topological_order(&compiled)?;

    let mut state_value: Vec<Option<ObjectiveVector<F>>> = vec![None; compiled.states.len()];
    let mut chosen: Vec<usize> = vec![0; compiled.states.len()];
    let mut q_table: BTreeMap<String, Vec<(String, ObjectiveVector<F>)>> = BTreeMap::new();
    for &s in order.iter().rev() {
        let mut q_values: Vec<(usize, ObjectiveVector<F>)> = Vec::new();
        for (a, action) in compiled.states[s].actions.iter().enumerate() {
            let mut q = action.mean_reward.clone();
            for outcome in &action.outcomes {
                if let Some(successor) = outcome.successor {
                    let v = state_value[successor]
                        .as_ref()
                        .expect("topological order visits successors first");
                    q.add_scaled(outcome.probability, v);
                }
            }
            q_values.push((a, q));
        }
        let best = match selector {
            Selector::Linear(w) => q_values
                .iter()
                .enumerate()
                .max_by(|(ia, (_, qa)), (ib, (_, qb))| {
                    dot(qa, w.as_slice())
                        .partial_cmp(&dot(qb, w.as_slice()))
                        .expect("finite values")
                        .then(ib.cmp(ia))
                })
                .map(|(i, _)| i)
                .expect("states have actions"),
            Selector::Tlo(params) => q_values
                .iter()
                .enumerate()
                .max_by(|(ia, (_, qa)), (ib, (_, qb))| {
                    tlo_compare(qa, qb, params).then(ib.cmp(ia))
                })
                .map(|(i, _)| i)
                .expect("states have actions"),
        };
        chosen[s] = q_values[best].0;
        state_value[s] = Some(q_values[best].1.clone());
        q_table.insert(
            compiled.env.states[s].id.clone(),
            q_values
                .into_iter()
                .map(|(a, q)| (compiled.env.states[s].actions[a].name.clone(), q))
                .collect(),
        );
    }

    let policy = DeterministicPolicy::new(
        env.states
            .iter()
            .enumerate()
            .map(|(s, state)| (state.id.clone(), state.actions[chosen[s]].name.clone())),
    );
    Ok(AnalyticValues { q: q_table, policy })
}

fn topological_order<F: Scalar>(compiled: &Compiled<'_, F>) -> Result<Vec<usize>, LearnerError> {
    let n = compiled.states.len();
    let mut indegree = vec![0usize; n];
    let mut edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (s, state) in compiled.states.iter().enumerate() {
        let mut successors: Vec<usize> = state
            .actions
            .iter()
            .flat_map(|a| a.outcomes.iter().filter_map(|o| o.successor))
            .collect();
        successors.sort_unstable();
        successors.dedup();
        for t in successors {
            edges[s].push(t);
            indegree[t] += 1;
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&s| indegree[s] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(s) = queue.pop_front() {
        order.push(s);
        for &t in &edges[s] {
            indegree[t] -= 1;
            if indegree[t] == 0 {
                queue.push_back(t);
            }
        }
    }
    if order.len() != n {
        let stuck = (0..n).find(|&s| indegree[s] > 0).expect("cycle leaves positive indegree");
        return Err(LearnerError::CyclicStateGraph(compiled.env.states[stuck].id.clone()));
    }
    Ok(order)
}
