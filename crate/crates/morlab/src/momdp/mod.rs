//! Tabular multiobjective MDP model: named states, per-state action sets,
//! stochastic outcomes with vector rewards, plus validation and the policy
//! types shared by the oracle and the learners.
//!
//! Environments are plain data and may describe invalid configurations;
//! [`TabularMomdp::validate`] reports every violation instead of panicking,
//! and the analysis/simulation entry points refuse invalid environments.

mod evaluate;
mod sim;

pub use evaluate::expected_return_exact;
pub(crate) use evaluate::{check_termination, evaluate, reachable_states};
pub use sim::{monte_carlo_return, simulate_episode, EpisodeResult, EpisodeStep};

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::Rng;
use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::vector::ObjectiveVector;

/// Reserved successor name marking the end of an episode.
pub const TERMINAL_MARKER: &str = "TERMINAL";

/// Tolerance for per-action outcome probabilities summing to one.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-9;

/// Where a sampled outcome leads: a declared state or episode termination.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Successor {
    State(String),
    Terminal,
}

impl Successor {
    pub fn as_str(&self) -> &str {
        match self {
            Successor::State(id) => id,
            Successor::Terminal => TERMINAL_MARKER,
        }
    }
}

impl Serialize for Successor {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Successor {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct SuccessorVisitor;
        impl<'de> Visitor<'de> for SuccessorVisitor {
            type Value = Successor;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "a state id or \"{TERMINAL_MARKER}\"")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Successor, E> {
                if v == TERMINAL_MARKER {
                    Ok(Successor::Terminal)
                } else {
                    Ok(Successor::State(v.to_owned()))
                }
            }
        }
        deserializer.deserialize_str(SuccessorVisitor)
    }
}

/// One stochastic result of taking an action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome<F> {
    #[serde(rename = "p")]
    pub probability: F,
    pub reward: ObjectiveVector<F>,
    #[serde(rename = "next")]
    pub successor: Successor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionDef<F> {
    pub name: String,
    pub outcomes: Vec<Outcome<F>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDef<F> {
    pub id: String,
    pub actions: Vec<ActionDef<F>>,
}

/// A finite multiobjective MDP with stochastic transitions and vector
/// rewards. Episodes start at `start_state`, end on a terminal outcome, and
/// are truncated after `horizon` steps.
///
/// Immutable after construction and safe to share across threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularMomdp<F> {
    pub name: String,
    pub num_objectives: usize,
    pub horizon: usize,
    pub start_state: String,
    pub states: Vec<StateDef<F>>,
}

/// A single validation failure; the report lists all of them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("state `{state}` action `{action}`: probabilities sum to {sum:.6}")]
    ProbabilitySum { state: String, action: String, sum: f64 },
    #[error("state `{state}` action `{action}`: unknown successor `{successor}`")]
    UnknownSuccessor { state: String, action: String, successor: String },
    #[error("state `{state}` action `{action}` outcome {index}: probability {probability} outside (0, 1]")]
    BadProbability { state: String, action: String, index: usize, probability: f64 },
    #[error("state `{state}` action `{action}` outcome {index}: reward has {len} components, expected {expected}")]
    RewardLength { state: String, action: String, index: usize, len: usize, expected: usize },
    #[error("state `{state}` action `{action}` outcome {index}: non-finite reward component")]
    NonFiniteReward { state: String, action: String, index: usize },
    #[error("state `{state}` action `{action}` has no outcomes")]
    NoOutcomes { state: String, action: String },
    #[error("state `{state}` has no actions")]
    NoActions { state: String },
    #[error("duplicate state id `{0}`")]
    DuplicateState(String),
    #[error("state `{state}`: duplicate action name `{action}`")]
    DuplicateAction { state: String, action: String },
    #[error("start state `{0}` is not a declared state")]
    UnknownStartState(String),
    #[error("state id `{0}` is reserved")]
    ReservedStateId(String),
    #[error("num_objectives must be positive")]
    NoObjectives,
    #[error("horizon must be positive")]
    ZeroHorizon,
    #[error("environment has no states")]
    NoStates,
}

/// Outcome of [`TabularMomdp::validate`]: empty means valid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MomdpError {
    #[error("invalid environment:\n{0}")]
    Invalid(ValidationReport),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown action `{action}` in state `{state}`")]
    UnknownAction { state: String, action: String },
    #[error("policy does not choose an action for state `{0}`")]
    MissingChoice(String),
    #[error("horizon {horizon} does not guarantee termination: {witness}")]
    HorizonInsufficient { horizon: usize, witness: String },
}

impl<F: Scalar> TabularMomdp<F> {
    pub fn state_index(&self, id: &str) -> Option<usize> {
        self.states.iter().position(|s| s.id == id)
    }

    pub fn state_ids(&self) -> impl Iterator<Item = &str> {
        self.states.iter().map(|s| s.id.as_str())
    }

    pub fn action_index(&self, state: usize, name: &str) -> Option<usize> {
        self.states[state].actions.iter().position(|a| a.name == name)
    }

    /// Checks every structural invariant and returns the full list of
    /// violations; an empty report means the environment is well-formed.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.num_objectives == 0 {
            violations.push(Violation::NoObjectives);
        }
        if self.horizon == 0 {
            violations.push(Violation::ZeroHorizon);
        }
        if self.states.is_empty() {
            violations.push(Violation::NoStates);
        }

        let mut seen = HashMap::new();
        for state in &self.states {
            if state.id == TERMINAL_MARKER {
                violations.push(Violation::ReservedStateId(state.id.clone()));
            }
            if seen.insert(state.id.clone(), ()).is_some() {
                violations.push(Violation::DuplicateState(state.id.clone()));
            }
        }
        if self.state_index(&self.start_state).is_none() {
            violations.push(Violation::UnknownStartState(self.start_state.clone()));
        }

        for state in &self.states {
            if state.actions.is_empty() {
                violations.push(Violation::NoActions { state: state.id.clone() });
            }
            let mut action_names = HashMap::new();
            for action in &state.actions {
                if action_names.insert(action.name.clone(), ()).is_some() {
                    violations.push(Violation::DuplicateAction {
                        state: state.id.clone(),
                        action: action.name.clone(),
                    });
                }
                if action.outcomes.is_empty() {
                    violations.push(Violation::NoOutcomes {
                        state: state.id.clone(),
                        action: action.name.clone(),
                    });
                    continue;
                }
                let mut sum = 0.0f64;
                for (index, outcome) in action.outcomes.iter().enumerate() {
                    let p = outcome.probability.to_f64_lossy();
                    sum += p;
                    if !(p > 0.0 && p <= 1.0) {
                        violations.push(Violation::BadProbability {
                            state: state.id.clone(),
                            action: action.name.clone(),
                            index,
                            probability: p,
                        });
                    }
                    if outcome.reward.len() != self.num_objectives {
                        violations.push(Violation::RewardLength {
                            state: state.id.clone(),
                            action: action.name.clone(),
                            index,
                            len: outcome.reward.len(),
                            expected: self.num_objectives,
                        });
                    }
                    if !outcome.reward.is_finite() {
                        violations.push(Violation::NonFiniteReward {
                            state: state.id.clone(),
                            action: action.name.clone(),
                            index,
                        });
                    }
                    if let Successor::State(id) = &outcome.successor {
                        if self.state_index(id).is_none() {
                            violations.push(Violation::UnknownSuccessor {
                                state: state.id.clone(),
                                action: action.name.clone(),
                                successor: id.clone(),
                            });
                        }
                    }
                }
                if (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
                    violations.push(Violation::ProbabilitySum {
                        state: state.id.clone(),
                        action: action.name.clone(),
                        sum,
                    });
                }
            }
        }
        ValidationReport { violations }
    }

    /// Mean immediate reward of `(state, action)` over its outcomes.
    pub fn mean_immediate_reward(&self, state: &str, action: &str) -> Result<ObjectiveVector<F>, MomdpError> {
        let s = self
            .state_index(state)
            .ok_or_else(|| MomdpError::UnknownState(state.to_owned()))?;
        let a = self.action_index(s, action).ok_or_else(|| MomdpError::UnknownAction {
            state: state.to_owned(),
            action: action.to_owned(),
        })?;
        let mut mean = ObjectiveVector::zeros(self.num_objectives);
        for outcome in &self.states[s].actions[a].outcomes {
            mean.add_scaled(outcome.probability, &outcome.reward);
        }
        Ok(mean)
    }

    /// Samples one transition. Deterministic given the generator state.
    pub fn step<R: Rng>(
        &self,
        state: &str,
        action: &str,
        rng: &mut R,
    ) -> Result<StepResult<F>, MomdpError> {
        let compiled = self.compile()?;
        let s = self
            .state_index(state)
            .ok_or_else(|| MomdpError::UnknownState(state.to_owned()))?;
        let a = self.action_index(s, action).ok_or_else(|| MomdpError::UnknownAction {
            state: state.to_owned(),
            action: action.to_owned(),
        })?;
        let outcome = compiled.sample(s, a, rng);
        Ok(StepResult {
            successor: self.states[s].actions[a].outcomes[outcome].successor.clone(),
            reward: self.states[s].actions[a].outcomes[outcome].reward.clone(),
            is_terminal: compiled.states[s].actions[a].outcomes[outcome].successor.is_none(),
        })
    }

    /// Short display label for a policy: the first letter of each chosen
    /// action when initials are unique within the state (Space Traders'
    /// `DI` bigrams), the full action name otherwise.
    pub fn policy_label(&self, policy: &DeterministicPolicy) -> Result<String, MomdpError> {
        let mut codes = Vec::with_capacity(self.states.len());
        for state in &self.states {
            let chosen = policy
                .action_for(&state.id)
                .ok_or_else(|| MomdpError::MissingChoice(state.id.clone()))?;
            if self.state_index(&state.id).and_then(|s| self.action_index(s, chosen)).is_none() {
                return Err(MomdpError::UnknownAction {
                    state: state.id.clone(),
                    action: chosen.to_owned(),
                });
            }
            let mut initials: Vec<char> =
                state.actions.iter().filter_map(|a| a.name.chars().next()).collect();
            initials.sort_unstable();
            initials.dedup();
            let unique = initials.len() == state.actions.len();
            let code = if unique {
                chosen.chars().next().map(String::from).unwrap_or_default()
            } else {
                chosen.to_owned()
            };
            codes.push(code);
        }
        if codes.iter().all(|c| c.chars().count() == 1) {
            Ok(codes.concat())
        } else {
            Ok(codes.join("-"))
        }
    }

    pub(crate) fn compile(&self) -> Result<Compiled<'_, F>, MomdpError> {
        let report = self.validate();
        if !report.is_valid() {
            return Err(MomdpError::Invalid(report));
        }
        let index: HashMap<&str, usize> =
            self.states.iter().enumerate().map(|(i, s)| (s.id.as_str(), i)).collect();
        let states = self
            .states
            .iter()
            .map(|state| CompiledState {
                actions: state
                    .actions
                    .iter()
                    .map(|action| {
                        let mut mean = ObjectiveVector::zeros(self.num_objectives);
                        let mut cum = 0.0f64;
                        let outcomes = action
                            .outcomes
                            .iter()
                            .map(|o| {
                                mean.add_scaled(o.probability, &o.reward);
                                cum += o.probability.to_f64_lossy();
                                CompiledOutcome {
                                    probability: o.probability,
                                    cumulative: cum,
                                    reward: o.reward.clone(),
                                    successor: match &o.successor {
                                        Successor::Terminal => None,
                                        Successor::State(id) => Some(index[id.as_str()]),
                                    },
                                }
                            })
                            .collect();
                        CompiledAction { mean_reward: mean, outcomes }
                    })
                    .collect(),
            })
            .collect();
        Ok(Compiled {
            env: self,
            start: index[self.start_state.as_str()],
            states,
        })
    }
}

/// Result of sampling a single transition.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult<F> {
    pub successor: Successor,
    pub reward: ObjectiveVector<F>,
    pub is_terminal: bool,
}

/// Index-resolved view of a valid environment used by the hot loops.
pub(crate) struct Compiled<'e, F> {
    pub env: &'e TabularMomdp<F>,
    pub start: usize,
    pub states: Vec<CompiledState<F>>,
}

pub(crate) struct CompiledState<F> {
    pub actions: Vec<CompiledAction<F>>,
}

pub(crate) struct CompiledAction<F> {
    pub mean_reward: ObjectiveVector<F>,
    pub outcomes: Vec<CompiledOutcome<F>>,
}

pub(crate) struct CompiledOutcome<F> {
    pub probability: F,
    pub cumulative: f64,
    pub reward: ObjectiveVector<F>,
    /// `None` marks a terminal outcome.
    pub successor: Option<usize>,
}

impl<'e, F: Scalar> Compiled<'e, F> {
    pub fn horizon(&self) -> usize {
        self.env.horizon
    }

    pub fn num_objectives(&self) -> usize {
        self.env.num_objectives
    }

    /// Samples an outcome index proportionally to outcome probabilities.
    pub fn sample<R: Rng>(&self, state: usize, action: usize, rng: &mut R) -> usize {
        let outcomes = &self.states[state].actions[action].outcomes;
        let u: f64 = rng.gen();
        outcomes
            .iter()
            .position(|o| u < o.cumulative)
            .unwrap_or(outcomes.len() - 1)
    }

    /// Resolves a named policy into per-state action indices.
    pub fn resolve_policy(&self, policy: &DeterministicPolicy) -> Result<Vec<usize>, MomdpError> {
        for state in policy.states() {
            if self.env.state_index(state).is_none() {
                return Err(MomdpError::UnknownState(state.to_owned()));
            }
        }
        self.env
            .states
            .iter()
            .enumerate()
            .map(|(s, state)| {
                let chosen = policy
                    .action_for(&state.id)
                    .ok_or_else(|| MomdpError::MissingChoice(state.id.clone()))?;
                self.env.action_index(s, chosen).ok_or_else(|| MomdpError::UnknownAction {
                    state: state.id.clone(),
                    action: chosen.to_owned(),
                })
            })
            .collect()
    }
}

/// A stationary deterministic policy: one action per state.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DeterministicPolicy {
    choices: BTreeMap<String, String>,
}

impl DeterministicPolicy {
    pub fn new<S: Into<String>, A: Into<String>>(choices: impl IntoIterator<Item = (S, A)>) -> Self {
        DeterministicPolicy {
            choices: choices.into_iter().map(|(s, a)| (s.into(), a.into())).collect(),
        }
    }

    pub fn action_for(&self, state: &str) -> Option<&str> {
        self.choices.get(state).map(String::as_str)
    }

    pub fn states(&self) -> impl Iterator<Item = &str> {
        self.choices.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.choices.iter().map(|(s, a)| (s.as_str(), a.as_str()))
    }
}

impl fmt::Display for DeterministicPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (s, a)) in self.choices.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{s}={a}")?;
        }
        Ok(())
    }
}
