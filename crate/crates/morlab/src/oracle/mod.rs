//! Exact policy-space analysis: enumeration, Pareto front, convex coverage
//! set, SER/ESR optima, mixture policies and multi-policy value backups.
//!
//! Everything here works from exact expected returns computed by backward
//! induction, never from learned estimates.

mod dp;
mod hull;

pub use dp::{pareto_dp, ParetoDp, TaggedValue, DEFAULT_SET_CAP};
pub use hull::ccs_two_objective;

use thiserror::Error;

use crate::momdp::{
    expected_return_exact, Compiled, DeterministicPolicy, MomdpError, TabularMomdp,
};
use crate::scalar::Scalar;
use crate::scalarise::{ScalariseError, UtilitySpec, UtilityValue};
use crate::vector::ObjectiveVector;

/// Default bound on the number of policies [`enumerate_policies`] will
/// materialise.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

/// Default bound on the number of distinct trajectories [`esr_value`]
/// enumerates.
pub const DEFAULT_TRAJECTORY_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Momdp(#[from] MomdpError),
    #[error(transparent)]
    Scalarise(#[from] ScalariseError),
    #[error("enumeration would produce {count} policies, exceeding the cap of {cap}")]
    EnumerationCap { count: u128, cap: usize },
    #[error("outcome tree exceeds {cap} trajectories")]
    OutcomeTreeCap { cap: usize },
    #[error("value-vector set at state `{state}` exceeds the cap of {cap}")]
    SetCapExceeded { state: String, cap: usize },
    #[error("expected exactly 2 objectives, got {0}")]
    UnsupportedDimension(usize),
    #[error("no mixture of the two policies reaches threshold {threshold}; best achievable {max_achievable}")]
    MixtureInfeasible { threshold: f64, max_achievable: f64 },
    #[error("mixture weights must be positive and sum to 1 (sum {0})")]
    BadMixtureWeights(f64),
    #[error("per-decision thresholding requires a threshold utility")]
    PerDecisionNeedsThreshold,
    #[error("environment has no policies to optimise over")]
    NoPolicies,
}

/// All deterministic stationary policies of `env`, ordered lexicographically
/// by (state order, declared action order), later states varying fastest.
pub fn enumerate_policies<F: Scalar>(
    env: &TabularMomdp<F>,
) -> Result<Vec<DeterministicPolicy>, OracleError> {
    enumerate_policies_capped(env, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_policies_capped<F: Scalar>(
    env: &TabularMomdp<F>,
    cap: usize,
) -> Result<Vec<DeterministicPolicy>, OracleError> {
    let compiled = env.compile()?;
    let mut count: u128 = 1;
    for state in &compiled.env.states {
        count = count.saturating_mul(state.actions.len() as u128);
    }
    if count > cap as u128 {
        return Err(OracleError::EnumerationCap { count, cap });
    }
    let n_states = env.states.len();
    let mut policies = Vec::with_capacity(count as usize);
    let mut digits = vec![0usize; n_states];
    loop {
        policies.push(DeterministicPolicy::new(env.states.iter().enumerate().map(
            |(s, state)| (state.id.clone(), state.actions[digits[s]].name.clone()),
        )));
        // Increment the mixed-radix counter, last state fastest.
        let mut s = n_states;
        loop {
            if s == 0 {
                return Ok(policies);
            }
            s -= 1;
            digits[s] += 1;
            if digits[s] < env.states[s].actions.len() {
                break;
            }
            digits[s] = 0;
        }
    }
}

/// Indices of vectors not Pareto-dominated by any other vector. Duplicate
/// equal vectors are all retained.
pub fn pareto_filter<F: Scalar>(points: &[ObjectiveVector<F>]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| !points.iter().any(|other| other.dominates(&points[i])))
        .collect()
}

/// A policy with its exact value and front membership flags.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyValuePoint<F> {
    pub policy: DeterministicPolicy,
    pub label: String,
    pub value: ObjectiveVector<F>,
    pub pareto_optimal: bool,
    pub on_ccs: bool,
}

/// Exact value table over all deterministic policies, with Pareto-front and
/// convex-coverage-set membership. `ccs` is empty unless the environment has
/// exactly two objectives.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyAnalysis<F> {
    pub points: Vec<PolicyValuePoint<F>>,
    pub pareto: Vec<usize>,
    pub ccs: Vec<usize>,
}

pub fn analyse_policies<F: Scalar>(env: &TabularMomdp<F>) -> Result<PolicyAnalysis<F>, OracleError> {
    let policies = enumerate_policies(env)?;
    let mut points = Vec::with_capacity(policies.len());
    for policy in policies {
        let value = expected_return_exact(env, &policy)?;
        let label = env.policy_label(&policy)?;
        points.push(PolicyValuePoint { policy, label, value, pareto_optimal: false, on_ccs: false });
    }
    let values: Vec<ObjectiveVector<F>> = points.iter().map(|p| p.value.clone()).collect();
    let pareto = pareto_filter(&values);
    let ccs = if env.num_objectives == 2 { ccs_two_objective(&values)? } else { Vec::new() };
    for &i in &pareto {
        points[i].pareto_optimal = true;
    }
    for &i in &ccs {
        points[i].on_ccs = true;
    }
    Ok(PolicyAnalysis { points, pareto, ccs })
}

/// Result of an optimisation over deterministic policies.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalPolicy<F> {
    pub policy: DeterministicPolicy,
    pub label: String,
    /// Exact mean episodic return of the chosen policy.
    pub value: ObjectiveVector<F>,
    pub utility: UtilityValue<F>,
    /// Set when every policy scored negative infinity; the returned policy
    /// is then merely the best by the guarded objective.
    pub infeasible: bool,
}

/// Policy maximising `utility(expected return)` (the SER criterion). Ties
/// break towards enumeration order. When a threshold utility rejects every
/// policy, falls back to the best guarded-objective value and flags the
/// result infeasible.
pub fn ser_optimal<F: Scalar>(
    env: &TabularMomdp<F>,
    utility: &UtilitySpec<F>,
) -> Result<OptimalPolicy<F>, OracleError> {
    let policies = enumerate_policies(env)?;
    let mut scored = Vec::with_capacity(policies.len());
    for policy in policies {
        let value = expected_return_exact(env, &policy)?;
        let utility_value = utility.apply(&value);
        scored.push((policy, value, utility_value));
    }
    pick_best(env, utility, scored)
}

fn pick_best<F: Scalar>(
    env: &TabularMomdp<F>,
    utility: &UtilitySpec<F>,
    scored: Vec<(DeterministicPolicy, ObjectiveVector<F>, UtilityValue<F>)>,
) -> Result<OptimalPolicy<F>, OracleError> {
    if scored.is_empty() {
        return Err(OracleError::NoPolicies);
    }
    let best = scored
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| {
            // max_by keeps the later of equal elements; compare indices
            // descending to keep the earliest instead.
            a.2.total_cmp(&b.2).then(ib.cmp(ia))
        })
        .map(|(i, _)| i)
        .expect("non-empty");
    if scored[best].2.is_finite() {
        let (policy, value, utility_value) = scored[best].clone();
        let label = env.policy_label(&policy)?;
        return Ok(OptimalPolicy { policy, label, value, utility: utility_value, infeasible: false });
    }

    // Every policy is rejected by the threshold; report the closest one.
    let guarded = utility.guarded_objective().unwrap_or(0);
    let fallback = scored
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| {
            a.1[guarded].partial_cmp(&b.1[guarded]).expect("finite values").then(ib.cmp(ia))
        })
        .map(|(i, _)| i)
        .expect("non-empty");
    let (policy, value, _) = scored[fallback].clone();
    let label = env.policy_label(&policy)?;
    Ok(OptimalPolicy { policy, label, value, utility: UtilityValue::NegInfinity, infeasible: true })
}

/// How the ESR criterion applies a threshold utility.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EsrMode {
    /// Expectation of the utility of each episode's return: any
    /// positive-probability trajectory failing the threshold makes the
    /// whole policy score negative infinity.
    EpisodeOutcome,
    /// Every reachable decision (a state with at least two actions) must
    /// pick an action whose mean immediate guarded reward clears the
    /// threshold; feasible policies score their mean payoff objective.
    PerDecisionThreshold,
}

/// Exact expected scalarised return of a policy.
pub fn esr_value<F: Scalar>(
    env: &TabularMomdp<F>,
    policy: &DeterministicPolicy,
    utility: &UtilitySpec<F>,
    mode: EsrMode,
) -> Result<UtilityValue<F>, OracleError> {
    let compiled = env.compile()?;
    let actions = compiled.resolve_policy(policy)?;
    esr_value_compiled(&compiled, &actions, utility, mode)
}

fn esr_value_compiled<F: Scalar>(
    compiled: &Compiled<'_, F>,
    actions: &[usize],
    utility: &UtilitySpec<F>,
    mode: EsrMode,
) -> Result<UtilityValue<F>, OracleError> {
    match mode {
        EsrMode::EpisodeOutcome => {
            let mut leaves = Vec::new();
            collect_returns(
                compiled,
                actions,
                compiled.start,
                0,
                F::one(),
                ObjectiveVector::zeros(compiled.num_objectives()),
                &mut leaves,
            )?;
            let mut total = F::zero();
            for (ret, prob) in &leaves {
                match utility.apply(ret) {
                    UtilityValue::NegInfinity => return Ok(UtilityValue::NegInfinity),
                    UtilityValue::Finite(u) => total = total + *prob * u,
                }
            }
            Ok(UtilityValue::Finite(total))
        }
        EsrMode::PerDecisionThreshold => {
            let UtilitySpec::Threshold(threshold) = utility else {
                return Err(OracleError::PerDecisionNeedsThreshold);
            };
            let reachable = crate::momdp::reachable_states(compiled, actions);
            for (s, state) in compiled.states.iter().enumerate() {
                if !reachable[s] || state.actions.len() < 2 {
                    continue;
                }
                if !threshold.satisfied(&state.actions[actions[s]].mean_reward) {
                    return Ok(UtilityValue::NegInfinity);
                }
            }
            let value = crate::momdp::evaluate(compiled, actions);
            Ok(UtilityValue::Finite(value[threshold.payoff]))
        }
    }
}

fn collect_returns<F: Scalar>(
    compiled: &Compiled<'_, F>,
    actions: &[usize],
    state: usize,
    depth: usize,
    prob: F,
    accumulated: ObjectiveVector<F>,
    leaves: &mut Vec<(ObjectiveVector<F>, F)>,
) -> Result<(), OracleError> {
    if depth == compiled.horizon() {
        leaves.push((accumulated, prob));
        return Ok(());
    }
    for outcome in &compiled.states[state].actions[actions[state]].outcomes {
        let mut next = accumulated.clone();
        next.add_assign(&outcome.reward);
        match outcome.successor {
            None => leaves.push((next, prob * outcome.probability)),
            Some(successor) => {
                collect_returns(compiled, actions, successor, depth + 1, prob * outcome.probability, next, leaves)?
            }
        }
        if leaves.len() > DEFAULT_TRAJECTORY_CAP {
            return Err(OracleError::OutcomeTreeCap { cap: DEFAULT_TRAJECTORY_CAP });
        }
    }
    Ok(())
}

/// Policy maximising the expected scalarised return. Same fallback rules as
/// [`ser_optimal`].
pub fn esr_optimal<F: Scalar>(
    env: &TabularMomdp<F>,
    utility: &UtilitySpec<F>,
    mode: EsrMode,
) -> Result<OptimalPolicy<F>, OracleError> {
    let policies = enumerate_policies(env)?;
    let compiled = env.compile()?;
    let mut scored = Vec::with_capacity(policies.len());
    for policy in policies {
        let actions = compiled.resolve_policy(&policy)?;
        crate::momdp::check_termination(&compiled, &actions)?;
        let value = crate::momdp::evaluate(&compiled, &actions);
        let esr = esr_value_compiled(&compiled, &actions, utility, mode)?;
        scored.push((policy, value, esr));
    }
    pick_best(env, utility, scored)
}

/// A probability-weighted set of deterministic policies, one drawn per
/// episode.
#[derive(Debug, Clone, PartialEq)]
pub struct MixturePolicy<F> {
    components: Vec<(DeterministicPolicy, F)>,
}

impl<F: Scalar> MixturePolicy<F> {
    pub fn new(components: Vec<(DeterministicPolicy, F)>) -> Result<Self, OracleError> {
        let sum: F = components.iter().map(|(_, w)| *w).sum();
        if components.iter().any(|(_, w)| *w <= F::zero())
            || (sum.to_f64_lossy() - 1.0).abs() > 1e-9
        {
            return Err(OracleError::BadMixtureWeights(sum.to_f64_lossy()));
        }
        Ok(MixturePolicy { components })
    }

    pub fn components(&self) -> &[(DeterministicPolicy, F)] {
        &self.components
    }
}

/// Mean return of a mixture: the weight-convex combination of the component
/// policies' exact returns.
pub fn mixture_return<F: Scalar>(
    env: &TabularMomdp<F>,
    mixture: &MixturePolicy<F>,
) -> Result<ObjectiveVector<F>, OracleError> {
    let mut total = ObjectiveVector::zeros(env.num_objectives);
    for (policy, weight) in &mixture.components {
        total.add_scaled(*weight, &expected_return_exact(env, policy)?);
    }
    Ok(total)
}

/// Optimal two-component mixture under a guarded-objective constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct BestMixture<F> {
    /// Probability of playing the first policy.
    pub weight_a: F,
    pub value: ObjectiveVector<F>,
}

/// Weight `p` maximising the payoff objective of `p·A + (1−p)·B` subject to
/// the guarded objective (objective 0) reaching `threshold` (non-strict).
/// The payoff is linear in `p`, so the optimum sits at an end of the
/// feasible interval; ties prefer the larger `p`.
pub fn best_mixture_two<F: Scalar>(
    env: &TabularMomdp<F>,
    policy_a: &DeterministicPolicy,
    policy_b: &DeterministicPolicy,
    threshold: F,
) -> Result<BestMixture<F>, OracleError> {
    if env.num_objectives != 2 {
        return Err(OracleError::UnsupportedDimension(env.num_objectives));
    }
    let value_a = expected_return_exact(env, policy_a)?;
    let value_b = expected_return_exact(env, policy_b)?;
    let (guard_a, guard_b) = (value_a[0], value_b[0]);

    let zero = F::zero();
    let one = F::one();
    let slope = guard_a - guard_b;
    let (lo, hi) = if slope == zero {
        if guard_b >= threshold {
            (zero, one)
        } else {
            (one, zero) // empty
        }
    } else {
        let crossing = (threshold - guard_b) / slope;
        if slope > zero {
            (crossing.max(zero), one)
        } else {
            (zero, crossing.min(one))
        }
    };
    if lo > hi || lo > one || hi < zero {
        return Err(OracleError::MixtureInfeasible {
            threshold: threshold.to_f64_lossy(),
            max_achievable: guard_a.max(guard_b).to_f64_lossy(),
        });
    }

    let mix = |p: F| {
        let mut v = value_a.scaled(p);
        v.add_scaled(one - p, &value_b);
        v
    };
    let at_lo = mix(lo);
    let at_hi = mix(hi);
    if at_hi[1] >= at_lo[1] {
        Ok(BestMixture { weight_a: hi, value: at_hi })
    } else {
        Ok(BestMixture { weight_a: lo, value: at_lo })
    }
}
