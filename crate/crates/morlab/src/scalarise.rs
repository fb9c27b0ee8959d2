//! Utility functions and action-ordering operators: linear scalarisation,
//! the hard-threshold utility, and the thresholded lexicographic ordering
//! (TLO) comparator.

use std::cmp::Ordering;

use thiserror::Error;

use crate::scalar::Scalar;
use crate::vector::ObjectiveVector;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScalariseError {
    #[error("weights must be non-negative, got {0}")]
    NegativeWeight(f64),
    #[error("weights must sum to 1 (got {0})")]
    WeightSum(f64),
    #[error("length mismatch: vector has {vector} components, weights have {weights}")]
    LengthMismatch { vector: usize, weights: usize },
    #[error("objective indices must be distinct and valid")]
    BadObjectiveIndices,
    #[error("cannot take the argmax of an empty sequence")]
    EmptyInput,
}

/// Non-negative weights summing to one (within 1e-9).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearWeights<F>(Vec<F>);

impl<F: Scalar> LinearWeights<F> {
    pub fn new(weights: Vec<F>) -> Result<Self, ScalariseError> {
        for w in &weights {
            if *w < F::zero() {
                return Err(ScalariseError::NegativeWeight(w.to_f64_lossy()));
            }
        }
        let sum: F = weights.iter().copied().sum();
        if (sum.to_f64_lossy() - 1.0).abs() > 1e-9 {
            return Err(ScalariseError::WeightSum(sum.to_f64_lossy()));
        }
        Ok(LinearWeights(weights))
    }

    /// Two-objective weights `(w0, 1 - w0)`.
    pub fn two_objective(w0: F) -> Result<Self, ScalariseError> {
        Self::new(vec![w0, F::one() - w0])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[F] {
        &self.0
    }
}

/// `w · v`
pub fn linear_scalarise<F: Scalar>(
    v: &ObjectiveVector<F>,
    w: &LinearWeights<F>,
) -> Result<F, ScalariseError> {
    if v.len() != w.len() {
        return Err(ScalariseError::LengthMismatch { vector: v.len(), weights: w.len() });
    }
    Ok(dot(v, w.as_slice()))
}

/// Unvalidated dot product; greedy selection only needs the ordering, which
/// is invariant to positive rescaling of the weights.
pub fn dot<F: Scalar>(v: &ObjectiveVector<F>, w: &[F]) -> F {
    v.iter().zip(w).map(|(a, b)| *a * *b).sum()
}

/// Hard-threshold utility: the payoff component when the guarded component
/// clears the threshold, negative infinity otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdUtility<F> {
    pub threshold: F,
    pub guarded: usize,
    pub payoff: usize,
    /// Whether clearing the threshold requires a strict `>`.
    pub strict: bool,
}

impl<F: Scalar> ThresholdUtility<F> {
    pub fn new(threshold: F, guarded: usize, payoff: usize, strict: bool) -> Result<Self, ScalariseError> {
        if guarded == payoff {
            return Err(ScalariseError::BadObjectiveIndices);
        }
        Ok(ThresholdUtility { threshold, guarded, payoff, strict })
    }

    /// Threshold on objective 0, payoff objective 1: the common form for the
    /// two-objective environments.
    pub fn on_first(threshold: F, strict: bool) -> Self {
        ThresholdUtility { threshold, guarded: 0, payoff: 1, strict }
    }

    pub fn satisfied(&self, v: &ObjectiveVector<F>) -> bool {
        if self.strict {
            v[self.guarded] > self.threshold
        } else {
            v[self.guarded] >= self.threshold
        }
    }
}

/// A utility value with a distinguished sentinel ordered below all reals;
/// avoids floating-point infinity arithmetic in expectations.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum UtilityValue<F> {
    NegInfinity,
    Finite(F),
}

impl<F: Scalar> UtilityValue<F> {
    pub fn is_finite(&self) -> bool {
        matches!(self, UtilityValue::Finite(_))
    }

    pub fn finite(&self) -> Option<F> {
        match self {
            UtilityValue::Finite(x) => Some(*x),
            UtilityValue::NegInfinity => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            UtilityValue::Finite(x) => x.to_f64_lossy(),
            UtilityValue::NegInfinity => f64::NEG_INFINITY,
        }
    }

    /// Total order; rewards and returns are finite by environment invariant.
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).expect("utility values are comparable")
    }
}

impl<F: Scalar> std::fmt::Display for UtilityValue<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UtilityValue::Finite(x) => write!(f, "{x}"),
            UtilityValue::NegInfinity => write!(f, "-inf"),
        }
    }
}

/// Applies a hard-threshold utility to a return vector.
pub fn threshold_utility<F: Scalar>(v: &ObjectiveVector<F>, u: &ThresholdUtility<F>) -> UtilityValue<F> {
    if u.satisfied(v) {
        UtilityValue::Finite(v[u.payoff])
    } else {
        UtilityValue::NegInfinity
    }
}

/// Thresholded lexicographic ordering parameters: `(objective, threshold)`
/// pairs in priority order, then an unthresholded payoff objective.
#[derive(Debug, Clone, PartialEq)]
pub struct TloParams<F> {
    pub thresholds: Vec<(usize, F)>,
    pub payoff: usize,
}

impl<F: Scalar> TloParams<F> {
    pub fn new(thresholds: Vec<(usize, F)>, payoff: usize) -> Result<Self, ScalariseError> {
        let mut indices: Vec<usize> = thresholds.iter().map(|(i, _)| *i).collect();
        indices.push(payoff);
        indices.sort_unstable();
        let before = indices.len();
        indices.dedup();
        if indices.len() != before {
            return Err(ScalariseError::BadObjectiveIndices);
        }
        Ok(TloParams { thresholds, payoff })
    }

    /// Single threshold on objective 0, payoff objective 1.
    pub fn single(threshold: F) -> Self {
        TloParams { thresholds: vec![(0, threshold)], payoff: 1 }
    }

    pub fn max_objective_index(&self) -> usize {
        self.thresholds.iter().map(|(i, _)| *i).chain([self.payoff]).max().unwrap_or(0)
    }
}

/// TLO comparison: clip each thresholded objective at its threshold and
/// compare lexicographically, then compare the payoff objective. A total
/// preorder over vectors of equal length.
pub fn tlo_compare<F: Scalar>(
    a: &ObjectiveVector<F>,
    b: &ObjectiveVector<F>,
    params: &TloParams<F>,
) -> Ordering {
    for &(objective, threshold) in &params.thresholds {
        let clipped_a = a[objective].min(threshold);
        let clipped_b = b[objective].min(threshold);
        match clipped_a.partial_cmp(&clipped_b).expect("finite objective values") {
            Ordering::Equal => {}
            ord => return ord,
        }
    }
    a[params.payoff].partial_cmp(&b[params.payoff]).expect("finite objective values")
}

/// Maximal element under `compare`; ties broken by lowest index.
pub fn argmax_by<A, F: Scalar>(
    items: &[(A, ObjectiveVector<F>)],
    mut compare: impl FnMut(&ObjectiveVector<F>, &ObjectiveVector<F>) -> Ordering,
) -> Result<&A, ScalariseError> {
    let mut best: Option<&(A, ObjectiveVector<F>)> = None;
    for item in items {
        match &best {
            None => best = Some(item),
            Some(current) => {
                if compare(&item.1, &current.1) == Ordering::Greater {
                    best = Some(item);
                }
            }
        }
    }
    best.map(|(a, _)| a).ok_or(ScalariseError::EmptyInput)
}

/// Maximal element under a utility function; ties broken by lowest index.
pub fn argmax_by_utility<A, F: Scalar>(
    items: &[(A, ObjectiveVector<F>)],
    mut utility: impl FnMut(&ObjectiveVector<F>) -> UtilityValue<F>,
) -> Result<&A, ScalariseError> {
    argmax_by(items, |x, y| utility(x).total_cmp(&utility(y)))
}

/// A named utility over return vectors: linear weights or hard threshold.
#[derive(Debug, Clone, PartialEq)]
pub enum UtilitySpec<F> {
    Linear(LinearWeights<F>),
    Threshold(ThresholdUtility<F>),
}

impl<F: Scalar> UtilitySpec<F> {
    pub fn apply(&self, v: &ObjectiveVector<F>) -> UtilityValue<F> {
        match self {
            UtilitySpec::Linear(w) => UtilityValue::Finite(dot(v, w.as_slice())),
            UtilitySpec::Threshold(u) => threshold_utility(v, u),
        }
    }

    /// The guarded objective of a threshold utility, if any.
    pub fn guarded_objective(&self) -> Option<usize> {
        match self {
            UtilitySpec::Linear(_) => None,
            UtilitySpec::Threshold(u) => Some(u.guarded),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            UtilitySpec::Linear(w) => {
                let ws: Vec<String> = w.as_slice().iter().map(|x| format!("{x}")).collect();
                format!("linear({})", ws.join(","))
            }
            UtilitySpec::Threshold(u) => format!(
                "threshold({} on objective {}, {}, payoff objective {})",
                u.threshold,
                u.guarded,
                if u.strict { "strict" } else { "non-strict" },
                u.payoff
            ),
        }
    }
}
