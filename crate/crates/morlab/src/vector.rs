//! Fixed-length vectors of per-objective rewards and returns.
//!
//! All objectives are maximised; costs and times are stored negated.

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// One real number per objective. For the built-in environments objective 0
/// is the mission-success indicator/probability and objective 1 is negated
/// time/cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectiveVector<F>(Vec<F>);

impl<F: Scalar> ObjectiveVector<F> {
    pub fn new(values: Vec<F>) -> Self {
        ObjectiveVector(values)
    }

    pub fn zeros(len: usize) -> Self {
        ObjectiveVector(vec![F::zero(); len])
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

    pub fn as_mut_slice(&mut self) -> &mut [F] {
        &mut self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, F> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.0.len(), other.0.len(), "objective count mismatch");
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a = *a + *b;
        }
    }

    pub fn add_scaled(&mut self, weight: F, other: &Self) {
        assert_eq!(self.0.len(), other.0.len(), "objective count mismatch");
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a = *a + weight * *b;
        }
    }

    pub fn scaled(&self, factor: F) -> Self {
        ObjectiveVector(self.0.iter().map(|x| *x * factor).collect())
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    /// Pareto dominance: `self` is at least as good in every objective and
    /// strictly better in at least one. Equal vectors do not dominate.
    pub fn dominates(&self, other: &Self) -> bool {
        assert_eq!(self.0.len(), other.0.len(), "objective count mismatch");
        let mut strict = false;
        for (a, b) in self.0.iter().zip(&other.0) {
            if a < b {
                return false;
            }
            if a > b {
                strict = true;
            }
        }
        strict
    }

    pub fn max_abs_diff(&self, other: &Self) -> F {
        assert_eq!(self.0.len(), other.0.len(), "objective count mismatch");
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (*a - *b).abs())
            .fold(F::zero(), F::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: F) -> bool {
        self.0.len() == other.0.len() && self.max_abs_diff(other) <= tol
    }
}

impl<F> Index<usize> for ObjectiveVector<F> {
    type Output = F;

    fn index(&self, i: usize) -> &F {
        &self.0[i]
    }
}

impl<F: Scalar> From<Vec<F>> for ObjectiveVector<F> {
    fn from(values: Vec<F>) -> Self {
        ObjectiveVector(values)
    }
}

impl<F: Scalar> fmt::Display for ObjectiveVector<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Convenience constructor for two-objective vectors, the common case.
pub fn vec2<F: Scalar>(a: f64, b: f64) -> ObjectiveVector<F> {
    ObjectiveVector::new(vec![F::of(a), F::of(b)])
}
