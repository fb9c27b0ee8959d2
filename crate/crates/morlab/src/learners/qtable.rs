//! Vector-valued Q-tables keyed by (state, quantised accrued reward).

use std::collections::HashMap;
use std::io::{self, Write};

use crate::momdp::TabularMomdp;
use crate::render::fixed6;
use crate::scalar::Scalar;
use crate::vector::ObjectiveVector;

/// Fixed-point quantisation scale for accrued-reward keys: six decimals.
pub const ACCRUED_SCALE: f64 = 1e6;

/// Quantises an accrued-reward vector to a hashable key. The quantisation
/// guards against representation drift without merging distinct sums (the
/// built-in rewards are exact one-decimal values).
pub fn quantise_accrued<F: Scalar>(accrued: &ObjectiveVector<F>) -> Vec<i64> {
    accrued.iter().map(|x| (x.to_f64_lossy() * ACCRUED_SCALE).round() as i64).collect()
}

pub fn dequantise(key: &[i64]) -> Vec<f64> {
    key.iter().map(|&k| k as f64 / ACCRUED_SCALE).collect()
}

/// A base state together with the quantised sum of rewards received so far
/// this episode. Plain (unconditioned) learners use an empty accrued key.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AugmentedState {
    pub state: usize,
    pub accrued: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QEntry<F> {
    pub q: ObjectiveVector<F>,
    pub visits: u64,
}

/// Action-value estimates: one vector estimate and visit count per action of
/// each visited augmented state. Unvisited entries read as the table's
/// initial vector (zeros by default; per-objective return upper bounds when
/// training with optimistic initialisation).
#[derive(Debug, Clone, PartialEq)]
pub struct QTable<F> {
    initial: ObjectiveVector<F>,
    states: HashMap<AugmentedState, Vec<QEntry<F>>>,
}

impl<F: Scalar> QTable<F> {
    pub fn new(num_objectives: usize) -> Self {
        QTable { initial: ObjectiveVector::zeros(num_objectives), states: HashMap::new() }
    }

    pub fn with_initial(initial: ObjectiveVector<F>) -> Self {
        QTable { initial, states: HashMap::new() }
    }

    pub fn num_objectives(&self) -> usize {
        self.initial.len()
    }

    /// Value an entry holds before its first update.
    pub fn initial(&self) -> &ObjectiveVector<F> {
        &self.initial
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn entries(&self, key: &AugmentedState) -> Option<&[QEntry<F>]> {
        self.states.get(key).map(Vec::as_slice)
    }

    pub(crate) fn entries_mut(&mut self, key: &AugmentedState, n_actions: usize) -> &mut [QEntry<F>] {
        let initial = &self.initial;
        self.states
            .entry(key.clone())
            .or_insert_with(|| vec![QEntry { q: initial.clone(), visits: 0 }; n_actions])
            .as_mut_slice()
    }

    /// Q-vector for `(key, action)`, or `None` if the state was never
    /// visited (unvisited actions of visited states read as zero vectors).
    pub fn value(&self, key: &AugmentedState, action: usize) -> Option<&ObjectiveVector<F>> {
        self.entries(key).and_then(|entries| entries.get(action)).map(|e| &e.q)
    }

    /// CSV export: `state,accrued_0..,action,q_0..,visits`, one row per
    /// (augmented state, action), rows sorted lexicographically.
    pub fn write_csv<W: Write>(&self, env: &TabularMomdp<F>, out: &mut W) -> io::Result<()> {
        let mut header = vec!["state".to_owned()];
        header.extend((0..self.num_objectives()).map(|i| format!("accrued_{i}")));
        header.push("action".to_owned());
        header.extend((0..self.num_objectives()).map(|i| format!("q_{i}")));
        header.push("visits".to_owned());
        writeln!(out, "{}", header.join(","))?;

        let mut rows: Vec<String> = Vec::new();
        for (key, entries) in &self.states {
            let state = &env.states[key.state];
            let accrued = dequantise(&key.accrued);
            for (a, entry) in entries.iter().enumerate() {
                let mut fields = vec![state.id.clone()];
                if key.accrued.is_empty() {
                    fields.extend((0..self.num_objectives()).map(|_| fixed6(0.0)));
                } else {
                    fields.extend(accrued.iter().map(|&x| fixed6(x)));
                }
                fields.push(state.actions[a].name.clone());
                fields.extend(entry.q.iter().map(|x| fixed6(x.to_f64_lossy())));
                fields.push(entry.visits.to_string());
                rows.push(fields.join(","));
            }
        }
        rows.sort_unstable();
        for row in rows {
            writeln!(out, "{row}")?;
        }
        Ok(())
    }
}
