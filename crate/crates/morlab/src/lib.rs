//! morlab — exact oracles and tabular value-based agents for small
//! multiobjective MDPs (MOMDPs) with stochastic transitions.
//!
//! The library models finite-horizon tabular MOMDPs with vector rewards
//! (every objective maximised, costs stored negated) and provides three
//! layers on top:
//!
//! * [`momdp`] / [`envs`] — the environment model, validation, seeded
//!   simulation, exact policy evaluation, the built-in `space_traders` and
//!   `bryce_branch` benchmarks, and a JSON file format.
//! * [`oracle`] — exact policy-space analysis: enumeration, Pareto front,
//!   convex coverage set, SER and ESR optima, mixture policies, and
//!   multi-policy value backups with policy tags.
//! * [`learners`] — model-free agents: linear-scalarised Q-learning and
//!   thresholded-lexicographic (TLO) Q-learning conditioned on the accrued
//!   reward, plus greedy-policy extraction and analytic backward reasoning.
//!
//! Core math is generic over the scalar type via [`Scalar`]; the aliases
//! below fix the default `f64` instantiation used by the CLI and the tests.

pub mod envs;
pub mod learners;
pub mod momdp;
pub mod oracle;
pub mod render;
pub mod rng;
pub mod scalar;
pub mod scalarise;
pub mod vector;

pub use scalar::Scalar;
pub use vector::ObjectiveVector;

/// Objective vector over `f64`, the default instantiation.
pub type ObjVec = ObjectiveVector<f64>;
/// Environment over `f64`, the default instantiation.
pub type Momdp = momdp::TabularMomdp<f64>;
/// Q-table over `f64`, the default instantiation.
pub type QTable = learners::QTable<f64>;

#[cfg(test)]
mod tests {
    fn assert_send_sync<T: Send + Sync>() {}

    #[test]
    fn shared_types_are_thread_safe() {
        assert_send_sync::<crate::Momdp>();
        assert_send_sync::<crate::QTable>();
        assert_send_sync::<crate::momdp::DeterministicPolicy>();
    }
}
