//! Property tests for the ordering operators, front computations, mixture
//! arithmetic and the environment file format.

mod common;

use std::cmp::Ordering;

use common::{st, st_policy, POLICY_TABLE};
use morlab::envs::{load_environment, save_environment};
use morlab::momdp::expected_return_exact;
use morlab::oracle::{ccs_two_objective, mixture_return, pareto_filter, MixturePolicy};
use morlab::scalarise::{
    dot, threshold_utility, tlo_compare, ThresholdUtility, TloParams, UtilityValue,
};
use morlab::ObjVec;
use proptest::prelude::*;

fn vec2_strategy() -> impl Strategy<Value = ObjVec> {
    (-20.0f64..20.0, -20.0f64..20.0).prop_map(|(a, b)| ObjVec::new(vec![a, b]))
}

fn points_strategy() -> impl Strategy<Value = Vec<ObjVec>> {
    prop::collection::vec(vec2_strategy(), 1..24)
}

proptest! {
    #[test]
    fn tlo_is_a_total_preorder(
        a in vec2_strategy(),
        b in vec2_strategy(),
        c in vec2_strategy(),
        threshold in -10.0f64..10.0,
    ) {
        let params = TloParams::single(threshold);
        // Reflexivity and antisymmetry.
        prop_assert_eq!(tlo_compare(&a, &a, &params), Ordering::Equal);
        prop_assert_eq!(tlo_compare(&a, &b, &params), tlo_compare(&b, &a, &params).reverse());
        // Transitivity of "not worse than".
        if tlo_compare(&a, &b, &params) != Ordering::Less
            && tlo_compare(&b, &c, &params) != Ordering::Less
        {
            prop_assert_ne!(tlo_compare(&a, &c, &params), Ordering::Less);
        }
    }

    #[test]
    fn tlo_reduces_to_payoff_order_above_the_threshold(
        payoff_a in -20.0f64..20.0,
        payoff_b in -20.0f64..20.0,
        excess_a in 0.001f64..5.0,
        excess_b in 0.001f64..5.0,
        threshold in -5.0f64..5.0,
    ) {
        let params = TloParams::single(threshold);
        let a = ObjVec::new(vec![threshold + excess_a, payoff_a]);
        let b = ObjVec::new(vec![threshold + excess_b, payoff_b]);
        prop_assert_eq!(
            tlo_compare(&a, &b, &params),
            payoff_a.partial_cmp(&payoff_b).unwrap()
        );
    }

    #[test]
    fn threshold_utility_rejects_exactly_the_guard_failures(
        v in vec2_strategy(),
        threshold in -10.0f64..10.0,
        strict in any::<bool>(),
    ) {
        let u = ThresholdUtility::on_first(threshold, strict);
        let cleared = if strict { v[0] > threshold } else { v[0] >= threshold };
        match threshold_utility(&v, &u) {
            UtilityValue::Finite(x) => {
                prop_assert!(cleared);
                prop_assert_eq!(x, v[1]);
            }
            UtilityValue::NegInfinity => prop_assert!(!cleared),
        }
    }

    #[test]
    fn linear_argmax_is_invariant_to_positive_rescaling(
        points in points_strategy(),
        w0 in 0.0f64..1.0,
        scale in 0.01f64..100.0,
    ) {
        let w = [w0, 1.0 - w0];
        let scaled = [w[0] * scale, w[1] * scale];
        let argmax = |weights: &[f64]| {
            let mut best = 0;
            for i in 1..points.len() {
                if dot(&points[i], weights) > dot(&points[best], weights) {
                    best = i;
                }
            }
            best
        };
        prop_assert_eq!(argmax(&w), argmax(&scaled));
    }

    #[test]
    fn pareto_filter_keeps_exactly_the_undominated(points in points_strategy()) {
        let kept = pareto_filter(&points);
        prop_assert!(!kept.is_empty());
        for (i, point) in points.iter().enumerate() {
            let dominated = points.iter().any(|other| other.dominates(point));
            prop_assert_eq!(kept.contains(&i), !dominated);
        }
        // No member dominates another member.
        for &i in &kept {
            for &j in &kept {
                prop_assert!(!points[i].dominates(&points[j]));
            }
        }
    }

    #[test]
    fn coverage_set_is_on_the_front_and_attains_every_linear_max(
        points in points_strategy(),
    ) {
        let pareto = pareto_filter(&points);
        let ccs = ccs_two_objective(&points).unwrap();
        for index in &ccs {
            prop_assert!(pareto.contains(index));
        }
        // For every non-negative weighting the coverage set attains the
        // maximum scalarised value.
        for step in 0..=20 {
            let w = [step as f64 * 0.05, 1.0 - step as f64 * 0.05];
            let overall = points.iter().map(|p| dot(p, &w)).fold(f64::NEG_INFINITY, f64::max);
            let on_ccs = ccs.iter().map(|&i| dot(&points[i], &w)).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((overall - on_ccs).abs() <= 1e-9 * overall.abs().max(1.0));
        }
    }

    #[test]
    fn mixture_return_is_linear_in_the_weights(weight in 0.001f64..0.999) {
        let env = st();
        let a = st_policy("TI");
        let b = st_policy("DD");
        let mixture = MixturePolicy::new(vec![(a.clone(), weight), (b.clone(), 1.0 - weight)]).unwrap();
        let mixed = mixture_return(&env, &mixture).unwrap();
        let mut expected = expected_return_exact(&env, &a).unwrap().scaled(weight);
        expected.add_scaled(1.0 - weight, &expected_return_exact(&env, &b).unwrap());
        prop_assert!(mixed.approx_eq(&expected, 1e-12));
    }

    #[test]
    fn exact_returns_scale_affinely_with_rewards(
        factor in -3.0f64..3.0,
        policy_index in 0usize..9,
    ) {
        let mut env = st();
        for state in &mut env.states {
            for action in &mut state.actions {
                for outcome in &mut action.outcomes {
                    outcome.reward = outcome.reward.scaled(factor);
                }
            }
        }
        let policy = st_policy(POLICY_TABLE[policy_index].0);
        let scaled = expected_return_exact(&env, &policy).unwrap();
        let base = expected_return_exact(&st(), &policy).unwrap().scaled(factor);
        prop_assert!(scaled.approx_eq(&base, 1e-9));
    }

    #[test]
    fn environment_files_round_trip(
        rewards in prop::collection::vec(-100.0f64..100.0, 14),
        horizon in 1usize..10,
    ) {
        let mut env = st();
        env.horizon = horizon;
        let mut next = rewards.into_iter();
        for state in &mut env.states {
            for action in &mut state.actions {
                for outcome in &mut action.outcomes {
                    outcome.reward = ObjVec::new(vec![next.next().unwrap(), 0.25]);
                }
            }
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("env.json");
        save_environment(&env, &path).unwrap();
        let loaded: morlab::Momdp = load_environment(&path).unwrap();
        prop_assert_eq!(loaded, env);
    }
}
