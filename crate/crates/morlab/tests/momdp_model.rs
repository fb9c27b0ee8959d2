//! Environment model: validation reports, transition sampling, exact
//! evaluation against the known policy table, and Monte Carlo consistency.

mod common;

use common::{assert_vec_close, st, st_policy, POLICY_TABLE};
use morlab::momdp::{
    expected_return_exact, monte_carlo_return, simulate_episode, ActionDef, DeterministicPolicy,
    MomdpError, Outcome, StateDef, Successor, TabularMomdp,
};
use morlab::rng::{stream_rng, STREAM_ENV};
use morlab::{Momdp, ObjVec};

fn outcome(p: f64, reward: [f64; 2], next: Option<&str>) -> Outcome<f64> {
    Outcome {
        probability: p,
        reward: ObjVec::new(reward.to_vec()),
        successor: match next {
            Some(id) => Successor::State(id.to_owned()),
            None => Successor::Terminal,
        },
    }
}

#[test]
fn builtin_environment_validates_clean() {
    assert!(st().validate().is_valid());
}

#[test]
fn validation_reports_bad_probability_sum() {
    let mut env = st();
    env.states[0].actions[1].outcomes[0].probability = 0.9;
    env.states[0].actions[1].outcomes[1].probability = 0.2;
    let report = env.validate();
    assert!(!report.is_valid());
    let rendered = report.to_string();
    assert!(rendered.contains("probabilities sum to 1.1"), "{rendered}");
}

#[test]
fn validation_reports_unknown_successor() {
    let mut env = st();
    env.states[0].actions[0].outcomes[0].successor = Successor::State("C".to_owned());
    let rendered = env.validate().to_string();
    assert!(rendered.contains("unknown successor `C`"), "{rendered}");
}

#[test]
fn validation_reports_missing_actions() {
    let mut env = st();
    env.states[1].actions.clear();
    let rendered = env.validate().to_string();
    assert!(rendered.contains("has no actions"), "{rendered}");
}

#[test]
fn step_follows_the_declared_transition() {
    let env = st();
    let mut rng = stream_rng(0, 0, STREAM_ENV);
    // A sole outcome: any generator state gives the same transition.
    let result = env.step("A", "Indirect", &mut rng).unwrap();
    assert_eq!(result.successor, Successor::State("B".to_owned()));
    assert_vec_close(&result.reward, &[0.0, -12.0], 0.0);
    assert!(!result.is_terminal);

    let success = env.step("A", "Teleport", &mut stream_rng(3, 0, STREAM_ENV)).unwrap();
    if success.successor == Successor::State("B".to_owned()) {
        assert_vec_close(&success.reward, &[0.0, 0.0], 0.0);
        assert!(!success.is_terminal);
    } else {
        assert!(success.is_terminal);
    }
}

#[test]
fn step_rejects_unknown_state_and_action() {
    let env = st();
    let mut rng = stream_rng(0, 0, STREAM_ENV);
    assert!(matches!(env.step("Z", "Direct", &mut rng), Err(MomdpError::UnknownState(_))));
    assert!(matches!(env.step("A", "Fly", &mut rng), Err(MomdpError::UnknownAction { .. })));
}

#[test]
fn sampling_matches_outcome_probabilities() {
    // Outcome sampling is shared by step and the simulators; estimate the
    // B/Direct success rate from a B-start copy of the environment.
    let mut env = st();
    env.start_state = "B".to_owned();
    env.horizon = 1;
    let policy = DeterministicPolicy::new([("A", "Direct"), ("B", "Direct")]);
    let (mean, _) = monte_carlo_return(&env, &policy, 1_000_000, 11).unwrap();
    assert!((mean[0] - 0.9).abs() <= 0.001, "success fraction {}", mean[0]);
}

#[test]
fn exact_returns_reproduce_the_policy_table() {
    let env = st();
    for (bigram, expected) in POLICY_TABLE {
        let value = expected_return_exact(&env, &st_policy(bigram)).unwrap();
        assert_vec_close(&value, &expected, 1e-9);
    }
}

#[test]
fn deterministic_policy_monte_carlo_is_exact() {
    let (mean, stderr) = monte_carlo_return(&st(), &st_policy("II"), 10, 0).unwrap();
    assert_eq!(mean, ObjVec::new(vec![1.0, -22.0]));
    assert_eq!(stderr, ObjVec::new(vec![0.0, 0.0]));
}

#[test]
fn monte_carlo_agrees_with_exact_values() {
    let env = st();
    for (bigram, seed) in [("DI", 5u64), ("DD", 6u64)] {
        let exact = expected_return_exact(&env, &st_policy(bigram)).unwrap();
        let (mean, stderr) = monte_carlo_return(&env, &st_policy(bigram), 100_000, seed).unwrap();
        for i in 0..2 {
            let diff = (mean[i] - exact[i]).abs();
            assert!(
                diff <= 3.0 * stderr[i] || diff == 0.0,
                "{bigram} objective {i}: |{} - {}| > 3 * {}",
                mean[i],
                exact[i],
                stderr[i]
            );
        }
    }
}

#[test]
fn identical_seeds_give_identical_episodes() {
    let env = st();
    let policy = st_policy("DD");
    for episode in 0..20u64 {
        let a = simulate_episode(&env, &policy, &mut stream_rng(42, episode, STREAM_ENV)).unwrap();
        let b = simulate_episode(&env, &policy, &mut stream_rng(42, episode, STREAM_ENV)).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn builtin_episode_returns_have_binary_success_component() {
    let env = st();
    for (bigram, _) in POLICY_TABLE {
        let policy = st_policy(bigram);
        for episode in 0..200u64 {
            let result =
                simulate_episode(&env, &policy, &mut stream_rng(9, episode, STREAM_ENV)).unwrap();
            let success = result.return_total[0];
            assert!(success == 0.0 || success == 1.0, "{bigram}: {success}");
            assert!(!result.truncated);
        }
    }
}

fn looping_env() -> Momdp {
    TabularMomdp {
        name: "loop".to_owned(),
        num_objectives: 2,
        horizon: 2,
        start_state: "loop".to_owned(),
        states: vec![StateDef {
            id: "loop".to_owned(),
            actions: vec![ActionDef {
                name: "stay".to_owned(),
                outcomes: vec![outcome(1.0, [0.0, -1.0], Some("loop"))],
            }],
        }],
    }
}

#[test]
fn simulation_truncates_at_the_horizon() {
    let env = looping_env();
    let policy = DeterministicPolicy::new([("loop", "stay")]);
    let result = simulate_episode(&env, &policy, &mut stream_rng(0, 0, STREAM_ENV)).unwrap();
    assert!(result.truncated);
    assert_eq!(result.steps.len(), 2);
    assert_vec_close(&result.return_total, &[0.0, -2.0], 0.0);
}

#[test]
fn exact_evaluation_refuses_unbounded_policies_naming_the_cycle() {
    let env = looping_env();
    let policy = DeterministicPolicy::new([("loop", "stay")]);
    match expected_return_exact(&env, &policy) {
        Err(MomdpError::HorizonInsufficient { horizon: 2, witness }) => {
            assert!(witness.contains("cycle loop -> loop"), "{witness}");
        }
        other => panic!("expected horizon error, got {other:?}"),
    }
}

#[test]
fn mean_immediate_rewards_match_the_transition_table() {
    let env = st();
    assert_vec_close(&env.mean_immediate_reward("A", "Indirect").unwrap(), &[0.0, -12.0], 1e-12);
    assert_vec_close(&env.mean_immediate_reward("A", "Direct").unwrap(), &[0.0, -5.5], 1e-12);
    assert_vec_close(&env.mean_immediate_reward("A", "Teleport").unwrap(), &[0.0, 0.0], 1e-12);
    assert_vec_close(&env.mean_immediate_reward("B", "Indirect").unwrap(), &[1.0, -10.0], 1e-12);
    assert_vec_close(&env.mean_immediate_reward("B", "Direct").unwrap(), &[0.9, -7.9], 1e-12);
    assert_vec_close(&env.mean_immediate_reward("B", "Teleport").unwrap(), &[0.85, 0.0], 1e-12);
}

#[test]
fn policy_labels_use_action_initials_when_unique() {
    let env = st();
    assert_eq!(env.policy_label(&st_policy("DI")).unwrap(), "DI");
    assert_eq!(env.policy_label(&st_policy("TT")).unwrap(), "TT");
}
