#![allow(dead_code)]

use morlab::envs::space_traders;
use morlab::momdp::DeterministicPolicy;
use morlab::{Momdp, ObjVec};

/// The nine Space Traders policies with their exact mean returns, in
/// enumeration order. Policy bigrams name the actions at A and B.
pub const POLICY_TABLE: [(&str, [f64; 2]); 9] = [
    ("II", [1.0, -22.0]),
    ("ID", [0.9, -19.9]),
    ("IT", [0.85, -12.0]),
    ("DI", [0.9, -14.5]),
    ("DD", [0.81, -12.61]),
    ("DT", [0.765, -5.5]),
    ("TI", [0.85, -8.5]),
    ("TD", [0.765, -6.715]),
    ("TT", [0.7225, 0.0]),
];

pub fn st() -> Momdp {
    space_traders()
}

fn action_name(initial: char) -> &'static str {
    match initial {
        'I' => "Indirect",
        'D' => "Direct",
        'T' => "Teleport",
        other => panic!("unknown action initial {other}"),
    }
}

/// Builds a Space Traders policy from its bigram, e.g. `"DI"`.
pub fn st_policy(bigram: &str) -> DeterministicPolicy {
    let mut chars = bigram.chars();
    let a = action_name(chars.next().expect("bigram has two characters"));
    let b = action_name(chars.next().expect("bigram has two characters"));
    DeterministicPolicy::new([("A", a), ("B", b)])
}

pub fn policy_value(bigram: &str) -> ObjVec {
    let (_, v) = POLICY_TABLE
        .iter()
        .find(|(label, _)| *label == bigram)
        .expect("known policy bigram");
    ObjVec::new(v.to_vec())
}

pub fn assert_vec_close(actual: &ObjVec, expected: &[f64], tol: f64) {
    let expected = ObjVec::new(expected.to_vec());
    assert!(
        actual.approx_eq(&expected, tol),
        "expected {expected} within {tol}, got {actual}"
    );
}
