//! `evaluate`: Monte Carlo cross-check of a policy against its exact value.

use std::process::ExitCode;

use anyhow::Result;

use morlab::momdp::{expected_return_exact, monte_carlo_return};

use crate::output::{display_vec, fixed6};
use crate::spec::{parse_policy, resolve_env};

pub fn run(env_spec: &str, policy_spec: &str, episodes: u64, seed: u64) -> Result<ExitCode> {
    let env = resolve_env(env_spec)?;
    let policy = parse_policy(policy_spec)?;
    let exact = expected_return_exact(&env, &policy)?;
    let (estimate, stderr) = monte_carlo_return(&env, &policy, episodes, seed)?;

    let z: Vec<String> = (0..env.num_objectives)
        .map(|i| {
            let diff = estimate[i] - exact[i];
            if stderr[i] == 0.0 {
                if diff == 0.0 { fixed6(0.0) } else { "inf".to_owned() }
            } else {
                fixed6(diff / stderr[i])
            }
        })
        .collect();

    println!("policy: {} ({})", env.policy_label(&policy)?, policy);
    println!("episodes: {episodes}  seed: {seed}");
    println!("exact:       {}", display_vec(&exact));
    println!("monte carlo: {}", display_vec(&estimate));
    println!("stderr:      {}", display_vec(&stderr));
    println!("z-score:     ({})", z.join(", "));
    Ok(ExitCode::SUCCESS)
}
