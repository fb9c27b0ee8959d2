//! `solve`: exact policy-space analysis of one environment.

use std::path::Path;
use std::process::ExitCode;

use anyhow::Result;

use morlab::oracle::{self, EsrMode, OptimalPolicy, PolicyAnalysis};
use morlab::scalarise::UtilitySpec;
use morlab::Momdp;

use crate::output::{csv_fields, display_vec, fixed6, write_atomic};
use crate::spec::{parse_utility, resolve_env};

pub fn run(env_spec: &str, utility_spec: &str, out: &Path) -> Result<ExitCode> {
    let env = resolve_env(env_spec)?;
    let utility = parse_utility(utility_spec)?;
    let analysis = oracle::analyse_policies(&env)?;

    write_atomic(&out.join("policies.csv"), &policies_csv(&env, &analysis))?;
    write_atomic(&out.join("front.csv"), &front_csv(&analysis))?;

    println!(
        "environment: {} ({} states, {} deterministic policies)",
        env.name,
        env.states.len(),
        analysis.points.len()
    );
    let named = |indices: &[usize]| {
        indices.iter().map(|&i| analysis.points[i].label.clone()).collect::<Vec<_>>().join(", ")
    };
    println!("pareto front: {}", named(&analysis.pareto));
    println!("convex coverage set: {}", named(&analysis.ccs));

    let ser = oracle::ser_optimal(&env, &utility)?;
    println!("SER-optimal: {}", describe(&ser));
    let esr = oracle::esr_optimal(&env, &utility, EsrMode::EpisodeOutcome)?;
    println!("ESR-optimal (episode outcomes): {}", describe(&esr));
    if matches!(utility, UtilitySpec::Threshold(_)) {
        let per_decision = oracle::esr_optimal(&env, &utility, EsrMode::PerDecisionThreshold)?;
        println!("ESR-optimal (per-decision threshold): {}", describe(&per_decision));
    }
    println!("wrote {}", out.join("policies.csv").display());
    println!("wrote {}", out.join("front.csv").display());
    Ok(ExitCode::SUCCESS)
}

fn describe(best: &OptimalPolicy<f64>) -> String {
    if best.infeasible {
        format!(
            "infeasible under this utility; best by guarded objective: {} value {}",
            best.label,
            display_vec(&best.value)
        )
    } else {
        format!("{} value {} utility {}", best.label, display_vec(&best.value), match best.utility.finite() {
            Some(u) => fixed6(u),
            None => "-inf".to_owned(),
        })
    }
}

fn policies_csv(env: &Momdp, analysis: &PolicyAnalysis<f64>) -> String {
    let mut header: Vec<String> = vec!["policy".to_owned()];
    header.extend(env.state_ids().map(String::from));
    header.extend((0..env.num_objectives).map(|i| format!("v_{i}")));
    header.push("pareto".to_owned());
    header.push("ccs".to_owned());
    let mut lines = vec![header.join(",")];
    for point in &analysis.points {
        let mut fields = vec![point.label.clone()];
        fields.extend(
            env.state_ids().map(|s| point.policy.action_for(s).unwrap_or_default().to_owned()),
        );
        fields.push(csv_fields(&point.value));
        fields.push(point.pareto_optimal.to_string());
        fields.push(point.on_ccs.to_string());
        lines.push(fields.join(","));
    }
    lines.join("\n") + "\n"
}

fn front_csv(analysis: &PolicyAnalysis<f64>) -> String {
    let mut lines = vec!["set,policy,v_0,v_1".to_owned()];
    let mut emit = |set: &str, indices: &[usize]| {
        let mut sorted = indices.to_vec();
        sorted.sort_by(|&a, &b| {
            analysis.points[a].value[0]
                .partial_cmp(&analysis.points[b].value[0])
                .expect("finite values")
                .then(a.cmp(&b))
        });
        for i in sorted {
            let point = &analysis.points[i];
            lines.push(format!("{},{},{}", set, point.label, csv_fields(&point.value)));
        }
    };
    emit("pareto", &analysis.pareto);
    emit("ccs", &analysis.ccs);
    lines.join("\n") + "\n"
}
