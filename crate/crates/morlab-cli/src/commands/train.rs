//! `train` and `run`: seeded training sweeps reported against the oracle.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};

use morlab::learners::{self, LearnerConfig, Selector};
use morlab::momdp::expected_return_exact;
use morlab::oracle;
use morlab::scalarise::UtilitySpec;
use morlab::Momdp;

use crate::output::{csv_fields, display_vec, fixed6, write_atomic};
use crate::spec::{
    self, default_utility, parse_agent, parse_alpha, parse_conditioning, parse_epsilon,
    parse_initial_q, parse_seeds, parse_utility, resolve_env,
};

pub struct Args {
    pub env: String,
    pub agent: String,
    pub episodes: u64,
    pub seeds: String,
    pub alpha: Option<String>,
    pub epsilon: Option<String>,
    pub conditioning: Option<String>,
    pub initial_q: Option<String>,
    pub utility: Option<String>,
    pub out: PathBuf,
}

pub fn run(args: Args) -> Result<ExitCode> {
    let env = resolve_env(&args.env)?;
    let selector = parse_agent(&args.agent)?;
    let mut config = LearnerConfig::new(
        args.episodes,
        0,
        match &args.conditioning {
            Some(spec) => parse_conditioning(spec)?,
            None => selector.required_conditioning(),
        },
    );
    if let Some(alpha) = &args.alpha {
        config = config.with_alpha(parse_alpha(alpha)?);
    }
    if let Some(epsilon) = &args.epsilon {
        config = config.with_epsilon(parse_epsilon(epsilon)?);
    }
    if let Some(initial_q) = &args.initial_q {
        config = config.with_initial_q(parse_initial_q(initial_q)?);
    }
    let utility = match &args.utility {
        Some(spec) => parse_utility(spec)?,
        None => default_utility(&selector),
    };
    let seeds = parse_seeds(&args.seeds)?;
    execute(&env, &selector, config, &utility, &seeds, &args.out)
}

pub fn run_config(path: &Path) -> Result<ExitCode> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let file: spec::ExperimentConfigFile =
        serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))?;
    let env = resolve_env(&file.environment)?;
    let selector = file.agent.selector()?;
    let mut config = LearnerConfig::new(
        file.agent.episodes,
        0,
        match &file.agent.conditioning {
            Some(spec) => parse_conditioning(spec)?,
            None => selector.required_conditioning(),
        },
    )
    .with_alpha(file.agent.alpha_schedule()?)
    .with_epsilon(file.agent.epsilon_schedule()?);
    if let Some(initial_q) = &file.agent.initial_q {
        config = config.with_initial_q(morlab::ObjVec::new(initial_q.clone()));
    }
    let utility = match &file.utility {
        Some(spec) => parse_utility(spec)?,
        None => default_utility(&selector),
    };
    if file.seeds.is_empty() {
        anyhow::bail!("config must list at least one seed");
    }
    execute(&env, &selector, config, &utility, &file.seeds, Path::new(&file.out_dir))
}

struct SeedReport {
    seed: u64,
    label: String,
    value: morlab::ObjVec,
    utility_value: String,
    dominated: bool,
    runtime_ms: u128,
}

fn execute(
    env: &Momdp,
    selector: &Selector<f64>,
    base_config: LearnerConfig<f64>,
    utility: &UtilitySpec<f64>,
    seeds: &[u64],
    out: &Path,
) -> Result<ExitCode> {
    let analysis = oracle::analyse_policies(env)?;
    let ser = oracle::ser_optimal(env, utility)?;

    let mut reports = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let start = Instant::now();
        let mut config = base_config.clone();
        config.seed = seed;
        let (table, _log) = learners::train(env, selector, &config)?;
        let policy = learners::extract_greedy_policy(env, &table, selector)?;
        let runtime_ms = start.elapsed().as_millis();

        let mut qtable_csv = Vec::new();
        table.write_csv(env, &mut qtable_csv)?;
        write_atomic(&out.join(format!("qtable_seed{seed}.csv")), &String::from_utf8(qtable_csv)?)?;

        // Exact values always come from the oracle, never from estimates.
        let value = expected_return_exact(env, &policy)?;
        let dominated = analysis.points.iter().any(|p| p.value.dominates(&value));
        reports.push(SeedReport {
            seed,
            label: env.policy_label(&policy)?,
            value: value.clone(),
            utility_value: match utility.apply(&value).finite() {
                Some(u) => fixed6(u),
                None => "-inf".to_owned(),
            },
            dominated,
            runtime_ms,
        });
    }

    let mut report_lines =
        vec!["seed,policy,v_0,v_1,utility,ser_policy,ser_v_0,ser_v_1,pareto_dominated,runtime_ms".to_owned()];
    for r in &reports {
        report_lines.push(format!(
            "{},{},{},{},{},{},{},{}",
            r.seed,
            r.label,
            csv_fields(&r.value),
            r.utility_value,
            ser.label,
            csv_fields(&ser.value),
            r.dominated,
            r.runtime_ms
        ));
    }
    write_atomic(&out.join("report.csv"), &(report_lines.join("\n") + "\n"))?;

    let mut counts: std::collections::BTreeMap<&str, usize> = Default::default();
    for r in &reports {
        *counts.entry(&r.label).or_default() += 1;
    }
    let mut summary = String::new();
    summary.push_str(&format!("environment: {}\n", env.name));
    summary.push_str(&format!("agent: {}\n", selector.describe()));
    summary.push_str(&format!(
        "episodes: {}  alpha: {}  epsilon: {}\n",
        base_config.episodes,
        base_config.alpha.describe(),
        base_config.epsilon.describe()
    ));
    summary.push_str(&format!("seeds: {}\n", seeds.len()));
    summary.push_str("greedy policy fractions:\n");
    for (label, count) in &counts {
        summary.push_str(&format!(
            "  {}: {} ({}/{})\n",
            label,
            fixed6(*count as f64 / seeds.len() as f64),
            count,
            seeds.len()
        ));
    }
    summary.push_str(&format!(
        "oracle SER-optimal: {} value {}\n",
        ser.label,
        display_vec(&ser.value)
    ));
    let dominated = reports.iter().filter(|r| r.dominated).count();
    summary.push_str(&format!("seeds landing on a Pareto-dominated policy: {dominated}/{}\n", seeds.len()));
    write_atomic(&out.join("summary.txt"), &summary)?;
    print!("{summary}");
    println!("wrote {}", out.join("report.csv").display());
    Ok(ExitCode::SUCCESS)
}
