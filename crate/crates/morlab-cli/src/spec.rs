//! Parsers for the small CLI argument languages and the experiment config
//! file format.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use morlab::envs::{bryce_branch, load_environment, space_traders, BryceParams};
use morlab::learners::{AlphaSchedule, Conditioning, EpsilonSchedule, Selector};
use morlab::momdp::DeterministicPolicy;
use morlab::scalarise::{LinearWeights, ThresholdUtility, TloParams, UtilitySpec};
use morlab::{Momdp, ObjVec};

/// Resolves a built-in environment name or loads an environment file.
pub fn resolve_env(spec: &str) -> Result<Momdp> {
    match spec {
        "space_traders" => Ok(space_traders()),
        "bryce" | "bryce_branch" => Ok(bryce_branch(&BryceParams::default())?),
        path => load_environment(Path::new(path))
            .with_context(|| format!("cannot load environment `{path}`")),
    }
}

/// `threshold:<t>[:strict|:nonstrict]` or `linear:<w0>,<w1>,..`
pub fn parse_utility(spec: &str) -> Result<UtilitySpec<f64>> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| anyhow!("utility `{spec}` should be `threshold:..` or `linear:..`"))?;
    match kind {
        "threshold" => {
            let (value, strict) = match rest.split_once(':') {
                None => (rest, false),
                Some((value, "strict")) => (value, true),
                Some((value, "nonstrict")) => (value, false),
                Some((_, other)) => bail!("unknown threshold mode `{other}`"),
            };
            let threshold: f64 = value.parse().context("threshold value")?;
            Ok(UtilitySpec::Threshold(ThresholdUtility::on_first(threshold, strict)))
        }
        "linear" => {
            let weights = parse_numbers(rest).context("linear weights")?;
            Ok(UtilitySpec::Linear(LinearWeights::new(weights)?))
        }
        other => bail!("unknown utility kind `{other}`"),
    }
}

/// `tlo:<threshold>` or `linear:<w0>,<w1>,..`
pub fn parse_agent(spec: &str) -> Result<Selector<f64>> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| anyhow!("agent `{spec}` should be `tlo:..` or `linear:..`"))?;
    match kind {
        "tlo" => {
            let threshold: f64 = rest.parse().context("tlo threshold")?;
            Ok(Selector::Tlo(TloParams::single(threshold)))
        }
        "linear" => {
            let weights = parse_numbers(rest).context("linear weights")?;
            Ok(Selector::Linear(LinearWeights::new(weights)?))
        }
        other => bail!("unknown agent kind `{other}`"),
    }
}

/// The oracle utility an agent spec implies: the same weights for a linear
/// agent, the strict threshold utility for a TLO agent.
pub fn default_utility(selector: &Selector<f64>) -> UtilitySpec<f64> {
    match selector {
        Selector::Linear(w) => UtilitySpec::Linear(w.clone()),
        Selector::Tlo(params) => {
            let (guarded, threshold) = params.thresholds[0];
            UtilitySpec::Threshold(
                ThresholdUtility::new(threshold, guarded, params.payoff, true)
                    .expect("valid TLO params imply a valid threshold utility"),
            )
        }
    }
}

/// `1,2,3` or inclusive `1..20`.
pub fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: u64 = lo.trim().parse().context("seed range start")?;
        let hi: u64 = hi.trim().parse().context("seed range end")?;
        if lo > hi {
            bail!("empty seed range `{spec}`");
        }
        return Ok((lo..=hi).collect());
    }
    let seeds: Vec<u64> = spec
        .split(',')
        .map(|s| s.trim().parse::<u64>().with_context(|| format!("seed `{s}`")))
        .collect::<Result<_>>()?;
    if seeds.is_empty() {
        bail!("at least one seed is required");
    }
    Ok(seeds)
}

/// `0.1` (constant) or `decay:<exponent>`.
pub fn parse_alpha(spec: &str) -> Result<AlphaSchedule<f64>> {
    if let Some(rest) = spec.strip_prefix("decay:") {
        let exponent: f64 = rest.parse().context("decay exponent")?;
        return Ok(AlphaSchedule::VisitDecay { exponent });
    }
    if spec == "decay" {
        return Ok(AlphaSchedule::VisitDecay { exponent: 0.85 });
    }
    let rate: f64 = spec.parse().context("alpha")?;
    Ok(AlphaSchedule::Constant(rate))
}

/// `0.1` (constant) or `anneal:<start>:<end>:<episodes>`.
pub fn parse_epsilon(spec: &str) -> Result<EpsilonSchedule<f64>> {
    if let Some(rest) = spec.strip_prefix("anneal:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            bail!("anneal takes `anneal:<start>:<end>:<episodes>`");
        }
        return Ok(EpsilonSchedule::LinearDecay {
            start: parts[0].parse().context("anneal start")?,
            end: parts[1].parse().context("anneal end")?,
            over_episodes: parts[2].parse().context("anneal episodes")?,
        });
    }
    let rate: f64 = spec.parse().context("epsilon")?;
    Ok(EpsilonSchedule::Constant(rate))
}

pub fn parse_conditioning(spec: &str) -> Result<Conditioning> {
    match spec {
        "plain" => Ok(Conditioning::Plain),
        "accrued" => Ok(Conditioning::Accrued),
        other => bail!("conditioning must be `plain` or `accrued`, got `{other}`"),
    }
}

/// `A=Direct,B=Indirect`
pub fn parse_policy(spec: &str) -> Result<DeterministicPolicy> {
    let mut choices = Vec::new();
    for pair in spec.split(',') {
        let (state, action) = pair
            .split_once('=')
            .ok_or_else(|| anyhow!("policy entry `{pair}` should be `STATE=ACTION`"))?;
        choices.push((state.trim().to_owned(), action.trim().to_owned()));
    }
    Ok(DeterministicPolicy::new(choices))
}

pub fn parse_initial_q(spec: &str) -> Result<ObjVec> {
    Ok(ObjVec::new(parse_numbers(spec).context("initial Q vector")?))
}

fn parse_numbers(spec: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("number `{s}`")))
        .collect()
}

/// Experiment config file: mirrors the train command.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfigFile {
    pub environment: String,
    pub agent: AgentConfigFile,
    #[serde(default)]
    pub utility: Option<String>,
    pub seeds: Vec<u64>,
    pub out_dir: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfigFile {
    #[serde(rename = "type")]
    pub kind: String,
    pub params: Vec<f64>,
    pub episodes: u64,
    #[serde(default)]
    pub alpha: Option<ScheduleField>,
    #[serde(default)]
    pub epsilon: Option<ScheduleField>,
    #[serde(default)]
    pub conditioning: Option<String>,
    #[serde(default)]
    pub initial_q: Option<Vec<f64>>,
}

/// Schedules in the config file: a bare number (constant) or the same
/// string forms the CLI accepts.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ScheduleField {
    Rate(f64),
    Spec(String),
}

impl AgentConfigFile {
    pub fn selector(&self) -> Result<Selector<f64>> {
        let params: Vec<String> = self.params.iter().map(|p| p.to_string()).collect();
        parse_agent(&format!("{}:{}", self.kind, params.join(",")))
    }

    pub fn alpha_schedule(&self) -> Result<AlphaSchedule<f64>> {
        match &self.alpha {
            None => Ok(AlphaSchedule::Constant(0.1)),
            Some(ScheduleField::Rate(rate)) => Ok(AlphaSchedule::Constant(*rate)),
            Some(ScheduleField::Spec(spec)) => parse_alpha(spec),
        }
    }

    pub fn epsilon_schedule(&self) -> Result<EpsilonSchedule<f64>> {
        match &self.epsilon {
            None => Ok(EpsilonSchedule::Constant(0.1)),
            Some(ScheduleField::Rate(rate)) => Ok(EpsilonSchedule::Constant(*rate)),
            Some(ScheduleField::Spec(spec)) => parse_epsilon(spec),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_specs() {
        assert_eq!(parse_seeds("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_seeds("7").unwrap(), vec![7]);
        assert_eq!(parse_seeds("3, 5 ,9").unwrap(), vec![3, 5, 9]);
        assert!(parse_seeds("9..3").is_err());
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn utility_specs() {
        assert!(matches!(
            parse_utility("threshold:0.88:strict").unwrap(),
            UtilitySpec::Threshold(u) if u.strict && u.threshold == 0.88
        ));
        assert!(matches!(
            parse_utility("threshold:0.6").unwrap(),
            UtilitySpec::Threshold(u) if !u.strict
        ));
        assert!(parse_utility("linear:0.5,0.5").is_ok());
        assert!(parse_utility("linear:0.9,0.9").is_err());
        assert!(parse_utility("chebyshev:1").is_err());
    }

    #[test]
    fn agent_specs() {
        assert!(matches!(parse_agent("tlo:0.88").unwrap(), Selector::Tlo(_)));
        assert!(matches!(parse_agent("linear:0,1").unwrap(), Selector::Linear(_)));
        assert!(parse_agent("sarsa:1").is_err());
    }

    #[test]
    fn schedule_specs() {
        assert_eq!(parse_alpha("0.2").unwrap(), AlphaSchedule::Constant(0.2));
        assert_eq!(parse_alpha("decay:0.7").unwrap(), AlphaSchedule::VisitDecay { exponent: 0.7 });
        assert_eq!(
            parse_epsilon("anneal:1.0:0.1:1000").unwrap(),
            EpsilonSchedule::LinearDecay { start: 1.0, end: 0.1, over_episodes: 1000 }
        );
    }
}
