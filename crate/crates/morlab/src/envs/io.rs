//! Environment file format: a JSON document with fields `name`,
//! `num_objectives`, `horizon`, `start_state` and `states`, where each state
//! is `{id, actions: [{name, outcomes: [{p, reward: [..], next}]}]}` and
//! `next` is a state id or `"TERMINAL"`. Rewards are arrays of length
//! `num_objectives`.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::momdp::{TabularMomdp, ValidationReport};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read environment file: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse environment file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("environment file is invalid:\n{0}")]
    Invalid(ValidationReport),
}

/// Parses and validates an environment file.
pub fn load_environment<F: Scalar + DeserializeOwned>(
    path: impl AsRef<Path>,
) -> Result<TabularMomdp<F>, LoadError> {
    let text = fs::read_to_string(path)?;
    let env: TabularMomdp<F> = serde_json::from_str(&text)?;
    let report = env.validate();
    if !report.is_valid() {
        return Err(LoadError::Invalid(report));
    }
    Ok(env)
}

/// Writes an environment as pretty-printed JSON; `load(save(env))` is the
/// identity.
pub fn save_environment<F: Scalar + Serialize>(
    env: &TabularMomdp<F>,
    path: impl AsRef<Path>,
) -> Result<(), LoadError> {
    fs::write(path, to_json_string(env)?)?;
    Ok(())
}

pub fn to_json_string<F: Scalar + Serialize>(env: &TabularMomdp<F>) -> Result<String, LoadError> {
    let mut text = serde_json::to_string_pretty(env)?;
    text.push('\n');
    Ok(text)
}
