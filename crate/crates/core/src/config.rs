//! Flat `key = value` configuration files.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! # comment (also allowed after a value)
//! key = value
//! list_key = 1, 2, 3
//! range_key = 500..20000 step 500
//! ```
//!
//! Blank lines are ignored. Every key is optional; absent keys keep their
//! defaults. Overrides use the same `key=value` form and win over the file.

use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::experiment::ExperimentConfig;
use crate::methods::MethodKind;
use crate::model::EloBase;

pub const KNOWN_KEYS: &[&str] = &[
    "n_items",
    "n_seeds",
    "base_seed",
    "budget",
    "sweep_budgets",
    "copeland_budgets",
    "methods",
    "elo_base",
    "elo_scale",
    "tie_coefficient",
    "tie_sigma",
    "k_fixed",
    "k0",
    "k_min",
    "initial_rating",
    "bt_epochs",
    "bt_learning_rate",
    "ig_epsilon",
    "swiss_r_max",
    "infogain_r_max",
    "population_mu",
    "population_sigma",
    "confidence",
    "workers",
];

/// Reads `path` (or nothing, for the literal path `default`) and applies
/// `overrides` on top.
pub fn parse_config(path: Option<&Path>, overrides: &[String]) -> Result<ExperimentConfig> {
    parse_config_over(ExperimentConfig::default(), path, overrides)
}

/// Like [`parse_config`], starting from `base` instead of the defaults.
pub fn parse_config_over(
    base: ExperimentConfig,
    path: Option<&Path>,
    overrides: &[String],
) -> Result<ExperimentConfig> {
    let mut cfg = base;
    if let Some(path) = path.filter(|p| p.as_os_str() != "default") {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::config(format!("cannot read config file {}: {e}", path.display()))
        })?;
        apply_text(&mut cfg, &text)?;
    }
    for entry in overrides {
        let (key, value) = entry
            .split_once('=')
            .ok_or_else(|| Error::config(format!("override `{entry}` is not key=value")))?;
        set_key(&mut cfg, key.trim(), value.trim(), None)?;
    }
    Ok(cfg)
}

/// Applies the lines of a config document to `cfg`.
pub fn apply_text(cfg: &mut ExperimentConfig, text: &str) -> Result<()> {
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
            key: None,
            line: Some(line_no),
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        set_key(cfg, key.trim(), value.trim(), Some(line_no))?;
    }
    Ok(())
}

fn parse<T: FromStr>(key: &str, value: &str, line: Option<usize>) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| Error::config_key(key, line, format!("cannot parse `{value}`: {e}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str, line: Option<usize>) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s, line))
        .collect()
}

/// Budget lists accept either `a, b, c` or `start..end step s` (inclusive).
fn parse_budgets(key: &str, value: &str, line: Option<usize>) -> Result<Vec<usize>> {
    let Some((start, rest)) = value.split_once("..") else {
        return parse_list(key, value, line);
    };
    let (end, step) = match rest.split_once("step") {
        Some((end, step)) => (end.trim(), step.trim()),
        None => (rest.trim(), "1"),
    };
    let start: usize = parse(key, start.trim(), line)?;
    let end: usize = parse(key, end, line)?;
    let step: usize = parse(key, step, line)?;
    if step == 0 || end < start {
        return Err(Error::config_key(
            key,
            line,
            "range needs start <= end and step > 0",
        ));
    }
    Ok((start..=end).step_by(step).collect())
}

fn set_key(cfg: &mut ExperimentConfig, key: &str, value: &str, line: Option<usize>) -> Result<()> {
    match key {
        "n_items" => cfg.n_items = parse(key, value, line)?,
        "n_seeds" => cfg.n_seeds = parse(key, value, line)?,
        "base_seed" => cfg.base_seed = parse(key, value, line)?,
        "budget" => cfg.budget = parse(key, value, line)?,
        "sweep_budgets" => cfg.sweep_budgets = parse_budgets(key, value, line)?,
        "copeland_budgets" => cfg.copeland_budgets = parse_budgets(key, value, line)?,
        "methods" => {
            cfg.methods = if value == "all" {
                MethodKind::ALL.to_vec()
            } else {
                value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<MethodKind>().map_err(|_| {
                            Error::config_key(key, line, format!("unknown method `{s}`"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        }
        "elo_base" => {
            cfg.oracle.elo_base = value.parse::<EloBase>().map_err(|_| {
                Error::config_key(key, line, format!("expected natural or ten, got `{value}`"))
            })?
        }
        "elo_scale" => cfg.oracle.elo_scale = parse(key, value, line)?,
        "tie_coefficient" => cfg.oracle.tie_coefficient = parse(key, value, line)?,
        "tie_sigma" => cfg.oracle.tie_sigma = parse(key, value, line)?,
        "k_fixed" => cfg.params.elo.k_fixed = parse(key, value, line)?,
        "k0" => cfg.params.elo.k0 = parse(key, value, line)?,
        "k_min" => cfg.params.elo.k_min = parse(key, value, line)?,
        "initial_rating" => cfg.params.elo.initial_rating = parse(key, value, line)?,
        "bt_epochs" => cfg.params.fit.epochs = parse(key, value, line)?,
        "bt_learning_rate" => cfg.params.fit.learning_rate = parse(key, value, line)?,
        "ig_epsilon" => cfg.params.ig_epsilon = parse(key, value, line)?,
        "swiss_r_max" => cfg.params.swiss_r_max = parse(key, value, line)?,
        "infogain_r_max" => {
            cfg.params.infogain_r_max = if value == "auto" {
                None
            } else {
                Some(parse(key, value, line)?)
            }
        }
        "population_mu" => cfg.population_mu = parse(key, value, line)?,
        "population_sigma" => cfg.population_sigma = parse(key, value, line)?,
        "confidence" => cfg.confidence = parse(key, value, line)?,
        "workers" => cfg.workers = parse(key, value, line)?,
        _ => return Err(Error::config_key(key, line, "unknown key")),
    }
    Ok(())
}
