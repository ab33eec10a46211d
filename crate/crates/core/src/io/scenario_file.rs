//! Scenario files are TOML:
//!
//! ```toml
//! schema_version = 1
//! n = 6
//! hop_mean = 3
//! hop_var = 1
//! deadline = 16
//! p_tr = 0.9
//! hop_distance = 3   # optional, defaults to hop_mean
//!
//! [sim]              # optional
//! trials = 1000000
//! seed = 0
//! policy = "rest_time"
//! t_tr = 12
//! ```

use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::Spanned;

use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::sim::{Policy, SimConfig, DEFAULT_ATTEMPT_CAP, DEFAULT_TRIALS};

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    schema_version: Option<Spanned<i64>>,
    n: Spanned<i64>,
    hop_mean: Spanned<f64>,
    hop_var: Spanned<f64>,
    deadline: Spanned<f64>,
    p_tr: Spanned<f64>,
    hop_distance: Option<Spanned<f64>>,
    sim: Option<SimDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimDoc {
    trials: Option<Spanned<i64>>,
    seed: Option<Spanned<i64>>,
    policy: Option<Spanned<String>>,
    t_tr: Option<Spanned<f64>>,
    attempt_cap: Option<Spanned<i64>>,
}

/// Simulation settings as written in the file; absent keys stay `None`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimSettings {
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub policy: Option<Policy>,
    pub attempt_cap: Option<u64>,
}

impl SimSettings {
    /// Applies the defaults: 10^6 trials, seed 0, quantile policy.
    pub fn to_config(&self) -> SimConfig {
        SimConfig {
            trials: self.trials.unwrap_or(DEFAULT_TRIALS),
            seed: self.seed.unwrap_or(0),
            policy: self.policy.unwrap_or(Policy::Quantile),
            workers: None,
            attempt_cap: self.attempt_cap.unwrap_or(DEFAULT_ATTEMPT_CAP),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub sim: SimSettings,
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<LoadedScenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text, path)
}

struct Locator<'a> {
    text: &'a str,
}

impl Locator<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        let end = span.start.min(self.text.len());
        1 + self.text.as_bytes()[..end].iter().filter(|b| **b == b'\n').count()
    }

    fn at<T>(&self, span: Range<usize>, r: Result<T>) -> Result<T> {
        r.map_err(|e| match e {
            Error::Validation { field, reason, .. } => Error::Validation {
                field,
                reason,
                line: Some(self.line(span)),
            },
            other => other,
        })
    }
}

fn count(loc: &Locator, field: &str, v: &Spanned<i64>, min: i64) -> Result<u64> {
    let value = *v.get_ref();
    if value < min {
        return loc.at(
            v.span(),
            Err(Error::validation(
                field,
                format!("{field} must be ≥ {min} (got {value})"),
            )),
        );
    }
    Ok(value as u64)
}

/// Parses and validates scenario text; `origin` only labels errors.
pub fn parse_scenario(text: &str, origin: &Path) -> Result<LoadedScenario> {
    let parse_err = |message: String| Error::Parse {
        path: PathBuf::from(origin),
        message,
    };
    let loc = Locator { text };
    let doc: ScenarioDoc = toml::from_str(text).map_err(|e| {
        let msg = e.message().trim().to_string();
        parse_err(match e.span() {
            Some(span) => format!("line {}: {msg}", loc.line(span)),
            None => msg,
        })
    })?;

    if let Some(v) = &doc.schema_version {
        if *v.get_ref() != SCENARIO_SCHEMA_VERSION as i64 {
            return loc.at(
                v.span(),
                Err(Error::validation(
                    "schema_version",
                    format!(
                        "unsupported schema_version {} (expected {SCENARIO_SCHEMA_VERSION})",
                        v.get_ref()
                    ),
                )),
            );
        }
    }

    let n = *doc.n.get_ref();
    if n < 2 {
        return loc.at(doc.n.span(), Err(Error::validation("n", "n ≥ 2 required")));
    }
    // Validate field by field so each error points at its own line.
    let scenario = Scenario::new(
        n as usize,
        *doc.hop_mean.get_ref(),
        *doc.hop_var.get_ref(),
        *doc.deadline.get_ref(),
        *doc.p_tr.get_ref(),
    )
    .map_err(|e| {
        let span = match &e {
            Error::Validation { field, .. } => match field.as_str() {
                "hop_mean" => doc.hop_mean.span(),
                "hop_var" => doc.hop_var.span(),
                "deadline" => doc.deadline.span(),
                "p_tr" => doc.p_tr.span(),
                _ => doc.n.span(),
            },
            _ => doc.n.span(),
        };
        loc.at::<()>(span, Err(e)).unwrap_err()
    })?;
    let scenario = match &doc.hop_distance {
        Some(d) => loc.at(d.span(), scenario.with_hop_distance(*d.get_ref()))?,
        None => scenario,
    };

    let mut sim = SimSettings::default();
    if let Some(block) = &doc.sim {
        if let Some(t) = &block.trials {
            sim.trials = Some(count(&loc, "trials", t, 1)?);
        }
        if let Some(s) = &block.seed {
            sim.seed = Some(count(&loc, "seed", s, 0)?);
        }
        if let Some(c) = &block.attempt_cap {
            sim.attempt_cap = Some(count(&loc, "attempt_cap", c, 1)?);
        }
        let policy_name = block.policy.as_ref().map(|p| p.get_ref().as_str());
        sim.policy = match (policy_name, &block.t_tr) {
            (None | Some("quantile"), None) => block.policy.as_ref().map(|_| Policy::Quantile),
            (None | Some("rest_time"), Some(t_tr)) => {
                let policy = Policy::RestTime { t_tr: *t_tr.get_ref() };
                let probe = SimConfig {
                    policy,
                    ..SimConfig::new(1, 0)
                };
                loc.at(t_tr.span(), probe.validate(&scenario))?;
                Some(policy)
            }
            (Some("quantile"), Some(t_tr)) => {
                return loc.at(
                    t_tr.span(),
                    Err(Error::validation("t_tr", "t_tr only applies to the rest_time policy")),
                );
            }
            (Some("rest_time"), None) => {
                let p = block.policy.as_ref().expect("policy present");
                return loc.at(
                    p.span(),
                    Err(Error::validation("t_tr", "rest_time policy requires t_tr")),
                );
            }
            (Some(other), _) => {
                let p = block.policy.as_ref().expect("policy present");
                return loc.at(
                    p.span(),
                    Err(Error::validation(
                        "policy",
                        format!("unknown policy \"{other}\" (expected \"quantile\" or \"rest_time\")"),
                    )),
                );
            }
        };
    }
    Ok(LoadedScenario { scenario, sim })
}
