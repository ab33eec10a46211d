//! Monte Carlo simulation of the turn-back protocol.
//!
//! Trials are cut into fixed-size blocks. Block `b` draws from a ChaCha8
//! stream seeded with `seed` on stream `b`, and block results are merged in
//! block order, so a report depends only on the scenario and the config and
//! never on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{decision_rule, thresholds, Decision, Diagnostics, Method, ReturnProfile, ThresholdTable};
use crate::error::{Error, Result};
use crate::planner::WasteReport;
use crate::scenario::Scenario;

pub const DEFAULT_TRIALS: u64 = 1_000_000;
pub const DEFAULT_ATTEMPT_CAP: u64 = 10_000_000;
const BLOCK_SIZE: u64 = 16_384;
/// Two-sided 99% standard normal quantile.
const Z_99: f64 = 2.575_829_303_548_901;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Policy {
    /// Turn back when the remaining hops overrun the residual budget with
    /// probability above the scenario's `p_tr`.
    Quantile,
    /// Legacy rule: turn back when the residual budget drops below `t_tr`.
    RestTime { t_tr: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    pub policy: Policy,
    /// Worker threads; `None` uses the global pool. Never affects results.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default = "default_attempt_cap")]
    pub attempt_cap: u64,
}

fn default_attempt_cap() -> u64 {
    DEFAULT_ATTEMPT_CAP
}

impl SimConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            policy: Policy::Quantile,
            workers: None,
            attempt_cap: DEFAULT_ATTEMPT_CAP,
        }
    }

    pub fn rest_time(trials: u64, seed: u64, t_tr: f64) -> Self {
        Self {
            policy: Policy::RestTime { t_tr },
            ..Self::new(trials, seed)
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    /// Full invariant check: `trials >= 1` and, for the rest-time policy,
    /// `0 < t_tr < T`.
    pub fn validate(&self, s: &Scenario) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::validation("trials", "trials must be ≥ 1"));
        }
        if let Policy::RestTime { t_tr } = self.policy {
            if !(t_tr > 0.0 && t_tr < s.deadline()) {
                return Err(Error::validation(
                    "t_tr",
                    format!("t_tr must lie strictly inside (0, deadline = {})", s.deadline()),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub policy: Policy,
    /// First turn-back counts for decision nodes `1..=n-1`.
    pub return_counts: Vec<u64>,
    pub success_count: u64,
    pub profile: ReturnProfile,
    /// 99% normal-approximation half-widths for each return entry.
    pub ci_halfwidth: Vec<f64>,
    pub success_ci_halfwidth: f64,
    /// Fraction of successful trials whose total delay stays within `T`.
    pub on_time_fraction: f64,
    pub seed: u64,
    pub trials: u64,
}

/// Attempt-level statistics from repeated deliveries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalWaste {
    pub deliveries: u64,
    pub attempts: u64,
    pub mean_attempts: f64,
    pub report: WasteReport,
    pub seed: u64,
}

enum Rule<'a> {
    Quantile(&'a ThresholdTable),
    RestTime(f64),
}

struct Trial<'a> {
    scenario: &'a Scenario,
    hop: Normal<f64>,
    rule: Rule<'a>,
}

/// Outcome of one traversal: the turn-back node, or success with total delay.
enum Outcome {
    Returned(usize),
    Delivered(f64),
}

impl<'a> Trial<'a> {
    fn new(scenario: &'a Scenario, policy: Policy, tbl: &'a ThresholdTable) -> Result<Self> {
        let hop = Normal::new(scenario.hop_mean(), scenario.hop().std_dev())
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let rule = match policy {
            Policy::Quantile => Rule::Quantile(tbl),
            Policy::RestTime { t_tr } => {
                if !(t_tr.is_finite() && t_tr >= 0.0) {
                    return Err(Error::validation("t_tr", "t_tr must be finite and ≥ 0"));
                }
                Rule::RestTime(t_tr)
            }
        };
        Ok(Self { scenario, hop, rule })
    }

    fn returns_at(&self, k: usize, t_k: f64) -> bool {
        match self.rule {
            Rule::Quantile(tbl) => decision_rule(k, t_k, self.scenario, tbl) == Decision::Return,
            Rule::RestTime(t_tr) => self.scenario.deadline() - t_k < t_tr,
        }
    }

    fn run(&self, rng: &mut ChaCha8Rng) -> Outcome {
        let mut t = 0.0;
        for k in 1..self.scenario.n() {
            t += self.hop.sample(rng);
            if self.returns_at(k, t) {
                return Outcome::Returned(k);
            }
        }
        Outcome::Delivered(t + self.hop.sample(rng))
    }
}

fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Block `b` covers `[b * BLOCK_SIZE, min((b + 1) * BLOCK_SIZE, total))`.
fn blocks(total: u64) -> impl IndexedParallelIterator<Item = (u64, u64)> {
    let count = total.div_ceil(BLOCK_SIZE) as usize;
    (0..count).into_par_iter().map(move |b| {
        let b = b as u64;
        (b, BLOCK_SIZE.min(total - b * BLOCK_SIZE))
    })
}

fn in_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

#[derive(Default)]
struct Tally {
    returns: Vec<u64>,
    successes: u64,
    on_time: u64,
}

fn tally(s: &Scenario, cfg: &SimConfig) -> Result<Tally> {
    if cfg.trials == 0 {
        return Err(Error::validation("trials", "trials must be ≥ 1"));
    }
    let tbl = thresholds(s);
    let trial = Trial::new(s, cfg.policy, &tbl)?;
    let nodes = s.decision_nodes();
    let per_block: Vec<Tally> = in_pool(cfg.workers, || {
        blocks(cfg.trials)
            .map(|(b, size)| {
                let mut rng = block_rng(cfg.seed, b);
                let mut t = Tally {
                    returns: vec![0; nodes],
                    ..Tally::default()
                };
                for _ in 0..size {
                    match trial.run(&mut rng) {
                        Outcome::Returned(k) => t.returns[k - 1] += 1,
                        Outcome::Delivered(total) => {
                            t.successes += 1;
                            if total <= s.deadline() {
                                t.on_time += 1;
                            }
                        }
                    }
                }
                t
            })
            .collect()
    })?;
    let mut total = Tally {
        returns: vec![0; nodes],
        ..Tally::default()
    };
    for t in per_block {
        for (acc, c) in total.returns.iter_mut().zip(&t.returns) {
            *acc += c;
        }
        total.successes += t.successes;
        total.on_time += t.on_time;
    }
    Ok(total)
}

fn ci_halfwidth(p: f64, trials: u64) -> f64 {
    Z_99 * (p * (1.0 - p) / trials as f64).sqrt()
}

fn report(s: &Scenario, cfg: &SimConfig) -> Result<SimReport> {
    let t = tally(s, cfg)?;
    let n = cfg.trials as f64;
    let p_return: Vec<f64> = t.returns.iter().map(|c| *c as f64 / n).collect();
    let p_success = t.successes as f64 / n;
    Ok(SimReport {
        policy: cfg.policy,
        ci_halfwidth: p_return.iter().map(|p| ci_halfwidth(*p, cfg.trials)).collect(),
        success_ci_halfwidth: ci_halfwidth(p_success, cfg.trials),
        profile: ReturnProfile {
            method: Method::MonteCarlo,
            nodes: s.decision_nodes(),
            p_return,
            p_success: Some(p_success),
            diagnostics: Diagnostics::default(),
        },
        return_counts: t.returns,
        success_count: t.successes,
        on_time_fraction: if t.successes == 0 {
            0.0
        } else {
            t.on_time as f64 / t.successes as f64
        },
        seed: cfg.seed,
        trials: cfg.trials,
    })
}

/// Empirical first-return profile under `cfg.policy`.
///
/// Hop delays are plain normal draws; negative draws are kept.
pub fn simulate_profile(s: &Scenario, cfg: &SimConfig) -> Result<SimReport> {
    report(s, cfg)
}

/// The legacy fixed rest-time rule: turn back at node `k` iff `T - t_k < t_tr`.
///
/// Accepts any finite `t_tr >= 0`; [`SimConfig::validate`] enforces the strict
/// `0 < t_tr < T` range for user input.
pub fn simulate_baseline(s: &Scenario, cfg: &SimConfig) -> Result<SimReport> {
    if !matches!(cfg.policy, Policy::RestTime { .. }) {
        return Err(Error::InvalidArgument(
            "baseline simulation needs a rest_time policy".into(),
        ));
    }
    report(s, cfg)
}

/// Repeats attempts until each of `cfg.trials` deliveries succeeds.
///
/// A turn-back at node `k` wastes `2 * d * k`; the successful traversal costs
/// `d * n`. Fails with [`Error::NoSuccess`] when more than `cfg.attempt_cap`
/// attempts would be needed.
pub fn simulate_attempts(s: &Scenario, cfg: &SimConfig) -> Result<EmpiricalWaste> {
    if cfg.trials == 0 {
        return Err(Error::validation("trials", "trials must be ≥ 1"));
    }
    let tbl = thresholds(s);
    let trial = Trial::new(s, cfg.policy, &tbl)?;
    let d = s.hop_distance();
    let cap = cfg.attempt_cap;

    // (attempts, wasted distance) per block, or None once the cap is blown.
    let per_block: Vec<Option<(u64, f64)>> = in_pool(cfg.workers, || {
        blocks(cfg.trials)
            .map(|(b, size)| {
                let mut rng = block_rng(cfg.seed, b);
                let mut attempts = 0u64;
                let mut waste = 0.0;
                for _ in 0..size {
                    loop {
                        attempts += 1;
                        if attempts > cap {
                            return None;
                        }
                        match trial.run(&mut rng) {
                            Outcome::Returned(k) => waste += 2.0 * d * k as f64,
                            Outcome::Delivered(_) => break,
                        }
                    }
                }
                Some((attempts, waste))
            })
            .collect()
    })?;

    let mut attempts = 0u64;
    let mut waste = 0.0;
    for block in per_block {
        let (a, w) = block.ok_or(Error::NoSuccess { cap })?;
        attempts += a;
        waste += w;
    }
    if attempts > cap {
        return Err(Error::NoSuccess { cap });
    }
    let deliveries = cfg.trials as f64;
    let waste_per_success = waste / deliveries;
    Ok(EmpiricalWaste {
        deliveries: cfg.trials,
        attempts,
        mean_attempts: attempts as f64 / deliveries,
        report: WasteReport {
            unit_cost: d,
            p_success: deliveries / attempts as f64,
            waste_per_attempt: waste / attempts as f64,
            waste_per_success,
            expected_total_distance: waste_per_success + d * s.n() as f64,
        },
        seed: cfg.seed,
    })
}
