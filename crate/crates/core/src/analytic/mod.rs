//! Analytic first-return probabilities.
//!
//! A packet accumulates hop delay `t_k = x_1 + ... + x_k`. At decision node `k`
//! it turns back when the residual budget `T - t_k` is smaller than the
//! threshold `q*_k`, the residual at which the remaining `n - k` hops overrun it
//! with probability exactly `p_tr`. `P_k` is the unconditional probability that
//! the first turn-back happens at node `k`.
//!
//! Three engines are provided: nested adaptive quadrature (depth-capped), grid
//! propagation of the surviving sub-density (full profile, the default), and a
//! coarse approximation that ignores the survival conditioning.

mod approx;
mod grid;
mod quadrature;

use serde::{Deserialize, Serialize};

pub use approx::approx_profile;
pub use grid::{return_profile_grid, return_profile_grid_with, DEFAULT_GRID_POINTS, MIN_GRID_POINTS};
pub use quadrature::{return_profile_quadrature, DEFAULT_MAX_DEPTH, DEFAULT_QUADRATURE_TOL};

use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Critical residual budgets `q*_j` for decision nodes `j = 1..=n-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    q_star: Vec<f64>,
}

impl ThresholdTable {
    /// Arbitrary per-node thresholds, e.g. a constant rest-time rule.
    pub fn from_values(q_star: Vec<f64>) -> Result<Self> {
        if q_star.is_empty() {
            return Err(Error::InvalidArgument("threshold table needs at least one node".into()));
        }
        if q_star.iter().any(|q| !q.is_finite()) {
            return Err(Error::InvalidArgument("thresholds must be finite".into()));
        }
        Ok(Self { q_star })
    }

    pub fn constant(nodes: usize, value: f64) -> Result<Self> {
        Self::from_values(vec![value; nodes])
    }

    /// Threshold at decision node `j` (1-based).
    pub fn get(&self, j: usize) -> f64 {
        assert!(
            (1..=self.q_star.len()).contains(&j),
            "node index {j} outside 1..={}",
            self.q_star.len()
        );
        self.q_star[j - 1]
    }

    pub fn len(&self) -> usize {
        self.q_star.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q_star.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.q_star
    }

    /// Largest accumulated delay at node `j` that still continues: `T - q*_j`.
    pub fn budgets(&self, deadline: f64) -> Vec<f64> {
        self.q_star.iter().map(|q| deadline - q).collect()
    }
}

/// `q*_j = inv_ccdf(p_tr, {(n-j)M, (n-j)V})` for every decision node.
pub fn thresholds(s: &Scenario) -> ThresholdTable {
    let n = s.n();
    let q_star = (1..n)
        .map(|j| {
            s.hop()
                .scaled(n - j)
                .inv_ccdf(s.p_tr())
                .expect("p_tr validated inside (0, 1)")
        })
        .collect();
    ThresholdTable { q_star }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Continue,
    Return,
}

/// Turn back at node `k` iff `t_k > T - q*_k`; a tie continues.
///
/// Equivalently, turn back iff the remaining `n - k` hops overrun the residual
/// budget with probability greater than `p_tr`.
///
/// # Panics
///
/// If `k` is not a decision node of `tbl`.
pub fn decision_rule(k: usize, t_k: f64, s: &Scenario, tbl: &ThresholdTable) -> Decision {
    if t_k > s.deadline() - tbl.get(k) {
        Decision::Return
    } else {
        Decision::Continue
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    Grid,
    Approx,
    MonteCarlo,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Quadrature => "quadrature",
            Method::Grid => "grid",
            Method::Approx => "approx",
            Method::MonteCarlo => "montecarlo",
        })
    }
}

/// Numerical side information attached to a profile.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Directly integrated mass that clears every check (grid engine only).
    /// `1 - sum(p_return) - survival_mass` is the dropped negative-delay mass.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub survival_mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_estimate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// First-return probabilities `P_1..P_m` (`m <= n - 1`) and, when the profile
/// is complete, the success probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnProfile {
    pub method: Method,
    /// Number of decision nodes in the scenario (`n - 1`).
    pub nodes: usize,
    pub p_return: Vec<f64>,
    pub p_success: Option<f64>,
    #[serde(default)]
    pub diagnostics: Diagnostics,
}

impl ReturnProfile {
    /// A complete profile whose success probability is `1 - sum(p_return)`.
    pub fn complete(method: Method, p_return: Vec<f64>) -> Self {
        let p_success = 1.0 - p_return.iter().sum::<f64>();
        Self {
            method,
            nodes: p_return.len(),
            p_return,
            p_success: Some(p_success),
            diagnostics: Diagnostics::default(),
        }
    }

    /// A complete profile with an explicitly given success probability.
    pub fn with_success(method: Method, p_return: Vec<f64>, p_success: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_success) || p_return.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidArgument("profile entries must lie in [0, 1]".into()));
        }
        Ok(Self {
            method,
            nodes: p_return.len(),
            p_return,
            p_success: Some(p_success),
            diagnostics: Diagnostics::default(),
        })
    }

    /// `P_k` for 1-based `k`, if computed.
    pub fn get(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.p_return.get(i).copied())
    }

    pub fn total_return(&self) -> f64 {
        self.p_return.iter().sum()
    }

    pub fn is_complete(&self) -> bool {
        self.p_success.is_some() && self.p_return.len() == self.nodes
    }

    pub fn require_success(&self) -> Result<f64> {
        self.p_success.ok_or(Error::IncompleteProfile {
            depth: self.p_return.len(),
            nodes: self.nodes,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactMethod {
    Grid,
    Quadrature,
}

/// `H(p_tr) = 1 - sum_k P_k` over all decision nodes.
pub fn success_probability(s: &Scenario, method: ExactMethod) -> Result<f64> {
    let profile = match method {
        ExactMethod::Grid => return_profile_grid(s, DEFAULT_GRID_POINTS)?,
        ExactMethod::Quadrature => return_profile_quadrature(s, s.decision_nodes(), DEFAULT_QUADRATURE_TOL)?,
    };
    profile.require_success()
}
