use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::NormalParams;

/// One problem instance: a path of `n` hops with i.i.d. normal hop delays,
/// a total delay budget and the turn-back threshold probability.
///
/// Decision nodes are `1..=n-1`; node `n` is the destination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScenario", into = "RawScenario")]
pub struct Scenario {
    n: usize,
    hop: NormalParams,
    deadline: f64,
    p_tr: f64,
    hop_distance: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    n: usize,
    hop_mean: f64,
    hop_var: f64,
    deadline: f64,
    p_tr: f64,
    hop_distance: f64,
}

impl TryFrom<RawScenario> for Scenario {
    type Error = Error;

    fn try_from(r: RawScenario) -> Result<Self> {
        Scenario::new(r.n, r.hop_mean, r.hop_var, r.deadline, r.p_tr)?.with_hop_distance(r.hop_distance)
    }
}

impl From<Scenario> for RawScenario {
    fn from(s: Scenario) -> Self {
        RawScenario {
            n: s.n,
            hop_mean: s.hop.mean(),
            hop_var: s.hop.var(),
            deadline: s.deadline,
            p_tr: s.p_tr,
            hop_distance: s.hop_distance,
        }
    }
}

pub(crate) fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::validation("n", "n ≥ 2 required"));
    }
    Ok(())
}

pub(crate) fn check_positive(field: &str, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::validation(
            field,
            format!("{field} must be finite and > 0 (got {value})"),
        ));
    }
    Ok(())
}

pub(crate) fn check_p_tr(p_tr: f64) -> Result<()> {
    if !(p_tr > 0.0 && p_tr < 1.0) {
        return Err(Error::validation("p_tr", "p_tr must lie strictly inside (0,1)"));
    }
    Ok(())
}

impl Scenario {
    /// Builds a validated scenario. The hop distance defaults to `hop_mean`,
    /// so distance-based and time-based waste figures coincide.
    pub fn new(n: usize, hop_mean: f64, hop_var: f64, deadline: f64, p_tr: f64) -> Result<Self> {
        check_n(n)?;
        check_positive("hop_mean", hop_mean)?;
        check_positive("hop_var", hop_var)?;
        check_positive("deadline", deadline)?;
        check_p_tr(p_tr)?;
        Ok(Scenario {
            n,
            hop: NormalParams::new(hop_mean, hop_var)?,
            deadline,
            p_tr,
            hop_distance: hop_mean,
        })
    }

    pub fn with_hop_distance(mut self, d: f64) -> Result<Self> {
        check_positive("hop_distance", d)?;
        self.hop_distance = d;
        Ok(self)
    }

    pub fn with_p_tr(mut self, p_tr: f64) -> Result<Self> {
        check_p_tr(p_tr)?;
        self.p_tr = p_tr;
        Ok(self)
    }

    pub fn with_deadline(mut self, deadline: f64) -> Result<Self> {
        check_positive("deadline", deadline)?;
        self.deadline = deadline;
        Ok(self)
    }

    /// Index of the end node; also the number of hops.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of nodes where a turn-back decision is taken (`n - 1`).
    #[inline]
    pub fn decision_nodes(&self) -> usize {
        self.n - 1
    }

    #[inline]
    pub fn hop(&self) -> NormalParams {
        self.hop
    }

    #[inline]
    pub fn hop_mean(&self) -> f64 {
        self.hop.mean()
    }

    #[inline]
    pub fn hop_var(&self) -> f64 {
        self.hop.var()
    }

    #[inline]
    pub fn deadline(&self) -> f64 {
        self.deadline
    }

    #[inline]
    pub fn p_tr(&self) -> f64 {
        self.p_tr
    }

    #[inline]
    pub fn hop_distance(&self) -> f64 {
        self.hop_distance
    }
}
