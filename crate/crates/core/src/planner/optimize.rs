use serde::{Deserialize, Serialize};

use crate::analytic::{success_probability, ExactMethod};
use crate::error::{Error, Result};
use crate::scenario::Scenario;

pub const P_TR_MIN: f64 = 1e-6;
pub const P_TR_MAX: f64 = 1.0 - 1e-6;
pub const DEFAULT_TOL: f64 = 1e-3;
pub const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BracketStep {
    pub lo: f64,
    pub hi: f64,
    pub h_lo: f64,
    pub h_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOutcome {
    pub target: f64,
    pub p_tr: f64,
    /// Success probability reached at `p_tr`.
    pub achieved: f64,
    /// Target lies outside `[H(P_TR_MIN), H(P_TR_MAX)]`; `p_tr` is the nearest endpoint.
    pub unattainable: bool,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<BracketStep>,
}

/// The `p_tr` whose grid-method success probability is within `tol` of
/// `target`. The scenario's own `p_tr` is ignored.
pub fn optimize_ptr(s: &Scenario, target: f64, tol: f64) -> Result<OptimizeOutcome> {
    optimize_monotone(
        |p| success_probability(&s.with_p_tr(p)?, ExactMethod::Grid),
        target,
        tol,
        MAX_ITERATIONS,
    )
}

/// Bracketing bisection for a nondecreasing `h` on `[P_TR_MIN, P_TR_MAX]`.
pub fn optimize_monotone<H>(mut h: H, target: f64, tol: f64, max_iterations: usize) -> Result<OptimizeOutcome>
where
    H: FnMut(f64) -> Result<f64>,
{
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::ProbabilityDomain(target));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!("tolerance must be > 0 (got {tol})")));
    }
    let (mut lo, mut hi) = (P_TR_MIN, P_TR_MAX);
    let (mut h_lo, mut h_hi) = (h(lo)?, h(hi)?);
    let done = |p_tr, achieved, unattainable, iterations, trace| OptimizeOutcome {
        target,
        p_tr,
        achieved,
        unattainable,
        iterations,
        trace,
    };

    if target < h_lo - tol {
        return Ok(done(lo, h_lo, true, 0, Vec::new()));
    }
    if target > h_hi + tol {
        return Ok(done(hi, h_hi, true, 0, Vec::new()));
    }
    if (h_lo - target).abs() <= tol {
        return Ok(done(lo, h_lo, false, 0, Vec::new()));
    }
    if (h_hi - target).abs() <= tol {
        return Ok(done(hi, h_hi, false, 0, Vec::new()));
    }

    let mut trace = vec![BracketStep { lo, hi, h_lo, h_hi }];
    for iteration in 1..=max_iterations {
        let mid = 0.5 * (lo + hi);
        let h_mid = h(mid)?;
        if (h_mid - target).abs() <= tol {
            return Ok(done(mid, h_mid, false, iteration, trace));
        }
        if h_mid < target {
            lo = mid;
            h_lo = h_mid;
        } else {
            hi = mid;
            h_hi = h_mid;
        }
        trace.push(BracketStep { lo, hi, h_lo, h_hi });
    }
    Err(Error::NonConvergence {
        iterations: max_iterations,
        lo,
        hi,
    })
}
