use serde::{Deserialize, Serialize};

use crate::analytic::ReturnProfile;
use crate::error::{Error, Result};

/// Geometric law of the number of attempts until the first success.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttemptModel {
    p_success: f64,
}

impl AttemptModel {
    pub fn p_success(&self) -> f64 {
        self.p_success
    }

    /// Probability that attempt `k` (1-based) is the first success.
    pub fn pmf(&self, k: u64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        if self.p_success == 1.0 {
            return if k == 1 { 1.0 } else { 0.0 };
        }
        (1.0 - self.p_success).powf((k - 1) as f64) * self.p_success
    }

    /// Probability of success within `k` attempts.
    pub fn cdf(&self, k: u64) -> f64 {
        1.0 - (1.0 - self.p_success).powf(k as f64)
    }

    pub fn mean_attempts(&self) -> f64 {
        1.0 / self.p_success
    }
}

pub fn attempt_distribution(p_success: f64) -> Result<AttemptModel> {
    if p_success == 0.0 {
        return Err(Error::ZeroSuccess);
    }
    if !(p_success > 0.0 && p_success <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "success probability must lie in (0, 1] (got {p_success})"
        )));
    }
    Ok(AttemptModel { p_success })
}

/// Wasted round-trip travel per attempt: `sum_k P_k * 2 * cost * k`.
pub fn waste_per_attempt(profile: &ReturnProfile, cost: f64) -> f64 {
    profile
        .p_return
        .iter()
        .enumerate()
        .map(|(i, p)| p * 2.0 * cost * (i + 1) as f64)
        .sum()
}

fn success_of(profile: &ReturnProfile) -> Result<f64> {
    let p = profile.require_success()?;
    if p <= 0.0 {
        return Err(Error::ZeroSuccess);
    }
    Ok(p)
}

/// Expected waste per successful delivery, with `cost` the per-hop cost
/// (mean hop delay for a time figure, hop distance for a length figure).
pub fn waste_per_success(profile: &ReturnProfile, cost: f64) -> Result<f64> {
    Ok(waste_per_attempt(profile, cost) / success_of(profile)?)
}

/// Expected travel until delivery: the geometric sum of per-attempt waste in
/// closed form plus the final traversal `d * n`.
pub fn expected_total_distance(profile: &ReturnProfile, d: f64, n: usize) -> Result<f64> {
    Ok(waste_per_success(profile, d)? + d * n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WasteReport {
    /// Per-hop cost all figures are expressed in.
    pub unit_cost: f64,
    pub p_success: f64,
    pub waste_per_attempt: f64,
    pub waste_per_success: f64,
    pub expected_total_distance: f64,
}

pub fn waste_report(profile: &ReturnProfile, unit_cost: f64, n: usize) -> Result<WasteReport> {
    Ok(WasteReport {
        unit_cost,
        p_success: success_of(profile)?,
        waste_per_attempt: waste_per_attempt(profile, unit_cost),
        waste_per_success: waste_per_success(profile, unit_cost)?,
        expected_total_distance: expected_total_distance(profile, unit_cost, n)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::Method;

    fn worked_example() -> ReturnProfile {
        ReturnProfile::with_success(Method::Approx, vec![0.2, 0.7], 0.1).unwrap()
    }

    #[test]
    fn attempt_model() {
        let m = attempt_distribution(1.0).unwrap();
        assert_eq!(m.pmf(1), 1.0);
        assert_eq!(m.pmf(2), 0.0);
        assert_eq!(attempt_distribution(0.5).unwrap().pmf(2), 0.25);
        assert!((attempt_distribution(0.1).unwrap().mean_attempts() - 10.0).abs() < 1e-12);
        assert!(matches!(attempt_distribution(0.0), Err(Error::ZeroSuccess)));
        assert!(attempt_distribution(1.5).is_err());
    }

    #[test]
    fn pmf_partial_sums_converge() {
        for p in [0.01, 0.1, 0.288, 0.5, 0.9] {
            let m = attempt_distribution(p).unwrap();
            let k_max = (50.0 / p).ceil() as u64;
            let partial: f64 = (1..=k_max).map(|k| m.pmf(k)).sum();
            assert!((partial - 1.0).abs() <= 1e-9, "p={p}: {partial}");
            assert!(m.cdf(k_max) >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn worked_example_values() {
        let p = worked_example();
        let m = 3.0;
        assert!((waste_per_attempt(&p, m) - 3.2 * m).abs() < 1e-12);
        // 0.2, 0.7 and 0.1 are inexact in binary; the result lands one ulp below 32.
        assert!((waste_per_success(&p, 1.0).unwrap() - 32.0).abs() < 1e-12);
        assert!((waste_per_success(&p, m).unwrap() - 32.0 * m).abs() < 1e-12);
        assert!((expected_total_distance(&p, m, 4).unwrap() - 36.0 * m).abs() < 1e-12);
    }

    #[test]
    fn no_returns() {
        let p = ReturnProfile::complete(Method::Grid, vec![0.0; 5]);
        assert_eq!(waste_per_attempt(&p, 2.0), 0.0);
        assert_eq!(waste_per_success(&p, 2.0).unwrap(), 0.0);
        assert_eq!(expected_total_distance(&p, 2.0, 6).unwrap(), 12.0);
    }

    #[test]
    fn zero_success_is_an_error() {
        let p = ReturnProfile::with_success(Method::Grid, vec![1.0], 0.0).unwrap();
        assert!(matches!(waste_per_success(&p, 1.0), Err(Error::ZeroSuccess)));
        assert!(matches!(expected_total_distance(&p, 1.0, 2), Err(Error::ZeroSuccess)));
    }

    #[test]
    fn report_identities() {
        let r = waste_report(&worked_example(), 3.0, 4).unwrap();
        assert_eq!(r.waste_per_success, r.waste_per_attempt / r.p_success);
        assert_eq!(r.expected_total_distance, r.waste_per_success + 12.0);
    }
}
