use super::{thresholds, Method, ReturnProfile};
use crate::scenario::Scenario;

/// Coarse profile from unconditioned stop-region probabilities.
///
/// `S_k = P[t_k > T - q*_k]` with `t_k ~ N(kM, kV)`; entries are `S_1` and
/// `max(S_k - S_{k-1}, 0)` for `k >= 2`.
pub fn approx_profile(s: &Scenario) -> ReturnProfile {
    let tbl = thresholds(s);
    let stop: Vec<f64> = (1..=s.decision_nodes())
        .map(|k| s.hop().scaled(k).ccdf(s.deadline() - tbl.get(k)))
        .collect();
    let mut p_return = Vec::with_capacity(stop.len());
    p_return.push(stop[0]);
    p_return.extend(stop.windows(2).map(|w| (w[1] - w[0]).max(0.0)));
    ReturnProfile::complete(Method::Approx, p_return)
}
