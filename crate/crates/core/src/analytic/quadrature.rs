use rayon::prelude::*;

use super::{thresholds, Diagnostics, Method, ReturnProfile};
use crate::error::{Error, Result};
use crate::gauss_kronrod;
use crate::normal::NormalParams;
use crate::scenario::Scenario;

pub const DEFAULT_MAX_DEPTH: usize = 4;
pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-4;

struct Nested<'a> {
    hop: NormalParams,
    budgets: &'a [f64],
}

impl Nested<'_> {
    /// Probability mass, given accumulated delay `acc` after `level` surviving
    /// hops, of the first turn-back happening at node `target` (both 1-based).
    ///
    /// Each nested hop delay ranges over `[0, b_level - acc]`; the last hop
    /// before `target` is handled in closed form.
    fn first_return(&self, level: usize, acc: f64, target: usize, tol: f64) -> Result<(f64, f64)> {
        if level + 1 == target {
            return Ok((self.hop.ccdf(self.budgets[target - 1] - acc), 0.0));
        }
        let upper = self.budgets[level] - acc;
        if upper <= 0.0 {
            return Ok((0.0, 0.0));
        }
        let inner_tol = 0.5 * tol;
        let mut failure = None;
        let mut inner_err: f64 = 0.0;
        let est = gauss_kronrod::integrate(
            |x| {
                if failure.is_some() {
                    return 0.0;
                }
                match self.first_return(level + 1, acc + x, target, inner_tol) {
                    Ok((v, e)) => {
                        inner_err = inner_err.max(e);
                        self.hop.pdf(x) * v
                    }
                    Err(err) => {
                        failure = Some(err);
                        0.0
                    }
                }
            },
            0.0,
            upper,
            0.5 * tol,
        )?;
        if let Some(err) = failure {
            return Err(err);
        }
        Ok((est.value, est.error + inner_err))
    }
}

/// First-return probabilities `P_1..P_max_depth` by nested adaptive quadrature.
///
/// Cost grows exponentially with depth. The success probability is only set
/// when `max_depth == n - 1`.
pub fn return_profile_quadrature(s: &Scenario, max_depth: usize, tol: f64) -> Result<ReturnProfile> {
    let nodes = s.decision_nodes();
    if max_depth > nodes {
        return Err(Error::InvalidArgument(format!(
            "max_depth {max_depth} exceeds the {nodes} decision nodes"
        )));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!("tolerance must be > 0 (got {tol})")));
    }
    let budgets = thresholds(s).budgets(s.deadline());
    let nested = Nested {
        hop: s.hop(),
        budgets: &budgets,
    };
    let entries: Vec<(f64, f64)> = (1..=max_depth)
        .into_par_iter()
        .map(|k| nested.first_return(0, 0.0, k, tol))
        .collect::<Result<_>>()?;

    let p_return: Vec<f64> = entries.iter().map(|(v, _)| v.clamp(0.0, 1.0)).collect();
    let error = entries.iter().map(|(_, e)| *e).fold(0.0, f64::max);
    let p_success = (max_depth == nodes).then(|| 1.0 - p_return.iter().sum::<f64>());
    Ok(ReturnProfile {
        method: Method::Quadrature,
        nodes,
        p_return,
        p_success,
        diagnostics: Diagnostics {
            error_estimate: Some(error),
            ..Diagnostics::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn six_hop(deadline: f64) -> Scenario {
        Scenario::new(6, 3.0, 1.0, deadline, 0.9).unwrap()
    }

    fn assert_row(deadline: f64, expected: [f64; 4]) {
        let p = return_profile_quadrature(&six_hop(deadline), 4, 1e-6).unwrap();
        for (k, e) in expected.iter().enumerate() {
            assert!(
                (p.p_return[k] - e).abs() <= 0.005,
                "T={deadline} P{} = {}",
                k + 1,
                p.p_return[k]
            );
        }
    }

    #[test]
    fn calculated_rows() {
        assert_row(16.0, [0.193, 0.194, 0.138, 0.103]);
        assert_row(14.0, [0.872, 0.056, 0.023, 0.014]);
    }

    #[test]
    fn first_entry_closed_form() {
        let s = six_hop(16.0);
        let p = return_profile_quadrature(&s, 1, 1e-8).unwrap();
        let q1 = 15.0 - 1.281_551_565_545 * 5f64.sqrt();
        let oracle = s.hop().ccdf(16.0 - q1);
        assert!((p.p_return[0] - oracle).abs() < 1e-9);
        assert!((p.p_return[0] - 0.1933).abs() < 1e-4);
    }

    #[test]
    fn unbounded_budget_never_returns() {
        let p = return_profile_quadrature(&six_hop(1000.0), 4, 1e-6).unwrap();
        assert!(p.p_return.iter().all(|v| *v < 1e-9));
    }

    #[test]
    fn empty_region_collapses() {
        // q*_1 > T: everybody turns back at node 1.
        let s = six_hop(5.0);
        let p = return_profile_quadrature(&s, 4, 1e-6).unwrap();
        assert!(p.p_return[0] > 0.999);
        assert!(p.p_return[1..].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn depth_and_tol_validation() {
        assert!(return_profile_quadrature(&six_hop(16.0), 6, 1e-4).is_err());
        assert!(return_profile_quadrature(&six_hop(16.0), 2, 0.0).is_err());
        let empty = return_profile_quadrature(&six_hop(16.0), 0, 1e-4).unwrap();
        assert!(empty.p_return.is_empty());
        assert_eq!(empty.p_success, None);
    }

    #[test]
    fn full_depth_sets_success() {
        let s = Scenario::new(4, 3.0, 1.0, 10.0, 0.8).unwrap();
        let p = return_profile_quadrature(&s, 3, 1e-6).unwrap();
        let total = p.total_return() + p.p_success.unwrap();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
