//! Turn-back threshold optimization and retry waste.

mod optimize;
mod waste;

pub use optimize::{
    optimize_monotone, optimize_ptr, BracketStep, OptimizeOutcome, DEFAULT_TOL, MAX_ITERATIONS, P_TR_MAX, P_TR_MIN,
};
pub use waste::{
    attempt_distribution, expected_total_distance, waste_per_attempt, waste_per_success, waste_report, AttemptModel,
    WasteReport,
};
