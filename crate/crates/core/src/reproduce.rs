//! Evaluates every golden table against this library's analytic engines and
//! the simulator, row by row.

use serde::{Deserialize, Serialize};

use crate::analytic::{approx_profile, return_profile_grid, Method, ReturnProfile, DEFAULT_GRID_POINTS};
use crate::error::Result;
use crate::io::golden::{golden_tables, GoldenKind, GoldenTable, GoldenValue, Quantity};
use crate::planner::{expected_total_distance, waste_per_success};
use crate::scenario::Scenario;
use crate::sim::{simulate_profile, SimConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproductionRow {
    pub table: String,
    pub quantity: Quantity,
    pub reference: f64,
    pub analytic: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulated: Option<f64>,
    pub tolerance: f64,
    /// The reference value comes from a single simulation run of unknown size.
    pub single_run: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reproduction {
    pub trials: u64,
    pub seed: u64,
    pub rows: Vec<ReproductionRow>,
    pub all_pass: bool,
}

fn pick(profile: &ReturnProfile, q: Quantity) -> f64 {
    match q {
        Quantity::Return(k) => profile.get(k).unwrap_or(f64::NAN),
        Quantity::Success => profile.p_success.unwrap_or(f64::NAN),
        _ => f64::NAN,
    }
}

fn row(
    table: &GoldenTable,
    v: &GoldenValue,
    analytic: f64,
    simulated: Option<f64>,
    single_run: bool,
) -> ReproductionRow {
    ReproductionRow {
        table: table.id.clone(),
        quantity: v.quantity,
        reference: v.value,
        analytic,
        simulated,
        tolerance: v.tolerance,
        single_run,
        pass: (analytic - v.value).abs() <= v.tolerance,
    }
}

fn profile_rows(table: &GoldenTable, trials: u64, seed: u64, rows: &mut Vec<ReproductionRow>) -> Result<()> {
    let s = Scenario::new(table.n, table.hop_mean, table.hop_var, table.deadline, table.p_tr)?;
    let analytic = match table.kind {
        GoldenKind::Approximation => approx_profile(&s),
        _ => return_profile_grid(&s, DEFAULT_GRID_POINTS)?,
    };
    let simulated = match table.kind {
        GoldenKind::CalculatedProfile => Some(simulate_profile(&s, &SimConfig::new(trials, seed))?.profile),
        _ => None,
    };
    let sim_value = |q| simulated.as_ref().map(|p| pick(p, q));
    for v in &table.expected {
        rows.push(row(table, v, pick(&analytic, v.quantity), sim_value(v.quantity), false));
    }
    for v in &table.single_run {
        rows.push(row(table, v, pick(&analytic, v.quantity), sim_value(v.quantity), true));
    }
    Ok(())
}

fn waste_rows(table: &GoldenTable, rows: &mut Vec<ReproductionRow>) -> Result<()> {
    let Some((p_return, p_success)) = &table.waste_input else {
        return Ok(());
    };
    let profile = ReturnProfile::with_success(Method::Approx, p_return.clone(), *p_success)?;
    // Per-hop cost of one mean hop delay, so values read in units of M.
    for v in &table.expected {
        let analytic = match v.quantity {
            Quantity::WastePerSuccess => waste_per_success(&profile, 1.0)?,
            Quantity::ExpectedTotalDistance => expected_total_distance(&profile, 1.0, table.n)?,
            q => pick(&profile, q),
        };
        rows.push(row(table, v, analytic, None, false));
    }
    Ok(())
}

/// Runs every golden table. Simulation uses `trials` trials with `seed`.
pub fn reproduce(trials: u64, seed: u64) -> Result<Reproduction> {
    let mut rows = Vec::new();
    for table in golden_tables() {
        match table.kind {
            GoldenKind::WasteExample => waste_rows(&table, &mut rows)?,
            _ => profile_rows(&table, trials, seed, &mut rows)?,
        }
    }
    let all_pass = rows.iter().all(|r| r.pass);
    Ok(Reproduction {
        trials,
        seed,
        rows,
        all_pass,
    })
}
