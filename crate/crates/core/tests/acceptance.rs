//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs as a plain binary (`harness = false`) so the report
//! reads top to bottom under `cargo test`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crankback::analytic::{
    approx_profile, decision_rule, return_profile_grid, return_profile_quadrature, success_probability, thresholds,
    ExactMethod, DEFAULT_GRID_POINTS, DEFAULT_QUADRATURE_TOL,
};
use crankback::planner::{expected_total_distance, optimize_ptr, waste_per_attempt, waste_per_success};
use crankback::sim::simulate_profile;
use crankback::{Decision, Method, NormalParams, ReturnProfile, Scenario, SimConfig};

const SEED: u64 = 20_240_601;
const MC_TRIALS: u64 = 1_000_000;

fn scenario(deadline: f64) -> Scenario {
    Scenario::new(6, 3.0, 1.0, deadline, 0.9).unwrap()
}

/// Collects failed checks for one criterion; the criterion passes when empty.
#[derive(Default)]
struct Check {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Check {
    fn close(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        if got.is_nan() || (got - want).abs() > tol {
            self.failures.push(format!("{what}: {got:.6} vs {want} ± {tol}"));
        }
    }

    fn that(&mut self, what: &str, ok: bool) {
        if !ok {
            self.failures.push(what.to_string());
        }
    }

    fn note(&mut self, msg: String) {
        self.notes.push(msg);
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn calculated_row(c: &mut Check, deadline: f64, want: [f64; 4], timing: bool) {
    let s = scenario(deadline);
    let (grid, grid_time) = timed(|| return_profile_grid(&s, DEFAULT_GRID_POINTS).unwrap());
    let (quad, quad_time) = timed(|| return_profile_quadrature(&s, 4, DEFAULT_QUADRATURE_TOL).unwrap());
    for (k, w) in want.iter().enumerate() {
        c.close(&format!("grid P{}", k + 1), grid.p_return[k], *w, 0.005);
        c.close(&format!("quadrature P{}", k + 1), quad.p_return[k], *w, 0.005);
    }
    if timing {
        c.that(
            &format!("grid took {grid_time:?} (limit 5 s)"),
            grid_time < Duration::from_secs(5),
        );
        c.that(
            &format!("quadrature took {quad_time:?} (limit 60 s)"),
            quad_time < Duration::from_secs(60),
        );
        c.note(format!("grid {grid_time:.2?}, quadrature depth 4 {quad_time:.2?}"));
    }
}

fn criterion_1(c: &mut Check) {
    calculated_row(c, 16.0, [0.193, 0.194, 0.138, 0.103], true);
}

fn criterion_2(c: &mut Check) {
    calculated_row(c, 15.0, [0.553, 0.159, 0.081, 0.052], false);
}

fn criterion_3(c: &mut Check) {
    calculated_row(c, 14.0, [0.872, 0.056, 0.023, 0.014], false);
}

fn criterion_4(c: &mut Check) {
    let s = scenario(16.0);
    let approx = approx_profile(&s);
    c.close("approx entry 3", approx.p_return[2], 0.11, 0.015);
    c.close("approx entry 5", approx.p_return[4], 0.08, 0.015);
    let exact = return_profile_quadrature(&s, 1, 1e-10).unwrap();
    c.close(
        "approx entry 1 vs exact P1",
        approx.p_return[0],
        exact.p_return[0],
        1e-9,
    );
}

fn criterion_5(c: &mut Check) {
    let single_run: [(f64, [f64; 5], f64); 3] = [
        (16.0, [0.21, 0.194, 0.128, 0.103, 0.073], 0.288),
        (15.0, [0.54, 0.15, 0.085, 0.054, 0.039], 0.125),
        (14.0, [0.848, 0.076, 0.021, 0.018, 0.01], 0.026),
    ];
    for (deadline, reference, success) in single_run {
        let s = scenario(deadline);
        let grid = return_profile_grid(&s, DEFAULT_GRID_POINTS).unwrap();
        let mc = simulate_profile(&s, &SimConfig::new(MC_TRIALS, SEED)).unwrap();
        for (k, want) in reference.iter().enumerate() {
            c.close(
                &format!("T={deadline} MC P{}", k + 1),
                mc.profile.p_return[k],
                grid.p_return[k],
                0.004,
            );
            c.close(
                &format!("T={deadline} single-run P{}", k + 1),
                grid.p_return[k],
                *want,
                0.03,
            );
        }
        let h = grid.p_success.unwrap();
        c.close(
            &format!("T={deadline} MC success"),
            mc.profile.p_success.unwrap(),
            h,
            0.004,
        );
        c.close(&format!("T={deadline} single-run success"), h, success, 0.03);
    }
}

fn criterion_6(c: &mut Check) {
    for (deadline, want, tol) in [(16.0, 0.288, 0.02), (15.0, 0.125, 0.02), (14.0, 0.026, 0.015)] {
        let h = success_probability(&scenario(deadline), ExactMethod::Grid).unwrap();
        c.close(&format!("H at T={deadline}"), h, want, tol);
    }
}

fn criterion_7(c: &mut Check) {
    let p_grid = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99];
    for deadline in [14.0, 15.0, 16.0] {
        let s = scenario(deadline);
        let h = |p: f64| success_probability(&s.with_p_tr(p).unwrap(), ExactMethod::Grid).unwrap();
        let target = h(0.9);
        let out = optimize_ptr(&s, target, 1e-6).unwrap();
        c.that(
            &format!("T={deadline}: target {target} flagged unattainable"),
            !out.unattainable,
        );
        c.close(&format!("T={deadline} round-trip p_tr"), out.p_tr, 0.9, 0.005);
        let values: Vec<f64> = p_grid.iter().map(|p| h(*p)).collect();
        c.that(
            &format!("T={deadline}: H not monotone on the p_tr grid: {values:?}"),
            values.windows(2).all(|w| w[0] <= w[1]),
        );
    }
}

fn criterion_8(c: &mut Check) {
    let m = 3.0;
    let worked = ReturnProfile::with_success(Method::Approx, vec![0.2, 0.7], 0.1).unwrap();
    // 0.2, 0.7 and 0.1 have no exact binary form; the float result is within one ulp.
    c.close(
        "waste per success / M",
        waste_per_success(&worked, 1.0).unwrap(),
        32.0,
        1e-12,
    );
    c.close(
        "waste per success (M = 3)",
        waste_per_success(&worked, m).unwrap(),
        32.0 * m,
        1e-12,
    );
    c.close(
        "expected total distance (n = 4)",
        expected_total_distance(&worked, m, 4).unwrap(),
        36.0 * m,
        1e-12,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for i in 0..100 {
        let nodes = rng.random_range(1..10);
        let mut weights: Vec<f64> = (0..=nodes).map(|_| rng.random_range(0.01..1.0)).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let p_success = weights.pop().unwrap();
        let profile = ReturnProfile::with_success(Method::Approx, weights, p_success).unwrap();
        let d = rng.random_range(0.1..10.0);
        let n = nodes + 1;
        let total = expected_total_distance(&profile, d, n).unwrap();
        let identity = waste_per_success(&profile, d).unwrap() + d * n as f64;
        c.that(
            &format!("profile {i}: total {total} != waste + d·n {identity}"),
            total == identity,
        );
        let per_attempt = waste_per_attempt(&profile, d) / p_success;
        c.close(
            &format!("profile {i}: per-success vs per-attempt"),
            waste_per_success(&profile, d).unwrap(),
            per_attempt,
            1e-12 * per_attempt.max(1.0),
        );
    }
}

fn criterion_9(c: &mut Check) {
    // Quantile round trip.
    let mut worst = 0.0f64;
    for i in 1..10_000 {
        let p = i as f64 / 10_000.0;
        for hop in [
            NormalParams::new(15.0, 5.0).unwrap(),
            NormalParams::new(-2.0, 0.01).unwrap(),
        ] {
            let q = hop.inv_ccdf(p).unwrap();
            worst = worst.max((hop.ccdf(q) - p).abs());
        }
    }
    c.that(&format!("quantile round trip error {worst:e} > 1e-9"), worst <= 1e-9);

    for deadline in [14.0, 15.0, 16.0] {
        let s = scenario(deadline);
        let grid = return_profile_grid(&s, DEFAULT_GRID_POINTS).unwrap();
        let survival = grid.diagnostics.survival_mass.unwrap();
        c.close(
            &format!("T={deadline} grid sum rule"),
            grid.total_return() + survival,
            1.0,
            5e-3,
        );
        let quad = return_profile_quadrature(&s, 3, 1e-7).unwrap();
        for k in 0..3 {
            c.close(
                &format!("T={deadline} grid vs quadrature P{}", k + 1),
                grid.p_return[k],
                quad.p_return[k],
                1e-4,
            );
        }
        let cfg = SimConfig::new(100_000, SEED);
        let mc = simulate_profile(&s, &cfg).unwrap();
        let counted: u64 = mc.return_counts.iter().sum::<u64>() + mc.success_count;
        c.that(
            &format!("T={deadline} MC counts sum to {counted}"),
            counted == cfg.trials,
        );
        for workers in [1, 2, 3, 8] {
            let again = simulate_profile(&s, &cfg.clone().with_workers(workers)).unwrap();
            c.that(&format!("T={deadline} MC differs with {workers} workers"), again == mc);
        }
    }

    // Decision rule against the direct tail-probability test.
    let s = scenario(16.0);
    let tbl = thresholds(&s);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut mismatches = 0;
    for _ in 0..10_000 {
        let k = rng.random_range(1..=5);
        let t_k: f64 = rng.random_range(-5.0..25.0);
        let remaining = s.hop().scaled(6 - k);
        let by_tail = remaining.ccdf(s.deadline() - t_k) > s.p_tr();
        // Skip points within rounding distance of the threshold itself.
        if (remaining.ccdf(s.deadline() - t_k) - s.p_tr()).abs() < 1e-12 {
            continue;
        }
        if (decision_rule(k, t_k, &s, &tbl) == Decision::Return) != by_tail {
            mismatches += 1;
        }
    }
    c.that(&format!("{mismatches} decision-rule mismatches"), mismatches == 0);
}

type Criterion = (&'static str, fn(&mut Check));

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("T=16 calculated row, grid < 5 s, quadrature < 60 s", criterion_1),
        ("T=15 calculated row", criterion_2),
        ("T=14 calculated row", criterion_3),
        ("approximation example", criterion_4),
        ("Monte Carlo vs grid, single-run bands", criterion_5),
        ("success probability bands", criterion_6),
        ("optimizer round trip and monotone H", criterion_7),
        ("waste worked example and distance identity", criterion_8),
        ("property suites", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let mut c = Check::default();
        run(&mut c);
        let verdict = if c.failures.is_empty() { "PASS" } else { "FAIL" };
        let notes = if c.notes.is_empty() {
            String::new()
        } else {
            format!(" ({})", c.notes.join("; "))
        };
        println!("criterion {}: {verdict} — {name}{notes}", i + 1);
        for f in &c.failures {
            println!("    {f}");
        }
        failed += usize::from(!c.failures.is_empty());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
