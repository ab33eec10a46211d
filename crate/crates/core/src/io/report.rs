use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytic::{ReturnProfile, ThresholdTable};
use crate::error::{Error, Result};
use crate::planner::{OptimizeOutcome, WasteReport};
use crate::reproduce::Reproduction;
use crate::sim::{EmpiricalWaste, Policy, SimReport};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(Format::Table),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Report {
    Thresholds(ThresholdTable),
    Profile(ReturnProfile),
    Simulation(SimReport),
    Waste(WasteReport),
    EmpiricalWaste(EmpiricalWaste),
    Optimization(OptimizeOutcome),
    Reproduction(Reproduction),
}

/// Versioned JSON envelope: `{"schema_version": 1, "kind": ..., <fields>}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    #[serde(flatten)]
    pub report: Report,
}

/// Formats with six significant digits, like C's `%g`.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..6).contains(&exp) {
        let s = format!("{x:.5e}");
        let (mantissa, e) = s.split_once('e').expect("exponent");
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{e}");
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn profile_records(profile: &ReturnProfile, ci: Option<(&[f64], f64)>) -> Vec<[String; 5]> {
    if profile.p_return.is_empty() {
        return Vec::new();
    }
    let method = profile.method.to_string();
    let mut rows: Vec<[String; 5]> = profile
        .p_return
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let k = (i + 1).to_string();
            let half = ci.map(|(h, _)| sig6(h[i])).unwrap_or_default();
            [k.clone(), k, sig6(*p), half, method.clone()]
        })
        .collect();
    if let Some(ps) = profile.p_success {
        let half = ci.map(|(_, h)| sig6(h)).unwrap_or_default();
        rows.push([
            "success".into(),
            (profile.nodes + 1).to_string(),
            sig6(ps),
            half,
            method,
        ]);
    }
    rows
}

fn key_values(report: &Report) -> Vec<(String, String)> {
    let kv = |k: &str, v: f64| (k.to_string(), sig6(v));
    match report {
        Report::Thresholds(t) => t
            .as_slice()
            .iter()
            .enumerate()
            .map(|(i, q)| kv(&format!("q_star_{}", i + 1), *q))
            .collect(),
        Report::Waste(w) => waste_pairs(w),
        Report::EmpiricalWaste(e) => {
            let mut v = vec![
                ("deliveries".into(), e.deliveries.to_string()),
                ("attempts".into(), e.attempts.to_string()),
                kv("mean_attempts", e.mean_attempts),
            ];
            v.extend(waste_pairs(&e.report));
            v.push(("seed".into(), e.seed.to_string()));
            v
        }
        Report::Optimization(o) => vec![
            kv("target", o.target),
            kv("p_tr", o.p_tr),
            kv("achieved", o.achieved),
            ("unattainable".into(), o.unattainable.to_string()),
            ("iterations".into(), o.iterations.to_string()),
        ],
        Report::Simulation(s) => {
            let policy = match s.policy {
                Policy::Quantile => "quantile".to_string(),
                Policy::RestTime { t_tr } => format!("rest_time(t_tr={})", sig6(t_tr)),
            };
            vec![
                ("policy".into(), policy),
                ("trials".into(), s.trials.to_string()),
                ("seed".into(), s.seed.to_string()),
                kv("on_time_fraction", s.on_time_fraction),
            ]
        }
        Report::Profile(_) | Report::Reproduction(_) => Vec::new(),
    }
}

fn waste_pairs(w: &WasteReport) -> Vec<(String, String)> {
    vec![
        ("unit_cost".into(), sig6(w.unit_cost)),
        ("p_success".into(), sig6(w.p_success)),
        ("waste_per_attempt".into(), sig6(w.waste_per_attempt)),
        ("waste_per_success".into(), sig6(w.waste_per_success)),
        ("expected_total_distance".into(), sig6(w.expected_total_distance)),
    ]
}

fn reproduction_records(r: &Reproduction) -> Vec<[String; 7]> {
    r.rows
        .iter()
        .map(|row| {
            let source = if row.single_run { "single-run" } else { "calculated" };
            [
                row.table.clone(),
                row.quantity.to_string(),
                source.into(),
                sig6(row.reference),
                sig6(row.analytic),
                row.simulated.map(sig6).unwrap_or_default(),
                if row.pass { "PASS" } else { "FAIL" }.into(),
            ]
        })
        .collect()
}

const PROFILE_HEADER: [&str; 5] = ["node", "k", "probability", "ci_halfwidth", "method"];
const REPRO_HEADER: [&str; 7] = [
    "table",
    "quantity",
    "source",
    "reference",
    "analytic",
    "simulated",
    "status",
];

fn csv_err(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

fn write_csv(report: &Report, out: &mut dyn Write) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    match report {
        Report::Profile(p) => {
            w.write_record(PROFILE_HEADER).map_err(csv_err)?;
            for r in profile_records(p, None) {
                w.write_record(&r).map_err(csv_err)?;
            }
        }
        Report::Simulation(s) => {
            w.write_record(PROFILE_HEADER).map_err(csv_err)?;
            let ci = (s.ci_halfwidth.as_slice(), s.success_ci_halfwidth);
            for r in profile_records(&s.profile, Some(ci)) {
                w.write_record(&r).map_err(csv_err)?;
            }
        }
        Report::Reproduction(r) => {
            w.write_record(REPRO_HEADER).map_err(csv_err)?;
            for rec in reproduction_records(r) {
                w.write_record(&rec).map_err(csv_err)?;
            }
        }
        other => {
            w.write_record(["field", "value"]).map_err(csv_err)?;
            for (k, v) in key_values(other) {
                w.write_record([k, v]).map_err(csv_err)?;
            }
        }
    }
    w.flush()
}

fn aligned<const N: usize>(header: [&str; N], rows: &[[String; N]]) -> String {
    let mut widths = header.map(str::len);
    for r in rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: Vec<&str>| {
        let text: Vec<String> = cells.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "{}", text.join("  ").trim_end());
    };
    line(header.to_vec());
    for r in rows {
        line(r.iter().map(String::as_str).collect());
    }
    out
}

fn render_table(report: &Report) -> String {
    match report {
        Report::Profile(p) => {
            let mut out = format!("method: {}  nodes: {}\n", p.method, p.nodes);
            out += &aligned(PROFILE_HEADER, &profile_records(p, None));
            for warning in &p.diagnostics.warnings {
                let _ = writeln!(out, "warning: {warning}");
            }
            out
        }
        Report::Simulation(s) => {
            let ci = (s.ci_halfwidth.as_slice(), s.success_ci_halfwidth);
            let mut out = String::new();
            for (k, v) in key_values(report) {
                let _ = writeln!(out, "{k}: {v}");
            }
            out + &aligned(PROFILE_HEADER, &profile_records(&s.profile, Some(ci)))
        }
        Report::Reproduction(r) => {
            let mut out = aligned(REPRO_HEADER, &reproduction_records(r));
            let verdict = if r.all_pass { "PASS" } else { "FAIL" };
            let _ = writeln!(
                out,
                "overall: {verdict} (simulation: {} trials, seed {})",
                r.trials, r.seed
            );
            out
        }
        other => {
            let pairs = key_values(other);
            let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            pairs.iter().fold(String::new(), |mut out, (k, v)| {
                let _ = writeln!(out, "{k:<width$}  {v}");
                out
            })
        }
    }
}

/// Writes `report` to `out` in the given format.
pub fn render(report: &Report, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
    match format {
        Format::Json => {
            let doc = ReportDocument {
                schema_version: REPORT_SCHEMA_VERSION,
                report: report.clone(),
            };
            serde_json::to_writer_pretty(&mut *out, &doc)?;
            writeln!(out)
        }
        Format::Csv => write_csv(report, out),
        Format::Table => out.write_all(render_table(report).as_bytes()),
    }
}

/// Writes `report` to a file at `path`.
pub fn write_report(report: &Report, format: Format, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
    render(report, format, &mut file).map_err(io_err)?;
    file.flush().map_err(io_err)
}

/// Parses a JSON report written by [`render`] or [`write_report`].
pub fn read_report(json: &str) -> Result<Report> {
    let doc: ReportDocument = serde_json::from_str(json)?;
    if doc.schema_version != REPORT_SCHEMA_VERSION {
        return Err(Error::InvalidArgument(format!(
            "unsupported report schema_version {}",
            doc.schema_version
        )));
    }
    Ok(doc.report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::Method;

    fn profile5() -> ReturnProfile {
        ReturnProfile::complete(Method::Grid, vec![0.193345, 0.19331, 0.1376, 0.1028, 0.085])
    }

    fn csv_of(report: &Report) -> String {
        let mut buf = Vec::new();
        render(report, Format::Csv, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(sig6(0.193344789), "0.193345");
        assert_eq!(sig6(12.1343635), "12.1344");
        assert_eq!(sig6(32.0), "32");
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(1234567.0), "1.23457e6");
        assert_eq!(sig6(7.6198530241605e-24), "7.61985e-24");
        assert_eq!(sig6(-0.5), "-0.5");
    }

    #[test]
    fn profile_csv_rows() {
        let text = csv_of(&Report::Profile(profile5()));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "node,k,probability,ci_halfwidth,method");
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[1], "1,1,0.193345,,grid");
        assert!(lines[6].starts_with("success,6,"));
    }

    #[test]
    fn empty_profile_is_header_only() {
        let empty = ReturnProfile {
            method: Method::Quadrature,
            nodes: 5,
            p_return: Vec::new(),
            p_success: None,
            diagnostics: Default::default(),
        };
        assert_eq!(
            csv_of(&Report::Profile(empty)),
            "node,k,probability,ci_halfwidth,method\n"
        );
    }

    #[test]
    fn json_envelope() {
        let mut buf = Vec::new();
        render(&Report::Profile(profile5()), Format::Json, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["kind"], "profile");
        assert_eq!(v["method"], "grid");
        assert_eq!(v["p_return"].as_array().unwrap().len(), 5);
        let bad = String::from_utf8(buf)
            .unwrap()
            .replace("\"schema_version\": 1", "\"schema_version\": 9");
        assert!(read_report(&bad).is_err());
    }

    #[test]
    fn table_is_aligned() {
        let mut buf = Vec::new();
        render(&Report::Profile(profile5()), Format::Table, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("method: grid  nodes: 5\nnode     k  probability"));
    }

    #[test]
    fn write_to_bad_path() {
        let err = write_report(&Report::Profile(profile5()), Format::Csv, "/nonexistent/dir/x.csv").unwrap_err();
        assert!(err.to_string().starts_with("/nonexistent/dir/x.csv"));
    }
}
