//! Text, CSV and JSON rendering.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::json;
use specgap_core::truncation::SweepPoint;
use specgap_core::{Alpha0Result, RateEstimate, ValidationReport};

use crate::tables::Row;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

fn opt(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| format!("{v:.6}"))
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report types serialize")
}

/// Left-aligned columns separated by two spaces.
fn aligned(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let mut line = |cells: Vec<&str>| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(header.to_vec());
    for row in rows {
        line(row.iter().map(String::as_str).collect());
    }
    out
}

pub fn alpha0(a: &Alpha0Result, format: Format) -> String {
    let method = serde_json::to_value(a.method).unwrap();
    let method = method.as_str().unwrap_or_default();
    match format {
        Format::Text => format!(
            "alpha0 = {:.6} ({method}{})\n",
            a.value,
            a.tau.map_or(String::new(), |t| format!(", tau = {t:.6}"))
        ),
        Format::Csv => format!("alpha0,method,tau\n{:.12},{method},{}\n", a.value, opt(a.tau)),
        Format::Json => to_json(a) + "\n",
    }
}

pub fn tau(tau: f64, format: Format) -> String {
    match format {
        Format::Text => format!("tau = {tau:.15}\n"),
        Format::Csv => format!("tau\n{tau:.15}\n"),
        Format::Json => to_json(&json!({ "tau": tau })) + "\n",
    }
}

pub fn estimate(est: &RateEstimate, format: Format, verbose: bool) -> String {
    match format {
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "alpha0      {:.6}", est.alpha0);
            let _ = writeln!(out, "verdict     {}", est.verdict.label());
            let _ = writeln!(out, "rho_k       {:.6}", est.rho_final);
            let _ = writeln!(out, "k_final     {}", est.k_final);
            let _ = writeln!(out, "stabilized  {}", est.stabilized);
            if verbose {
                out.push_str("trajectory\n");
                for (k, rho) in &est.trajectory {
                    let _ = writeln!(out, "  {k:>4}  {rho:.8}");
                }
            }
            out
        }
        Format::Csv if verbose => {
            let mut out = String::from("k,rho_k\n");
            for (k, rho) in &est.trajectory {
                let _ = writeln!(out, "{k},{rho:.12}");
            }
            out
        }
        Format::Csv => format!(
            "alpha0,k_final,rho_k,verdict,stabilized\n{:.12},{},{:.12},{},{}\n",
            est.alpha0,
            est.k_final,
            est.rho_final,
            est.verdict.label(),
            est.stabilized
        ),
        Format::Json => {
            let mut v = serde_json::to_value(est).unwrap();
            if !verbose {
                v.as_object_mut().unwrap().remove("trajectory");
            }
            to_json(&v) + "\n"
        }
    }
}

/// One sweep point; `alpha0` is `None` when the model could not be built.
pub struct SweepRow<'a> {
    pub point: &'a SweepPoint<f64>,
    pub alpha0: Option<f64>,
}

pub fn sweep(rows: &[SweepRow<'_>], format: Format) -> String {
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| match &r.point.outcome {
            Ok(est) => vec![
                format!("{}", r.point.parameter),
                opt(r.alpha0),
                est.k_final.to_string(),
                format!("{:.6}", est.rho_final),
                est.verdict.label().to_string(),
            ],
            Err(e) => vec![
                format!("{}", r.point.parameter),
                opt(r.alpha0),
                String::new(),
                String::new(),
                format!("error: {e}"),
            ],
        })
        .collect();
    let header = ["parameter", "alpha0", "k_final", "rho_k", "verdict"];
    match format {
        Format::Text => aligned(&header, &cells),
        Format::Csv => {
            let mut out = header.join(",") + "\n";
            for row in cells {
                // error messages may hold commas
                let row: Vec<String> = row
                    .into_iter()
                    .map(|c| if c.contains(',') { format!("\"{}\"", c.replace('"', "\"\"")) } else { c })
                    .collect();
                out += &(row.join(",") + "\n");
            }
            out
        }
        Format::Json => {
            let items: Vec<_> = rows
                .iter()
                .map(|r| match &r.point.outcome {
                    Ok(est) => json!({
                        "parameter": r.point.parameter,
                        "alpha0": r.alpha0,
                        "k_final": est.k_final,
                        "rho_k": est.rho_final,
                        "verdict": est.verdict,
                        "stabilized": est.stabilized,
                    }),
                    Err(e) => json!({
                        "parameter": r.point.parameter,
                        "alpha0": r.alpha0,
                        "error": e.to_string(),
                    }),
                })
                .collect();
            to_json(&items) + "\n"
        }
    }
}

pub fn table(rows: &[Row], format: Format) -> String {
    let header = [
        "cell", "alpha0", "alpha0_pub", "k", "rho_k", "rho_pub", "delta", "verdict", "status",
    ];
    match format {
        Format::Json => to_json(&rows) + "\n",
        Format::Text | Format::Csv => {
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.label.clone(),
                        opt(r.alpha0),
                        format!("{}", r.alpha0_published),
                        r.k_final.map_or(String::new(), |k| k.to_string()),
                        opt(r.rho_k),
                        r.published.clone(),
                        r.delta.map_or(String::new(), |d| format!("{d:+.4}")),
                        r.verdict.clone(),
                        r.status.to_string(),
                    ]
                })
                .collect();
            if format == Format::Text {
                aligned(&header, &cells)
            } else {
                let mut out = String::from(
                    "cell,alpha0,alpha0_published,k_final,rho_k,rho_published,delta,verdict,status\n",
                );
                for row in cells {
                    let row: Vec<String> = row
                        .into_iter()
                        .map(|c| if c.contains(',') { format!("\"{c}\"") } else { c })
                        .collect();
                    out += &(row.join(",") + "\n");
                }
                out
            }
        }
    }
}

pub fn validation(report: &ValidationReport, format: Format) -> String {
    match format {
        Format::Json => to_json(report) + "\n",
        Format::Csv => {
            let mut out = String::from("rows_checked,max_row_sum_deviation,violations\n");
            let _ = writeln!(
                out,
                "{},{:.3e},{}",
                report.rows_checked,
                report.max_row_sum_deviation,
                report.violations.len()
            );
            out
        }
        Format::Text => {
            let mut out = format!(
                "{} rows checked, max row-sum deviation {:.3e}\n",
                report.rows_checked, report.max_row_sum_deviation
            );
            if report.violations.is_empty() {
                out.push_str("valid\n");
            }
            for v in &report.violations {
                let _ = writeln!(out, "violation: {v:?}");
            }
            out
        }
    }
}
