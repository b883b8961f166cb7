//! Rendering of comparison reports and descriptive statistics.
//!
//! Text and CSV show six significant digits. JSON keeps full precision so
//! that it parses back to the identical report.

use std::fmt::Write as _;
use std::io::Write;

use ucp_ensemble_core::dataset::describe;
use ucp_ensemble_core::{ComparisonReport, Dataset};

use crate::error::AppResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

/// `%g`-style rendering with six significant digits.
pub fn sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{v:.*}", (5 - exp) as usize)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, sig6)
}

pub fn emit_report(report: &ComparisonReport, format: Format, sink: &mut dyn Write) -> AppResult<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *sink, report)?;
            sink.write_all(b"\n")?;
        }
        Format::Csv => sink.write_all(render_csv(report).as_bytes())?,
        Format::Text => sink.write_all(render_text(report).as_bytes())?,
    }
    Ok(())
}

fn render_csv(report: &ComparisonReport) -> String {
    let mut out = String::from("estimator,mae,mbre,mibre,ci_low,ci_high\n");
    for row in &report.rows {
        let e = &row.errors;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            row.estimator,
            sig6(e.mae),
            sig6(e.mbre),
            sig6(e.mibre),
            opt(row.interval.map(|c| c.low)),
            opt(row.interval.map(|c| c.high))
        );
    }
    out.push_str("\nestimator,wilcoxon_w,p_value,significant\n");
    for row in &report.significance {
        let w = row.wilcoxon;
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.estimator,
            opt(w.map(|w| w.statistic)),
            opt(w.map(|w| w.p_value)),
            w.map_or(String::new(), |w| w.significant_at_05.to_string())
        );
    }
    out
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let widths: Vec<usize> =
        (0..header.len()).map(|c| rows.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0)).collect();
    let mut out = String::new();
    let mut line = |cells: &[&str]| {
        let parts: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(c, s)| if c == 0 { format!("{s:<w$}", w = widths[c]) } else { format!("{s:>w$}", w = widths[c]) })
            .collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(header);
    for r in rows {
        line(&r.iter().map(String::as_str).collect::<Vec<_>>());
    }
    out
}

fn render_text(report: &ComparisonReport) -> String {
    let mut out = format!("Effort accuracy over {} leave-one-out folds\n\n", report.folds);
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.estimator.to_string(),
                sig6(r.errors.mae),
                sig6(r.errors.mbre),
                sig6(r.errors.mibre),
                opt(r.interval.map(|c| c.low)),
                opt(r.interval.map(|c| c.high)),
            ]
        })
        .collect();
    out.push_str(&table(&["estimator", "MAE", "MBRE", "MIBRE", "CI95 low", "CI95 high"], &rows));
    let _ = write!(out, "\nWilcoxon signed-rank on absolute errors against {}\n\n", report.reference);
    let rows: Vec<Vec<String>> = report
        .significance
        .iter()
        .map(|r| match r.wilcoxon {
            Some(w) => vec![
                r.estimator.to_string(),
                sig6(w.statistic),
                w.n_effective.to_string(),
                sig6(w.p_value),
                if w.significant_at_05 { "yes" } else { "no" }.into(),
            ],
            None => vec![r.estimator.to_string(), "-".into(), "-".into(), "-".into(), "-".into()],
        })
        .collect();
    out.push_str(&table(&["estimator", "W", "n", "p", "significant"], &rows));
    out
}

/// Mean, standard deviation, skewness and kurtosis of UCP, effort and
/// productivity.
pub fn describe_dataset(dataset: &Dataset) -> AppResult<String> {
    let mut rows = Vec::new();
    for (name, values) in [("ucp", dataset.ucps()), ("effort", dataset.efforts()), ("productivity", dataset.productivities())] {
        let s = describe(&values)?;
        let undefined = || "undefined".to_string();
        rows.push(vec![
            name.to_string(),
            sig6(s.mean),
            sig6(s.stdev),
            s.skewness.map_or_else(undefined, sig6),
            s.kurtosis.map_or_else(undefined, sig6),
        ]);
    }
    let mut out = format!("{} ({} projects)\n\n", dataset.name(), dataset.len());
    out.push_str(&table(&["variable", "mean", "stdev", "skewness", "kurtosis"], &rows));
    Ok(out)
}
