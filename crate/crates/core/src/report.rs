//! Rendering of tables, metric reports and analysis artifacts.
//!
//! Text output rounds to 4 decimals; CSV and JSON keep full precision
//! (shortest round-trip representation). Undefined values print as `NA`
//! in text and CSV and as `null` in JSON.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::analysis::{
    BootstrapSummary, RobustnessRow, SchemeCorrelation, SensitivityCurve, SystemRanking,
};
use crate::disagreement::{DisagreementTable, TableRecord};
use crate::error::{PrmError, Result};
use crate::metrics::MetricReport;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Text,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = PrmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Self::Text),
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(PrmError::Config(format!(
                "unknown format '{other}' (expected text, csv or json)"
            ))),
        }
    }
}

fn fixed(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| format!("{v:.4}"))
}

fn full(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| PrmError::Config(format!("cannot serialize report: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Lays out rows as left-aligned, space-separated columns.
fn aligned(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &mut dyn Iterator<Item = &str>| {
        let parts: Vec<String> = cells
            .zip(&widths)
            .map(|(c, &w)| format!("{c:<w$}"))
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(&mut header.iter().copied());
    for row in rows {
        line(&mut row.iter().map(String::as_str));
    }
    out
}

/// Disagreement tables, one block per table.
pub fn tables(tables: &[DisagreementTable], format: Format) -> Result<String> {
    let records: Vec<TableRecord> = tables.iter().map(|t| t.to_record()).collect();
    match format {
        Format::Json => json(&records),
        Format::Csv => {
            let mut out = String::from(
                "estimator,threshold,stratum,level,label,numerator,denominator,p,sigma,overridden\n",
            );
            for r in &records {
                for c in &r.cells {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{},{}",
                        r.estimator,
                        r.threshold,
                        csv_field(r.stratum.as_deref().unwrap_or("")),
                        c.level,
                        csv_field(&c.label),
                        c.numerator,
                        c.denominator,
                        full(c.p),
                        full(c.sigma),
                        c.overridden
                    );
                }
            }
            Ok(out)
        }
        Format::Text => {
            let mut out = String::new();
            for (n, (table, r)) in tables.iter().zip(&records).enumerate() {
                if n > 0 {
                    out.push('\n');
                }
                let theta_label = table.scale().label(r.threshold).unwrap_or_default();
                let _ = write!(
                    out,
                    "# estimator={} theta={} ({theta_label})",
                    r.estimator, r.threshold
                );
                if let Some(s) = &r.stratum {
                    let _ = write!(out, " stratum={s}");
                }
                out.push('\n');
                let rows: Vec<Vec<String>> = r
                    .cells
                    .iter()
                    .rev()
                    .map(|c| {
                        vec![
                            c.level.to_string(),
                            c.label.clone(),
                            c.numerator.to_string(),
                            c.denominator.to_string(),
                            fixed(c.p),
                            fixed(c.sigma),
                            if c.overridden {
                                "override".into()
                            } else {
                                String::new()
                            },
                        ]
                    })
                    .collect();
                out.push_str(&aligned(
                    &["level", "label", "N_N", "N_D", "p", "sigma", ""],
                    &rows,
                ));
            }
            Ok(out)
        }
    }
}

#[derive(Serialize)]
struct RunReport<'a> {
    run: &'a str,
    #[serde(flatten)]
    report: &'a MetricReport,
}

/// Metric reports keyed by run id. Text mode follows the trec_eval `-q`
/// layout (`metric topic value`, with `all` for the mean).
pub fn metric_reports(reports: &[(String, MetricReport)], format: Format) -> Result<String> {
    match format {
        Format::Json => json(
            &reports
                .iter()
                .map(|(run, report)| RunReport { run, report })
                .collect::<Vec<_>>(),
        ),
        Format::Csv => {
            let mut out = String::from("run,metric,topic,value\n");
            for (run, r) in reports {
                let run = csv_field(run);
                for (topic, v) in &r.per_topic {
                    let _ = writeln!(out, "{run},{},{},{v}", r.metric, csv_field(topic));
                }
                let _ = writeln!(out, "{run},{},mean,{}", r.metric, r.mean);
                let _ = writeln!(out, "{run},{},stderr,{}", r.metric, full(r.stderr));
            }
            Ok(out)
        }
        Format::Text => {
            let mut out = String::new();
            for (run, r) in reports {
                let _ = writeln!(out, "# run={run} topics={}", r.n_topics);
                if !r.excluded.is_empty() {
                    let _ = writeln!(out, "# excluded (zero ideal DCG): {}", r.excluded.join(" "));
                }
                for (topic, v) in &r.per_topic {
                    let _ = writeln!(out, "{}\t{topic}\t{v:.4}", r.metric);
                }
                let _ = writeln!(out, "{}\tall\t{:.4}", r.metric, r.mean);
                let _ = writeln!(out, "{}\tstderr\t{}", r.metric, fixed(r.stderr));
            }
            Ok(out)
        }
    }
}

pub fn bootstrap(summary: &BootstrapSummary, format: Format) -> Result<String> {
    match format {
        Format::Json => json(summary),
        Format::Csv | Format::Text => {
            let rows: Vec<Vec<String>> = summary
                .levels
                .iter()
                .map(|l| {
                    let fmt = if format == Format::Csv { full } else { fixed };
                    let s = l.summary;
                    vec![
                        l.level.to_string(),
                        if format == Format::Csv {
                            csv_field(&l.label)
                        } else {
                            l.label.clone()
                        },
                        l.samples.len().to_string(),
                        l.missing.to_string(),
                        fmt(l.mean),
                        fmt(l.std),
                        fmt(s.map(|s| s.min)),
                        fmt(s.map(|s| s.q1)),
                        fmt(s.map(|s| s.median)),
                        fmt(s.map(|s| s.q3)),
                        fmt(s.map(|s| s.max)),
                    ]
                })
                .collect();
            let header = [
                "level",
                "label",
                "n_samples",
                "n_missing",
                "mean",
                "std",
                "min",
                "q1",
                "median",
                "q3",
                "max",
            ];
            if format == Format::Csv {
                Ok(csv_rows(&header, &rows))
            } else {
                Ok(format!(
                    "# resamples={} seed={} failed={}\n{}",
                    summary.n_resamples,
                    summary.seed,
                    summary.failed_resamples,
                    aligned(&header, &rows)
                ))
            }
        }
    }
}

fn csv_rows(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// One row per sweep coordinate and level.
pub fn curve(curve: &SensitivityCurve, format: Format) -> Result<String> {
    if format == Format::Json {
        return json(curve);
    }
    let fmt = if format == Format::Csv { full } else { fixed };
    let mut rows = Vec::new();
    for (i, x) in curve.x.iter().enumerate() {
        for s in &curve.series {
            let p = s.points[i];
            rows.push(vec![
                x.to_string(),
                s.level.to_string(),
                if format == Format::Csv {
                    csv_field(&s.label)
                } else {
                    s.label.clone()
                },
                fmt(p.mean),
                fmt(p.std),
                p.n.to_string(),
            ]);
        }
    }
    let header = [curve.x_label.as_str(), "level", "label", "mean", "std", "n"];
    Ok(if format == Format::Csv {
        csv_rows(&header, &rows)
    } else {
        aligned(&header, &rows)
    })
}

#[derive(Serialize)]
struct TauReport<'a> {
    variant: String,
    tau: f64,
    a: &'a SystemRanking,
    b: &'a SystemRanking,
}

pub fn tau(
    a: &SystemRanking,
    b: &SystemRanking,
    variant: crate::analysis::TauVariant,
    value: f64,
    format: Format,
) -> Result<String> {
    match format {
        Format::Json => json(&TauReport {
            variant: variant.to_string(),
            tau: value,
            a,
            b,
        }),
        Format::Csv => Ok(format!(
            "variant,n_systems,tau\n{variant},{},{value}\n",
            a.len()
        )),
        Format::Text => Ok(format!(
            "kendall_{variant}\t{value:.4}\t({} systems)\n",
            a.len()
        )),
    }
}

#[derive(Serialize)]
struct RobustnessReport<'a> {
    u1_vs_u2: Vec<RobustnessJson<'a>>,
    scheme_vs_scheme: Vec<&'a SchemeCorrelation>,
}

#[derive(Serialize)]
struct RobustnessJson<'a> {
    scheme: &'a str,
    tau: f64,
    ranking_u1: &'a SystemRanking,
    ranking_u2: &'a SystemRanking,
}

pub fn robustness(
    rows: &[RobustnessRow],
    correlations: &[SchemeCorrelation],
    format: Format,
) -> Result<String> {
    match format {
        Format::Json => json(&RobustnessReport {
            u1_vs_u2: rows
                .iter()
                .map(|r| RobustnessJson {
                    scheme: &r.scheme,
                    tau: r.tau,
                    ranking_u1: &r.ranking_u1,
                    ranking_u2: &r.ranking_u2,
                })
                .collect(),
            scheme_vs_scheme: correlations.iter().collect(),
        }),
        Format::Csv => {
            let mut out = String::from("comparison,a,b,tau\n");
            for r in rows {
                let _ = writeln!(out, "u1_vs_u2,{0},{0},{1}", csv_field(&r.scheme), r.tau);
            }
            for c in correlations {
                let _ = writeln!(
                    out,
                    "scheme_vs_scheme,{},{},{}",
                    csv_field(&c.a),
                    csv_field(&c.b),
                    c.tau
                );
            }
            Ok(out)
        }
        Format::Text => {
            let mut out = String::from("# tau between U1- and U2-based rankings\n");
            let rows_txt: Vec<Vec<String>> = rows
                .iter()
                .map(|r| vec![r.scheme.clone(), format!("{:.4}", r.tau)])
                .collect();
            out.push_str(&aligned(&["scheme", "tau"], &rows_txt));
            if !correlations.is_empty() {
                out.push_str("\n# tau between schemes\n");
                let rows_txt: Vec<Vec<String>> = correlations
                    .iter()
                    .map(|c| vec![c.a.clone(), c.b.clone(), format!("{:.4}", c.tau)])
                    .collect();
                out.push_str(&aligned(&["a", "b", "tau"], &rows_txt));
            }
            Ok(out)
        }
    }
}
