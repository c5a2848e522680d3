//! Machine-readable report writers.
//!
//! Scan, metrics, evaluation, and curation results can be written as CSV
//! (one quoting-safe table per report, LF line endings) or JSON. Output is
//! deterministic: rows follow the already-sorted inputs and JSON objects
//! use a fixed field order with sorted maps, so identical results always
//! serialize to identical bytes.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::eval::{EvalResult, EvalRow};
use crate::metrics::CorpusMetrics;
use crate::model::SmellId;
use crate::scan::{CurationReport, ScanResult};

/// Output encodings for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

/// Errors raised while writing a report.
#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("failed to write report: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to write CSV report: {0}")]
    Csv(#[from] csv::Error),
    #[error("failed to write JSON report: {0}")]
    Json(#[from] serde_json::Error),
}

fn finish_json<W: Write>(value: &impl Serialize, mut writer: W) -> Result<(), ReportError> {
    serde_json::to_writer_pretty(&mut writer, value)?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ScanReportJson<'a> {
    root: String,
    script_count: usize,
    total_loc: usize,
    malformed_count: usize,
    occurrence_count: usize,
    counts_by_smell: BTreeMap<&'a str, usize>,
    records: &'a [crate::scan::ScriptRecord],
    skipped: &'a [crate::scan::SkippedFile],
}

/// Write one row per script with its occurrence count for every catalog
/// smell and a trailing total column.
pub fn write_scan_report<W: Write>(
    result: &ScanResult,
    format: ReportFormat,
    writer: W,
) -> Result<(), ReportError> {
    match format {
        ReportFormat::Csv => {
            let mut csv = csv::Writer::from_writer(writer);
            let mut header = vec!["script_path".to_string()];
            header.extend(SmellId::ALL.iter().map(|s| s.as_str().to_string()));
            header.push("total".to_string());
            csv.write_record(&header)?;
            for record in &result.records {
                let mut counts: BTreeMap<SmellId, usize> = BTreeMap::new();
                for occ in &record.occurrences {
                    *counts.entry(occ.smell).or_insert(0) += 1;
                }
                let mut row = vec![record.path.display().to_string()];
                row.extend(
                    SmellId::ALL.iter().map(|s| counts.get(s).copied().unwrap_or(0).to_string()),
                );
                row.push(record.occurrences.len().to_string());
                csv.write_record(&row)?;
            }
            csv.flush()?;
            Ok(())
        }
        ReportFormat::Json => {
            let counts_by_smell: BTreeMap<&str, usize> =
                result.count_by_smell().into_iter().map(|(s, n)| (s.as_str(), n)).collect();
            let report = ScanReportJson {
                root: result.root.display().to_string(),
                script_count: result.records.len(),
                total_loc: result.total_loc(),
                malformed_count: result.records.iter().filter(|r| r.status.is_malformed()).count(),
                occurrence_count: result.occurrence_count(),
                counts_by_smell,
                records: &result.records,
                skipped: &result.skipped,
            };
            finish_json(&report, writer)
        }
    }
}

/// Format a ratio for tabular output with two decimal places.
fn two_places(value: f64) -> String {
    format!("{value:.2}")
}

/// Write the per-smell density and proportion table.
pub fn write_metrics_report<W: Write>(
    metrics: &CorpusMetrics,
    format: ReportFormat,
    writer: W,
) -> Result<(), ReportError> {
    match format {
        ReportFormat::Csv => {
            let mut csv = csv::Writer::from_writer(writer);
            csv.write_record([
                "smell",
                "occurrences",
                "scripts_affected",
                "density_per_kloc",
                "script_proportion_pct",
            ])?;
            for smell in SmellId::ALL {
                csv.write_record([
                    smell.as_str().to_string(),
                    metrics.occurrence_counts[&smell].to_string(),
                    metrics.scripts_with_smell[&smell].to_string(),
                    two_places(metrics.densities[&smell]),
                    two_places(metrics.proportions[&smell]),
                ])?;
            }
            csv.write_record([
                "ALL_COMBINED".to_string(),
                metrics.total_occurrences.to_string(),
                metrics.scripts_with_any.to_string(),
                two_places(metrics.combined_density),
                two_places(metrics.combined_proportion),
            ])?;
            csv.flush()?;
            Ok(())
        }
        ReportFormat::Json => finish_json(metrics, writer),
    }
}

fn eval_row_record(row: &EvalRow) -> [String; 7] {
    let rate = |r: Option<f64>| r.map(|v| format!("{v:.4}")).unwrap_or_default();
    [
        row.label.clone(),
        row.occurrences.to_string(),
        row.true_positives.to_string(),
        row.false_positives.to_string(),
        row.false_negatives.to_string(),
        rate(row.precision),
        rate(row.recall),
    ]
}

/// Write the precision/recall table, one row per smell plus the clean-script
/// row and the micro average.
pub fn write_eval_report<W: Write>(
    result: &EvalResult,
    format: ReportFormat,
    writer: W,
) -> Result<(), ReportError> {
    match format {
        ReportFormat::Csv => {
            let mut csv = csv::Writer::from_writer(writer);
            csv.write_record([
                "smell",
                "occurrences",
                "true_positives",
                "false_positives",
                "false_negatives",
                "precision",
                "recall",
            ])?;
            for row in &result.rows {
                csv.write_record(eval_row_record(row))?;
            }
            csv.write_record(eval_row_record(&result.no_smell))?;
            csv.write_record(eval_row_record(&result.aggregate))?;
            csv.flush()?;
            Ok(())
        }
        ReportFormat::Json => finish_json(result, writer),
    }
}

/// Write the curation outcome, one row per repository.
pub fn write_curation_report<W: Write>(
    report: &CurationReport,
    format: ReportFormat,
    writer: W,
) -> Result<(), ReportError> {
    match format {
        ReportFormat::Csv => {
            let mut csv = csv::Writer::from_writer(writer);
            csv.write_record(["repository", "outcome", "failed_criterion"])?;
            for name in &report.passing {
                csv.write_record([name.as_str(), "selected", ""])?;
            }
            for (name, criterion) in &report.rejections {
                csv.write_record([name.clone(), "rejected".to_string(), criterion.to_string()])?;
            }
            csv.flush()?;
            Ok(())
        }
        ReportFormat::Json => finish_json(report, writer),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{evaluate, Granularity, OracleEntry};
    use crate::metrics::compute_metrics;
    use crate::model::{Dialect, Occurrence, ParseStatus};
    use crate::scan::{Criterion, ScriptRecord};
    use std::path::PathBuf;

    fn sample_scan() -> ScanResult {
        let occ = |script: &str, smell, line| Occurrence {
            script: PathBuf::from(script),
            smell,
            line,
            snippet: format!("snippet at {line}"),
            secret_subtype: None,
        };
        ScanResult {
            root: PathBuf::from("corpus"),
            records: vec![
                ScriptRecord {
                    path: PathBuf::from("a.yml"),
                    dialect: Dialect::Ansible,
                    loc: 10,
                    token_count: 4,
                    status: ParseStatus::Parsed,
                    occurrences: vec![
                        occ("a.yml", SmellId::HardCodedSecret, 2),
                        occ("a.yml", SmellId::HttpWithoutTls, 5),
                        occ("a.yml", SmellId::HardCodedSecret, 8),
                    ],
                },
                ScriptRecord {
                    path: PathBuf::from("b, with comma.rb"),
                    dialect: Dialect::Chef,
                    loc: 5,
                    token_count: 1,
                    status: ParseStatus::Malformed { message: "unterminated block".into() },
                    occurrences: vec![],
                },
            ],
            skipped: vec![],
        }
    }

    #[test]
    fn scan_csv_has_one_column_per_smell_and_quotes_when_needed() {
        let mut out = Vec::new();
        write_scan_report(&sample_scan(), ReportFormat::Csv, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("script_path,ADMIN_BY_DEFAULT,EMPTY_PASSWORD,"));
        assert!(header.ends_with(",WEAK_CRYPTO,total"));
        assert_eq!(header.split(',').count(), 11);
        let row_a = lines.next().unwrap();
        assert_eq!(row_a, "a.yml,0,0,2,0,0,0,0,1,0,3");
        let row_b = lines.next().unwrap();
        assert!(row_b.starts_with("\"b, with comma.rb\""), "comma path must be quoted: {row_b}");
        assert!(row_b.ends_with(",0"));
        assert!(!text.contains('\r'), "LF line endings only");
    }

    #[test]
    fn scan_json_is_deterministic_and_complete() {
        let mut first = Vec::new();
        let mut second = Vec::new();
        write_scan_report(&sample_scan(), ReportFormat::Json, &mut first).unwrap();
        write_scan_report(&sample_scan(), ReportFormat::Json, &mut second).unwrap();
        assert_eq!(first, second);
        let value: serde_json::Value = serde_json::from_slice(&first).unwrap();
        assert_eq!(value["script_count"], 2);
        assert_eq!(value["total_loc"], 15);
        assert_eq!(value["malformed_count"], 1);
        assert_eq!(value["counts_by_smell"]["HARD_CODED_SECRET"], 2);
        assert_eq!(value["records"][0]["path"], "a.yml");
        assert_eq!(value["records"][0]["occurrences"][0]["line"], 2);
    }

    #[test]
    fn metrics_csv_rounds_to_two_places() {
        let metrics = compute_metrics(&sample_scan()).unwrap();
        let mut out = Vec::new();
        write_metrics_report(&metrics, ReportFormat::Csv, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        // 2 occurrences over 15 lines = 133.333... per kLOC; 1 of 2 scripts.
        assert!(text.contains("HARD_CODED_SECRET,2,1,133.33,50.00"), "{text}");
        assert!(text.contains("ALL_COMBINED,3,1,200.00,50.00"), "{text}");
    }

    #[test]
    fn eval_csv_leaves_undefined_rates_empty() {
        let detected = vec![Occurrence {
            script: PathBuf::from("a.yml"),
            smell: SmellId::HttpWithoutTls,
            line: 1,
            snippet: String::new(),
            secret_subtype: None,
        }];
        let oracle = vec![OracleEntry {
            script: PathBuf::from("a.yml"),
            smell: SmellId::HttpWithoutTls,
            count: 1,
            line: None,
        }];
        let result =
            evaluate(&[PathBuf::from("a.yml")], &detected, &oracle, Granularity::Script);
        let mut out = Vec::new();
        write_eval_report(&result, ReportFormat::Csv, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("Use of HTTP without TLS,1,1,0,0,1.0000,1.0000"), "{text}");
        // Smells absent from both sides have no defined precision or recall.
        assert!(text.contains("Admin by default,0,0,0,0,,"), "{text}");
        assert!(text.contains("Average,1,1,0,0,1.0000,1.0000"), "{text}");
    }

    #[test]
    fn curation_report_lists_selected_then_rejected() {
        let report = CurationReport {
            candidate_count: 2,
            survivors_after: [2, 2, 1, 1],
            passing: vec!["keeper".to_string()],
            rejections: vec![("slowpoke".to_string(), Criterion::LowCommitFrequency)],
        };
        let mut out = Vec::new();
        write_curation_report(&report, ReportFormat::Csv, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "repository,outcome,failed_criterion");
        assert_eq!(lines[1], "keeper,selected,");
        assert_eq!(lines[2], "slowpoke,rejected,criterion 3 (at least 2 commits per month)");
    }
}
