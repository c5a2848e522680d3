//! Precision/recall evaluation of detector output against a hand-labeled
//! oracle.
//!
//! The oracle is a CSV of expected occurrence counts per script and smell,
//! optionally pinned to line numbers. Evaluation compares detected and
//! expected occurrences at script granularity (counts per script and smell)
//! or line granularity (counts per script, smell, and line), producing one
//! row per smell, a "no smell" row over clean scripts, and a micro-averaged
//! aggregate.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::model::{Occurrence, SmellId};

/// Errors reading an oracle file.
#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("failed to read oracle {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("oracle {path} must start with a `script,smell,count[,line]` header")]
    BadHeader { path: PathBuf },
    #[error("oracle {path} has no usable rows")]
    Empty { path: PathBuf },
}

/// One expected finding: `count` occurrences of `smell` in `script`,
/// optionally at a specific line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleEntry {
    pub script: PathBuf,
    pub smell: SmellId,
    pub count: usize,
    pub line: Option<usize>,
}

/// Granularity at which detected and expected occurrences are matched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    /// Match counts per script and smell.
    Script,
    /// Match counts per script, smell, and line number.
    Line,
}

impl std::fmt::Display for Granularity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Granularity::Script => write!(f, "script"),
            Granularity::Line => write!(f, "line"),
        }
    }
}

/// Resolve a human- or machine-written smell name to its catalog id.
///
/// Names are compared after lowercasing and squashing every non-alphanumeric
/// run to one space, so `HARD_CODED_SECRET`, `Hard-coded secret`, and
/// `hard coded secret` all resolve alike. A few historical aliases are
/// accepted.
pub fn resolve_smell_name(raw: &str) -> Option<SmellId> {
    let normalized = normalize_name(raw);
    let hit = match normalized.as_str() {
        "admin by default" => SmellId::AdminByDefault,
        "empty password" => SmellId::EmptyPassword,
        "hard coded secret" | "hardcoded secret" | "hard coded secrets" => SmellId::HardCodedSecret,
        "missing default in case statement"
        | "missing default in case"
        | "missing default in switch"
        | "missing default case" => SmellId::MissingDefaultInCase,
        "no integrity check" | "missing integrity check" => SmellId::NoIntegrityCheck,
        "suspicious comment" | "suspicious comments" => SmellId::SuspiciousComment,
        "unrestricted ip address" | "invalid ip address binding" | "unrestricted ip" => {
            SmellId::UnrestrictedIpAddress
        }
        "use of http without tls" | "http without tls" | "use of http" => SmellId::HttpWithoutTls,
        "use of weak crypto" | "weak crypto" | "use of weak cryptography algorithms" => {
            SmellId::WeakCrypto
        }
        _ => return None,
    };
    Some(hit)
}

fn normalize_name(raw: &str) -> String {
    let mut out = String::new();
    let mut pending_space = false;
    for ch in raw.chars() {
        if ch.is_alphanumeric() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.extend(ch.to_lowercase());
        } else {
            pending_space = true;
        }
    }
    out
}

/// Read an oracle CSV with columns `script, smell, count` and an optional
/// trailing `line` column. Unresolvable smell names or malformed counts skip
/// the row with a warning.
pub fn read_oracle_file(path: &Path) -> Result<(Vec<OracleEntry>, Vec<String>), EvalError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => EvalError::Io { path: path.to_path_buf(), source },
            other => EvalError::Io {
                path: path.to_path_buf(),
                source: std::io::Error::other(format!("{other:?}")),
            },
        })?;
    {
        let headers = reader.headers().map_err(|e| EvalError::Io {
            path: path.to_path_buf(),
            source: std::io::Error::other(e.to_string()),
        })?;
        let names: Vec<String> = headers.iter().map(normalize_name).collect();
        let expected_prefix = ["script", "smell", "count"];
        let prefix_ok = names.len() >= 3
            && names.iter().zip(expected_prefix).all(|(got, want)| got == want);
        let suffix_ok = names.len() == 3 || (names.len() == 4 && names[3] == "line");
        if !prefix_ok || !suffix_ok {
            return Err(EvalError::BadHeader { path: path.to_path_buf() });
        }
    }
    let mut entries = Vec::new();
    let mut warnings = Vec::new();
    for (index, row) in reader.records().enumerate() {
        let line_no = index + 2;
        let record = match row {
            Ok(r) => r,
            Err(e) => {
                warnings.push(format!("line {line_no}: row skipped: {e}"));
                continue;
            }
        };
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let script = record.get(0).unwrap_or("");
        let smell_raw = record.get(1).unwrap_or("");
        let count_raw = record.get(2).unwrap_or("");
        let Some(smell) = resolve_smell_name(smell_raw) else {
            warnings.push(format!("line {line_no}: unknown smell name {smell_raw:?}; row skipped"));
            continue;
        };
        let Ok(count) = count_raw.parse::<usize>() else {
            warnings.push(format!("line {line_no}: bad count {count_raw:?}; row skipped"));
            continue;
        };
        let line = match record.get(3) {
            None | Some("") => None,
            Some(raw) => match raw.parse::<usize>() {
                Ok(n) => Some(n),
                Err(_) => {
                    warnings.push(format!("line {line_no}: bad line number {raw:?}; row skipped"));
                    continue;
                }
            },
        };
        entries.push(OracleEntry { script: PathBuf::from(script), smell, count, line });
    }
    if entries.is_empty() {
        return Err(EvalError::Empty { path: path.to_path_buf() });
    }
    Ok((entries, warnings))
}

/// Confusion counts and derived rates for one evaluation row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    pub label: String,
    /// Detected occurrences contributing to this row.
    pub occurrences: usize,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    /// `tp / (tp + fp)`, undefined when nothing was detected.
    pub precision: Option<f64>,
    /// `tp / (tp + fn)`, undefined when nothing was expected.
    pub recall: Option<f64>,
}

impl EvalRow {
    fn from_counts(label: String, occurrences: usize, tp: usize, fp: usize, fn_count: usize) -> EvalRow {
        let ratio = |num: usize, denom: usize| {
            (denom > 0).then(|| num as f64 / denom as f64)
        };
        EvalRow {
            label,
            occurrences,
            true_positives: tp,
            false_positives: fp,
            false_negatives: fn_count,
            precision: ratio(tp, tp + fp),
            recall: ratio(tp, tp + fn_count),
        }
    }
}

/// Full evaluation output: one row per smell in catalog order, the
/// clean-script row, a micro-averaged aggregate, and any oracle entries that
/// could not be used.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalResult {
    pub granularity: Granularity,
    pub script_count: usize,
    pub rows: Vec<EvalRow>,
    pub no_smell: EvalRow,
    pub aggregate: EvalRow,
    pub skipped: Vec<String>,
}

/// Compare detector output with the oracle over a fixed universe of
/// scripts.
///
/// Oracle entries for scripts outside the universe are skipped and
/// reported; at line granularity, entries without a line number are too.
pub fn evaluate(
    universe: &[PathBuf],
    detected: &[Occurrence],
    oracle: &[OracleEntry],
    granularity: Granularity,
) -> EvalResult {
    let scripts: BTreeSet<&PathBuf> = universe.iter().collect();
    let mut skipped = Vec::new();

    // Detected and expected counts per matching key.
    let mut detected_counts: BTreeMap<(&PathBuf, SmellId, Option<usize>), usize> = BTreeMap::new();
    for occ in detected {
        if !scripts.contains(&occ.script) {
            skipped.push(format!(
                "detected occurrence in {} ignored: script not in the evaluated set",
                occ.script.display()
            ));
            continue;
        }
        let line = (granularity == Granularity::Line).then_some(occ.line);
        *detected_counts.entry((&occ.script, occ.smell, line)).or_insert(0) += 1;
    }
    let mut expected_counts: BTreeMap<(&PathBuf, SmellId, Option<usize>), usize> = BTreeMap::new();
    for entry in oracle {
        if !scripts.contains(&entry.script) {
            skipped.push(format!(
                "oracle entry for {} ignored: script not in the evaluated set",
                entry.script.display()
            ));
            continue;
        }
        let line = match granularity {
            Granularity::Script => None,
            Granularity::Line => match entry.line {
                Some(n) => Some(n),
                None => {
                    skipped.push(format!(
                        "oracle entry for {} ({}) ignored: no line number at line granularity",
                        entry.script.display(),
                        entry.smell.display_name()
                    ));
                    continue;
                }
            },
        };
        *expected_counts.entry((&entry.script, entry.smell, line)).or_insert(0) += entry.count;
    }

    // Confusion counts per smell across all keys.
    let mut tallies: BTreeMap<SmellId, (usize, usize, usize, usize)> =
        SmellId::ALL.iter().map(|s| (*s, (0, 0, 0, 0))).collect();
    let keys: BTreeSet<&(&PathBuf, SmellId, Option<usize>)> =
        detected_counts.keys().chain(expected_counts.keys()).collect();
    for key in keys {
        let d = detected_counts.get(key).copied().unwrap_or(0);
        let o = expected_counts.get(key).copied().unwrap_or(0);
        let entry = tallies.get_mut(&key.1).expect("catalog smell");
        entry.0 += d;
        entry.1 += d.min(o);
        entry.2 += d.saturating_sub(o);
        entry.3 += o.saturating_sub(d);
    }
    let rows: Vec<EvalRow> = SmellId::ALL
        .iter()
        .map(|smell| {
            let (occ, tp, fp, fn_count) = tallies[smell];
            EvalRow::from_counts(smell.display_name().to_string(), occ, tp, fp, fn_count)
        })
        .collect();

    // The clean-script class: scripts with no occurrences at all.
    let detected_dirty: BTreeSet<&PathBuf> = detected_counts.keys().map(|k| k.0).collect();
    let expected_dirty: BTreeSet<&PathBuf> =
        expected_counts.iter().filter(|(_, c)| **c > 0).map(|(k, _)| k.0).collect();
    let mut clean_tp = 0usize;
    let mut clean_fp = 0usize;
    let mut clean_fn = 0usize;
    for script in &scripts {
        match (detected_dirty.contains(script), expected_dirty.contains(script)) {
            (false, false) => clean_tp += 1,
            (false, true) => clean_fp += 1,
            (true, false) => clean_fn += 1,
            (true, true) => {}
        }
    }
    let clean_detected = scripts.len() - detected_dirty.len();
    let no_smell =
        EvalRow::from_counts("No smell".to_string(), clean_detected, clean_tp, clean_fp, clean_fn);

    // Micro average over the smell rows only.
    let sum = |f: fn(&EvalRow) -> usize| rows.iter().map(f).sum::<usize>();
    let aggregate = EvalRow::from_counts(
        "Average".to_string(),
        sum(|r| r.occurrences),
        sum(|r| r.true_positives),
        sum(|r| r.false_positives),
        sum(|r| r.false_negatives),
    );

    EvalResult { granularity, script_count: scripts.len(), rows, no_smell, aggregate, skipped }
}
