//! Security smell analysis for infrastructure-as-code scripts.
//!
//! The crate parses Ansible playbooks and Chef recipes into a shared token
//! model, evaluates a fixed catalog of nine security smell rules over the
//! tokens, and aggregates findings across a directory tree into density
//! metrics, precision/recall evaluations, and CSV/JSON reports.

#![forbid(unsafe_code)]

pub mod ansible;
pub mod chef;
pub mod eval;
pub mod metrics;
pub mod model;
pub mod patterns;
pub mod report;
pub mod rules;
pub mod scan;

pub use model::{
    cwe_for, smell_catalog, smell_catalog_all, smell_definition, Cwe, Dialect, Occurrence,
    ParseStatus, ParsedScript, SecretSubtype, SmellDefinition, SmellId, Token, TokenKind,
    TokenStream,
};
pub use patterns::PatternFn;
pub use eval::{
    evaluate, read_oracle_file, resolve_smell_name, EvalError, EvalResult, EvalRow, Granularity,
    OracleEntry,
};
pub use metrics::{compute_metrics, script_proportion, smell_density, CorpusMetrics, MetricsError};
pub use report::{
    write_curation_report, write_eval_report, write_metrics_report, write_scan_report,
    ReportError, ReportFormat,
};
pub use rules::{classify_secret, detect};
pub use scan::{
    classify_script, curate, read_metadata_csv, scan_tree, CurationReport, Criterion,
    RepoMetadata, ScanError, ScanOptions, ScanResult, ScriptRecord, SkippedFile,
};
