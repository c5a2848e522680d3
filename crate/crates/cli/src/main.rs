//! Command-line interface for the security smell linter.
//!
//! Three subcommands cover the workflow: `scan` analyzes a directory tree or
//! a single script and reports occurrences, `eval` compares scan output with
//! a hand-labeled oracle, and `curate` filters a repository-metadata table
//! down to the repositories worth mining. Reports go to stdout (or `--out`);
//! progress, warnings, and summaries go to stderr.

use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use iaclint::{
    compute_metrics, curate, evaluate, read_metadata_csv, read_oracle_file, scan_tree,
    write_curation_report, write_eval_report, write_metrics_report, write_scan_report, Dialect,
    EvalResult, EvalRow, Granularity, ReportFormat, ScanOptions, ScanResult,
};

#[derive(Parser)]
#[command(
    name = "iaclint",
    version,
    about = "Security smell linter for Ansible playbooks and Chef recipes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan a directory tree or a single script for security smells.
    Scan(ScanArgs),
    /// Evaluate scan findings against a hand-labeled oracle.
    Eval(EvalArgs),
    /// Select repositories worth mining from a metadata table.
    Curate(CurateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DialectArg {
    /// Classify each file by extension and layout.
    Auto,
    Ansible,
    Chef,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for ReportFormat {
    fn from(arg: FormatArg) -> ReportFormat {
        match arg {
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Json => ReportFormat::Json,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GranularityArg {
    /// Match expected and detected counts per script and smell.
    Script,
    /// Additionally require matching line numbers.
    Line,
}

#[derive(Args)]
struct ScanArgs {
    /// Root directory or script file to scan.
    #[arg(long)]
    path: PathBuf,
    /// Restrict the scan to one dialect.
    #[arg(long, value_enum, default_value_t = DialectArg::Auto)]
    dialect: DialectArg,
    /// Require layout or content evidence before treating a file as an
    /// infrastructure script.
    #[arg(long)]
    strict: bool,
    /// Report encoding.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Write the report to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 2 if total occurrences exceed this number.
    #[arg(long)]
    fail_threshold: Option<usize>,
    /// Scan on a single thread.
    #[arg(long)]
    serial: bool,
    /// Report corpus metrics (density and proportion per smell) instead of
    /// per-script occurrence counts.
    #[arg(long)]
    metrics: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Root directory or script file to scan.
    #[arg(long)]
    path: PathBuf,
    /// Oracle CSV with columns `script, smell, count` and optional `line`.
    #[arg(long)]
    oracle: PathBuf,
    /// Matching granularity.
    #[arg(long, value_enum, default_value_t = GranularityArg::Script)]
    granularity: GranularityArg,
    /// Restrict the scan to one dialect.
    #[arg(long, value_enum, default_value_t = DialectArg::Auto)]
    dialect: DialectArg,
    /// Require layout or content evidence before treating a file as an
    /// infrastructure script.
    #[arg(long)]
    strict: bool,
    /// Report encoding.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Write the report to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CurateArgs {
    /// Metadata CSV with columns `name, total_file_count, iac_script_count,
    /// commits_per_month, developer_count, is_clone`.
    #[arg(long)]
    metadata: PathBuf,
    /// Report encoding.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Write the report to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Scan(args) => run_scan(args),
        Command::Eval(args) => run_eval(args),
        Command::Curate(args) => run_curate(args),
    }
}

fn scan_options(dialect: DialectArg, strict: bool, serial: bool) -> ScanOptions {
    ScanOptions {
        dialect: match dialect {
            DialectArg::Auto => None,
            DialectArg::Ansible => Some(Dialect::Ansible),
            DialectArg::Chef => Some(Dialect::Chef),
        },
        strict,
        parallel: !serial,
    }
}

/// Open the report sink: a file when `--out` is given, stdout otherwise.
fn open_sink(out: Option<&PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    match out {
        Some(path) => {
            let file = File::create(path)
                .with_context(|| format!("cannot create report file {}", path.display()))?;
            Ok(Box::new(file))
        }
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

fn print_scan_summary(result: &ScanResult) {
    let malformed = result.records.iter().filter(|r| r.status.is_malformed()).count();
    eprintln!(
        "scanned {} scripts ({} lines): {} occurrences",
        result.records.len(),
        result.total_loc(),
        result.occurrence_count()
    );
    for (smell, count) in result.count_by_smell() {
        if count > 0 {
            eprintln!("  {}: {}", smell.display_name(), count);
        }
    }
    if malformed > 0 {
        eprintln!("warning: {malformed} scripts failed to parse; only their comments were analyzed");
    }
    for skipped in &result.skipped {
        eprintln!("warning: skipped {}: {}", skipped.path.display(), skipped.reason);
    }
}

fn run_scan(args: ScanArgs) -> anyhow::Result<i32> {
    let options = scan_options(args.dialect, args.strict, args.serial);
    let result = scan_tree(&args.path, options)?;
    print_scan_summary(&result);
    let sink = open_sink(args.out.as_ref())?;
    if args.metrics {
        let metrics = compute_metrics(&result)?;
        write_metrics_report(&metrics, args.format.into(), sink)?;
    } else {
        write_scan_report(&result, args.format.into(), sink)?;
    }
    if let Some(threshold) = args.fail_threshold {
        if result.occurrence_count() > threshold {
            eprintln!(
                "fail: {} occurrences exceed the threshold of {threshold}",
                result.occurrence_count()
            );
            return Ok(2);
        }
    }
    Ok(0)
}

/// Render the precision/recall table in a fixed-width layout.
fn render_eval_table(result: &EvalResult) -> String {
    let rate = |r: Option<f64>| r.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".to_string());
    let mut out = String::new();
    let line = |out: &mut String, row: &EvalRow| {
        out.push_str(&format!(
            "{:<36} {:>8} {:>10} {:>7}\n",
            row.label,
            row.occurrences,
            rate(row.precision),
            rate(row.recall)
        ));
    };
    out.push_str(&format!(
        "{:<36} {:>8} {:>10} {:>7}\n",
        "Smell Name", "Occurr.", "Precision", "Recall"
    ));
    for row in &result.rows {
        line(&mut out, row);
    }
    line(&mut out, &result.no_smell);
    line(&mut out, &result.aggregate);
    out
}

fn run_eval(args: EvalArgs) -> anyhow::Result<i32> {
    let options = scan_options(args.dialect, args.strict, false);
    let result = scan_tree(&args.path, options)?;
    let detected: Vec<_> =
        result.records.iter().flat_map(|r| r.occurrences.iter().cloned()).collect();
    let universe: Vec<PathBuf> = result.records.iter().map(|r| r.path.clone()).collect();
    let (oracle, warnings) = read_oracle_file(&args.oracle)?;
    for warning in &warnings {
        eprintln!("warning: {}: {warning}", args.oracle.display());
    }
    let granularity = match args.granularity {
        GranularityArg::Script => Granularity::Script,
        GranularityArg::Line => Granularity::Line,
    };
    let evaluation = evaluate(&universe, &detected, &oracle, granularity);
    for skipped in &evaluation.skipped {
        eprintln!("warning: {skipped}");
    }
    eprint!("{}", render_eval_table(&evaluation));
    let sink = open_sink(args.out.as_ref())?;
    write_eval_report(&evaluation, args.format.into(), sink)?;
    Ok(0)
}

fn run_curate(args: CurateArgs) -> anyhow::Result<i32> {
    let (repos, warnings) = read_metadata_csv(&args.metadata)?;
    for warning in &warnings {
        eprintln!("warning: {}: {warning}", args.metadata.display());
    }
    let report = curate(&repos);
    eprintln!("candidates: {}", report.candidate_count);
    for (i, survivors) in report.survivors_after.iter().enumerate() {
        eprintln!("after {}: {survivors}", iaclint::Criterion::ALL[i]);
    }
    eprintln!("selected: {}", report.passing.len());
    let sink = open_sink(args.out.as_ref())?;
    write_curation_report(&report, args.format.into(), sink)?;
    Ok(0)
}
