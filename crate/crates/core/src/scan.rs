//! Directory-tree scanning and repository curation.
//!
//! Scanning walks a tree, classifies each file as an Ansible playbook, a
//! Chef recipe, or out of scope, parses the scripts it finds, and runs the
//! detection rules over them. Results are keyed by path relative to the
//! scan root and sorted, so serial and parallel runs produce identical
//! output. Curation filters a repository-metadata table down to the
//! repositories worth mining, applying four criteria in a fixed order.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::ansible::parse_ansible;
use crate::chef::parse_chef;
use crate::model::{Dialect, Occurrence, ParseStatus, SmellId};
use crate::rules::detect;

/// Errors raised while scanning a tree or reading curation metadata.
#[derive(Debug, thiserror::Error)]
pub enum ScanError {
    #[error("scan root not found: {0}")]
    RootNotFound(PathBuf),
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("metadata file has no usable rows: {0}")]
    EmptyMetadata(PathBuf),
}

/// How a scan selects and processes files.
#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    /// Restrict the scan to one dialect instead of both.
    pub dialect: Option<Dialect>,
    /// Require path or content evidence before classifying a file as an
    /// infrastructure script, instead of trusting the extension alone.
    pub strict: bool,
    /// Parse and analyze scripts on a thread pool.
    pub parallel: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { dialect: None, strict: false, parallel: true }
    }
}

/// Directory names that mark a YAML file as part of an Ansible layout.
const ANSIBLE_DIRS: [&str; 9] = [
    "tasks", "handlers", "vars", "defaults", "meta", "group_vars", "host_vars", "playbooks",
    "roles",
];

/// Directory names that mark a Ruby file as part of a Chef cookbook.
const CHEF_DIRS: [&str; 7] =
    ["recipes", "attributes", "cookbooks", "resources", "providers", "definitions", "libraries"];

/// Content fragments that suggest a Ruby file drives Chef.
const CHEF_HINTS: [&str; 8] = [
    "include_recipe",
    "node.default",
    "node[",
    "default[",
    "remote_file",
    "cookbook_file",
    "chef_gem",
    "only_if",
];

fn has_component(path: &Path, names: &[&str]) -> bool {
    path.components().any(|c| {
        c.as_os_str().to_str().map(|s| names.contains(&s)).unwrap_or(false)
    })
}

/// Decide which dialect, if any, a file belongs to.
///
/// Classification is by extension; with `strict` set, the path must also sit
/// in a conventional layout directory or the content head must carry a
/// dialect hint.
pub fn classify_script(path: &Path, head: &str, strict: bool) -> Option<Dialect> {
    let ext = path.extension()?.to_str()?.to_lowercase();
    match ext.as_str() {
        "yml" | "yaml" => {
            if !strict {
                return Some(Dialect::Ansible);
            }
            let head_trim = head.trim_start();
            let looks_like_play = head_trim.starts_with("---") || head_trim.starts_with("- ");
            (has_component(path, &ANSIBLE_DIRS) || looks_like_play).then_some(Dialect::Ansible)
        }
        "rb" => {
            if !strict {
                return Some(Dialect::Chef);
            }
            let hinted = CHEF_HINTS.iter().any(|h| head.contains(h));
            (has_component(path, &CHEF_DIRS) || hinted).then_some(Dialect::Chef)
        }
        _ => None,
    }
}

/// One analyzed script: where it lives, what it parsed into, and what the
/// rules found in it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScriptRecord {
    pub path: PathBuf,
    pub dialect: Dialect,
    pub loc: usize,
    pub token_count: usize,
    pub status: ParseStatus,
    pub occurrences: Vec<Occurrence>,
}

/// A file the scan meant to analyze but could not read.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedFile {
    pub path: PathBuf,
    pub reason: String,
}

/// Everything a scan produced, with records sorted by relative path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub root: PathBuf,
    pub records: Vec<ScriptRecord>,
    pub skipped: Vec<SkippedFile>,
}

impl ScanResult {
    /// Lines of code across every script that was read, malformed or not.
    pub fn total_loc(&self) -> usize {
        self.records.iter().map(|r| r.loc).sum()
    }

    /// Total number of smell occurrences across the tree.
    pub fn occurrence_count(&self) -> usize {
        self.records.iter().map(|r| r.occurrences.len()).sum()
    }

    /// Occurrence totals keyed by smell.
    pub fn count_by_smell(&self) -> BTreeMap<SmellId, usize> {
        let mut out = BTreeMap::new();
        for record in &self.records {
            for occ in &record.occurrences {
                *out.entry(occ.smell).or_insert(0) += 1;
            }
        }
        out
    }
}

/// Scan `root` (a directory tree or a single file) for infrastructure
/// scripts and analyze each one.
pub fn scan_tree(root: &Path, options: ScanOptions) -> Result<ScanResult, ScanError> {
    if !root.exists() {
        return Err(ScanError::RootNotFound(root.to_path_buf()));
    }

    let mut candidates: Vec<PathBuf> = Vec::new();
    if root.is_file() {
        candidates.push(root.to_path_buf());
    } else {
        let walker = WalkDir::new(root).follow_links(false).into_iter();
        for entry in walker.filter_entry(|e| e.depth() == 0 || !is_hidden(e.file_name())) {
            match entry {
                Ok(e) if e.file_type().is_file() => candidates.push(e.into_path()),
                _ => {}
            }
        }
    }
    candidates.sort();

    let analyze = |path: &PathBuf| -> Option<Result<ScriptRecord, SkippedFile>> {
        let relative = relative_to(path, root);
        // Cheap pre-filter: only .yml/.yaml/.rb files are ever scripts.
        classify_script(&relative, "", false)?;
        let source = match std::fs::read_to_string(path) {
            Ok(s) => s,
            Err(e) => {
                return Some(Err(SkippedFile { path: relative, reason: e.to_string() }));
            }
        };
        let head: String = source.chars().take(2048).collect();
        let dialect = classify_script(&relative, &head, options.strict)?;
        if let Some(filter) = options.dialect {
            if filter != dialect {
                return None;
            }
        }
        let parsed = match dialect {
            Dialect::Ansible => parse_ansible(&source, &relative),
            Dialect::Chef => parse_chef(&source, &relative),
        };
        let occurrences = detect(&parsed.stream);
        Some(Ok(ScriptRecord {
            path: relative,
            dialect,
            loc: parsed.stream.loc,
            token_count: parsed.stream.tokens.len(),
            status: parsed.status,
            occurrences,
        }))
    };

    let outcomes: Vec<Result<ScriptRecord, SkippedFile>> = if options.parallel {
        candidates.par_iter().filter_map(analyze).collect()
    } else {
        candidates.iter().filter_map(analyze).collect()
    };

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(r) => records.push(r),
            Err(s) => skipped.push(s),
        }
    }
    records.sort_by(|a, b| a.path.cmp(&b.path));
    skipped.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(ScanResult { root: root.to_path_buf(), records, skipped })
}

fn is_hidden(name: &std::ffi::OsStr) -> bool {
    name.to_str().map(|s| s.starts_with('.')).unwrap_or(false)
}

fn relative_to(path: &Path, root: &Path) -> PathBuf {
    if path == root {
        return PathBuf::from(path.file_name().unwrap_or(path.as_os_str()));
    }
    path.strip_prefix(root).map(Path::to_path_buf).unwrap_or_else(|_| path.to_path_buf())
}

/// Per-repository metadata used to decide whether the repository is worth
/// mining for infrastructure scripts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepoMetadata {
    pub name: String,
    pub total_file_count: usize,
    pub iac_script_count: usize,
    pub commits_per_month: f64,
    pub developer_count: usize,
    pub is_clone: bool,
}

/// The selection criteria, in the order they are applied. A repository is
/// rejected by the first criterion it fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Criterion {
    /// Fewer than 11% of the repository's files are infrastructure scripts.
    InsufficientIacShare,
    /// The repository is a clone or fork of another.
    CloneRepository,
    /// Fewer than 2 commits per month on average.
    LowCommitFrequency,
    /// Fewer than 10 distinct developers.
    FewDevelopers,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [
        Criterion::InsufficientIacShare,
        Criterion::CloneRepository,
        Criterion::LowCommitFrequency,
        Criterion::FewDevelopers,
    ];

    pub fn description(self) -> &'static str {
        match self {
            Criterion::InsufficientIacShare => "at least 11% of files are IaC scripts",
            Criterion::CloneRepository => "repository is not a clone",
            Criterion::LowCommitFrequency => "at least 2 commits per month",
            Criterion::FewDevelopers => "at least 10 developers",
        }
    }
}

impl std::fmt::Display for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let n = Criterion::ALL.iter().position(|c| c == self).unwrap() + 1;
        write!(f, "criterion {n} ({})", self.description())
    }
}

fn passes(repo: &RepoMetadata, criterion: Criterion) -> bool {
    match criterion {
        // Integer cross-multiplication keeps the 11% share test exact.
        Criterion::InsufficientIacShare => {
            repo.total_file_count > 0
                && repo.iac_script_count * 100 >= repo.total_file_count * 11
        }
        Criterion::CloneRepository => !repo.is_clone,
        Criterion::LowCommitFrequency => repo.commits_per_month >= 2.0,
        Criterion::FewDevelopers => repo.developer_count >= 10,
    }
}

/// Outcome of curating a metadata table: survivors after each cumulative
/// criterion, the names that passed everything, and why the rest fell out.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurationReport {
    pub candidate_count: usize,
    /// Repositories still standing after criteria 1, 1-2, 1-3, and 1-4.
    pub survivors_after: [usize; 4],
    pub passing: Vec<String>,
    pub rejections: Vec<(String, Criterion)>,
}

/// Apply the four selection criteria to every repository in order.
pub fn curate(repos: &[RepoMetadata]) -> CurationReport {
    let mut survivors_after = [0usize; 4];
    let mut passing = Vec::new();
    let mut rejections = Vec::new();
    for repo in repos {
        let mut failed = None;
        for (i, criterion) in Criterion::ALL.into_iter().enumerate() {
            if failed.is_none() {
                if passes(repo, criterion) {
                    survivors_after[i] += 1;
                } else {
                    failed = Some(criterion);
                }
            }
        }
        match failed {
            None => passing.push(repo.name.clone()),
            Some(criterion) => rejections.push((repo.name.clone(), criterion)),
        }
    }
    CurationReport { candidate_count: repos.len(), survivors_after, passing, rejections }
}

/// Read repository metadata from a CSV file with columns `name,
/// total_file_count, iac_script_count, commits_per_month, developer_count,
/// is_clone`. Rows that fail to parse, or claim more scripts than files,
/// are skipped and reported as warnings.
pub fn read_metadata_csv(path: &Path) -> Result<(Vec<RepoMetadata>, Vec<String>), ScanError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => ScanError::Io { path: path.to_path_buf(), source },
            other => ScanError::Io {
                path: path.to_path_buf(),
                source: std::io::Error::other(format!("{other:?}")),
            },
        })?;
    let mut repos = Vec::new();
    let mut warnings = Vec::new();
    for (index, row) in reader.deserialize::<RepoMetadata>().enumerate() {
        let line = index + 2; // header is line 1
        match row {
            Ok(repo) => {
                if repo.iac_script_count > repo.total_file_count {
                    warnings.push(format!(
                        "line {line}: {} claims {} IaC scripts out of {} files; row skipped",
                        repo.name, repo.iac_script_count, repo.total_file_count
                    ));
                } else {
                    repos.push(repo);
                }
            }
            Err(e) => warnings.push(format!("line {line}: row skipped: {e}")),
        }
    }
    if repos.is_empty() {
        return Err(ScanError::EmptyMetadata(path.to_path_buf()));
    }
    Ok((repos, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn repo(name: &str, total: usize, iac: usize, cpm: f64, devs: usize, clone: bool) -> RepoMetadata {
        RepoMetadata {
            name: name.to_string(),
            total_file_count: total,
            iac_script_count: iac,
            commits_per_month: cpm,
            developer_count: devs,
            is_clone: clone,
        }
    }

    #[test]
    fn extension_classification_without_strict_mode() {
        assert_eq!(classify_script(Path::new("site.yml"), "", false), Some(Dialect::Ansible));
        assert_eq!(classify_script(Path::new("a/b.YAML"), "", false), Some(Dialect::Ansible));
        assert_eq!(classify_script(Path::new("default.rb"), "", false), Some(Dialect::Chef));
        assert_eq!(classify_script(Path::new("notes.txt"), "", false), None);
        assert_eq!(classify_script(Path::new("Rakefile"), "", false), None);
    }

    #[test]
    fn strict_mode_requires_layout_or_content_evidence() {
        assert_eq!(
            classify_script(Path::new("roles/db/tasks/main.yml"), "", true),
            Some(Dialect::Ansible)
        );
        assert_eq!(
            classify_script(Path::new("ci.yml"), "---\n- hosts: all\n", true),
            Some(Dialect::Ansible)
        );
        assert_eq!(classify_script(Path::new("ci.yml"), "key: value\n", true), None);
        assert_eq!(
            classify_script(Path::new("cookbooks/app/recipes/default.rb"), "", true),
            Some(Dialect::Chef)
        );
        assert_eq!(
            classify_script(Path::new("setup.rb"), "include_recipe 'x'\n", true),
            Some(Dialect::Chef)
        );
        assert_eq!(classify_script(Path::new("setup.rb"), "puts 'hi'\n", true), None);
    }

    #[test]
    fn curation_boundaries() {
        // Exactly at each threshold passes; just below fails.
        let rows = [
            (repo("share-at-11pct", 100, 11, 5.0, 20, false), None),
            (repo("share-below", 1000, 109, 5.0, 20, false), Some(Criterion::InsufficientIacShare)),
            (repo("empty-repo", 0, 0, 5.0, 20, false), Some(Criterion::InsufficientIacShare)),
            (repo("a-clone", 100, 50, 5.0, 20, true), Some(Criterion::CloneRepository)),
            (repo("commits-at-2", 100, 50, 2.0, 20, false), None),
            (repo("commits-below", 100, 50, 1.9, 20, false), Some(Criterion::LowCommitFrequency)),
            (repo("devs-at-10", 100, 50, 5.0, 10, false), None),
            (repo("devs-below", 100, 50, 5.0, 9, false), Some(Criterion::FewDevelopers)),
        ];
        for (r, expected) in &rows {
            let report = curate(std::slice::from_ref(r));
            match expected {
                None => assert_eq!(report.passing, vec![r.name.clone()], "{}", r.name),
                Some(c) => {
                    assert_eq!(report.rejections, vec![(r.name.clone(), *c)], "{}", r.name)
                }
            }
        }
    }

    #[test]
    fn curation_funnel_is_cumulative() {
        let repos = vec![
            repo("good-1", 100, 50, 5.0, 20, false),
            repo("good-2", 100, 20, 3.0, 11, false),
            repo("fails-share", 100, 5, 5.0, 20, false),
            repo("fails-clone", 100, 50, 5.0, 20, true),
            repo("fails-commits", 100, 50, 0.5, 20, false),
            repo("fails-devs", 100, 50, 5.0, 3, false),
        ];
        let report = curate(&repos);
        assert_eq!(report.candidate_count, 6);
        assert_eq!(report.survivors_after, [5, 4, 3, 2]);
        assert_eq!(report.passing, vec!["good-1", "good-2"]);
        assert_eq!(report.rejections.len(), 4);
    }

    #[test]
    fn rejection_reports_first_failed_criterion() {
        // Fails everything; only the share criterion is reported.
        let r = repo("hopeless", 100, 1, 0.1, 1, true);
        let report = curate(&[r]);
        assert_eq!(report.rejections[0].1, Criterion::InsufficientIacShare);
    }

    #[test]
    fn criterion_display_is_numbered() {
        assert_eq!(
            Criterion::LowCommitFrequency.to_string(),
            "criterion 3 (at least 2 commits per month)"
        );
    }

    proptest::proptest! {
        /// The funnel never grows and the final stage matches the pass list.
        #[test]
        fn funnel_is_monotone(
            specs in proptest::collection::vec(
                (1usize..200, 0usize..200, 0.0f64..10.0, 0usize..30, proptest::bool::ANY),
                0..30,
            )
        ) {
            let repos: Vec<RepoMetadata> = specs
                .iter()
                .enumerate()
                .map(|(i, (total, iac, cpm, devs, clone))| {
                    repo(&format!("r{i}"), *total, (*iac).min(*total), *cpm, *devs, *clone)
                })
                .collect();
            let report = curate(&repos);
            proptest::prop_assert!(report.survivors_after[0] <= report.candidate_count);
            for w in report.survivors_after.windows(2) {
                proptest::prop_assert!(w[1] <= w[0]);
            }
            proptest::prop_assert_eq!(report.passing.len(), report.survivors_after[3]);
            proptest::prop_assert_eq!(
                report.passing.len() + report.rejections.len(),
                report.candidate_count
            );
        }
    }
}
