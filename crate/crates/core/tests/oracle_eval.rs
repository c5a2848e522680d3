//! Oracle-file parsing and evaluation against a scanned fixture tree.

use std::fs;
use std::path::PathBuf;

use iaclint::{
    evaluate, read_oracle_file, scan_tree, write_eval_report, Granularity, ReportFormat,
    ScanOptions, SmellId,
};

#[test]
fn oracle_rows_parse_with_aliases_and_bad_rows_warn() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("oracle.csv");
    fs::write(
        &path,
        "script,smell,count,line\n\
         site.yml,Hard-coded secret,2,\n\
         site.yml,Invalid IP Address Binding,1,14\n\
         recipe.rb,USE_OF_WEAK_CRYPTO,1,3\n\
         recipe.rb,not a real smell,1,9\n\
         recipe.rb,Suspicious comment,plenty,2\n",
    )
    .unwrap();
    let (entries, warnings) = read_oracle_file(&path).unwrap();
    assert_eq!(entries.len(), 3);
    assert_eq!(entries[0].smell, SmellId::HardCodedSecret);
    assert_eq!(entries[0].line, None);
    assert_eq!(entries[1].smell, SmellId::UnrestrictedIpAddress);
    assert_eq!(entries[1].line, Some(14));
    assert_eq!(entries[2].smell, SmellId::WeakCrypto);
    assert_eq!(warnings.len(), 2, "{warnings:?}");
    assert!(warnings[0].contains("unknown smell name"));
    assert!(warnings[1].contains("bad count"));
}

#[test]
fn three_column_oracles_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("oracle.csv");
    fs::write(&path, "script,smell,count\na.yml,Empty password,1\n").unwrap();
    let (entries, warnings) = read_oracle_file(&path).unwrap();
    assert_eq!(entries.len(), 1);
    assert!(warnings.is_empty());
}

#[test]
fn wrong_headers_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("oracle.csv");
    fs::write(&path, "file,issue,n\na.yml,Empty password,1\n").unwrap();
    assert!(read_oracle_file(&path).is_err());
}

#[test]
fn scanned_tree_evaluates_perfectly_against_its_own_oracle() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("site.yml"),
        concat!(
            "---\n",
            "- hosts: all\n",
            "  vars:\n",
            "    admin_user: root\n",
            "    listen: 0.0.0.0\n",
        ),
    )
    .unwrap();
    fs::write(dir.path().join("clean.yml"), "greeting: hello\n").unwrap();
    let scan = scan_tree(dir.path(), ScanOptions::default()).unwrap();
    let detected: Vec<_> =
        scan.records.iter().flat_map(|r| r.occurrences.iter().cloned()).collect();

    let oracle_path = dir.path().join("oracle.csv");
    fs::write(
        &oracle_path,
        "script,smell,count,line\n\
         site.yml,Hard-coded secret,1,4\n\
         site.yml,Unrestricted IP address,1,5\n",
    )
    .unwrap();
    let (oracle, warnings) = read_oracle_file(&oracle_path).unwrap();
    assert!(warnings.is_empty());

    let universe: Vec<PathBuf> = scan.records.iter().map(|r| r.path.clone()).collect();
    for granularity in [Granularity::Script, Granularity::Line] {
        let result = evaluate(&universe, &detected, &oracle, granularity);
        assert_eq!(result.aggregate.precision, Some(1.0), "{granularity}");
        assert_eq!(result.aggregate.recall, Some(1.0), "{granularity}");
        assert_eq!(result.no_smell.true_positives, 1, "clean.yml is clean both ways");
        assert!(result.skipped.is_empty(), "{:?}", result.skipped);
    }

    let result = evaluate(&universe, &detected, &oracle, Granularity::Script);
    let mut out = Vec::new();
    write_eval_report(&result, ReportFormat::Csv, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.contains("Hard-coded secret,1,1,0,0,1.0000,1.0000"), "{text}");
    assert!(text.contains("No smell,1,1,0,0,1.0000,1.0000"), "{text}");
}
