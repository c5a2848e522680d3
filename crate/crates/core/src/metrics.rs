//! Corpus-level metrics: smell density and smell proportion.
//!
//! Density is occurrences per thousand lines of code; proportion is the
//! percentage of scripts containing at least one occurrence. Both are
//! defined per smell and for all smells combined, where "combined" counts a
//! script once no matter how many distinct smells it carries.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::model::SmellId;
use crate::scan::ScanResult;

/// Errors for metrics over empty corpora, where the ratios are undefined.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("cannot compute density over zero lines of code")]
    ZeroLoc,
    #[error("cannot compute proportion over zero scripts")]
    ZeroScripts,
}

/// Occurrences per thousand lines of code.
pub fn smell_density(occurrences: usize, total_loc: usize) -> Result<f64, MetricsError> {
    if total_loc == 0 {
        return Err(MetricsError::ZeroLoc);
    }
    Ok(occurrences as f64 / (total_loc as f64 / 1000.0))
}

/// Percentage of scripts that contain at least one occurrence.
pub fn script_proportion(scripts_with_smell: usize, script_count: usize) -> Result<f64, MetricsError> {
    if script_count == 0 {
        return Err(MetricsError::ZeroScripts);
    }
    Ok(100.0 * scripts_with_smell as f64 / script_count as f64)
}

/// Per-smell and combined metrics over one scanned corpus.
///
/// Every smell in the catalog has an entry, zero or not, so downstream
/// tables have a stable shape.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusMetrics {
    pub script_count: usize,
    pub total_loc: usize,
    pub total_occurrences: usize,
    pub occurrence_counts: BTreeMap<SmellId, usize>,
    pub scripts_with_smell: BTreeMap<SmellId, usize>,
    /// Scripts containing at least one occurrence of any smell.
    pub scripts_with_any: usize,
    /// Occurrences per thousand lines, per smell.
    pub densities: BTreeMap<SmellId, f64>,
    /// Percentage of scripts affected, per smell.
    pub proportions: BTreeMap<SmellId, f64>,
    /// Percentage of scripts affected by any smell.
    pub combined_proportion: f64,
    /// Occurrences of any smell per thousand lines.
    pub combined_density: f64,
}

/// Compute the full metrics table for a scan.
pub fn compute_metrics(result: &ScanResult) -> Result<CorpusMetrics, MetricsError> {
    let script_count = result.records.len();
    let total_loc = result.total_loc();
    if script_count == 0 {
        return Err(MetricsError::ZeroScripts);
    }
    if total_loc == 0 {
        return Err(MetricsError::ZeroLoc);
    }

    let mut occurrence_counts: BTreeMap<SmellId, usize> =
        SmellId::ALL.iter().map(|s| (*s, 0)).collect();
    let mut affected: BTreeMap<SmellId, usize> = SmellId::ALL.iter().map(|s| (*s, 0)).collect();
    let mut scripts_with_any = 0usize;
    for record in &result.records {
        let mut present: BTreeSet<SmellId> = BTreeSet::new();
        for occ in &record.occurrences {
            *occurrence_counts.get_mut(&occ.smell).expect("catalog smell") += 1;
            present.insert(occ.smell);
        }
        for smell in &present {
            *affected.get_mut(smell).expect("catalog smell") += 1;
        }
        if !present.is_empty() {
            scripts_with_any += 1;
        }
    }

    let total_occurrences: usize = occurrence_counts.values().sum();
    let mut densities = BTreeMap::new();
    let mut proportions = BTreeMap::new();
    for smell in SmellId::ALL {
        densities.insert(smell, smell_density(occurrence_counts[&smell], total_loc)?);
        proportions.insert(smell, script_proportion(affected[&smell], script_count)?);
    }
    Ok(CorpusMetrics {
        script_count,
        total_loc,
        total_occurrences,
        occurrence_counts,
        scripts_with_smell: affected,
        scripts_with_any,
        densities,
        proportions,
        combined_proportion: script_proportion(scripts_with_any, script_count)?,
        combined_density: smell_density(total_occurrences, total_loc)?,
    })
}
