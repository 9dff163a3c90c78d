//! Analysis reports and their renderings.
//!
//! A report holds one row per class (μ, σ, γ, pattern, optional accuracy),
//! per-pattern aggregates, whole-dataset averages, and a fixed-bin histogram
//! of each class's normalised k* values. It renders to:
//!
//! | format   | files                                         |
//! |----------|-----------------------------------------------|
//! | json     | `<stem>.report.json`                          |
//! | csv      | `<stem>.classes.csv`, `<stem>.summary.csv`    |
//! | markdown | `<stem>.md`                                   |
//! | svg      | `<stem>.<class>.hist.svg`, one per class      |
//!
//! Every file is written to a temporary sibling and renamed into place.

mod json;
mod markdown;
pub mod svg;
mod tables;

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::EmbeddingSet;
use crate::error::{Error, Result};
use crate::kstar::{aggregate_by_pattern, ClassStats, KStarResult, Pattern, PatternSummary};

pub use json::{from_json, to_canonical_json};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_BINS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema: u32,
    pub source: Source,
    pub per_class: Vec<ClassRow>,
    pub summary: Summary,
    pub histograms: Vec<Histogram>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Source {
    pub input: String,
    pub metric: String,
    pub timestamp: String,
    pub n_samples: usize,
    pub dim: usize,
    pub n_classes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRow {
    pub class_id: usize,
    pub class_name: String,
    pub n_samples: usize,
    pub mu: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub pattern: Pattern,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// Only patterns with at least one class.
    pub patterns: Vec<PatternSummary>,
    pub overall: Overall,
}

/// Unweighted averages over all classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Overall {
    pub mean_mu: f64,
    pub mean_sigma: f64,
    pub mean_gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_accuracy: Option<f64>,
    pub n_classes: usize,
}

/// Counts of normalised k* over equal-width bins of `(0, 1]`; bin `i` covers
/// `(i / bins, (i + 1) / bins]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub class_name: String,
    pub bins: usize,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Bins `rank / size` exactly, without floating-point edge effects.
    pub fn from_ranks(class_name: &str, ranks: &[usize], bins: usize) -> Self {
        assert!(bins > 0, "histogram needs at least one bin");
        let size = ranks.len();
        let mut counts = vec![0; bins];
        for &k in ranks {
            // ceil(k * bins / size) - 1
            let bin = (k * bins).div_ceil(size).saturating_sub(1).min(bins - 1);
            counts[bin] += 1;
        }
        Self {
            class_name: class_name.to_string(),
            bins,
            counts,
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub input: String,
    pub timestamp: String,
    pub bins: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            input: String::new(),
            timestamp: String::new(),
            bins: DEFAULT_BINS,
        }
    }
}

pub fn build_report(
    set: &EmbeddingSet,
    result: &KStarResult,
    stats: &[ClassStats],
    opts: &ReportOptions,
) -> AnalysisReport {
    let per_class: Vec<ClassRow> = stats
        .iter()
        .map(|s| ClassRow {
            class_id: s.class_id,
            class_name: set.class_name(s.class_id).to_string(),
            n_samples: s.n_samples,
            mu: s.mu,
            sigma: s.sigma,
            gamma: s.gamma,
            pattern: s.pattern,
            accuracy: s.accuracy,
        })
        .collect();

    let n = stats.len() as f64;
    let overall = Overall {
        mean_mu: stats.iter().map(|s| s.mu).sum::<f64>() / n,
        mean_sigma: stats.iter().map(|s| s.sigma).sum::<f64>() / n,
        mean_gamma: stats.iter().map(|s| s.gamma).sum::<f64>() / n,
        mean_accuracy: stats
            .iter()
            .map(|s| s.accuracy)
            .sum::<Option<f64>>()
            .map(|t| t / n),
        n_classes: stats.len(),
    };

    let histograms = stats
        .iter()
        .map(|s| {
            Histogram::from_ranks(
                set.class_name(s.class_id),
                &result.class_ranks[s.class_id],
                opts.bins,
            )
        })
        .collect();

    AnalysisReport {
        schema: SCHEMA_VERSION,
        source: Source {
            input: opts.input.clone(),
            metric: result.metric.name(),
            timestamp: opts.timestamp.clone(),
            n_samples: set.len(),
            dim: set.dim(),
            n_classes: set.num_classes(),
        },
        per_class,
        summary: Summary {
            patterns: aggregate_by_pattern(stats),
            overall,
        },
        histograms,
    }
}

impl AnalysisReport {
    pub fn class_names(&self) -> Vec<&str> {
        self.per_class
            .iter()
            .map(|r| r.class_name.as_str())
            .collect()
    }

    pub fn has_accuracy(&self) -> bool {
        self.per_class.iter().any(|r| r.accuracy.is_some())
    }

    pub fn pattern_count(&self, pattern: Pattern) -> usize {
        self.per_class
            .iter()
            .filter(|r| r.pattern == pattern)
            .count()
    }

    pub fn to_json(&self) -> String {
        to_canonical_json(self)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        from_json(text, "<report>")
    }

    pub fn to_markdown(&self) -> String {
        markdown::report(self)
    }

    pub fn classes_csv(&self) -> String {
        tables::classes_csv(self)
    }

    pub fn summary_csv(&self) -> String {
        tables::summary_csv(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Json,
    Csv,
    Markdown,
    Svg,
}

impl RenderFormat {
    pub const ALL: [RenderFormat; 4] = [
        RenderFormat::Json,
        RenderFormat::Csv,
        RenderFormat::Markdown,
        RenderFormat::Svg,
    ];
}

impl FromStr for RenderFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "json" => Ok(RenderFormat::Json),
            "csv" => Ok(RenderFormat::Csv),
            "md" | "markdown" => Ok(RenderFormat::Markdown),
            "svg" => Ok(RenderFormat::Svg),
            other => Err(format!("unknown report format {other:?}")),
        }
    }
}

impl fmt::Display for RenderFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RenderFormat::Json => "json",
            RenderFormat::Csv => "csv",
            RenderFormat::Markdown => "markdown",
            RenderFormat::Svg => "svg",
        })
    }
}

/// `<stem>.<suffix>` next to `stem`.
pub fn stem_path(stem: &Path, suffix: &str) -> PathBuf {
    let mut name = stem
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".");
    name.push(suffix);
    stem.with_file_name(name)
}

/// Filesystem-safe, collision-free name fragments for each class.
pub fn class_file_names<S: AsRef<str>>(names: &[S]) -> Vec<String> {
    let mut used = BTreeSet::new();
    names
        .iter()
        .enumerate()
        .map(|(id, name)| {
            let mut safe: String = name
                .as_ref()
                .chars()
                .map(|c| {
                    if c.is_ascii_alphanumeric() || matches!(c, '-' | '_') {
                        c
                    } else {
                        '_'
                    }
                })
                .collect();
            if safe.is_empty() {
                safe.push('_');
            }
            if !used.insert(safe.clone()) {
                safe = format!("{safe}-{id}");
                used.insert(safe.clone());
            }
            safe
        })
        .collect()
}

/// Writes `contents` to `path` via a temporary file in the same directory and
/// an atomic rename, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents)
        .and_then(|_| tmp.flush())
        .map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Renders `report` in `format` next to `stem`, returning the files written.
pub fn render(report: &AnalysisReport, format: RenderFormat, stem: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut emit = |suffix: &str, body: String| -> Result<()> {
        let path = stem_path(stem, suffix);
        write_atomic(&path, body.as_bytes())?;
        written.push(path);
        Ok(())
    };
    match format {
        RenderFormat::Json => emit("report.json", report.to_json())?,
        RenderFormat::Csv => {
            emit("classes.csv", report.classes_csv())?;
            emit("summary.csv", report.summary_csv())?;
        }
        RenderFormat::Markdown => emit("md", report.to_markdown())?,
        RenderFormat::Svg => {
            let names = class_file_names(&report.class_names());
            for ((row, hist), file) in report.per_class.iter().zip(&report.histograms).zip(names) {
                emit(&format!("{file}.hist.svg"), svg::histogram(row, hist))?;
            }
        }
    }
    Ok(written)
}

/// The same class's statistics under each compared source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonEntry {
    pub mu: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub pattern: Pattern,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassComparison {
    pub class_name: String,
    /// One entry per source, in source order.
    pub entries: Vec<ComparisonEntry>,
    pub pattern_changed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub schema: u32,
    pub sources: Vec<String>,
    pub metrics: Vec<String>,
    pub classes: Vec<ClassComparison>,
    /// Per source, the per-pattern aggregates.
    pub summaries: Vec<Vec<PatternSummary>>,
    pub n_changed: usize,
}

impl Comparison {
    pub fn to_json(&self) -> String {
        to_canonical_json(self)
    }

    pub fn to_markdown(&self) -> String {
        markdown::comparison(self)
    }
}

/// Lines up the classes of several reports by name.
///
/// Classes are listed in the first report's order. A class is flagged when
/// its pattern is not the same in every report.
pub fn compare(reports: &[AnalysisReport]) -> Result<Comparison> {
    if reports.len() < 2 {
        return Err(Error::Validation(format!(
            "comparison needs at least 2 reports, got {}",
            reports.len()
        )));
    }
    let reference: BTreeSet<&str> = reports[0].class_names().into_iter().collect();
    for (i, r) in reports.iter().enumerate().skip(1) {
        let names: BTreeSet<&str> = r.class_names().into_iter().collect();
        if names != reference {
            let missing: Vec<_> = reference.symmetric_difference(&names).collect();
            return Err(Error::VocabularyMismatch(format!(
                "report {i} ({}) differs from report 0 ({}) in classes {missing:?}",
                r.source.input, reports[0].source.input
            )));
        }
    }

    let classes: Vec<ClassComparison> = reports[0]
        .per_class
        .iter()
        .map(|row| {
            let entries: Vec<ComparisonEntry> = reports
                .iter()
                .map(|r| {
                    let other = r
                        .per_class
                        .iter()
                        .find(|o| o.class_name == row.class_name)
                        .expect("vocabularies checked equal");
                    ComparisonEntry {
                        mu: other.mu,
                        sigma: other.sigma,
                        gamma: other.gamma,
                        pattern: other.pattern,
                    }
                })
                .collect();
            let pattern_changed = entries.iter().any(|e| e.pattern != entries[0].pattern);
            ClassComparison {
                class_name: row.class_name.clone(),
                entries,
                pattern_changed,
            }
        })
        .collect();

    Ok(Comparison {
        schema: SCHEMA_VERSION,
        sources: reports.iter().map(|r| r.source.input.clone()).collect(),
        metrics: reports.iter().map(|r| r.source.metric.clone()).collect(),
        n_changed: classes.iter().filter(|c| c.pattern_changed).count(),
        classes,
        summaries: reports.iter().map(|r| r.summary.patterns.clone()).collect(),
    })
}
