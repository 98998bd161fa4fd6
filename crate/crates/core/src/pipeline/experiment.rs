//! Experiment report: success rates for every configuration × classifier.

use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use super::stages::MetricFlags;
use crate::classify::{ClassifierKind, EvaluationReport};
use crate::featurespace::RowLabel;

/// Attribute sets compared in the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Configuration {
    Whole,
    Variance,
    Score,
    Mu1,
    Dynamic,
    Pca,
    Isomap,
}

impl Configuration {
    pub const ALL: [Configuration; 7] = [
        Configuration::Whole,
        Configuration::Variance,
        Configuration::Score,
        Configuration::Mu1,
        Configuration::Dynamic,
        Configuration::Pca,
        Configuration::Isomap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Configuration::Whole => "whole set",
            Configuration::Variance => "variance threshold",
            Configuration::Score => "score-based",
            Configuration::Mu1 => "mu1 only",
            Configuration::Dynamic => "mu2-mu4 only",
            Configuration::Pca => "PCA",
            Configuration::Isomap => "Isomap",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigurationResult {
    pub configuration: Configuration,
    pub classifier: ClassifierKind,
    pub n_attributes: usize,
    pub detail: String,
    pub report: EvaluationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCell {
    pub configuration: Configuration,
    pub classifier: ClassifierKind,
    pub n_attributes: usize,
    pub detail: String,
    pub success_rate: f64,
    pub micro_precision: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionComparison {
    pub classifier: ClassifierKind,
    pub whole: Option<f64>,
    pub variance: Option<f64>,
    pub score: Option<f64>,
    pub pca: Option<f64>,
    pub isomap: Option<f64>,
    pub score_at_least_whole: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: String,
    pub authors: usize,
    pub books: usize,
    pub chance: f64,
    pub cells: Vec<ReportCell>,
    pub best: Option<ReportCell>,
    pub comparison: Vec<SelectionComparison>,
    pub stationarity: Vec<MetricFlags>,
}

impl ExperimentReport {
    pub fn cell(&self, configuration: Configuration, classifier: ClassifierKind) -> Option<&ReportCell> {
        self.cells
            .iter()
            .find(|c| c.configuration == configuration && c.classifier == classifier)
    }
}

pub(crate) fn build_report(
    cfg: &PipelineConfig,
    results: &[ConfigurationResult],
    stationarity: &[MetricFlags],
    rows: &[RowLabel],
) -> ExperimentReport {
    let mut cells: Vec<ReportCell> = results
        .iter()
        .map(|r| ReportCell {
            configuration: r.configuration,
            classifier: r.classifier,
            n_attributes: r.n_attributes,
            detail: r.detail.clone(),
            success_rate: r.report.scores.micro_recall,
            micro_precision: r.report.scores.micro_precision,
            macro_precision: r.report.scores.macro_precision,
            macro_recall: r.report.scores.macro_recall,
        })
        .collect();
    cells.sort_by_key(|c| (c.configuration, c.classifier));
    let best = cells
        .iter()
        .fold(None::<&ReportCell>, |best, c| match best {
            Some(b) if b.success_rate >= c.success_rate => Some(b),
            _ => Some(c),
        })
        .cloned();
    let rate = |conf, kind| {
        cells
            .iter()
            .find(|c| c.configuration == conf && c.classifier == kind)
            .map(|c| c.success_rate)
    };
    let comparison = cfg
        .classifiers
        .iter()
        .map(|&k| {
            let whole = rate(Configuration::Whole, k);
            let score = rate(Configuration::Score, k);
            SelectionComparison {
                classifier: k,
                whole,
                variance: rate(Configuration::Variance, k),
                score,
                pca: rate(Configuration::Pca, k),
                isomap: rate(Configuration::Isomap, k),
                score_at_least_whole: matches!((score, whole), (Some(s), Some(w)) if s >= w),
            }
        })
        .collect();
    let authors: std::collections::BTreeSet<&str> = rows.iter().map(|r| r.author.as_str()).collect();
    ExperimentReport {
        config: cfg.canonical(),
        authors: authors.len(),
        books: rows.len(),
        chance: if authors.is_empty() { 0.0 } else { 1.0 / authors.len() as f64 },
        cells,
        best,
        comparison,
        stationarity: stationarity.to_vec(),
    }
}

/// Plain-text table: one row per configuration, one column per classifier.
pub fn render_table(r: &ExperimentReport) -> String {
    let mut kinds: Vec<ClassifierKind> = r.cells.iter().map(|c| c.classifier).collect();
    kinds.sort();
    kinds.dedup();
    let mut s = format!(
        "{} books, {} authors, chance = {:.3}\n\nsuccess rate (micro precision)\n",
        r.books, r.authors, r.chance
    );
    s.push_str(&format!("{:<20}", "configuration"));
    for k in &kinds {
        s.push_str(&format!("{:>16}", k.name()));
    }
    s.push('\n');
    for conf in Configuration::ALL {
        s.push_str(&format!("{:<20}", conf.name()));
        for &k in &kinds {
            let cell = match r.cell(conf, k) {
                Some(c) => format!("{:.3} ({:.3})", c.success_rate, c.micro_precision),
                None => "-".to_string(),
            };
            s.push_str(&format!("{cell:>16}"));
        }
        s.push('\n');
    }
    if let Some(b) = &r.best {
        s.push_str(&format!(
            "\nbest: {} / {} = {:.3} ({})\n",
            b.configuration.name(),
            b.classifier.name(),
            b.success_rate,
            b.detail
        ));
    }
    s.push_str("\nstationarity flags (books flagged / books)\n");
    for m in &r.stationarity {
        s.push_str(&format!("  {:<3} {}/{}\n", m.metric.symbol(), m.flagged_books, m.books));
    }
    s
}
