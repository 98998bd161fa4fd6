//! Stage producers. Each reads its upstream artifacts from disk and writes
//! its own under `<out>/<stage>/`.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use super::experiment::{ConfigurationResult, Configuration};
use crate::classify::{cross_validate, ClassifierKind, ClassifierSpec, Normalization};
use crate::corpus::{
    ingest_pretagged, load_document, read_manifest, LemmaDictionary, LexiconTagger, Preprocessor, StopwordList,
    TokenStream,
};
use crate::error::{Error, Result};
use crate::featurespace::{
    assemble, greedy_backward_select, minmax_normalize, moment_slice, variance_sweep, variance_threshold,
    BookMoments, FeatureMatrix, MomentSlice, RowLabel, SelectionTrace,
};
use crate::graphmetrics::{compute_all, read_metrics_csv, write_metrics_csv, NetworkMetrics};
use crate::manifold::{export_2d, isomap_embed, parameter_sweep, pca_fit_transform, SweepCell, SweepGrid};
use crate::netbuild::{build_network, choose_window, partition_lemmas, Partition};
use crate::serieslab::{
    autocorrelation, build_series, series_moments, stationarity_battery, BatteryRow, MetricKind, MomentVector,
};

/// Files written by a stage (relative to the output root) and its warnings.
pub(crate) struct StageOutput {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

/// `author,doc,file,count` rows listing the books a stage produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BookIndexRow {
    pub author: String,
    pub doc: String,
    pub file: String,
    pub count: usize,
}

fn write_index(path: &Path, rows: &[BookIndexRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_index(path: &Path) -> Result<Vec<BookIndexRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn book_file(i: usize, ext: &str) -> String {
    format!("book_{i:03}.{ext}")
}

struct Ctx<'a> {
    out: &'a Path,
    files: Vec<PathBuf>,
    warnings: Vec<String>,
}

impl<'a> Ctx<'a> {
    fn new(out: &'a Path) -> Self {
        Ctx {
            out,
            files: Vec::new(),
            warnings: Vec::new(),
        }
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.out.join(rel)
    }

    fn wrote(&mut self, rel: &str) {
        self.files.push(PathBuf::from(rel));
    }

    fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }

    fn finish(self) -> StageOutput {
        StageOutput {
            files: self.files,
            warnings: self.warnings,
        }
    }
}

pub(crate) fn preprocess(cfg: &PipelineConfig, out: &Path) -> Result<StageOutput> {
    let mut ctx = Ctx::new(out);
    let entries = read_manifest(&cfg.manifest)?;
    let stopwords = match &cfg.stopwords {
        Some(p) => StopwordList::from_path(p)?,
        None => StopwordList::bundled(),
    };
    let lemmas = match &cfg.lemma_dict {
        Some(p) => LemmaDictionary::from_path(p)?,
        None => LemmaDictionary::bundled(),
    };
    let pre = Preprocessor::new(Box::new(LexiconTagger::bundled()), lemmas, stopwords);
    let results: Vec<Result<TokenStream>> = entries
        .par_iter()
        .map(|e| {
            if e.path.extension().is_some_and(|x| x == "tsv") {
                ingest_pretagged(&e.path, pre.stopwords(), &e.author, &e.doc)
            } else {
                load_document(e).map(|d| pre.preprocess(&d))
            }
        })
        .collect();
    let mut index = Vec::new();
    for (i, (e, r)) in entries.iter().zip(results).enumerate() {
        match r {
            Ok(stream) => {
                let rel = format!("preprocess/{}", book_file(i, "tsv"));
                stream.write_tsv(&ctx.path(&rel))?;
                ctx.wrote(&rel);
                index.push(BookIndexRow {
                    author: e.author.clone(),
                    doc: e.doc.clone(),
                    file: book_file(i, "tsv"),
                    count: stream.len(),
                });
            }
            Err(err) => ctx.warn(format!("skipping book {}/{}: {err}", e.author, e.doc)),
        }
    }
    if index.is_empty() {
        return Err(Error::InvalidArgument("no readable book in the corpus".into()));
    }
    write_index(&ctx.path("preprocess/index.csv"), &index)?;
    ctx.wrote("preprocess/index.csv");
    Ok(ctx.finish())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct WindowChoice {
    window: usize,
    automatic: bool,
}

pub(crate) fn partition(cfg: &PipelineConfig, out: &Path) -> Result<StageOutput> {
    let mut ctx = Ctx::new(out);
    let books = read_index(&ctx.path("preprocess/index.csv"))?;
    let streams: Vec<Vec<String>> = books
        .iter()
        .map(|b| {
            let s = TokenStream::read_tsv(&out.join("preprocess").join(&b.file), &b.author, &b.doc)?;
            Ok(s.lemmas().map(str::to_string).collect())
        })
        .collect::<Result<_>>()?;
    let window = if cfg.auto_window {
        choose_window(&streams, &cfg.window_grid, cfg.min_nodes, None)?
    } else {
        cfg.window
    };
    let mut index = Vec::new();
    for (i, (b, lemmas)) in books.iter().zip(&streams).enumerate() {
        match partition_lemmas(&b.doc, lemmas, window) {
            Ok(parts) => {
                let rel = format!("partition/{}", book_file(i, "txt"));
                let text: String = parts.iter().map(|p| p.lemmas.join(" ") + "\n").collect();
                fs::write(ctx.path(&rel), text).map_err(|e| Error::io(ctx.path(&rel), e))?;
                ctx.wrote(&rel);
                index.push(BookIndexRow {
                    author: b.author.clone(),
                    doc: b.doc.clone(),
                    file: book_file(i, "txt"),
                    count: parts.len(),
                });
            }
            Err(err) => ctx.warn(format!("skipping book {}/{}: {err}", b.author, b.doc)),
        }
    }
    if index.is_empty() {
        return Err(Error::EmptySeries("every book is shorter than one window".into()));
    }
    write_index(&ctx.path("partition/index.csv"), &index)?;
    write_json(
        &ctx.path("partition/window.json"),
        &WindowChoice {
            window,
            automatic: cfg.auto_window,
        },
    )?;
    ctx.wrote("partition/index.csv");
    ctx.wrote("partition/window.json");
    Ok(ctx.finish())
}

pub fn read_partitions(path: &Path, book: &str) -> Result<Vec<Partition>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .enumerate()
        .map(|(index, line)| Partition {
            book: book.to_string(),
            index,
            lemmas: line.split(' ').map(str::to_string).collect(),
        })
        .collect())
}

pub(crate) fn metrics(cfg: &PipelineConfig, out: &Path) -> Result<StageOutput> {
    let mut ctx = Ctx::new(out);
    let books = read_index(&ctx.path("partition/index.csv"))?;
    let mut index = Vec::new();
    for (i, b) in books.iter().enumerate() {
        let parts = read_partitions(&out.join("partition").join(&b.file), &b.doc)?;
        let rows: Vec<NetworkMetrics> = parts
            .par_iter()
            .map(|p| compute_all(&build_network(p), p, cfg.clique_cap))
            .collect::<Result<_>>()?;
        let rel = format!("metrics/{}", book_file(i, "csv"));
        write_metrics_csv(&ctx.path(&rel), &rows)?;
        ctx.wrote(&rel);
        index.push(BookIndexRow {
            file: book_file(i, "csv"),
            count: rows.len(),
            ..b.clone()
        });
    }
    write_index(&ctx.path("metrics/index.csv"), &index)?;
    ctx.wrote("metrics/index.csv");
    Ok(ctx.finish())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub metric: MetricKind,
    pub values: Vec<f64>,
    pub moments: [f64; 4],
    /// Autocorrelation up to lag 20; absent for constant series.
    pub acf: Option<Vec<f64>>,
    pub acf_band: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesFile {
    pub author: String,
    pub book: String,
    pub series: Vec<SeriesEntry>,
}

pub(crate) fn series(_cfg: &PipelineConfig, out: &Path) -> Result<StageOutput> {
    let mut ctx = Ctx::new(out);
    let books = read_index(&ctx.path("metrics/index.csv"))?;
    let mut index = Vec::new();
    for (i, b) in books.iter().enumerate() {
        let rows = read_metrics_csv(&out.join("metrics").join(&b.file))?;
        let all = match build_series(&b.doc, &rows) {
            Ok(s) => s,
            Err(err) => {
                ctx.warn(format!("skipping book {}/{}: {err}", b.author, b.doc));
                continue;
            }
        };
        let mut entries = Vec::new();
        for s in &all {
            let lags = 20.min(s.values.len() - 1);
            let acf = autocorrelation(&s.values, lags).ok();
            entries.push(SeriesEntry {
                metric: s.metric,
                values: s.values.clone(),
                moments: series_moments(s)?.mu,
                acf_band: 1.96 / (s.values.len() as f64).sqrt(),
                acf: acf.map(|a| a.values),
            });
        }
        let rel = format!("series/{}", book_file(i, "json"));
        write_json(
            &ctx.path(&rel),
            &SeriesFile {
                author: b.author.clone(),
                book: b.doc.clone(),
                series: entries,
            },
        )?;
        ctx.wrote(&rel);
        index.push(BookIndexRow {
            file: book_file(i, "json"),
            count: rows.len(),
            ..b.clone()
        });
    }
    if index.is_empty() {
        return Err(Error::EmptySeries("no book has at least two partitions".into()));
    }
    write_index(&ctx.path("series/index.csv"), &index)?;
    ctx.wrote("series/index.csv");
    Ok(ctx.finish())
}

fn read_all_series(out: &Path) -> Result<Vec<SeriesFile>> {
    read_index(&out.join("series/index.csv"))?
        .iter()
        .map(|b| read_json(&out.join("series").join(&b.file)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BookBattery {
    pub author: String,
    pub book: String,
    pub rows: Vec<BatteryRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricFlags {
    pub metric: MetricKind,
    pub flagged_books: usize,
    pub books: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityFile {
    pub alpha: f64,
    pub summary: Vec<MetricFlags>,
    pub books: Vec<BookBattery>,
}

pub(crate) fn stationarity(cfg: &PipelineConfig, out: &Path) -> Result<StageOutput> {
    let mut ctx = Ctx::new(out);
    let files = read_all_series(out)?;
    let books: Vec<BookBattery> = files
        .par_iter()
        .map(|f| {
            let series: Vec<crate::serieslab::MetricSeries> = f
                .series
                .iter()
                .map(|s| crate::serieslab::MetricSeries {
                    book: f.book.clone(),
                    metric: s.metric,
                    values: s.values.clone(),
                })
                .collect();
            BookBattery {
                author: f.author.clone(),
                book: f.book.clone(),
                rows: stationarity_battery(&series, cfg.alpha),
            }
        })
        .collect();
    let summary: Vec<MetricFlags> = MetricKind::ALL
        .iter()
        .map(|&m| MetricFlags {
            metric: m,
            flagged_books: books
                .iter()
                .filter(|b| b.rows.iter().any(|r| r.metric == m && r.flagged))
                .count(),
            books: books.len(),
        })
        .collect();
    for s in summary.iter().filter(|s| 2 * s.flagged_books > s.books) {
        ctx.warn(format!(
            "metric {} looks nonstationary in {} of {} books",
            s.metric.symbol(),
            s.flagged_books,
            s.books
        ));
    }
    write_json(
        &ctx.path("stationarity/battery.json"),
        &StationarityFile {
            alpha: cfg.alpha,
            summary,
            books,
        },
    )?;
    ctx.wrote("stationarity/battery.json");
    Ok(ctx.finish())
}

pub(crate) fn features(_cfg: &PipelineConfig, out: &Path) -> Result<StageOutput> {
    let mut ctx = Ctx::new(out);
    let books: Vec<BookMoments> = read_all_series(out)?
        .into_iter()
        .map(|f| BookMoments {
            author: f.author,
            book: f.book,
            moments: f
                .series
                .iter()
                .map(|s| MomentVector {
                    metric: s.metric,
                    mu: s.moments,
                })
                .collect(),
        })
        .collect();
    let raw = assemble(&books)?;
    let norm = minmax_normalize(&raw);
    if !norm.constant_columns.is_empty() {
        let names: Vec<&str> = norm.constant_columns.iter().map(|&j| norm.columns[j].as_str()).collect();
        ctx.warn(format!("constant feature columns mapped to 0: {}", names.join(", ")));
    }
    raw.write_csv(&ctx.path("features/raw.csv"))?;
    norm.write_csv(&ctx.path("features/normalized.csv"))?;
    ctx.wrote("features/raw.csv");
    ctx.wrote("features/normalized.csv");
    Ok(ctx.finish())
}

/// Matrix used for classification: normalized over all rows, or raw when
/// each training fold refits the scaling.
pub fn load_matrix(out: &Path, normalization: Normalization) -> Result<FeatureMatrix> {
    match normalization {
        Normalization::Full => FeatureMatrix::read_csv(&out.join("features/normalized.csv")),
        Normalization::Train => FeatureMatrix::read_csv(&out.join("features/raw.csv")),
    }
}

/// Success rate (micro recall) of `kind` under the run's cross-validation.
pub(crate) fn cv_score(
    cfg: &PipelineConfig,
    kind: ClassifierKind,
    rows: &[Vec<f64>],
    labels: &[String],
    normalization: Normalization,
) -> Result<f64> {
    let spec = ClassifierSpec::new(kind, cfg.seed);
    Ok(cross_validate(&spec, rows, labels, cfg.folds, cfg.seed, normalization)?
        .scores
        .micro_recall)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChosenSubset {
    pub indices: Vec<usize>,
    pub score: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceEntry {
    pub theta: f64,
    pub n_attributes: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSelection {
    pub classifier: ClassifierKind,
    pub variance: Vec<VarianceEntry>,
    pub variance_best: ChosenSubset,
    pub greedy: SelectionTrace,
    pub score_best: ChosenSubset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionFile {
    pub classifiers: Vec<ClassifierSelection>,
}

pub(crate) fn select(cfg: &PipelineConfig, out: &Path) -> Result<StageOutput> {
    let mut ctx = Ctx::new(out);
    let matrix = load_matrix(out, cfg.normalization)?;
    // Thresholds always refer to variances of the normalized columns.
    let normalized = FeatureMatrix::read_csv(&out.join("features/normalized.csv"))?;
    let labels = matrix.authors();
    let subsets = if cfg.theta_grid.is_empty() {
        variance_sweep(&normalized)
    } else {
        cfg.theta_grid.iter().map(|&t| variance_threshold(&normalized, t)).collect()
    };
    let all: Vec<usize> = (0..matrix.n_cols()).collect();
    // Fail early on corpus-level problems such as a one-book author.
    cv_score(cfg, ClassifierKind::ZeroR, &matrix.select(&all), &labels, cfg.normalization)?;
    let mut out_sel = Vec::new();
    for &kind in &cfg.classifiers {
        let scorer = |subset: &[usize]| {
            cv_score(cfg, kind, &matrix.select(subset), &labels, cfg.normalization).unwrap_or(f64::NEG_INFINITY)
        };
        let variance: Vec<VarianceEntry> = subsets
            .iter()
            .map(|s| VarianceEntry {
                theta: match s.provenance {
                    crate::featurespace::Provenance::Variance { theta } => theta,
                    _ => f64::NAN,
                },
                n_attributes: s.len(),
                score: scorer(&s.indices),
            })
            .collect();
        let (vi, vbest) = variance
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| b.score.total_cmp(&a.score).then(a.n_attributes.cmp(&b.n_attributes)))
            .expect("at least one threshold");
        let variance_best = ChosenSubset {
            indices: subsets[vi].indices.clone(),
            score: vbest.score,
            detail: format!("theta={:.6}", vbest.theta),
        };
        let greedy = greedy_backward_select(&all, scorer, cfg.beam_cap);
        let (score, best) = greedy.best().expect("trace has a level");
        let level = match best.provenance {
            crate::featurespace::Provenance::ScoreStep { level } => level,
            _ => 0,
        };
        out_sel.push(ClassifierSelection {
            classifier: kind,
            variance,
            variance_best,
            score_best: ChosenSubset {
                indices: best.indices,
                score,
                detail: format!("level={level}"),
            },
            greedy,
        });
    }
    write_json(
        &ctx.path("select/selection.json"),
        &SelectionFile {
            classifiers: out_sel,
        },
    )?;
    ctx.wrote("select/selection.json");
    Ok(ctx.finish())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaCell {
    pub n_comps: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierExtraction {
    pub classifier: ClassifierKind,
    pub pca: Vec<PcaCell>,
    pub pca_best: Option<PcaCell>,
    pub isomap: SweepGrid,
    pub isomap_best: Option<SweepCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionFile {
    pub pca_eigenvalues: Vec<f64>,
    pub classifiers: Vec<ClassifierExtraction>,
}

fn truncate(rows: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    rows.iter().map(|r| r[..n].to_vec()).collect()
}

/// Largest usable component count and the PCA embedding at that size.
pub(crate) fn full_pca(matrix: &FeatureMatrix, cfg: &PipelineConfig) -> Result<(usize, Vec<Vec<f64>>, Vec<f64>)> {
    let max = cfg.sweep_max.min(matrix.n_rows()).min(matrix.n_cols());
    let (emb, model) = pca_fit_transform(&matrix.values, max)?;
    Ok((max, emb, model.eigenvalues))
}

pub(crate) fn extract(cfg: &PipelineConfig, out: &Path) -> Result<StageOutput> {
    let mut ctx = Ctx::new(out);
    let matrix = FeatureMatrix::read_csv(&out.join("features/normalized.csv"))?;
    let labels = matrix.authors();
    let (max_pca, pca_rows, eigenvalues) = full_pca(&matrix, cfg)?;
    let pca_range: Vec<usize> = match cfg.n_comps {
        Some(n) if n <= max_pca => vec![n],
        Some(n) => {
            ctx.warn(format!("reduction.n_comps={n} exceeds the {max_pca} available components"));
            vec![]
        }
        None => (cfg.sweep_min..=max_pca).collect(),
    };
    let (nn, nc) = match (cfg.n_neighbors, cfg.n_comps) {
        (Some(k), Some(c)) => (k..=k, c..=c),
        (Some(k), None) => (k..=k, cfg.sweep_min..=cfg.sweep_max),
        (None, Some(c)) => (cfg.sweep_min..=cfg.sweep_max, c..=c),
        (None, None) => (cfg.sweep_min..=cfg.sweep_max, cfg.sweep_min..=cfg.sweep_max),
    };
    let mut per = Vec::new();
    for &kind in &cfg.classifiers {
        let pca: Vec<PcaCell> = pca_range
            .iter()
            .map(|&n| PcaCell {
                n_comps: n,
                score: cv_score(cfg, kind, &truncate(&pca_rows, n), &labels, Normalization::Full).unwrap_or(f64::NEG_INFINITY),
            })
            .collect();
        let pca_best = pca
            .iter()
            .min_by(|a, b| b.score.total_cmp(&a.score).then(a.n_comps.cmp(&b.n_comps)))
            .cloned();
        let isomap = parameter_sweep(&matrix.values, nn.clone(), nc.clone(), cfg.bridge, |emb| {
            cv_score(cfg, kind, emb, &labels, Normalization::Full).unwrap_or(f64::NEG_INFINITY)
        });
        let isomap_best = isomap.best().cloned();
        if isomap_best.is_none() {
            ctx.warn(format!("{}: no Isomap parameter cell could be embedded", kind.name()));
        }
        per.push(ClassifierExtraction {
            classifier: kind,
            pca,
            pca_best,
            isomap,
            isomap_best,
        });
    }
    write_json(
        &ctx.path("extract/extraction.json"),
        &ExtractionFile {
            pca_eigenvalues: eigenvalues,
            classifiers: per,
        },
    )?;
    ctx.wrote("extract/extraction.json");
    if matrix.n_rows() >= 3 && max_pca >= 2 {
        export_2d(&ctx.path("extract/pca_2d.csv"), &truncate(&pca_rows, 2), &matrix.rows)?;
        ctx.wrote("extract/pca_2d.csv");
        let k = cfg.n_neighbors.unwrap_or(5).min(matrix.n_rows() - 1);
        let iso = isomap_embed(&matrix.values, k, 2, true)?;
        export_2d(&ctx.path("extract/isomap_2d.csv"), &iso.embedding, &matrix.rows)?;
        ctx.wrote("extract/isomap_2d.csv");
    }
    Ok(ctx.finish())
}

pub(crate) fn classify(cfg: &PipelineConfig, out: &Path) -> Result<StageOutput> {
    let mut ctx = Ctx::new(out);
    let matrix = load_matrix(out, cfg.normalization)?;
    let normalized = FeatureMatrix::read_csv(&out.join("features/normalized.csv"))?;
    let labels = matrix.authors();
    let selection: SelectionFile = read_json(&out.join("select/selection.json"))?;
    let extraction: ExtractionFile = read_json(&out.join("extract/extraction.json"))?;
    let distinct: std::collections::BTreeSet<&String> = labels.iter().collect();
    if distinct.len() == 1 {
        ctx.warn("corpus has a single author: classification is degenerate".into());
    }
    let (_, pca_rows, _) = full_pca(&normalized, cfg)?;
    let mut results = Vec::new();
    for &kind in &cfg.classifiers {
        let sel = selection
            .classifiers
            .iter()
            .find(|s| s.classifier == kind)
            .ok_or_else(|| Error::Config(format!("selection has no entry for {}", kind.name())))?;
        let ext = extraction
            .classifiers
            .iter()
            .find(|s| s.classifier == kind)
            .ok_or_else(|| Error::Config(format!("extraction has no entry for {}", kind.name())))?;
        let spec = ClassifierSpec::new(kind, cfg.seed);
        let mut run = |configuration: Configuration, rows: Vec<Vec<f64>>, attributes: Vec<usize>, detail: String, norm| -> Result<()> {
            let mut report = cross_validate(&spec, &rows, &labels, cfg.folds, cfg.seed, norm)?;
            report.attributes = attributes;
            results.push(ConfigurationResult {
                configuration,
                classifier: kind,
                n_attributes: rows.first().map_or(0, Vec::len),
                detail,
                report,
            });
            Ok(())
        };
        let all: Vec<usize> = (0..matrix.n_cols()).collect();
        run(Configuration::Whole, matrix.select(&all), all.clone(), "all attributes".into(), cfg.normalization)?;
        let v = &sel.variance_best;
        run(Configuration::Variance, matrix.select(&v.indices), v.indices.clone(), v.detail.clone(), cfg.normalization)?;
        let s = &sel.score_best;
        run(Configuration::Score, matrix.select(&s.indices), s.indices.clone(), s.detail.clone(), cfg.normalization)?;
        let mu1 = moment_slice(&matrix, MomentSlice::Mu1);
        run(Configuration::Mu1, matrix.select(&mu1.indices), mu1.indices, "first moments".into(), cfg.normalization)?;
        let dy = moment_slice(&matrix, MomentSlice::Dynamic);
        run(Configuration::Dynamic, matrix.select(&dy.indices), dy.indices, "moments 2-4".into(), cfg.normalization)?;
        match &ext.pca_best {
            Some(p) => run(
                Configuration::Pca,
                truncate(&pca_rows, p.n_comps),
                Vec::new(),
                format!("n_comps={}", p.n_comps),
                Normalization::Full,
            )?,
            None => ctx.warn(format!("{}: PCA configuration unavailable", kind.name())),
        }
        match &ext.isomap_best {
            Some(c) => {
                let model = isomap_embed(&normalized.values, c.n_neighbors, c.n_comps, cfg.bridge)?;
                run(
                    Configuration::Isomap,
                    model.embedding,
                    Vec::new(),
                    format!("n_neighbors={}, n_comps={}", c.n_neighbors, c.n_comps),
                    Normalization::Full,
                )?
            }
            None => ctx.warn(format!("{}: Isomap configuration unavailable", kind.name())),
        }
    }
    for r in &results {
        for w in &r.report.warnings {
            if !w.contains("never predicted") && !w.contains("single class") {
                ctx.warn(format!("{} / {}: {w}", r.configuration.name(), r.classifier.name()));
            }
        }
    }
    write_json(&ctx.path("classify/reports.json"), &results)?;
    ctx.wrote("classify/reports.json");
    Ok(ctx.finish())
}

pub(crate) fn report(cfg: &PipelineConfig, out: &Path) -> Result<StageOutput> {
    let mut ctx = Ctx::new(out);
    let results: Vec<ConfigurationResult> = read_json(&out.join("classify/reports.json"))?;
    let battery: StationarityFile = read_json(&out.join("stationarity/battery.json"))?;
    let matrix = FeatureMatrix::read_csv(&out.join("features/normalized.csv"))?;
    let rows: Vec<RowLabel> = matrix.rows.clone();
    let report = super::experiment::build_report(cfg, &results, &battery.summary, &rows);
    write_json(&ctx.path("report/experiment.json"), &report)?;
    let text = super::experiment::render_table(&report);
    fs::write(ctx.path("report/experiment.txt"), text).map_err(|e| Error::io(ctx.path("report/experiment.txt"), e))?;
    ctx.wrote("report/experiment.json");
    ctx.wrote("report/experiment.txt");
    Ok(ctx.finish())
}
