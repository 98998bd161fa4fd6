//! The book × attribute matrix, min–max normalization and attribute selection.

use std::collections::BTreeSet;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::serieslab::{MetricKind, MomentVector};

pub const MOMENTS_PER_METRIC: usize = 4;
pub const N_ATTRIBUTES: usize = 12 * MOMENTS_PER_METRIC;

/// Column label such as `C.mu2`.
pub fn column_label(metric: MetricKind, moment: usize) -> String {
    format!("{}.mu{}", metric.symbol(), moment)
}

pub fn column_labels() -> Vec<String> {
    MetricKind::ALL
        .iter()
        .flat_map(|&m| (1..=MOMENTS_PER_METRIC).map(move |i| column_label(m, i)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowLabel {
    pub author: String,
    pub book: String,
}

/// Moment vectors of one book.
#[derive(Debug, Clone)]
pub struct BookMoments {
    pub author: String,
    pub book: String,
    pub moments: Vec<MomentVector>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub rows: Vec<RowLabel>,
    pub columns: Vec<String>,
    /// Row-major values.
    pub values: Vec<Vec<f64>>,
    pub normalized: bool,
    /// Columns that were constant when normalized (mapped to 0).
    pub constant_columns: Vec<usize>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[j]).collect()
    }

    /// Rows restricted to `subset` columns.
    pub fn select(&self, subset: &[usize]) -> Vec<Vec<f64>> {
        self.values
            .iter()
            .map(|r| subset.iter().map(|&j| r[j]).collect())
            .collect()
    }

    pub fn authors(&self) -> Vec<String> {
        self.rows.iter().map(|r| r.author.clone()).collect()
    }

    /// Per-column sample variance (`n - 1` denominator; 0 for a single row).
    pub fn column_variances(&self) -> Vec<f64> {
        (0..self.n_cols()).map(|j| sample_variance(&self.column(j))).collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["author".to_string(), "book".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for (label, row) in self.rows.iter().zip(&self.values) {
            let mut rec = vec![label.author.clone(), label.book.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Reads a matrix written by [`FeatureMatrix::write_csv`]. The
    /// `normalized` flag is not stored and comes back as `false`.
    pub fn read_csv(path: &Path) -> Result<FeatureMatrix> {
        let mut r = csv::Reader::from_path(path)?;
        let header = r.headers()?.clone();
        if header.len() < 2 || &header[0] != "author" || &header[1] != "book" {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: "header must start with author,book".into(),
            });
        }
        let columns: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
        let mut rows = Vec::new();
        let mut values = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let parse_err = || Error::Parse {
                path: path.to_path_buf(),
                line: i + 2,
                message: "non-numeric or missing value".into(),
            };
            if rec.len() != columns.len() + 2 {
                return Err(parse_err());
            }
            rows.push(RowLabel {
                author: rec[0].to_string(),
                book: rec[1].to_string(),
            });
            let row: std::result::Result<Vec<f64>, _> = rec.iter().skip(2).map(str::parse).collect();
            values.push(row.map_err(|_| parse_err())?);
        }
        Ok(FeatureMatrix {
            rows,
            columns,
            values,
            normalized: false,
            constant_columns: Vec::new(),
        })
    }
}

pub fn sample_variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64
}

/// One row per book, columns metric-major with moments 1–4 inside each metric.
pub fn assemble(books: &[BookMoments]) -> Result<FeatureMatrix> {
    let mut rows = Vec::with_capacity(books.len());
    let mut values = Vec::with_capacity(books.len());
    for b in books {
        let mut row = vec![f64::NAN; N_ATTRIBUTES];
        let mut present = [false; 12];
        for mv in &b.moments {
            let base = mv.metric.index() * MOMENTS_PER_METRIC;
            row[base..base + MOMENTS_PER_METRIC].copy_from_slice(&mv.mu);
            present[mv.metric.index()] = true;
        }
        let missing: Vec<String> = MetricKind::ALL
            .iter()
            .filter(|m| !present[m.index()])
            .map(|m| m.symbol().to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::IncompleteBook {
                book: b.book.clone(),
                missing,
            });
        }
        rows.push(RowLabel {
            author: b.author.clone(),
            book: b.book.clone(),
        });
        values.push(row);
    }
    Ok(FeatureMatrix {
        rows,
        columns: column_labels(),
        values,
        normalized: false,
        constant_columns: Vec::new(),
    })
}

/// Scales every column to [0, 1]. Constant columns become 0 and are listed in
/// `constant_columns`.
pub fn minmax_normalize(m: &FeatureMatrix) -> FeatureMatrix {
    let mut out = m.clone();
    out.constant_columns.clear();
    for j in 0..m.n_cols() {
        let col = m.column(j);
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        if !(span > 0.0) {
            out.constant_columns.push(j);
        }
        for (row, v) in out.values.iter_mut().zip(col) {
            row[j] = if span > 0.0 { (v - lo) / span } else { 0.0 };
        }
    }
    out.normalized = true;
    out
}

/// Normalization bounds learned on a set of rows, applied to any row.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaler {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let d = rows.first().map_or(0, Vec::len);
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for r in rows {
            for j in 0..d {
                lo[j] = lo[j].min(r[j]);
                hi[j] = hi[j].max(r[j]);
            }
        }
        MinMaxScaler { lo, hi }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, &v)| {
                let span = self.hi[j] - self.lo[j];
                if span > 0.0 {
                    (v - self.lo[j]) / span
                } else {
                    0.0
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Provenance {
    Whole,
    Variance { theta: f64 },
    ScoreStep { level: usize },
    Mu1Only,
    DynamicOnly,
    Manual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSubset {
    pub indices: Vec<usize>,
    pub provenance: Provenance,
}

impl AttributeSubset {
    pub fn new(indices: impl IntoIterator<Item = usize>, provenance: Provenance) -> Result<Self> {
        let set: BTreeSet<usize> = indices.into_iter().collect();
        Ok(AttributeSubset {
            indices: set.into_iter().collect(),
            provenance,
        })
    }

    pub fn whole(n_cols: usize) -> Self {
        AttributeSubset {
            indices: (0..n_cols).collect(),
            provenance: Provenance::Whole,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn validate(&self, n_cols: usize) -> Result<()> {
        let unique: BTreeSet<&usize> = self.indices.iter().collect();
        if unique.len() != self.indices.len() || self.indices.iter().any(|&j| j >= n_cols) {
            return Err(Error::InvalidArgument(format!(
                "subset {:?} invalid for {n_cols} columns",
                self.indices
            )));
        }
        Ok(())
    }
}

/// Columns whose sample variance is at least `theta`.
pub fn variance_threshold(m: &FeatureMatrix, theta: f64) -> AttributeSubset {
    let vars = m.column_variances();
    AttributeSubset {
        indices: (0..m.n_cols()).filter(|&j| vars[j] >= theta).collect(),
        provenance: Provenance::Variance { theta },
    }
}

/// One subset per distinct column variance, thresholds ascending; the first
/// subset is the whole set.
pub fn variance_sweep(m: &FeatureMatrix) -> Vec<AttributeSubset> {
    let mut thresholds = m.column_variances();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    thresholds.into_iter().map(|t| variance_threshold(m, t)).collect()
}

/// Column indices in the order a rising variance threshold removes them.
pub fn variance_removal_order(m: &FeatureMatrix) -> Vec<usize> {
    let vars = m.column_variances();
    let mut order: Vec<usize> = (0..m.n_cols()).collect();
    order.sort_by(|&a, &b| vars[a].total_cmp(&vars[b]).then(a.cmp(&b)));
    order
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentSlice {
    Mu1,
    Dynamic,
}

/// The 12 first-moment columns or the 36 higher-moment columns.
pub fn moment_slice(m: &FeatureMatrix, which: MomentSlice) -> AttributeSubset {
    let (keep_first, provenance) = match which {
        MomentSlice::Mu1 => (true, Provenance::Mu1Only),
        MomentSlice::Dynamic => (false, Provenance::DynamicOnly),
    };
    AttributeSubset {
        indices: (0..m.n_cols())
            .filter(|j| (j % MOMENTS_PER_METRIC == 0) == keep_first)
            .collect(),
        provenance,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionLevel {
    pub level: usize,
    pub n_attributes: usize,
    pub best_score: f64,
    pub subsets: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SelectionTrace {
    pub levels: Vec<SelectionLevel>,
}

impl SelectionTrace {
    /// Highest score; ties go to the smallest subset, then the first listed.
    pub fn best(&self) -> Option<(f64, AttributeSubset)> {
        let mut best: Option<&SelectionLevel> = None;
        for lvl in &self.levels {
            if best.is_none_or(|b| lvl.best_score >= b.best_score) {
                best = Some(lvl);
            }
        }
        best.map(|lvl| {
            (
                lvl.best_score,
                AttributeSubset {
                    indices: lvl.subsets[0].clone(),
                    provenance: Provenance::ScoreStep { level: lvl.level },
                },
            )
        })
    }
}

/// Backward elimination keeping every subset that ties the best score.
///
/// Level 0 is `start`. Each next level scores every subset obtained by
/// dropping one attribute from a subset kept at the previous level and keeps
/// those tying the best score, sorted lexicographically and truncated to
/// `beam_cap`. The search ends at the empty set.
pub fn greedy_backward_select<F>(start: &[usize], scorer: F, beam_cap: usize) -> SelectionTrace
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    let beam_cap = beam_cap.max(1);
    let mut current: Vec<Vec<usize>> = {
        let mut s = start.to_vec();
        s.sort_unstable();
        s.dedup();
        vec![s]
    };
    let mut levels = vec![SelectionLevel {
        level: 0,
        n_attributes: current[0].len(),
        best_score: scorer(&current[0]),
        subsets: current.clone(),
    }];
    let mut level = 0;
    while !current[0].is_empty() {
        level += 1;
        let candidates: BTreeSet<Vec<usize>> = current
            .iter()
            .flat_map(|s| {
                (0..s.len()).map(move |i| {
                    let mut c = s.clone();
                    c.remove(i);
                    c
                })
            })
            .collect();
        let candidates: Vec<Vec<usize>> = candidates.into_iter().collect();
        let scores: Vec<f64> = candidates.par_iter().map(|c| scorer(c)).collect();
        let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        current = candidates
            .into_iter()
            .zip(scores)
            .filter(|(_, s)| *s == best)
            .map(|(c, _)| c)
            .take(beam_cap)
            .collect();
        levels.push(SelectionLevel {
            level,
            n_attributes: current[0].len(),
            best_score: best,
            subsets: current.clone(),
        });
    }
    SelectionTrace { levels }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn book(author: &str, name: &str, base: f64) -> BookMoments {
        BookMoments {
            author: author.into(),
            book: name.into(),
            moments: MetricKind::ALL
                .iter()
                .map(|&metric| MomentVector {
                    metric,
                    mu: [base + metric.index() as f64, 1.0, base * 0.5, 2.0],
                })
                .collect(),
        }
    }

    fn small_matrix() -> FeatureMatrix {
        FeatureMatrix {
            rows: (0..3)
                .map(|i| RowLabel {
                    author: "a".into(),
                    book: format!("b{i}"),
                })
                .collect(),
            columns: vec!["x".into(), "y".into()],
            values: vec![vec![2.0, 5.0], vec![4.0, 5.0], vec![6.0, 5.0]],
            normalized: false,
            constant_columns: vec![],
        }
    }

    #[test]
    fn assemble_shape() {
        let books: Vec<BookMoments> = (0..80).map(|i| book("a", &format!("b{i}"), i as f64)).collect();
        let m = assemble(&books).unwrap();
        assert_eq!((m.n_rows(), m.n_cols()), (80, 48));
        assert_eq!(m.columns[0], "C.mu1");
        assert_eq!(m.columns[13], "Cq.mu2");
        assert_eq!(m.columns[47], "E.mu4");
        assert_eq!(assemble(&books[..1]).unwrap().n_rows(), 1);

        let mut incomplete = book("a", "x", 0.0);
        incomplete.moments.retain(|mv| mv.metric != MetricKind::Load);
        match assemble(&[incomplete]) {
            Err(Error::IncompleteBook { missing, .. }) => assert_eq!(missing, vec!["L"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn normalization() {
        let n = minmax_normalize(&small_matrix());
        assert_eq!(n.column(0), vec![0.0, 0.5, 1.0]);
        assert_eq!(n.column(1), vec![0.0, 0.0, 0.0]);
        assert_eq!(n.constant_columns, vec![1]);
        assert_eq!(minmax_normalize(&n).values, n.values);
    }

    #[test]
    fn variance_selection() {
        let n = minmax_normalize(&small_matrix());
        assert_eq!(variance_threshold(&n, 0.0).indices, vec![0, 1]);
        assert_eq!(variance_threshold(&n, 1e-12).indices, vec![0]);
        let sweep = variance_sweep(&n);
        assert_eq!(sweep.len(), 2);
        assert_eq!(sweep[0].indices, vec![0, 1]);
        assert_eq!(variance_removal_order(&n), vec![1, 0]);
    }

    #[test]
    fn slices_partition_columns() {
        let books: Vec<BookMoments> = (0..2).map(|i| book("a", &format!("b{i}"), i as f64)).collect();
        let m = assemble(&books).unwrap();
        let mu1 = moment_slice(&m, MomentSlice::Mu1);
        let dynamic = moment_slice(&m, MomentSlice::Dynamic);
        assert_eq!(mu1.len(), 12);
        assert_eq!(dynamic.len(), 36);
        let mut all: Vec<usize> = mu1.indices.iter().chain(&dynamic.indices).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..48).collect::<Vec<_>>());
        assert!(mu1.indices.iter().all(|j| m.columns[*j].ends_with(".mu1")));
    }

    #[test]
    fn greedy_keeps_predictive_column() {
        // score: 1.0 if column 3 is present, plus a small reward for fewer columns
        let scorer = |s: &[usize]| {
            let base = if s.contains(&3) { 1.0 } else { 0.5 };
            base - s.len() as f64 * 0.01
        };
        let trace = greedy_backward_select(&(0..6).collect::<Vec<_>>(), scorer, 50);
        assert_eq!(trace.levels.len(), 7);
        assert_eq!(trace.levels[5].subsets, vec![vec![3]]);
        let (score, best) = trace.best().unwrap();
        assert_eq!(best.indices, vec![3]);
        assert!((score - 0.99).abs() < 1e-12);
        assert!(trace.levels.last().unwrap().subsets[0].is_empty());
    }

    #[test]
    fn greedy_beam_of_one_is_backward_elimination() {
        // constant scorer: everything ties, beam keeps the lexicographically first
        let trace = greedy_backward_select(&[0, 1, 2, 3], |_| 0.5, 1);
        let firsts: Vec<Vec<usize>> = trace.levels.iter().map(|l| l.subsets[0].clone()).collect();
        assert_eq!(firsts, vec![vec![0, 1, 2, 3], vec![0, 1, 2], vec![0, 1], vec![0], vec![]]);
        assert!(trace.levels.iter().all(|l| l.subsets.len() == 1));
    }

    #[test]
    fn greedy_beam_caps_ties() {
        let trace = greedy_backward_select(&(0..10).collect::<Vec<_>>(), |_| 0.5, 3);
        assert!(trace.levels.iter().all(|l| l.subsets.len() <= 3));
        assert_eq!(trace.levels[1].subsets.len(), 3);
        // fewest attributes wins ties
        assert!(trace.best().unwrap().1.is_empty());
    }

    #[test]
    fn csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        let m = small_matrix();
        m.write_csv(&p).unwrap();
        let back = FeatureMatrix::read_csv(&p).unwrap();
        assert_eq!(back.values, m.values);
        assert_eq!(back.rows, m.rows);
        assert_eq!(back.columns, m.columns);
    }
}
