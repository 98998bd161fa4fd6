//! Feature extraction: PCA and Isomap (k-NN graph, geodesics, classical MDS).

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::path::Path;

use log::warn;
use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featurespace::RowLabel;

/// Eigenpairs of a symmetric matrix, eigenvalues descending. Each eigenvector
/// is signed so that its largest-magnitude entry is positive.
fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            let pivot = v
                .iter()
                .enumerate()
                .fold((0, 0.0f64), |best, (j, x)| if x.abs() > best.1 + 1e-12 { (j, x.abs()) } else { best })
                .0;
            if v[pivot] < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            v
        })
        .collect();
    (values, vectors)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub means: Vec<f64>,
    /// `n_comps` orthonormal directions, each of input dimension.
    pub components: Vec<Vec<f64>>,
    /// All covariance eigenvalues, descending, clamped at 0.
    pub eigenvalues: Vec<f64>,
    pub warnings: Vec<String>,
}

impl PcaModel {
    pub fn transform(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter()
            .map(|r| {
                self.components
                    .iter()
                    .map(|c| c.iter().zip(r).zip(&self.means).map(|((w, x), m)| w * (x - m)).sum())
                    .collect()
            })
            .collect()
    }

    pub fn inverse_transform(&self, embedded: &[Vec<f64>]) -> Vec<Vec<f64>> {
        embedded
            .iter()
            .map(|z| {
                let mut x = self.means.clone();
                for (c, zc) in self.components.iter().zip(z) {
                    for (xj, wj) in x.iter_mut().zip(c) {
                        *xj += zc * wj;
                    }
                }
                x
            })
            .collect()
    }

    pub fn total_variance(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }
}

fn check_rows(rows: &[Vec<f64>]) -> Result<usize> {
    let d = rows
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::InvalidArgument("no rows".into()))?;
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidArgument("rows have different lengths".into()));
    }
    Ok(d)
}

/// Projects rows onto the top `n_comps` eigenvectors of the sample covariance.
pub fn pca_fit_transform(rows: &[Vec<f64>], n_comps: usize) -> Result<(Vec<Vec<f64>>, PcaModel)> {
    let d = check_rows(rows)?;
    let n = rows.len();
    if n_comps == 0 || n_comps > n.min(d) {
        return Err(Error::InvalidArgument(format!(
            "n_comps={n_comps} must be in 1..={}",
            n.min(d)
        )));
    }
    let means: Vec<f64> = (0..d)
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64)
        .collect();
    let centered = DMatrix::from_fn(n, d, |i, j| rows[i][j] - means[j]);
    let denom = (n.max(2) - 1) as f64;
    let cov = (centered.transpose() * &centered) / denom;
    let (values, vectors) = sorted_eigen(cov);
    let eigenvalues: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = eigenvalues.iter().sum();
    let mut warnings = Vec::new();
    let rank = eigenvalues.iter().filter(|&&v| v > 1e-12 * total.max(f64::MIN_POSITIVE)).count();
    if n_comps > rank {
        let msg = format!("rank deficient: requested {n_comps} components, numerical rank {rank}");
        warn!("{msg}");
        warnings.push(msg);
    }
    let model = PcaModel {
        means,
        components: vectors.into_iter().take(n_comps).collect(),
        eigenvalues,
        warnings,
    };
    Ok((model.transform(rows), model))
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

pub fn euclidean_distances(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|a| rows.iter().map(|b| euclidean(a, b)).collect())
        .collect()
}

/// Embedding from classical MDS, with all eigenvalues (descending).
#[derive(Debug, Clone, PartialEq)]
pub struct MdsResult {
    pub embedding: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Double-centers `-D^2 / 2` and keeps the top `n_comps` eigenpairs, scaled
/// by the square root of the eigenvalue. Negative eigenvalues are clamped to 0.
pub fn classical_mds(dist: &[Vec<f64>], n_comps: usize) -> Result<MdsResult> {
    let n = dist.len();
    if n_comps == 0 || n_comps > n {
        return Err(Error::InvalidArgument(format!("n_comps={n_comps} must be in 1..={n}")));
    }
    let sq = DMatrix::from_fn(n, n, |i, j| dist[i][j] * dist[i][j]);
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand));
    let (values, vectors) = sorted_eigen(b);
    let mut warnings = Vec::new();
    let scale = values.first().copied().unwrap_or(0.0).abs().max(1.0);
    let negative = values.iter().filter(|&&v| v < -1e-9 * scale).count();
    if negative > 0 {
        let msg = format!("{negative} negative MDS eigenvalue(s) clamped to zero");
        warn!("{msg}");
        warnings.push(msg);
    }
    let embedding = (0..n)
        .map(|i| {
            (0..n_comps)
                .map(|c| vectors[c][i] * values[c].max(0.0).sqrt())
                .collect()
        })
        .collect();
    Ok(MdsResult {
        embedding,
        eigenvalues: values,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsomapModel {
    pub n_neighbors: usize,
    pub n_comps: usize,
    /// Undirected neighbor-graph edges `(i, j, length)` with `i < j`.
    pub neighbor_edges: Vec<(usize, usize, f64)>,
    pub geodesic: Vec<Vec<f64>>,
    pub embedding: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Symmetrized k-nearest-neighbor graph as adjacency lists of `(node, length)`.
/// Ties in distance go to the lower row index.
pub fn knn_graph(rows: &[Vec<f64>], k: usize) -> Vec<Vec<(usize, f64)>> {
    let n = rows.len();
    let dist = euclidean_distances(rows);
    let mut linked = vec![vec![false; n]; n];
    for i in 0..n {
        let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| dist[i][a].total_cmp(&dist[i][b]).then(a.cmp(&b)));
        for &j in others.iter().take(k) {
            linked[i][j] = true;
            linked[j][i] = true;
        }
    }
    (0..n)
        .map(|i| (0..n).filter(|&j| linked[i][j]).map(|j| (j, dist[i][j])).collect())
        .collect()
}

fn graph_components(adj: &[Vec<(usize, f64)>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut comp = vec![usize::MAX; n];
    let mut out: Vec<Vec<usize>> = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![s];
        comp[s] = id;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &(u, _) in &adj[v] {
                if comp[u] == usize::MAX {
                    comp[u] = id;
                    members.push(u);
                    stack.push(u);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Links components through their globally shortest Euclidean pair until the
/// graph is connected.
fn bridge_components(rows: &[Vec<f64>], adj: &mut [Vec<(usize, f64)>]) {
    loop {
        let comps = graph_components(adj);
        if comps.len() <= 1 {
            return;
        }
        let mut label = vec![0; rows.len()];
        for (c, members) in comps.iter().enumerate() {
            for &v in members {
                label[v] = c;
            }
        }
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..rows.len() {
            for j in i + 1..rows.len() {
                if label[i] != label[j] {
                    let d = euclidean(&rows[i], &rows[j]);
                    if best.is_none_or(|b| d < b.0) {
                        best = Some((d, i, j));
                    }
                }
            }
        }
        let (d, i, j) = best.expect("at least two components");
        adj[i].push((j, d));
        adj[j].push((i, d));
    }
}

#[derive(Copy, Clone, PartialEq)]
struct Candidate(f64, usize);

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(adj: &[Vec<(usize, f64)>], s: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    dist[s] = 0.0;
    let mut heap = BinaryHeap::from([Candidate(0.0, s)]);
    while let Some(Candidate(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(u, w) in &adj[v] {
            let nd = d + w;
            if nd < dist[u] {
                dist[u] = nd;
                heap.push(Candidate(nd, u));
            }
        }
    }
    dist
}

/// All-pairs geodesic distances over the neighbor graph, symmetrized.
pub fn geodesic_distances(adj: &[Vec<(usize, f64)>]) -> Vec<Vec<f64>> {
    let mut g: Vec<Vec<f64>> = (0..adj.len()).into_par_iter().map(|s| dijkstra(adj, s)).collect();
    let n = g.len();
    for i in 0..n {
        for j in i + 1..n {
            let d = g[i][j].min(g[j][i]);
            g[i][j] = d;
            g[j][i] = d;
        }
    }
    g
}

/// Isomap with all MDS components kept; truncate with [`IsomapModel::truncated`].
fn isomap_full(rows: &[Vec<f64>], n_neighbors: usize, max_comps: usize, bridge: bool) -> Result<IsomapModel> {
    check_rows(rows)?;
    let n = rows.len();
    if n_neighbors < 1 || n <= n_neighbors {
        return Err(Error::InvalidArgument(format!(
            "n_neighbors={n_neighbors} needs 1 <= n_neighbors < {n} rows"
        )));
    }
    if max_comps == 0 || max_comps > n {
        return Err(Error::InvalidArgument(format!("n_comps={max_comps} must be in 1..={n}")));
    }
    let mut adj = knn_graph(rows, n_neighbors);
    let comps = graph_components(&adj);
    let mut warnings = Vec::new();
    if comps.len() > 1 {
        if !bridge {
            return Err(Error::DisconnectedNeighborGraph { components: comps });
        }
        let msg = format!("bridged {} neighbor-graph components", comps.len());
        warn!("{msg}");
        warnings.push(msg);
        bridge_components(rows, &mut adj);
    }
    let geodesic = geodesic_distances(&adj);
    let mds = classical_mds(&geodesic, max_comps)?;
    warnings.extend(mds.warnings);
    let mut neighbor_edges: Vec<(usize, usize, f64)> = adj
        .iter()
        .enumerate()
        .flat_map(|(i, nb)| nb.iter().filter(move |(j, _)| *j > i).map(move |&(j, d)| (i, j, d)))
        .collect();
    neighbor_edges.sort_by_key(|e| (e.0, e.1));
    neighbor_edges.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
    Ok(IsomapModel {
        n_neighbors,
        n_comps: max_comps,
        neighbor_edges,
        geodesic,
        embedding: mds.embedding,
        eigenvalues: mds.eigenvalues,
        warnings,
    })
}

impl IsomapModel {
    pub fn truncated(&self, n_comps: usize) -> Vec<Vec<f64>> {
        self.embedding.iter().map(|r| r[..n_comps.min(r.len())].to_vec()).collect()
    }
}

/// Isomap embedding of `rows` into `n_comps` dimensions.
pub fn isomap_embed(rows: &[Vec<f64>], n_neighbors: usize, n_comps: usize, bridge: bool) -> Result<IsomapModel> {
    isomap_full(rows, n_neighbors, n_comps, bridge)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub n_neighbors: usize,
    pub n_comps: usize,
    /// `None` when the cell could not be embedded (e.g. disconnected graph).
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub cells: Vec<SweepCell>,
}

impl SweepGrid {
    /// Best-scoring cell; ties go to the smallest `n_comps`, then the smallest
    /// `n_neighbors`.
    pub fn best(&self) -> Option<&SweepCell> {
        self.cells
            .iter()
            .filter(|c| c.score.is_some())
            .min_by(|a, b| {
                b.score
                    .unwrap()
                    .total_cmp(&a.score.unwrap())
                    .then(a.n_comps.cmp(&b.n_comps))
                    .then(a.n_neighbors.cmp(&b.n_neighbors))
            })
    }
}

/// Scores every `(n_neighbors, n_comps)` pair. The embedding for a given
/// `n_neighbors` is computed once and truncated per `n_comps`.
pub fn parameter_sweep<F>(
    rows: &[Vec<f64>],
    neighbors: std::ops::RangeInclusive<usize>,
    comps: std::ops::RangeInclusive<usize>,
    bridge: bool,
    scorer: F,
) -> SweepGrid
where
    F: Fn(&[Vec<f64>]) -> f64 + Sync,
{
    let max_comps = (*comps.end()).min(rows.len());
    let mut cells = Vec::new();
    for k in neighbors {
        let model = isomap_full(rows, k, max_comps.max(1), bridge);
        for c in comps.clone() {
            let score = match &model {
                Ok(m) if c >= 1 && c <= max_comps => Some(scorer(&m.truncated(c))),
                _ => None,
            };
            cells.push(SweepCell {
                n_neighbors: k,
                n_comps: c,
                score,
            });
        }
    }
    SweepGrid { cells }
}

/// `x,y,author,book` rows from the first two embedding coordinates.
pub fn export_2d(path: &Path, embedding: &[Vec<f64>], labels: &[RowLabel]) -> Result<()> {
    if embedding.iter().any(|r| r.len() < 2) {
        return Err(Error::InvalidArgument("embedding needs at least 2 components".into()));
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "y", "author", "book"])?;
    for (r, l) in embedding.iter().zip(labels) {
        w.write_record([r[0].to_string(), r[1].to_string(), l.author.clone(), l.book.clone()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
