//! Partitioning of lemma streams and construction of co-occurrence networks.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::TokenStream;
use crate::error::{Error, Result};

/// Default number of lemmas per partition.
pub const DEFAULT_WINDOW: usize = 200;

/// A contiguous block of exactly `W` lemmas from one book.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub book: String,
    pub index: usize,
    pub lemmas: Vec<String>,
}

/// Splits a stream into `floor(len / w)` partitions; the trailing remainder is
/// discarded.
pub fn partition_stream(stream: &TokenStream, w: usize) -> Result<Vec<Partition>> {
    let lemmas: Vec<&str> = stream.lemmas().collect();
    partition_lemmas(&stream.doc_id, &lemmas, w)
}

pub fn partition_lemmas<S: AsRef<str>>(book: &str, lemmas: &[S], w: usize) -> Result<Vec<Partition>> {
    if w < 2 {
        return Err(Error::InvalidArgument(format!("window must be >= 2, got {w}")));
    }
    if lemmas.len() < w {
        return Err(Error::EmptySeries(book.to_string()));
    }
    Ok(lemmas
        .chunks_exact(w)
        .enumerate()
        .map(|(index, chunk)| Partition {
            book: book.to_string(),
            index,
            lemmas: chunk.iter().map(|s| s.as_ref().to_string()).collect(),
        })
        .collect())
}

/// Directed, integer-weighted word adjacency network.
///
/// Node ids follow order of first appearance. Edges are stored in order of
/// first occurrence of the pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CooccurrenceNetwork {
    labels: Vec<String>,
    edges: Vec<(usize, usize, u32)>,
}

impl CooccurrenceNetwork {
    pub fn from_lemmas<S: AsRef<str>>(lemmas: &[S]) -> Self {
        let mut ids: HashMap<&str, usize> = HashMap::new();
        let mut labels = Vec::new();
        let mut seq = Vec::with_capacity(lemmas.len());
        for l in lemmas {
            let l = l.as_ref();
            let id = *ids.entry(l).or_insert_with(|| {
                labels.push(l.to_string());
                labels.len() - 1
            });
            seq.push(id);
        }
        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<(usize, usize, u32)> = Vec::new();
        for pair in seq.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if a == b {
                continue;
            }
            match edge_index.get(&(a, b)) {
                Some(&i) => edges[i].2 += 1,
                None => {
                    edge_index.insert((a, b), edges.len());
                    edges.push((a, b, 1));
                }
            }
        }
        CooccurrenceNetwork { labels, edges }
    }

    /// Builds a network from explicit edges on nodes `0..n`. Repeated edges
    /// have their weights summed.
    pub fn from_edges(n: usize, edges: &[(usize, usize, u32)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("network needs at least one node".into()));
        }
        let mut merged: Vec<(usize, usize, u32)> = Vec::new();
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        for &(a, b, w) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidArgument(format!("edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop on node {a}")));
            }
            if w == 0 {
                return Err(Error::InvalidArgument("edge weight must be >= 1".into()));
            }
            match index.get(&(a, b)) {
                Some(&i) => merged[i].2 += w,
                None => {
                    index.insert((a, b), merged.len());
                    merged.push((a, b, w));
                }
            }
        }
        Ok(CooccurrenceNetwork {
            labels: (0..n).map(|i| i.to_string()).collect(),
            edges: merged,
        })
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn edges(&self) -> &[(usize, usize, u32)] {
        &self.edges
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.iter().map(|e| u64::from(e.2)).sum()
    }

    /// `src_lemma<TAB>dst_lemma<TAB>weight` lines.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for &(a, b, w) in &self.edges {
            out.push_str(&format!("{}\t{}\t{}\n", self.labels[a], self.labels[b], w));
        }
        out
    }

    pub fn write_edge_list(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_edge_list()).map_err(|e| Error::io(path, e))
    }
}

pub fn build_network(p: &Partition) -> CooccurrenceNetwork {
    CooccurrenceNetwork::from_lemmas(&p.lemmas)
}

/// Smallest window in `grid` for which every partition in the corpus has at
/// least `target_min_nodes` distinct lemmas.
///
/// Books too short for a window are ignored for that window; a window that
/// yields no partition at all is infeasible. When `target_series_len` is set,
/// the chosen window must also give at least that many partitions per book on
/// average.
pub fn choose_window(
    streams: &[Vec<String>],
    grid: &[usize],
    target_min_nodes: usize,
    target_series_len: Option<f64>,
) -> Result<usize> {
    let mut grid: Vec<usize> = grid.iter().copied().filter(|&w| w >= 2).collect();
    grid.sort_unstable();
    grid.dedup();
    for &w in &grid {
        let mut min_nodes = usize::MAX;
        let mut partitions = 0usize;
        let mut books = 0usize;
        for lemmas in streams {
            let chunks = lemmas.chunks_exact(w);
            if chunks.len() == 0 {
                continue;
            }
            books += 1;
            for chunk in chunks {
                partitions += 1;
                let mut distinct: Vec<&str> = chunk.iter().map(String::as_str).collect();
                distinct.sort_unstable();
                distinct.dedup();
                min_nodes = min_nodes.min(distinct.len());
            }
        }
        if partitions == 0 || min_nodes < target_min_nodes {
            continue;
        }
        if let Some(target) = target_series_len {
            if (partitions as f64) / (books as f64) < target {
                break;
            }
        }
        return Ok(w);
    }
    Err(Error::NoFeasibleWindow {
        min_nodes: target_min_nodes,
    })
}
