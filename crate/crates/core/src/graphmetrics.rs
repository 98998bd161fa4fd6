//! The twelve global measurements of a partition network.
//!
//! Distance, triangle and centrality measures run on the simple undirected
//! view of the network (an edge exists if either direction does, weights of
//! both directions are summed). Degree uses the directed graph. Diameter,
//! radius and mean shortest path are restricted to the largest connected
//! component.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netbuild::{CooccurrenceNetwork, Partition};

pub const DEFAULT_CLIQUE_CAP: u64 = 1_000_000;

/// Relative tolerance for treating two weighted path lengths as equal.
const PATH_EPS: f64 = 1e-9;

/// Column names of the per-book metrics table, in table order.
pub const METRIC_NAMES: [&str; 12] = ["C", "D", "R", "Cq", "L", "T", "B", "S", "K", "I", "N", "E"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkMetrics {
    pub clustering: f64,
    pub diameter: f64,
    pub radius: f64,
    pub cliques: u64,
    pub load: f64,
    pub transitivity: f64,
    pub betweenness: f64,
    pub shortest_path: f64,
    pub degree: f64,
    pub intermittency: f64,
    pub nodes: u64,
    pub edges: u64,
}

impl NetworkMetrics {
    /// Values in [`METRIC_NAMES`] order.
    pub fn to_array(&self) -> [f64; 12] {
        [
            self.clustering,
            self.diameter,
            self.radius,
            self.cliques as f64,
            self.load,
            self.transitivity,
            self.betweenness,
            self.shortest_path,
            self.degree,
            self.intermittency,
            self.nodes as f64,
            self.edges as f64,
        ]
    }

    pub fn from_array(v: [f64; 12]) -> Self {
        NetworkMetrics {
            clustering: v[0],
            diameter: v[1],
            radius: v[2],
            cliques: v[3] as u64,
            load: v[4],
            transitivity: v[5],
            betweenness: v[6],
            shortest_path: v[7],
            degree: v[8],
            intermittency: v[9],
            nodes: v[10] as u64,
            edges: v[11] as u64,
        }
    }
}

/// Simple undirected graph derived from a co-occurrence network.
#[derive(Debug, Clone)]
pub struct UndirectedView {
    adj: Vec<Vec<usize>>,
    weights: Vec<Vec<f64>>,
}

impl UndirectedView {
    pub fn new(g: &CooccurrenceNetwork) -> Self {
        let n = g.node_count();
        let mut combined: Vec<HashMap<usize, f64>> = vec![HashMap::new(); n];
        for &(a, b, w) in g.edges() {
            *combined[a].entry(b).or_insert(0.0) += f64::from(w);
            *combined[b].entry(a).or_insert(0.0) += f64::from(w);
        }
        let mut adj = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for m in combined {
            let mut pairs: Vec<(usize, f64)> = m.into_iter().collect();
            pairs.sort_unstable_by_key(|p| p.0);
            adj.push(pairs.iter().map(|p| p.0).collect());
            weights.push(pairs.iter().map(|p| p.1).collect());
        }
        UndirectedView { adj, weights }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    /// Combined weight of the undirected edge, if present.
    pub fn weight(&self, a: usize, b: usize) -> Option<f64> {
        self.adj[a].binary_search(&b).ok().map(|i| self.weights[a][i])
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &u in &self.adj[v] {
                    if !seen[u] {
                        seen[u] = true;
                        comp.push(u);
                        queue.push_back(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Largest connected component; ties go to the one with the smallest node id.
    pub fn largest_component(&self) -> Vec<usize> {
        let mut best: Vec<usize> = Vec::new();
        for comp in self.components() {
            if comp.len() > best.len() {
                best = comp;
            }
        }
        best
    }

    /// Hop distances from `s`; `usize::MAX` marks unreachable nodes.
    pub fn bfs(&self, s: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.node_count()];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &u in &self.adj[v] {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    /// Number of triangles through each node.
    pub fn triangles(&self) -> Vec<usize> {
        (0..self.node_count())
            .map(|v| {
                let nb = &self.adj[v];
                let mut t = 0;
                for (i, &a) in nb.iter().enumerate() {
                    for &b in &nb[i + 1..] {
                        if self.has_edge(a, b) {
                            t += 1;
                        }
                    }
                }
                t
            })
            .collect()
    }
}

impl From<&CooccurrenceNetwork> for UndirectedView {
    fn from(g: &CooccurrenceNetwork) -> Self {
        UndirectedView::new(g)
    }
}

/// Mean local clustering coefficient; nodes of degree < 2 count as 0.
pub fn avg_clustering(view: &UndirectedView) -> f64 {
    let n = view.node_count();
    if n == 0 {
        return 0.0;
    }
    let tri = view.triangles();
    let total: f64 = (0..n)
        .map(|v| {
            let d = view.degree(v);
            if d < 2 {
                0.0
            } else {
                2.0 * tri[v] as f64 / (d * (d - 1)) as f64
            }
        })
        .sum();
    total / n as f64
}

/// Eccentricities of the largest component's nodes, in component order.
pub fn eccentricities(view: &UndirectedView) -> Vec<usize> {
    view.largest_component()
        .iter()
        .map(|&s| {
            view.bfs(s)
                .into_iter()
                .filter(|&d| d != usize::MAX)
                .max()
                .unwrap_or(0)
        })
        .collect()
}

pub fn diameter(view: &UndirectedView) -> f64 {
    eccentricities(view).into_iter().max().unwrap_or(0) as f64
}

/// Minimum eccentricity over the largest component.
pub fn radius(view: &UndirectedView) -> f64 {
    eccentricities(view).into_iter().min().unwrap_or(0) as f64
}

/// Mean hop distance over unordered pairs of the largest component.
pub fn avg_shortest_path(view: &UndirectedView) -> f64 {
    let comp = view.largest_component();
    if comp.len() < 2 {
        return 0.0;
    }
    let mut total = 0usize;
    for &s in &comp {
        let dist = view.bfs(s);
        total += comp.iter().filter(|&&t| t > s).map(|&t| dist[t]).sum::<usize>();
    }
    let pairs = comp.len() * (comp.len() - 1) / 2;
    total as f64 / pairs as f64
}

/// `3 * triangles / connected triples`; 0 without triples.
pub fn transitivity(view: &UndirectedView) -> f64 {
    let closed: usize = view.triangles().iter().sum();
    let triples: usize = (0..view.node_count())
        .map(|v| {
            let d = view.degree(v);
            d * d.saturating_sub(1) / 2
        })
        .sum();
    if triples == 0 {
        0.0
    } else {
        closed as f64 / triples as f64
    }
}

/// Number of maximal cliques (Bron–Kerbosch with pivoting). Isolated nodes
/// are maximal cliques of size one.
pub fn count_cliques(view: &UndirectedView, cap: u64) -> Result<u64> {
    let mut count = 0u64;
    let p: Vec<usize> = (0..view.node_count()).collect();
    bron_kerbosch(view, p, Vec::new(), &mut count, cap)?;
    Ok(count)
}

fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn bron_kerbosch(
    view: &UndirectedView,
    mut p: Vec<usize>,
    mut x: Vec<usize>,
    count: &mut u64,
    cap: u64,
) -> Result<()> {
    if p.is_empty() {
        if x.is_empty() {
            *count += 1;
            if *count > cap {
                return Err(Error::CliqueBudgetExceeded(cap as usize));
            }
        }
        return Ok(());
    }
    let pivot = p
        .iter()
        .chain(x.iter())
        .copied()
        .max_by_key(|&u| (intersect_sorted(&p, view.neighbors(u)).len(), std::cmp::Reverse(u)))
        .expect("p is non-empty");
    let candidates: Vec<usize> = p
        .iter()
        .copied()
        .filter(|v| !view.has_edge(pivot, *v))
        .collect();
    for v in candidates {
        let nv = view.neighbors(v);
        bron_kerbosch(view, intersect_sorted(&p, nv), intersect_sorted(&x, nv), count, cap)?;
        if let Ok(i) = p.binary_search(&v) {
            p.remove(i);
        }
        if let Err(i) = x.binary_search(&v) {
            x.insert(i, v);
        }
    }
    Ok(())
}

/// Raw (unnormalized, each unordered pair counted once) betweenness of every
/// node, hop-count distances.
pub fn betweenness_raw(view: &UndirectedView) -> Vec<f64> {
    let n = view.node_count();
    let mut cb = vec![0.0; n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0f64; n];
    let mut order = Vec::with_capacity(n);
    for s in 0..n {
        sigma.iter_mut().for_each(|x| *x = 0.0);
        dist.iter_mut().for_each(|x| *x = usize::MAX);
        order.clear();
        sigma[s] = 1.0;
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in view.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                }
            }
        }
        delta.iter_mut().for_each(|x| *x = 0.0);
        for &w in order.iter().rev() {
            for &v in view.neighbors(w) {
                if dist[v] != usize::MAX && dist[v] + 1 == dist[w] {
                    delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
                }
            }
            if w != s {
                cb[w] += delta[w];
            }
        }
    }
    cb.iter_mut().for_each(|x| *x /= 2.0);
    cb
}

#[derive(Copy, Clone, PartialEq)]
struct HeapEntry {
    dist: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= PATH_EPS * a.abs().max(b.abs()).max(1.0)
}

/// Raw betweenness with edge length `1 / weight`, so frequent pairs are close.
pub fn load_raw(view: &UndirectedView) -> Vec<f64> {
    let n = view.node_count();
    let mut cb = vec![0.0; n];
    for s in 0..n {
        let mut dist = vec![f64::INFINITY; n];
        let mut sigma = vec![0.0f64; n];
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut settled = vec![false; n];
        let mut order = Vec::with_capacity(n);
        dist[s] = 0.0;
        sigma[s] = 1.0;
        let mut heap = BinaryHeap::from([HeapEntry { dist: 0.0, node: s }]);
        while let Some(HeapEntry { node: v, .. }) = heap.pop() {
            if settled[v] {
                continue;
            }
            settled[v] = true;
            order.push(v);
            for (i, &w) in view.adj[v].iter().enumerate() {
                if settled[w] {
                    continue;
                }
                let nd = dist[v] + 1.0 / view.weights[v][i];
                if dist[w].is_infinite() || (nd < dist[w] && !approx_eq(nd, dist[w])) {
                    dist[w] = nd;
                    sigma[w] = sigma[v];
                    preds[w].clear();
                    preds[w].push(v);
                    heap.push(HeapEntry { dist: nd, node: w });
                } else if approx_eq(nd, dist[w]) {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        let mut delta = vec![0.0f64; n];
        for &w in order.iter().rev() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                cb[w] += delta[w];
            }
        }
    }
    cb.iter_mut().for_each(|x| *x /= 2.0);
    cb
}

fn normalized_mean(raw: &[f64]) -> f64 {
    let n = raw.len();
    if n == 0 {
        return 0.0;
    }
    let scale = if n > 2 {
        ((n - 1) * (n - 2)) as f64 / 2.0
    } else {
        1.0
    };
    raw.iter().map(|b| b / scale).sum::<f64>() / n as f64
}

/// Mean betweenness centrality, normalized by `(N-1)(N-2)/2`.
pub fn avg_betweenness(view: &UndirectedView) -> f64 {
    normalized_mean(&betweenness_raw(view))
}

/// Mean load centrality: betweenness under inverse-weight edge lengths.
pub fn avg_load(view: &UndirectedView) -> f64 {
    normalized_mean(&load_raw(view))
}

/// Mean of in-degree plus out-degree over distinct directed edges, `2E/N`.
pub fn avg_degree(g: &CooccurrenceNetwork) -> f64 {
    2.0 * g.edge_count() as f64 / g.node_count().max(1) as f64
}

/// Mean coefficient of variation of the gaps between consecutive occurrences
/// of each repeated lemma; 0 when no lemma repeats.
pub fn avg_intermittency<S: AsRef<str>>(lemmas: &[S]) -> f64 {
    let mut positions: HashMap<&str, usize> = HashMap::new();
    let mut occurrences: Vec<Vec<usize>> = Vec::new();
    for (t, l) in lemmas.iter().enumerate() {
        let id = *positions.entry(l.as_ref()).or_insert_with(|| {
            occurrences.push(Vec::new());
            occurrences.len() - 1
        });
        occurrences[id].push(t);
    }
    let scores: Vec<f64> = occurrences
        .iter()
        .filter(|occ| occ.len() >= 2)
        .map(|occ| {
            let gaps: Vec<f64> = occ.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
            let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
            let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / gaps.len() as f64;
            var.sqrt() / mean
        })
        .collect();
    if scores.is_empty() {
        0.0
    } else {
        scores.iter().sum::<f64>() / scores.len() as f64
    }
}

/// All twelve measurements of one partition network.
pub fn compute_all(g: &CooccurrenceNetwork, p: &Partition, clique_cap: u64) -> Result<NetworkMetrics> {
    let view = UndirectedView::new(g);
    let ecc = eccentricities(&view);
    Ok(NetworkMetrics {
        clustering: avg_clustering(&view),
        diameter: ecc.iter().copied().max().unwrap_or(0) as f64,
        radius: ecc.iter().copied().min().unwrap_or(0) as f64,
        cliques: count_cliques(&view, clique_cap)?,
        load: avg_load(&view),
        transitivity: transitivity(&view),
        betweenness: avg_betweenness(&view),
        shortest_path: avg_shortest_path(&view),
        degree: avg_degree(g),
        intermittency: avg_intermittency(&p.lemmas),
        nodes: g.node_count() as u64,
        edges: g.edge_count() as u64,
    })
}

/// Writes the per-book metrics table, one row per partition.
pub fn write_metrics_csv(path: &Path, rows: &[NetworkMetrics]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["partition".to_string()];
    header.extend(METRIC_NAMES.iter().map(|s| s.to_string()));
    w.write_record(&header)?;
    for (i, m) in rows.iter().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(m.to_array().iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<NetworkMetrics>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let parse_err = || Error::Parse {
            path: path.to_path_buf(),
            line: i + 2,
            message: "expected partition + 12 numeric columns".into(),
        };
        if rec.len() != 13 {
            return Err(parse_err());
        }
        let mut v = [0.0; 12];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = rec[k + 1].parse().map_err(|_| parse_err())?;
        }
        rows.push(NetworkMetrics::from_array(v));
    }
    Ok(rows)
}
