//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use netauthor::classify::{cross_validate, gaussian_blobs, score_confusion, ClassifierKind, ClassifierSpec, Normalization};
use netauthor::graphmetrics::{compute_all, NetworkMetrics, DEFAULT_CLIQUE_CAP};
use netauthor::manifold::{classical_mds, euclidean_distances, isomap_embed, pca_fit_transform};
use netauthor::netbuild::{partition_lemmas, CooccurrenceNetwork, Partition};
use netauthor::pipeline::experiment::Configuration;
use netauthor::pipeline::run_experiment;
use netauthor::serieslab::{adf_test, adf_test_with, kpss_test, moments, LagSelection, PValueVariant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

// ---------------------------------------------------------------------------
// Brute-force graph oracle working on dense matrices.

struct Oracle {
    n: usize,
    /// Combined undirected weight, 0 = no edge.
    w: Vec<Vec<f64>>,
    directed_edges: usize,
}

impl Oracle {
    fn new(n: usize, edges: &[(usize, usize, u32)]) -> Self {
        let mut w = vec![vec![0.0; n]; n];
        let mut seen = std::collections::BTreeSet::new();
        for &(a, b, x) in edges {
            w[a][b] += x as f64;
            w[b][a] += x as f64;
            seen.insert((a, b));
        }
        Oracle {
            n,
            w,
            directed_edges: seen.len(),
        }
    }

    fn adj(&self, a: usize, b: usize) -> bool {
        self.w[a][b] > 0.0
    }

    fn degree(&self, v: usize) -> usize {
        (0..self.n).filter(|&u| self.adj(v, u)).count()
    }

    /// Floyd–Warshall with the given edge length.
    fn distances(&self, len: impl Fn(f64) -> f64) -> Vec<Vec<f64>> {
        let n = self.n;
        let mut d = vec![vec![f64::INFINITY; n]; n];
        for i in 0..n {
            d[i][i] = 0.0;
            for j in 0..n {
                if self.adj(i, j) {
                    d[i][j] = len(self.w[i][j]);
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        d
    }

    fn largest_component(&self) -> Vec<usize> {
        let d = self.distances(|_| 1.0);
        let mut best: Vec<usize> = Vec::new();
        for s in 0..self.n {
            let comp: Vec<usize> = (0..self.n).filter(|&v| d[s][v].is_finite()).collect();
            // Components are visited by their smallest member, so strict > keeps the lowest id on ties.
            if comp[0] == s && comp.len() > best.len() {
                best = comp;
            }
        }
        best
    }

    fn clustering(&self) -> f64 {
        let mut total = 0.0;
        for v in 0..self.n {
            let nb: Vec<usize> = (0..self.n).filter(|&u| self.adj(v, u)).collect();
            if nb.len() < 2 {
                continue;
            }
            let mut links = 0;
            for i in 0..nb.len() {
                for j in i + 1..nb.len() {
                    if self.adj(nb[i], nb[j]) {
                        links += 1;
                    }
                }
            }
            total += links as f64 / (nb.len() * (nb.len() - 1) / 2) as f64;
        }
        total / self.n as f64
    }

    fn transitivity(&self) -> f64 {
        let mut triangles = 0usize;
        for i in 0..self.n {
            for j in i + 1..self.n {
                for k in j + 1..self.n {
                    if self.adj(i, j) && self.adj(j, k) && self.adj(i, k) {
                        triangles += 1;
                    }
                }
            }
        }
        let triads: usize = (0..self.n).map(|v| self.degree(v) * self.degree(v).saturating_sub(1) / 2).sum();
        if triads == 0 {
            0.0
        } else {
            3.0 * triangles as f64 / triads as f64
        }
    }

    /// (diameter, radius, mean shortest path) over the largest component.
    fn distance_stats(&self) -> (f64, f64, f64) {
        let d = self.distances(|_| 1.0);
        let comp = self.largest_component();
        if comp.len() < 2 {
            return (0.0, 0.0, 0.0);
        }
        let ecc: Vec<f64> = comp
            .iter()
            .map(|&v| comp.iter().map(|&u| d[v][u]).fold(0.0, f64::max))
            .collect();
        let mut sum = 0.0;
        let mut pairs = 0usize;
        for (i, &a) in comp.iter().enumerate() {
            for &b in &comp[i + 1..] {
                sum += d[a][b];
                pairs += 1;
            }
        }
        (
            ecc.iter().copied().fold(0.0, f64::max),
            ecc.iter().copied().fold(f64::INFINITY, f64::min),
            sum / pairs as f64,
        )
    }

    /// Mean normalized betweenness by explicit shortest-path counting.
    fn mean_betweenness(&self, len: impl Fn(f64) -> f64) -> f64 {
        let n = self.n;
        if n <= 2 {
            return 0.0;
        }
        let d = self.distances(&len);
        let same = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs());
        // sigma[s][t]: number of shortest s-t paths, by dynamic programming in distance order.
        let mut sigma = vec![vec![0.0f64; n]; n];
        for s in 0..n {
            let mut order: Vec<usize> = (0..n).filter(|&t| d[s][t].is_finite()).collect();
            order.sort_by(|&a, &b| d[s][a].total_cmp(&d[s][b]));
            sigma[s][s] = 1.0;
            for &t in &order {
                if t == s {
                    continue;
                }
                sigma[s][t] = (0..n)
                    .filter(|&u| u != t && self.adj(u, t) && d[s][u].is_finite())
                    .filter(|&u| same(d[s][u] + len(self.w[u][t]), d[s][t]))
                    .map(|u| sigma[s][u])
                    .sum();
            }
        }
        let mut total = 0.0;
        for v in 0..n {
            for s in 0..n {
                for t in s + 1..n {
                    if s == v || t == v || !d[s][t].is_finite() || !d[s][v].is_finite() || !d[v][t].is_finite() {
                        continue;
                    }
                    if same(d[s][v] + d[v][t], d[s][t]) {
                        total += sigma[s][v] * sigma[v][t] / sigma[s][t];
                    }
                }
            }
        }
        total / ((n - 1) * (n - 2) / 2) as f64 / n as f64
    }

    /// Maximal cliques by depth-first enumeration of all cliques.
    fn maximal_cliques(&self) -> u64 {
        fn extend(o: &Oracle, clique: &mut Vec<usize>, start: usize, count: &mut u64) {
            let maximal = (0..o.n).all(|v| clique.contains(&v) || !clique.iter().all(|&c| o.adj(c, v)));
            if maximal {
                *count += 1;
            }
            for v in start..o.n {
                if clique.iter().all(|&c| o.adj(c, v)) {
                    clique.push(v);
                    extend(o, clique, v + 1, count);
                    clique.pop();
                }
            }
        }
        let mut count = 0;
        for v in 0..self.n {
            let mut c = vec![v];
            extend(self, &mut c, v + 1, &mut count);
        }
        count
    }

    fn metrics(&self) -> [(&'static str, f64); 11] {
        let (d, r, s) = self.distance_stats();
        [
            ("C", self.clustering()),
            ("D", d),
            ("R", r),
            ("Cq", self.maximal_cliques() as f64),
            ("L", self.mean_betweenness(|w| 1.0 / w)),
            ("T", self.transitivity()),
            ("B", self.mean_betweenness(|_| 1.0)),
            ("S", s),
            ("K", 2.0 * self.directed_edges as f64 / self.n as f64),
            ("N", self.n as f64),
            ("E", self.directed_edges as f64),
        ]
    }
}

fn implementation(m: &NetworkMetrics) -> [f64; 11] {
    [
        m.clustering,
        m.diameter,
        m.radius,
        m.cliques as f64,
        m.load,
        m.transitivity,
        m.betweenness,
        m.shortest_path,
        m.degree,
        m.nodes as f64,
        m.edges as f64,
    ]
}

/// Returns a description of the first mismatch, if any.
fn compare_graph(n: usize, edges: &[(usize, usize, u32)]) -> Option<String> {
    let g = CooccurrenceNetwork::from_edges(n, edges).unwrap();
    let p = Partition {
        book: "oracle".into(),
        index: 0,
        lemmas: vec!["x".into(), "y".into()],
    };
    let got = implementation(&compute_all(&g, &p, DEFAULT_CLIQUE_CAP).unwrap());
    for ((name, want), got) in Oracle::new(n, edges).metrics().iter().zip(got) {
        if (want - got).abs() > 1e-9 * want.abs().max(1.0) {
            return Some(format!("{name}: oracle {want} vs {got} on n={n} edges={edges:?}"));
        }
    }
    None
}

fn criterion_1() -> Outcome {
    let mut checked = 0;
    for n in 1..=6usize {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        for mask in 0u32..(1 << pairs.len()) {
            let edges: Vec<(usize, usize, u32)> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &(a, b))| (a, b, 1))
                .collect();
            if Oracle::new(n, &edges).largest_component().len() != n {
                continue;
            }
            if let Some(msg) = compare_graph(n, &edges) {
                return outcome(false, msg);
            }
            checked += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    for _ in 0..200 {
        let n = rng.random_range(2..=30);
        let density: f64 = rng.random_range(0.05..0.35);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a != b && rng.random::<f64>() < density / 2.0 {
                    edges.push((a, b, rng.random_range(1..=5)));
                }
            }
        }
        if let Some(msg) = compare_graph(n, &edges) {
            return outcome(false, msg);
        }
        checked += 1;
    }
    outcome(true, format!("{checked} graphs, 11 metrics each, tolerance 1e-9"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let w = 200;
    for trial in 0..1000 {
        let vocab = rng.random_range(1..=250);
        let lemmas: Vec<String> = (0..w).map(|_| format!("w{}", rng.random_range(0..vocab))).collect();
        let p = &partition_lemmas("b", &lemmas, w).unwrap()[0];
        let g = CooccurrenceNetwork::from_lemmas(&p.lemmas);
        let dups = p.lemmas.windows(2).filter(|x| x[0] == x[1]).count() as u64;
        let ok = g.total_weight() + dups == (w - 1) as u64
            && g.node_count() <= w
            && g.edge_count() < w
            && g.edges().iter().all(|e| e.0 != e.1);
        if !ok {
            return outcome(false, format!("trial {trial} (vocabulary {vocab}) violates the weight identity"));
        }
    }
    outcome(true, "1000 partitions, W=200: weights + repeats = W-1, N <= W, E <= W-1, no loops".into())
}

fn criterion_3() -> Outcome {
    let m = moments(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
    let want = [3.0, 1.58114, 0.0, 1.70747];
    if m.iter().zip(want).any(|(a, b)| (a - b).abs() > 1e-5) {
        return outcome(false, format!("[1..5] gave {m:?}"));
    }
    if moments(&[4.25; 9]).unwrap() != [4.25, 0.0, 0.0, 0.0] {
        return outcome(false, "constant series not (c, 0, 0, 0)".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..100 {
        let n = rng.random_range(5..200);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0f64).powi(3)).collect();
        let a: f64 = rng.random_range(-4.0..4.0);
        let b: f64 = rng.random_range(-10.0..10.0);
        let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let (mx, my) = (moments(&x).unwrap(), moments(&y).unwrap());
        let want = [a * mx[0] + b, a.abs() * mx[1], a * mx[2], a.abs() * mx[3]];
        for (i, (g, w)) in my.iter().zip(want).enumerate() {
            if (g - w).abs() > 1e-9 * w.abs().max(1.0) {
                return outcome(false, format!("trial {trial}, mu{}: {g} vs {w}", i + 1));
            }
        }
    }
    outcome(true, "[1..5] within 1e-5, constant exact, affine equivariance on 100 series within 1e-9".into())
}

fn criterion_4() -> Outcome {
    let t = 500;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    // Counts of correct decisions: [ADF asymptotic, ADF finite, AIC-lag ADF, KPSS].
    let (mut noise_ok, mut walk_ok) = ([0usize; 4], [0usize; 4]);
    for _ in 0..100 {
        let noise: Vec<f64> = (0..t).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut acc = 0.0;
        let walk: Vec<f64> = (0..t)
            .map(|_| {
                let step: f64 = StandardNormal.sample(&mut rng);
                acc += step;
                acc
            })
            .collect();
        let rejects = |x: &[f64]| {
            [
                adf_test(x, PValueVariant::Asymptotic).unwrap().p_value < 0.05,
                adf_test(x, PValueVariant::Finite).unwrap().p_value < 0.05,
                adf_test_with(x, PValueVariant::Asymptotic, LagSelection::Aic).unwrap().p_value < 0.05,
                kpss_test(x).unwrap().p_value < 0.05,
            ]
        };
        let (rn, rw) = (rejects(&noise), rejects(&walk));
        for i in 0..3 {
            noise_ok[i] += rn[i] as usize;
            walk_ok[i] += !rw[i] as usize;
        }
        noise_ok[3] += !rn[3] as usize;
        walk_ok[3] += rw[3] as usize;
    }
    // The AIC-lag form is reported but the criterion judges the Schwert-lag test.
    let judged = [0, 1, 3];
    let pass = judged.iter().all(|&i| noise_ok[i] >= 95 && walk_ok[i] >= 95);
    outcome(
        pass,
        format!(
            "T=500, 100 trials, need >= 95: ADF (asymptotic p) noise {} walk {}; ADF (finite p) noise {} walk {}; KPSS noise {} walk {}; [AIC-lag ADF, not judged: noise {} walk {}]",
            noise_ok[0], walk_ok[0], noise_ok[1], walk_ok[1], noise_ok[3], walk_ok[3], noise_ok[2], walk_ok[2]
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rows: Vec<Vec<f64>> = (0..60).map(|_| (0..6).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let (emb, model) = pca_fit_transform(&rows, 6).unwrap();
    let mut ortho = 0.0f64;
    for (i, a) in model.components.iter().enumerate() {
        for (j, b) in model.components.iter().enumerate() {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            ortho = ortho.max((dot - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    let back = model.inverse_transform(&emb);
    let recon = rows
        .iter()
        .zip(&back)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    let planar: Vec<Vec<f64>> = (0..60)
        .map(|_| {
            let (u, v): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            vec![u + 0.5 * v, 2.0 * v - u, 0.3 * u + 0.7 * v]
        })
        .collect();
    let (_, pm) = pca_fit_transform(&planar, 2).unwrap();
    let ratio = pm.eigenvalues[2] / pm.total_variance();
    outcome(
        ortho <= 1e-10 && recon <= 1e-8 && ratio <= 1e-8,
        format!("orthonormality error {ortho:.1e}, reconstruction error {recon:.1e}, planar third eigenvalue ratio {ratio:.1e}"),
    )
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(x: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..x.len()).collect();
        idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
        let mut r = vec![0.0; x.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
                j += 1;
            }
            for k in i..=j {
                r[idx[k]] = (i + j) as f64 / 2.0;
            }
            i = j + 1;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cloud: Vec<Vec<f64>> = (0..30)
        .map(|_| vec![rng.random_range(0.0..3.0), rng.random_range(0.0..2.0), rng.random_range(0.0..1.0)])
        .collect();
    let iso = isomap_embed(&cloud, 29, 2, false).unwrap();
    let mds = classical_mds(&euclidean_distances(&cloud), 2).unwrap();
    let mut mds_err = 0.0f64;
    for c in 0..2 {
        // Compare up to the sign of each axis.
        let same: f64 = iso.embedding.iter().zip(&mds.embedding).map(|(a, b)| (a[c] - b[c]).abs()).fold(0.0, f64::max);
        let flip: f64 = iso.embedding.iter().zip(&mds.embedding).map(|(a, b)| (a[c] + b[c]).abs()).fold(0.0, f64::max);
        mds_err = mds_err.max(same.min(flip));
    }

    // Plane folded at u = 2 into an L shape.
    let intrinsic: Vec<(f64, f64)> = (0..300).map(|_| (rng.random_range(0.0..4.0), rng.random_range(0.0..1.0))).collect();
    let bent: Vec<Vec<f64>> = intrinsic
        .iter()
        .map(|&(u, v)| if u < 2.0 { vec![u, 0.0, v] } else { vec![2.0, u - 2.0, v] })
        .collect();
    let model = isomap_embed(&bent, 8, 2, false).unwrap();
    let (mut geo, mut truth) = (Vec::new(), Vec::new());
    for i in 0..bent.len() {
        for j in i + 1..bent.len() {
            geo.push(model.geodesic[i][j]);
            truth.push(((intrinsic[i].0 - intrinsic[j].0).powi(2) + (intrinsic[i].1 - intrinsic[j].1).powi(2)).sqrt());
        }
    }
    let rho = spearman(&geo, &truth);
    let g = &model.geodesic;
    let mut violation = 0.0f64;
    for i in 0..g.len() {
        for j in 0..g.len() {
            for k in 0..g.len() {
                violation = violation.max(g[i][k] - g[i][j] - g[j][k]);
            }
        }
    }
    outcome(
        mds_err <= 1e-6 && rho > 0.95 && violation <= 1e-9,
        format!("Isomap vs MDS max error {mds_err:.1e}, bent-plane rank correlation {rho:.4}, triangle violation {violation:.1e}"),
    )
}

fn criterion_7() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    let rows: Vec<Vec<f64>> = (0..60).map(|i| vec![i as f64]).collect();
    let labels: Vec<String> = (0..60).map(|i| if i < 30 { "a" } else if i < 50 { "b" } else { "c" }.to_string()).collect();
    let zr = cross_validate(&ClassifierSpec::new(ClassifierKind::ZeroR, 1), &rows, &labels, 10, 7, Normalization::Full).unwrap();
    pass &= zr.scores.accuracy == 0.5 && zr.scores.micro_recall == zr.scores.accuracy;
    details.push(format!("0R {} (prior 0.5)", zr.scores.accuracy));

    let centers = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
    let (rows, labels) = gaussian_blobs(&centers, 50, 0.05, 7);
    for (kind, floor) in [
        (ClassifierKind::KNN, 0.95),
        (ClassifierKind::NB, 0.95),
        (ClassifierKind::RBFN, 0.95),
        (ClassifierKind::J48, 0.90),
    ] {
        let r = cross_validate(&ClassifierSpec::new(kind, 1), &rows, &labels, 10, 7, Normalization::Full).unwrap();
        let correct: usize = (0..r.classes.len()).map(|c| r.confusion[c][c]).sum();
        let identity = r.scores.micro_recall == correct as f64 / rows.len() as f64;
        pass &= r.scores.accuracy >= floor && identity;
        details.push(format!("{} {:.3}", kind.name(), r.scores.accuracy));
    }
    outcome(pass, details.join(", "))
}

fn criterion_8() -> Outcome {
    let classes: Vec<String> = (0..8).map(|c| format!("author{c}")).collect();
    let confusion: Vec<Vec<usize>> = (0..8)
        .map(|r| (0..8).map(|c| if c == r { 7 } else if c == (r + 1) % 8 { 3 } else { 0 }).collect())
        .collect();
    let s = score_confusion(&classes, &confusion);
    let per_class = s
        .per_class
        .iter()
        .all(|c| (c.tau, c.epsilon, c.gamma) == (7, 3, 3) && c.precision == 0.7 && c.recall == 0.7);
    let tol = 1e-12;
    let balanced = (s.micro_precision - s.macro_precision).abs() <= tol && (s.micro_recall - s.macro_recall).abs() <= tol;
    outcome(
        per_class && balanced,
        format!(
            "P_c = R_c = 0.7 exactly for all 8 classes; micro P {:.15} vs macro P {:.15} (tolerance 1e-12)",
            s.micro_precision, s.macro_precision
        ),
    )
}

fn criteria_9_and_10() -> (Outcome, Outcome) {
    let dir = tempfile::tempdir().unwrap();
    let manifest = common::desk_manifest(dir.path());
    let start = Instant::now();
    let first = run_experiment(common::desk_config(&manifest, &dir.path().join("run1")));
    let elapsed = start.elapsed();
    let (report, _) = match first {
        Ok(r) => r,
        Err(e) => {
            let o = outcome(false, format!("desk run failed: {e}"));
            return (o, outcome(false, "no first run".into()));
        }
    };
    let main4 = [ClassifierKind::J48, ClassifierKind::KNN, ClassifierKind::NB, ClassifierKind::RBFN];
    let wins = report
        .comparison
        .iter()
        .filter(|c| main4.contains(&c.classifier) && c.score_at_least_whole)
        .count();
    let best = report.best.as_ref().map_or(0.0, |b| b.success_rate);
    let shape = Configuration::ALL
        .iter()
        .all(|&conf| main4.iter().all(|&k| report.cell(conf, k).is_some()));
    let c9 = outcome(
        best >= 0.5 && wins >= 3 && shape && elapsed <= Duration::from_secs(600),
        format!(
            "{} books, best {:.3} ({}), score-based >= whole for {wins}/4, all 7 configurations present: {shape}, {:.0}s",
            report.books,
            best,
            report
                .best
                .as_ref()
                .map_or(String::new(), |b| format!("{} / {}", b.configuration.name(), b.classifier.name())),
            elapsed.as_secs_f64()
        ),
    );
    println!("{}", netauthor::pipeline::experiment::render_table(&report));

    let second = run_experiment(common::desk_config(&manifest, &dir.path().join("run2")));
    let c10 = match second {
        Ok(_) => {
            let same = ["report/experiment.json", "report/experiment.txt"].iter().all(|f| {
                fs::read(dir.path().join("run1").join(f)).ok() == fs::read(dir.path().join("run2").join(f)).ok()
            });
            outcome(same, format!("two fresh runs, report bytes identical: {same}"))
        }
        Err(e) => outcome(false, format!("second run failed: {e}")),
    };
    (c9, c10)
}

fn main() -> ExitCode {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let wanted = |i: usize| only.as_ref().is_none_or(|o| o.contains(&i));
    let titles = [
        "graph-metric oracle suite",
        "network construction identities",
        "moments",
        "stationarity calibration",
        "PCA",
        "Isomap",
        "classifier sanity",
        "scoring",
        "end-to-end desk experiment",
        "determinism",
    ];
    let singles: [fn() -> Outcome; 8] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
    ];
    let mut failed = 0;
    let mut report = |i: usize, o: Outcome, t: Duration| {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {i:>2} [{tag}] {} ({:.1}s): {}", titles[i - 1], t.as_secs_f64(), o.detail);
        failed += !o.pass as usize;
    };
    for (i, f) in singles.iter().enumerate() {
        if wanted(i + 1) {
            let t = Instant::now();
            let o = f();
            report(i + 1, o, t.elapsed());
        }
    }
    if wanted(9) || wanted(10) {
        let t = Instant::now();
        let (c9, c10) = criteria_9_and_10();
        let el = t.elapsed();
        report(9, c9, el);
        report(10, c10, el);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion/criteria failed");
        ExitCode::FAILURE
    }
}
