//! Supervised classifiers, stratified k-fold cross-validation and
//! precision/recall scoring.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featurespace::{AttributeSubset, FeatureMatrix, MinMaxScaler};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassifierKind {
    ZeroR,
    OneR,
    NB,
    KNN,
    J48,
    RBFN,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 6] = [
        ClassifierKind::ZeroR,
        ClassifierKind::OneR,
        ClassifierKind::NB,
        ClassifierKind::KNN,
        ClassifierKind::J48,
        ClassifierKind::RBFN,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::ZeroR => "0R",
            ClassifierKind::OneR => "1R",
            ClassifierKind::NB => "NB",
            ClassifierKind::KNN => "KNN",
            ClassifierKind::J48 => "J48",
            ClassifierKind::RBFN => "RBFN",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "0R" | "ZEROR" => Some(ClassifierKind::ZeroR),
            "1R" | "ONER" => Some(ClassifierKind::OneR),
            "NB" | "NAIVEBAYES" => Some(ClassifierKind::NB),
            "KNN" | "IBK" => Some(ClassifierKind::KNN),
            "J48" | "C45" | "C4.5" => Some(ClassifierKind::J48),
            "RBFN" | "RBF" => Some(ClassifierKind::RBFN),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub knn_k: usize,
    pub nb_variance_floor: f64,
    pub oner_min_bucket: usize,
    pub j48_min_leaf: usize,
    pub j48_confidence: f64,
    pub j48_prune: bool,
    pub rbfn_centers_per_class: usize,
    pub rbfn_min_width: f64,
    pub rbfn_max_epochs: usize,
    pub rbfn_tolerance: f64,
    pub rbfn_ridge: f64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            knn_k: 1,
            nb_variance_floor: 1e-9,
            oner_min_bucket: 6,
            j48_min_leaf: 2,
            j48_confidence: 0.25,
            j48_prune: true,
            rbfn_centers_per_class: 2,
            rbfn_min_width: 0.1,
            rbfn_max_epochs: 1000,
            rbfn_tolerance: 1e-6,
            rbfn_ridge: 1e-8,
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.knn_k == 0 {
            return bad("knn_k must be >= 1");
        }
        if !(self.nb_variance_floor > 0.0) {
            return bad("nb_variance_floor must be > 0");
        }
        if self.oner_min_bucket == 0 || self.j48_min_leaf == 0 {
            return bad("bucket and leaf sizes must be >= 1");
        }
        if !(self.j48_confidence > 0.0 && self.j48_confidence < 1.0) {
            return bad("j48_confidence must be in (0, 1)");
        }
        if self.rbfn_centers_per_class == 0 || !(self.rbfn_min_width > 0.0) {
            return bad("rbfn needs >= 1 center and a positive width floor");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub hyperparameters: Hyperparameters,
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind, seed: u64) -> Self {
        ClassifierSpec {
            kind,
            hyperparameters: Hyperparameters::default(),
            seed,
        }
    }
}

/// A trained model over dense numeric rows; labels are class indices.
pub trait Model: Send + Sync {
    fn predict(&self, row: &[f64]) -> usize;
}

fn class_counts(y: &[usize], n_classes: usize) -> Vec<usize> {
    let mut c = vec![0; n_classes];
    for &l in y {
        c[l] += 1;
    }
    c
}

/// Index of the maximum count; lowest index wins ties.
fn argmax_count(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

fn argmax_f64(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

struct Constant(usize);

impl Model for Constant {
    fn predict(&self, _: &[f64]) -> usize {
        self.0
    }
}

// One-attribute rule over equal-frequency buckets.
struct OneR {
    attribute: usize,
    /// Upper bounds of all buckets but the last.
    cuts: Vec<f64>,
    classes: Vec<usize>,
}

impl Model for OneR {
    fn predict(&self, row: &[f64]) -> usize {
        let v = row[self.attribute];
        let b = self.cuts.iter().position(|&c| v <= c).unwrap_or(self.cuts.len());
        self.classes[b]
    }
}

fn fit_oner(x: &[Vec<f64>], y: &[usize], n_classes: usize, min_bucket: usize) -> OneR {
    let d = x[0].len();
    let mut best: Option<(usize, OneR)> = None;
    for a in 0..d {
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.sort_by(|&i, &j| x[i][a].total_cmp(&x[j][a]).then(i.cmp(&j)));
        // Bucket boundaries as positions in `order`; never split equal values.
        let mut bounds: Vec<usize> = Vec::new();
        let mut start = 0;
        for pos in 1..order.len() {
            let prev = x[order[pos - 1]][a];
            let cur = x[order[pos]][a];
            if pos - start >= min_bucket && cur > prev && order.len() - pos >= min_bucket {
                bounds.push(pos);
                start = pos;
            }
        }
        let mut cuts = Vec::new();
        let mut classes = Vec::new();
        let mut errors = 0;
        let mut lo = 0;
        for hi in bounds.iter().copied().chain(std::iter::once(order.len())) {
            let mut counts = vec![0; n_classes];
            for &i in &order[lo..hi] {
                counts[y[i]] += 1;
            }
            let c = argmax_count(&counts);
            errors += (hi - lo) - counts[c];
            classes.push(c);
            if hi < order.len() {
                cuts.push((x[order[hi - 1]][a] + x[order[hi]][a]) / 2.0);
            }
            lo = hi;
        }
        // Merge neighbors that predict the same class.
        let mut mc: Vec<f64> = Vec::new();
        let mut mk: Vec<usize> = vec![classes[0]];
        for (i, &c) in classes.iter().enumerate().skip(1) {
            if c == *mk.last().unwrap() {
                continue;
            }
            mc.push(cuts[i - 1]);
            mk.push(c);
        }
        let rule = OneR {
            attribute: a,
            cuts: mc,
            classes: mk,
        };
        if best.as_ref().is_none_or(|(e, _)| errors < *e) {
            best = Some((errors, rule));
        }
    }
    best.expect("at least one attribute").1
}

struct GaussianNB {
    log_priors: Vec<f64>,
    means: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
}

impl Model for GaussianNB {
    fn predict(&self, row: &[f64]) -> usize {
        let scores: Vec<f64> = (0..self.log_priors.len())
            .map(|c| {
                if self.log_priors[c] == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                let ll: f64 = row
                    .iter()
                    .zip(&self.means[c])
                    .zip(&self.variances[c])
                    .map(|((x, m), v)| -0.5 * ((x - m).powi(2) / v + (2.0 * std::f64::consts::PI * v).ln()))
                    .sum();
                self.log_priors[c] + ll
            })
            .collect();
        argmax_f64(&scores)
    }
}

fn fit_nb(x: &[Vec<f64>], y: &[usize], n_classes: usize, floor: f64) -> GaussianNB {
    let d = x[0].len();
    let counts = class_counts(y, n_classes);
    let n = y.len() as f64;
    let mut means = vec![vec![0.0; d]; n_classes];
    let mut variances = vec![vec![0.0; d]; n_classes];
    for (row, &c) in x.iter().zip(y) {
        for j in 0..d {
            means[c][j] += row[j];
        }
    }
    for c in 0..n_classes {
        if counts[c] > 0 {
            means[c].iter_mut().for_each(|m| *m /= counts[c] as f64);
        }
    }
    for (row, &c) in x.iter().zip(y) {
        for j in 0..d {
            variances[c][j] += (row[j] - means[c][j]).powi(2);
        }
    }
    for c in 0..n_classes {
        for v in variances[c].iter_mut() {
            *v = (*v / counts[c].max(1) as f64).max(floor);
        }
    }
    GaussianNB {
        log_priors: counts
            .iter()
            .map(|&k| if k == 0 { f64::NEG_INFINITY } else { (k as f64 / n).ln() })
            .collect(),
        means,
        variances,
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

struct Knn {
    x: Vec<Vec<f64>>,
    y: Vec<usize>,
    k: usize,
    n_classes: usize,
}

impl Model for Knn {
    fn predict(&self, row: &[f64]) -> usize {
        let mut d: Vec<(f64, usize)> = self
            .x
            .iter()
            .enumerate()
            .map(|(i, r)| (squared_distance(r, row), i))
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let nearest = &d[..self.k.min(d.len())];
        let mut votes = vec![0usize; self.n_classes];
        for &(_, i) in nearest {
            votes[self.y[i]] += 1;
        }
        let top = *votes.iter().max().unwrap();
        // Among tied classes, the one owning the closest neighbor wins.
        nearest
            .iter()
            .map(|&(_, i)| self.y[i])
            .find(|&c| votes[c] == top)
            .unwrap()
    }
}

/// Errors a C4.5 pessimistic estimate adds to `e` observed errors out of `n`.
pub fn add_errs(n: f64, e: f64, cf: f64) -> f64 {
    if cf > 0.5 {
        return 0.0;
    }
    if e < 1.0 {
        let base = n * (1.0 - cf.powf(1.0 / n));
        if e == 0.0 {
            return base;
        }
        return base + e * (add_errs(n, 1.0, cf) - base);
    }
    if e + 0.5 >= n {
        return (n - e).max(0.0);
    }
    let z = normal_quantile(1.0 - cf);
    let f = (e + 0.5) / n;
    let r = (f + z * z / (2.0 * n) + z * (f / n - f * f / n + z * z / (4.0 * n * n)).sqrt()) / (1.0 + z * z / n);
    r * n - e
}

fn normal_quantile(p: f64) -> f64 {
    crate::serieslab::std_normal_quantile(p)
}

#[derive(Debug, Clone)]
enum Tree {
    Leaf {
        class: usize,
        counts: Vec<usize>,
    },
    Split {
        attribute: usize,
        threshold: f64,
        counts: Vec<usize>,
        left: Box<Tree>,
        right: Box<Tree>,
    },
}

impl Tree {
    fn counts(&self) -> &[usize] {
        match self {
            Tree::Leaf { counts, .. } | Tree::Split { counts, .. } => counts,
        }
    }

    fn predict(&self, row: &[f64]) -> usize {
        match self {
            Tree::Leaf { class, .. } => *class,
            Tree::Split {
                attribute,
                threshold,
                left,
                right,
                ..
            } => {
                if row[*attribute] <= *threshold {
                    left.predict(row)
                } else {
                    right.predict(row)
                }
            }
        }
    }

    /// Pessimistic error estimate of the subtree.
    fn estimated_errors(&self, cf: f64) -> f64 {
        match self {
            Tree::Leaf { .. } => leaf_estimate(self.counts(), cf),
            Tree::Split { left, right, .. } => left.estimated_errors(cf) + right.estimated_errors(cf),
        }
    }

    fn prune(self, cf: f64) -> Tree {
        match self {
            Tree::Leaf { .. } => self,
            Tree::Split {
                attribute,
                threshold,
                counts,
                left,
                right,
            } => {
                let left = left.prune(cf);
                let right = right.prune(cf);
                let subtree = left.estimated_errors(cf) + right.estimated_errors(cf);
                if leaf_estimate(&counts, cf) <= subtree + 0.1 {
                    Tree::Leaf {
                        class: argmax_count(&counts),
                        counts,
                    }
                } else {
                    Tree::Split {
                        attribute,
                        threshold,
                        counts,
                        left: Box::new(left),
                        right: Box::new(right),
                    }
                }
            }
        }
    }
}

fn leaf_estimate(counts: &[usize], cf: f64) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let e = (n - counts[argmax_count(counts)]) as f64;
    e + add_errs(n as f64, e, cf)
}

fn entropy(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

struct SplitCandidate {
    attribute: usize,
    threshold: f64,
    gain: f64,
    ratio: f64,
}

fn best_threshold(x: &[Vec<f64>], y: &[usize], idx: &[usize], a: usize, n_classes: usize, min_leaf: usize) -> Option<SplitCandidate> {
    let mut order = idx.to_vec();
    order.sort_by(|&i, &j| x[i][a].total_cmp(&x[j][a]).then(i.cmp(&j)));
    let total = class_counts(&order.iter().map(|&i| y[i]).collect::<Vec<_>>(), n_classes);
    let n = order.len();
    let base = entropy(&total);
    let mut left = vec![0usize; n_classes];
    let mut best: Option<(f64, usize)> = None;
    let mut cuts = 0usize;
    for pos in 1..n {
        left[y[order[pos - 1]]] += 1;
        if x[order[pos]][a] <= x[order[pos - 1]][a] {
            continue;
        }
        if pos < min_leaf || n - pos < min_leaf {
            continue;
        }
        cuts += 1;
        let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
        let w = pos as f64 / n as f64;
        let gain = base - w * entropy(&left) - (1.0 - w) * entropy(&right);
        if best.is_none_or(|(g, _)| gain > g + 1e-12) {
            best = Some((gain, pos));
        }
    }
    let (gain, pos) = best?;
    // Penalty for choosing among many thresholds.
    let gain = gain - (cuts as f64).log2() / n as f64;
    if gain <= 0.0 {
        return None;
    }
    let w = pos as f64 / n as f64;
    let split_info = -(w * w.log2() + (1.0 - w) * (1.0 - w).log2());
    Some(SplitCandidate {
        attribute: a,
        threshold: (x[order[pos - 1]][a] + x[order[pos]][a]) / 2.0,
        gain,
        ratio: gain / split_info,
    })
}

fn grow_tree(x: &[Vec<f64>], y: &[usize], idx: &[usize], n_classes: usize, min_leaf: usize) -> Tree {
    let counts = class_counts(&idx.iter().map(|&i| y[i]).collect::<Vec<_>>(), n_classes);
    let leaf = |counts: Vec<usize>| Tree::Leaf {
        class: argmax_count(&counts),
        counts,
    };
    if idx.len() < 2 * min_leaf || counts.iter().filter(|&&c| c > 0).count() <= 1 {
        return leaf(counts);
    }
    let candidates: Vec<SplitCandidate> = (0..x[0].len())
        .filter_map(|a| best_threshold(x, y, idx, a, n_classes, min_leaf))
        .collect();
    if candidates.is_empty() {
        return leaf(counts);
    }
    let mean_gain = candidates.iter().map(|c| c.gain).sum::<f64>() / candidates.len() as f64;
    let mut chosen: Option<&SplitCandidate> = None;
    for c in candidates.iter().filter(|c| c.gain >= mean_gain - 1e-12) {
        if chosen.is_none_or(|b| c.ratio > b.ratio + 1e-12) {
            chosen = Some(c);
        }
    }
    let c = chosen.expect("some candidate reaches the mean gain");
    let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| x[i][c.attribute] <= c.threshold);
    Tree::Split {
        attribute: c.attribute,
        threshold: c.threshold,
        counts,
        left: Box::new(grow_tree(x, y, &l, n_classes, min_leaf)),
        right: Box::new(grow_tree(x, y, &r, n_classes, min_leaf)),
    }
}

struct J48(Tree);

impl Model for J48 {
    fn predict(&self, row: &[f64]) -> usize {
        self.0.predict(row)
    }
}

fn fit_j48(x: &[Vec<f64>], y: &[usize], n_classes: usize, hp: &Hyperparameters) -> J48 {
    let idx: Vec<usize> = (0..x.len()).collect();
    let tree = grow_tree(x, y, &idx, n_classes, hp.j48_min_leaf);
    J48(if hp.j48_prune { tree.prune(hp.j48_confidence) } else { tree })
}

struct Rbfn {
    centers: Vec<Vec<f64>>,
    widths: Vec<f64>,
    /// One weight vector per class; the last entry is the bias.
    weights: Vec<Vec<f64>>,
}

impl Rbfn {
    fn activations(&self, row: &[f64]) -> Vec<f64> {
        let mut phi: Vec<f64> = self
            .centers
            .iter()
            .zip(&self.widths)
            .map(|(c, s)| (-squared_distance(c, row) / (2.0 * s * s)).exp())
            .collect();
        phi.push(1.0);
        phi
    }
}

impl Model for Rbfn {
    fn predict(&self, row: &[f64]) -> usize {
        let phi = self.activations(row);
        let scores: Vec<f64> = self
            .weights
            .iter()
            .map(|w| w.iter().zip(&phi).map(|(a, b)| a * b).sum())
            .collect();
        argmax_f64(&scores)
    }
}

/// Lloyd's k-means from a seeded choice of distinct initial points.
fn kmeans(points: &[&Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let k = k.min(points.len());
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.shuffle(rng);
    let mut centers: Vec<Vec<f64>> = order[..k].iter().map(|&i| points[i].clone()).collect();
    let mut assign = vec![usize::MAX; points.len()];
    for _ in 0..100 {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let mut best = 0;
            for c in 1..k {
                if squared_distance(p, &centers[c]) < squared_distance(p, &centers[best]) {
                    best = c;
                }
            }
            if assign[i] != best {
                assign[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        for (c, center) in centers.iter_mut().enumerate() {
            let members: Vec<&&Vec<f64>> = points.iter().zip(&assign).filter(|(_, &a)| a == c).map(|(p, _)| p).collect();
            if members.is_empty() {
                continue;
            }
            for (j, v) in center.iter_mut().enumerate() {
                *v = members.iter().map(|m| m[j]).sum::<f64>() / members.len() as f64;
            }
        }
    }
    (0..k)
        .map(|c| (0..points.len()).filter(|&i| assign[i] == c).collect())
        .filter(|m: &Vec<usize>| !m.is_empty())
        .collect()
}

fn fit_rbfn(x: &[Vec<f64>], y: &[usize], n_classes: usize, hp: &Hyperparameters, seed: u64) -> Rbfn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = x[0].len();
    let mut centers = Vec::new();
    let mut widths = Vec::new();
    for c in 0..n_classes {
        let mut points: Vec<&Vec<f64>> = x.iter().zip(y).filter(|(_, &l)| l == c).map(|(r, _)| r).collect();
        // Canonical order so seeding does not depend on training-row order.
        points.sort_by(|a, b| a.iter().zip(b.iter()).map(|(u, v)| u.total_cmp(v)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
        if points.is_empty() {
            continue;
        }
        for members in kmeans(&points, hp.rbfn_centers_per_class, &mut rng) {
            let center: Vec<f64> = (0..d)
                .map(|j| members.iter().map(|&i| points[i][j]).sum::<f64>() / members.len() as f64)
                .collect();
            let msd = members.iter().map(|&i| squared_distance(points[i], &center)).sum::<f64>() / members.len() as f64;
            widths.push(msd.sqrt().max(hp.rbfn_min_width));
            centers.push(center);
        }
    }
    let mut model = Rbfn {
        centers,
        widths,
        weights: Vec::new(),
    };
    let phi: Vec<Vec<f64>> = x.iter().map(|r| model.activations(r)).collect();
    let m = phi[0].len();
    let n = x.len() as f64;
    // Activations lie in [0, 1], so 4 / m bounds the inverse curvature.
    let lr = 4.0 / m as f64;
    model.weights = (0..n_classes)
        .map(|c| {
            let mut w = vec![0.0; m];
            for _ in 0..hp.rbfn_max_epochs {
                let mut grad = vec![0.0; m];
                for (p, &l) in phi.iter().zip(y) {
                    let z: f64 = w.iter().zip(p).map(|(a, b)| a * b).sum();
                    let err = 1.0 / (1.0 + (-z).exp()) - if l == c { 1.0 } else { 0.0 };
                    for (g, v) in grad.iter_mut().zip(p) {
                        *g += err * v;
                    }
                }
                let mut max_g = 0.0f64;
                for (g, wj) in grad.iter_mut().zip(&w) {
                    *g = *g / n + hp.rbfn_ridge * wj;
                    max_g = max_g.max(g.abs());
                }
                if max_g < hp.rbfn_tolerance {
                    break;
                }
                for (wj, g) in w.iter_mut().zip(&grad) {
                    *wj -= lr * g;
                }
            }
            w
        })
        .collect();
    model
}

/// Trains a model on class-index labels in `0..n_classes`.
pub fn fit(spec: &ClassifierSpec, x: &[Vec<f64>], y: &[usize], n_classes: usize) -> Result<Box<dyn Model>> {
    spec.hyperparameters.validate()?;
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::InvalidArgument("training set empty or mislabeled".into()));
    }
    let d = x[0].len();
    if x.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidArgument("inconsistent training columns".into()));
    }
    if y.iter().any(|&l| l >= n_classes) {
        return Err(Error::InvalidArgument("label out of range".into()));
    }
    let counts = class_counts(y, n_classes);
    if spec.kind == ClassifierKind::ZeroR || d == 0 || counts.iter().filter(|&&c| c > 0).count() == 1 {
        return Ok(Box::new(Constant(argmax_count(&counts))));
    }
    let hp = &spec.hyperparameters;
    Ok(match spec.kind {
        ClassifierKind::ZeroR => unreachable!(),
        ClassifierKind::OneR => Box::new(fit_oner(x, y, n_classes, hp.oner_min_bucket)),
        ClassifierKind::NB => Box::new(fit_nb(x, y, n_classes, hp.nb_variance_floor)),
        ClassifierKind::KNN => Box::new(Knn {
            x: x.to_vec(),
            y: y.to_vec(),
            k: hp.knn_k,
            n_classes,
        }),
        ClassifierKind::J48 => Box::new(fit_j48(x, y, n_classes, hp)),
        ClassifierKind::RBFN => Box::new(fit_rbfn(x, y, n_classes, hp, spec.seed)),
    })
}

pub fn train_predict(
    spec: &ClassifierSpec,
    train_x: &[Vec<f64>],
    train_y: &[usize],
    n_classes: usize,
    test_x: &[Vec<f64>],
) -> Result<Vec<usize>> {
    let model = fit(spec, train_x, train_y, n_classes)?;
    if test_x.iter().any(|r| r.len() != train_x[0].len()) {
        return Err(Error::InvalidArgument("test columns differ from training".into()));
    }
    Ok(test_x.iter().map(|r| model.predict(r)).collect())
}

/// Fold index per instance. Each class is shuffled with the seed and dealt
/// round-robin, continuing where the previous class stopped, so folds differ
/// by at most one instance overall and per class.
pub fn stratified_kfold<S: AsRef<str>>(labels: &[S], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k={k}: need at least 2 folds")));
    }
    let classes: BTreeSet<&str> = labels.iter().map(AsRef::as_ref).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; labels.len()];
    let mut pos = 0;
    for class in classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i].as_ref() == class).collect();
        if members.len() < 2 {
            return Err(Error::TooFewInstances {
                class: class.to_string(),
                count: members.len(),
            });
        }
        members.shuffle(&mut rng);
        for i in members {
            folds[i] = pos % k;
            pos += 1;
        }
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub class: String,
    pub instances: usize,
    /// True positives.
    pub tau: usize,
    /// False positives.
    pub epsilon: usize,
    /// False negatives.
    pub gamma: usize,
    pub precision: f64,
    pub recall: f64,
    /// Set when nothing was predicted as this class, so precision is 0 by convention.
    pub precision_undefined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub per_class: Vec<ClassScore>,
    pub micro_precision: f64,
    pub micro_recall: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub accuracy: f64,
}

/// Scores a confusion matrix whose rows are actual and columns predicted
/// classes.
pub fn score_confusion(classes: &[String], confusion: &[Vec<usize>]) -> Scores {
    let k = classes.len();
    let total: usize = confusion.iter().flatten().sum();
    let per_class: Vec<ClassScore> = (0..k)
        .map(|c| {
            let instances: usize = confusion[c].iter().sum();
            let tau = confusion[c][c];
            let predicted: usize = (0..k).map(|r| confusion[r][c]).sum();
            let epsilon = predicted - tau;
            let gamma = instances - tau;
            ClassScore {
                class: classes[c].clone(),
                instances,
                tau,
                epsilon,
                gamma,
                precision: if predicted == 0 { 0.0 } else { tau as f64 / predicted as f64 },
                recall: if instances == 0 { 0.0 } else { tau as f64 / instances as f64 },
                precision_undefined: predicted == 0,
            }
        })
        .collect();
    let weighted = |f: fn(&ClassScore) -> f64| {
        if total == 0 {
            0.0
        } else {
            per_class.iter().map(|s| s.instances as f64 * f(s)).sum::<f64>() / total as f64
        }
    };
    let mean = |f: fn(&ClassScore) -> f64| {
        if k == 0 {
            0.0
        } else {
            per_class.iter().map(f).sum::<f64>() / k as f64
        }
    };
    let correct: usize = (0..k).map(|c| confusion[c][c]).sum();
    let accuracy = if total == 0 { 0.0 } else { correct as f64 / total as f64 };
    Scores {
        micro_precision: weighted(|s| s.precision),
        // Instance-weighted recall reduces to the overall hit rate.
        micro_recall: accuracy,
        macro_precision: mean(|s| s.precision),
        macro_recall: mean(|s| s.recall),
        accuracy,
        per_class,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Rows are used as given (already normalized over the full matrix).
    #[default]
    Full,
    /// Min-max bounds are refitted on each training fold.
    Train,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub spec: ClassifierSpec,
    /// Classifier actually trained; differs from `spec.kind` for empty subsets.
    pub effective_kind: ClassifierKind,
    pub attributes: Vec<usize>,
    pub classes: Vec<String>,
    /// Rows are actual classes, columns predicted classes.
    pub confusion: Vec<Vec<usize>>,
    pub scores: Scores,
    pub folds: Vec<usize>,
    pub k: usize,
    pub seed: u64,
    pub warnings: Vec<String>,
}

/// k-fold cross-validation on raw rows and string labels.
pub fn cross_validate(
    spec: &ClassifierSpec,
    rows: &[Vec<f64>],
    labels: &[String],
    k: usize,
    seed: u64,
    normalization: Normalization,
) -> Result<EvaluationReport> {
    if rows.len() != labels.len() || rows.is_empty() {
        return Err(Error::InvalidArgument("rows and labels must be non-empty and aligned".into()));
    }
    let classes: Vec<String> = labels.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let y: Vec<usize> = labels
        .iter()
        .map(|l| classes.binary_search(l).expect("label present"))
        .collect();
    let mut warnings = Vec::new();
    let folds = if classes.len() == 1 {
        warnings.push(format!("single class '{}': scores are trivially 1", classes[0]));
        (0..rows.len()).map(|i| i % k.max(2)).collect()
    } else {
        stratified_kfold(labels, k, seed)?
    };
    let mut effective = spec.clone();
    if rows[0].is_empty() && spec.kind != ClassifierKind::ZeroR {
        effective.kind = ClassifierKind::ZeroR;
        warnings.push(format!("empty attribute subset: {} replaced by 0R", spec.kind.name()));
    }
    let per_fold: Vec<Result<Vec<(usize, usize)>>> = (0..k.max(2))
        .into_par_iter()
        .map(|f| {
            let train: Vec<usize> = (0..rows.len()).filter(|&i| folds[i] != f).collect();
            let test: Vec<usize> = (0..rows.len()).filter(|&i| folds[i] == f).collect();
            if test.is_empty() {
                return Ok(Vec::new());
            }
            let mut tx: Vec<Vec<f64>> = train.iter().map(|&i| rows[i].clone()).collect();
            let ty: Vec<usize> = train.iter().map(|&i| y[i]).collect();
            let mut qx: Vec<Vec<f64>> = test.iter().map(|&i| rows[i].clone()).collect();
            if normalization == Normalization::Train && !tx[0].is_empty() {
                let scaler = MinMaxScaler::fit(&tx);
                tx = tx.iter().map(|r| scaler.transform(r)).collect();
                qx = qx.iter().map(|r| scaler.transform(r)).collect();
            }
            let mut fold_spec = effective.clone();
            fold_spec.seed = spec.seed.wrapping_add(f as u64);
            let pred = train_predict(&fold_spec, &tx, &ty, classes.len(), &qx)?;
            Ok(test.iter().map(|&i| y[i]).zip(pred).collect())
        })
        .collect();
    let mut confusion = vec![vec![0usize; classes.len()]; classes.len()];
    for fold in per_fold {
        for (actual, predicted) in fold? {
            confusion[actual][predicted] += 1;
        }
    }
    let scores = score_confusion(&classes, &confusion);
    for s in scores.per_class.iter().filter(|s| s.precision_undefined) {
        warnings.push(format!("class '{}' never predicted: precision set to 0", s.class));
    }
    Ok(EvaluationReport {
        spec: spec.clone(),
        effective_kind: effective.kind,
        attributes: Vec::new(),
        classes,
        confusion,
        scores,
        folds,
        k,
        seed,
        warnings,
    })
}

/// Cross-validates `spec` on the `subset` columns of `matrix`, labelled by author.
pub fn evaluate(
    spec: &ClassifierSpec,
    matrix: &FeatureMatrix,
    subset: &AttributeSubset,
    k: usize,
    seed: u64,
) -> Result<EvaluationReport> {
    evaluate_with(spec, matrix, subset, k, seed, Normalization::Full)
}

pub fn evaluate_with(
    spec: &ClassifierSpec,
    matrix: &FeatureMatrix,
    subset: &AttributeSubset,
    k: usize,
    seed: u64,
    normalization: Normalization,
) -> Result<EvaluationReport> {
    subset.validate(matrix.n_cols())?;
    let rows = matrix.select(&subset.indices);
    let labels = matrix.authors();
    let mut report = cross_validate(spec, &rows, &labels, k, seed, normalization)?;
    report.attributes = subset.indices.clone();
    Ok(report)
}

/// Draws `per_class` points around each center with isotropic noise `sigma`.
pub fn gaussian_blobs(centers: &[Vec<f64>], per_class: usize, sigma: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..per_class {
            rows.push(center.iter().map(|m| m + sigma * standard_normal(&mut rng)).collect());
            labels.push(format!("c{c}"));
        }
    }
    (rows, labels)
}

fn standard_normal(rng: &mut impl Rng) -> f64 {
    // Box-Muller; avoids ln(0).
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n_classes: usize, per: usize) -> Vec<String> {
        (0..n_classes).flat_map(|c| std::iter::repeat_n(format!("a{c}"), per)).collect()
    }

    #[test]
    fn folds_are_stratified() {
        let l = labels(8, 10);
        let f = stratified_kfold(&l, 10, 7).unwrap();
        for fold in 0..10 {
            for c in 0..8 {
                let n = (0..80).filter(|&i| f[i] == fold && l[i] == format!("a{c}")).count();
                assert_eq!(n, 1);
            }
        }
        assert_eq!(f, stratified_kfold(&l, 10, 7).unwrap());
        assert!(stratified_kfold(&l, 1, 7).is_err());
        let mut short = labels(2, 5);
        short.push("lonely".into());
        assert!(matches!(stratified_kfold(&short, 2, 0), Err(Error::TooFewInstances { .. })));
    }

    #[test]
    fn zero_r_on_balanced_classes() {
        let l = labels(8, 10);
        let rows: Vec<Vec<f64>> = (0..80).map(|i| vec![i as f64]).collect();
        let r = cross_validate(&ClassifierSpec::new(ClassifierKind::ZeroR, 0), &rows, &l, 10, 1, Normalization::Full).unwrap();
        assert_eq!(r.scores.accuracy, 0.125);
    }

    #[test]
    fn precision_arithmetic() {
        let classes: Vec<String> = (0..8).map(|c| format!("a{c}")).collect();
        // Each class: 7 right, 3 sent to the next class.
        let confusion: Vec<Vec<usize>> = (0..8)
            .map(|r| (0..8).map(|c| if c == r { 7 } else if c == (r + 1) % 8 { 3 } else { 0 }).collect())
            .collect();
        let s = score_confusion(&classes, &confusion);
        for c in &s.per_class {
            assert_eq!((c.tau, c.epsilon, c.gamma), (7, 3, 3));
            assert_eq!(c.precision, 0.7);
            assert_eq!(c.recall, 0.7);
        }
        assert!((s.micro_precision - s.macro_precision).abs() < 1e-12);
        assert!((s.micro_recall - s.macro_recall).abs() < 1e-12);
        assert!((s.micro_recall - s.accuracy).abs() < 1e-12);
    }

    #[test]
    fn undefined_precision_is_flagged() {
        let classes = vec!["a".to_string(), "b".to_string()];
        let s = score_confusion(&classes, &[vec![5, 0], vec![5, 0]]);
        assert!(s.per_class[1].precision_undefined);
        assert_eq!(s.per_class[1].precision, 0.0);
    }

    #[test]
    fn nb_on_separable_binary() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![(i % 2) as f64]).collect();
        let l: Vec<String> = (0..20).map(|i| format!("c{}", i % 2)).collect();
        let r = cross_validate(&ClassifierSpec::new(ClassifierKind::NB, 0), &rows, &l, 5, 3, Normalization::Full).unwrap();
        assert_eq!(r.scores.accuracy, 1.0);
    }

    #[test]
    fn knn_resubstitution() {
        let (rows, l) = gaussian_blobs(&[vec![0.0, 0.0], vec![0.3, 0.1]], 30, 0.2, 5);
        let y: Vec<usize> = l.iter().map(|s| (s == "c1") as usize).collect();
        let pred = train_predict(&ClassifierSpec::new(ClassifierKind::KNN, 0), &rows, &y, 2, &rows).unwrap();
        assert_eq!(pred, y);
    }

    #[test]
    fn all_classifiers_on_blobs() {
        let centers = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let (rows, l) = gaussian_blobs(&centers, 50, 0.05, 11);
        for kind in [ClassifierKind::OneR, ClassifierKind::NB, ClassifierKind::KNN, ClassifierKind::J48, ClassifierKind::RBFN] {
            let r = cross_validate(&ClassifierSpec::new(kind, 1), &rows, &l, 10, 2, Normalization::Full).unwrap();
            assert_eq!(r.scores.micro_recall, r.scores.accuracy);
            let floor = if kind == ClassifierKind::OneR { 0.4 } else { 0.9 };
            assert!(r.scores.accuracy >= floor, "{kind:?}: {}", r.scores.accuracy);
        }
    }

    #[test]
    fn pessimistic_errors() {
        assert!((normal_quantile(0.75) - 0.6744897501960817).abs() < 1e-9);
        assert!(add_errs(10.0, 0.0, 0.25) > 0.0);
        assert_eq!(add_errs(2.0, 2.0, 0.25), 0.0);
    }

    #[test]
    fn single_author_is_degenerate() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let l = vec!["solo".to_string(); 10];
        let r = cross_validate(&ClassifierSpec::new(ClassifierKind::KNN, 0), &rows, &l, 5, 0, Normalization::Full).unwrap();
        assert_eq!(r.scores.accuracy, 1.0);
        assert!(!r.warnings.is_empty());
    }
}
