//! Flat `section.key = value` run configuration.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::classify::{ClassifierKind, Normalization};
use crate::error::{Error, Result};
use crate::graphmetrics::DEFAULT_CLIQUE_CAP;
use crate::netbuild::DEFAULT_WINDOW;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub manifest: PathBuf,
    pub stopwords: Option<PathBuf>,
    pub lemma_dict: Option<PathBuf>,
    pub window: usize,
    pub window_grid: Vec<usize>,
    pub auto_window: bool,
    pub min_nodes: usize,
    pub clique_cap: u64,
    pub alpha: f64,
    /// Explicit variance thresholds; empty means every distinct column variance.
    pub theta_grid: Vec<f64>,
    pub beam_cap: usize,
    /// Fixed Isomap/PCA parameters; `None` runs the sweep.
    pub n_neighbors: Option<usize>,
    pub n_comps: Option<usize>,
    pub sweep_min: usize,
    pub sweep_max: usize,
    pub bridge: bool,
    pub classifiers: Vec<ClassifierKind>,
    pub folds: usize,
    pub normalization: Normalization,
    pub seed: u64,
    pub out: PathBuf,
}

impl PipelineConfig {
    pub fn new(manifest: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            manifest: manifest.into(),
            stopwords: None,
            lemma_dict: None,
            window: DEFAULT_WINDOW,
            window_grid: Vec::new(),
            auto_window: false,
            min_nodes: 0,
            clique_cap: DEFAULT_CLIQUE_CAP,
            alpha: 0.05,
            theta_grid: Vec::new(),
            beam_cap: 50,
            n_neighbors: None,
            n_comps: None,
            sweep_min: 2,
            sweep_max: 15,
            bridge: false,
            classifiers: vec![
                ClassifierKind::J48,
                ClassifierKind::KNN,
                ClassifierKind::NB,
                ClassifierKind::RBFN,
                ClassifierKind::ZeroR,
                ClassifierKind::OneR,
            ],
            folds: 10,
            normalization: Normalization::Full,
            seed: 1,
            out: out.into(),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| match e {
            Error::Parse { line, message, .. } => Error::Parse {
                path: path.to_path_buf(),
                line,
                message,
            },
            other => other,
        })
    }

    /// Parses config text; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut pairs: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: PathBuf::new(),
                line: i + 1,
                message,
            };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected key = value, got '{line}'")))?;
            let k = k.trim().to_string();
            if pairs.insert(k.clone(), (i + 1, v.trim().to_string())).is_some() {
                return Err(parse_err(format!("duplicate key '{k}'")));
            }
        }
        let manifest = pairs
            .get("corpus.manifest")
            .map(|(_, v)| base.join(v))
            .ok_or_else(|| Error::Config("corpus.manifest is required".into()))?;
        let mut cfg = PipelineConfig::new(manifest, base.join("out"));
        for (key, (line, v)) in &pairs {
            let bad = |what: &str| Error::Parse {
                path: PathBuf::new(),
                line: *line,
                message: format!("{key}: expected {what}, got '{v}'"),
            };
            let int = || v.parse::<usize>().map_err(|_| bad("a non-negative integer"));
            let boolean = || match v.as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(bad("true or false")),
            };
            match key.as_str() {
                "corpus.manifest" => {}
                "corpus.stopwords" => cfg.stopwords = Some(base.join(v)),
                "corpus.lemma_dict" => cfg.lemma_dict = Some(base.join(v)),
                "network.window" => cfg.window = int()?,
                "network.window_grid" => cfg.window_grid = parse_list(v).map_err(|_| bad("a comma-separated integer list"))?,
                "network.auto_window" => cfg.auto_window = boolean()?,
                "network.min_nodes" => cfg.min_nodes = int()?,
                "metrics.clique_cap" => cfg.clique_cap = v.parse().map_err(|_| bad("an integer"))?,
                "stationarity.alpha" => cfg.alpha = v.parse().map_err(|_| bad("a number"))?,
                "selection.theta_grid" => cfg.theta_grid = parse_list(v).map_err(|_| bad("a comma-separated number list"))?,
                "selection.beam_cap" => cfg.beam_cap = int()?,
                "reduction.n_neighbors" => cfg.n_neighbors = Some(int()?),
                "reduction.n_comps" => cfg.n_comps = Some(int()?),
                "reduction.sweep_min" => cfg.sweep_min = int()?,
                "reduction.sweep_max" => cfg.sweep_max = int()?,
                "reduction.bridge" => cfg.bridge = boolean()?,
                "classify.classifiers" => {
                    cfg.classifiers = v
                        .split(',')
                        .map(|s| ClassifierKind::parse(s).ok_or_else(|| bad("classifier names (J48, KNN, NB, RBFN, 0R, 1R)")))
                        .collect::<Result<_>>()?
                }
                "classify.folds" => cfg.folds = int()?,
                "classify.normalize" => {
                    cfg.normalization = match v.as_str() {
                        "full" => Normalization::Full,
                        "train" => Normalization::Train,
                        _ => return Err(bad("full or train")),
                    }
                }
                "run.seed" => cfg.seed = v.parse().map_err(|_| bad("an integer"))?,
                "run.out" => cfg.out = base.join(v),
                _ => {
                    return Err(Error::Parse {
                        path: PathBuf::new(),
                        line: *line,
                        message: format!("unknown key '{key}'"),
                    })
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.window < 2 {
            return fail(format!("network.window must be >= 2, got {}", self.window));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return fail(format!("stationarity.alpha must be in (0, 1), got {}", self.alpha));
        }
        if self.auto_window && self.window_grid.is_empty() {
            return fail("network.auto_window needs network.window_grid".into());
        }
        if self.folds < 2 {
            return fail(format!("classify.folds must be >= 2, got {}", self.folds));
        }
        if self.classifiers.is_empty() {
            return fail("classify.classifiers is empty".into());
        }
        if self.sweep_min < 1 || self.sweep_min > self.sweep_max {
            return fail(format!("bad sweep range {}..={}", self.sweep_min, self.sweep_max));
        }
        if self.beam_cap == 0 {
            return fail("selection.beam_cap must be >= 1".into());
        }
        Ok(())
    }

    /// Canonical `key = value` text, used for cache keys and echoed in reports.
    /// Paths are reduced to file names so relocating a run does not change it.
    pub fn canonical(&self) -> String {
        let name = |p: &Path| p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        let list = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        let mut kv = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        kv("corpus.manifest", name(&self.manifest));
        kv("corpus.stopwords", self.stopwords.as_deref().map(name).unwrap_or_else(|| "bundled".into()));
        kv("corpus.lemma_dict", self.lemma_dict.as_deref().map(name).unwrap_or_else(|| "bundled".into()));
        kv("network.window", self.window.to_string());
        kv("network.window_grid", list(&self.window_grid));
        kv("network.auto_window", self.auto_window.to_string());
        kv("network.min_nodes", self.min_nodes.to_string());
        kv("metrics.clique_cap", self.clique_cap.to_string());
        kv("stationarity.alpha", self.alpha.to_string());
        kv("selection.theta_grid", self.theta_grid.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
        kv("selection.beam_cap", self.beam_cap.to_string());
        kv("reduction.n_neighbors", self.n_neighbors.map_or("sweep".into(), |v| v.to_string()));
        kv("reduction.n_comps", self.n_comps.map_or("sweep".into(), |v| v.to_string()));
        kv("reduction.sweep_min", self.sweep_min.to_string());
        kv("reduction.sweep_max", self.sweep_max.to_string());
        kv("reduction.bridge", self.bridge.to_string());
        kv("classify.classifiers", self.classifiers.iter().map(|c| c.name()).collect::<Vec<_>>().join(","));
        kv("classify.folds", self.folds.to_string());
        kv(
            "classify.normalize",
            match self.normalization {
                Normalization::Full => "full".into(),
                Normalization::Train => "train".into(),
            },
        );
        kv("run.seed", self.seed.to_string());
        s
    }
}

fn parse_list<T: std::str::FromStr>(v: &str) -> std::result::Result<Vec<T>, ()> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| ()))
        .collect()
}
