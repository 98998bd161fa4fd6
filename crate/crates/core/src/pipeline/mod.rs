//! Stage orchestration with content-hash caching, and the experiment harness.
//!
//! Every stage writes plain files under `<out>/<stage>/` and a cache manifest
//! at `<out>/cache/<stage>.json`. A stage is skipped when the hash of its
//! parameters and upstream outputs matches the manifest and all recorded
//! output files still hash to their recorded values.

pub mod config;
pub mod experiment;
pub mod stages;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::PipelineConfig;
pub use experiment::{Configuration, ConfigurationResult, ExperimentReport, ReportCell};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Preprocess,
    Partition,
    Metrics,
    Series,
    Stationarity,
    Features,
    Select,
    Extract,
    Classify,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 10] = [
        Stage::Preprocess,
        Stage::Partition,
        Stage::Metrics,
        Stage::Series,
        Stage::Stationarity,
        Stage::Features,
        Stage::Select,
        Stage::Extract,
        Stage::Classify,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Preprocess => "preprocess",
            Stage::Partition => "partition",
            Stage::Metrics => "metrics",
            Stage::Series => "series",
            Stage::Stationarity => "stationarity",
            Stage::Features => "features",
            Stage::Select => "select",
            Stage::Extract => "extract",
            Stage::Classify => "classify",
            Stage::Report => "report",
        }
    }

    pub fn parse(s: &str) -> Option<Stage> {
        Stage::ALL.into_iter().find(|st| st.name() == s)
    }

    pub fn upstream(self) -> &'static [Stage] {
        match self {
            Stage::Preprocess => &[],
            Stage::Partition => &[Stage::Preprocess],
            Stage::Metrics => &[Stage::Partition],
            Stage::Series => &[Stage::Metrics],
            Stage::Stationarity | Stage::Features => &[Stage::Series],
            Stage::Select | Stage::Extract => &[Stage::Features],
            Stage::Classify => &[Stage::Features, Stage::Select, Stage::Extract],
            Stage::Report => &[Stage::Classify, Stage::Stationarity],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    /// Relative to the output directory.
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunArtifact {
    pub stage: Stage,
    /// Hash of the stage parameters and upstream content hashes.
    pub key: String,
    /// Hash over the output file records.
    pub content_hash: String,
    pub files: Vec<FileRecord>,
    pub upstream: Vec<String>,
    pub warnings: Vec<String>,
    /// Whether this run reused the cached outputs.
    #[serde(skip)]
    pub cached: bool,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn hash_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path).map_err(|e| Error::io(path, e))?))
}

pub struct Runner {
    pub config: PipelineConfig,
    artifacts: BTreeMap<Stage, RunArtifact>,
    warnings: Vec<String>,
}

impl Runner {
    pub fn new(config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        fs::create_dir_all(config.out.join("cache")).map_err(|e| Error::io(&config.out, e))?;
        Ok(Runner {
            config,
            artifacts: BTreeMap::new(),
            warnings: Vec::new(),
        })
    }

    pub fn out(&self) -> &Path {
        &self.config.out
    }

    /// Warnings from every stage touched so far, in execution order.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn artifact(&self, stage: Stage) -> Option<&RunArtifact> {
        self.artifacts.get(&stage)
    }

    /// Runs `stage`, first running (or reusing) its upstream stages. With
    /// `stage_only`, upstream artifacts must already exist on disk.
    pub fn run(&mut self, stage: Stage, stage_only: bool) -> Result<&RunArtifact> {
        if stage_only {
            for &up in stage.upstream() {
                self.load_existing(up)?;
            }
            self.execute(stage)?;
        } else {
            self.ensure(stage)?;
        }
        Ok(&self.artifacts[&stage])
    }

    fn ensure(&mut self, stage: Stage) -> Result<()> {
        if self.artifacts.contains_key(&stage) {
            return Ok(());
        }
        for &up in stage.upstream() {
            self.ensure(up)?;
        }
        self.execute(stage)
    }

    fn manifest_path(&self, stage: Stage) -> PathBuf {
        self.out().join("cache").join(format!("{}.json", stage.name()))
    }

    fn read_manifest(&self, stage: Stage) -> Option<RunArtifact> {
        let text = fs::read_to_string(self.manifest_path(stage)).ok()?;
        let a: RunArtifact = serde_json::from_str(&text).ok()?;
        let intact = a
            .files
            .iter()
            .all(|f| hash_file(&self.out().join(&f.path)).is_ok_and(|h| h == f.sha256));
        intact.then_some(a)
    }

    fn load_existing(&mut self, stage: Stage) -> Result<()> {
        if self.artifacts.contains_key(&stage) {
            return Ok(());
        }
        let mut a = self.read_manifest(stage).ok_or_else(|| {
            Error::Config(format!(
                "no intact '{}' artifact in {}; run that stage first",
                stage.name(),
                self.out().display()
            ))
        })?;
        a.cached = true;
        self.warnings.extend(a.warnings.iter().cloned());
        self.artifacts.insert(stage, a);
        Ok(())
    }

    /// Text that, together with upstream hashes, determines a stage's output.
    fn parameters(&self, stage: Stage) -> Result<String> {
        let c = &self.config;
        let classify = format!(
            "classifiers={:?} folds={} normalize={:?} seed={}",
            c.classifiers, c.folds, c.normalization, c.seed
        );
        Ok(match stage {
            Stage::Preprocess => {
                let mut s = String::new();
                s.push_str(&format!("manifest={}\n", hash_file(&c.manifest)?));
                for e in crate::corpus::read_manifest(&c.manifest)? {
                    let h = hash_file(&e.path).unwrap_or_else(|_| "unreadable".into());
                    s.push_str(&format!("{},{},{}\n", e.author, e.doc, h));
                }
                for p in [&c.stopwords, &c.lemma_dict] {
                    let h = match p {
                        Some(p) => hash_file(p)?,
                        None => "bundled".into(),
                    };
                    s.push_str(&format!("{h}\n"));
                }
                s
            }
            Stage::Partition => format!(
                "window={} grid={:?} auto={} min_nodes={}",
                c.window, c.window_grid, c.auto_window, c.min_nodes
            ),
            Stage::Metrics => format!("clique_cap={}", c.clique_cap),
            Stage::Series | Stage::Features | Stage::Report => String::new(),
            Stage::Stationarity => format!("alpha={}", c.alpha),
            Stage::Select => format!("{classify} theta={:?} beam={}", c.theta_grid, c.beam_cap),
            Stage::Extract => format!(
                "{classify} nn={:?} nc={:?} sweep={}..={} bridge={}",
                c.n_neighbors, c.n_comps, c.sweep_min, c.sweep_max, c.bridge
            ),
            Stage::Classify => format!("{classify} sweep_max={} bridge={}", c.sweep_max, c.bridge),
        })
    }

    fn execute(&mut self, stage: Stage) -> Result<()> {
        let upstream: Vec<String> = stage
            .upstream()
            .iter()
            .map(|s| self.artifacts[s].content_hash.clone())
            .collect();
        let params = self.parameters(stage).map_err(|e| e.in_stage(stage.name()))?;
        let key = sha256_hex(format!("{}\n{}\n{}", stage.name(), params, upstream.join("\n")).as_bytes());
        if let Some(mut a) = self.read_manifest(stage).filter(|a| a.key == key) {
            log::info!("{}: inputs unchanged, reusing cached outputs", stage.name());
            a.cached = true;
            self.warnings.extend(a.warnings.iter().cloned());
            self.artifacts.insert(stage, a);
            return Ok(());
        }
        log::info!("{}: running", stage.name());
        let dir = self.out().join(stage.name());
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let produce = match stage {
            Stage::Preprocess => stages::preprocess,
            Stage::Partition => stages::partition,
            Stage::Metrics => stages::metrics,
            Stage::Series => stages::series,
            Stage::Stationarity => stages::stationarity,
            Stage::Features => stages::features,
            Stage::Select => stages::select,
            Stage::Extract => stages::extract,
            Stage::Classify => stages::classify,
            Stage::Report => stages::report,
        };
        let output = produce(&self.config, self.out()).map_err(|e| e.in_stage(stage.name()))?;
        let files: Vec<FileRecord> = output
            .files
            .iter()
            .map(|p| {
                Ok(FileRecord {
                    sha256: hash_file(&self.out().join(p))?,
                    path: p.clone(),
                })
            })
            .collect::<Result<_>>()?;
        let listing: String = files
            .iter()
            .map(|f| format!("{} {}\n", f.path.display(), f.sha256))
            .collect();
        let artifact = RunArtifact {
            stage,
            key,
            content_hash: sha256_hex(listing.as_bytes()),
            files,
            upstream,
            warnings: output.warnings,
            cached: false,
        };
        stages::write_json(&self.manifest_path(stage), &artifact)?;
        self.warnings.extend(artifact.warnings.iter().cloned());
        self.artifacts.insert(stage, artifact);
        Ok(())
    }
}

/// Runs every stage and returns the experiment report and collected warnings.
pub fn run_experiment(config: PipelineConfig) -> Result<(ExperimentReport, Vec<String>)> {
    let mut runner = Runner::new(config)?;
    runner.run(Stage::Report, false)?;
    let report = stages::read_json(&runner.out().join("report/experiment.json"))?;
    Ok((report, runner.warnings().to_vec()))
}
