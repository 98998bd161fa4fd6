use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use netauthor::pipeline::experiment::render_table;
use netauthor::pipeline::{PipelineConfig, Runner, Stage};

/// Authorship attribution from word co-occurrence network dynamics.
#[derive(Parser)]
#[command(name = "netauthor", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tokenize, tag, lemmatize and drop stopwords for every book.
    Preprocess(Common),
    /// Cut lemma streams into windows of W lemmas.
    Partition(Common),
    /// Build a network per window and compute its metrics.
    Metrics(Common),
    /// Assemble per-book metric series with moments and autocorrelation.
    Series(Common),
    /// Run the unit-root and stationarity test battery.
    Stationarity(Common),
    /// Build the raw and normalized 48-column feature matrix.
    Features(Common),
    /// Variance-threshold and score-based attribute selection.
    Select(Common),
    /// PCA and Isomap parameter sweeps and 2-D exports.
    Extract(Common),
    /// Cross-validate every classifier on every attribute configuration.
    Classify(Common),
    /// Run everything and write the experiment report.
    Experiment(Common),
}

#[derive(Args)]
struct Common {
    /// Run configuration (`section.key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `run.out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Run only this stage, reusing upstream outputs already on disk.
    #[arg(long)]
    stage_only: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (stage, common) = match cli.command {
        Command::Preprocess(c) => (Stage::Preprocess, c),
        Command::Partition(c) => (Stage::Partition, c),
        Command::Metrics(c) => (Stage::Metrics, c),
        Command::Series(c) => (Stage::Series, c),
        Command::Stationarity(c) => (Stage::Stationarity, c),
        Command::Features(c) => (Stage::Features, c),
        Command::Select(c) => (Stage::Select, c),
        Command::Extract(c) => (Stage::Extract, c),
        Command::Classify(c) => (Stage::Classify, c),
        Command::Experiment(c) => (Stage::Report, c),
    };
    match run(stage, &common) {
        Ok(warnings) if warnings.is_empty() => ExitCode::SUCCESS,
        Ok(warnings) => {
            for w in &warnings {
                log::warn!("{w}");
            }
            eprintln!("finished with {} warning(s)", warnings.len());
            ExitCode::from(2)
        }
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(1)
        }
    }
}

fn run(stage: Stage, common: &Common) -> netauthor::Result<Vec<String>> {
    let mut config = PipelineConfig::from_file(&common.config)?;
    if let Some(out) = &common.out {
        config.out = out.clone();
    }
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    let mut runner = Runner::new(config)?;
    let artifact = runner.run(stage, common.stage_only)?.clone();
    let state = if artifact.cached { "cached" } else { "computed" };
    println!("{} ({state}, {} files)", stage.name(), artifact.files.len());
    for f in &artifact.files {
        println!("  {}", runner.out().join(&f.path).display());
    }
    if stage == Stage::Report {
        let report = netauthor::pipeline::stages::read_json(&runner.out().join("report/experiment.json"))?;
        println!("\n{}", render_table(&report));
    }
    Ok(runner.warnings().to_vec())
}
