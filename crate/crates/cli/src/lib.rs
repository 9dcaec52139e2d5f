//! `lonesense` command-line pipeline: synth, ingest, extract, assemble,
//! train-rfe, predict-llm, evaluate and report.

pub mod config;
pub mod error;
pub mod manifest;
pub mod stages;

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use lonesense_core::dataset::Target;
use lonesense_core::llm::{BackendKind, PromptMode};
use lonesense_core::model::{SensorKind, Stage};

pub use config::RunConfig;
pub use error::{exit, CliError};
use stages::Ctx;

#[derive(Debug, Parser)]
#[command(
    name = "lonesense",
    version,
    about = "Loneliness prediction from smartphone sensing"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// TOML run configuration; flags below override it.
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// Work directory holding every stage's artifacts.
    #[arg(long, short = 'w', global = true)]
    pub work_dir: Option<PathBuf>,
    /// Seed for the cohort generator, forests and fold assignment.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Upper bound on worker threads.
    #[arg(long, short = 'j', global = true)]
    pub jobs: Option<usize>,
    /// Suppress progress lines on stderr.
    #[arg(long, short, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Args, Default)]
pub struct BackendOpts {
    /// mock, replay or live.
    #[arg(long)]
    pub backend: Option<BackendKind>,
    /// Recorded responses (file or directory) for the replay backend.
    #[arg(long)]
    pub replay: Option<PathBuf>,
}

/// `all` or a sensor name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensorSel {
    All,
    One(SensorKind),
}

impl FromStr for SensorSel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            Ok(SensorSel::All)
        } else {
            s.parse().map(SensorSel::One).map_err(|e| e.to_string())
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic cohort into <work>/synth.
    Synth {
        /// Cohort size.
        #[arg(long)]
        participants: Option<usize>,
    },
    /// Parse and validate raw sensor logs into <work>/ingest.
    Ingest {
        /// Directory with roster.csv and <sensor>.csv / <sensor>.jsonl logs.
        #[arg(long)]
        raw_dir: Option<PathBuf>,
        /// Questionnaire CSV; defaults to assessments.csv in the raw directory.
        #[arg(long)]
        assessments: Option<PathBuf>,
    },
    /// Compute daily features into <work>/features.
    Extract,
    /// Build 14-day windows and the flat dataset into <work>/dataset.
    Assemble {
        /// `total` or `item1`..`item8`.
        /// `total` or `item1`..`item8`.
        #[arg(long)]
        target: Option<Target>,
    },
    /// Random forest with recursive feature elimination into <work>/rfe.
    TrainRfe {
        /// Features removed per elimination round.
        #[arg(long)]
        step: Option<usize>,
        /// Smallest subset the elimination reaches.
        #[arg(long)]
        min_features: Option<usize>,
        /// `total` or `item1`..`item8`.
        #[arg(long)]
        target: Option<Target>,
        /// Repeat to run several stages; defaults to the config.
        #[arg(long)]
        stage: Vec<Stage>,
    },
    /// Render prompts and query the LLM backend into <work>/llm/<mode>.
    PredictLlm {
        /// `zero` or `one`.
        #[arg(long)]
        mode: PromptMode,
        #[arg(long, default_value = "all")]
        sensor: SensorSel,
        #[command(flatten)]
        backend: BackendOpts,
    },
    /// Score predictions against the questionnaire into <work>/eval.
    Evaluate {
        /// Accept predictions produced under a different config hash.
        #[arg(long)]
        force: bool,
    },
    /// Write the report bundle into <work>/report.
    Report {
        /// Accept artifacts produced under a different config hash.
        #[arg(long)]
        force: bool,
    },
    /// Run every stage in order.
    Pipeline {
        #[command(flatten)]
        backend: BackendOpts,
        /// Ingest these logs instead of generating a synthetic cohort.
        #[arg(long)]
        raw_dir: Option<PathBuf>,
        /// Accept artifacts produced under a different config hash.
        #[arg(long)]
        force: bool,
    },
}

fn apply_backend(cfg: &mut RunConfig, b: &BackendOpts) {
    if let Some(k) = b.backend {
        cfg.backend.backend = k;
    }
    if let Some(p) = &b.replay {
        cfg.backend.replay_path = Some(p.clone());
    }
}

/// Effective configuration: file, then flags.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.global.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let g = &cli.global;
    if let Some(w) = &g.work_dir {
        cfg.paths.work_dir = w.clone();
    }
    if g.seed.is_some() {
        cfg.seed = g.seed;
    }
    if g.jobs.is_some() {
        cfg.jobs = g.jobs;
    }
    match &cli.command {
        Command::Synth { participants } => {
            if let Some(n) = participants {
                cfg.synth.n_participants = *n;
            }
        }
        Command::Ingest {
            raw_dir,
            assessments,
        } => {
            if raw_dir.is_some() {
                cfg.paths.raw_dir = raw_dir.clone();
            }
            if assessments.is_some() {
                cfg.paths.assessments = assessments.clone();
            }
        }
        Command::Assemble { target } => {
            if let Some(t) = target {
                cfg.rfe.target = *t;
            }
        }
        Command::TrainRfe {
            step,
            min_features,
            target,
            stage,
        } => {
            if let Some(s) = step {
                cfg.rfe.step = *s;
            }
            if let Some(m) = min_features {
                cfg.rfe.min_features = *m;
            }
            if let Some(t) = target {
                cfg.rfe.target = *t;
            }
            if !stage.is_empty() {
                cfg.rfe.stages = stage.clone();
            }
        }
        Command::PredictLlm { backend, .. } => apply_backend(&mut cfg, backend),
        Command::Pipeline {
            backend, raw_dir, ..
        } => {
            apply_backend(&mut cfg, backend);
            if raw_dir.is_some() {
                cfg.paths.raw_dir = raw_dir.clone();
            }
        }
        Command::Extract | Command::Evaluate { .. } | Command::Report { .. } => {}
    }
    cfg.apply_seed();
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = resolve_config(&cli)?;
    if let Some(j) = cfg.jobs {
        // Only the first call in a process can size the global pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global();
    }
    let ctx = Ctx::new(cfg, cli.global.quiet);
    std::fs::create_dir_all(&ctx.work).map_err(CliError::io(&ctx.work))?;
    let cfg_path = ctx.work.join("config.toml");
    std::fs::write(&cfg_path, ctx.cfg.to_toml()).map_err(CliError::io(&cfg_path))?;
    match cli.command {
        Command::Synth { .. } => stages::synth(&ctx),
        Command::Ingest { .. } => stages::ingest(&ctx),
        Command::Extract => stages::extract(&ctx),
        Command::Assemble { .. } => stages::assemble(&ctx),
        Command::TrainRfe { .. } => stages::train_rfe(&ctx),
        Command::PredictLlm { mode, sensor, .. } => {
            let sensor = match sensor {
                SensorSel::All => None,
                SensorSel::One(s) => Some(s),
            };
            stages::predict_llm(&ctx, mode, sensor)
        }
        Command::Evaluate { force } => stages::evaluate(&ctx, force),
        Command::Report { force } => stages::report(&ctx, force),
        Command::Pipeline { force, .. } => stages::pipeline(&ctx, force),
    }
}
