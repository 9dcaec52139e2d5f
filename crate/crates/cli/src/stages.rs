//! One function per subcommand. Each reads its inputs from the work directory,
//! replaces its own output directory and finishes by writing a manifest.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use lonesense_core::dataset::{
    build_windows, flatten, read_assessments, write_assessments, write_exclusions, FeatureWindow,
    FlatDataset,
};
use lonesense_core::eval::{compute_metrics, emit_report, MetricsReport, RfeSection};
use lonesense_core::features::{
    extract_all, read_feature_tables, write_feature_table, write_missing_table,
};
use lonesense_core::forest::{
    best_subset, run_rfe, write_best_subset, write_ranking, write_trace, RfeTrace,
};
use lonesense_core::ingest::{
    discover_sources, group_by_participant, ingest_sources, write_log, LogFormat, Roster,
};
use lonesense_core::llm::{
    read_predictions, run_experiment, write_predictions, write_recordings, BackendKind,
    ExperimentOptions, LlmBackend, PromptMode, ReplayBackend,
};
use lonesense_core::model::{AssessmentPoint, SensorKind};
use lonesense_core::synth::{generate_cohort, write_cohort};
use lonesense_core::FeatureCatalog;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::manifest::{read_manifest, write_manifest};

pub const FEATURES_FILE: &str = "daily_features.csv";
pub const FLAGS_FILE: &str = "missing_flags.csv";

/// Resolved configuration for one invocation.
pub struct Ctx {
    pub cfg: RunConfig,
    pub work: PathBuf,
    pub hash: String,
    pub quiet: bool,
}

impl Ctx {
    pub fn new(cfg: RunConfig, quiet: bool) -> Self {
        let hash = cfg.hash();
        Self {
            work: cfg.paths.work_dir.clone(),
            cfg,
            hash,
            quiet,
        }
    }

    pub fn dir(&self, name: &str) -> PathBuf {
        self.work.join(name)
    }

    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    pub fn catalog(&self) -> FeatureCatalog {
        self.cfg.extract.catalog()
    }

    fn manifest(&self, dir: &Path, stage: &str, inputs: &[PathBuf]) -> Result<(), CliError> {
        write_manifest(&self.work, dir, stage, &self.hash, inputs)?;
        Ok(())
    }
}

fn fresh_dir(dir: &Path) -> Result<(), CliError> {
    if dir.exists() {
        std::fs::remove_dir_all(dir).map_err(CliError::io(dir))?;
    }
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))
}

fn create(path: &Path) -> Result<File, CliError> {
    if let Some(p) = path.parent() {
        std::fs::create_dir_all(p).map_err(CliError::io(p))?;
    }
    File::create(path).map_err(CliError::io(path))
}

fn open(path: &Path, hint: &'static str) -> Result<File, CliError> {
    if !path.is_file() {
        return Err(CliError::MissingInput {
            path: path.to_path_buf(),
            hint,
        });
    }
    File::open(path).map_err(CliError::io(path))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(p) = path.parent() {
        std::fs::create_dir_all(p).map_err(CliError::io(p))?;
    }
    std::fs::write(path, text).map_err(CliError::io(path))
}

pub fn synth(ctx: &Ctx) -> Result<(), CliError> {
    let dir = ctx.dir("synth");
    let cohort = generate_cohort(&ctx.cfg.synth).map_err(|e| CliError::Config(e.to_string()))?;
    fresh_dir(&dir)?;
    write_cohort(&cohort, &dir, LogFormat::Delimited).map_err(|e| CliError::Io {
        path: dir.clone(),
        source: std::io::Error::other(e.to_string()),
    })?;
    ctx.say(format!(
        "synth: {} participants, {} events -> {}",
        ctx.cfg.synth.n_participants,
        cohort.events.len(),
        dir.display()
    ));
    ctx.manifest(&dir, "synth", &[])
}

pub fn ingest(ctx: &Ctx) -> Result<(), CliError> {
    let raw = ctx.cfg.raw_dir();
    let roster_path = raw.join("roster.csv");
    open(&roster_path, "synth")?;
    let roster = Roster::load(&roster_path).map_err(CliError::data)?;
    let sources = discover_sources(&raw, &roster);
    if sources.is_empty() {
        return Err(CliError::MissingInput {
            path: raw,
            hint: "synth (or point paths.raw_dir at sensor logs)",
        });
    }
    let (events, summary) = ingest_sources(&sources).map_err(CliError::data)?;
    let assess_path = ctx.cfg.assessments_path();
    let assessments = read_assessments(open(&assess_path, "synth (or set paths.assessments)")?)
        .map_err(CliError::data)?;

    let dir = ctx.dir("ingest");
    fresh_dir(&dir)?;
    let roster_out = dir.join("roster.csv");
    roster.write(create(&roster_out)?).map_err(CliError::data)?;
    for sensor in SensorKind::ALL {
        let p = dir.join(format!("{}.csv", sensor.slug()));
        write_log(create(&p)?, sensor, &events, LogFormat::Delimited).map_err(CliError::data)?;
    }
    write_assessments(create(&dir.join("assessments.csv"))?, &assessments)
        .map_err(CliError::data)?;
    write_text(
        &dir.join("report.json"),
        &(serde_json::to_string_pretty(&summary).expect("plain data") + "\n"),
    )?;
    ctx.say(format!(
        "ingest: {} rows read, {} events, {} rejected",
        summary.total.rows_read,
        summary.total.events_emitted,
        summary.total.rejects.len()
    ));
    let mut inputs: Vec<PathBuf> = sources.iter().map(|s| s.path.clone()).collect();
    inputs.push(roster_path);
    inputs.push(assess_path);
    ctx.manifest(&dir, "ingest", &inputs)
}

pub fn extract(ctx: &Ctx) -> Result<(), CliError> {
    let src = ctx.dir("ingest");
    let roster_path = src.join("roster.csv");
    open(&roster_path, "ingest")?;
    let roster = Roster::load(&roster_path).map_err(CliError::data)?;
    let sources = discover_sources(&src, &roster);
    let (events, _) = ingest_sources(&sources).map_err(CliError::data)?;
    let rows = extract_all(&group_by_participant(events), &roster, &ctx.cfg.extract);
    let catalog = ctx.catalog();

    let dir = ctx.dir("features");
    fresh_dir(&dir)?;
    write_feature_table(create(&dir.join(FEATURES_FILE))?, &catalog, &rows)
        .map_err(CliError::data)?;
    write_missing_table(create(&dir.join(FLAGS_FILE))?, &catalog, &rows).map_err(CliError::data)?;
    write_text(&dir.join("catalog.md"), &catalog.reference_doc())?;
    ctx.say(format!(
        "extract: {} participant-days x {} features",
        rows.len(),
        catalog.len()
    ));
    let mut inputs: Vec<PathBuf> = sources.iter().map(|s| s.path.clone()).collect();
    inputs.push(roster_path);
    ctx.manifest(&dir, "extract", &inputs)
}

fn load_assessments(ctx: &Ctx) -> Result<Vec<AssessmentPoint>, CliError> {
    read_assessments(open(&ctx.dir("ingest").join("assessments.csv"), "ingest")?)
        .map_err(CliError::data)
}

/// Daily features and assessments joined into coverage-filtered windows.
pub fn load_windows(
    ctx: &Ctx,
) -> Result<(Vec<FeatureWindow>, Vec<lonesense_core::dataset::Exclusion>), CliError> {
    let dir = ctx.dir("features");
    let catalog = ctx.catalog();
    let rows = read_feature_tables(
        open(&dir.join(FEATURES_FILE), "extract")?,
        open(&dir.join(FLAGS_FILE), "extract")?,
        &catalog,
    )
    .map_err(CliError::data)?;
    let assessments = load_assessments(ctx)?;
    Ok(build_windows(
        &rows,
        &assessments,
        &catalog,
        &ctx.cfg.coverage,
    ))
}

pub fn assemble(ctx: &Ctx) -> Result<(), CliError> {
    let (windows, exclusions) = load_windows(ctx)?;
    let data = flatten(&windows, &ctx.catalog(), ctx.cfg.rfe.target);
    let dir = ctx.dir("dataset");
    fresh_dir(&dir)?;
    data.write_csv(create(&dir.join("dataset.csv"))?)
        .map_err(CliError::data)?;
    write_exclusions(create(&dir.join("exclusions.csv"))?, &exclusions).map_err(CliError::data)?;
    ctx.say(format!(
        "assemble: {} windows x {} columns, {} excluded by coverage",
        data.n_rows(),
        data.n_cols(),
        exclusions.len()
    ));
    let f = ctx.dir("features");
    ctx.manifest(
        &dir,
        "assemble",
        &[
            f.join(FEATURES_FILE),
            f.join(FLAGS_FILE),
            ctx.dir("ingest").join("assessments.csv"),
        ],
    )
}

pub fn train_rfe(ctx: &Ctx) -> Result<(), CliError> {
    let path = ctx.dir("dataset").join("dataset.csv");
    let data = FlatDataset::read_csv(open(&path, "assemble")?).map_err(CliError::data)?;
    if data.target != ctx.cfg.rfe.target {
        return Err(CliError::Data(format!(
            "dataset target is {} but rfe.target is {}; rerun assemble",
            data.target, ctx.cfg.rfe.target
        )));
    }
    let catalog = ctx.catalog();
    let root = ctx.dir("rfe");
    fresh_dir(&root)?;
    for &stage in &ctx.cfg.rfe.stages {
        let subset = data.stage(stage);
        let trace = run_rfe(&subset, &ctx.cfg.forest, &ctx.cfg.rfe.core())
            .map_err(|e| CliError::Data(format!("{stage}: {e}")))?;
        let dir = root.join(stage.slug());
        write_trace(create(&dir.join("trace.csv"))?, &trace).map_err(CliError::data)?;
        write_ranking(create(&dir.join("ranking.csv"))?, &trace).map_err(CliError::data)?;
        write_best_subset(
            create(&dir.join("best_subset.csv"))?,
            &best_subset(&trace, &catalog),
        )
        .map_err(CliError::data)?;
        write_text(
            &dir.join("trace.json"),
            &(serde_json::to_string_pretty(&trace).expect("plain data") + "\n"),
        )?;
        let best = trace.argmin();
        ctx.say(format!(
            "train-rfe {stage}: {} rows, best cv_mae {:.2} with {} features",
            trace.n_rows,
            best.cv_mae,
            best.remaining.len()
        ));
    }
    ctx.manifest(&root, "train-rfe", &[path])
}

/// `None` means every configured sensor.
pub fn predict_llm(
    ctx: &Ctx,
    mode: PromptMode,
    sensor: Option<SensorKind>,
) -> Result<(), CliError> {
    let (windows, _) = load_windows(ctx)?;
    let backend = build_backend(ctx)?;
    let sensors = match sensor {
        Some(s) => vec![s],
        None => ctx.cfg.llm.sensors.clone(),
    };
    let opts = ExperimentOptions {
        mode,
        sensors: sensors.clone(),
        target_stage: ctx.cfg.llm.target_stage,
        example_stage: ctx.cfg.llm.example_stage,
        max_retries: ctx.cfg.backend.max_retries,
        max_in_flight: ctx
            .cfg
            .backend
            .max_in_flight
            .min(ctx.cfg.jobs.unwrap_or(usize::MAX))
            .max(1),
    };
    let out = run_experiment(&windows, &ctx.catalog(), &opts, backend.as_ref())
        .map_err(|e| CliError::Backend(e.to_string()))?;

    let dir = ctx.dir("llm").join(mode.slug());
    if sensor.is_none() {
        fresh_dir(&dir)?;
    }
    for s in &sensors {
        let prompts = dir
            .join("prompts")
            .join(ctx.cfg.llm.target_stage.slug())
            .join(s.slug());
        if prompts.exists() {
            std::fs::remove_dir_all(&prompts).map_err(CliError::io(&prompts))?;
        }
        let rows: Vec<_> = out
            .rows
            .iter()
            .filter(|r| r.sensor == *s)
            .cloned()
            .collect();
        let p = dir.join("predictions").join(format!("{}.jsonl", s.slug()));
        write_predictions(create(&p)?, &rows).map_err(CliError::io(&p))?;
        let recs: BTreeMap<String, String> = rows
            .iter()
            .filter_map(|r| {
                out.recordings
                    .get(&r.prompt_hash)
                    .map(|v| (r.prompt_hash.clone(), v.clone()))
            })
            .collect();
        let p = dir.join("responses").join(format!("{}.jsonl", s.slug()));
        write_recordings(create(&p)?, &recs).map_err(CliError::io(&p))?;
    }
    for pf in &out.prompts {
        write_text(&dir.join("prompts").join(&pf.rel_path), &pf.text)?;
    }
    ctx.say(format!(
        "predict-llm {mode}: {} predictions via {}, {} invalid, {} skipped without example",
        out.rows.len(),
        backend.name(),
        out.invalid_count(),
        out.skipped.len()
    ));
    let f = ctx.dir("features");
    ctx.manifest(
        &dir,
        "predict-llm",
        &[
            f.join(FEATURES_FILE),
            f.join(FLAGS_FILE),
            ctx.dir("ingest").join("assessments.csv"),
        ],
    )
}

fn jsonl_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    if !dir.is_dir() {
        return Ok(vec![]);
    }
    Ok(crate::manifest::files_under(dir)?
        .into_iter()
        .filter(|p| p.extension().is_some_and(|e| e == "jsonl"))
        .collect())
}

fn build_backend(ctx: &Ctx) -> Result<Box<dyn LlmBackend>, CliError> {
    let b = &ctx.cfg.backend;
    if b.backend != BackendKind::Replay {
        return b.build().map_err(|e| match e {
            lonesense_core::llm::BackendError::Config(m) => CliError::Config(m),
            other => CliError::Backend(other.to_string()),
        });
    }
    let src = b.replay_path.clone().unwrap_or_else(|| ctx.dir("llm"));
    let files = if src.is_dir() {
        jsonl_files(&src)?
            .into_iter()
            .filter(|p| {
                p.parent()
                    .and_then(|d| d.file_name())
                    .is_some_and(|n| n == "responses")
            })
            .collect()
    } else if src.is_file() {
        vec![src.clone()]
    } else {
        vec![]
    };
    if files.is_empty() {
        return Err(CliError::MissingInput {
            path: src,
            hint: "predict-llm with a recording backend",
        });
    }
    let mut map = BTreeMap::new();
    for f in files {
        let r = ReplayBackend::load(&f).map_err(|e| CliError::Backend(e.to_string()))?;
        map.extend(r.into_map());
    }
    Ok(Box::new(ReplayBackend::new(map)))
}

fn check_hash(ctx: &Ctx, dir: &Path, force: bool) -> Result<(), CliError> {
    if let Some(m) = read_manifest(dir)? {
        if m.config_hash != ctx.hash {
            let msg = format!(
                "{} was produced by config {} but the current config is {}",
                dir.display(),
                &m.config_hash[..12.min(m.config_hash.len())],
                &ctx.hash[..12]
            );
            if force {
                ctx.say(format!("warning: {msg}"));
            } else {
                return Err(CliError::HashMismatch(msg));
            }
        }
    }
    Ok(())
}

pub fn evaluate(ctx: &Ctx, force: bool) -> Result<(), CliError> {
    let llm = ctx.dir("llm");
    let mut files = Vec::new();
    for mode in [PromptMode::ZeroShot, PromptMode::OneShot] {
        let d = llm.join(mode.slug());
        if d.is_dir() {
            check_hash(ctx, &d, force)?;
            files.extend(jsonl_files(&d.join("predictions"))?);
        }
    }
    if files.is_empty() {
        return Err(CliError::MissingInput {
            path: llm,
            hint: "predict-llm",
        });
    }
    let mut rows = Vec::new();
    for f in &files {
        let r = read_predictions(BufReader::new(File::open(f).map_err(CliError::io(f))?))
            .map_err(|e| CliError::Data(format!("{}: {e}", f.display())))?;
        rows.extend(r);
    }
    let assessments = load_assessments(ctx)?;
    let metrics =
        compute_metrics(&rows, &assessments, ctx.cfg.llm.reverse_coded).map_err(CliError::data)?;
    let dir = ctx.dir("eval");
    fresh_dir(&dir)?;
    write_text(
        &dir.join("metrics.json"),
        &(serde_json::to_string_pretty(&metrics).expect("plain data") + "\n"),
    )?;
    let dropped: usize = metrics
        .excluded
        .iter()
        .map(|e| e.invalid + e.no_truth)
        .sum();
    ctx.say(format!(
        "evaluate: {} participants, {} sensor rows, {} predictions excluded",
        metrics.n_participants,
        metrics.sensors.len(),
        dropped
    ));
    files.push(ctx.dir("ingest").join("assessments.csv"));
    ctx.manifest(&dir, "evaluate", &files)
}

pub fn report(ctx: &Ctx, force: bool) -> Result<(), CliError> {
    let mut inputs = Vec::new();
    let eval_dir = ctx.dir("eval");
    let metrics_path = eval_dir.join("metrics.json");
    let metrics: Option<MetricsReport> = if metrics_path.is_file() {
        check_hash(ctx, &eval_dir, force)?;
        let text = std::fs::read_to_string(&metrics_path).map_err(CliError::io(&metrics_path))?;
        inputs.push(metrics_path.clone());
        Some(
            serde_json::from_str(&text)
                .map_err(|e| CliError::Data(format!("{}: {e}", metrics_path.display())))?,
        )
    } else {
        None
    };
    let rfe_root = ctx.dir("rfe");
    let mut sections = Vec::new();
    if rfe_root.is_dir() {
        check_hash(ctx, &rfe_root, force)?;
        for stage in lonesense_core::model::Stage::ALL {
            let p = rfe_root.join(stage.slug()).join("trace.json");
            if p.is_file() {
                let text = std::fs::read_to_string(&p).map_err(CliError::io(&p))?;
                let trace: RfeTrace = serde_json::from_str(&text)
                    .map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
                sections.push(RfeSection {
                    label: stage.slug().to_string(),
                    trace,
                });
                inputs.push(p);
            }
        }
    }
    if metrics.is_none() && sections.is_empty() {
        return Err(CliError::MissingInput {
            path: ctx.work.clone(),
            hint: "evaluate or train-rfe",
        });
    }
    let dir = ctx.dir("report");
    fresh_dir(&dir)?;
    emit_report(metrics.as_ref(), &sections, &ctx.catalog(), &dir).map_err(|e| match e.kind() {
        std::io::ErrorKind::InvalidInput => CliError::Data(e.to_string()),
        _ => CliError::Io {
            path: dir.clone(),
            source: e,
        },
    })?;
    ctx.say(format!("report: written to {}", dir.display()));
    ctx.manifest(&dir, "report", &inputs)
}

pub fn pipeline(ctx: &Ctx, force: bool) -> Result<(), CliError> {
    if ctx.cfg.paths.raw_dir.is_none() {
        synth(ctx)?;
    }
    ingest(ctx)?;
    extract(ctx)?;
    assemble(ctx)?;
    train_rfe(ctx)?;
    for &mode in &ctx.cfg.llm.modes {
        predict_llm(ctx, mode, None)?;
    }
    if ctx.cfg.llm.modes.is_empty() {
        let stale = ctx.dir("eval");
        if stale.exists() {
            std::fs::remove_dir_all(&stale).map_err(CliError::io(&stale))?;
        }
    } else {
        evaluate(ctx, force)?;
    }
    report(ctx, force)
}
