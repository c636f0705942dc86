//! `delbench`: file-based pipeline over the core library.
//!
//! Stages connect through JSONL files so closed-model responders can be
//! driven offline: `generate` makes instances, `solve` labels them,
//! `render` dumps prompts, `grade` scores collected raw replies, and
//! `evaluate`/`report` run responders and summarize records.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use delbench_core::config::{resolve_responder, AppConfig, ConfigError, GridConfig};
use delbench_core::harness::{
    compute_metrics, read_raw_responses, read_records, render_all, render_table, run_eval, to_csv,
    EvalOptions, HarnessError, MetricsError, MetricsReport,
};
use delbench_core::instance::{
    attach_ground_truth, enumerate_rung_grid, sample_rung3, InstanceError, InstanceRecord,
    LabeledInstance, PuzzleInstance, Rung,
};
use delbench_core::io::{read_jsonl, write_jsonl, FileMeta, IoError};
use delbench_core::narrative::{
    NamePool, NarrativeContext, NarrativeError, SettingsTable, TemplateSet,
};

#[derive(Parser)]
#[command(name = "delbench", version, about = "Announcement-puzzle benchmark pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate puzzle instances for one rung.
    Generate {
        /// Rung to generate: 1, 2, or 3.
        #[arg(long)]
        rung: u8,
        /// "paper" or a path to a grid TOML file.
        #[arg(long, default_value = "paper")]
        grid: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Instance count for rung 3 (defaults to the grid's count).
        #[arg(long)]
        count: Option<usize>,
        /// Name pool JSON (defaults to the built-in pool).
        #[arg(long)]
        names: Option<PathBuf>,
        /// Settings TOML (defaults to the built-in settings).
        #[arg(long)]
        settings: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Attach ground truth and per-round traces to generated instances.
    Solve {
        #[arg(long)]
        instances: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dump every instance's rendered prompt to a directory.
    Render {
        #[arg(long)]
        instances: PathBuf,
        #[arg(long)]
        templates: Option<PathBuf>,
        #[arg(long)]
        settings: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory for <id>.txt files plus a manifest.
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a file of raw replies collected offline.
    Grade {
        #[arg(long)]
        instances: PathBuf,
        /// JSONL of {"id", "response"} lines.
        #[arg(long)]
        responses: PathBuf,
        #[arg(long)]
        templates: Option<PathBuf>,
        #[arg(long)]
        settings: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a responder over labeled instances and write records.
    Evaluate {
        #[arg(long)]
        instances: PathBuf,
        /// oracle | constant:<yes|no|unknown> | scripted:<path> | remote:<name>
        #[arg(long)]
        responder: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        templates: Option<PathBuf>,
        #[arg(long)]
        settings: Option<PathBuf>,
        /// Records output path.
        #[arg(long)]
        out: PathBuf,
        /// Optional directory for report.json / report.txt / accuracy.csv.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Summarize a records file into metrics, a table, and CSV.
    Report {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Error classes with fixed exit codes; stderr carries one JSON line per
/// failure so scripts can parse it.
#[derive(Debug)]
enum CliError {
    Io(String),         // 3: missing/unreadable/unwritable files
    Schema(String),     // 4: file contents do not match the expected shape
    Config(String),     // 5: bad config, grid, templates, or selector
    Generation(String), // 6: inconsistent instances / over-constrained grids
    Remote(String),     // 7: credentials or endpoint spec
    EmptyInput(String), // 8: nothing to work on
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Io(_) => "io",
            CliError::Schema(_) => "schema",
            CliError::Config(_) => "config",
            CliError::Generation(_) => "generation",
            CliError::Remote(_) => "remote",
            CliError::EmptyInput(_) => "empty-input",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Io(m)
            | CliError::Schema(m)
            | CliError::Config(m)
            | CliError::Generation(m)
            | CliError::Remote(m)
            | CliError::EmptyInput(m) => m,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 3,
            CliError::Schema(_) => 4,
            CliError::Config(_) => 5,
            CliError::Generation(_) => 6,
            CliError::Remote(_) => 7,
            CliError::EmptyInput(_) => 8,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Io { .. } => CliError::Io(e.to_string()),
            IoError::Schema { .. } => CliError::Schema(e.to_string()),
            IoError::Empty { .. } => CliError::EmptyInput(e.to_string()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => CliError::Io(e.to_string()),
            ConfigError::Parse { .. } | ConfigError::UnknownResponder(_) => {
                CliError::Config(e.to_string())
            }
            ConfigError::Harness(inner) => CliError::from(inner),
        }
    }
}

impl From<NarrativeError> for CliError {
    fn from(e: NarrativeError) -> Self {
        match e {
            NarrativeError::Io { .. } => CliError::Io(e.to_string()),
            NarrativeError::UnknownSetting(_)
            | NarrativeError::BadSetting { .. }
            | NarrativeError::BadPool(_)
            | NarrativeError::UnresolvedPlaceholder { .. } => CliError::Config(e.to_string()),
            NarrativeError::TraceTooShort { .. }
            | NarrativeError::Leakage { .. }
            | NarrativeError::BadInstance { .. } => CliError::Generation(e.to_string()),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Narrative(inner) => CliError::from(inner),
            HarnessError::Io(inner) => CliError::from(inner),
            HarnessError::Metrics(MetricsError::EmptyRecords)
            | HarnessError::Metrics(MetricsError::EmptyLabels) => {
                CliError::EmptyInput(e.to_string())
            }
            HarnessError::MissingFixture(_) => CliError::Schema(e.to_string()),
            HarnessError::BadSpec(_) => CliError::Config(e.to_string()),
            HarnessError::MissingCredentials(_) => CliError::Remote(e.to_string()),
        }
    }
}

/// Instance errors raised while generating are generation failures; the
/// same type raised while loading a file is a schema problem, so loading
/// paths wrap it explicitly instead of using this impl.
impl From<InstanceError> for CliError {
    fn from(e: InstanceError) -> Self {
        match e {
            InstanceError::Narrative(inner) => CliError::from(inner),
            other => CliError::Generation(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::json!({"error": e.kind(), "message": e.message()})
            );
            ExitCode::from(e.exit_code())
        }
    }
}

fn load_settings(path: &Option<PathBuf>) -> Result<SettingsTable, CliError> {
    match path {
        Some(p) => Ok(SettingsTable::load(p)?),
        None => Ok(SettingsTable::builtin()),
    }
}

fn load_pool(path: &Option<PathBuf>) -> Result<NamePool, CliError> {
    match path {
        Some(p) => Ok(NamePool::load(p)?),
        None => Ok(NamePool::builtin()),
    }
}

fn load_app_config(path: &Option<PathBuf>) -> Result<AppConfig, CliError> {
    match path {
        Some(p) => Ok(AppConfig::load(p)?),
        None => Ok(AppConfig::default()),
    }
}

fn narrative_context(
    templates: &Option<PathBuf>,
    settings: &Option<PathBuf>,
    config: &AppConfig,
) -> Result<NarrativeContext, CliError> {
    let templates = match templates {
        Some(dir) => TemplateSet::load(dir)?,
        None => TemplateSet::builtin(),
    };
    Ok(NarrativeContext {
        templates,
        settings: load_settings(settings)?,
        observation_style: config.narrative.observation_style,
    })
}

fn load_labeled(path: &Path) -> Result<(FileMeta, Vec<LabeledInstance>), CliError> {
    let (meta, records): (Option<FileMeta>, Vec<InstanceRecord>) = read_jsonl(path)?;
    let labeled: Result<Vec<LabeledInstance>, InstanceError> =
        records.into_iter().map(LabeledInstance::try_from).collect();
    let labeled = labeled.map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
    if labeled.is_empty() {
        return Err(CliError::EmptyInput(format!("{}: no instances", path.display())));
    }
    Ok((meta.unwrap_or_default(), labeled))
}

/// Carries the upstream seed and grid hash forward; the tool version is
/// always the writer's own.
fn propagate(meta: &FileMeta) -> FileMeta {
    FileMeta::new(meta.seed.clone(), meta.grid_hash.clone())
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate { rung, grid, seed, count, names, settings, out } => {
            let rung = Rung::from_number(rung)
                .ok_or_else(|| CliError::Config(format!("--rung must be 1, 2, or 3, got {rung}")))?;
            let grid_config = GridConfig::resolve(&grid)?;
            let settings_table = load_settings(&settings)?;
            let pool = load_pool(&names)?;
            let instances = match rung {
                Rung::III => {
                    let n = count.unwrap_or(grid_config.rung3.count);
                    sample_rung3(n, seed, &grid_config.rung3, &settings_table, &pool)?
                }
                _ => enumerate_rung_grid(&grid_config.rung12, rung, &settings_table, &pool, seed)?,
            };
            let records: Vec<InstanceRecord> = instances.iter().map(InstanceRecord::from).collect();
            let meta = FileMeta::new(Some(seed.to_string()), Some(grid_config.hash()));
            write_jsonl(&out, &meta, &records)?;
            println!(
                "generated {} rung {} instances (grid {}, seed {seed}) -> {}",
                records.len(),
                rung,
                grid_config.hash(),
                out.display()
            );
            Ok(())
        }

        Command::Solve { instances, out } => {
            let (meta, records): (Option<FileMeta>, Vec<InstanceRecord>) = read_jsonl(&instances)?;
            let parsed: Result<Vec<PuzzleInstance>, InstanceError> =
                records.into_iter().map(PuzzleInstance::try_from).collect();
            let parsed = parsed
                .map_err(|e| CliError::Schema(format!("{}: {e}", instances.display())))?;
            if parsed.is_empty() {
                return Err(CliError::EmptyInput(format!(
                    "{}: no instances",
                    instances.display()
                )));
            }
            let (labeled, distribution) = attach_ground_truth(&parsed)?;
            let out_records: Vec<InstanceRecord> =
                labeled.iter().map(InstanceRecord::from).collect();
            write_jsonl(&out, &propagate(&meta.unwrap_or_default()), &out_records)?;
            println!("solved {} instances -> {}", out_records.len(), out.display());
            println!("{distribution}");
            Ok(())
        }

        Command::Render { instances, templates, settings, config, out } => {
            let app = load_app_config(&config)?;
            let ctx = narrative_context(&templates, &settings, &app)?;
            let (meta, labeled) = load_labeled(&instances)?;
            let options = EvalOptions { narrative: ctx, grader: app.grader };
            let prompts = render_all(&labeled, &options)?;
            std::fs::create_dir_all(&out)
                .map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
            let mut files = Vec::with_capacity(prompts.len());
            for bundle in &prompts {
                let file = out.join(format!("{}.txt", bundle.instance_id));
                std::fs::write(&file, &bundle.text)
                    .map_err(|e| CliError::Io(format!("{}: {e}", file.display())))?;
                files.push(format!("{}.txt", bundle.instance_id));
            }
            let manifest = serde_json::json!({
                "meta": propagate(&meta),
                "prompts": files.len(),
                "files": files,
            });
            let manifest_path = out.join("manifest.json");
            std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest).unwrap())
                .map_err(|e| CliError::Io(format!("{}: {e}", manifest_path.display())))?;
            println!("rendered {} prompts -> {}", prompts.len(), out.display());
            Ok(())
        }

        Command::Grade { instances, responses, templates, settings, config, out } => {
            let app = load_app_config(&config)?;
            let ctx = narrative_context(&templates, &settings, &app)?;
            let (meta, labeled) = load_labeled(&instances)?;
            let options = EvalOptions { narrative: ctx, grader: app.grader };
            let prompts = render_all(&labeled, &options)?;
            let raw = read_raw_responses(&responses)?;
            let stem = responses
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let records = delbench_core::harness::grade_raw_responses(
                &labeled,
                &prompts,
                &raw,
                &format!("scripted:{stem}"),
                &options.grader,
            )?;
            write_jsonl(&out, &propagate(&meta), &records)?;
            let accuracy = delbench_core::harness::accuracy(&records);
            println!(
                "graded {} responses (accuracy {:.3}) -> {}",
                records.len(),
                accuracy,
                out.display()
            );
            Ok(())
        }

        Command::Evaluate { instances, responder, config, templates, settings, out, report } => {
            let app = load_app_config(&config)?;
            let spec = resolve_responder(&responder, &app)?;
            let ctx = narrative_context(&templates, &settings, &app)?;
            let (meta, labeled) = load_labeled(&instances)?;
            let options = EvalOptions { narrative: ctx, grader: app.grader };
            let records = run_eval(&labeled, &spec, &options)?;
            let meta = propagate(&meta);
            write_jsonl(&out, &meta, &records)?;
            let metrics = compute_metrics(&records).map_err(HarnessError::from)?;
            print!("{}", render_table(&metrics));
            println!("wrote {} records -> {}", records.len(), out.display());
            if let Some(dir) = report {
                write_report_files(&dir, &meta, &metrics)?;
                println!("report -> {}", dir.display());
            }
            Ok(())
        }

        Command::Report { records, out } => {
            let (meta, loaded) = read_records(&records)?;
            let metrics = compute_metrics(&loaded).map_err(HarnessError::from)?;
            let meta = propagate(&meta.unwrap_or_default());
            write_report_files(&out, &meta, &metrics)?;
            print!("{}", render_table(&metrics));
            println!("report -> {}", out.display());
            Ok(())
        }
    }
}

fn write_report_files(
    dir: &Path,
    meta: &FileMeta,
    metrics: &MetricsReport,
) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut wrapped = BTreeMap::new();
    wrapped.insert("meta", serde_json::to_value(meta).unwrap());
    wrapped.insert("report", serde_json::to_value(metrics).unwrap());
    let json_path = dir.join("report.json");
    std::fs::write(&json_path, serde_json::to_string_pretty(&wrapped).unwrap())
        .map_err(|e| CliError::Io(format!("{}: {e}", json_path.display())))?;
    let table_path = dir.join("report.txt");
    std::fs::write(&table_path, render_table(metrics))
        .map_err(|e| CliError::Io(format!("{}: {e}", table_path.display())))?;
    let comment = format!(
        "tool_version={} seed={} grid_hash={}",
        meta.tool_version,
        meta.seed.as_deref().unwrap_or("-"),
        meta.grid_hash.as_deref().unwrap_or("-"),
    );
    let csv_path = dir.join("accuracy.csv");
    std::fs::write(&csv_path, to_csv(metrics, &comment))
        .map_err(|e| CliError::Io(format!("{}: {e}", csv_path.display())))?;
    Ok(())
}
