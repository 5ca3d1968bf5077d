//! Library side of the `bellsim` command: configuration, execution and
//! output assembly. `main.rs` only parses arguments and maps exit codes.

pub mod config;
pub mod document;
pub mod format;
pub mod plot;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use bellsim::experiments::{audit_model, chsh, sweep, ChshSettings, CANONICAL_SPIN_DEGREES};
use bellsim::locality::{run_chsh_experiment, run_experiment, ScheduleError, TrialSchedule};
use bellsim::models::map_setting;
use thiserror::Error;

use config::{Cli, Command, CommandName, CommonArgs, RunConfig};
use document::{chsh_rows, AuditEntry, CausalityBlock, ChshBlock, EstimateRow, ResultDocument, SweepSeries};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("invalid schedule: {0}")]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Model(#[from] bellsim::Error),
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 1 for configuration and schedule problems, 2 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Schedule(_) | CliError::Model(_) => 1,
            CliError::Read { .. } | CliError::Write { .. } => 2,
        }
    }
}

/// A file (or stdout) and its contents.
pub struct Artifact {
    pub path: Option<PathBuf>,
    pub contents: String,
}

/// Everything a command produces, before anything is written.
pub struct Outputs {
    pub artifacts: Vec<Artifact>,
    /// Printed to stdout in addition to the artifacts.
    pub summary: Option<String>,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let (command, common) = match &cli.command {
        Command::Sweep { common, .. } => (CommandName::Sweep, common),
        Command::Chsh { common } => (CommandName::Chsh, common),
        Command::Audit { common } => (CommandName::Audit, common),
        Command::Locality { common, .. } => (CommandName::Locality, common),
    };
    let schedule_args = match &cli.command {
        Command::Locality { schedule, .. } => Some(schedule),
        _ => None,
    };
    let plot = match &cli.command {
        Command::Sweep { plot, .. } => plot.clone(),
        _ => None,
    };
    let config = RunConfig::resolve(command, common, schedule_args)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} threads: {e}", common.threads)))?;
    let outputs = pool.install(|| execute(&config, common, plot))?;
    emit(outputs)
}

/// Runs a resolved configuration and assembles its outputs.
pub fn execute(config: &RunConfig, common: &CommonArgs, plot: Option<PathBuf>) -> Result<Outputs, CliError> {
    let started = Instant::now();
    let kind = config.kind;
    let models: Vec<_> = config.models.iter().map(|m| m.id()).collect();
    let mut doc = ResultDocument::new(config.clone());
    let mut summary = None;

    match config.command {
        CommandName::Sweep => {
            let grid: Vec<f64> = config.angles_deg.iter().map(|d| d.to_radians()).collect();
            let series = models
                .iter()
                .map(|id| {
                    Ok(SweepSeries {
                        model: id.as_str(),
                        points: sweep(id.model(), kind.particle(), &grid, config.n, config.seed)?,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let mut artifacts = vec![Artifact {
                path: common.out.clone(),
                contents: document::sweep_csv(kind, &config.angles_deg, &series),
            }];
            if let Some(path) = plot {
                artifacts.push(Artifact {
                    path: Some(path),
                    contents: plot::sweep_svg(kind, &config.angles_deg, &series),
                });
            }
            return Ok(Outputs { artifacts, summary: None });
        }
        CommandName::Chsh => {
            let angles = four(&config.angles_deg);
            let settings = ChshSettings::from_angles(kind.particle(), angles.map(f64::to_radians))?;
            let result = chsh(models[0].model(), &settings, config.n, config.seed)?;
            doc.estimates = chsh_rows(&result, kind, angles);
            doc.chsh = Some(ChshBlock::new(&result, angles));
        }
        CommandName::Audit => {
            let entries = models
                .iter()
                .map(|id| Ok(AuditEntry::new(&audit_model(id.model(), config.n, config.seed)?, CANONICAL_SPIN_DEGREES)))
                .collect::<Result<Vec<_>, CliError>>()?;
            summary = Some(document::audit_table(&entries));
            doc.audits = Some(entries);
        }
        CommandName::Locality => {
            let cfg = config.schedule.unwrap_or_default();
            let schedule =
                TrialSchedule::new(cfg.separation, cfg.choose_a, cfg.choose_b, cfg.measure_a, cfg.measure_b)?;
            if config.require_spacelike == Some(true) {
                schedule.require_spacelike()?;
            }
            let keep = config.logs.unwrap_or(0);
            let model = models[0].model();
            let (logs, causality) = if let [a_deg, b_deg] = config.angles_deg[..] {
                let a = map_setting(kind.particle(), a_deg.to_radians())?;
                let b = map_setting(kind.particle(), b_deg.to_radians())?;
                let run = run_experiment(&schedule, model, a, b, config.n, config.seed, keep)?;
                doc.estimates = vec![EstimateRow::new(&run.estimate, kind, a_deg, b_deg)];
                (run.sample_logs, run.causality)
            } else {
                let angles = four(&config.angles_deg);
                let settings = ChshSettings::from_angles(kind.particle(), angles.map(f64::to_radians))?;
                let run = run_chsh_experiment(&schedule, model, &settings, config.n, config.seed, keep)?;
                doc.estimates = chsh_rows(&run.chsh, kind, angles);
                doc.chsh = Some(ChshBlock::new(&run.chsh, angles));
                (run.sample_logs, run.causality)
            };
            doc.causality = Some(CausalityBlock::new(&schedule, &causality));
            if keep > 0 {
                doc.logs = Some(logs);
            }
        }
    }

    if common.timing {
        doc.wall_clock_seconds = Some(started.elapsed().as_secs_f64());
    }
    let json = format::to_json(&doc);
    let artifacts = match (config.command, &common.out) {
        // Audit prints its table; the JSON goes to --out only.
        (CommandName::Audit, None) => Vec::new(),
        (_, out) => vec![Artifact { path: out.clone(), contents: json }],
    };
    Ok(Outputs { artifacts, summary })
}

fn four(angles: &[f64]) -> [f64; 4] {
    angles.try_into().expect("validated to hold four angles")
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Write { path: path.to_path_buf(), source })
}

fn emit(outputs: Outputs) -> Result<(), CliError> {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let to_stdout = |lock: &mut std::io::StdoutLock<'_>, text: &str| {
        lock.write_all(text.as_bytes())
            .and_then(|_| lock.flush())
            .map_err(|source| CliError::Write { path: PathBuf::from("<stdout>"), source })
    };
    for artifact in &outputs.artifacts {
        match &artifact.path {
            Some(path) => write_file(path, &artifact.contents)?,
            None => to_stdout(&mut lock, &artifact.contents)?,
        }
    }
    if let Some(summary) = &outputs.summary {
        to_stdout(&mut lock, summary)?;
    }
    Ok(())
}
