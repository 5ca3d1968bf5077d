//! Command-line flags and the resolved, serializable run configuration.

use std::fmt;
use std::fs;
use std::path::PathBuf;

use bellsim::experiments::{CANONICAL_PHOTON_DEGREES, CANONICAL_SPIN_DEGREES, MIN_AUDIT_TRIALS};
use bellsim::models::{ModelId, ParticleKind};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_SWEEP: &str = "0:180:15";
const MAX_GRID_POINTS: usize = 100_000;

#[derive(Debug, Parser)]
#[command(name = "bellsim", version, about = "Spin-correlation experiments: sweeps, CHSH, model audits and locality runs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Correlation against relative angle; writes CSV and optionally an SVG plot.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// SVG file for the plot.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// CHSH combination from four settings; writes a JSON result document.
    Chsh {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Audit report per model; JSON document plus a table on stdout.
    Audit {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Runs trials through the spacetime harness; JSON with a causality block.
    Locality {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        schedule: ScheduleArgs,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Model name, or a comma list for sweep and audit.
    #[arg(long, value_delimiter = ',')]
    pub model: Option<Vec<ModelName>>,
    #[arg(long)]
    pub kind: Option<Kind>,
    /// Trials per correlation estimate.
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Angles in degrees: `start:stop:step` or a comma list.
    #[arg(long, allow_hyphen_values = true)]
    pub angles: Option<String>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 picks one per core). Does not affect results.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Adds the wall-clock duration to the JSON document.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ScheduleArgs {
    /// Half-distance L between the stations (source at 0, stations at ±L).
    #[arg(long = "schedule-L", allow_hyphen_values = true)]
    pub schedule_l: Option<f64>,
    /// Event times `choose_a,choose_b,measure_a,measure_b` (emission at 0).
    #[arg(long, allow_hyphen_values = true)]
    pub schedule_times: Option<String>,
    /// Refuse schedules whose measurements are not spacelike separated.
    #[arg(long)]
    pub require_spacelike: bool,
    /// Number of per-trial event logs to include in the document.
    #[arg(long)]
    pub logs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Sweep,
    Chsh,
    Audit,
    Locality,
}

impl fmt::Display for CommandName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CommandName::Sweep => "sweep",
            CommandName::Chsh => "chsh",
            CommandName::Audit => "audit",
            CommandName::Locality => "locality",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelName {
    Qm,
    LhvSign,
    Algebraic,
    /// Test fixture that reads the remote setting; for locality checks.
    NegativeControl,
}

impl ModelName {
    pub const SHIPPED: [ModelName; 3] = [ModelName::Qm, ModelName::LhvSign, ModelName::Algebraic];

    pub fn id(self) -> ModelId {
        match self {
            ModelName::Qm => ModelId::Qm,
            ModelName::LhvSign => ModelId::LhvSign,
            ModelName::Algebraic => ModelId::Algebraic,
            ModelName::NegativeControl => ModelId::NegativeControl,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Spin,
    Photon,
}

impl Kind {
    pub fn particle(self) -> ParticleKind {
        match self {
            Kind::Spin => ParticleKind::SpinHalf,
            Kind::Photon => ParticleKind::Photon,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Spin => "spin",
            Kind::Photon => "photon",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub separation: f64,
    pub choose_a: f64,
    pub choose_b: f64,
    pub measure_a: f64,
    pub measure_b: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self { separation: 1.0, choose_a: 0.5, choose_b: 0.5, measure_a: 0.9, measure_b: 0.9 }
    }
}

/// Everything that determines a run's numbers. Echoed into every JSON
/// document; feeding the echo back through `--config` repeats the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandName,
    pub models: Vec<ModelName>,
    pub kind: Kind,
    pub n: u64,
    pub seed: u64,
    pub angles_deg: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub require_spacelike: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logs: Option<usize>,
}

/// A config file: any subset of [`RunConfig`].
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub command: Option<CommandName>,
    pub models: Option<Vec<ModelName>>,
    pub kind: Option<Kind>,
    pub n: Option<u64>,
    pub seed: Option<u64>,
    pub angles_deg: Option<Vec<f64>>,
    pub schedule: Option<ScheduleConfig>,
    pub require_spacelike: Option<bool>,
    pub logs: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: &PathBuf) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.clone(), source })?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Parses `start:stop:step` (inclusive of `stop`) or `a,b,c`.
pub fn parse_angles(text: &str) -> Result<Vec<f64>, CliError> {
    let number = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| config_error(format!("invalid angle `{}`", s.trim())))
    };
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(config_error(format!("angle range `{text}` must be start:stop:step")));
        };
        let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
        if step == 0.0 || (stop - start) * step < 0.0 {
            return Err(config_error(format!("angle step {step} does not lead from {start} to {stop}")));
        }
        let count = ((stop - start) / step + 1e-9).floor() + 1.0;
        if count > MAX_GRID_POINTS as f64 {
            return Err(config_error(format!("angle range has more than {MAX_GRID_POINTS} points")));
        }
        Ok((0..count as usize).map(|k| start + k as f64 * step).collect())
    } else {
        text.split(',').map(number).collect()
    }
}

fn parse_times(text: &str) -> Result<[f64; 4], CliError> {
    let values: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| config_error(format!("invalid schedule time `{}`", s.trim()))))
        .collect::<Result<_, _>>()?;
    values
        .try_into()
        .map_err(|_| config_error("--schedule-times takes choose_a,choose_b,measure_a,measure_b"))
}

impl RunConfig {
    /// Merges defaults, the optional config file and flags (flags win).
    pub fn resolve(command: CommandName, common: &CommonArgs, schedule: Option<&ScheduleArgs>) -> Result<Self, CliError> {
        let file = match &common.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        if let Some(named) = file.command {
            if named != command {
                return Err(config_error(format!("config file is for `{named}`, not `{command}`")));
            }
        }

        let kind = common.kind.or(file.kind).unwrap_or(Kind::Spin);
        let models = match common.model.clone().or(file.models) {
            Some(models) => models,
            None => match command {
                CommandName::Sweep | CommandName::Audit => ModelName::SHIPPED.to_vec(),
                CommandName::Chsh | CommandName::Locality => vec![ModelName::Qm],
            },
        };
        let angles_deg = match (&common.angles, file.angles_deg) {
            (Some(text), _) => parse_angles(text)?,
            (None, Some(list)) => list,
            (None, None) => match command {
                CommandName::Sweep => parse_angles(DEFAULT_SWEEP)?,
                CommandName::Chsh | CommandName::Locality => canonical_degrees(kind).to_vec(),
                CommandName::Audit => Vec::new(),
            },
        };

        let (schedule_cfg, require_spacelike, logs) = if command == CommandName::Locality {
            let flags = schedule.cloned().unwrap_or_default();
            let mut cfg = file.schedule.unwrap_or_default();
            if let Some(l) = flags.schedule_l {
                cfg.separation = l;
            }
            if let Some(times) = &flags.schedule_times {
                [cfg.choose_a, cfg.choose_b, cfg.measure_a, cfg.measure_b] = parse_times(times)?;
            }
            let require = flags.require_spacelike || file.require_spacelike.unwrap_or(false);
            (Some(cfg), Some(require), Some(flags.logs.or(file.logs).unwrap_or(0)))
        } else {
            if file.schedule.is_some() || file.require_spacelike.is_some() || file.logs.is_some() {
                return Err(config_error(format!("schedule settings only apply to `locality`, not `{command}`")));
            }
            (None, None, None)
        };

        let config = Self {
            command,
            models,
            kind,
            n: common.n.or(file.n).unwrap_or(DEFAULT_TRIALS),
            seed: common.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            angles_deg,
            schedule: schedule_cfg,
            require_spacelike,
            logs,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.models.is_empty() {
            return Err(config_error("no model given"));
        }
        if self.n == 0 {
            return Err(config_error("--n must be at least 1"));
        }
        if self.angles_deg.iter().any(|a| !a.is_finite()) {
            return Err(config_error("angles must be finite"));
        }
        let single = |what: &str| {
            if self.models.len() == 1 {
                Ok(())
            } else {
                Err(config_error(format!("`{}` takes one model, got {}{what}", self.command, self.models.len())))
            }
        };
        match self.command {
            CommandName::Sweep => {
                if self.angles_deg.is_empty() {
                    return Err(config_error("sweep needs at least one angle"));
                }
            }
            CommandName::Chsh => {
                single("")?;
                if self.angles_deg.len() != 4 {
                    return Err(config_error(format!(
                        "chsh takes four angles a,a',b,b', got {}",
                        self.angles_deg.len()
                    )));
                }
            }
            CommandName::Audit => {
                if !self.angles_deg.is_empty() {
                    return Err(config_error("audit uses fixed settings and takes no angles"));
                }
                if self.kind != Kind::Spin {
                    return Err(config_error("audit runs spin settings only"));
                }
                if self.n < MIN_AUDIT_TRIALS {
                    return Err(config_error(format!("audit needs --n of at least {MIN_AUDIT_TRIALS}")));
                }
            }
            CommandName::Locality => {
                single("")?;
                if !matches!(self.angles_deg.len(), 2 | 4) {
                    return Err(config_error(format!(
                        "locality takes two angles (fixed settings) or four (random CHSH choice), got {}",
                        self.angles_deg.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn canonical_degrees(kind: Kind) -> [f64; 4] {
    match kind {
        Kind::Spin => CANONICAL_SPIN_DEGREES,
        Kind::Photon => CANONICAL_PHOTON_DEGREES,
    }
}
