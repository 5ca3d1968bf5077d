//! Result documents (JSON) and the sweep table (CSV). Field meanings are
//! documented in `schema/`.

use bellsim::experiments::{AuditReport, ChshResult, CorrelationEstimate, SweepPoint};
use bellsim::locality::{CausalLog, CausalitySummary, TrialSchedule};
use bellsim::math::UnitVector3;
use bellsim::models::{qm_correlation, InputSet, Side};
use serde::Serialize;

use crate::config::{CommandName, Kind, RunConfig};
use crate::format::float17;

pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: [&str; 7] = ["model", "kind", "theta_deg", "mean", "stderr", "n", "im_mean"];
pub const CHSH_TERMS: [&str; 4] = ["P(a,b)", "P(a',b)", "-P(a,b')", "P(a',b')"];
pub const LOCAL_BOUND: f64 = 2.0;

#[derive(Debug, Clone, Serialize)]
pub struct ResultDocument {
    pub schema_version: u32,
    pub command: CommandName,
    pub library_version: &'static str,
    pub config: RunConfig,
    pub estimates: Vec<EstimateRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chsh: Option<ChshBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub causality: Option<CausalityBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audits: Option<Vec<AuditEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub logs: Option<Vec<CausalLog>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

impl ResultDocument {
    pub fn new(config: RunConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: config.command,
            library_version: bellsim::VERSION,
            config,
            estimates: Vec::new(),
            chsh: None,
            causality: None,
            audits: None,
            logs: None,
            wall_clock_seconds: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateRow {
    pub model: String,
    pub kind: Kind,
    pub a_deg: f64,
    pub b_deg: f64,
    pub a: UnitVector3,
    pub b: UnitVector3,
    /// Singlet prediction at the same settings.
    pub reference: f64,
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub im_mean: Option<f64>,
    pub im_stderr: Option<f64>,
}

impl EstimateRow {
    pub fn new(estimate: &CorrelationEstimate, kind: Kind, a_deg: f64, b_deg: f64) -> Self {
        Self {
            model: estimate.model.clone(),
            kind,
            a_deg,
            b_deg,
            a: estimate.a,
            b: estimate.b,
            reference: qm_correlation(&estimate.a, &estimate.b, kind.particle()),
            mean: estimate.mean(),
            stderr: estimate.stderr(),
            n: estimate.n(),
            im_mean: estimate.im_mean(),
            im_stderr: estimate.im_stderr(),
        }
    }
}

/// Rows for the four CHSH correlations, in [`CHSH_TERMS`] order.
pub fn chsh_rows(result: &ChshResult, kind: Kind, angles_deg: [f64; 4]) -> Vec<EstimateRow> {
    let [a, a_prime, b, b_prime] = angles_deg;
    let degrees = [(a, b), (a_prime, b), (a, b_prime), (a_prime, b_prime)];
    result
        .correlations
        .iter()
        .zip(degrees)
        .map(|(est, (x, y))| EstimateRow::new(est, kind, x, y))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ChshBlock {
    pub angles_deg: [f64; 4],
    pub terms: [&'static str; 4],
    pub s_value: f64,
    pub s_stderr: f64,
    pub abs_s: f64,
    pub local_bound: f64,
    /// `|S| > 2 + 4·stderr`.
    pub exceeds_local_bound: bool,
}

impl ChshBlock {
    pub fn new(result: &ChshResult, angles_deg: [f64; 4]) -> Self {
        Self {
            angles_deg,
            terms: CHSH_TERMS,
            s_value: result.s_value,
            s_stderr: result.s_stderr,
            abs_s: result.s_value.abs(),
            local_bound: LOCAL_BOUND,
            exceeds_local_bound: result.s_value.abs() > LOCAL_BOUND + 4.0 * result.s_stderr,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StationInputs {
    pub station_a: Vec<String>,
    pub station_b: Vec<String>,
}

impl StationInputs {
    fn from_sets(a: &InputSet, b: &InputSet) -> Self {
        Self { station_a: a.names(Side::A), station_b: b.names(Side::B) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CausalityBlock {
    pub schedule: TrialSchedule,
    pub light_crossing_time: f64,
    pub schedule_spacelike: bool,
    pub trials: u64,
    pub spacelike_trials: u64,
    pub clean_trials: u64,
    pub ledger_clean: bool,
    pub inputs_read: StationInputs,
    pub inputs_permitted: StationInputs,
    pub note: &'static str,
}

impl CausalityBlock {
    pub fn new(schedule: &TrialSchedule, summary: &CausalitySummary) -> Self {
        Self {
            schedule: *schedule,
            light_crossing_time: schedule.light_crossing_time(),
            schedule_spacelike: schedule.is_spacelike(),
            trials: summary.trials,
            spacelike_trials: summary.spacelike_trials,
            clean_trials: summary.clean_trials,
            ledger_clean: summary.all_clean(),
            inputs_read: StationInputs::from_sets(&summary.inputs.station_a, &summary.inputs.station_b),
            inputs_permitted: StationInputs::from_sets(&InputSet::PERMITTED, &InputSet::PERMITTED),
            note: bellsim::experiments::AUDIT_NOTE,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MatchedBlock {
    pub trials: u64,
    pub exceptions: u64,
    pub exact: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MarginalBlock {
    pub a_mean: f64,
    pub a_stderr: f64,
    pub b_mean: f64,
    pub b_stderr: f64,
    pub balanced: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditEntry {
    pub model: String,
    pub trials: u64,
    pub codomain: &'static str,
    pub outcome_resolution: &'static str,
    pub matched_setting: MatchedBlock,
    pub marginals: Option<MarginalBlock>,
    pub estimates: Vec<EstimateRow>,
    pub chsh: ChshBlock,
    pub causality: CausalityBlock,
    pub locality_compliant: bool,
    pub note: &'static str,
}

impl AuditEntry {
    pub fn new(report: &AuditReport, angles_deg: [f64; 4]) -> Self {
        Self {
            model: report.model.clone(),
            trials: report.trials,
            codomain: report.codomain.as_str(),
            outcome_resolution: report.outcome_resolution.as_str(),
            matched_setting: MatchedBlock {
                trials: report.matched_setting.trials,
                exceptions: report.matched_setting.exceptions,
                exact: report.matched_setting.exact(),
            },
            marginals: report.marginals.map(|m| MarginalBlock {
                a_mean: m.a.mean(),
                a_stderr: m.a.stderr(),
                b_mean: m.b.mean(),
                b_stderr: m.b.stderr(),
                balanced: m.balanced(),
            }),
            estimates: chsh_rows(&report.chsh, Kind::Spin, angles_deg),
            chsh: ChshBlock::new(&report.chsh, angles_deg),
            causality: CausalityBlock::new(&TrialSchedule::default(), &report.locality),
            locality_compliant: report.locality_compliant(),
            note: report.note,
        }
    }
}

/// One model's sweep, with the grid in degrees as configured.
pub struct SweepSeries<'a> {
    pub model: &'a str,
    pub points: Vec<SweepPoint>,
}

pub fn sweep_csv(kind: Kind, angles_deg: &[f64], series: &[SweepSeries<'_>]) -> String {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    writer.write_record(CSV_HEADER).expect("writing to memory");
    for s in series {
        for (point, deg) in s.points.iter().zip(angles_deg) {
            let e = &point.estimate;
            writer
                .write_record([
                    s.model.to_string(),
                    kind.as_str().to_string(),
                    deg.to_string(),
                    float17(e.mean()),
                    float17(e.stderr()),
                    e.n().to_string(),
                    e.im_mean().map(float17).unwrap_or_default(),
                ])
                .expect("writing to memory");
        }
    }
    String::from_utf8(writer.into_inner().expect("writing to memory")).expect("CSV fields are UTF-8")
}

/// Plain-text audit table.
pub fn audit_table(entries: &[AuditEntry]) -> String {
    let mut out = format!(
        "{:<10} {:<15} {:<12} {:<9} {:<10} {:<22} {}\n",
        "model", "codomain", "resolved", "a=b", "marginals", "|S| ± stderr", "ledger"
    );
    for e in entries {
        let marginals = match &e.marginals {
            Some(m) if m.balanced => "balanced",
            Some(_) => "skewed",
            None => "n/a",
        };
        let matched = if e.matched_setting.exact { "exact" } else { "inexact" };
        let ledger = if e.locality_compliant { "clean" } else { "dirty" };
        let s = format!("{:.4} ± {:.4}", e.chsh.abs_s, e.chsh.s_stderr);
        out.push_str(&format!(
            "{:<10} {:<15} {:<12} {:<9} {:<10} {:<22} {}\n",
            e.model, e.codomain, e.outcome_resolution, matched, marginals, s, ledger
        ));
    }
    out.push_str(&format!("note: {}\n", bellsim::experiments::AUDIT_NOTE));
    out
}
