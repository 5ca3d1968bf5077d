//! Two-station trial harness on a one-dimensional spacetime.
//!
//! The source sits at `x = 0`, stations A and B at `x = -L` and `x = +L`,
//! signal speed `c = 1`. Per trial the source emits the shared payload, each
//! station picks its setting while the particles are in flight, and then
//! measures. Station procedures only see what [`Station`](crate::models::Station)
//! exposes; every input they read lands in the trial's ledger.
//!
//! The harness certifies the information flow of the implemented procedures.
//! It cannot say anything about physical mechanism beyond that.

use serde::Serialize;
use thiserror::Error;

use crate::error::{Error, Result};
use crate::experiments::engine::{BatchPlan, TrialStreams};
use crate::experiments::{ChshResult, ChshSettings, CorrelationEstimate, ValueMoments};
use crate::math::{RngStream, UnitVector3};
use crate::models::{evaluate_trial, InputSet, MeasurementModel, SharedPayload, Side, StationRecord, TrialValue};

pub const SIGNAL_SPEED: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq, Serialize)]
pub enum ScheduleError {
    #[error("{0} is not finite")]
    NonFinite(&'static str),

    #[error("station separation must be positive, got {0}")]
    NonPositiveSeparation(f64),

    #[error("station {station:?} chooses its setting at t={choose} but the source emits at t={emit}; settings must be chosen after emission")]
    SettingBeforeEmission { station: Side, choose: f64, emit: f64 },

    #[error("station {station:?} measures at t={measure} but chooses its setting at t={choose}; the setting must be chosen first")]
    MeasureBeforeSetting { station: Side, measure: f64, choose: f64 },

    #[error("measurements are not spacelike separated: |Δt| = {gap} ≥ 2L/c = {limit}")]
    TimelikeMeasurements { gap: f64, limit: f64 },
}

/// Event times of one trial and the station half-separation `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialSchedule {
    pub separation: f64,
    pub emit: f64,
    pub choose_a: f64,
    pub choose_b: f64,
    pub measure_a: f64,
    pub measure_b: f64,
}

impl Default for TrialSchedule {
    /// `L = 1`, emission at 0, settings at 0.5, measurements at 0.9.
    fn default() -> Self {
        Self {
            separation: 1.0,
            emit: 0.0,
            choose_a: 0.5,
            choose_b: 0.5,
            measure_a: 0.9,
            measure_b: 0.9,
        }
    }
}

impl TrialSchedule {
    /// Builds and validates a schedule with emission at `t = 0`.
    pub fn new(
        separation: f64,
        choose_a: f64,
        choose_b: f64,
        measure_a: f64,
        measure_b: f64,
    ) -> Result<Self, ScheduleError> {
        let schedule = Self {
            separation,
            emit: 0.0,
            choose_a,
            choose_b,
            measure_a,
            measure_b,
        };
        schedule.validate()?;
        Ok(schedule)
    }

    /// Checks event ordering: emission strictly before each setting choice,
    /// each choice strictly before its station's measurement.
    pub fn validate(&self) -> Result<(), ScheduleError> {
        let named = [
            ("separation", self.separation),
            ("emission time", self.emit),
            ("setting time of A", self.choose_a),
            ("setting time of B", self.choose_b),
            ("measurement time of A", self.measure_a),
            ("measurement time of B", self.measure_b),
        ];
        for (name, value) in named {
            if !value.is_finite() {
                return Err(ScheduleError::NonFinite(name));
            }
        }
        if self.separation <= 0.0 {
            return Err(ScheduleError::NonPositiveSeparation(self.separation));
        }
        for (station, choose, measure) in [
            (Side::A, self.choose_a, self.measure_a),
            (Side::B, self.choose_b, self.measure_b),
        ] {
            if choose <= self.emit {
                return Err(ScheduleError::SettingBeforeEmission { station, choose, emit: self.emit });
            }
            if measure <= choose {
                return Err(ScheduleError::MeasureBeforeSetting { station, measure, choose });
            }
        }
        Ok(())
    }

    /// Time a light signal needs between the stations, `2L/c`.
    pub fn light_crossing_time(&self) -> f64 {
        2.0 * self.separation / SIGNAL_SPEED
    }

    pub fn is_spacelike(&self) -> bool {
        spacelike(self.measure_a, self.measure_b, self)
    }

    /// Rejects schedules whose measurements could be connected by a signal.
    pub fn require_spacelike(&self) -> Result<(), ScheduleError> {
        if self.is_spacelike() {
            Ok(())
        } else {
            Err(ScheduleError::TimelikeMeasurements {
                gap: (self.measure_a - self.measure_b).abs(),
                limit: self.light_crossing_time(),
            })
        }
    }

    fn position(&self, actor: Actor) -> f64 {
        match actor {
            Actor::Source => 0.0,
            Actor::StationA => -self.separation,
            Actor::StationB => self.separation,
        }
    }
}

fn spacelike(t_a: f64, t_b: f64, schedule: &TrialSchedule) -> bool {
    (t_a - t_b).abs() < schedule.light_crossing_time()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Actor {
    Source,
    StationA,
    StationB,
}

impl From<Side> for Actor {
    fn from(side: Side) -> Self {
        match side {
            Side::A => Actor::StationA,
            Side::B => Actor::StationB,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventKind {
    Emit,
    ChooseSetting,
    Measure,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventDetail {
    Emitted { lambda: UnitVector3 },
    Setting { direction: UnitVector3 },
    Measured { record: StationRecord },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpacetimeEvent {
    pub actor: Actor,
    pub kind: EventKind,
    pub position: f64,
    pub time: f64,
    pub detail: EventDetail,
}

/// Inputs each station procedure read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct InformationLedger {
    pub station_a: InputSet,
    pub station_b: InputSet,
}

impl InformationLedger {
    pub fn is_clean(&self) -> bool {
        self.station_a.is_permitted() && self.station_b.is_permitted()
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            station_a: self.station_a.union(&other.station_a),
            station_b: self.station_b.union(&other.station_b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CausalLog {
    /// Events in time order.
    pub events: Vec<SpacetimeEvent>,
    pub ledger: InformationLedger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CausalityReport {
    pub spacelike: bool,
    pub ledger_clean: bool,
}

/// How each station picks its setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SettingSampler {
    Fixed { a: UnitVector3, b: UnitVector3 },
    /// Each station flips a fair coin between its two CHSH settings.
    RandomChsh(ChshSettings),
}

impl SettingSampler {
    /// Returns the chosen setting and its index (0 unprimed, 1 primed).
    fn choose(&self, side: Side, rng: &mut RngStream) -> (UnitVector3, usize) {
        match (self, side) {
            (SettingSampler::Fixed { a, .. }, Side::A) => (*a, 0),
            (SettingSampler::Fixed { b, .. }, Side::B) => (*b, 0),
            (SettingSampler::RandomChsh(s), side) => {
                let primed = rng.next_f64() >= 0.5;
                let setting = match (side, primed) {
                    (Side::A, false) => s.a,
                    (Side::A, true) => s.a_prime,
                    (Side::B, false) => s.b,
                    (Side::B, true) => s.b_prime,
                };
                (setting, usize::from(primed))
            }
        }
    }
}

/// Index into [`ChshSettings::pairs`] order for the chosen setting indices.
fn pair_bin(a_index: usize, b_index: usize) -> usize {
    match (a_index, b_index) {
        (0, 0) => 0,
        (1, 0) => 1,
        (0, 1) => 2,
        _ => 3,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarnessTrial {
    pub value: TrialValue,
    pub log: CausalLog,
    /// CHSH bin in [`ChshSettings::pairs`] order (always 0 for fixed settings).
    pub bin: usize,
}

fn run_validated_trial(
    schedule: &TrialSchedule,
    model: &dyn MeasurementModel,
    sampler: &SettingSampler,
    streams: &mut TrialStreams,
) -> HarnessTrial {
    let payload: SharedPayload = model.emit(&mut streams.source);
    let (setting_a, index_a) = sampler.choose(Side::A, &mut streams.choice_a);
    let (setting_b, index_b) = sampler.choose(Side::B, &mut streams.choice_b);
    let trial = evaluate_trial(model, setting_a, setting_b, &payload, &mut streams.station_a, &mut streams.station_b);

    let event = |actor: Actor, kind, time, detail| SpacetimeEvent {
        actor,
        kind,
        position: schedule.position(actor),
        time,
        detail,
    };
    let mut events = vec![
        event(Actor::Source, EventKind::Emit, schedule.emit, EventDetail::Emitted { lambda: payload.lambda }),
        event(Actor::StationA, EventKind::ChooseSetting, schedule.choose_a, EventDetail::Setting { direction: setting_a }),
        event(Actor::StationB, EventKind::ChooseSetting, schedule.choose_b, EventDetail::Setting { direction: setting_b }),
        event(Actor::StationA, EventKind::Measure, schedule.measure_a, EventDetail::Measured { record: trial.record_a }),
        event(Actor::StationB, EventKind::Measure, schedule.measure_b, EventDetail::Measured { record: trial.record_b }),
    ];
    events.sort_by(|x, y| x.time.total_cmp(&y.time));

    HarnessTrial {
        value: trial.value,
        log: CausalLog {
            events,
            ledger: InformationLedger { station_a: trial.inputs_a, station_b: trial.inputs_b },
        },
        bin: pair_bin(index_a, index_b),
    }
}

/// Runs one trial on `schedule`. Rejects schedules with ordering violations.
pub fn run_trial(
    schedule: &TrialSchedule,
    model: &dyn MeasurementModel,
    sampler: &SettingSampler,
    streams: &mut TrialStreams,
) -> Result<HarnessTrial> {
    schedule.validate()?;
    Ok(run_validated_trial(schedule, model, sampler, streams))
}

fn find_time(log: &CausalLog, actor: Actor, kind: EventKind) -> Option<f64> {
    log.events.iter().find(|e| e.actor == actor && e.kind == kind).map(|e| e.time)
}

/// Spacelike separation of the two measurements (from the logged times) and
/// ledger hygiene of both stations.
pub fn check_causality(log: &CausalLog, schedule: &TrialSchedule) -> Result<CausalityReport> {
    find_time(log, Actor::Source, EventKind::Emit).ok_or(Error::IncompleteLog("source emission"))?;
    find_time(log, Actor::StationA, EventKind::ChooseSetting).ok_or(Error::IncompleteLog("setting choice at A"))?;
    find_time(log, Actor::StationB, EventKind::ChooseSetting).ok_or(Error::IncompleteLog("setting choice at B"))?;
    let t_a = find_time(log, Actor::StationA, EventKind::Measure).ok_or(Error::IncompleteLog("measurement at A"))?;
    let t_b = find_time(log, Actor::StationB, EventKind::Measure).ok_or(Error::IncompleteLog("measurement at B"))?;
    Ok(CausalityReport {
        spacelike: spacelike(t_a, t_b, schedule),
        ledger_clean: log.ledger.is_clean(),
    })
}

/// Causality counts over a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct CausalitySummary {
    pub trials: u64,
    pub spacelike_trials: u64,
    pub clean_trials: u64,
    /// Union of the inputs read across all trials.
    pub inputs: InformationLedger,
}

impl CausalitySummary {
    fn record(&mut self, report: CausalityReport, ledger: &InformationLedger) {
        self.trials += 1;
        self.spacelike_trials += u64::from(report.spacelike);
        self.clean_trials += u64::from(report.ledger_clean);
        self.inputs = self.inputs.union(ledger);
    }

    fn merge(&mut self, other: &Self) {
        self.trials += other.trials;
        self.spacelike_trials += other.spacelike_trials;
        self.clean_trials += other.clean_trials;
        self.inputs = self.inputs.union(&other.inputs);
    }

    pub fn all_spacelike(&self) -> bool {
        self.spacelike_trials == self.trials
    }

    pub fn all_clean(&self) -> bool {
        self.clean_trials == self.trials
    }
}

#[derive(Debug, Default)]
struct HarnessTotals {
    bins: [ValueMoments; 4],
    summary: CausalitySummary,
    logs: Vec<CausalLog>,
}

impl HarnessTotals {
    fn merge(&mut self, other: HarnessTotals) {
        for (mine, theirs) in self.bins.iter_mut().zip(&other.bins) {
            mine.merge(theirs);
        }
        self.summary.merge(&other.summary);
        self.logs.extend(other.logs);
    }
}

fn run_harness(
    schedule: &TrialSchedule,
    model: &dyn MeasurementModel,
    sampler: &SettingSampler,
    n: u64,
    seed: u64,
    substream: u64,
    keep_logs: usize,
) -> Result<HarnessTotals> {
    schedule.validate()?;
    if n == 0 {
        return Err(Error::TooFewTrials { min: 1, got: 0 });
    }
    let plan = BatchPlan::new(n, seed, substream);
    Ok(plan.fold(
        plan.all_batches(),
        |streams, batch, len| {
            let mut totals = HarnessTotals::default();
            for i in 0..len {
                let trial = run_validated_trial(schedule, model, sampler, streams);
                let report = check_causality(&trial.log, schedule).expect("harness logs are complete");
                totals.summary.record(report, &trial.log.ledger);
                totals.bins[trial.bin].push(&trial.value);
                if batch == 0 && (i as usize) < keep_logs {
                    totals.logs.push(trial.log);
                }
            }
            totals
        },
        HarnessTotals::default(),
        HarnessTotals::merge,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalityRun {
    pub estimate: CorrelationEstimate,
    pub causality: CausalitySummary,
    /// Logs of the first trials, for export.
    pub sample_logs: Vec<CausalLog>,
}

/// Fixed-setting run through the harness. The estimate is bit-identical to
/// [`estimate_correlation`](crate::experiments::estimate_correlation) with
/// the same model, settings, `n` and `seed`.
pub fn run_experiment(
    schedule: &TrialSchedule,
    model: &dyn MeasurementModel,
    a: UnitVector3,
    b: UnitVector3,
    n: u64,
    seed: u64,
    keep_logs: usize,
) -> Result<LocalityRun> {
    let sampler = SettingSampler::Fixed { a, b };
    let totals = run_harness(schedule, model, &sampler, n, seed, 0, keep_logs)?;
    Ok(LocalityRun {
        estimate: totals.bins[0].into_estimate(model.name(), a, b),
        causality: totals.summary,
        sample_logs: totals.logs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalityChshRun {
    pub chsh: ChshResult,
    pub causality: CausalitySummary,
    pub sample_logs: Vec<CausalLog>,
}

/// CHSH run where each station chooses between its two settings by a local
/// coin flip after emission.
pub fn run_chsh_experiment(
    schedule: &TrialSchedule,
    model: &dyn MeasurementModel,
    settings: &ChshSettings,
    n: u64,
    seed: u64,
    keep_logs: usize,
) -> Result<LocalityChshRun> {
    chsh_experiment_on_substream(schedule, model, settings, n, seed, 0, keep_logs)
}

pub(crate) fn chsh_experiment_on_substream(
    schedule: &TrialSchedule,
    model: &dyn MeasurementModel,
    settings: &ChshSettings,
    n: u64,
    seed: u64,
    substream: u64,
    keep_logs: usize,
) -> Result<LocalityChshRun> {
    let sampler = SettingSampler::RandomChsh(*settings);
    let totals = run_harness(schedule, model, &sampler, n, seed, substream, keep_logs)?;
    let pairs = settings.pairs();
    let estimates = std::array::from_fn(|k| totals.bins[k].into_estimate(model.name(), pairs[k].0, pairs[k].1));
    Ok(LocalityChshRun {
        chsh: ChshResult::from_estimates(estimates),
        causality: totals.summary,
        sample_logs: totals.logs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{QuantumSinglet, SignLhv};

    #[test]
    fn default_schedule_is_valid_and_spacelike() {
        let s = TrialSchedule::default();
        assert_eq!(s.validate(), Ok(()));
        assert!(s.is_spacelike());
        assert_eq!(s.light_crossing_time(), 2.0);
    }

    #[test]
    fn ordering_violations_are_diagnosed() {
        assert_eq!(
            TrialSchedule::new(1.0, 0.5, 0.5, 0.4, 0.9),
            Err(ScheduleError::MeasureBeforeSetting { station: Side::A, measure: 0.4, choose: 0.5 })
        );
        assert_eq!(
            TrialSchedule::new(1.0, 0.5, 0.0, 0.9, 0.9),
            Err(ScheduleError::SettingBeforeEmission { station: Side::B, choose: 0.0, emit: 0.0 })
        );
        assert_eq!(
            TrialSchedule::new(-1.0, 0.5, 0.5, 0.9, 0.9),
            Err(ScheduleError::NonPositiveSeparation(-1.0))
        );
        assert!(matches!(
            TrialSchedule::new(1.0, f64::NAN, 0.5, 0.9, 0.9),
            Err(ScheduleError::NonFinite(_))
        ));
    }

    #[test]
    fn timelike_measurements_are_flagged() {
        let s = TrialSchedule::new(0.1, 0.5, 0.5, 0.9, 1.4).unwrap();
        assert!(!s.is_spacelike());
        assert_eq!(
            s.require_spacelike(),
            Err(ScheduleError::TimelikeMeasurements { gap: (0.9f64 - 1.4).abs(), limit: 0.2 })
        );
    }

    #[test]
    fn trial_log_is_time_ordered_and_complete() {
        let schedule = TrialSchedule::new(1.0, 0.3, 0.6, 0.7, 0.95).unwrap();
        let mut streams = TrialStreams::for_batch(1, 0, 0);
        let sampler = SettingSampler::Fixed { a: UnitVector3::X, b: UnitVector3::Y };
        let trial = run_trial(&schedule, &SignLhv, &sampler, &mut streams).unwrap();
        let times: Vec<f64> = trial.log.events.iter().map(|e| e.time).collect();
        assert_eq!(times, vec![0.0, 0.3, 0.6, 0.7, 0.95]);
        assert_eq!(trial.log.events[0].kind, EventKind::Emit);
        assert_eq!(trial.log.events[1].position, -1.0);
        assert_eq!(trial.log.events[2].position, 1.0);
        let report = check_causality(&trial.log, &schedule).unwrap();
        assert_eq!(report, CausalityReport { spacelike: true, ledger_clean: true });
    }

    #[test]
    fn invalid_schedule_is_rejected_before_running() {
        let bad = TrialSchedule { measure_a: 0.1, ..TrialSchedule::default() };
        let mut streams = TrialStreams::for_batch(1, 0, 0);
        let sampler = SettingSampler::Fixed { a: UnitVector3::X, b: UnitVector3::X };
        assert!(matches!(
            run_trial(&bad, &QuantumSinglet, &sampler, &mut streams),
            Err(Error::Schedule(ScheduleError::MeasureBeforeSetting { station: Side::A, .. }))
        ));
    }

    #[test]
    fn incomplete_log_is_rejected() {
        let schedule = TrialSchedule::default();
        let mut streams = TrialStreams::for_batch(1, 0, 0);
        let sampler = SettingSampler::Fixed { a: UnitVector3::X, b: UnitVector3::X };
        let mut trial = run_trial(&schedule, &QuantumSinglet, &sampler, &mut streams).unwrap();
        trial.log.events.retain(|e| !(e.actor == Actor::StationB && e.kind == EventKind::Measure));
        assert_eq!(
            check_causality(&trial.log, &schedule),
            Err(Error::IncompleteLog("measurement at B"))
        );
    }

    #[test]
    fn random_chsh_fills_all_bins() {
        let run = run_chsh_experiment(
            &TrialSchedule::default(),
            &SignLhv,
            &ChshSettings::canonical(crate::models::ParticleKind::SpinHalf),
            20_000,
            1,
            3,
        )
        .unwrap();
        let total: u64 = run.chsh.correlations.iter().map(|e| e.n()).sum();
        assert_eq!(total, 20_000);
        assert!(run.chsh.correlations.iter().all(|e| e.n() > 4000));
        assert_eq!(run.sample_logs.len(), 3);
        assert!(run.causality.all_clean());
    }
}
