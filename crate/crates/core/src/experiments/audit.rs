//! Side-by-side audit of a model's checkable properties. Every field is
//! filled from executed trials or from the harness ledger.

use serde::Serialize;

use super::engine::BatchPlan;
use super::{chsh_on_substreams, require_trials, sample_exact_unit, ChshResult, ChshSettings, Moments};
use crate::error::Result;
use crate::locality::{chsh_experiment_on_substream, CausalitySummary, TrialSchedule};
use crate::math::sample_uniform_sphere;
use crate::models::{evaluate_trial, MeasurementModel, ParticleKind, StationRecord, TrialValue};

pub const MIN_AUDIT_TRIALS: u64 = 10_000;

/// Substreams used by the audit, offset from those of plain estimates.
const MATCHED_SUBSTREAM: u64 = 1000;
const MARGINAL_SUBSTREAM: u64 = 1001;
const CHSH_SUBSTREAM: u64 = 1002;
const LOCALITY_SUBSTREAM: u64 = 1006;

/// What a single trial produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Codomain {
    #[serde(rename = "real ±1 pair")]
    RealPair,
    #[serde(rename = "complex scalar")]
    ComplexScalar,
    #[serde(rename = "mixed")]
    Mixed,
}

impl Codomain {
    pub fn as_str(self) -> &'static str {
        match self {
            Codomain::RealPair => "real ±1 pair",
            Codomain::ComplexScalar => "complex scalar",
            Codomain::Mixed => "mixed",
        }
    }
}

/// Where the per-trial value becomes definite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OutcomeResolution {
    /// Each station returns a definite ±1 outcome.
    #[serde(rename = "at stations")]
    Stations,
    /// The value only exists once both records are combined.
    #[serde(rename = "at pairing")]
    Pairing,
}

impl OutcomeResolution {
    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeResolution::Stations => "at stations",
            OutcomeResolution::Pairing => "at pairing",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MatchedSettingCheck {
    pub trials: u64,
    /// Trials whose value was not exactly `-1`.
    pub exceptions: u64,
}

impl MatchedSettingCheck {
    pub fn exact(&self) -> bool {
        self.trials > 0 && self.exceptions == 0
    }
}

/// Single-side outcome means under independently random settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginalBalance {
    pub a: Moments,
    pub b: Moments,
}

impl MarginalBalance {
    /// Both means within 4 standard errors of zero.
    pub fn balanced(&self) -> bool {
        [self.a, self.b].iter().all(|m| m.mean().abs() <= 4.0 * m.stderr().max(f64::MIN_POSITIVE))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub model: String,
    pub trials: u64,
    pub seed: u64,
    pub codomain: Codomain,
    pub outcome_resolution: OutcomeResolution,
    pub matched_setting: MatchedSettingCheck,
    /// `None` when trials carry no ±1 outcomes.
    pub marginals: Option<MarginalBalance>,
    pub chsh: ChshResult,
    pub locality: CausalitySummary,
    pub note: &'static str,
}

impl AuditReport {
    pub fn locality_compliant(&self) -> bool {
        self.locality.all_clean()
    }

    /// `|S|` above 2 by more than four standard errors.
    pub fn violates_chsh_bound(&self) -> bool {
        self.chsh.s_value.abs() > 2.0 + 4.0 * self.chsh.s_stderr
    }
}

pub const AUDIT_NOTE: &str = "the locality ledger certifies which inputs each station procedure read; \
it does not certify any physical mechanism";

#[derive(Default)]
struct Observations {
    pair_values: u64,
    complex_values: u64,
    station_resolved: u64,
    pairing_resolved: u64,
    matched: u64,
    exceptions: u64,
}

impl Observations {
    fn merge(&mut self, other: Observations) {
        self.pair_values += other.pair_values;
        self.complex_values += other.complex_values;
        self.station_resolved += other.station_resolved;
        self.pairing_resolved += other.pairing_resolved;
        self.matched += other.matched;
        self.exceptions += other.exceptions;
    }

    fn codomain(&self) -> Codomain {
        match (self.pair_values, self.complex_values) {
            (_, 0) => Codomain::RealPair,
            (0, _) => Codomain::ComplexScalar,
            _ => Codomain::Mixed,
        }
    }

    fn resolution(&self) -> OutcomeResolution {
        if self.pairing_resolved == 0 {
            OutcomeResolution::Stations
        } else {
            OutcomeResolution::Pairing
        }
    }
}

fn matched_setting_trials(model: &dyn MeasurementModel, n: u64, seed: u64) -> Observations {
    let plan = BatchPlan::new(n, seed, MATCHED_SUBSTREAM);
    plan.fold(
        plan.all_batches(),
        |streams, _, len| {
            let mut obs = Observations::default();
            for _ in 0..len {
                let setting = sample_exact_unit(&mut streams.choice_a);
                let payload = model.emit(&mut streams.source);
                let trial =
                    evaluate_trial(model, setting, setting, &payload, &mut streams.station_a, &mut streams.station_b);
                match trial.value {
                    TrialValue::Pair(_) => obs.pair_values += 1,
                    TrialValue::Complex(_) => obs.complex_values += 1,
                }
                let both_definite = matches!(
                    (trial.record_a, trial.record_b),
                    (StationRecord::Outcome(_), StationRecord::Outcome(_))
                );
                if both_definite {
                    obs.station_resolved += 1;
                } else {
                    obs.pairing_resolved += 1;
                }
                obs.matched += 1;
                obs.exceptions += u64::from(!trial.value.is_exact_anticorrelation());
            }
            obs
        },
        Observations::default(),
        Observations::merge,
    )
}

/// Runs trials at matched random settings and counts values other than
/// exactly `-1`. Settings are drawn with an exactly representable unit norm.
pub fn matched_setting_check(model: &dyn MeasurementModel, n: u64, seed: u64) -> MatchedSettingCheck {
    let obs = matched_setting_trials(model, n, seed);
    MatchedSettingCheck { trials: obs.matched, exceptions: obs.exceptions }
}

fn marginal_balance(model: &dyn MeasurementModel, n: u64, seed: u64) -> Option<MarginalBalance> {
    let plan = BatchPlan::new(n, seed, MARGINAL_SUBSTREAM);
    let (a, b, complete) = plan.fold(
        plan.all_batches(),
        |streams, _, len| {
            let (mut a, mut b, mut complete) = (Moments::new(), Moments::new(), true);
            for _ in 0..len {
                let setting_a = sample_uniform_sphere(&mut streams.choice_a);
                let setting_b = sample_uniform_sphere(&mut streams.choice_b);
                let payload = model.emit(&mut streams.source);
                let trial =
                    evaluate_trial(model, setting_a, setting_b, &payload, &mut streams.station_a, &mut streams.station_b);
                match trial.value {
                    TrialValue::Pair(pair) => {
                        a.push(f64::from(pair.a_out.value()));
                        b.push(f64::from(pair.b_out.value()));
                    }
                    TrialValue::Complex(_) => complete = false,
                }
            }
            (a, b, complete)
        },
        (Moments::new(), Moments::new(), true),
        |acc, part| {
            acc.0.merge(&part.0);
            acc.1.merge(&part.1);
            acc.2 &= part.2;
        },
    );
    complete.then_some(MarginalBalance { a, b })
}

/// Audits `model` with `n` trials per check (`n ≥ 10⁴`).
pub fn audit_model(model: &dyn MeasurementModel, n: u64, seed: u64) -> Result<AuditReport> {
    require_trials(n, MIN_AUDIT_TRIALS)?;
    let observed = matched_setting_trials(model, n, seed);
    let marginals = marginal_balance(model, n, seed);
    let canonical = ChshSettings::canonical(ParticleKind::SpinHalf);
    let chsh: ChshResult = chsh_on_substreams(model, &canonical, n, seed, CHSH_SUBSTREAM)?;
    let locality = chsh_experiment_on_substream(
        &TrialSchedule::default(),
        model,
        &canonical,
        n,
        seed,
        LOCALITY_SUBSTREAM,
        0,
    )?
    .causality;

    Ok(AuditReport {
        model: model.name().to_string(),
        trials: n,
        seed,
        codomain: observed.codomain(),
        outcome_resolution: observed.resolution(),
        matched_setting: MatchedSettingCheck { trials: observed.matched, exceptions: observed.exceptions },
        marginals,
        chsh,
        locality,
        note: AUDIT_NOTE,
    })
}
