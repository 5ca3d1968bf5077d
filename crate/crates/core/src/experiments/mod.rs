//! Correlation estimates, angle sweeps, CHSH evaluation and model audits.

use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::math::{sample_uniform_sphere, RngStream, UnitVector3};
use crate::models::{evaluate_trial, map_setting, qm_correlation, MeasurementModel, Outcome, ParticleKind, TrialValue};

mod audit;
pub(crate) mod engine;
mod stats;

pub use audit::{
    audit_model, matched_setting_check, AuditReport, Codomain, MarginalBalance, MatchedSettingCheck,
    OutcomeResolution, AUDIT_NOTE, MIN_AUDIT_TRIALS,
};
pub use stats::Moments;

pub use engine::TrialStreams;
use engine::{split_range, BatchPlan};

/// Monte Carlo estimate of `P(a, b) = ⟨AᵢBᵢ⟩` (or `⟨Re z⟩`, with the
/// imaginary part tracked alongside).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationEstimate {
    pub model: String,
    pub a: UnitVector3,
    pub b: UnitVector3,
    pub re: Moments,
    pub im: Option<Moments>,
}

impl CorrelationEstimate {
    pub fn mean(&self) -> f64 {
        self.re.mean()
    }

    pub fn stderr(&self) -> f64 {
        self.re.stderr()
    }

    pub fn n(&self) -> u64 {
        self.re.count()
    }

    pub fn im_mean(&self) -> Option<f64> {
        self.im.map(|m| m.mean())
    }

    pub fn im_stderr(&self) -> Option<f64> {
        self.im.map(|m| m.stderr())
    }
}

/// Real and (optional) imaginary moments of per-trial values.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct ValueMoments {
    pub re: Moments,
    pub im: Option<Moments>,
}

impl ValueMoments {
    pub fn push(&mut self, value: &TrialValue) {
        self.re.push(value.real());
        if let Some(im) = value.imag() {
            self.im.get_or_insert_with(Moments::new).push(im);
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.re.merge(&other.re);
        match (&mut self.im, other.im) {
            (Some(mine), Some(theirs)) => mine.merge(&theirs),
            (None, Some(theirs)) => self.im = Some(theirs),
            _ => {}
        }
    }

    pub fn into_estimate(self, model: &str, a: UnitVector3, b: UnitVector3) -> CorrelationEstimate {
        CorrelationEstimate {
            model: model.to_string(),
            a,
            b,
            re: self.re,
            im: self.im,
        }
    }
}

fn require_trials(n: u64, min: u64) -> Result<()> {
    if n < min {
        return Err(Error::TooFewTrials { min, got: n });
    }
    Ok(())
}

/// One trial with fixed settings: emit, measure at both stations, pair.
pub(crate) fn fixed_setting_trial(
    model: &dyn MeasurementModel,
    a: UnitVector3,
    b: UnitVector3,
    streams: &mut TrialStreams,
) -> TrialValue {
    let payload = model.emit(&mut streams.source);
    evaluate_trial(model, a, b, &payload, &mut streams.station_a, &mut streams.station_b).value
}

fn estimate_batches(
    model: &dyn MeasurementModel,
    a: UnitVector3,
    b: UnitVector3,
    plan: &BatchPlan,
    batches: Range<u64>,
) -> CorrelationEstimate {
    plan.fold(
        batches,
        |streams, _, len| {
            let mut acc = ValueMoments::default();
            for _ in 0..len {
                acc.push(&fixed_setting_trial(model, a, b, streams));
            }
            acc
        },
        ValueMoments::default(),
        |acc, part| acc.merge(&part),
    )
    .into_estimate(model.name(), a, b)
}

pub(crate) fn estimate_on_substream(
    model: &dyn MeasurementModel,
    a: UnitVector3,
    b: UnitVector3,
    n: u64,
    seed: u64,
    substream: u64,
) -> Result<CorrelationEstimate> {
    require_trials(n, 1)?;
    let plan = BatchPlan::new(n, seed, substream);
    Ok(estimate_batches(model, a, b, &plan, plan.all_batches()))
}

/// Estimates the correlation of `model` at settings `(a, b)` from `n` trials.
/// Deterministic in `seed` and independent of the rayon thread count.
pub fn estimate_correlation(
    model: &dyn MeasurementModel,
    a: UnitVector3,
    b: UnitVector3,
    n: u64,
    seed: u64,
) -> Result<CorrelationEstimate> {
    estimate_on_substream(model, a, b, n, seed, 0)
}

/// The same run as [`estimate_correlation`] cut into `parts` independent
/// partial estimates; merging them in order reproduces the full estimate
/// bit for bit.
pub fn estimate_partitioned(
    model: &dyn MeasurementModel,
    a: UnitVector3,
    b: UnitVector3,
    n: u64,
    seed: u64,
    parts: u64,
) -> Result<Vec<CorrelationEstimate>> {
    require_trials(n, 1)?;
    let plan = BatchPlan::new(n, seed, 0);
    Ok(split_range(plan.all_batches(), parts)
        .into_iter()
        .filter(|r| !r.is_empty())
        .map(|r| estimate_batches(model, a, b, &plan, r))
        .collect())
}

/// Pools partial estimates of the same model and settings, in order.
pub fn merge_estimates(parts: &[CorrelationEstimate]) -> Result<CorrelationEstimate> {
    let (first, rest) = parts.split_first().ok_or(Error::NothingToMerge)?;
    let mut pooled = ValueMoments { re: first.re, im: first.im };
    for part in rest {
        if part.model != first.model {
            return Err(Error::MismatchedEstimates("model"));
        }
        if part.a != first.a || part.b != first.b {
            return Err(Error::MismatchedEstimates("settings"));
        }
        if part.im.is_some() != first.im.is_some() {
            return Err(Error::MismatchedEstimates("value codomain"));
        }
        pooled.merge(&ValueMoments { re: part.re, im: part.im });
    }
    Ok(pooled.into_estimate(&first.model, first.a, first.b))
}

/// One row of an angle sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    /// Relative analyzer angle, radians.
    pub theta: f64,
    pub estimate: CorrelationEstimate,
    /// The singlet correlation at this angle.
    pub reference: f64,
}

/// Coplanar sweep: `a` at analyzer angle 0, `b` at each grid angle. Point `i`
/// runs on its own substream.
pub fn sweep(
    model: &dyn MeasurementModel,
    kind: ParticleKind,
    grid: &[f64],
    n_per_point: u64,
    seed: u64,
) -> Result<Vec<SweepPoint>> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let a = map_setting(kind, 0.0)?;
    grid.iter()
        .enumerate()
        .map(|(i, &theta)| {
            let b = map_setting(kind, theta)?;
            let estimate = estimate_on_substream(model, a, b, n_per_point, seed, i as u64)?;
            let analyzer_a = UnitVector3::planar(0.0);
            let analyzer_b = UnitVector3::planar(theta);
            let reference = qm_correlation(&analyzer_a, &analyzer_b, kind);
            Ok(SweepPoint { theta, estimate, reference })
        })
        .collect()
}

/// The four settings of a CHSH run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshSettings {
    pub a: UnitVector3,
    pub a_prime: UnitVector3,
    pub b: UnitVector3,
    pub b_prime: UnitVector3,
}

/// Canonical analyzer angles in degrees, ordered `a, a′, b, b′`.
pub const CANONICAL_SPIN_DEGREES: [f64; 4] = [0.0, 90.0, 45.0, 135.0];
pub const CANONICAL_PHOTON_DEGREES: [f64; 4] = [0.0, 45.0, 22.5, 67.5];

impl ChshSettings {
    /// Settings from analyzer angles in radians, ordered `a, a′, b, b′`.
    pub fn from_angles(kind: ParticleKind, angles: [f64; 4]) -> Result<Self> {
        Ok(Self {
            a: map_setting(kind, angles[0])?,
            a_prime: map_setting(kind, angles[1])?,
            b: map_setting(kind, angles[2])?,
            b_prime: map_setting(kind, angles[3])?,
        })
    }

    pub fn canonical(kind: ParticleKind) -> Self {
        let degrees = match kind {
            ParticleKind::SpinHalf => CANONICAL_SPIN_DEGREES,
            ParticleKind::Photon => CANONICAL_PHOTON_DEGREES,
        };
        Self::from_angles(kind, degrees.map(f64::to_radians)).expect("canonical angles are finite")
    }

    /// Setting pairs in combination order: `(a,b), (a′,b), (a,b′), (a′,b′)`.
    pub fn pairs(&self) -> [(UnitVector3, UnitVector3); 4] {
        [
            (self.a, self.b),
            (self.a_prime, self.b),
            (self.a, self.b_prime),
            (self.a_prime, self.b_prime),
        ]
    }
}

/// Signs of `P(a,b) + P(a′,b) − P(a,b′) + P(a′,b′)`, in [`ChshSettings::pairs`] order.
pub const CHSH_SIGNS: [f64; 4] = [1.0, 1.0, -1.0, 1.0];

pub fn chsh_combination(correlations: [f64; 4]) -> f64 {
    correlations.iter().zip(CHSH_SIGNS).map(|(e, s)| s * e).sum()
}

/// `AB + A′B − AB′ + A′B′` for one joint assignment of ±1 values.
pub fn chsh_assignment(a: Outcome, a_prime: Outcome, b: Outcome, b_prime: Outcome) -> i8 {
    let (a, a_prime, b, b_prime) = (a.value(), a_prime.value(), b.value(), b_prime.value());
    a * b + a_prime * b - a * b_prime + a_prime * b_prime
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshResult {
    /// Estimates in [`ChshSettings::pairs`] order.
    pub correlations: [CorrelationEstimate; 4],
    pub s_value: f64,
    pub s_stderr: f64,
}

impl ChshResult {
    pub fn from_estimates(correlations: [CorrelationEstimate; 4]) -> Self {
        let s_value = chsh_combination(correlations.clone().map(|e| e.mean()));
        let s_stderr = correlations.iter().map(|e| e.stderr().powi(2)).sum::<f64>().sqrt();
        Self { correlations, s_value, s_stderr }
    }
}

pub(crate) fn chsh_on_substreams(
    model: &dyn MeasurementModel,
    settings: &ChshSettings,
    n: u64,
    seed: u64,
    first_substream: u64,
) -> Result<ChshResult> {
    let [e0, e1, e2, e3] = settings.pairs();
    let run = |k: u64, (a, b): (UnitVector3, UnitVector3)| {
        estimate_on_substream(model, a, b, n, seed, first_substream + k)
    };
    Ok(ChshResult::from_estimates([run(0, e0)?, run(1, e1)?, run(2, e2)?, run(3, e3)?]))
}

/// Estimates the four correlations on independent substreams and combines them.
pub fn chsh(model: &dyn MeasurementModel, settings: &ChshSettings, n: u64, seed: u64) -> Result<ChshResult> {
    chsh_on_substreams(model, settings, n, seed, 0)
}

/// Draws a direction whose squared norm is exactly 1.0 in floating point, so
/// that `a·a = 1` holds without rounding.
pub(crate) fn sample_exact_unit(rng: &mut RngStream) -> UnitVector3 {
    loop {
        let v = sample_uniform_sphere(rng);
        if v.has_exact_unit_norm() {
            return v;
        }
    }
}
