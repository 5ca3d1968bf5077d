//! Exact singlet statistics.

use serde::Serialize;

use super::{
    mismatched_records, MeasurementModel, Outcome, PairOutcome, ParticleKind, Station,
    StationRecord, TrialValue,
};
use crate::math::{dot, relative_angle, RngStream, UnitVector3};

/// Singlet correlation for unit settings. For [`ParticleKind::Photon`] the
/// inputs are analyzer directions and the relative angle is doubled.
pub fn qm_correlation(a: &UnitVector3, b: &UnitVector3, kind: ParticleKind) -> f64 {
    match kind {
        ParticleKind::SpinHalf => -dot(a, b),
        ParticleKind::Photon => -(2.0 * relative_angle(a, b)).cos(),
    }
}

/// Joint outcome probabilities `P(s, t) = (1 - s·t·(a·b)) / 4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointProbabilities {
    pub plus_plus: f64,
    pub plus_minus: f64,
    pub minus_plus: f64,
    pub minus_minus: f64,
}

impl JointProbabilities {
    pub fn get(&self, a_out: Outcome, b_out: Outcome) -> f64 {
        match (a_out, b_out) {
            (Outcome::Plus, Outcome::Plus) => self.plus_plus,
            (Outcome::Plus, Outcome::Minus) => self.plus_minus,
            (Outcome::Minus, Outcome::Plus) => self.minus_plus,
            (Outcome::Minus, Outcome::Minus) => self.minus_minus,
        }
    }

    pub fn total(&self) -> f64 {
        self.plus_plus + self.plus_minus + self.minus_plus + self.minus_minus
    }
}

pub fn qm_joint_probabilities(a: &UnitVector3, b: &UnitVector3) -> JointProbabilities {
    let ab = dot(a, b);
    let same = (1.0 - ab) / 4.0;
    let opposite = (1.0 + ab) / 4.0;
    JointProbabilities {
        plus_plus: same,
        plus_minus: opposite,
        minus_plus: opposite,
        minus_minus: same,
    }
}

/// Inverse-CDF sampling of the joint distribution from two uniforms: `u_a`
/// picks A's outcome with probability 1/2, `u_b` picks B's outcome from the
/// conditional `P(t | s) = (1 - s·t·(a·b)) / 2`.
pub fn qm_outcomes_from_uniforms(a: &UnitVector3, b: &UnitVector3, u_a: f64, u_b: f64) -> PairOutcome {
    let a_out = if u_a < 0.5 { Outcome::Plus } else { Outcome::Minus };
    let s = f64::from(a_out.value());
    let p_b_plus = (1.0 - s * dot(a, b)) / 2.0;
    let b_out = if u_b < p_b_plus { Outcome::Plus } else { Outcome::Minus };
    PairOutcome { a_out, b_out }
}

/// One draw from [`qm_joint_probabilities`]; consumes two uniforms.
pub fn qm_sample_pair(a: &UnitVector3, b: &UnitVector3, rng: &mut RngStream) -> PairOutcome {
    let u_a = rng.next_f64();
    let u_b = rng.next_f64();
    qm_outcomes_from_uniforms(a, b, u_a, u_b)
}

/// Singlet statistics. Each station records its setting and one local
/// uniform; outcomes are drawn from the joint distribution when the records
/// are paired, since the singlet assigns no outcome to a single side.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuantumSinglet;

impl MeasurementModel for QuantumSinglet {
    fn name(&self) -> &'static str {
        "qm"
    }

    fn measure(&self, station: &mut Station<'_>) -> StationRecord {
        let setting = station.setting();
        let uniform = station.rng().next_f64();
        StationRecord::Draw { setting, uniform }
    }

    fn pair(&self, a: &StationRecord, b: &StationRecord) -> TrialValue {
        match (a, b) {
            (
                StationRecord::Draw { setting: sa, uniform: ua },
                StationRecord::Draw { setting: sb, uniform: ub },
            ) => TrialValue::Pair(qm_outcomes_from_uniforms(sa, sb, *ua, *ub)),
            _ => mismatched_records(self.name()),
        }
    }
}
