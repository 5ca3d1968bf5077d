//! The deterministic hidden-variable rule `A(a) = sign(λ·a)`, `B(b) = sign(-λ·b)`.

use super::{
    mismatched_records, MeasurementModel, Outcome, PairOutcome, SharedPayload, Side, Station,
    StationRecord, TrialValue,
};
use crate::math::UnitVector3;

/// `sign(x)` with the zero case resolved by side: `+1` at A, `-1` at B.
/// `λ·a = 0` has probability zero; the split keeps `A(a) = -B(a)` exact.
fn signed_outcome(projection: f64, side: Side) -> Outcome {
    if projection > 0.0 {
        Outcome::Plus
    } else if projection < 0.0 {
        Outcome::Minus
    } else {
        match side {
            Side::A => Outcome::Plus,
            Side::B => Outcome::Minus,
        }
    }
}

fn station_outcome(direction: &UnitVector3, setting: &UnitVector3, side: Side) -> Outcome {
    signed_outcome(direction.as_vector().dot(&setting.as_vector()), side)
}

pub fn lhv_sign_outcomes(payload: &SharedPayload, a: &UnitVector3, b: &UnitVector3) -> PairOutcome {
    PairOutcome {
        a_out: station_outcome(&payload.oriented(Side::A), a, Side::A),
        b_out: station_outcome(&payload.oriented(Side::B), b, Side::B),
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SignLhv;

impl MeasurementModel for SignLhv {
    fn name(&self) -> &'static str {
        "lhv-sign"
    }

    fn measure(&self, station: &mut Station<'_>) -> StationRecord {
        let setting = station.setting();
        let direction = station.shared_direction();
        StationRecord::Outcome(station_outcome(&direction, &setting, station.side()))
    }

    fn pair(&self, a: &StationRecord, b: &StationRecord) -> TrialValue {
        match (a, b) {
            (StationRecord::Outcome(a_out), StationRecord::Outcome(b_out)) => TrialValue::Pair(PairOutcome {
                a_out: *a_out,
                b_out: *b_out,
            }),
            _ => mismatched_records(self.name()),
        }
    }
}
