//! Negative control for the locality ledger.

use super::{
    mismatched_records, MeasurementModel, Outcome, PairOutcome, Side, Station, StationRecord,
    TrialValue,
};
use crate::math::relative_angle;

/// Reproduces `-cos θ` with definite ±1 outcomes by letting station B read
/// station A's setting. Station A answers `sign(λ·a)`; station B recomputes
/// that answer and anti-aligns with probability `(1 + cos θ) / 2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct RemoteSettingPeek;

impl MeasurementModel for RemoteSettingPeek {
    fn name(&self) -> &'static str {
        "negative-control"
    }

    fn measure(&self, station: &mut Station<'_>) -> StationRecord {
        let setting = station.setting();
        let direction = station.shared_direction();
        match station.side() {
            Side::A => StationRecord::Outcome(sign_or_plus(direction.as_vector().dot(&setting.as_vector()))),
            Side::B => {
                let remote = station.remote_setting();
                let a_out = sign_or_plus(-direction.as_vector().dot(&remote.as_vector()));
                let theta = relative_angle(&remote, &setting);
                let anti = station.rng().next_f64() < (1.0 + theta.cos()) / 2.0;
                StationRecord::Outcome(if anti { a_out.flipped() } else { a_out })
            }
        }
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

fn sign_or_plus(x: f64) -> Outcome {
    if x >= 0.0 {
        Outcome::Plus
    } else {
        Outcome::Minus
    }
}
