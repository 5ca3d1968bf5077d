//! The shared-vector model with anticommuting components.
//!
//! Station A holds the operator `λ·a`, station B holds `-λ·b`. Pairing
//! multiplies them in the algebra, `(λ·a)(-λ·b) = -(a·b) - i(a×b)·λ`, and the
//! residual vector part is evaluated at the real direction emitted by the
//! source. The result is a complex scalar: no ±1 outcome is extracted.

use super::{mismatched_records, MeasurementModel, SharedPayload, Station, StationRecord, TrialValue};
use crate::algebra::{algebra_mul, embed_vector};
use crate::math::{cross, dot, ComplexScalar, UnitVector3};

/// Closed form of the paired value: `z = -[(a·b) + i λ·(a×b)]`.
pub fn algebraic_pair_value(payload: &SharedPayload, a: &UnitVector3, b: &UnitVector3) -> ComplexScalar {
    let residual = payload.lambda.as_vector().dot(&cross(a, b));
    -ComplexScalar::new(dot(a, b), residual)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AlgebraicShared;

impl MeasurementModel for AlgebraicShared {
    fn name(&self) -> &'static str {
        "algebraic"
    }

    fn measure(&self, station: &mut Station<'_>) -> StationRecord {
        let setting = station.setting();
        let direction = station.shared_direction();
        let orientation = match station.side() {
            super::Side::A => 1.0,
            super::Side::B => -1.0,
        };
        StationRecord::Operator {
            element: embed_vector(&setting).scale(orientation.into()),
            direction,
        }
    }

    fn pair(&self, a: &StationRecord, b: &StationRecord) -> TrialValue {
        match (a, b) {
            (
                StationRecord::Operator { element: ea, direction },
                StationRecord::Operator { element: eb, .. },
            ) => TrialValue::Complex(algebra_mul(ea, eb).evaluate_at(direction)),
            _ => mismatched_records(self.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{sample_uniform_sphere, RngStream};
    use crate::models::evaluate_trial;

    #[test]
    fn quarter_turn_about_z() {
        let payload = SharedPayload { lambda: UnitVector3::Z };
        let z = algebraic_pair_value(&payload, &UnitVector3::X, &UnitVector3::Y);
        assert_eq!(z, ComplexScalar::new(0.0, -1.0));
    }

    #[test]
    fn algebra_route_matches_closed_form() {
        let mut rng = RngStream::new(9, 0);
        let mut rng_a = RngStream::new(9, 1);
        let mut rng_b = RngStream::new(9, 2);
        for _ in 0..10_000 {
            let payload = SharedPayload::emit(&mut rng);
            let a = sample_uniform_sphere(&mut rng);
            let b = sample_uniform_sphere(&mut rng);
            let trial = evaluate_trial(&AlgebraicShared, a, b, &payload, &mut rng_a, &mut rng_b);
            let TrialValue::Complex(z) = trial.value else { panic!("expected a complex value") };
            assert!((z - algebraic_pair_value(&payload, &a, &b)).norm() < 1e-12);
            assert!(z.re.abs() <= 1.0 && z.im.abs() <= 1.0);
        }
    }

    #[test]
    fn matched_settings_give_exactly_minus_one() {
        let mut rng = RngStream::new(4, 0);
        let mut rng_a = RngStream::new(4, 1);
        let mut rng_b = RngStream::new(4, 2);
        let a = UnitVector3::planar(1.3);
        assert!(a.has_exact_unit_norm());
        for _ in 0..10_000 {
            let payload = SharedPayload::emit(&mut rng);
            let trial = evaluate_trial(&AlgebraicShared, a, a, &payload, &mut rng_a, &mut rng_b);
            assert_eq!(trial.value, TrialValue::Complex(ComplexScalar::new(-1.0, 0.0)));
            assert_eq!(algebraic_pair_value(&payload, &a, &a), ComplexScalar::new(-1.0, 0.0));
        }
    }
}
