//! Correlation models behind one two-station measurement contract.
//!
//! A trial runs in three steps. The source emits a [`SharedPayload`]. Each
//! station then measures through a [`Station`] handle that exposes only its
//! own setting, the shared payload (oriented for its side) and its own random
//! stream, and produces a [`StationRecord`]. Finally the two records are
//! brought together and the model turns them into a [`TrialValue`], the way
//! coincidence data is compared after the fact over a classical channel.
//!
//! Every read through a [`Station`] is noted in an [`InputSet`], which the
//! locality harness audits.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::math::{sample_uniform_sphere, ComplexScalar, RngStream, UnitVector3};

mod algebraic;
mod fixtures;
mod quantum;
mod sign;

pub use algebraic::{algebraic_pair_value, AlgebraicShared};
pub use fixtures::RemoteSettingPeek;
pub use quantum::{
    qm_correlation, qm_joint_probabilities, qm_outcomes_from_uniforms, qm_sample_pair,
    JointProbabilities, QuantumSinglet,
};
pub use sign::{lhv_sign_outcomes, SignLhv};

/// What is being measured: spin-1/2 projections or photon polarizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParticleKind {
    SpinHalf,
    Photon,
}

impl ParticleKind {
    /// Multiplier taking an analyzer angle to the equivalent spin-1/2 angle.
    /// Orthogonal polarizations sit 90° apart, so photon angles double.
    pub fn angle_factor(self) -> f64 {
        match self {
            ParticleKind::SpinHalf => 1.0,
            ParticleKind::Photon => 2.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ParticleKind::SpinHalf => "spin",
            ParticleKind::Photon => "photon",
        }
    }
}

impl fmt::Display for ParticleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParticleKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "spin" | "spin-half" => Ok(ParticleKind::SpinHalf),
            "photon" => Ok(ParticleKind::Photon),
            other => Err(format!("unknown particle kind '{other}' (expected spin or photon)")),
        }
    }
}

/// Analyzer angle (radians, x–y plane) to the setting vector the models use.
pub fn map_setting(kind: ParticleKind, analyzer_angle: f64) -> Result<UnitVector3> {
    if !analyzer_angle.is_finite() {
        return Err(Error::NonFinite("analyzer angle"));
    }
    Ok(UnitVector3::planar(kind.angle_factor() * analyzer_angle))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Self {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

/// Emitted once per trial at the source. Station A associates `+λ`,
/// station B associates `-λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SharedPayload {
    pub lambda: UnitVector3,
}

impl SharedPayload {
    /// Draws `λ` uniformly on the sphere.
    pub fn emit(source: &mut RngStream) -> Self {
        Self { lambda: sample_uniform_sphere(source) }
    }

    pub fn oriented(&self, side: Side) -> UnitVector3 {
        match side {
            Side::A => self.lambda,
            Side::B => -self.lambda,
        }
    }
}

/// A single ±1 measurement result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Outcome {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
}

impl Outcome {
    pub fn value(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PairOutcome {
    pub a_out: Outcome,
    pub b_out: Outcome,
}

impl PairOutcome {
    pub fn product(&self) -> i8 {
        self.a_out.value() * self.b_out.value()
    }
}

/// Per-trial result: a pair of ±1 outcomes, or a complex scalar for models
/// whose pair product is not a product of two real outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TrialValue {
    Pair(PairOutcome),
    Complex(ComplexScalar),
}

impl TrialValue {
    /// The quantity averaged into a correlation: `AᵢBᵢ`, or `Re z`.
    pub fn real(&self) -> f64 {
        match self {
            TrialValue::Pair(p) => f64::from(p.product()),
            TrialValue::Complex(z) => z.re,
        }
    }

    pub fn imag(&self) -> Option<f64> {
        match self {
            TrialValue::Pair(_) => None,
            TrialValue::Complex(z) => Some(z.im),
        }
    }

    /// True iff the value is exactly `-1` (product or `-1 + 0i`).
    pub fn is_exact_anticorrelation(&self) -> bool {
        match self {
            TrialValue::Pair(p) => p.product() == -1,
            TrialValue::Complex(z) => z.re == -1.0 && z.im == 0.0,
        }
    }
}

/// What a station hands back after measuring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StationRecord {
    /// A definite ±1 result, fixed at the station.
    Outcome(Outcome),
    /// The station's operator `±λ·s` as an algebra element, together with the
    /// real shared direction the station holds.
    Operator {
        element: AlgebraElement,
        direction: UnitVector3,
    },
    /// The station's setting and one uniform draw; the outcome is resolved
    /// from the joint distribution when records are paired.
    Draw { setting: UnitVector3, uniform: f64 },
}

/// Inputs a station procedure read during one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
pub struct InputSet {
    pub own_setting: bool,
    pub payload: bool,
    pub own_rng: bool,
    pub remote_setting: bool,
}

impl InputSet {
    /// Everything a station may read: its setting, the payload, its stream.
    pub const PERMITTED: Self = Self {
        own_setting: true,
        payload: true,
        own_rng: true,
        remote_setting: false,
    };

    pub fn is_subset_of(&self, other: &Self) -> bool {
        (!self.own_setting || other.own_setting)
            && (!self.payload || other.payload)
            && (!self.own_rng || other.own_rng)
            && (!self.remote_setting || other.remote_setting)
    }

    pub fn is_permitted(&self) -> bool {
        self.is_subset_of(&Self::PERMITTED)
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            own_setting: self.own_setting || other.own_setting,
            payload: self.payload || other.payload,
            own_rng: self.own_rng || other.own_rng,
            remote_setting: self.remote_setting || other.remote_setting,
        }
    }

    /// Input names as seen from `side`, e.g. `setting_a`, `payload`, `rng_a`.
    pub fn names(&self, side: Side) -> Vec<String> {
        let (own, remote) = match side {
            Side::A => ("a", "b"),
            Side::B => ("b", "a"),
        };
        let mut names = Vec::new();
        if self.own_setting {
            names.push(format!("setting_{own}"));
        }
        if self.payload {
            names.push("payload".to_string());
        }
        if self.own_rng {
            names.push(format!("rng_{own}"));
        }
        if self.remote_setting {
            names.push(format!("setting_{remote}"));
        }
        names
    }
}

/// A station's view of one trial.
pub struct Station<'a> {
    side: Side,
    setting: UnitVector3,
    payload: &'a SharedPayload,
    rng: &'a mut RngStream,
    remote_setting: UnitVector3,
    inputs: InputSet,
}

impl<'a> Station<'a> {
    fn new(
        side: Side,
        setting: UnitVector3,
        payload: &'a SharedPayload,
        rng: &'a mut RngStream,
        remote_setting: UnitVector3,
    ) -> Self {
        Self {
            side,
            setting,
            payload,
            rng,
            remote_setting,
            inputs: InputSet::default(),
        }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn setting(&mut self) -> UnitVector3 {
        self.inputs.own_setting = true;
        self.setting
    }

    /// The shared direction as associated with this side (`±λ`).
    pub fn shared_direction(&mut self) -> UnitVector3 {
        self.inputs.payload = true;
        self.payload.oriented(self.side)
    }

    pub fn rng(&mut self) -> &mut RngStream {
        self.inputs.own_rng = true;
        self.rng
    }

    /// Reads the other station's setting. No shipped model calls this; it
    /// exists so that a violating model is visible in the ledger.
    pub fn remote_setting(&mut self) -> UnitVector3 {
        self.inputs.remote_setting = true;
        self.remote_setting
    }

    pub fn inputs(&self) -> InputSet {
        self.inputs
    }
}

/// The per-trial contract shared by all models.
pub trait MeasurementModel: Send + Sync {
    fn name(&self) -> &'static str;

    fn emit(&self, source: &mut RngStream) -> SharedPayload {
        SharedPayload::emit(source)
    }

    fn measure(&self, station: &mut Station<'_>) -> StationRecord;

    /// Combines the two stations' records after both measurements.
    fn pair(&self, a: &StationRecord, b: &StationRecord) -> TrialValue;
}

/// Everything one trial produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialEvaluation {
    pub value: TrialValue,
    pub record_a: StationRecord,
    pub record_b: StationRecord,
    pub inputs_a: InputSet,
    pub inputs_b: InputSet,
}

/// Runs both stations on an already emitted payload and pairs the records.
pub fn evaluate_trial(
    model: &dyn MeasurementModel,
    setting_a: UnitVector3,
    setting_b: UnitVector3,
    payload: &SharedPayload,
    rng_a: &mut RngStream,
    rng_b: &mut RngStream,
) -> TrialEvaluation {
    let mut station_a = Station::new(Side::A, setting_a, payload, rng_a, setting_b);
    let record_a = model.measure(&mut station_a);
    let inputs_a = station_a.inputs();

    let mut station_b = Station::new(Side::B, setting_b, payload, rng_b, setting_a);
    let record_b = model.measure(&mut station_b);
    let inputs_b = station_b.inputs();

    TrialEvaluation {
        value: model.pair(&record_a, &record_b),
        record_a,
        record_b,
        inputs_a,
        inputs_b,
    }
}

pub(crate) fn mismatched_records(model: &str) -> ! {
    panic!("{model}: paired records were not produced by this model")
}

/// Selector for the built-in models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelId {
    Qm,
    LhvSign,
    Algebraic,
    /// Test fixture whose station B reads the remote setting.
    NegativeControl,
}

impl ModelId {
    /// The three models under study (the negative control is excluded).
    pub const SHIPPED: [ModelId; 3] = [ModelId::Qm, ModelId::LhvSign, ModelId::Algebraic];

    pub fn model(self) -> &'static dyn MeasurementModel {
        match self {
            ModelId::Qm => &QuantumSinglet,
            ModelId::LhvSign => &SignLhv,
            ModelId::Algebraic => &AlgebraicShared,
            ModelId::NegativeControl => &RemoteSettingPeek,
        }
    }

    pub fn as_str(self) -> &'static str {
        self.model().name()
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "qm" => Ok(ModelId::Qm),
            "lhv-sign" => Ok(ModelId::LhvSign),
            "algebraic" => Ok(ModelId::Algebraic),
            "negative-control" => Ok(ModelId::NegativeControl),
            other => Err(format!(
                "unknown model '{other}' (expected qm, lhv-sign, algebraic or negative-control)"
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn map_setting_examples() {
        assert_eq!(map_setting(ParticleKind::SpinHalf, 0.0).unwrap(), UnitVector3::X);
        let photon = map_setting(ParticleKind::Photon, 22.5f64.to_radians()).unwrap();
        let expected = UnitVector3::planar(45f64.to_radians());
        assert!((photon.x() - expected.x()).abs() < 1e-15);
        assert!((photon.y() - expected.y()).abs() < 1e-15);
        let orthogonal = map_setting(ParticleKind::Photon, FRAC_PI_2).unwrap();
        assert!((orthogonal.x() + 1.0).abs() < 1e-15);
        assert!(orthogonal.y().abs() < 1e-15);
        assert!(map_setting(ParticleKind::Photon, f64::NAN).is_err());
        let _ = PI;
    }

    #[test]
    fn payload_orientation() {
        let payload = SharedPayload { lambda: UnitVector3::Z };
        assert_eq!(payload.oriented(Side::A), UnitVector3::Z);
        assert_eq!(payload.oriented(Side::B), -UnitVector3::Z);
    }

    #[test]
    fn input_names_follow_side() {
        let all = InputSet { remote_setting: true, ..InputSet::PERMITTED };
        assert_eq!(all.names(Side::A), ["setting_a", "payload", "rng_a", "setting_b"]);
        assert_eq!(all.names(Side::B), ["setting_b", "payload", "rng_b", "setting_a"]);
        assert!(!all.is_permitted());
        assert!(InputSet::PERMITTED.is_permitted());
        assert!(InputSet::default().is_permitted());
    }

    #[test]
    fn model_ids_round_trip_names() {
        for id in [ModelId::Qm, ModelId::LhvSign, ModelId::Algebraic, ModelId::NegativeControl] {
            assert_eq!(id.as_str().parse::<ModelId>().unwrap(), id);
        }
        assert!("bohm".parse::<ModelId>().is_err());
    }
}
