//! Vector geometry, complex scalars, seeded random streams and uniform
//! sampling on the 2-sphere.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Complex coefficients of algebra elements and per-trial complex values.
pub type ComplexScalar = num_complex::Complex64;

/// A plain 3-vector with no norm constraint (cross products, rotated axes).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vector3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vector3 {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &Self) -> Self {
        Self {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::new(self.x * factor, self.y * factor, self.z * factor)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vector3 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vector3 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for Vector3 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<Vector3> for f64 {
    type Output = Vector3;
    fn mul(self, rhs: Vector3) -> Vector3 {
        rhs.scale(self)
    }
}

/// A direction on the unit sphere: a measurement setting or a shared
/// direction emitted by the source.
///
/// Constructed only through normalization or the sphere sampler, so the
/// squared norm is 1 to within a few ulps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector3(Vector3);

impl UnitVector3 {
    pub const X: Self = Self(Vector3::new(1.0, 0.0, 0.0));
    pub const Y: Self = Self(Vector3::new(0.0, 1.0, 0.0));
    pub const Z: Self = Self(Vector3::new(0.0, 0.0, 1.0));

    /// Normalizes `(x, y, z)`; rejects zero and non-finite input.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::from_vector(Vector3::new(x, y, z))
    }

    pub fn from_vector(v: Vector3) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::NonFinite("vector component"));
        }
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector(v.x, v.y, v.z));
        }
        Ok(Self(v.scale(1.0 / norm)))
    }

    /// Unit vector at `angle` radians from the x axis in the x–y plane.
    pub fn planar(angle: f64) -> Self {
        let (sin, cos) = angle.sin_cos();
        Self(Vector3::new(cos, sin, 0.0))
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }

    pub fn y(&self) -> f64 {
        self.0.y
    }

    pub fn z(&self) -> f64 {
        self.0.z
    }

    pub fn as_vector(&self) -> Vector3 {
        self.0
    }

    pub fn to_array(self) -> [f64; 3] {
        self.0.to_array()
    }

    /// True when `x² + y² + z²` evaluates to exactly 1.0 in floating point.
    pub fn has_exact_unit_norm(&self) -> bool {
        self.0.dot(&self.0) == 1.0
    }

    /// Rotates by `angle` radians about `axis` (Rodrigues).
    pub fn rotated(&self, axis: &UnitVector3, angle: f64) -> Self {
        let k = axis.0;
        let v = self.0;
        let (sin, cos) = angle.sin_cos();
        let rotated = v.scale(cos) + k.cross(&v).scale(sin) + k.scale(k.dot(&v) * (1.0 - cos));
        Self::from_vector(rotated).expect("rotation preserves a unit vector")
    }
}

impl Neg for UnitVector3 {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

impl fmt::Display for UnitVector3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0.x, self.0.y, self.0.z)
    }
}

impl Serialize for UnitVector3 {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_array().serialize(serializer)
    }
}

/// `u·v`, clamped into `[-1, 1]`.
pub fn dot(u: &UnitVector3, v: &UnitVector3) -> f64 {
    u.0.dot(&v.0).clamp(-1.0, 1.0)
}

/// `u×v`; its norm is the sine of the angle between `u` and `v`.
pub fn cross(u: &UnitVector3, v: &UnitVector3) -> Vector3 {
    u.0.cross(&v.0)
}

/// Angle between `u` and `v` in `[0, π]`.
pub fn relative_angle(u: &UnitVector3, v: &UnitVector3) -> f64 {
    cross(u, v).norm().atan2(u.0.dot(&v.0))
}

/// A reproducible random stream identified by `(seed, stream_id)`.
///
/// Backed by ChaCha8 with the stream id selecting one of its 2^64
/// independent streams. Never shared between workers: each batch of trials
/// derives its own streams from its batch index.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision; consumes one
    /// 64-bit word.
    pub fn next_f64(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

/// Raw `next_f64` draws consumed by one call to [`sample_uniform_sphere`].
pub const SPHERE_DRAWS_PER_SAMPLE: usize = 2;

/// Uniform direction on the 2-sphere by inverse CDF: `z = 1 - 2u₁` is
/// uniform on `(-1, 1]` (Archimedes) and the azimuth is `2πu₂`. Always
/// consumes exactly two draws, so replay never depends on a rejection count.
pub fn sample_uniform_sphere(rng: &mut RngStream) -> UnitVector3 {
    let z = 1.0 - 2.0 * rng.next_f64();
    let phi = TAU * rng.next_f64();
    let r = (1.0 - z * z).max(0.0).sqrt();
    let (sin, cos) = phi.sin_cos();
    UnitVector3(Vector3::new(r * cos, r * sin, z))
}
