//! The four-dimensional complex algebra spanned by `{1, λ₁, λ₂, λ₃}` with
//!
//! ```text
//! λ₁λ₂ = -λ₂λ₁ = iλ₃,   λ₂λ₃ = -λ₃λ₂ = iλ₁,   λ₃λ₁ = -λ₁λ₃ = iλ₂,   λₖ² = 1
//! ```
//!
//! Elements are stored as coefficients over that basis and multiplied with
//! an explicit structure-constant table. [`to_matrix`] maps them onto the
//! 2×2 Pauli representation, which serves only as an independent check.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Serialize, Serializer};

use crate::math::{cross, relative_angle, ComplexScalar, UnitVector3, Vector3};

const ZERO: ComplexScalar = ComplexScalar::new(0.0, 0.0);
const ONE: ComplexScalar = ComplexScalar::new(1.0, 0.0);
const I: ComplexScalar = ComplexScalar::new(0.0, 1.0);
const MINUS_I: ComplexScalar = ComplexScalar::new(0.0, -1.0);

/// `BASIS_PRODUCT[i][j] = (c, k)` encodes `eᵢ·eⱼ = c·eₖ` with `e₀ = 1`,
/// `eₖ = λₖ`.
const BASIS_PRODUCT: [[(ComplexScalar, usize); 4]; 4] = [
    [(ONE, 0), (ONE, 1), (ONE, 2), (ONE, 3)],
    [(ONE, 1), (ONE, 0), (I, 3), (MINUS_I, 2)],
    [(ONE, 2), (MINUS_I, 3), (ONE, 0), (I, 1)],
    [(ONE, 3), (I, 2), (MINUS_I, 1), (ONE, 0)],
];

/// `c₀·1 + c₁λ₁ + c₂λ₂ + c₃λ₃` with complex coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgebraElement {
    pub coeffs: [ComplexScalar; 4],
}

impl AlgebraElement {
    pub const ZERO: Self = Self { coeffs: [ZERO; 4] };
    pub const ONE: Self = Self { coeffs: [ONE, ZERO, ZERO, ZERO] };

    pub fn new(c0: ComplexScalar, c1: ComplexScalar, c2: ComplexScalar, c3: ComplexScalar) -> Self {
        Self { coeffs: [c0, c1, c2, c3] }
    }

    pub fn scalar(c: ComplexScalar) -> Self {
        Self { coeffs: [c, ZERO, ZERO, ZERO] }
    }

    /// The basis generator `λₖ`, `k ∈ {1, 2, 3}`.
    pub fn generator(k: usize) -> Self {
        assert!((1..=3).contains(&k), "generator index must be 1, 2 or 3");
        let mut coeffs = [ZERO; 4];
        coeffs[k] = ONE;
        Self { coeffs }
    }

    /// `v₁λ₁ + v₂λ₂ + v₃λ₃` for an arbitrary real vector.
    pub fn from_vector(v: Vector3) -> Self {
        Self::new(ZERO, v.x.into(), v.y.into(), v.z.into())
    }

    pub fn scalar_part(&self) -> ComplexScalar {
        self.coeffs[0]
    }

    pub fn vector_part(&self) -> [ComplexScalar; 3] {
        [self.coeffs[1], self.coeffs[2], self.coeffs[3]]
    }

    pub fn scale(&self, factor: ComplexScalar) -> Self {
        Self { coeffs: self.coeffs.map(|c| c * factor) }
    }

    /// Replaces each generator by the matching component of a real
    /// direction: `c₀ + c₁d₁ + c₂d₂ + c₃d₃`.
    pub fn evaluate_at(&self, direction: &UnitVector3) -> ComplexScalar {
        let [c0, c1, c2, c3] = self.coeffs;
        c0 + c1 * direction.x() + c2 * direction.y() + c3 * direction.z()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Serialized as `[[re, im]; 4]`.
impl Serialize for AlgebraElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.coeffs.map(|c| [c.re, c.im]).serialize(serializer)
    }
}

impl Add for AlgebraElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut coeffs = self.coeffs;
        for (c, r) in coeffs.iter_mut().zip(rhs.coeffs) {
            *c += r;
        }
        Self { coeffs }
    }
}

impl Sub for AlgebraElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for AlgebraElement {
    type Output = Self;
    fn neg(self) -> Self {
        Self { coeffs: self.coeffs.map(|c| -c) }
    }
}

impl Mul for AlgebraElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        algebra_mul(&self, &rhs)
    }
}

/// `v₁λ₁ + v₂λ₂ + v₃λ₃` for a unit setting or shared direction.
pub fn embed_vector(v: &UnitVector3) -> AlgebraElement {
    AlgebraElement::from_vector(v.as_vector())
}

/// Bilinear product through the structure constants.
pub fn algebra_mul(x: &AlgebraElement, y: &AlgebraElement) -> AlgebraElement {
    let mut out = [ZERO; 4];
    for (i, xi) in x.coeffs.iter().enumerate() {
        for (j, yj) in y.coeffs.iter().enumerate() {
            let (c, k) = BASIS_PRODUCT[i][j];
            out[k] += xi * yj * c;
        }
    }
    AlgebraElement { coeffs: out }
}

/// Closed form of `(λ·a)(λ·b)`: `(a·b)·1 + i(a×b)·λ`.
pub fn product_identity(a: &UnitVector3, b: &UnitVector3) -> AlgebraElement {
    let c = cross(a, b);
    let ab = a.as_vector().dot(&b.as_vector());
    AlgebraElement::new(ab.into(), I * c.x, I * c.y, I * c.z)
}

/// The pure-phase form `exp(iθ λ·n̂) = cos θ + i sin θ (λ·n̂)` with
/// `n̂ sin θ = a×b`. For parallel or antiparallel settings `sin θ = 0` and the
/// undefined axis drops out.
pub fn phase_operator(a: &UnitVector3, b: &UnitVector3) -> AlgebraElement {
    let theta = relative_angle(a, b);
    let (sin, cos) = theta.sin_cos();
    let axis = cross(a, b);
    let norm = axis.norm();
    let vector = if norm > 0.0 {
        AlgebraElement::from_vector(axis.scale(1.0 / norm)).scale(I * sin)
    } else {
        AlgebraElement::ZERO
    };
    AlgebraElement::scalar(cos.into()) + vector
}

/// A 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixRep(pub [[ComplexScalar; 2]; 2]);

impl MatrixRep {
    pub const IDENTITY: Self = Self([[ONE, ZERO], [ZERO, ONE]]);

    pub fn trace(&self) -> ComplexScalar {
        self.0[0][0] + self.0[1][1]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        worst
    }

    fn scale(&self, factor: ComplexScalar) -> Self {
        Self(self.0.map(|row| row.map(|c| c * factor)))
    }
}

impl Add for MatrixRep {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut m = self.0;
        for (row, other) in m.iter_mut().zip(rhs.0) {
            for (x, y) in row.iter_mut().zip(other) {
                *x += y;
            }
        }
        Self(m)
    }
}

impl Mul for MatrixRep {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut m = [[ZERO; 2]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = self.0[r][0] * rhs.0[0][c] + self.0[r][1] * rhs.0[1][c];
            }
        }
        Self(m)
    }
}

const PAULI: [MatrixRep; 3] = [
    MatrixRep([[ZERO, ONE], [ONE, ZERO]]),
    MatrixRep([[ZERO, MINUS_I], [I, ZERO]]),
    MatrixRep([[ONE, ZERO], [ZERO, ComplexScalar::new(-1.0, 0.0)]]),
];

/// `1 ↦ 𝟙`, `λₖ ↦ σₖ`, extended linearly.
pub fn to_matrix(x: &AlgebraElement) -> MatrixRep {
    let [c0, c1, c2, c3] = x.coeffs;
    MatrixRep::IDENTITY.scale(c0) + PAULI[0].scale(c1) + PAULI[1].scale(c2) + PAULI[2].scale(c3)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lambda(k: usize) -> AlgebraElement {
        AlgebraElement::generator(k)
    }

    #[test]
    fn cyclic_products() {
        assert_eq!(lambda(1) * lambda(2), lambda(3).scale(I));
        assert_eq!(lambda(2) * lambda(3), lambda(1).scale(I));
        assert_eq!(lambda(3) * lambda(1), lambda(2).scale(I));
        assert_eq!(lambda(2) * lambda(1), lambda(3).scale(MINUS_I));
        assert_eq!(lambda(3) * lambda(2), lambda(1).scale(MINUS_I));
        assert_eq!(lambda(1) * lambda(3), lambda(2).scale(MINUS_I));
    }

    #[test]
    fn generators_square_to_one_and_anticommute() {
        for i in 1..=3 {
            assert_eq!(lambda(i) * lambda(i), AlgebraElement::ONE);
            for j in 1..=3 {
                let anti = lambda(i) * lambda(j) + lambda(j) * lambda(i);
                let expected = if i == j {
                    AlgebraElement::scalar(2.0.into())
                } else {
                    AlgebraElement::ZERO
                };
                assert_eq!(anti, expected, "i={i} j={j}");
            }
        }
    }

    #[test]
    fn embed_examples() {
        assert_eq!(embed_vector(&UnitVector3::X), lambda(1));
        assert_eq!(embed_vector(&UnitVector3::Z), lambda(3));
        let v = UnitVector3::new(0.36, -0.48, 0.8).unwrap();
        let sq = embed_vector(&v) * embed_vector(&v);
        assert!(sq.max_abs_diff(&AlgebraElement::ONE) < 1e-15);
    }

    #[test]
    fn product_identity_examples() {
        let v = UnitVector3::new(1.0, 2.0, 2.0).unwrap();
        assert!(product_identity(&v, &v).max_abs_diff(&AlgebraElement::ONE) < 1e-15);
        assert_eq!(
            product_identity(&UnitVector3::X, &UnitVector3::Y),
            lambda(3).scale(I)
        );
    }

    #[test]
    fn phase_operator_examples() {
        let v = UnitVector3::new(1.0, 2.0, 2.0).unwrap();
        assert!(phase_operator(&v, &v).max_abs_diff(&AlgebraElement::ONE) < 1e-15);
        let quarter = phase_operator(&UnitVector3::X, &UnitVector3::Y);
        assert!(quarter.max_abs_diff(&lambda(3).scale(I)) < 1e-15);
        let flipped = phase_operator(&v, &-v);
        assert!(flipped.max_abs_diff(&AlgebraElement::scalar((-1.0).into())) < 1e-15);
    }

    #[test]
    fn matrix_examples() {
        assert_eq!(to_matrix(&AlgebraElement::ONE), MatrixRep::IDENTITY);
        for k in 1..=3 {
            assert_eq!(to_matrix(&lambda(k)).trace(), ZERO);
        }
        assert_eq!(
            to_matrix(&(lambda(1) * lambda(2))),
            to_matrix(&lambda(1)) * to_matrix(&lambda(2))
        );
    }

    #[test]
    fn evaluate_substitutes_direction() {
        let e = AlgebraElement::new(ONE, I, ZERO, MINUS_I);
        let z = e.evaluate_at(&UnitVector3::Z);
        assert_eq!(z, ComplexScalar::new(1.0, -1.0));
    }
}
