use bellsim::algebra::{algebra_mul, embed_vector, phase_operator, product_identity, to_matrix, AlgebraElement};
use bellsim::experiments::Moments;
use bellsim::math::{cross, dot, ComplexScalar, UnitVector3};
use proptest::prelude::*;

fn unit_vector() -> impl Strategy<Value = UnitVector3> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_filter("needs a direction", |(x, y, z)| x * x + y * y + z * z > 1e-4)
        .prop_map(|(x, y, z)| UnitVector3::new(x, y, z).unwrap())
}

fn complex() -> impl Strategy<Value = ComplexScalar> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(re, im)| ComplexScalar::new(re, im))
}

fn element() -> impl Strategy<Value = AlgebraElement> {
    [complex(), complex(), complex(), complex()].prop_map(|coeffs| AlgebraElement { coeffs })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn matrix_map_is_a_homomorphism(x in element(), y in element()) {
        let lhs = to_matrix(&algebra_mul(&x, &y));
        let rhs = to_matrix(&x) * to_matrix(&y);
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn algebra_product_matches_the_closed_form(a in unit_vector(), b in unit_vector()) {
        let direct = algebra_mul(&embed_vector(&a), &embed_vector(&b));
        prop_assert!(direct.max_abs_diff(&product_identity(&a, &b)) < 1e-12);
    }

    #[test]
    fn phase_form_matches_the_product(a in unit_vector(), b in unit_vector()) {
        prop_assert!(phase_operator(&a, &b).max_abs_diff(&product_identity(&a, &b)) < 1e-12);
        prop_assert!(phase_operator(&a, &a).max_abs_diff(&product_identity(&a, &a)) < 1e-12);
        prop_assert!(phase_operator(&a, &-a).max_abs_diff(&product_identity(&a, &-a)) < 1e-12);
    }

    #[test]
    fn embedded_unit_vectors_square_to_one(v in unit_vector()) {
        let sq = algebra_mul(&embed_vector(&v), &embed_vector(&v));
        prop_assert!(sq.max_abs_diff(&AlgebraElement::ONE) < 1e-12);
    }

    #[test]
    fn product_is_associative(x in element(), y in element(), z in element()) {
        let left = algebra_mul(&algebra_mul(&x, &y), &z);
        let right = algebra_mul(&x, &algebra_mul(&y, &z));
        prop_assert!(left.max_abs_diff(&right) < 1e-11);
    }

    #[test]
    fn lagrange_identity(u in unit_vector(), v in unit_vector()) {
        let c = cross(&u, &v);
        prop_assert!((c.dot(&c) + dot(&u, &v).powi(2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalized_vectors_have_unit_norm(v in unit_vector()) {
        prop_assert!((v.as_vector().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pooled_moments_match_a_single_pass(
        values in prop::collection::vec(-1.0f64..1.0, 2..400),
        cut in 0usize..400,
    ) {
        let cut = cut.min(values.len());
        let single = Moments::from_values(values.iter().copied());
        let mut pooled = Moments::from_values(values[..cut].iter().copied());
        pooled.merge(&Moments::from_values(values[cut..].iter().copied()));
        prop_assert_eq!(pooled.count(), single.count());
        prop_assert!((pooled.mean() - single.mean()).abs() < 1e-12);
        prop_assert!((pooled.stderr() - single.stderr()).abs() < 1e-12);
    }
}
