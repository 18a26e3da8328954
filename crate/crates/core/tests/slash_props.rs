use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use period_hecke::algebra::formal;
use period_hecke::chains::lewis_generator;
use period_hecke::ratfunc::RationalFunction;
use period_hecke::slash::*;
use period_hecke::{Error, FormalSum, IntMat2};
use proptest::prelude::*;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn t() -> IntMat2 {
    IntMat2::shift()
}

fn tm() -> IntMat2 {
    &IntMat2::shift() * &IntMat2::flip()
}

fn mtm() -> IntMat2 {
    &IntMat2::flip() * &tm()
}

fn weights() -> Vec<Complex64> {
    vec![c(1.0), c(0.7), Complex64::new(0.5, 14.13)]
}

/// Words in `T`, `TM`, `MTM`.
fn monoid_word() -> impl Strategy<Value = IntMat2> {
    prop::collection::vec(0u8..3, 1..7).prop_map(|w| {
        let g = [t(), tm(), mtm()];
        w.iter().fold(IntMat2::identity(), |acc, &k| &acc * &g[k as usize])
    })
}

/// `a > 0`, `b, d >= 0`, `c >= 0`, nonsingular.
fn g_plus() -> impl Strategy<Value = IntMat2> {
    (1i64..12, 0i64..12, 0i64..12, 0i64..12)
        .prop_filter("in 𝒢⁺ and nonsingular", |&(a, b, c, d)| a * d != b * c && (c > 0 || d > 0))
        .prop_map(|(a, b, c, d)| IntMat2::new(a, b, c, d))
}

/// `a > 0` and `c > 0`, or `c = 0` and `d > 0`; `b`, `d` of either sign.
fn script_t() -> impl Strategy<Value = IntMat2> {
    (1i64..8, -8i64..8, 0i64..8, -8i64..8)
        .prop_filter("in 𝒯 and nonsingular", |&(a, b, c, d)| a * d != b * c && (c > 0 || d > 0))
        .prop_map(|(a, b, c, d)| IntMat2::new(a, b, c, d))
}

fn off_axis_points() -> Vec<Complex64> {
    default_points().into_iter().filter(|z| z.im != 0.0).collect()
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

fn ints(r: &IntMat2) -> (f64, f64, f64, f64) {
    let f = |x: &BigInt| x.to_f64().unwrap();
    (f(&r.a), f(&r.b), f(&r.c), f(&r.d))
}

#[test]
fn examples() {
    let phi = BranchedFunction::inverse();
    let v = slash_num(&phi, &t(), c(1.0), c(2.0)).unwrap();
    assert!((v - 1.0 / 3.0).norm() < 1e-15);
    let v = slash_num(&phi, &tm(), c(1.0), c(2.0)).unwrap();
    assert!((v - 1.0 / 6.0).norm() < 1e-15);
    assert!(matches!(
        slash_num(&phi, &IntMat2::flip(), c(1.0), c(2.0)),
        Err(Error::BranchingViolated(_))
    ));
    assert!(matches!(
        slash_num(&phi, &IntMat2::new(-1, 0, 0, 1), c(1.0), c(2.0)),
        Err(Error::OutsideSlashDomain(_))
    ));
    assert!(matches!(phi.eval(c(-1.0)), Err(Error::OnBranchCut(_))));

    let inv = RationalFunction::inverse_z();
    let gen = formal(&[(1, IntMat2::identity()), (-1, t()), (-1, tm())]);
    assert!(slash_exact(&inv, &gen, c(1.0)).unwrap().is_zero());
    let psi11 = formal(&[(1, IntMat2::new(1, 1, 0, 2)), (1, IntMat2::new(2, 0, 1, 1))]);
    assert_eq!(slash_exact(&inv, &psi11, c(1.0)).unwrap(), inv);
    for d in 1..6 {
        let dd = FormalSum::from_matrix(IntMat2::scalar(d));
        assert_eq!(slash_exact(&inv, &dd, c(1.0)).unwrap(), inv);
    }
    assert!(matches!(
        slash_exact(&inv, &gen, Complex64::new(1.0, 0.5)),
        Err(Error::NonIntegerWeight(_))
    ));

    let pts: Vec<_> = (0..20).map(|k| c(0.125 + 0.25 * k as f64)).collect();
    assert!(compose_check(&phi, &t(), &tm(), Complex64::new(0.5, 1.0), &pts).unwrap());
    let i = IntMat2::identity();
    assert!(compose_check(&phi, &i, &i, c(0.7), &default_points()).unwrap());
}

#[test]
fn lewis_and_two_term_for_inverse() {
    let phi = BranchedFunction::inverse();
    let pts = default_points();
    assert_eq!(pts.len(), 35);
    assert!(lewis_residual(&phi, c(1.0), c(1.0), &pts).unwrap() < 1e-15);
    assert!(lewis_residual(&phi, c(1.0), c(-1.0), &pts).unwrap() > 0.1);
    assert!(two_term_residual(&phi, c(1.0), c(1.0), &pts).unwrap() < 1e-14);
    let k = BranchedFunction::constant(c(2.0));
    assert!(lewis_residual(&k, c(0.0), c(1.0), &pts).unwrap() > 1.0);
    assert!(lewis_residual_exact(&RationalFunction::inverse_z(), 1, 1).unwrap().is_zero());
    assert!(!lewis_residual_exact(&RationalFunction::inverse_z(), 1, -1).unwrap().is_zero());
    assert!(!lewis_residual_exact(&RationalFunction::inverse_z(), 2, 1).unwrap().is_zero());
}

#[test]
fn sum_branch_point_is_the_largest() {
    let phi = BranchedFunction::inverse();
    let p = formal(&[(1, IntMat2::identity()), (1, t()), (2, IntMat2::new(1, 0, 1, -3))]);
    let g = slash_sum_fn(&phi, &p, c(1.0)).unwrap();
    assert_eq!(g.branch_point(), 3.0);
    let z = Complex64::new(1.3, 0.4);
    assert!((g.eval(z).unwrap() - slash_sum(&phi, &p, c(1.0), z).unwrap()).norm() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn composition_on_the_monoid(r1 in monoid_word(), r2 in monoid_word(), k in 0usize..3) {
        let s = weights()[k];
        let phi = BranchedFunction::inverse();
        let err = compose_error(&phi, &r1, &r2, s, &default_points()).unwrap();
        prop_assert!(err <= 1e-12, "{} {} s = {}: {:e}", r1, r2, s, err);
    }

    #[test]
    fn composition_on_g_plus(r1 in g_plus(), r2 in g_plus()) {
        let phi = BranchedFunction::inverse();
        prop_assert!(compose_check(&phi, &r1, &r2, c(0.7), &default_points()).unwrap());
    }

    #[test]
    fn branch_point_propagation(r in script_t(), eps in 1e-6f64..1e-2) {
        let phi = BranchedFunction::inverse();
        let cut = propagated_branch(&r, 0.0);
        let (a, b, cc, d) = ints(&r);
        // holomorphic at real z iff cz + d > 0 and (az + b)/(cz + d) > 0
        let holo = |x: f64| cc * x + d > 0.0 && (a * x + b) / (cc * x + d) > 0.0;
        let right = cut + eps;
        prop_assert!(holo(right));
        prop_assert!(slash_num(&phi, &r, c(1.0), c(right)).is_ok());
        if cut.is_finite() {
            let left = cut - eps;
            prop_assert!(!holo(left));
            prop_assert!(matches!(slash_num(&phi, &r, c(1.0), c(left)), Err(Error::OnBranchCut(_))));
        }
    }

    #[test]
    fn slash_is_well_defined_on_the_lewis_ideal(
        terms in prop::collection::vec((-3i64..4, script_t()), 1..4),
        lambda in prop_oneof![Just(1i64), Just(-1i64)],
        k in 0usize..3,
    ) {
        let s = weights()[k];
        let phi = BranchedFunction::inverse();
        let p: FormalSum = terms.into_iter().map(|(k, m)| (m, BigInt::from(k))).collect();
        prop_assume!(!p.is_zero());
        let gen = lewis_generator(lambda);
        let inner = slash_sum_fn(&phi, &gen, s).unwrap();
        let product = &gen * &p;
        for z in off_axis_points() {
            let lhs = slash_sum(&inner, &p, s, z).unwrap();
            let rhs = slash_sum(&phi, &product, s, z).unwrap();
            prop_assert!(rel(lhs, rhs) < 1e-10, "z = {}: {} vs {}", z, lhs, rhs);
        }
    }

    #[test]
    fn exact_agrees_with_numeric(
        terms in prop::collection::vec((-3i64..4, g_plus()), 1..4),
        s in -1i64..3,
        second in any::<bool>(),
    ) {
        let base = if second {
            slash_exact_term(&RationalFunction::inverse_z(), &tm(), 1).unwrap()
        } else {
            RationalFunction::inverse_z()
        };
        let phi = BranchedFunction::rational(base.clone(), 0.0);
        let p: FormalSum = terms.into_iter().map(|(k, m)| (m, BigInt::from(k))).collect();
        let exact = slash_exact(&base, &p, c(s as f64)).unwrap();
        for z in default_points() {
            let num = slash_sum(&phi, &p, c(s as f64), z).unwrap();
            prop_assert!(rel(exact.eval(z), num) < 1e-12, "z = {}", z);
        }
    }

    #[test]
    fn two_term_equation_for_inverse(re in 0.05f64..20.0, im in -5.0f64..5.0) {
        let phi = BranchedFunction::inverse();
        let z = Complex64::new(re, im);
        prop_assert!(two_term_residual(&phi, c(1.0), c(1.0), &[z]).unwrap() < 1e-13 * (1.0 + z.norm()));
        prop_assert!(lewis_residual(&phi, c(1.0), c(1.0), &[z]).unwrap() < 1e-13 * (1.0 + z.norm()));
        prop_assert!(rel(slash_num(&phi, &IntMat2::identity(), c(1.0), z).unwrap(), z.inv()) < 1e-15);
    }
}

#[test]
fn zero_sum_slashes_to_zero() {
    let phi = BranchedFunction::inverse();
    let p = &formal(&[(1, t())]) - &formal(&[(1, t())]);
    assert!(p.is_empty());
    assert!(slash_sum(&phi, &p, c(1.0), c(1.0)).unwrap().is_zero());
}
