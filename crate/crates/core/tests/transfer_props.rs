use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use period_hecke::cosets::{CosetSpace, Permutation};
use period_hecke::hecke::{apply, kappa_tilde, Variant};
use period_hecke::slash::BranchedFunction;
use period_hecke::transfer::*;
use period_hecke::Error;
use proptest::prelude::*;
use rayon::prelude::*;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn cpow(z: Complex64, e: Complex64) -> Complex64 {
    (e * z.ln()).exp()
}

fn generators(n: u64) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let (a, b) = transfer_generators(&CosetSpace::new(n)).unwrap();
    (perm_matrix(&a), perm_matrix(&b))
}

/// `Σ_{k=1}^{terms} A^{k-1} B (b+k)^{-a}` by plain summation.
fn zeta_ab_direct(a: Complex64, b: f64, n: u64, terms: usize) -> DMatrix<Complex64> {
    let (pa, pb) = transfer_generators(&CosetSpace::new(n)).unwrap();
    let mu = pa.size();
    let mut power = Permutation::identity(mu);
    let mut out = DMatrix::zeros(mu, mu);
    for k in 1..=terms {
        let w = cpow(c(b + k as f64), -a);
        for (i, &j) in power.then(&pb).images().iter().enumerate() {
            out[(i, j)] += w;
        }
        power = power.then(&pa);
    }
    out
}

/// `Σ_{t≥0} (x + m t)^{-3}` for large `x` by Euler–Maclaurin with three
/// correction terms.
fn lacunary_tail_cubed(x: f64, m: f64) -> f64 {
    let f = |y: f64| y.powi(-3);
    let f1 = |y: f64| -3.0 * y.powi(-4);
    let f3 = |y: f64| -60.0 * y.powi(-6);
    1.0 / (2.0 * m * x * x) + f(x) / 2.0 - m * f1(x) / 12.0 + m.powi(3) * f3(x) / 720.0
}

/// Taylor coefficients at `z = 1` of `Σ_{k≥1} (z+k)^{-2s} A^{k-1}B (1/(z+k) - 1)^j`
/// on column block `(i, i')`, by summation and a discrete Cauchy integral.
fn operator_oracle(n: u64, s: Complex64, size: usize) -> DMatrix<Complex64> {
    let (pa, pb) = generators(n);
    let mu = pa.nrows();
    let samples = 64;
    let radius = 0.5;
    let terms = 20_000;
    let mut out = DMatrix::zeros(mu * size, mu * size);
    let mut values = vec![vec![DMatrix::<Complex64>::zeros(mu, mu); size]; samples];
    for (p, vals) in values.iter_mut().enumerate() {
        let theta = 2.0 * std::f64::consts::PI * p as f64 / samples as f64;
        let z = c(1.0) + Complex64::from_polar(radius, theta);
        let mut power = DMatrix::<Complex64>::identity(mu, mu);
        for k in 1..=terms {
            let zk = z + k as f64;
            let weight = cpow(zk, -2.0 * s);
            let h = zk.inv() - 1.0;
            let pb_k = &power * &pb;
            let mut hj = c(1.0);
            for v in vals.iter_mut() {
                *v += &pb_k * (weight * hj);
                hj *= h;
            }
            power = &power * &pa;
        }
    }
    for j in 0..size {
        for k in 0..size {
            let mut coeff = DMatrix::<Complex64>::zeros(mu, mu);
            for (p, vals) in values.iter().enumerate() {
                let theta = 2.0 * std::f64::consts::PI * p as f64 / samples as f64;
                coeff += &vals[j] * Complex64::from_polar(1.0, -(k as f64) * theta);
            }
            coeff /= c(samples as f64 * radius.powi(k as i32));
            for i in 0..mu {
                for i2 in 0..mu {
                    out[(i * size + k, i2 * size + j)] = coeff[(i, i2)];
                }
            }
        }
    }
    out
}

/// The scalar eigenfunction continued to `Re z > 0` by the three-term
/// equation `Φ(z) = Φ(z+1) + z^{-2}Φ(1+1/z)`, using the series only on
/// `|z - 2| <= 1` where it is accurate.
fn extended(ef: &Eigenfunction, z: Complex64) -> Complex64 {
    if (z - 2.0).norm() <= 1.0 {
        ef.eval(z).unwrap()[0]
    } else if z.re > 2.0 {
        let w = z - 1.0;
        extended(ef, w) - w.powi(-2) * extended(ef, 1.0 + w.inv())
    } else {
        extended(ef, z + 1.0) + z.powi(-2) * extended(ef, 1.0 + z.inv())
    }
}

fn max_entry(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

#[test]
fn zeta_examples() {
    let z = zeta_ab(c(4.0), 1.0, 1).unwrap();
    assert!((z[(0, 0)] - 0.082_323_233_711_138_19).norm() < 1e-12);
    let z = zeta_ab(c(2.0), 2.0, 1).unwrap();
    let expected = std::f64::consts::PI.powi(2) / 6.0 - 1.0 - 0.25;
    assert!((z[(0, 0)] - expected).norm() < 1e-12);
    assert!(matches!(zeta_ab(c(1.0), 1.0, 2), Err(Error::Pole(_))));
    assert!(zeta_ab(c(3.0), 0.0, 2).is_err());
    assert!((hurwitz_zeta(c(-1.0), 1.0).unwrap() + 1.0 / 12.0).norm() < 1e-12);
    assert!((hurwitz_zeta(c(0.0), 0.3).unwrap() - 0.2).norm() < 1e-12);
}

#[test]
fn zeta_ab_matches_direct_summation() {
    for n in [1u64, 2, 3, 4, 5, 6, 12] {
        for b in [0.5, 1.0, 2.0] {
            let oracle = zeta_ab_direct(c(6.0), b, n, 20_000);
            assert!(max_entry(&(zeta_ab(c(6.0), b, n).unwrap() - oracle)) < 1e-13, "n = {n}");
            let a = Complex64::new(6.0, 2.5);
            let oracle = zeta_ab_direct(a, b, n, 20_000);
            assert!(max_entry(&(zeta_ab(a, b, n).unwrap() - oracle)) < 1e-13, "n = {n}");
        }
    }
}

#[test]
fn zeta_ab_residue_split_at_three() {
    for n in [2u64, 3, 4, 6] {
        let space = CosetSpace::new(n);
        let (pa, pb) = transfer_generators(&space).unwrap();
        let m = pa.order();
        if n == 2 || n == 3 {
            assert!(m >= 2);
        }
        let cutoff = m * 10_000;
        let b = 1.0;
        let mut oracle = zeta_ab_direct(c(3.0), b, n, cutoff);
        for r in 0..m {
            let x = b + (cutoff + r + 1) as f64;
            oracle += perm_matrix(&pa.pow(r).then(&pb)) * c(lacunary_tail_cubed(x, m as f64));
        }
        let got = zeta_ab(c(3.0), b, n).unwrap();
        assert!(max_entry(&(got - oracle)) < 1e-12, "n = {n}");
    }
}

#[test]
fn generators_fix_the_constant_vector() {
    for n in 1..=60u64 {
        let (a, b) = generators(n);
        let ones = DVector::from_element(a.nrows(), c(1.0));
        assert_eq!(&a * &ones, ones);
        assert_eq!(&b * &ones, ones);
        assert_eq!(&a.transpose() * &ones, ones);
        two_term_permutation(&CosetSpace::new(n)).unwrap();
    }
}

#[test]
fn build_matches_direct_expansion() {
    for (n, s) in [(1u64, c(2.0)), (2, c(2.0)), (3, Complex64::new(2.0, 3.0))] {
        let size = 8;
        let op = build(n, s, 24).unwrap();
        let oracle = operator_oracle(n, s, size);
        let mu = op.mu();
        for i in 0..mu {
            for i2 in 0..mu {
                for k in 0..size {
                    for j in 0..size {
                        let got = op.matrix()[(i * 24 + k, i2 * 24 + j)];
                        let want = oracle[(i * size + k, i2 * size + j)];
                        assert!((got - want).norm() < 1e-10, "n = {n} ({i},{k}) ({i2},{j}): {got} vs {want}");
                    }
                }
            }
        }
    }
}

#[test]
fn build_rejects_bad_input() {
    assert!(matches!(build(1, c(0.5), 16), Err(Error::Pole(_))));
    assert!(build(1, c(1.0), 3).is_err());
    assert!(build(0, c(1.0), 8).is_err());
    let op = build(2, c(1.0), 8).unwrap();
    assert_eq!((op.mu(), op.dim(), op.order()), (3, 24, 8));
}

#[test]
fn scalar_spectrum() {
    let sp = spectrum(&build(1, c(1.0), 32).unwrap()).unwrap();
    assert_eq!(sp.eigenvalues.len(), 32);
    assert!((sp.eigenvalues[0] - 1.0).norm() < 1e-10);
    let lead = sp.leading.unwrap();
    assert!(lead.residual < 1e-12);
    let exact = inverse_shift_coeffs(32);
    let scale = lead.vector[0] / exact[0];
    for k in 0..32 {
        assert!((lead.vector[k] - exact[k] * scale).norm() < 1e-8, "k = {k}");
    }

    let second = |order| eigenvalues(&build(1, c(1.0), order).unwrap()).unwrap()[1];
    let (l48, l80) = (second(48), second(80));
    assert!((l48 - l80).norm() < 1e-6);
    assert!((l48 - c(-0.303_663_002_9)).norm() < 1e-6);
}

#[test]
fn inverse_is_the_exact_eigenfunction() {
    // Σ_k (z+k)^{-2} / (1 + 1/(z+k)) = Σ_k 1/((z+k)(z+k+1)) = 1/(z+1)
    for z in [0.0, 0.3, 1.0, 2.5, 7.0] {
        let direct: f64 = (1..200_000).map(|k| 1.0 / ((z + k as f64) * (z + k as f64 + 1.0))).sum();
        let tail = 1.0 / (z + 200_000.0);
        assert!((direct + tail - 1.0 / (z + 1.0)).abs() < 1e-14);
    }
    let exact = inverse_shift_coeffs(6);
    let want = [0.5, -0.25, 0.125, -0.0625, 0.03125, -0.015625];
    for k in 0..6 {
        assert_eq!(exact[k].re, want[k]);
    }
}

#[test]
fn vector_spectrum_at_order_24() {
    for n in [2u64, 3, 4, 6] {
        let op = build(n, c(1.0), 24).unwrap();
        let lead = spectrum(&op).unwrap().leading.unwrap();
        assert!((lead.value - 1.0).norm() < 1e-8);
        let exact = inverse_shift_coeffs(24);
        let scale = lead.vector[0] / exact[0];
        for i in 1..op.mu() {
            for k in 0..24 {
                assert!((lead.vector[i * 24 + k] - lead.vector[k]).norm() < 1e-10, "n = {n}");
            }
        }
        for k in 0..24 {
            assert!((lead.vector[k] - exact[k] * scale).norm() < 1e-8);
        }
    }
}

#[test]
fn vector_eigenvalue_one_at_order_32() {
    for n in [2u64, 3, 4, 6] {
        let ev = eigenvalues(&build(n, c(1.0), 32).unwrap()).unwrap();
        assert!((ev[0] - 1.0).norm() < 1e-10, "n = {n}: {}", ev[0]);
    }
}

#[test]
fn leading_eigenvalue_converges_in_order() {
    let cases: Vec<(u64, f64)> = [1u64, 2, 3, 4, 5, 6]
        .iter()
        .flat_map(|&n| [0.6, 0.8, 1.0, 1.4, 2.0].map(|s| (n, s)))
        .collect();
    cases.into_par_iter().for_each(|(n, s)| {
        let lead = |order| eigenvalues(&build(n, c(s), order).unwrap()).unwrap()[0];
        let (a, b) = (lead(32), lead(40));
        assert!((a - b).norm() < 1e-10, "n = {n}, s = {s}: {:e}", (a - b).norm());
    });
}

#[test]
fn vector_lewis_examples() {
    let points: Vec<_> = (0..14).map(|k| c(1.2 + 0.1 * k as f64)).collect();
    let inv1 = |z: Complex64| Ok(DVector::from_element(1, z.inv()));
    assert!(vector_lewis_residual(1, c(1.0), c(1.0), inv1, &points).unwrap() < 1e-15);
    let inv3 = |z: Complex64| Ok(DVector::from_element(3, z.inv()));
    assert!(vector_lewis_residual(2, c(1.0), c(1.0), inv3, &points).unwrap() < 1e-14);
    assert!(vector_lewis_residual(2, c(1.0), c(-1.0), inv3, &points).unwrap() > 0.1);

    let ef = eigenfunction(&build(3, c(1.0), 24).unwrap(), 0).unwrap();
    assert_eq!(ef.indices.len(), 4);
    let inner: Vec<_> = (0..13).map(|k| c(1.2 + 0.05 * k as f64)).collect();
    let phi = |z| ef.eval(z);
    assert!(vector_lewis_residual(3, c(1.0), ef.eigenvalue, phi, &inner).unwrap() < 1e-8);
    assert!(matches!(ef.eval(c(4.0)), Err(Error::OutsideDisc(_))));
    let comp = ef.component(2);
    assert!((comp.eval(c(1.5)).unwrap() - ef.eval(c(1.5)).unwrap()[2]).norm() < 1e-15);
}

#[test]
fn two_term_examples() {
    let points: Vec<_> = (0..14).map(|k| c(1.2 + 0.1 * k as f64)).collect();
    let inv1 = |z: Complex64| Ok(DVector::from_element(1, z.inv()));
    assert!(two_term_check(1, c(1.0), c(1.0), inv1, &points).unwrap() < 1e-15);
    let inv3 = |z: Complex64| Ok(DVector::from_element(3, z.inv()));
    assert!(two_term_check(2, c(1.0), c(1.0), inv3, &points).unwrap() < 1e-14);
    for n in 1..=60 {
        let p = two_term_permutation(&CosetSpace::new(n)).unwrap();
        assert!(p.then(&p).is_identity());
    }
}

#[test]
fn selberg_examples() {
    for n in [1u64, 2, 3] {
        let z = selberg_zeta(n, c(1.0), 32).unwrap();
        assert!(z.value().norm() < 1e-8, "n = {n}: {}", z.value());
        assert!(z.gap() < 1e-10);
    }
    let low = selberg_zeta(2, c(2.0), 24).unwrap().value();
    let high = selberg_zeta(2, c(2.0), 32).unwrap().value();
    assert!((low - high).norm() < 1e-8);
    assert!(selberg_zeta(1, c(2.0), 24).unwrap().value().norm() > 1e-3);
}

#[test]
fn hecke_acts_on_the_eigenfunction_by_its_multiplier() {
    let ef = eigenfunction(&build(1, c(1.0), 32).unwrap(), 0).unwrap();
    let shared = std::sync::Arc::new(ef);
    let inner = shared.clone();
    let phi = BranchedFunction::new(0.0, move |z| extended(&inner, z));
    let points = [0.4, 0.7, 1.0, 1.5, 2.0, 3.0, 4.5];
    for x in points {
        let z = c(x);
        let base = extended(&shared, z);
        assert!((base * z - extended(&shared, c(1.0))).norm() < 1e-9 * base.norm().max(1.0));
    }
    for n in 1..=12u64 {
        let kappa = kappa_tilde(n).unwrap().to_f64().unwrap();
        for x in points {
            let z = c(x);
            let lhs = apply(&phi, n, c(1.0), z, Variant::Tilde).unwrap();
            let rhs = extended(&shared, z) * kappa;
            assert!((lhs - rhs).norm() < 1e-7 * rhs.norm().max(1.0), "n = {n}, z = {x}: {lhs} vs {rhs}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn determinant_factorises(n in 1u64..5, pick in 0usize..2, im in -0.5f64..0.5) {
        let s = Complex64::new([0.7, 1.3][pick], im);
        let z = selberg_zeta(n, s, 20).unwrap();
        prop_assert!(z.gap() < 1e-10, "gap {:e}", z.gap());
        prop_assert!(!z.value().is_zero());
    }
}
