use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use period_hecke::chains::*;
use period_hecke::cosets::{enumerate, index_count};
use period_hecke::hecke::*;
use period_hecke::ratfunc::RationalFunction;
use period_hecke::slash::{compose_error, default_points, lewis_residual_exact, BranchedFunction};
use period_hecke::transfer::{build, selberg_zeta, spectrum};
use period_hecke::IntMat2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::out;

#[derive(Debug)]
pub struct Failure {
    pub check: &'static str,
    pub n: Option<u64>,
    pub detail: Value,
}

pub struct Settings {
    pub max_n: u64,
    pub seed: u64,
    pub tol: f64,
    pub order: usize,
}

pub struct Outcome {
    pub check: &'static str,
    pub passed: bool,
}

type Step = Result<(), Failure>;

fn fail(check: &'static str, n: Option<u64>, detail: Value) -> Failure {
    Failure { check, n, detail }
}

fn lib(check: &'static str, n: Option<u64>) -> impl Fn(period_hecke::Error) -> Failure {
    move |e| fail(check, n, json!({ "error": e.to_string() }))
}

fn ensure(ok: bool, f: impl FnOnce() -> Failure) -> Step {
    if ok {
        Ok(())
    } else {
        Err(f())
    }
}

fn squarefree(n: u64) -> bool {
    (2..=n).take_while(|p| p * p <= n).all(|p| !n.is_multiple_of(p * p))
}

fn psi_index_formula(n: u64) -> u64 {
    let (mut m, mut out) = (n, n);
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            out = out / p * (p + 1);
            while m % p == 0 {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        out = out / m * (m + 1);
    }
    out
}

const LEVEL_CHECKS: [&str; 7] = [
    "coset-count",
    "k-bijection",
    "chain-partition",
    "psi-agreement",
    "lewis-certificates",
    "square-divisors",
    "hecke-multiplier",
];

fn k_bijection(n: u64) -> Step {
    let name = "k-bijection";
    let sn = enum_sn(n);
    let zero = BigInt::from(0);
    let target: BTreeSet<_> = sn.iter().filter(|a| a.c != zero).cloned().collect();
    let mut image = BTreeSet::new();
    for a in sn.iter().filter(|a| a.b != zero) {
        let ka = k_map(a).map_err(lib(name, Some(n)))?;
        ensure(k_inv(&ka).ok().as_ref() == Some(a), || {
            fail(name, Some(n), json!({ "matrix": out::matrix(a), "reason": "K⁻¹K(A) ≠ A" }))
        })?;
        let dup = out::matrix(&ka);
        ensure(image.insert(ka), || fail(name, Some(n), json!({ "matrix": dup, "reason": "not injective" })))?;
    }
    ensure(image == target, || fail(name, Some(n), json!({ "reason": "image differs from S_n \\ X_n" })))
}

fn chain_partition(n: u64) -> Step {
    let name = "chain-partition";
    let mut seen = BTreeSet::new();
    for i in enumerate(n) {
        for m in chain_of(&i).map_err(lib(name, Some(n)))?.matrices {
            let v = out::matrix(&m);
            ensure(seen.insert(m), || fail(name, Some(n), json!({ "matrix": v, "reason": "in two chains" })))?;
        }
    }
    let prim: BTreeSet<_> = primitive_sn(n).into_iter().collect();
    ensure(seen == prim, || fail(name, Some(n), json!({ "reason": "chains miss primitive elements" })))
}

fn psi_agreement(n: u64) -> Step {
    let name = "psi-agreement";
    let a = psi_from_chains(n).map_err(lib(name, Some(n)))?;
    let b = psi_from_partitions(n).map_err(lib(name, Some(n)))?;
    for ((i, x), (_, y)) in a.iter().zip(b.iter()) {
        ensure(x == y, || {
            fail(name, Some(n), json!({ "index": out::index(i), "chains": out::formal(x), "partitions": out::formal(y) }))
        })?;
    }
    Ok(())
}

fn lewis_certificates(n: u64) -> Step {
    let name = "lewis-certificates";
    let sol = certified_psi(n).map_err(lib(name, Some(n)))?;
    for lambda in [1, -1] {
        let rep = sol.verify(lambda).map_err(lib(name, Some(n)))?;
        if let Some(c) = rep.first_failure() {
            let mut detail = check_json(c);
            detail["lambda"] = json!(lambda);
            return Err(fail(name, Some(n), detail));
        }
    }
    Ok(())
}

fn square_divisors(n: u64) -> Step {
    let name = "square-divisors";
    ensure(recompose(n) == tn_set(n).terms, || fail(name, Some(n), json!({ "reason": "Σ D_d T̃_{n/d²} ≠ T_n" })))?;
    ensure(tn_set(n).len() == enum_sn(n).len(), || fail(name, Some(n), json!({ "reason": "T_n ≠ S_n" })))?;
    let equal = tn_set(n).terms == ttilde_set(n).terms;
    ensure(equal == squarefree(n), || {
        fail(name, Some(n), json!({ "reason": "T_n = T̃_n disagrees with squarefreeness", "equal": equal }))
    })
}

fn hecke_multiplier(n: u64) -> Step {
    let name = "hecke-multiplier";
    let inv = RationalFunction::inverse_z();
    let image = apply_exact(&inv, n, Complex64::new(1.0, 0.0), Variant::Tilde).map_err(lib(name, Some(n)))?;
    let k = image.constant_multiple_of(&inv);
    let expected = BigRational::from_integer(BigInt::from(index_count(n)));
    ensure(k.as_ref() == Some(&expected), || {
        fail(name, Some(n), json!({ "image": image.to_string(), "expected": out::rational(&expected) }))
    })?;
    let res = lewis_residual_exact(&image, 1, 1).map_err(lib(name, Some(n)))?;
    ensure(res.is_zero(), || fail(name, Some(n), json!({ "lewis_residual": res.to_string() })))?;
    let total: BigRational = decompose(n)
        .iter()
        .map(|(_, h)| BigRational::from_integer(BigInt::from(index_count(h.n))))
        .sum();
    let sigma = BigRational::from_integer(BigInt::from(divisor_sum(n)));
    ensure(total == sigma && kappa_full(n).ok().as_ref() == Some(&sigma), || {
        fail(name, Some(n), json!({ "sum": out::rational(&total), "sigma": out::rational(&sigma) }))
    })
}

fn coset_count(n: u64) -> Step {
    let got = enumerate(n).len() as u64;
    let expected = psi_index_formula(n);
    ensure(got == expected && index_count(n) == expected, || {
        fail("coset-count", Some(n), json!({ "count": got, "expected": expected }))
    })
}

fn level(n: u64, check: &str) -> Step {
    match check {
        "coset-count" => coset_count(n),
        "k-bijection" => k_bijection(n),
        "chain-partition" => chain_partition(n),
        "psi-agreement" => psi_agreement(n),
        "lewis-certificates" => lewis_certificates(n),
        "square-divisors" => square_divisors(n),
        _ => hecke_multiplier(n),
    }
}

fn spectral(cfg: &Settings) -> Step {
    let name = "transfer-spectrum";
    for n in [1u64, 2, 3, 4, 6].into_iter().filter(|&n| n <= cfg.max_n) {
        let op = build(n, Complex64::new(1.0, 0.0), cfg.order).map_err(lib(name, Some(n)))?;
        let sp = spectrum(&op).map_err(lib(name, Some(n)))?;
        let top = sp.eigenvalues[0];
        ensure((top - 1.0).norm() < cfg.tol, || {
            fail(name, Some(n), json!({ "leading": out::complex(top), "tol": cfg.tol }))
        })?;
        if let Some(lead) = sp.leading {
            let order = op.order();
            let spread = (1..op.mu())
                .flat_map(|i| (0..order).map(move |k| (i, k)))
                .map(|(i, k)| (lead.vector[i * order + k] - lead.vector[k]).norm())
                .fold(0.0, f64::max);
            ensure(spread < cfg.tol, || fail(name, Some(n), json!({ "component_spread": spread })))?;
        }
    }
    Ok(())
}

fn selberg(cfg: &Settings) -> Step {
    let name = "selberg-zero";
    for n in (1..=3u64).filter(|&n| n <= cfg.max_n) {
        let z = selberg_zeta(n, Complex64::new(1.0, 0.0), cfg.order).map_err(lib(name, Some(n)))?;
        ensure(z.value().norm() < 1e-8 && z.gap() < cfg.tol, || {
            fail(name, Some(n), json!({ "value": out::complex(z.value()), "gap": z.gap() }))
        })?;
    }
    Ok(())
}

fn composition(cfg: &Settings) -> Step {
    let name = "slash-composition";
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut g_plus = || loop {
        let (a, b, c, d) = (
            rng.random_range(1..12i64),
            rng.random_range(0..12i64),
            rng.random_range(0..12i64),
            rng.random_range(0..12i64),
        );
        if a * d != b * c && (c > 0 || d > 0) {
            return IntMat2::new(a, b, c, d);
        }
    };
    let phi = BranchedFunction::inverse();
    let weights = [Complex64::new(1.0, 0.0), Complex64::new(0.7, 0.0), Complex64::new(0.5, 14.13)];
    for _ in 0..100 {
        let (r1, r2) = (g_plus(), g_plus());
        for s in weights {
            let e = compose_error(&phi, &r1, &r2, s, &default_points()).map_err(lib(name, None))?;
            ensure(e <= 1e-12, || {
                fail(
                    name,
                    None,
                    json!({ "r1": out::matrix(&r1), "r2": out::matrix(&r2), "s": out::complex(s), "deviation": e }),
                )
            })?;
        }
    }
    Ok(())
}

fn transport(cfg: &Settings) -> Step {
    let name = "level-transport";
    for (n1, n2) in [(4u64, 2u64), (6, 3), (12, 6)].into_iter().filter(|p| p.0 <= cfg.max_n) {
        let err = lib(name, Some(n1));
        let low = certified_psi(n2).map_err(&err)?;
        let high = certified_psi(n1).map_err(&err)?;
        let lifted = lift_solution(n1, n2, &low).map_err(&err)?;
        let pushed = push_solution(n1, n2, &high).map_err(&err)?;
        for lambda in [1, -1] {
            for (dir, sol) in [("lift", &lifted), ("push", &pushed)] {
                let rep = sol.verify(lambda).map_err(&err)?;
                if let Some(c) = rep.first_failure() {
                    let mut detail = check_json(c);
                    detail["direction"] = json!(dir);
                    detail["levels"] = json!([n1, n2]);
                    detail["lambda"] = json!(lambda);
                    return Err(fail(name, Some(n1), detail));
                }
            }
        }
        ensure(push_lift_is_scalar(n1, n2, &low).map_err(&err)?, || {
            fail(name, Some(n1), json!({ "levels": [n1, n2], "reason": "push∘lift is not scalar" }))
        })?;
    }
    Ok(())
}

pub fn check_json(c: &EquationCheck) -> Value {
    json!({
        "index": out::index(&c.index),
        "certificate": out::formal(&c.certificate),
        "transported": out::formal(&c.transported),
        "base_residual": out::formal(&c.base_residual),
        "residual": out::formal(&c.residual),
        "in_script_t": c.in_script_t,
    })
}

/// Runs every check; the first failure is by level, then by check order.
pub fn run(cfg: &Settings, threads: usize) -> (Vec<Outcome>, Option<Failure>) {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool");
    let per_level: Vec<Vec<Step>> = pool.install(|| {
        (1..=cfg.max_n)
            .into_par_iter()
            .map(|n| LEVEL_CHECKS.iter().map(|c| level(n, c)).collect())
            .collect()
    });
    let mut outcomes = Vec::new();
    let mut first = None;
    for (k, check) in LEVEL_CHECKS.iter().enumerate() {
        let passed = per_level.iter().all(|r| r[k].is_ok());
        outcomes.push(Outcome { check, passed });
    }
    for steps in per_level {
        for s in steps {
            if let (Err(f), None) = (s, &first) {
                first = Some(f);
            }
        }
    }
    let global: [(&'static str, fn(&Settings) -> Step); 4] = [
        ("transfer-spectrum", spectral),
        ("selberg-zero", selberg),
        ("slash-composition", composition),
        ("level-transport", transport),
    ];
    for (check, f) in global {
        let r = f(cfg);
        outcomes.push(Outcome { check, passed: r.is_ok() });
        if let (Err(f), None) = (r, &first) {
            first = Some(f);
        }
    }
    (outcomes, first)
}
