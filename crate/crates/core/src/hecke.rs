//! Hecke operators `T_n` and `T̃_n` on period functions, their
//! decomposition over square divisors, the multiplier on `1/z` at `s = 1`,
//! and transport of solutions between levels.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;

use crate::algebra::{FormalSum, IntMat2};
use crate::chains::{enum_sn, primitive_sn, psi_of, CertifiedSolution, PsiVector};
use crate::cosets::{enumerate, sigma};
use crate::error::{Error, Result};
use crate::ratfunc::RationalFunction;
use crate::slash::{slash_exact, slash_sum, slash_sum_fn, BranchedFunction, Weight};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Primitive elements of `S_n`.
    Tilde,
    /// All of `S_n`.
    Full,
}

/// `T̃_n` or `T_n` as a formal sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeckeSet {
    pub n: u64,
    pub variant: Variant,
    pub terms: FormalSum,
}

impl HeckeSet {
    pub fn new(n: u64, variant: Variant) -> Self {
        let mats = match variant {
            Variant::Tilde => primitive_sn(n),
            Variant::Full => enum_sn(n),
        };
        HeckeSet {
            n,
            variant,
            terms: mats.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

pub fn ttilde_set(n: u64) -> HeckeSet {
    HeckeSet::new(n, Variant::Tilde)
}

pub fn tn_set(n: u64) -> HeckeSet {
    HeckeSet::new(n, Variant::Full)
}

/// `[(d, T̃_{n/d²}) : d² | n]`, increasing in `d`.
pub fn decompose(n: u64) -> Vec<(u64, HeckeSet)> {
    (1..)
        .take_while(|d| d * d <= n)
        .filter(|d| n.is_multiple_of(d * d))
        .map(|d| (d, ttilde_set(n / (d * d))))
        .collect()
}

/// `Σ_{d² | n} [d,0;0,d] T̃_{n/d²}` as a formal sum with multiplicities.
pub fn recompose(n: u64) -> FormalSum {
    let mut acc = FormalSum::new();
    for (d, h) in decompose(n) {
        acc += &h.terms.mul_left(&IntMat2::scalar(d));
    }
    acc
}

/// `n` has no square factor `> 1`.
pub fn is_squarefree(n: u64) -> bool {
    (2..).take_while(|p| p * p <= n).all(|p| !n.is_multiple_of(p * p))
}

/// `σ(n) = Σ_{d | n} d`
pub fn divisor_sum(n: u64) -> u64 {
    (1..=n).filter(|d| n.is_multiple_of(*d)).sum()
}

/// `(φ|_s T̃_n)(z)` or `(φ|_s T_n)(z)`.
pub fn apply(phi: &BranchedFunction, n: u64, s: Weight, z: Complex64, variant: Variant) -> Result<Complex64> {
    slash_sum(phi, &HeckeSet::new(n, variant).terms, s, z)
}

/// `φ|_s T̃_n` or `φ|_s T_n` as a function.
pub fn apply_fn(phi: &BranchedFunction, n: u64, s: Weight, variant: Variant) -> Result<BranchedFunction> {
    slash_sum_fn(phi, &HeckeSet::new(n, variant).terms, s)
}

/// The terms of `T̃_n` or `T_n` grouped by chains, `[d,0;0,d]ψ̃_i` at level
/// `n/d²`. Each group maps `1/z` to `1/z` at `s = 1`, so sums stay small.
fn chain_groups(n: u64, variant: Variant) -> Result<Vec<FormalSum>> {
    let levels = match variant {
        Variant::Tilde => vec![(1, n)],
        Variant::Full => decompose(n).into_iter().map(|(d, h)| (d, h.n)).collect(),
    };
    let mut groups = Vec::new();
    let mut total = FormalSum::new();
    for (d, m) in levels {
        for comp in psi_of(m)?.components() {
            let g = comp.mul_left(&IntMat2::scalar(d));
            total += &g;
            groups.push(g);
        }
    }
    if total != HeckeSet::new(n, variant).terms {
        return Err(Error::Integrity(format!("chain groups do not sum to the Hecke set at level {n}")));
    }
    Ok(groups)
}

/// `f|_s T̃_n` or `f|_s T_n` in exact arithmetic, summed chain by chain.
pub fn apply_exact(fun: &RationalFunction, n: u64, s: Weight, variant: Variant) -> Result<RationalFunction> {
    let mut acc = RationalFunction::zero();
    for g in chain_groups(n, variant)? {
        acc = acc.add(&slash_exact(fun, &g, s)?);
    }
    Ok(acc)
}

fn multiplier(n: u64, variant: Variant) -> Result<BigRational> {
    let inv = RationalFunction::inverse_z();
    let image = apply_exact(&inv, n, Complex64::new(1.0, 0.0), variant)?;
    image.constant_multiple_of(&inv).ok_or_else(|| {
        Error::Integrity(format!("(1/z)|T at level {n} is {image}, not a multiple of 1/z"))
    })
}

/// `κ̃(n)` with `(1/z)|_1 T̃_n = κ̃(n)/z`, computed exactly.
pub fn kappa_tilde(n: u64) -> Result<BigRational> {
    multiplier(n, Variant::Tilde)
}

/// `κ(n)` with `(1/z)|_1 T_n = κ(n)/z`.
pub fn kappa_full(n: u64) -> Result<BigRational> {
    multiplier(n, Variant::Full)
}

/// `T̃_n` as the component sum of `ψ̃`, checked against the direct sum over
/// primitive elements.
pub fn ttilde_from_psi(n: u64) -> Result<FormalSum> {
    let sum = psi_of(n)?.component_sum();
    if sum != ttilde_set(n).terms {
        return Err(Error::Integrity(format!("component sum of ψ̃ differs from T̃_{n}")));
    }
    Ok(sum)
}

fn check_levels(n1: u64, n2: u64) -> Result<()> {
    if n2 == 0 || !n1.is_multiple_of(n2) {
        return Err(Error::LevelMismatch(format!("{n2} does not divide {n1}")));
    }
    Ok(())
}

/// `ψ¹_i = ψ²_{σ(i)}` with the certificates carried along.
pub fn lift_solution(n1: u64, n2: u64, sol: &CertifiedSolution) -> Result<CertifiedSolution> {
    check_levels(n1, n2)?;
    if sol.psi.n() != n2 {
        return Err(Error::LevelMismatch(format!("solution has level {}, expected {n2}", sol.psi.n())));
    }
    let mut comps = Vec::new();
    let mut certs = Vec::new();
    for i in enumerate(n1) {
        let j = sigma(n1, n2, &i)?;
        let k = sol.psi.indices().binary_search(&j).expect("σ lands in I_{n2}");
        comps.push(sol.psi.components()[k].clone());
        certs.push(sol.certificates[k].clone());
    }
    Ok(CertifiedSolution {
        psi: PsiVector::new(n1, comps)?,
        certificates: certs,
    })
}

/// `ψ²_j = Σ_{σ(i) = j} ψ¹_i` with the certificates summed alike.
pub fn push_solution(n1: u64, n2: u64, sol: &CertifiedSolution) -> Result<CertifiedSolution> {
    check_levels(n1, n2)?;
    if sol.psi.n() != n1 {
        return Err(Error::LevelMismatch(format!("solution has level {}, expected {n1}", sol.psi.n())));
    }
    let targets = enumerate(n2);
    let mut comps = vec![FormalSum::new(); targets.len()];
    let mut certs = vec![FormalSum::new(); targets.len()];
    for (k, i) in sol.psi.indices().iter().enumerate() {
        let j = sigma(n1, n2, i)?;
        let t = targets.binary_search(&j).expect("σ lands in I_{n2}");
        comps[t] += &sol.psi.components()[k];
        certs[t] += &sol.certificates[k];
    }
    Ok(CertifiedSolution {
        psi: PsiVector::new(n2, comps)?,
        certificates: certs,
    })
}

/// Fibre size `|I_{n1}| / |I_{n2}|` of `σ`.
pub fn fibre_size(n1: u64, n2: u64) -> u64 {
    crate::cosets::index_count(n1) / crate::cosets::index_count(n2)
}

/// `push(lift(ψ)) = μ ψ` with `μ` the fibre size.
pub fn push_lift_is_scalar(n1: u64, n2: u64, sol: &CertifiedSolution) -> Result<bool> {
    let back = push_solution(n1, n2, &lift_solution(n1, n2, sol)?)?;
    let mu = BigInt::from(fibre_size(n1, n2));
    Ok(back.psi == sol.psi.scale(&mu)
        && back
            .certificates
            .iter()
            .zip(&sol.certificates)
            .all(|(a, b)| *a == b.scale(&mu)))
}
