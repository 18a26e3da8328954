//! The sets `S_n`, `X_n`, `Y_n`, the operator `K`, chains, the special
//! solution `ψ̃` and explicit ideal certificates for its Lewis system.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::algebra::{ceil_ratio, formal, FormalSum, IntMat2};
use crate::cosets::{enumerate, CosetIndex, CosetSpace};
use crate::error::{Error, Result};
use crate::partitions::{minimal_partition_nonneg, reduce_to_minimal, xts_data};
use crate::slash::in_t;

/// `S_n = { [a,b;c,d] : a > c >= 0, d > b >= 0, ad - bc = n }`, sorted.
pub fn enum_sn(n: u64) -> Vec<IntMat2> {
    let n = n as i64;
    let mut out = Vec::new();
    // (c+1)(b+1) <= ad - bc = n forces b + c <= n - 1
    for b in 0..n {
        for c in 0..n - b {
            let total = n + b * c;
            let mut a = 1;
            while a * a <= total {
                if total % a == 0 {
                    for (aa, dd) in [(a, total / a), (total / a, a)] {
                        if aa > c && dd > b {
                            out.push((aa, b, c, dd));
                        }
                    }
                }
                a += 1;
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out.into_iter()
        .map(|(a, b, c, d)| IntMat2::new(a, b, c, d))
        .collect()
}

/// `X_n = { [c, a; 0, n/c] : c | n, 0 <= a < n/c }`
pub fn enum_xn(n: u64) -> Vec<IntMat2> {
    let mut out: Vec<_> = (1..=n)
        .filter(|c| n.is_multiple_of(*c))
        .flat_map(|c| (0..n / c).map(move |a| IntMat2::new(c, a, 0, n / c)))
        .collect();
    out.sort();
    out
}

/// `Y_n = { [c, 0; a, n/c] : c | n, 0 <= a < c }`
pub fn enum_yn(n: u64) -> Vec<IntMat2> {
    let mut out: Vec<_> = (1..=n)
        .filter(|c| n.is_multiple_of(*c))
        .flat_map(|c| (0..c).map(move |a| IntMat2::new(c, 0, a, n / c)))
        .collect();
    out.sort();
    out
}

/// Membership in `S_n` for `n = det A >= 1`.
pub fn in_sn(a: &IntMat2) -> bool {
    a.det().is_positive()
        && a.a > a.c
        && !a.c.is_negative()
        && a.d > a.b
        && !a.b.is_negative()
}

/// `K(A) = T^{⌈d/b⌉} Q A = [-c + ⌈d/b⌉a, -d + ⌈d/b⌉b; a, b]`.
pub fn k_map(a: &IntMat2) -> Result<IntMat2> {
    if !in_sn(a) {
        return Err(Error::NotInSn(a.to_string()));
    }
    if a.b.is_zero() {
        return Err(Error::ChainTerminus(a.to_string()));
    }
    let k = ceil_ratio(&a.d, &a.b)?;
    Ok(IntMat2::new(
        -&a.c + &k * &a.a,
        -&a.d + &k * &a.b,
        a.a.clone(),
        a.b.clone(),
    ))
}

/// `K^{-1}(A) = [c, d; -a + ⌈a/c⌉c, -b + ⌈a/c⌉d]`.
pub fn k_inv(a: &IntMat2) -> Result<IntMat2> {
    if !in_sn(a) {
        return Err(Error::NotInSn(a.to_string()));
    }
    if a.c.is_zero() {
        return Err(Error::ChainOrigin(a.to_string()));
    }
    let k = ceil_ratio(&a.a, &a.c)?;
    Ok(IntMat2::new(
        a.c.clone(),
        a.d.clone(),
        -&a.a + &k * &a.c,
        -&a.b + &k * &a.d,
    ))
}

/// `A_i, K(A_i), ..., K^{k_i}(A_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    pub owner: CosetIndex,
    pub matrices: Vec<IntMat2>,
}

impl Chain {
    /// `k_i`
    pub fn k(&self) -> usize {
        self.matrices.len() - 1
    }

    pub fn sum(&self) -> FormalSum {
        self.matrices.iter().cloned().collect()
    }
}

/// Iterates `K` from `A_i` into `Y_n`, checking each step against the
/// minimal partition of `x(i)`.
pub fn chain_of(i: &CosetIndex) -> Result<Chain> {
    let a0 = i.a_matrix();
    let mut matrices = vec![a0.clone()];
    while !matrices[matrices.len() - 1].b.is_zero() {
        let next = k_map(&matrices[matrices.len() - 1])?;
        matrices.push(next);
    }
    let p = minimal_partition_nonneg(&i.x())?;
    let k = p.k();
    if matrices.len() != k {
        return Err(Error::Integrity(format!(
            "chain of {i} has {} elements, partition of {} has {} points",
            matrices.len(),
            i.x(),
            p.len()
        )));
    }
    for (j, m) in matrices.iter().enumerate() {
        if *m != &p.pair_matrix(k - j) * &a0 {
            return Err(Error::Integrity(format!("chain of {i} disagrees at step {j}")));
        }
    }
    Ok(Chain {
        owner: *i,
        matrices,
    })
}

/// A vector `(ψ_i)` indexed by `I_n` in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsiVector {
    n: u64,
    indices: Vec<CosetIndex>,
    components: Vec<FormalSum>,
}

impl PsiVector {
    pub fn new(n: u64, components: Vec<FormalSum>) -> Result<Self> {
        let indices = enumerate(n);
        if indices.len() != components.len() {
            return Err(Error::LevelMismatch(format!(
                "{} components for {} cosets at level {n}",
                components.len(),
                indices.len()
            )));
        }
        Ok(PsiVector {
            n,
            indices,
            components,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn indices(&self) -> &[CosetIndex] {
        &self.indices
    }

    pub fn components(&self) -> &[FormalSum] {
        &self.components
    }

    pub fn get(&self, i: &CosetIndex) -> Option<&FormalSum> {
        self.indices
            .binary_search(i)
            .ok()
            .map(|k| &self.components[k])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CosetIndex, &FormalSum)> {
        self.indices.iter().zip(&self.components)
    }

    /// `Σ_i ψ_i`
    pub fn component_sum(&self) -> FormalSum {
        let mut acc = FormalSum::new();
        for c in &self.components {
            acc += c;
        }
        acc
    }

    pub fn scale(&self, k: &BigInt) -> PsiVector {
        PsiVector {
            n: self.n,
            indices: self.indices.clone(),
            components: self.components.iter().map(|c| c.scale(k)).collect(),
        }
    }
}

/// `ψ̃_i = Σ_j K^j(A_i)`.
pub fn psi_from_chains(n: u64) -> Result<PsiVector> {
    let comps = enumerate(n)
        .iter()
        .map(|i| chain_of(i).map(|c| c.sum()))
        .collect::<Result<Vec<_>>>()?;
    PsiVector::new(n, comps)
}

/// `ψ̃_i = m(P_{x(i)}) A_i`.
pub fn psi_from_partitions(n: u64) -> Result<PsiVector> {
    let comps = enumerate(n)
        .iter()
        .map(|i| Ok(minimal_partition_nonneg(&i.x())?.m().mul_right(&i.a_matrix())))
        .collect::<Result<Vec<_>>>()?;
    PsiVector::new(n, comps)
}

/// The special solution, built both ways and cross-checked.
pub fn psi_of(n: u64) -> Result<PsiVector> {
    let a = psi_from_chains(n)?;
    let b = psi_from_partitions(n)?;
    if a != b {
        return Err(Error::Integrity(format!("chain and partition constructions differ at level {n}")));
    }
    Ok(a)
}

fn gens() -> (IntMat2, IntMat2, IntMat2, IntMat2) {
    let t = IntMat2::shift();
    let m = IntMat2::flip();
    let tm = &t * &m;
    let mtm = &m * &tm;
    (t, m, tm, mtm)
}

/// `I - T - λ TM`
pub fn lewis_generator(lambda: i64) -> FormalSum {
    let (t, _, tm, _) = gens();
    formal(&[(1, IntMat2::identity()), (-1, t), (-lambda, tm)])
}

/// `I - T - MTM`
pub fn base_generator() -> FormalSum {
    let (t, _, _, mtm) = gens();
    formal(&[(1, IntMat2::identity()), (-1, t), (-1, mtm)])
}

/// Certificate `R` for `ψ_{[c:d+c]} - ψ_{[c:d]}T - Mψ_{[d:c]}TM = (I-T-MTM)R`
/// at one index, assembled from the `X T^s` identity and the Farey
/// reduction of the joined partition.
pub fn base_certificate(i: &CosetIndex) -> Result<FormalSum> {
    let n = i.n();
    let (c, d) = (i.c(), i.d());
    let c2 = d.gcd(&n);
    let step = n / c2;
    let d2 = (d / c2) % step;
    let unit = (0..=n)
        .map(|t| d2 + t * step)
        .find(|v| v.gcd(&n) == 1)
        .ok_or_else(|| Error::Integrity(format!("no unit representative for {i}")))?;
    let data = xts_data(n, c, c2, unit)?;

    let space_t = crate::cosets::act(i, &IntMat2::shift())?;
    let space_m = crate::cosets::act(i, &IntMat2::flip())?;
    if data.a_x != i.a_matrix() || data.a_y != space_t.a_matrix() || data.a_z != space_m.a_matrix() {
        return Err(Error::Integrity(format!("attached matrices disagree at {i}")));
    }
    let (_, witnesses) = reduce_to_minimal(&data.joined)?;
    let mut r = FormalSum::new();
    for w in witnesses {
        r.add_term(&w * &data.a_y, 1);
    }
    Ok(r)
}

/// A vector solution with one base certificate per component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifiedSolution {
    pub psi: PsiVector,
    pub certificates: Vec<FormalSum>,
}

impl CertifiedSolution {
    pub fn verify(&self, lambda: i64) -> Result<LewisReport> {
        verify_certified(&self.psi, &self.certificates, lambda)
    }
}

/// `ψ̃` at level `n` with its certificates.
pub fn certified_psi(n: u64) -> Result<CertifiedSolution> {
    let psi = psi_of(n)?;
    let certificates = psi
        .indices()
        .iter()
        .map(base_certificate)
        .collect::<Result<Vec<_>>>()?;
    Ok(CertifiedSolution { psi, certificates })
}

/// Outcome of one component equation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationCheck {
    pub index: CosetIndex,
    /// `R` with `E = (I - T - MTM) R`
    pub certificate: FormalSum,
    /// `R_λ = (I + λTM - MTM) R + (M - λI) ψ_{[d:c]} TM`
    pub transported: FormalSum,
    /// `E - (I - T - MTM) R`
    pub base_residual: FormalSum,
    /// `E_λ - (I - T - λTM) R_λ`
    pub residual: FormalSum,
    /// All terms of `R` and `R_λ` lie in `𝒯`.
    pub in_script_t: bool,
}

impl EquationCheck {
    pub fn passed(&self) -> bool {
        self.base_residual.is_zero() && self.residual.is_zero() && self.in_script_t
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LewisReport {
    pub n: u64,
    pub lambda: i64,
    pub checks: Vec<EquationCheck>,
}

impl LewisReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(EquationCheck::passed)
    }

    pub fn first_failure(&self) -> Option<&EquationCheck> {
        self.checks.iter().find(|c| !c.passed())
    }
}

/// Checks `ψ_{iT} - ψ_i T - λ ψ_{iM} TM ∈ (I - T - λTM)ℛ` for every `i`
/// through the given base certificates and their `λ`-transport.
pub fn verify_certified(psi: &PsiVector, certificates: &[FormalSum], lambda: i64) -> Result<LewisReport> {
    if lambda != 1 && lambda != -1 {
        return Err(Error::Precondition(format!("λ must be ±1, got {lambda}")));
    }
    if certificates.len() != psi.indices().len() {
        return Err(Error::LevelMismatch("one certificate per component required".into()));
    }
    let space = CosetSpace::new(psi.n());
    let (t, m, tm, mtm) = gens();
    let lam = BigInt::from(lambda);
    let base = base_generator();
    let gen = lewis_generator(lambda);
    let shift_l = formal(&[(1, IntMat2::identity()), (lambda, tm.clone()), (-1, mtm)]);
    let m_minus = formal(&[(1, m.clone()), (-lambda, IntMat2::identity())]);

    let mut checks = Vec::with_capacity(certificates.len());
    for (k, i) in space.indices().iter().enumerate() {
        let it = crate::cosets::act(i, &t)?;
        let im = crate::cosets::act(i, &m)?;
        let psi_i = &psi.components()[k];
        let psi_t = psi.get(&it).expect("same level");
        let psi_m = psi.get(&im).expect("same level");
        let r = &certificates[k];

        let e_base = &(psi_t - &psi_i.mul_right(&t)) - &psi_m.mul_right(&tm).mul_left(&m);
        let base_residual = &e_base - &(&base * r);

        let e_l = &(psi_t - &psi_i.mul_right(&t)) - &psi_m.mul_right(&tm).scale(&lam);
        let transported = &(&shift_l * r) + &(&m_minus * &psi_m.mul_right(&tm));
        let residual = &e_l - &(&gen * &transported);

        let in_t = r.matrices().chain(transported.matrices()).all(in_t);
        checks.push(EquationCheck {
            index: *i,
            certificate: r.clone(),
            transported,
            base_residual,
            residual,
            in_script_t: in_t,
        });
    }
    Ok(LewisReport {
        n: psi.n(),
        lambda,
        checks,
    })
}

/// Builds `ψ̃` and certificates at level `n` and verifies the system for `λ`.
pub fn verify_lewis_system(n: u64, lambda: i64) -> Result<LewisReport> {
    certified_psi(n)?.verify(lambda)
}

/// Primitive elements of `S_n`.
pub fn primitive_sn(n: u64) -> Vec<IntMat2> {
    enum_sn(n)
        .into_iter()
        .filter(|a| a.content().map(|g| g.is_one()).unwrap_or(false))
        .collect()
}

/// True if the chains over `I_n` cover each primitive element of `S_n`
/// exactly once.
pub fn chains_partition_primitive(n: u64) -> Result<bool> {
    let mut seen = BTreeSet::new();
    for i in enumerate(n) {
        for m in chain_of(&i)?.matrices {
            if !seen.insert(m) {
                return Ok(false);
            }
        }
    }
    let prim: BTreeSet<_> = primitive_sn(n).into_iter().collect();
    Ok(seen == prim)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(a: i64, b: i64, c: i64, d: i64) -> IntMat2 {
        IntMat2::new(a, b, c, d)
    }

    #[test]
    fn small_sets() {
        assert_eq!(
            enum_sn(2),
            vec![m(1, 0, 0, 2), m(1, 1, 0, 2), m(2, 0, 0, 1), m(2, 0, 1, 1)]
        );
        assert_eq!(enum_xn(2), vec![m(1, 0, 0, 2), m(1, 1, 0, 2), m(2, 0, 0, 1)]);
        assert_eq!(enum_yn(2), vec![m(1, 0, 0, 2), m(2, 0, 0, 1), m(2, 0, 1, 1)]);
        assert_eq!(enum_sn(3).len(), 7);
        assert_eq!(enum_sn(1), vec![IntMat2::identity()]);
    }

    #[test]
    fn k_examples() {
        assert_eq!(k_map(&m(1, 1, 0, 2)).unwrap(), m(2, 0, 1, 1));
        assert_eq!(k_map(&m(1, 2, 0, 3)).unwrap(), m(2, 1, 1, 2));
        assert_eq!(k_map(&m(2, 1, 1, 2)).unwrap(), m(3, 0, 2, 1));
        assert!(matches!(k_map(&m(2, 0, 1, 1)), Err(Error::ChainTerminus(_))));
        assert_eq!(k_inv(&m(2, 0, 1, 1)).unwrap(), m(1, 1, 0, 2));
        assert_eq!(k_inv(&m(3, 0, 2, 1)).unwrap(), m(2, 1, 1, 2));
        assert!(matches!(k_inv(&m(1, 1, 0, 2)), Err(Error::ChainOrigin(_))));
        assert!(matches!(k_map(&m(1, 1, 1, 2)), Err(Error::NotInSn(_))));
    }

    #[test]
    fn chain_examples() {
        let i = |n, c, b| CosetIndex::new(n, c, b).unwrap();
        assert_eq!(chain_of(&i(2, 1, 0)).unwrap().matrices, vec![m(1, 0, 0, 2)]);
        assert_eq!(
            chain_of(&i(2, 1, 1)).unwrap().matrices,
            vec![m(1, 1, 0, 2), m(2, 0, 1, 1)]
        );
        assert_eq!(
            chain_of(&i(3, 1, 2)).unwrap().matrices,
            vec![m(1, 2, 0, 3), m(2, 1, 1, 2), m(3, 0, 2, 1)]
        );
    }

    #[test]
    fn psi_examples() {
        let p = psi_of(2).unwrap();
        assert_eq!(p.components()[0], formal(&[(1, m(1, 0, 0, 2))]));
        assert_eq!(p.components()[1], formal(&[(1, m(1, 1, 0, 2)), (1, m(2, 0, 1, 1))]));
        assert_eq!(p.components()[2], formal(&[(1, m(2, 0, 0, 1))]));
        let p3 = psi_of(3).unwrap();
        assert_eq!(p3.components().len(), 4);
        assert_eq!(p3.components().iter().map(|c| c.len()).sum::<usize>(), 7);
    }

    #[test]
    fn certificates_small_levels() {
        let one = certified_psi(1).unwrap();
        assert_eq!(one.certificates, vec![FormalSum::from_matrix(IntMat2::identity())]);
        for n in [1, 2, 3, 4, 6, 12] {
            for lambda in [1, -1] {
                let rep = verify_lewis_system(n, lambda).unwrap();
                assert!(rep.passed(), "n = {n}, λ = {lambda}: {:?}", rep.first_failure());
            }
        }
        assert_eq!(verify_lewis_system(12, -1).unwrap().checks.len(), 24);
    }
}
