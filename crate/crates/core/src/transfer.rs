//! Finite Taylor truncations of the transfer operator
//! `L_s f(z) = Σ_{n≥1} (z+n)^{-2s} A^{n-1} B f(1/(z+n))` with `A = ρ(T⁻¹)`,
//! `B = ρ(T⁻¹M)`, their spectra and eigenfunctions, the vector Lewis
//! equation, and the Fredholm determinant `det(1 - L_s²)`.
//!
//! Functions are represented by Taylor coefficients in `(z-1)^k`, `k < N`,
//! one block of `N` per coset index. Row and column `i·N + k` belong to
//! component `i`, coefficient `k`.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::algebra::IntMat2;
use crate::cosets::{CosetIndex, CosetSpace, Permutation};
use crate::error::{Error, Result};
use crate::slash::{BranchedFunction, Weight};

/// Radius of the Taylor disc around `1`.
pub const DISC_RADIUS: f64 = 1.5;

const EXTRA_TERMS: usize = 16;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `B_{2j} / (2j)!` for `j = 1..=30`.
fn bernoulli_ratios() -> &'static [f64] {
    static CELL: OnceLock<Vec<f64>> = OnceLock::new();
    CELL.get_or_init(|| {
        let top = 60;
        let mut b: Vec<BigRational> = vec![BigRational::one()];
        for m in 1..=top {
            let mut binom_row = vec![BigInt::one()];
            for k in 1..=m {
                let prev = binom_row[k - 1].clone();
                binom_row.push(prev * BigInt::from(m + 2 - k) / BigInt::from(k));
            }
            let mut acc = BigRational::zero();
            for (k, bk) in b.iter().enumerate() {
                acc += bk * BigRational::from_integer(binom_row[k].clone());
            }
            b.push(-acc / BigRational::from_integer(BigInt::from(m + 1)));
        }
        let mut fact = BigInt::one();
        let mut out = Vec::new();
        for k in 1..=top {
            fact *= BigInt::from(k);
            if k % 2 == 0 {
                let r = &b[k] / BigRational::from_integer(fact.clone());
                out.push(r.to_f64().unwrap_or(0.0));
            }
        }
        out
    })
}

/// Hurwitz zeta `ζ_H(a, x) = Σ_{k≥0} (x+k)^{-a}` for complex `a ≠ 1` and
/// real `x > 0`, by Euler–Maclaurin summation.
pub fn hurwitz_zeta(a: Complex64, x: f64) -> Result<Complex64> {
    if (a - 1.0).norm() < 1e-14 {
        return Err(Error::Pole(format!("Hurwitz zeta at a = {a}")));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Precondition(format!("Hurwitz zeta needs x > 0, got {x}")));
    }
    let shift = (a.norm() + 30.0 - x).max(0.0).ceil() as usize;
    let mut sum = Complex64::zero();
    for k in 0..shift {
        sum += (-a * (x + k as f64).ln()).exp();
    }
    let y = x + shift as f64;
    let ly = y.ln();
    let y_pow = (-a * ly).exp();
    sum += y_pow * y / (a - 1.0) + y_pow * 0.5;
    // (a)_{2j-1} y^{-a-2j+1}
    let mut rising = a * y_pow / y;
    for (j, ratio) in bernoulli_ratios().iter().enumerate() {
        let term = rising * *ratio;
        sum += term;
        if term.norm() <= 1e-18 * sum.norm() {
            break;
        }
        let m = 2.0 * (j + 1) as f64;
        rising *= (a + (m - 1.0)) * (a + m) / (y * y);
    }
    Ok(sum)
}

/// `Σ_{t≥0} (q0 + m t)^{-a}`.
pub fn lattice_zeta(a: Complex64, q0: f64, m: usize) -> Result<Complex64> {
    let mf = m as f64;
    Ok((-a * mf.ln()).exp() * hurwitz_zeta(a, q0 / mf)?)
}

/// Permutation matrix with `(P v)_i = v_{P(i)}`.
pub fn perm_matrix(p: &Permutation) -> DMatrix<Complex64> {
    let k = p.size();
    let mut m = DMatrix::zeros(k, k);
    for (i, &j) in p.images().iter().enumerate() {
        m[(i, j)] = Complex64::one();
    }
    m
}

/// `A = ρ(T⁻¹)` and `B = ρ(T⁻¹M)` at level `n`.
pub fn transfer_generators(space: &CosetSpace) -> Result<(Permutation, Permutation)> {
    let t_inv = IntMat2::shift_pow(-1);
    let a = space.rho(&t_inv)?;
    let b = space.rho(&(&t_inv * &IntMat2::flip()))?;
    Ok((a, b))
}

/// `ζ_{A,B}(a, b) = Σ_{n≥1} A^{n-1} B (b+n)^{-a}` at level `n`, summed by
/// residue classes of `n-1` modulo the order of `A`.
pub fn zeta_ab(a: Complex64, b: f64, n: u64) -> Result<DMatrix<Complex64>> {
    if !(b > 0.0) {
        return Err(Error::Precondition(format!("zeta_AB needs b > 0, got {b}")));
    }
    let space = CosetSpace::new(n);
    let (pa, pb) = transfer_generators(&space)?;
    let m = pa.order();
    let mut out = DMatrix::zeros(space.len(), space.len());
    for r in 0..m {
        let z = lattice_zeta(a, b + (r + 1) as f64, m)?;
        out += perm_matrix(&pa.pow(r).then(&pb)) * z;
    }
    Ok(out)
}

/// `binom(x, k)` for complex `x`.
fn gbinom(x: Complex64, k: usize) -> Complex64 {
    let mut r = Complex64::one();
    for i in 0..k {
        r *= (x - i as f64) / (i + 1) as f64;
    }
    r
}

fn binom(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r *= (n - i) as f64 / (i + 1) as f64;
    }
    r
}

fn series_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len();
    (0..n)
        .map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum())
        .collect()
}

#[derive(Clone, Debug)]
pub struct TruncatedOperator {
    n: u64,
    s: Weight,
    order: usize,
    indices: Vec<CosetIndex>,
    a: Permutation,
    b: Permutation,
    matrix: DMatrix<Complex64>,
}

impl TruncatedOperator {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn s(&self) -> Weight {
        self.s
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of components `|I_n|`.
    pub fn mu(&self) -> usize {
        self.indices.len()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn indices(&self) -> &[CosetIndex] {
        &self.indices
    }

    pub fn a(&self) -> &Permutation {
        &self.a
    }

    pub fn b(&self) -> &Permutation {
        &self.b
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }
}

/// The `N`-term truncation of `L_s` at level `n`.
///
/// Terms `n < N + 16` are expanded as exact power series in `t = z - 1`; the
/// remainder is summed through [`lattice_zeta`].
pub fn build(n: u64, s: Weight, order: usize) -> Result<TruncatedOperator> {
    if n == 0 {
        return Err(Error::Precondition("level must be at least 1".into()));
    }
    if order < 4 {
        return Err(Error::Precondition(format!("order must be at least 4, got {order}")));
    }
    let space = CosetSpace::new(n);
    let (pa, pb) = transfer_generators(&space)?;
    let m = pa.order();
    let big_n = order;
    let n0 = big_n + EXTRA_TERMS;
    let two_s = s * 2.0;

    let mut blocks = vec![DMatrix::<Complex64>::zeros(big_n, big_n); m];
    for k in 1..n0 {
        let q = (k + 1) as f64;
        let mut h: Vec<Complex64> = (0..big_n)
            .map(|e| c(if e % 2 == 0 { 1.0 } else { -1.0 } / q.powi(e as i32 + 1)))
            .collect();
        h[0] -= 1.0;
        let base = (-two_s * q.ln()).exp();
        let mut cur: Vec<Complex64> = (0..big_n)
            .map(|e| base * gbinom(-two_s, e) / q.powi(e as i32))
            .collect();
        let blk = &mut blocks[(k - 1) % m];
        for j in 0..big_n {
            for (e, v) in cur.iter().enumerate() {
                blk[(e, j)] += v;
            }
            cur = series_mul(&cur, &h);
        }
    }

    for (r, blk) in blocks.iter_mut().enumerate() {
        let first = n0 + (r + m - (n0 - 1) % m) % m;
        let zs = (0..2 * big_n - 1)
            .map(|e| lattice_zeta(two_s + e as f64, (first + 1) as f64, m))
            .collect::<Result<Vec<_>>>()?;
        for k in 0..big_n {
            for j in 0..big_n {
                let mut acc = Complex64::zero();
                for l in 0..=j {
                    let sign = if (j - l) % 2 == 0 { 1.0 } else { -1.0 };
                    acc += gbinom(-(two_s + l as f64), k) * zs[l + k] * (sign * binom(j, l));
                }
                blk[(k, j)] += acc;
            }
        }
    }

    let mu = space.len();
    let mut matrix = DMatrix::zeros(mu * big_n, mu * big_n);
    for (r, blk) in blocks.iter().enumerate() {
        let p = pa.pow(r).then(&pb);
        for (i, &ip) in p.images().iter().enumerate() {
            matrix
                .view_mut((i * big_n, ip * big_n), (big_n, big_n))
                .add_assign(blk);
        }
    }
    if matrix.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Numeric(format!("non-finite entries at s = {s}")));
    }
    Ok(TruncatedOperator {
        n,
        s,
        order,
        indices: space.indices().to_vec(),
        a: pa,
        b: pb,
        matrix,
    })
}

trait AddAssignView {
    fn add_assign(self, other: &DMatrix<Complex64>);
}

impl AddAssignView for nalgebra::DMatrixViewMut<'_, Complex64> {
    fn add_assign(mut self, other: &DMatrix<Complex64>) {
        self += other;
    }
}

#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub value: Complex64,
    pub vector: DVector<Complex64>,
    /// `‖Lv - λv‖ / ‖v‖`
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct SpectralResult {
    /// Sorted by decreasing modulus.
    pub eigenvalues: Vec<Complex64>,
    pub leading: Option<Eigenpair>,
}

/// All eigenvalues of the truncation and the leading eigenpair.
pub fn spectrum(op: &TruncatedOperator) -> Result<SpectralResult> {
    let eigenvalues = eigenvalues(op)?;
    let leading = Some(eigenpair_near(op, eigenvalues[0])?);
    Ok(SpectralResult { eigenvalues, leading })
}

/// Eigenvalues of the truncation sorted by decreasing modulus.
pub fn eigenvalues(op: &TruncatedOperator) -> Result<Vec<Complex64>> {
    let schur = nalgebra::Schur::try_new(op.matrix.clone(), 1e-15, 10_000).ok_or_else(|| {
        Error::Numeric(format!(
            "Schur iteration did not converge (Frobenius norm {:.3e})",
            op.matrix.norm()
        ))
    })?;
    let ev = schur
        .eigenvalues()
        .ok_or_else(|| Error::Numeric("Schur form is not triangular".into()))?;
    let mut out: Vec<Complex64> = ev.iter().copied().collect();
    out.sort_by(|x, y| y.norm().total_cmp(&x.norm()).then(y.re.total_cmp(&x.re)));
    Ok(out)
}

/// Eigenpair for the eigenvalue closest to `guess`, by inverse iteration.
pub fn eigenpair_near(op: &TruncatedOperator, guess: Complex64) -> Result<Eigenpair> {
    let l = &op.matrix;
    let dim = l.nrows();
    let shift = guess + Complex64::new(1e-11, 1e-11) * guess.norm().max(1e-3);
    let shifted = l - DMatrix::<Complex64>::identity(dim, dim) * shift;
    let lu = shifted.lu();
    let mut v = DVector::from_element(dim, Complex64::one());
    for _ in 0..8 {
        let w = lu.solve(&v).ok_or_else(|| {
            Error::Numeric(format!("singular shifted matrix near {guess}"))
        })?;
        let norm = w.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Numeric(format!("inverse iteration diverged near {guess}")));
        }
        v = w / c(norm);
    }
    let lv = l * &v;
    let value = v.dotc(&lv) / v.dotc(&v);
    let residual = (&lv - &v * value).norm() / v.norm();
    let pivot = v.iter().copied().max_by(|x, y| x.norm().total_cmp(&y.norm())).unwrap_or(Complex64::one());
    let vector = v.map(|x| x / pivot);
    Ok(Eigenpair { value, vector, residual })
}

/// `Φ(z) = f(z - 1)` for an eigenvector `f` of the truncation, evaluated by
/// its Taylor series on `|z - 2| ≤ 3/2`.
#[derive(Clone, Debug)]
pub struct Eigenfunction {
    pub n: u64,
    pub s: Weight,
    pub eigenvalue: Complex64,
    pub indices: Vec<CosetIndex>,
    pub coeffs: Vec<Vec<Complex64>>,
}

impl Eigenfunction {
    pub fn in_disc(z: Complex64) -> bool {
        (z - 2.0).norm() <= DISC_RADIUS + 1e-12
    }

    pub fn eval(&self, z: Complex64) -> Result<DVector<Complex64>> {
        if !Self::in_disc(z) {
            return Err(Error::OutsideDisc(format!("{z} is outside |z - 2| <= 3/2")));
        }
        Ok(DVector::from_iterator(
            self.coeffs.len(),
            self.coeffs.iter().map(|cs| horner(cs, z - 2.0)),
        ))
    }

    /// Component `i` as a function on the disc; no disc check.
    pub fn component(&self, i: usize) -> BranchedFunction {
        let cs = self.coeffs[i].clone();
        BranchedFunction::new(0.0, move |z| horner(&cs, z - 2.0))
    }
}

fn horner(cs: &[Complex64], t: Complex64) -> Complex64 {
    cs.iter().rev().fold(Complex64::zero(), |acc, &x| acc * t + x)
}

/// Eigenfunction for the `which`-th eigenvalue in decreasing modulus.
pub fn eigenfunction(op: &TruncatedOperator, which: usize) -> Result<Eigenfunction> {
    let ev = eigenvalues(op)?;
    let guess = *ev.get(which).ok_or(Error::IndexOutOfRange {
        index: which,
        max: ev.len() - 1,
    })?;
    let pair = eigenpair_near(op, guess)?;
    let coeffs = (0..op.mu())
        .map(|i| pair.vector.rows(i * op.order, op.order).iter().copied().collect())
        .collect();
    Ok(Eigenfunction {
        n: op.n,
        s: op.s,
        eigenvalue: pair.value,
        indices: op.indices.clone(),
        coeffs,
    })
}

fn apply_perm(p: &Permutation, v: &DVector<Complex64>) -> DVector<Complex64> {
    DVector::from_iterator(v.len(), p.images().iter().map(|&j| v[j]))
}

fn z_pow(z: Complex64, s: Weight) -> Complex64 {
    (-s * 2.0 * z.ln()).exp()
}

/// `max_z ‖Φ(z) - AΦ(z+1) - λ⁻¹ z^{-2s} BΦ(1+1/z)‖`.
pub fn vector_lewis_residual<F>(n: u64, s: Weight, lambda: Complex64, phi: F, points: &[Complex64]) -> Result<f64>
where
    F: Fn(Complex64) -> Result<DVector<Complex64>>,
{
    let space = CosetSpace::new(n);
    let (pa, pb) = transfer_generators(&space)?;
    let mut worst = 0.0f64;
    for &z in points {
        let lhs = phi(z)?;
        let shifted = apply_perm(&pa, &phi(z + 1.0)?);
        let inverted = apply_perm(&pb, &phi(1.0 + z.inv())?) * (z_pow(z, s) / lambda);
        worst = worst.max((lhs - shifted - inverted).norm());
    }
    Ok(worst)
}

/// `ρ(T⁻¹MT)`, checked to equal `BA⁻¹` and to be an involution.
pub fn two_term_permutation(space: &CosetSpace) -> Result<Permutation> {
    let (pa, pb) = transfer_generators(space)?;
    let w = IntMat2::shift_pow(-1) * IntMat2::flip() * IntMat2::shift();
    let p = space.rho(&w)?;
    if p != pb.then(&pa.inverse()) {
        return Err(Error::Integrity(format!("ρ(T⁻¹MT) differs from BA⁻¹ at level {}", space.n())));
    }
    if !p.then(&p).is_identity() {
        return Err(Error::Integrity(format!("ρ(T⁻¹MT) is not an involution at level {}", space.n())));
    }
    Ok(p)
}

/// `max_z ‖Φ(z) - λ z^{-2s} BA⁻¹ Φ(1/z)‖`.
pub fn two_term_check<F>(n: u64, s: Weight, lambda: Complex64, phi: F, points: &[Complex64]) -> Result<f64>
where
    F: Fn(Complex64) -> Result<DVector<Complex64>>,
{
    let p = two_term_permutation(&CosetSpace::new(n))?;
    let mut worst = 0.0f64;
    for &z in points {
        let rhs = apply_perm(&p, &phi(z.inv())?) * (lambda * z_pow(z, s));
        worst = worst.max((phi(z)? - rhs).norm());
    }
    Ok(worst)
}

/// `det(1 - L²)` of the truncation together with `det(1 + L)·det(1 - L)`.
#[derive(Clone, Copy, Debug)]
pub struct SelbergZeta {
    pub direct: Complex64,
    pub factored: Complex64,
}

impl SelbergZeta {
    pub fn value(&self) -> Complex64 {
        self.direct
    }

    /// `|direct - factored| / max(1, |direct|)`
    pub fn gap(&self) -> f64 {
        (self.direct - self.factored).norm() / self.direct.norm().max(1.0)
    }
}

pub fn selberg_zeta_of(op: &TruncatedOperator) -> SelbergZeta {
    let l = &op.matrix;
    let id = DMatrix::<Complex64>::identity(l.nrows(), l.ncols());
    let direct = (&id - l * l).lu().determinant();
    let plus = (&id + l).lu().determinant();
    let minus = (&id - l).lu().determinant();
    SelbergZeta {
        direct,
        factored: plus * minus,
    }
}

pub fn selberg_zeta(n: u64, s: Weight, order: usize) -> Result<SelbergZeta> {
    Ok(selberg_zeta_of(&build(n, s, order)?))
}

/// Taylor coefficients of `1/(1+w)` around `w = 1`.
pub fn inverse_shift_coeffs(order: usize) -> Vec<Complex64> {
    (0..order)
        .map(|k| c(if k % 2 == 0 { 1.0 } else { -1.0 } / 2f64.powi(k as i32 + 1)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hurwitz_values() {
        let z4 = hurwitz_zeta(c(4.0), 2.0).unwrap();
        assert!((z4.re - (std::f64::consts::PI.powi(4) / 90.0 - 1.0)).abs() < 1e-14);
        let z2 = hurwitz_zeta(c(2.0), 3.0).unwrap();
        assert!((z2.re - (std::f64::consts::PI.powi(2) / 6.0 - 1.25)).abs() < 1e-14);
        // ζ(0, x) = 1/2 - x
        let z0 = hurwitz_zeta(c(0.0), 0.3).unwrap();
        assert!((z0 - c(0.2)).norm() < 1e-13);
        // ζ(-1) = -1/12
        let zm = hurwitz_zeta(c(-1.0), 1.0).unwrap();
        assert!((zm - c(-1.0 / 12.0)).norm() < 1e-13);
        assert!(matches!(hurwitz_zeta(c(1.0), 2.0), Err(Error::Pole(_))));
    }

    #[test]
    fn zeta_ab_scalar() {
        let z = zeta_ab(c(4.0), 1.0, 1).unwrap();
        assert!((z[(0, 0)].re - 0.082_323_233_711_138_19).abs() < 1e-12);
    }

    #[test]
    fn scalar_leading() {
        let op = build(1, c(1.0), 32).unwrap();
        let sp = spectrum(&op).unwrap();
        assert!((sp.eigenvalues[0] - 1.0).norm() < 1e-10);
        assert!((sp.eigenvalues[1] - c(-0.303_663_002_898_732_6)).norm() < 1e-6);
    }

    #[test]
    fn disc() {
        let op = build(1, c(1.0), 16).unwrap();
        let ef = eigenfunction(&op, 0).unwrap();
        assert!(ef.eval(c(2.0)).is_ok());
        assert!(matches!(ef.eval(c(4.0)), Err(Error::OutsideDisc(_))));
    }

    #[test]
    fn build_errors() {
        assert!(matches!(build(1, c(0.5), 8), Err(Error::Pole(_))));
        assert!(build(1, c(1.0), 3).is_err());
    }
}
