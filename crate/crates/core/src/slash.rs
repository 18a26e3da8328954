//! The weight `s` slash action `(φ|_s R)(z) = |det R|^s (cz+d)^{-2s} φ((az+b)/(cz+d))`
//! on functions holomorphic off a cut `(-∞, r]`, numerically and, for integer
//! weight, exactly on rational functions.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::algebra::{FormalSum, IntMat2};
use crate::error::{Error, Result};
use crate::ratfunc::{Poly, RationalFunction};

pub type Weight = Complex64;

type Evaluator = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// A function holomorphic on `C \ (-∞, r]`.
#[derive(Clone)]
pub struct BranchedFunction {
    eval: Evaluator,
    branch: f64,
}

impl fmt::Debug for BranchedFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BranchedFunction")
            .field("branch", &self.branch)
            .finish_non_exhaustive()
    }
}

impl BranchedFunction {
    pub fn new<F>(branch: f64, f: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        BranchedFunction {
            eval: Arc::new(f),
            branch,
        }
    }

    /// `1/z`, branch point `0`.
    pub fn inverse() -> Self {
        BranchedFunction::new(0.0, |z| z.inv())
    }

    /// A constant, branch point `-∞`.
    pub fn constant(c: Complex64) -> Self {
        BranchedFunction::new(f64::NEG_INFINITY, move |_| c)
    }

    /// A rational function, with the given branch point to its right of all
    /// real poles.
    pub fn rational(f: RationalFunction, branch: f64) -> Self {
        BranchedFunction::new(branch, move |z| f.eval(z))
    }

    pub fn branch_point(&self) -> f64 {
        self.branch
    }

    pub fn on_cut(&self, z: Complex64) -> bool {
        z.im == 0.0 && z.re <= self.branch
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if self.on_cut(z) {
            return Err(Error::OnBranchCut(format!("{z} (cut ends at {})", self.branch)));
        }
        Ok((self.eval)(z))
    }

    /// Evaluation without the cut check.
    pub fn eval_unchecked(&self, z: Complex64) -> Complex64 {
        (self.eval)(z)
    }
}

fn f(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `c > 0`, or `c = 0` and `a, d > 0`.
pub fn in_g(r: &IntMat2) -> bool {
    r.c.is_positive() || (r.c.is_zero() && r.a.is_positive() && r.d.is_positive())
}

/// `R ∈ 𝒢` with `a > 0` and `b, d >= 0`.
pub fn in_g_plus(r: &IntMat2) -> bool {
    in_g(r) && r.a.is_positive() && !r.b.is_negative() && !r.d.is_negative()
}

/// `R ∈ 𝒢` with `a > 0`.
pub fn in_t(r: &IntMat2) -> bool {
    in_g(r) && r.a.is_positive()
}

/// `a - c r > 0`, reading `r = -∞` as a limit.
pub fn branching_ok(r: &IntMat2, branch: f64) -> bool {
    if branch == f64::NEG_INFINITY {
        r.c.is_positive() || (r.c.is_zero() && r.a.is_positive())
    } else {
        f(&r.a) - f(&r.c) * branch > 0.0
    }
}

/// Branch point `max{(d r - b)/(a - c r), -d/c}` of `φ|_s R`.
pub fn propagated_branch(r: &IntMat2, branch: f64) -> f64 {
    let (a, b, c, d) = (f(&r.a), f(&r.b), f(&r.c), f(&r.d));
    let pole = if c == 0.0 { f64::NEG_INFINITY } else { -d / c };
    let moved = if branch == f64::NEG_INFINITY {
        pole
    } else {
        (d * branch - b) / (a - c * branch)
    };
    moved.max(pole)
}

fn check_pair(phi: &BranchedFunction, r: &IntMat2) -> Result<()> {
    if !in_g(r) {
        return Err(Error::OutsideSlashDomain(r.to_string()));
    }
    if !branching_ok(r, phi.branch) {
        return Err(Error::BranchingViolated(format!(
            "{r} with branch point {}",
            phi.branch
        )));
    }
    Ok(())
}

fn cpow(z: Complex64, e: Complex64) -> Complex64 {
    (e * z.ln()).exp()
}

fn raw_slash(phi: &BranchedFunction, r: &IntMat2, s: Weight, z: Complex64) -> Complex64 {
    let (a, b, c, d) = (f(&r.a), f(&r.b), f(&r.c), f(&r.d));
    let det = (a * d - b * c).abs();
    let den = z * c + d;
    let w = (z * a + b) / den;
    let scale = (s * det.ln()).exp();
    scale * cpow(den, -2.0 * s) * phi.eval_unchecked(w)
}

/// `(φ|_s R)(z)`.
pub fn slash_num(phi: &BranchedFunction, r: &IntMat2, s: Weight, z: Complex64) -> Result<Complex64> {
    check_pair(phi, r)?;
    let cut = propagated_branch(r, phi.branch);
    if z.im == 0.0 && z.re <= cut {
        return Err(Error::OnBranchCut(format!("{z} for φ|{r} (cut ends at {cut})")));
    }
    Ok(raw_slash(phi, r, s, z))
}

/// `φ|_s R` as a function with its propagated branch point.
pub fn slash_fn(phi: &BranchedFunction, r: &IntMat2, s: Weight) -> Result<BranchedFunction> {
    check_pair(phi, r)?;
    let branch = propagated_branch(r, phi.branch);
    let (phi, r) = (phi.clone(), r.clone());
    Ok(BranchedFunction::new(branch, move |z| raw_slash(&phi, &r, s, z)))
}

/// `(φ|_s P)(z)` for `P ∈ Z[𝒢]`.
pub fn slash_sum(phi: &BranchedFunction, p: &FormalSum, s: Weight, z: Complex64) -> Result<Complex64> {
    let mut acc = Complex64::zero();
    for (r, k) in p.terms() {
        let v = slash_num(phi, r, s, z).map_err(|e| match e {
            Error::OnBranchCut(m) => Error::OnBranchCut(format!("term {r}: {m}")),
            Error::OutsideSlashDomain(m) => Error::OutsideSlashDomain(format!("term {m}")),
            Error::BranchingViolated(m) => Error::BranchingViolated(format!("term {m}")),
            other => other,
        })?;
        acc += v * f(k);
    }
    Ok(acc)
}

/// `φ|_s P` as a function; its branch point is the largest of the terms'.
pub fn slash_sum_fn(phi: &BranchedFunction, p: &FormalSum, s: Weight) -> Result<BranchedFunction> {
    let mut branch = f64::NEG_INFINITY;
    let mut terms = Vec::with_capacity(p.len());
    for (r, k) in p.terms() {
        check_pair(phi, r)?;
        branch = branch.max(propagated_branch(r, phi.branch));
        terms.push((r.clone(), f(k)));
    }
    let phi = phi.clone();
    Ok(BranchedFunction::new(branch, move |z| {
        terms
            .iter()
            .map(|(r, k)| raw_slash(&phi, r, s, z) * *k)
            .sum()
    }))
}

fn integer_weight(s: Weight) -> Result<i64> {
    if s.im != 0.0 || s.re.fract() != 0.0 || !s.re.is_finite() {
        return Err(Error::NonIntegerWeight(s.to_string()));
    }
    Ok(s.re as i64)
}

/// `f|_s R` on rational functions for integer `s`.
pub fn slash_exact_term(fun: &RationalFunction, r: &IntMat2, s: i64) -> Result<RationalFunction> {
    let det = r.det();
    if det.is_zero() {
        return Err(Error::Precondition(format!("{r} is singular")));
    }
    let u = Poly::linear(&r.a, &r.b);
    let v = Poly::linear(&r.c, &r.d);
    let (dn, dd) = (fun.num().degree(), fun.den().degree());
    let mut num = fun.num().homogenize(&u, &v, dn);
    let mut den = fun.den().homogenize(&u, &v, dd);
    let e = dd as i64 - dn as i64 - 2 * s;
    if e >= 0 {
        num = &num * &v.pow(e as usize);
    } else {
        den = &den * &v.pow((-e) as usize);
    }
    let absdet = BigRational::from_integer(det.abs());
    let factor = if s >= 0 {
        num_traits::pow(absdet, s as usize)
    } else {
        num_traits::pow(absdet.recip(), (-s) as usize)
    };
    RationalFunction::new(num.scale(&factor), den)
}

/// `f|_s P` on rational functions. The weight must be an integer.
pub fn slash_exact(fun: &RationalFunction, p: &FormalSum, s: Weight) -> Result<RationalFunction> {
    let s = integer_weight(s)?;
    let mut acc = RationalFunction::zero();
    for (r, k) in p.terms() {
        let term = slash_exact_term(fun, r, s)?;
        acc = acc.add(&term.scale(&BigRational::from_integer(k.clone())));
    }
    Ok(acc)
}

/// Checks `(φ|_s R1)|_s R2 = φ|_s (R1 R2)` at the given points to relative
/// accuracy `1e-12`.
pub fn compose_check(
    phi: &BranchedFunction,
    r1: &IntMat2,
    r2: &IntMat2,
    s: Weight,
    points: &[Complex64],
) -> Result<bool> {
    Ok(compose_error(phi, r1, r2, s, points)? <= 1e-12)
}

/// Largest relative deviation `|lhs - rhs| / max(1, |rhs|)` in the
/// composition identity.
pub fn compose_error(
    phi: &BranchedFunction,
    r1: &IntMat2,
    r2: &IntMat2,
    s: Weight,
    points: &[Complex64],
) -> Result<f64> {
    let inner = slash_fn(phi, r1, s)?;
    let r12 = r1 * r2;
    check_pair(&inner, r2)?;
    check_pair(phi, &r12)?;
    let mut worst: f64 = 0.0;
    for &z in points {
        let lhs = slash_num(&inner, r2, s, z)?;
        let rhs = slash_num(phi, &r12, s, z)?;
        worst = worst.max((lhs - rhs).norm() / rhs.norm().max(1.0));
    }
    Ok(worst)
}

/// `max |φ(z) - φ(z+1) - λ z^{-2s} φ(1 + 1/z)|` over the points.
pub fn lewis_residual(phi: &BranchedFunction, s: Weight, lambda: Complex64, points: &[Complex64]) -> Result<f64> {
    let one = Complex64::new(1.0, 0.0);
    let mut worst: f64 = 0.0;
    for &z in points {
        let r = phi.eval(z)? - phi.eval(z + one)? - lambda * cpow(z, -2.0 * s) * phi.eval(one + z.inv())?;
        worst = worst.max(r.norm());
    }
    Ok(worst)
}

/// `max |φ(z) - λ z^{-2s} φ(1/z)|` over the points.
pub fn two_term_residual(phi: &BranchedFunction, s: Weight, lambda: Complex64, points: &[Complex64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &z in points {
        let r = phi.eval(z)? - lambda * cpow(z, -2.0 * s) * phi.eval(z.inv())?;
        worst = worst.max(r.norm());
    }
    Ok(worst)
}

/// `f|_s (I - T - λ TM)` in exact arithmetic.
pub fn lewis_residual_exact(fun: &RationalFunction, s: i64, lambda: i64) -> Result<RationalFunction> {
    slash_exact(fun, &crate::chains::lewis_generator(lambda), Complex64::new(s as f64, 0.0))
}

/// 25 points on `(0.1, 5.1)` and 10 off the real axis with
/// `Im z ∈ {±0.5, ±1}`.
pub fn default_points() -> Vec<Complex64> {
    let mut pts: Vec<_> = (0..25)
        .map(|k| Complex64::new(0.1 + 5.0 * (k as f64 + 0.5) / 25.0, 0.0))
        .collect();
    let ims = [0.5, -0.5, 1.0, -1.0];
    for k in 0..10 {
        pts.push(Complex64::new(0.5 + 0.5 * k as f64, ims[k % 4]));
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::formal;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn slash_examples() {
        let phi = BranchedFunction::inverse();
        let t = IntMat2::shift();
        let m = IntMat2::flip();
        let tm = &t * &m;
        assert!((slash_num(&phi, &t, c(1.0), c(2.0)).unwrap() - 1.0 / 3.0).norm() < 1e-15);
        assert!((slash_num(&phi, &tm, c(1.0), c(2.0)).unwrap() - 1.0 / 6.0).norm() < 1e-15);
        // a - c r = 0 for M and r = 0
        assert!(matches!(
            slash_num(&phi, &m, c(1.0), c(2.0)),
            Err(Error::BranchingViolated(_))
        ));
        let z = c(2.0);
        assert!((cpow(z, c(-2.0)) * phi.eval(z.inv()).unwrap() - 0.5).norm() < 1e-15);
        assert!((two_term_residual(&phi, c(1.0), c(1.0), &default_points()).unwrap()) < 1e-14);
    }

    #[test]
    fn branch_tracking() {
        let phi = BranchedFunction::inverse();
        let r = IntMat2::new(1, 2, 1, 1);
        let cut = propagated_branch(&r, 0.0);
        assert_eq!(cut, -1.0);
        assert!(slash_num(&phi, &r, c(1.0), c(cut + 1e-9)).is_ok());
        assert!(matches!(
            slash_num(&phi, &r, c(1.0), c(cut - 1e-9)),
            Err(Error::OnBranchCut(_))
        ));
        assert!(matches!(
            slash_num(&phi, &IntMat2::new(0, 1, 1, 0), c(1.0), c(1.0)),
            Err(Error::BranchingViolated(_))
        ));
    }

    #[test]
    fn exact_examples() {
        let inv = RationalFunction::inverse_z();
        let t = IntMat2::shift();
        let tm = &t * &IntMat2::flip();
        let gen = formal(&[(1, IntMat2::identity()), (-1, t.clone()), (-1, tm)]);
        assert!(slash_exact(&inv, &gen, c(1.0)).unwrap().is_zero());
        let psi11 = formal(&[(1, IntMat2::new(1, 1, 0, 2)), (1, IntMat2::new(2, 0, 1, 1))]);
        assert_eq!(slash_exact(&inv, &psi11, c(1.0)).unwrap(), inv);
        let d3 = FormalSum::from_matrix(IntMat2::scalar(3));
        assert_eq!(slash_exact(&inv, &d3, c(1.0)).unwrap(), inv);
        assert!(matches!(
            slash_exact(&inv, &d3, Complex64::new(0.5, 0.0)),
            Err(Error::NonIntegerWeight(_))
        ));
        assert!(lewis_residual_exact(&inv, 1, 1).unwrap().is_zero());
    }

    #[test]
    fn compose_examples() {
        let phi = BranchedFunction::inverse();
        let t = IntMat2::shift();
        let tm = &t * &IntMat2::flip();
        let pts: Vec<_> = (0..20).map(|k| c(0.125 + 0.25 * k as f64)).collect();
        assert!(compose_check(&phi, &t, &tm, Complex64::new(0.5, 1.0), &pts).unwrap());
        let i = IntMat2::identity();
        assert!(compose_check(&phi, &i, &i, c(0.7), &default_points()).unwrap());
    }

    #[test]
    fn lewis_of_inverse() {
        let phi = BranchedFunction::inverse();
        assert!(lewis_residual(&phi, c(1.0), c(1.0), &default_points()).unwrap() < 1e-15);
        let k = BranchedFunction::constant(c(2.0));
        assert!(lewis_residual(&k, c(0.0), c(1.0), &default_points()).unwrap() > 1.0);
    }
}
