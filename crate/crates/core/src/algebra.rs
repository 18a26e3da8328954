//! Exact arithmetic substrate: integer 2x2 matrices, extended rationals and
//! formal integer combinations of matrices (the group ring over `Mat_*(2,Z)`).

use std::cmp::Ordering;
use std::collections::btree_map::{self, BTreeMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact integer 2x2 matrix `[a, b; c, d]`.
///
/// The derived ordering is lexicographic on `(a, b, c, d)`; it only exists so
/// that matrices can key ordered maps with a reproducible iteration order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntMat2 {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl IntMat2 {
    pub fn new(
        a: impl Into<BigInt>,
        b: impl Into<BigInt>,
        c: impl Into<BigInt>,
        d: impl Into<BigInt>,
    ) -> Self {
        IntMat2 {
            a: a.into(),
            b: b.into(),
            c: c.into(),
            d: d.into(),
        }
    }

    /// `I`
    pub fn identity() -> Self {
        IntMat2::new(1, 0, 0, 1)
    }

    /// `M = [0,1;1,0]`, the flip.
    pub fn flip() -> Self {
        IntMat2::new(0, 1, 1, 0)
    }

    /// `T = [1,1;0,1]`, the translation `z -> z + 1`.
    pub fn shift() -> Self {
        IntMat2::new(1, 1, 0, 1)
    }

    /// `Q = [0,-1;1,0]`.
    pub fn rotation() -> Self {
        IntMat2::new(0, -1, 1, 0)
    }

    /// `T^k` for any integer `k`.
    pub fn shift_pow(k: impl Into<BigInt>) -> Self {
        IntMat2::new(1, k.into(), 0, 1)
    }

    /// The scalar matrix `[k,0;0,k]`.
    pub fn scalar(k: impl Into<BigInt>) -> Self {
        let k = k.into();
        IntMat2::new(k.clone(), 0, 0, k)
    }

    pub fn zero() -> Self {
        IntMat2::new(0, 0, 0, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }

    pub fn det(&self) -> BigInt {
        &self.a * &self.d - &self.b * &self.c
    }

    /// gcd of the four entries. Errors on the zero matrix.
    pub fn content(&self) -> Result<BigInt> {
        if self.is_zero() {
            return Err(Error::UndefinedContent);
        }
        Ok(self.a.gcd(&self.b).gcd(&self.c).gcd(&self.d))
    }

    pub fn is_primitive(&self) -> bool {
        self.content().map(|g| g.is_one()).unwrap_or(false)
    }

    pub fn scale(&self, k: &BigInt) -> IntMat2 {
        IntMat2 {
            a: &self.a * k,
            b: &self.b * k,
            c: &self.c * k,
            d: &self.d * k,
        }
    }

    /// `[d,-b;-c,a]`
    pub fn adjugate(&self) -> IntMat2 {
        IntMat2 {
            a: self.d.clone(),
            b: -&self.b,
            c: -&self.c,
            d: self.a.clone(),
        }
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().abs().is_one()
    }

    /// Inverse of an element of GL(2,Z).
    pub fn inverse_unimodular(&self) -> Result<IntMat2> {
        let det = self.det();
        if !det.abs().is_one() {
            return Err(Error::NotUnimodular(det.to_string()));
        }
        // det = +-1, so det^{-1} = det
        Ok(self.adjugate().scale(&det))
    }

    pub fn pow(&self, mut e: u32) -> IntMat2 {
        let mut base = self.clone();
        let mut acc = IntMat2::identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Left action by linear fractional transformation,
    /// `x -> (a x + b) / (c x + d)` on homogeneous coordinates.
    pub fn moebius(&self, x: &ExtRational) -> Result<ExtRational> {
        let num = &self.a * &x.p + &self.b * &x.q;
        let den = &self.c * &x.p + &self.d * &x.q;
        ExtRational::new(num, den)
    }

    pub fn to_i64_array(&self) -> Option<[i64; 4]> {
        Some([
            self.a.to_i64()?,
            self.b.to_i64()?,
            self.c.to_i64()?,
            self.d.to_i64()?,
        ])
    }
}

impl fmt::Display for IntMat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{};{},{}]", self.a, self.b, self.c, self.d)
    }
}

impl Mul<&IntMat2> for &IntMat2 {
    type Output = IntMat2;

    fn mul(self, o: &IntMat2) -> IntMat2 {
        IntMat2 {
            a: &self.a * &o.a + &self.b * &o.c,
            b: &self.a * &o.b + &self.b * &o.d,
            c: &self.c * &o.a + &self.d * &o.c,
            d: &self.c * &o.b + &self.d * &o.d,
        }
    }
}

impl Mul for IntMat2 {
    type Output = IntMat2;

    fn mul(self, o: IntMat2) -> IntMat2 {
        &self * &o
    }
}

/// Matrix product; free-function spelling of `&a * &b`.
pub fn mat_mul(a: &IntMat2, b: &IntMat2) -> IntMat2 {
    a * b
}

/// Smallest integer `>= num / den`. The denominator must be positive.
pub fn ceil_ratio(num: &BigInt, den: &BigInt) -> Result<BigInt> {
    if !den.is_positive() {
        return Err(Error::NonPositiveDenominator(den.to_string()));
    }
    Ok(Integer::div_ceil(num, den))
}

/// A point of `Q ∪ {±∞}` in lowest terms with nonnegative denominator.
///
/// `-∞` is `-1/0` and `+∞` is `1/0`; zero is `0/1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExtRational {
    p: BigInt,
    q: BigInt,
}

impl ExtRational {
    pub fn new(p: impl Into<BigInt>, q: impl Into<BigInt>) -> Result<Self> {
        let (mut p, mut q) = (p.into(), q.into());
        if p.is_zero() && q.is_zero() {
            return Err(Error::UndefinedPoint);
        }
        if q.is_negative() {
            p = -p;
            q = -q;
        }
        if q.is_zero() {
            return Ok(ExtRational {
                p: p.signum(),
                q,
            });
        }
        let g = p.gcd(&q);
        Ok(ExtRational { p: p / &g, q: q / g })
    }

    pub fn integer(k: impl Into<BigInt>) -> Self {
        ExtRational {
            p: k.into(),
            q: BigInt::one(),
        }
    }

    pub fn zero() -> Self {
        ExtRational::integer(0)
    }

    pub fn neg_infinity() -> Self {
        ExtRational {
            p: -BigInt::one(),
            q: BigInt::zero(),
        }
    }

    pub fn infinity() -> Self {
        ExtRational {
            p: BigInt::one(),
            q: BigInt::zero(),
        }
    }

    pub fn numer(&self) -> &BigInt {
        &self.p
    }

    pub fn denom(&self) -> &BigInt {
        &self.q
    }

    pub fn is_finite(&self) -> bool {
        !self.q.is_zero()
    }

    pub fn is_neg_infinity(&self) -> bool {
        self.q.is_zero() && self.p.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.is_finite() && self.p.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.q.is_one()
    }

    /// `(p1 + p2) / (q1 + q2)` on the stored coordinates.
    pub fn mediant(&self, other: &ExtRational) -> Result<ExtRational> {
        ExtRational::new(&self.p + &other.p, &self.q + &other.q)
    }

    /// Fractional part `{x}` of a finite point.
    pub fn fract(&self) -> Result<ExtRational> {
        if !self.is_finite() {
            return Err(Error::Precondition(format!("fractional part of {self}")));
        }
        ExtRational::new(self.p.mod_floor(&self.q), self.q.clone())
    }

    pub fn to_f64(&self) -> f64 {
        if self.q.is_zero() {
            if self.p.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        } else {
            // exact enough at desk scale
            let r = num_rational::BigRational::new(self.p.clone(), self.q.clone());
            r.to_f64().unwrap_or(f64::NAN)
        }
    }
}

impl Ord for ExtRational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.is_finite(), other.is_finite()) {
            (true, true) => (&self.p * &other.q).cmp(&(&other.p * &self.q)),
            (false, false) => self.p.cmp(&other.p),
            (false, true) => {
                if self.p.is_negative() {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
            (true, false) => other.cmp(self).reverse(),
        }
    }
}

impl PartialOrd for ExtRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for ExtRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Precondition(format!("cannot parse rational {s:?}"));
        match s {
            "-inf" | "-∞" => return Ok(ExtRational::neg_infinity()),
            "inf" | "∞" => return Ok(ExtRational::infinity()),
            _ => {}
        }
        match s.split_once('/') {
            Some((p, q)) => {
                let p: BigInt = p.trim().parse().map_err(|_| bad())?;
                let q: BigInt = q.trim().parse().map_err(|_| bad())?;
                ExtRational::new(p, q)
            }
            None => Ok(ExtRational::integer(s.parse::<BigInt>().map_err(|_| bad())?)),
        }
    }
}

/// Finite Z-linear combination of integer matrices. Zero coefficients are
/// never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FormalSum {
    terms: BTreeMap<IntMat2, BigInt>,
}

impl FormalSum {
    pub fn new() -> Self {
        FormalSum::default()
    }

    pub fn from_matrix(m: IntMat2) -> Self {
        let mut s = FormalSum::new();
        s.add_term(m, BigInt::one());
        s
    }

    pub fn add_term(&mut self, m: IntMat2, coeff: impl Into<BigInt>) {
        let coeff = coeff.into();
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn coeff(&self, m: &IntMat2) -> BigInt {
        self.terms.get(m).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&IntMat2, &BigInt)> {
        self.terms.iter()
    }

    pub fn matrices(&self) -> impl Iterator<Item = &IntMat2> {
        self.terms.keys()
    }

    pub fn scale(&self, k: &BigInt) -> FormalSum {
        if k.is_zero() {
            return FormalSum::new();
        }
        FormalSum {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    /// `self · m`
    pub fn mul_right(&self, m: &IntMat2) -> FormalSum {
        let mut out = FormalSum::new();
        for (a, c) in &self.terms {
            out.add_term(a * m, c.clone());
        }
        out
    }

    /// `m · self`
    pub fn mul_left(&self, m: &IntMat2) -> FormalSum {
        let mut out = FormalSum::new();
        for (a, c) in &self.terms {
            out.add_term(m * a, c.clone());
        }
        out
    }

    /// True if every coefficient is one (the sum is a set of matrices).
    pub fn is_multiplicity_free(&self) -> bool {
        self.terms.values().all(|c| c.is_one())
    }
}

impl FromIterator<IntMat2> for FormalSum {
    fn from_iter<I: IntoIterator<Item = IntMat2>>(iter: I) -> Self {
        let mut s = FormalSum::new();
        for m in iter {
            s.add_term(m, 1);
        }
        s
    }
}

impl FromIterator<(IntMat2, BigInt)> for FormalSum {
    fn from_iter<I: IntoIterator<Item = (IntMat2, BigInt)>>(iter: I) -> Self {
        let mut s = FormalSum::new();
        for (m, c) in iter {
            s.add_term(m, c);
        }
        s
    }
}

impl fmt::Display for FormalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let sep = if k == 0 { "" } else { " " };
            if c.is_one() {
                write!(f, "{sep}{}{m}", if k == 0 { "" } else { "+ " })?;
            } else if *c == -BigInt::one() {
                write!(f, "{sep}- {m}")?;
            } else if c.is_negative() {
                write!(f, "{sep}- {}{m}", -c)?;
            } else {
                write!(f, "{sep}{}{c}{m}", if k == 0 { "" } else { "+ " })?;
            }
        }
        Ok(())
    }
}

impl AddAssign<&FormalSum> for FormalSum {
    fn add_assign(&mut self, rhs: &FormalSum) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&FormalSum> for FormalSum {
    fn sub_assign(&mut self, rhs: &FormalSum) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c);
        }
    }
}

impl Add<&FormalSum> for &FormalSum {
    type Output = FormalSum;

    fn add(self, rhs: &FormalSum) -> FormalSum {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for FormalSum {
    type Output = FormalSum;

    fn add(mut self, rhs: FormalSum) -> FormalSum {
        self += &rhs;
        self
    }
}

impl Sub<&FormalSum> for &FormalSum {
    type Output = FormalSum;

    fn sub(self, rhs: &FormalSum) -> FormalSum {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for FormalSum {
    type Output = FormalSum;

    fn sub(mut self, rhs: FormalSum) -> FormalSum {
        self -= &rhs;
        self
    }
}

impl Neg for &FormalSum {
    type Output = FormalSum;

    fn neg(self) -> FormalSum {
        self.scale(&-BigInt::one())
    }
}

impl Neg for FormalSum {
    type Output = FormalSum;

    fn neg(self) -> FormalSum {
        -&self
    }
}

impl Mul<&IntMat2> for &FormalSum {
    type Output = FormalSum;

    fn mul(self, m: &IntMat2) -> FormalSum {
        self.mul_right(m)
    }
}

impl Mul<&FormalSum> for &IntMat2 {
    type Output = FormalSum;

    fn mul(self, s: &FormalSum) -> FormalSum {
        s.mul_left(self)
    }
}

/// Ring product in `Z[Mat_*(2,Z)]`.
impl Mul<&FormalSum> for &FormalSum {
    type Output = FormalSum;

    fn mul(self, rhs: &FormalSum) -> FormalSum {
        let mut out = FormalSum::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                out.add_term(a * b, ca * cb);
            }
        }
        out
    }
}

/// Builds a formal sum from `(coefficient, matrix)` pairs.
pub fn formal(terms: &[(i64, IntMat2)]) -> FormalSum {
    terms
        .iter()
        .map(|(c, m)| (m.clone(), BigInt::from(*c)))
        .collect()
}
