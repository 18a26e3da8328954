//! Univariate polynomials and rational functions over `Q`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Dense polynomial, coefficients from degree 0 upward, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<BigRational>,
}

fn q(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

impl Poly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        Poly::new(vec![c])
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    /// `z`
    pub fn z() -> Self {
        Poly::new(vec![q(0), q(1)])
    }

    /// `a z + b`
    pub fn linear(a: &BigInt, b: &BigInt) -> Self {
        Poly::new(vec![
            BigRational::from_integer(b.clone()),
            BigRational::from_integer(a.clone()),
        ])
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| q(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `deg 0 = 0`.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> BigRational {
        self.coeffs.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn scale(&self, k: &BigRational) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn pow(&self, e: usize) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        self.scale(&self.leading().recip())
    }

    /// Euclidean division.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let mut r = self.coeffs.clone();
        let dl = d.leading();
        let dd = d.degree();
        if self.is_zero() || self.degree() < dd {
            return (Poly::zero(), self.clone());
        }
        let mut quot = vec![BigRational::zero(); self.degree() - dd + 1];
        for k in (0..quot.len()).rev() {
            let c = &r[k + dd] / &dl;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    r[k + j] -= &c * dc;
                }
            }
            quot[k] = c;
        }
        (Poly::new(quot), Poly::new(r))
    }

    /// Monic gcd.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| {
            acc * z + c.to_f64().unwrap_or(f64::NAN)
        })
    }

    pub fn eval_rational(&self, z: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * z + c)
    }

    /// `Σ_i c_i u^i v^{deg - i}` for polynomials `u`, `v`.
    pub fn homogenize(&self, u: &Poly, v: &Poly, deg: usize) -> Poly {
        let mut acc = Poly::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            acc = &acc + &(&u.pow(i) * &v.pow(deg - i)).scale(c);
        }
        acc
    }
}

impl Add for &Poly {
    type Output = Poly;

    fn add(self, o: &Poly) -> Poly {
        let len = self.coeffs.len().max(o.coeffs.len());
        Poly::new(
            (0..len)
                .map(|k| {
                    let a = self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero);
                    let b = o.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero);
                    a + b
                })
                .collect(),
        )
    }
}

impl Neg for &Poly {
    type Output = Poly;

    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;

    fn sub(self, o: &Poly) -> Poly {
        self + &(-o)
    }
}

impl Mul for &Poly {
    type Output = Poly;

    fn mul(self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match (k, a.is_one()) {
                (0, _) => write!(f, "{a}")?,
                (1, true) => write!(f, "z")?,
                (1, false) => write!(f, "{a}*z")?,
                (_, true) => write!(f, "z^{k}")?,
                (_, false) => write!(f, "{a}*z^{k}")?,
            }
        }
        Ok(())
    }
}

/// `num / den` in lowest terms with monic denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    num: Poly,
    den: Poly,
}

impl RationalFunction {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Pole("zero denominator".into()));
        }
        if num.is_zero() {
            return Ok(RationalFunction::zero());
        }
        let g = num.gcd(&den);
        let (num, _) = num.div_rem(&g);
        let (den, _) = den.div_rem(&g);
        let lead = den.leading().recip();
        Ok(RationalFunction {
            num: num.scale(&lead),
            den: den.scale(&lead),
        })
    }

    pub fn zero() -> Self {
        RationalFunction {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn constant(c: BigRational) -> Self {
        RationalFunction::new(Poly::constant(c), Poly::one()).expect("nonzero denominator")
    }

    /// `1/z`
    pub fn inverse_z() -> Self {
        RationalFunction {
            num: Poly::one(),
            den: Poly::z(),
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, o: &RationalFunction) -> RationalFunction {
        let num = &(&self.num * &o.den) + &(&o.num * &self.den);
        RationalFunction::new(num, &self.den * &o.den).expect("product of nonzero denominators")
    }

    pub fn sub(&self, o: &RationalFunction) -> RationalFunction {
        self.add(&o.scale(&q(-1)))
    }

    pub fn mul(&self, o: &RationalFunction) -> RationalFunction {
        RationalFunction::new(&self.num * &o.num, &self.den * &o.den)
            .expect("product of nonzero denominators")
    }

    pub fn div(&self, o: &RationalFunction) -> Result<RationalFunction> {
        if o.is_zero() {
            return Err(Error::Pole("division by the zero function".into()));
        }
        RationalFunction::new(&self.num * &o.den, &self.den * &o.num)
    }

    pub fn scale(&self, k: &BigRational) -> RationalFunction {
        RationalFunction::new(self.num.scale(k), self.den.clone()).expect("same denominator")
    }

    /// `k` with `self = k · other`, if the quotient is constant.
    pub fn constant_multiple_of(&self, other: &RationalFunction) -> Option<BigRational> {
        let r = self.div(other).ok()?;
        if r.num.degree() == 0 && r.den.degree() == 0 {
            Some(r.num.leading() / r.den.leading())
        } else if r.is_zero() {
            Some(BigRational::zero())
        } else {
            None
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.num.eval(z) / self.den.eval(z)
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == Poly::one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}
