//! The coset space `I_n = Γ̄₀(n) \ GL(2,Z)`, realized as classes `[x:y]` of
//! pairs with `gcd(x, y, n) = 1`, and the right action of `GL(2,Z)` on it.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use crate::algebra::{ExtRational, IntMat2};
use crate::error::{Error, Result};

/// Canonical representative `(c, b)` of a class in `I_n`: `c | n`,
/// `0 <= b < n/c`, `gcd(c, b, n/c) = 1`. Ordered by `(c, b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CosetIndex {
    n: u64,
    c: u64,
    b: u64,
}

impl CosetIndex {
    pub fn new(n: u64, c: u64, b: u64) -> Result<Self> {
        if n == 0 || c == 0 || !n.is_multiple_of(c) || b >= n / c || c.gcd(&b).gcd(&(n / c)) != 1 {
            return Err(Error::NotAdmissiblePair { n, c, b });
        }
        Ok(CosetIndex { n, c, b })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn c(&self) -> u64 {
        self.c
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    /// `d(c, b)`
    pub fn d(&self) -> u64 {
        d_of(self.c, self.b, self.n).expect("valid index is admissible")
    }

    /// `A = [c, b; 0, n/c]`
    pub fn a_matrix(&self) -> IntMat2 {
        IntMat2::new(self.c, self.b, 0, self.n / self.c)
    }

    /// `B = [n/c, 0; b, c]`
    pub fn b_matrix(&self) -> IntMat2 {
        IntMat2::new(self.n / self.c, 0, self.b, self.c)
    }

    /// `x = b / (n/c)`
    pub fn x(&self) -> ExtRational {
        ExtRational::new(self.b, self.n / self.c).expect("n/c > 0")
    }
}

impl fmt::Display for CosetIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.c, self.b)
    }
}

pub fn a_of(i: &CosetIndex) -> IntMat2 {
    i.a_matrix()
}

pub fn b_of(i: &CosetIndex) -> IntMat2 {
    i.b_matrix()
}

pub fn x_of(i: &CosetIndex) -> ExtRational {
    i.x()
}

/// `d(c, b) = min { c + b + k n/c : 0 <= k < c, gcd(c, b + k n/c) = 1 }`.
pub fn d_of(c: u64, b: u64, n: u64) -> Result<u64> {
    if n == 0 || c == 0 || !n.is_multiple_of(c) {
        return Err(Error::NotAdmissiblePair { n, c, b });
    }
    let step = n / c;
    (0..c)
        .map(|k| b + k * step)
        .find(|v| c.gcd(v) == 1)
        .map(|v| c + v)
        .ok_or(Error::NotAdmissiblePair { n, c, b })
}

/// Canonical index of the class `[x:y]` in `I_n`.
pub fn canonicalize(n: u64, x: i64, y: i64) -> Result<CosetIndex> {
    if n == 0 {
        return Err(Error::Precondition("level must be positive".into()));
    }
    let nn = n as i64;
    let (x0, y0) = (x.rem_euclid(nn), y.rem_euclid(nn));
    if x0.gcd(&y0).gcd(&nn) != 1 {
        return Err(Error::NotInCosetSpace {
            n,
            x: x.to_string(),
            y: y.to_string(),
        });
    }
    let c = x0.gcd(&nn);
    let step = nn / c;
    // u x + v n = c; shift u by multiples of n/c to a unit mod n
    let u = x0.extended_gcd(&nn).x;
    let nu = (0..=nn)
        .map(|t| u + step * t)
        .find(|v| v.gcd(&nn) == 1)
        .ok_or_else(|| Error::Integrity(format!("no unit for [{x}:{y}] at level {n}")))?;
    let d = ((nu as i128 * y0 as i128).rem_euclid(nn as i128)) as i64;
    let b = (d - c).rem_euclid(step);
    CosetIndex::new(n, c as u64, b as u64)
}

/// `n ∏_{p | n} (1 + 1/p)`, the number of elements of `I_n`.
pub fn index_count(n: u64) -> u64 {
    let (mut m, mut acc, mut p) = (n, n, 2u64);
    while p * p <= m {
        if m % p == 0 {
            acc = acc / p * (p + 1);
            while m % p == 0 {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        acc = acc / m * (m + 1);
    }
    acc
}

/// All `n`-admissible pairs in lexicographic order.
pub fn enumerate(n: u64) -> Vec<CosetIndex> {
    let mut out = Vec::new();
    for c in (1..=n).filter(|c| n.is_multiple_of(*c)) {
        for b in 0..n / c {
            if c.gcd(&b).gcd(&(n / c)) == 1 {
                out.push(CosetIndex { n, c, b });
            }
        }
    }
    out
}

fn small(m: &BigInt, nn: i64) -> i64 {
    m.mod_floor(&BigInt::from(nn))
        .to_i64()
        .expect("residue fits in i64")
}

/// `[c : d] · g = [a c + c_g d : b_g c + d_g d]`, canonicalized.
pub fn act(i: &CosetIndex, g: &IntMat2) -> Result<CosetIndex> {
    if !g.det().abs().is_one() {
        return Err(Error::NotUnimodular(g.det().to_string()));
    }
    let nn = i.n as i64;
    let (c, d) = (i.c as i64, i.d() as i64);
    let (ga, gb, gc, gd) = (small(&g.a, nn), small(&g.b, nn), small(&g.c, nn), small(&g.d, nn));
    let x = (ga as i128 * c as i128 + gc as i128 * d as i128).rem_euclid(nn as i128) as i64;
    let y = (gb as i128 * c as i128 + gd as i128 * d as i128).rem_euclid(nn as i128) as i64;
    canonicalize(i.n, x, y)
}

/// Projection `I_{n1} -> I_{n2}` for `n2 | n1`.
pub fn sigma(n1: u64, n2: u64, i: &CosetIndex) -> Result<CosetIndex> {
    if i.n != n1 {
        return Err(Error::LevelMismatch(format!("index {i} has level {}, expected {n1}", i.n)));
    }
    if n2 == 0 || !n1.is_multiple_of(n2) {
        return Err(Error::LevelMismatch(format!("{n2} does not divide {n1}")));
    }
    canonicalize(n2, i.c as i64, i.d() as i64)
}

/// `[d - c : d]`
pub fn symmetric_partner(i: &CosetIndex) -> CosetIndex {
    let (c, d) = (i.c as i64, i.d() as i64);
    canonicalize(i.n, d - c, d).expect("partner of a valid index is valid")
}

pub fn is_self_symmetric(i: &CosetIndex) -> bool {
    symmetric_partner(i) == *i
}

/// The arithmetic form of self-symmetry: `c = 1` and `n | d (d - 2)`.
pub fn self_symmetric_criterion(i: &CosetIndex) -> bool {
    let d = i.d() as i128;
    i.c == 1 && (d * (d - 2)).rem_euclid(i.n as i128) == 0
}

/// The ordered coset list of one level with index lookup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetSpace {
    n: u64,
    indices: Vec<CosetIndex>,
}

impl CosetSpace {
    pub fn new(n: u64) -> Self {
        CosetSpace {
            n,
            indices: enumerate(n),
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn indices(&self) -> &[CosetIndex] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn position(&self, i: &CosetIndex) -> Option<usize> {
        self.indices.binary_search(i).ok()
    }

    /// `ρ(g)`: row `i` has its one in column `i · g`.
    pub fn rho(&self, g: &IntMat2) -> Result<Permutation> {
        let images = self
            .indices
            .iter()
            .map(|i| {
                let j = act(i, g)?;
                Ok(self.position(&j).expect("action stays in I_n"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Permutation { images })
    }
}

/// A permutation matrix stored by the column of the one in each row.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(size: usize) -> Self {
        Permutation {
            images: (0..size).collect(),
        }
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &j in &images {
            if j >= images.len() || seen[j] {
                return Err(Error::Precondition(format!("{images:?} is not a permutation")));
            }
            seen[j] = true;
        }
        Ok(Permutation { images })
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn size(&self) -> usize {
        self.images.len()
    }

    /// Matrix product `self · other`.
    pub fn then(&self, other: &Permutation) -> Permutation {
        Permutation {
            images: self.images.iter().map(|&j| other.images[j]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { images: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Least `m >= 1` with `self^m = 1`.
    pub fn order(&self) -> usize {
        let mut seen = vec![false; self.images.len()];
        let mut order = 1usize;
        for start in 0..self.images.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                j = self.images[j];
                len += 1;
            }
            order = order.lcm(&len);
        }
        order
    }

    pub fn pow(&self, e: usize) -> Permutation {
        let mut acc = Permutation::identity(self.size());
        for _ in 0..e {
            acc = acc.then(self);
        }
        acc
    }

    /// Dense 0/1 matrix, row-major.
    pub fn to_matrix(&self) -> Vec<Vec<u8>> {
        self.images
            .iter()
            .map(|&j| {
                let mut row = vec![0u8; self.images.len()];
                row[j] = 1;
                row
            })
            .collect()
    }
}

/// `ρ(g)` at level `n`.
pub fn rho(n: u64, g: &IntMat2) -> Result<Permutation> {
    CosetSpace::new(n).rho(g)
}

/// Parses a word in `T, t = T^-1, M, Q, q = Q^-1, I` into its product.
pub fn parse_word(word: &str) -> Result<IntMat2> {
    let mut acc = IntMat2::identity();
    for ch in word.chars() {
        let g = match ch {
            'T' => IntMat2::shift(),
            't' => IntMat2::shift_pow(-1),
            'M' => IntMat2::flip(),
            'Q' => IntMat2::rotation(),
            'q' => IntMat2::new(0, 1, -1, 0),
            'I' => IntMat2::identity(),
            _ => return Err(Error::Precondition(format!("unknown letter {ch:?} in word {word:?}"))),
        };
        acc = &acc * &g;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(n: u64, c: u64, b: u64) -> CosetIndex {
        CosetIndex::new(n, c, b).unwrap()
    }

    #[test]
    fn enumeration_examples() {
        let pairs = |n| enumerate(n).iter().map(|i| (i.c(), i.b())).collect::<Vec<_>>();
        assert_eq!(pairs(2), vec![(1, 0), (1, 1), (2, 0)]);
        assert_eq!(pairs(4), vec![(1, 0), (1, 1), (1, 2), (1, 3), (2, 1), (4, 0)]);
        assert_eq!(enumerate(6).len(), 12);
        assert_eq!(enumerate(1), vec![idx(1, 1, 0)]);
        assert_eq!(index_count(6), 12);
        assert_eq!(index_count(12), 24);
    }

    #[test]
    fn d_examples() {
        assert_eq!(d_of(2, 1, 4).unwrap(), 3);
        assert_eq!(d_of(1, 3, 7).unwrap(), 4);
        assert_eq!(d_of(4, 0, 4).unwrap(), 5);
        assert!(d_of(2, 0, 4).is_err());
    }

    #[test]
    fn canonicalize_examples() {
        assert_eq!(canonicalize(4, 2, 1).unwrap(), idx(4, 2, 1));
        assert_eq!(canonicalize(2, 0, 1).unwrap(), idx(2, 2, 0));
        assert!(matches!(canonicalize(4, 2, 6), Err(Error::NotInCosetSpace { .. })));
        for i in enumerate(12) {
            assert_eq!(canonicalize(12, i.c() as i64, i.d() as i64).unwrap(), i);
        }
    }

    #[test]
    fn matrices() {
        let i = idx(2, 1, 1);
        assert_eq!(i.a_matrix(), IntMat2::new(1, 1, 0, 2));
        assert_eq!(i.x(), ExtRational::new(1, 2).unwrap());
        let j = idx(3, 1, 2);
        assert_eq!(j.a_matrix(), IntMat2::new(1, 2, 0, 3));
        assert_eq!(j.x(), ExtRational::new(2, 3).unwrap());
        let k = idx(4, 4, 0);
        assert_eq!(k.a_matrix(), IntMat2::new(4, 0, 0, 1));
        assert_eq!(k.b_matrix(), IntMat2::new(1, 0, 0, 4));
        assert_eq!(k.x(), ExtRational::zero());
    }

    #[test]
    fn actions() {
        let t_inv = IntMat2::shift_pow(-1);
        assert_eq!(act(&idx(2, 1, 1), &t_inv).unwrap(), idx(2, 1, 0));
        let tm = &t_inv * &IntMat2::flip();
        for i in enumerate(12) {
            let (c, d) = (i.c() as i64, i.d() as i64);
            assert_eq!(act(&i, &t_inv).unwrap(), canonicalize(12, c, d - c).unwrap());
            assert_eq!(act(&i, &tm).unwrap(), canonicalize(12, d - c, c).unwrap());
        }
        assert!(matches!(
            act(&idx(2, 1, 1), &IntMat2::new(2, 0, 0, 1)),
            Err(Error::NotUnimodular(_))
        ));
    }

    #[test]
    fn rho_examples() {
        let sp = CosetSpace::new(2);
        assert!(sp.rho(&IntMat2::identity()).unwrap().is_identity());
        assert_eq!(sp.rho(&IntMat2::shift_pow(-1)).unwrap().images(), &[1, 0, 2]);
        for g in [IntMat2::shift(), IntMat2::flip(), IntMat2::rotation()] {
            let p = sp.rho(&g).unwrap();
            let q = sp.rho(&g.inverse_unimodular().unwrap()).unwrap();
            assert!(p.then(&q).is_identity());
        }
    }

    #[test]
    fn symmetry() {
        for n in [2u64, 5, 12] {
            let one_zero = canonicalize(n, 1, 0).unwrap();
            let one_two = canonicalize(n, 1, 2).unwrap();
            assert!(is_self_symmetric(&one_zero));
            assert!(is_self_symmetric(&one_two));
        }
        assert_eq!(symmetric_partner(&idx(2, 2, 0)), idx(2, 1, 0));
        for n in 1..=40 {
            for i in enumerate(n) {
                assert_eq!(is_self_symmetric(&i), self_symmetric_criterion(&i), "{n} {i}");
            }
        }
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma(4, 2, &idx(4, 2, 1)).unwrap(), idx(2, 2, 0));
        for i in enumerate(12) {
            assert_eq!(sigma(12, 12, &i).unwrap(), i);
        }
        assert!(sigma(4, 3, &idx(4, 2, 1)).is_err());
    }

    #[test]
    fn words() {
        assert_eq!(parse_word("TM").unwrap(), IntMat2::new(1, 1, 1, 0));
        assert_eq!(parse_word("Tt").unwrap(), IntMat2::identity());
        assert_eq!(parse_word("Qq").unwrap(), IntMat2::identity());
        assert!(parse_word("X").is_err());
    }
}
