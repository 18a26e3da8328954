//! Modified continued fractions, admissible sequences and partitions of
//! rationals, Farey moves, the map `m(P)`, joins and the right action of
//! `GL(2,Z)` on partitions.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::algebra::{ExtRational, FormalSum, IntMat2};
use crate::error::{Error, Result};

/// A finite sequence `x_0 > x_1 > ... > x_k` of extended rationals with
/// `p_{j-1} q_j - p_j q_{j-1} = 1` for every consecutive pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AdmissibleSequence {
    points: Vec<ExtRational>,
}

/// A partition is an admissible sequence running from a finite rational down
/// to `-∞`. The same type carries both notions; see
/// [`AdmissibleSequence::is_partition`].
pub type Partition = AdmissibleSequence;

fn pair_det(x: &ExtRational, y: &ExtRational) -> BigInt {
    x.numer() * y.denom() - y.numer() * x.denom()
}

/// Checks the unimodular neighbour condition on every consecutive pair.
pub fn is_admissible(points: &[ExtRational]) -> bool {
    !points.is_empty() && points.windows(2).all(|w| pair_det(&w[0], &w[1]).is_one())
}

/// Admissible, ends `..., 0, -∞`, and denominators strictly decrease except
/// along the descending run of nonnegative integers.
pub fn is_minimal(points: &[ExtRational]) -> bool {
    if !is_admissible(points) || points.len() < 2 {
        return false;
    }
    let k = points.len() - 1;
    if !points[k].is_neg_infinity() || !points[k - 1].numer().is_zero() {
        return false;
    }
    points.windows(2).all(|w| {
        let (q0, q1) = (w[0].denom(), w[1].denom());
        q0 > q1 || (q0.is_one() && q1.is_one() && !w[1].numer().is_negative())
    })
}

impl AdmissibleSequence {
    pub fn new(points: Vec<ExtRational>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::NotAdmissible("empty sequence".into()));
        }
        if let Some(j) = points
            .windows(2)
            .position(|w| !pair_det(&w[0], &w[1]).is_one())
        {
            return Err(Error::NotAdmissible(format!(
                "pair ({}, {}) at position {}",
                points[j],
                points[j + 1],
                j + 1
            )));
        }
        Ok(AdmissibleSequence { points })
    }

    pub fn points(&self) -> &[ExtRational] {
        &self.points
    }

    /// Number of points, `k + 1`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the last point.
    pub fn k(&self) -> usize {
        self.points.len() - 1
    }

    pub fn first(&self) -> &ExtRational {
        &self.points[0]
    }

    pub fn last(&self) -> &ExtRational {
        &self.points[self.k()]
    }

    /// Starts at a finite nonnegative rational and ends at `-∞`.
    pub fn is_partition(&self) -> bool {
        self.first().is_finite()
            && !self.first().numer().is_negative()
            && self.last().is_neg_infinity()
            && self.len() >= 2
    }

    pub fn is_minimal(&self) -> bool {
        is_minimal(&self.points)
    }

    /// `[q_{j-1}, -p_{j-1}; q_j, -p_j]`, for `1 <= j <= k`.
    pub fn pair_matrix(&self, j: usize) -> IntMat2 {
        let (x, y) = (&self.points[j - 1], &self.points[j]);
        IntMat2::new(x.denom().clone(), -x.numer(), y.denom().clone(), -y.numer())
    }

    /// `m(P)`
    pub fn m(&self) -> FormalSum {
        (1..=self.k()).map(|j| self.pair_matrix(j)).collect()
    }
}

/// `m(P) = Σ_j [q_{j-1}, -p_{j-1}; q_j, -p_j]`.
pub fn m_of(p: &AdmissibleSequence) -> FormalSum {
    p.m()
}

fn check_positive(x: &ExtRational) -> Result<()> {
    if x.is_positive() {
        Ok(())
    } else {
        Err(Error::NotPositiveRational(x.to_string()))
    }
}

fn cf_expand(p: &BigInt, q: &BigInt) -> Vec<BigInt> {
    let (mut p, mut q) = (p.clone(), q.clone());
    let mut out = Vec::new();
    while !q.is_zero() {
        let (a, r) = p.div_mod_floor(&q);
        out.push(a);
        p = q;
        q = r;
    }
    normalize_cf(&mut out);
    out
}

// [.., a, 1] -> [.., a + 1]
fn normalize_cf(v: &mut Vec<BigInt>) {
    if v.len() > 1 && v[v.len() - 1].is_one() {
        v.pop();
        let last = v.len() - 1;
        v[last] += 1;
    }
}

fn cf_value(v: &[BigInt]) -> ExtRational {
    let (mut p, mut q) = (v[v.len() - 1].clone(), BigInt::one());
    for a in v[..v.len() - 1].iter().rev() {
        let np = a * &p + &q;
        q = p;
        p = np;
    }
    ExtRational::new(p, q).expect("continued fraction has a nonzero denominator")
}

/// Minimal partition of `x` via the modified continued fraction expansion.
pub fn mcfe(x: &ExtRational) -> Result<Partition> {
    check_positive(x)?;
    let mut cf = cf_expand(x.numer(), x.denom());
    let mut points = Vec::new();
    loop {
        let value = cf_value(&cf);
        let done = value.numer().is_zero();
        points.push(value);
        if done {
            break;
        }
        let m = cf.len() - 1;
        if m == 0 {
            cf[0] -= 1;
        } else if m % 2 == 1 {
            cf.pop();
            normalize_cf(&mut cf);
        } else {
            cf[m] -= 1;
            normalize_cf(&mut cf);
        }
    }
    points.push(ExtRational::neg_infinity());
    AdmissibleSequence::new(points)
}

/// Minimal partition of `x > 0` by the congruence descent on denominators.
pub fn minimal_partition(x: &ExtRational) -> Result<Partition> {
    check_positive(x)?;
    minimal_partition_nonneg(x)
}

/// As [`minimal_partition`], also accepting `x = 0`, whose partition is
/// `(0, -∞)`.
pub fn minimal_partition_nonneg(x: &ExtRational) -> Result<Partition> {
    if !x.is_finite() || x.numer().is_negative() {
        return Err(Error::NotPositiveRational(x.to_string()));
    }
    let mut points = vec![x.clone()];
    let (mut p, mut q) = (x.numer().clone(), x.denom().clone());
    while q > BigInt::one() {
        // p q' ≡ 1 (mod q) with 0 <= q' < q
        let e = p.extended_gcd(&q);
        let q1 = e.x.mod_floor(&q);
        let p1 = (&p * &q1 - 1) / &q;
        p = p1;
        q = q1;
        points.push(ExtRational::new(p.clone(), q.clone())?);
    }
    while p.is_positive() {
        p -= 1;
        points.push(ExtRational::integer(p.clone()));
    }
    points.push(ExtRational::neg_infinity());
    AdmissibleSequence::new(points)
}

/// Inserts the mediant of `x_{l-1}` and `x_l`, for `1 <= l <= k-1`.
pub fn farey_extend(p: &Partition, l: usize) -> Result<Partition> {
    let k = p.k();
    if l < 1 || l + 1 > k {
        return Err(Error::IndexOutOfRange {
            index: l,
            max: k.saturating_sub(1),
        });
    }
    let mediant = p.points[l - 1].mediant(&p.points[l])?;
    let mut points = p.points.clone();
    points.insert(l, mediant);
    AdmissibleSequence::new(points)
}

/// Removes `x_l` when it is the mediant of its neighbours.
pub fn farey_reduce(p: &Partition, l: usize) -> Result<Partition> {
    let k = p.k();
    if l < 1 || l + 1 > k {
        return Err(Error::IndexOutOfRange {
            index: l,
            max: k.saturating_sub(1),
        });
    }
    let (a, x, b) = (&p.points[l - 1], &p.points[l], &p.points[l + 1]);
    if x.numer() != &(a.numer() + b.numer()) || x.denom() != &(a.denom() + b.denom()) {
        return Err(Error::NotFareyTriple(l));
    }
    let mut points = p.points.clone();
    points.remove(l);
    AdmissibleSequence::new(points)
}

fn reduction_index(p: &Partition) -> Option<usize> {
    let pts = &p.points;
    (1..p.k()).find(|&l| {
        let (q0, q1, q2) = (pts[l - 1].denom(), pts[l].denom(), pts[l + 1].denom());
        let integer_run = q0.is_one() && q1.is_one() && !pts[l].numer().is_negative();
        q1 > q2 && q1 >= q0 && !integer_run
    })
}

/// Farey-reduces `p` down to the minimal partition of its first point.
///
/// Each step removes `x_l` and records `W = [q_{l-1}, -p_{l-1}; q_{l+1},
/// -p_{l+1}]`, which satisfies `m(before) - m(after) = (MTM + T - I) W`.
pub fn reduce_to_minimal(p: &Partition) -> Result<(Partition, Vec<IntMat2>)> {
    if !p.is_partition() {
        return Err(Error::NotPartition(format!(
            "sequence runs from {} to {}",
            p.first(),
            p.last()
        )));
    }
    let mut cur = p.clone();
    let mut witnesses = Vec::new();
    while !cur.is_minimal() {
        let l = reduction_index(&cur).ok_or_else(|| {
            Error::NotPartition(format!("no Farey reduction available at {:?}", cur.points))
        })?;
        let (a, b) = (&cur.points[l - 1], &cur.points[l + 1]);
        witnesses.push(IntMat2::new(
            a.denom().clone(),
            -a.numer(),
            b.denom().clone(),
            -b.numer(),
        ));
        cur = farey_reduce(&cur, l)?;
    }
    let target = minimal_partition_nonneg(p.first())?;
    if cur != target {
        return Err(Error::Integrity(format!(
            "reduction ended at {:?}, expected {:?}",
            cur.points, target.points
        )));
    }
    Ok((cur, witnesses))
}

/// Concatenates two sequences sharing an endpoint.
pub fn join(p1: &AdmissibleSequence, p2: &AdmissibleSequence) -> Result<AdmissibleSequence> {
    if p1.last() != p2.first() {
        return Err(Error::JoinMismatch {
            left: p1.last().to_string(),
            right: p2.first().to_string(),
        });
    }
    let mut points = p1.points.clone();
    points.extend_from_slice(&p2.points[1..]);
    AdmissibleSequence::new(points)
}

/// Right action `x ↦ (d x - b) / (-c x + a)`, reversing the order when
/// `det A = -1`.
///
/// Defined when `a q_j - c p_j >= 0` at every point, which is the condition
/// `a/c >= x_j` read on homogeneous coordinates (`a > 0` when `c = 0`).
pub fn act_right(p: &AdmissibleSequence, a: &IntMat2) -> Result<AdmissibleSequence> {
    let det = a.det();
    if !det.abs().is_one() {
        return Err(Error::NotUnimodular(det.to_string()));
    }
    let mut points = Vec::with_capacity(p.len());
    for x in &p.points {
        let num = &a.d * x.numer() - &a.b * x.denom();
        let den = &a.a * x.denom() - &a.c * x.numer();
        if den.is_negative() {
            return Err(Error::ActionUndefined(format!("{x} under {a}")));
        }
        points.push(ExtRational::new(num, den)?);
    }
    if det.is_negative() {
        points.reverse();
    }
    AdmissibleSequence::new(points)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Precondition(msg()))
    }
}

/// The objects attached to `(n, c, c', i)` in the `X T^s` identity.
#[derive(Clone, Debug)]
pub struct XtsData {
    pub i_hat: u64,
    pub x: ExtRational,
    pub y: ExtRational,
    pub z: ExtRational,
    pub s: BigInt,
    /// The matrix `X`, of determinant `-1`.
    pub x_mat: IntMat2,
    /// `[c, (ic'-c) mod n/c; 0, n/c]`
    pub a_x: IntMat2,
    /// `[c, (ic') mod n/c; 0, n/c]`
    pub a_y: IntMat2,
    /// `[c', (îc-c') mod n/c'; 0, n/c']`
    pub a_z: IntMat2,
    /// `(P_z · X) ∨ (P_x · T^s)`, a partition of `y`.
    pub joined: Partition,
}

fn rem(v: i128, m: u64) -> i128 {
    v.rem_euclid(m as i128)
}

/// Builds `x, y, z, s, X` and the joined partition for `(n, c, c', i)`.
pub fn xts_data(n: u64, c: u64, c2: u64, i: u64) -> Result<XtsData> {
    ensure(n >= 1 && c >= 1 && c2 >= 1, || "n, c, c' must be positive".into())?;
    ensure(n.is_multiple_of(c) && n.is_multiple_of(c2), || format!("c = {c} and c' = {c2} must divide n = {n}"))?;
    ensure(c.gcd(&c2) == 1, || format!("gcd(c, c') = gcd({c}, {c2}) != 1"))?;
    ensure(i.gcd(&n) == 1, || format!("gcd(i, n) = gcd({i}, {n}) != 1"))?;

    let i_hat = if n == 1 {
        0
    } else {
        let e = (i as i128).extended_gcd(&(n as i128));
        e.x.rem_euclid(n as i128) as u64
    };
    let (nc, nc2) = (n / c, n / c2);
    let (ci, ii, ih, cc) = (c2 as i128, i as i128, i_hat as i128, c as i128);
    let bx = rem(ci * ii - cc, nc);
    let by = rem(ci * ii, nc);
    let bz = rem(cc * ih - ci, nc2);
    let x = ExtRational::new(bx, nc)?;
    let y = ExtRational::new(by, nc)?;
    let z = ExtRational::new(bz, nc2)?;
    let s_num = bx + cc - by;
    debug_assert_eq!(s_num.rem_euclid(nc as i128), 0);
    let s = BigInt::from(s_num / nc as i128);

    let a_x = IntMat2::new(c, bx, 0, nc);
    let a_y = IntMat2::new(c, by, 0, nc);
    let a_z = IntMat2::new(c2, bz, 0, nc2);
    let f = IntMat2::new(bz + ci, c2, nc2, 0);
    let prod = &f * &a_y.adjugate();
    let nn = BigInt::from(n);
    let divisible = [&prod.a, &prod.b, &prod.c, &prod.d]
        .iter()
        .all(|e| e.is_multiple_of(&nn));
    if !divisible {
        return Err(Error::Integrity(format!("X is not integral for ({n}, {c}, {c2}, {i})")));
    }
    let x_mat = IntMat2::new(&prod.a / &nn, &prod.b / &nn, &prod.c / &nn, &prod.d / &nn);
    if x_mat.det() != -BigInt::one() {
        return Err(Error::Integrity(format!("det X = {} != -1", x_mat.det())));
    }

    let pz = act_right(&minimal_partition_nonneg(&z)?, &x_mat)?;
    let px = act_right(&minimal_partition_nonneg(&x)?, &IntMat2::shift_pow(s.clone()))?;
    let joined = join(&pz, &px)?;
    if joined.first() != &y {
        return Err(Error::Integrity(format!(
            "joined partition starts at {}, expected {y}",
            joined.first()
        )));
    }
    Ok(XtsData {
        i_hat,
        x,
        y,
        z,
        s,
        x_mat,
        a_x,
        a_y,
        a_z,
        joined,
    })
}

/// Checks
/// `m(P_x) A_x T + M m(P_z) A_z T M = m((P_z X) ∨ (P_x T^s)) A_y`
/// exactly in the group ring.
pub fn xts_identity_check(n: u64, c: u64, c2: u64, i: u64) -> Result<bool> {
    let data = xts_data(n, c, c2, i)?;
    let t = IntMat2::shift();
    let tm = &t * &IntMat2::flip();
    let px = minimal_partition_nonneg(&data.x)?;
    let pz = minimal_partition_nonneg(&data.z)?;
    let lhs = &px.m().mul_right(&(&data.a_x * &t))
        + &pz.m().mul_right(&(&data.a_z * &tm)).mul_left(&IntMat2::flip());
    let rhs = data.joined.m().mul_right(&data.a_y);
    Ok(lhs == rhs)
}

/// Number of points of the minimal partition of `x`, or `None` if `x` is
/// not a nonnegative rational small enough to index.
pub fn minimal_length(x: &ExtRational) -> Option<usize> {
    minimal_partition_nonneg(x).ok().map(|p| p.len())
}

/// Denominators `q_j` of a sequence as machine integers, for diagnostics.
pub fn denominators(p: &AdmissibleSequence) -> Vec<Option<u64>> {
    p.points.iter().map(|x| x.denom().to_u64()).collect()
}
