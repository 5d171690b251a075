//! Short Weierstrass curves `y^2 = x^3 + Ax + B`: the group law over prime
//! fields, group orders, and the invariants `(d, e)` of the reduced point
//! group `Z/d x Z/e` with `d | e`.
//!
//! A prime `p` of good reduction is a prime of cyclic reduction iff `d = 1`,
//! iff the reduced group contains no copy of `(Z/l)^2` for any prime `l`.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::modmath::{
    self, add_mod, factorize, gcd, inv_mod, isqrt, lcm, legendre, mul_mod, pow_mod, sqrt_mod,
    sub_mod, valuation, PrimeModulus,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CurveError {
    #[error("singular model: 4A^3 + 27B^2 = 0")]
    Singular,
    #[error("coefficients too large for a 128-bit discriminant")]
    Overflow,
    #[error("bad reduction at p = {0}")]
    BadReduction(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("point order witness failed: N * P != O for N = {0}")]
    BadWitness(u64),
    #[error("no structure certificate after {0} sampled points at p = {1}")]
    IterationCap(usize, u64),
}

/// An integral short Weierstrass model over the rationals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawCurve", into = "RawCurve")]
pub struct CurveOverQ {
    a: i64,
    b: i64,
    discriminant: i128,
}

#[derive(Serialize, Deserialize)]
struct RawCurve {
    a: i64,
    b: i64,
}

impl TryFrom<RawCurve> for CurveOverQ {
    type Error = CurveError;
    fn try_from(raw: RawCurve) -> Result<Self, Self::Error> {
        CurveOverQ::new(raw.a, raw.b)
    }
}

impl From<CurveOverQ> for RawCurve {
    fn from(c: CurveOverQ) -> Self {
        RawCurve { a: c.a, b: c.b }
    }
}

impl CurveOverQ {
    pub fn new(a: i64, b: i64) -> Result<Self, CurveError> {
        let a3 = (a as i128)
            .checked_pow(3)
            .and_then(|v| v.checked_mul(4))
            .ok_or(CurveError::Overflow)?;
        let b2 = (b as i128)
            .checked_pow(2)
            .and_then(|v| v.checked_mul(27))
            .ok_or(CurveError::Overflow)?;
        let disc = a3
            .checked_add(b2)
            .and_then(|v| v.checked_mul(-16))
            .ok_or(CurveError::Overflow)?;
        if disc == 0 {
            return Err(CurveError::Singular);
        }
        Ok(CurveOverQ { a, b, discriminant: disc })
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    /// `-16(4A^3 + 27B^2)`.
    pub fn discriminant(&self) -> i128 {
        self.discriminant
    }

    /// True iff `p` divides the discriminant; always true for `p = 2`.
    pub fn has_bad_reduction(&self, p: u64) -> bool {
        p == 2 || self.discriminant.rem_euclid(p as i128) == 0
    }

    /// Reduction modulo the prime `p`.
    pub fn reduce(&self, p: u64) -> Result<ReducedCurve, CurveError> {
        if !modmath::is_prime(p) {
            return Err(CurveError::NotPrime(p));
        }
        if self.has_bad_reduction(p) {
            return Err(CurveError::BadReduction(p));
        }
        let modulus = PrimeModulus::new(p).map_err(|_| CurveError::NotPrime(p))?;
        Ok(ReducedCurve {
            p: modulus,
            a: modmath::reduce_signed(self.a as i128, p),
            b: modmath::reduce_signed(self.b as i128, p),
        })
    }
}

fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Point {
    Infinity,
    Affine { x: u64, y: u64 },
}

impl Point {
    pub fn is_infinity(&self) -> bool {
        matches!(self, Point::Infinity)
    }
}

/// The invariants of `E(F_p) = Z/d x Z/e` with `d | e` and `d * e = order`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupStructure {
    pub order: u64,
    pub d: u64,
    pub e: u64,
}

impl GroupStructure {
    pub fn is_cyclic(&self) -> bool {
        self.d == 1
    }
}

/// Maximum number of sampled points (or point pairs) spent on one order
/// or one Sylow subgroup before giving up.
pub const SAMPLE_BUDGET: usize = 64;

/// Below this characteristic the group order is counted point by point.
pub const EXHAUSTIVE_BELOW: u64 = 1 << 10;

/// A curve with good reduction over `F_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReducedCurve {
    p: PrimeModulus,
    a: u64,
    b: u64,
}

impl ReducedCurve {
    pub fn new(p: PrimeModulus, a: u64, b: u64) -> Result<Self, CurveError> {
        let pv = p.get();
        let (a, b) = (a % pv, b % pv);
        let disc = add_mod(
            mul_mod(4, pow_mod(a, 3, pv), pv),
            mul_mod(27, mul_mod(b, b, pv), pv),
            pv,
        );
        if disc == 0 {
            return Err(CurveError::BadReduction(pv));
        }
        Ok(ReducedCurve { p, a, b })
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.p
    }

    pub fn p(&self) -> u64 {
        self.p.get()
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    /// `x^3 + ax + b`.
    pub fn rhs(&self, x: u64) -> u64 {
        let p = self.p();
        let x2 = mul_mod(x, x, p);
        add_mod(mul_mod(add_mod(x2, self.a, p), x, p), self.b, p)
    }

    pub fn contains(&self, pt: &Point) -> bool {
        match *pt {
            Point::Infinity => true,
            Point::Affine { x, y } => {
                x < self.p() && y < self.p() && mul_mod(y, y, self.p()) == self.rhs(x)
            }
        }
    }

    pub fn negate(&self, pt: &Point) -> Point {
        match *pt {
            Point::Infinity => Point::Infinity,
            Point::Affine { x, y } => Point::Affine {
                x,
                y: if y == 0 { 0 } else { self.p() - y },
            },
        }
    }

    pub fn add(&self, lhs: &Point, rhs: &Point) -> Point {
        let p = self.p();
        match (*lhs, *rhs) {
            (Point::Infinity, q) => q,
            (q, Point::Infinity) => q,
            (Point::Affine { x: x1, y: y1 }, Point::Affine { x: x2, y: y2 }) => {
                let slope = if x1 == x2 {
                    if add_mod(y1, y2, p) == 0 {
                        return Point::Infinity;
                    }
                    // tangent: (3x^2 + a) / 2y
                    let num = add_mod(mul_mod(3, mul_mod(x1, x1, p), p), self.a, p);
                    let den = add_mod(y1, y1, p);
                    mul_mod(num, inv_mod(den, p).expect("2y invertible"), p)
                } else {
                    let num = sub_mod(y2, y1, p);
                    let den = sub_mod(x2, x1, p);
                    mul_mod(num, inv_mod(den, p).expect("x2 - x1 invertible"), p)
                };
                let x3 = sub_mod(sub_mod(mul_mod(slope, slope, p), x1, p), x2, p);
                let y3 = sub_mod(mul_mod(slope, sub_mod(x1, x3, p), p), y1, p);
                Point::Affine { x: x3, y: y3 }
            }
        }
    }

    pub fn double(&self, pt: &Point) -> Point {
        self.add(pt, pt)
    }

    pub fn scalar_mul(&self, k: u64, pt: &Point) -> Point {
        let mut acc = Point::Infinity;
        let mut base = *pt;
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.double(&base);
            }
        }
        acc
    }

    /// A point sampled with a generator seeded by `seed`.
    pub fn random_point(&self, seed: u64) -> Point {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_point(&mut rng)
    }

    /// Uniform `x` until `x^3 + ax + b` is a square; the sign of `y` is one
    /// random bit. Requires at least one affine point (true for `p >= 5`).
    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> Point {
        let p = self.p();
        loop {
            let x = rng.random_range(0..p);
            let r = self.rhs(x);
            if let Ok(y) = sqrt_mod(r, self.p) {
                let flip = rng.random::<bool>();
                let y = if flip && y != 0 { p - y } else { y };
                return Point::Affine { x, y };
            }
        }
    }

    /// Every point of the group, infinity first. Only sensible for small `p`.
    pub fn points(&self) -> Vec<Point> {
        let p = self.p();
        let mut out = vec![Point::Infinity];
        for x in 0..p {
            if let Ok(y) = sqrt_mod(self.rhs(x), self.p) {
                out.push(Point::Affine { x, y });
                if y != 0 {
                    out.push(Point::Affine { x, y: p - y });
                }
            }
        }
        out
    }

    /// Hasse interval `[p + 1 - floor(2 sqrt p), p + 1 + floor(2 sqrt p)]`.
    pub fn hasse_interval(&self) -> (u64, u64) {
        let p = self.p();
        let w = isqrt(4 * p);
        ((p + 1).saturating_sub(w), p + 1 + w)
    }

    /// Deterministic sampling seed mixed from `(p, a, b)`.
    pub fn seed(&self) -> u64 {
        splitmix(self.p() ^ splitmix(self.a ^ splitmix(self.b)))
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed())
    }

    /// Order of the point group by a character sum over `x`.
    pub fn order_by_counting(&self) -> u64 {
        let s: i64 = (0..self.p()).map(|x| legendre(self.rhs(x), self.p) as i64).sum();
        (self.p() as i64 + 1 + s) as u64
    }

    /// The quadratic twist `y^2 = x^3 + g^2 a x + g^3 b` by a non-residue `g`.
    pub fn quadratic_twist(&self) -> ReducedCurve {
        let p = self.p();
        let g = (2..p).find(|&g| legendre(g, self.p) == -1).expect("p odd");
        let g2 = mul_mod(g, g, p);
        ReducedCurve {
            p: self.p,
            a: mul_mod(g2, self.a, p),
            b: mul_mod(mul_mod(g2, g, p), self.b, p),
        }
    }

    /// Exact order of the point group.
    pub fn group_order(&self) -> Result<u64, CurveError> {
        if self.p() < EXHAUSTIVE_BELOW {
            return Ok(self.order_by_counting());
        }
        self.order_by_bsgs(&mut self.rng())
    }

    /// Order by refining the lcm of random point orders until one multiple
    /// remains in the Hasse interval, falling back to the quadratic twist
    /// (whose order is `2p + 2 - N`) when that stalls.
    pub fn order_by_bsgs<R: Rng>(&self, rng: &mut R) -> Result<u64, CurveError> {
        let p = self.p();
        let (lo, hi) = self.hasse_interval();
        let twist = self.quadratic_twist();
        let mut l_own = 1u64;
        let mut l_twist = 1u64;
        for sample in 0..SAMPLE_BUDGET {
            let on_twist = sample >= 8 && sample % 2 == 0;
            if on_twist {
                let pt = twist.sample_point(rng);
                l_twist = lcm(l_twist, twist.order_in_interval(&pt, lo, hi));
            } else {
                let pt = self.sample_point(rng);
                l_own = lcm(l_own, self.order_in_interval(&pt, lo, hi));
            }
            let mut candidates = (lo.div_ceil(l_own) * l_own..=hi)
                .step_by(l_own as usize)
                .filter(|&n| (2 * p + 2 - n).is_multiple_of(l_twist));
            if let (Some(n), None) = (candidates.next(), candidates.next()) {
                return Ok(n);
            }
        }
        Err(CurveError::IterationCap(SAMPLE_BUDGET, p))
    }

    /// Order of `pt`, given that some multiple of it lies in `[lo, hi]`.
    fn order_in_interval(&self, pt: &Point, lo: u64, hi: u64) -> u64 {
        let width = hi - lo + 1;
        let m = isqrt(width - 1) + 1;
        // baby steps j*P, 1 <= j < m, keyed by x
        let mut baby: HashMap<u64, (u64, u64)> = HashMap::with_capacity(m as usize);
        let mut cur = Point::Infinity;
        for j in 1..m {
            cur = self.add(&cur, pt);
            match cur {
                Point::Infinity => return j,
                Point::Affine { x, y } => {
                    baby.entry(x).or_insert((j, y));
                }
            }
        }
        let giant = self.negate(&self.scalar_mul(m, pt));
        // R_k = -(lo + k m) P; a hit R_k = +-jP gives a multiple lo + k m -+ j
        let mut r = self.negate(&self.scalar_mul(lo, pt));
        for k in 0..=m {
            let base = lo + k * m;
            let multiple = match r {
                Point::Infinity => Some(base),
                Point::Affine { x, y } => baby
                    .get(&x)
                    .map(|&(j, yj)| if yj == y { base + j } else { base.wrapping_sub(j) }),
            };
            // a non-positive multiple says nothing
            let multiple = multiple.filter(|&n| n > 0 && n <= base + m);
            if let Some(mult) = multiple {
                return self
                    .point_order(pt, mult)
                    .expect("baby-step match is a multiple of the order");
            }
            r = self.add(&r, &giant);
        }
        unreachable!("no multiple of the point order in the Hasse interval")
    }

    /// Exact order of `pt` given a multiple `n` of it.
    pub fn point_order(&self, pt: &Point, n: u64) -> Result<u64, CurveError> {
        if !self.scalar_mul(n, pt).is_infinity() {
            return Err(CurveError::BadWitness(n));
        }
        let mut order = n;
        for (q, _) in factorize(n) {
            while order.is_multiple_of(q) && self.scalar_mul(order / q, pt).is_infinity() {
                order /= q;
            }
        }
        Ok(order)
    }

    /// Exact `(N, d, e)`.
    ///
    /// `d` divides both `p - 1` and `e`, so only primes `l` with `l | p - 1`
    /// and `l^2 | N` can contribute to `d`. For each such `l` the Sylow
    /// `l`-subgroup is recovered from random pairs `P, Q` of `l`-power
    /// points: once `|<P, Q>|` equals the full `l`-part of `N`, its exponent
    /// `max(ord P, ord Q)` fixes the `l`-part of `d`. Membership in `<P>` is
    /// decided digit by digit by enumerating the `l` multiples of an
    /// order-`l` point.
    pub fn group_structure(&self) -> Result<GroupStructure, CurveError> {
        let order = self.group_order()?;
        self.structure_with_order(order)
    }

    pub fn structure_with_order(&self, order: u64) -> Result<GroupStructure, CurveError> {
        let p = self.p();
        let mut d = 1u64;
        let g = gcd(order, p - 1);
        let mut rng = self.rng();
        for (l, _) in factorize(g) {
            let v = valuation(order, l);
            if v < 2 {
                continue;
            }
            let a = self.sylow_rank_two_exponent(order, l, v, &mut rng)?;
            d *= l.pow(a);
        }
        let e = order / d;
        debug_assert_eq!(e % d, 0);
        debug_assert_eq!((p - 1) % d, 0);
        Ok(GroupStructure { order, d, e })
    }

    /// The smaller exponent `a` of the Sylow subgroup `Z/l^a x Z/l^b`.
    fn sylow_rank_two_exponent<R: Rng>(
        &self,
        order: u64,
        l: u64,
        v: u32,
        rng: &mut R,
    ) -> Result<u32, CurveError> {
        let cofactor = order / l.pow(v);
        for _ in 0..SAMPLE_BUDGET {
            let mut pt = self.scalar_mul(cofactor, &self.sample_point(rng));
            let mut qt = self.scalar_mul(cofactor, &self.sample_point(rng));
            let mut i = self.l_power_order(&pt, l);
            let mut iq = self.l_power_order(&qt, l);
            if iq > i {
                std::mem::swap(&mut pt, &mut qt);
                std::mem::swap(&mut i, &mut iq);
            }
            if i == v {
                return Ok(0);
            }
            // smallest j with l^j Q in <P>
            let mut j = 0;
            let mut probe = qt;
            while !self.in_cyclic_l_subgroup(&probe, &pt, l, i) {
                probe = self.scalar_mul(l, &probe);
                j += 1;
            }
            if i + j == v {
                return Ok(v - i);
            }
        }
        Err(CurveError::IterationCap(SAMPLE_BUDGET, self.p()))
    }

    /// `k` with `ord(pt) = l^k`, for a point of `l`-power order.
    fn l_power_order(&self, pt: &Point, l: u64) -> u32 {
        let mut k = 0;
        let mut cur = *pt;
        while !cur.is_infinity() {
            cur = self.scalar_mul(l, &cur);
            k += 1;
        }
        k
    }

    /// Whether `r` lies in `<gen>`, where `ord(gen) = l^i` and `l^i r = O`.
    fn in_cyclic_l_subgroup(&self, r: &Point, gen: &Point, l: u64, i: u32) -> bool {
        if i == 0 {
            return r.is_infinity();
        }
        let gamma = self.scalar_mul(l.pow(i - 1), gen);
        let mut table = Vec::with_capacity(l as usize);
        let mut cur = Point::Infinity;
        for _ in 0..l {
            table.push(cur);
            cur = self.add(&cur, &gamma);
        }
        let mut x = 0u64;
        for k in 0..i {
            let diff = self.add(r, &self.negate(&self.scalar_mul(x, gen)));
            let h = self.scalar_mul(l.pow(i - 1 - k), &diff);
            match table.iter().position(|t| *t == h) {
                Some(digit) => x += digit as u64 * l.pow(k),
                None => return false,
            }
        }
        true
    }

    /// `l | d`: the reduced group contains `(Z/l)^2`.
    pub fn has_full_torsion(&self, l: u64) -> Result<bool, CurveError> {
        Ok(self.group_structure()?.d % l == 0)
    }

    pub fn is_cyclic(&self) -> Result<bool, CurveError> {
        Ok(self.group_structure()?.is_cyclic())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn curve(p: u64, a: i64, b: i64) -> ReducedCurve {
        CurveOverQ::new(a, b).unwrap().reduce(p).unwrap()
    }

    /// Structure from the full list of points: the exponent is the largest
    /// point order, and `d = N / exponent`.
    /// Exponent found by stripping primes from `N` while every point is
    /// still killed; `d = N / e`.
    pub(crate) fn brute_structure(c: &ReducedCurve) -> GroupStructure {
        let pts = c.points();
        let n = pts.len() as u64;
        let mut exponent = n;
        for (q, _) in factorize(n) {
            while exponent.is_multiple_of(q) && pts.iter().all(|pt| c.scalar_mul(exponent / q, pt).is_infinity()) {
                exponent /= q;
            }
        }
        GroupStructure { order: n, d: n / exponent, e: exponent }
    }

    #[test]
    fn reduce_examples() {
        let c = curve(5, -3, 1);
        assert_eq!((c.a(), c.b()), (2, 1));
        let e1 = CurveOverQ::new(-3, 1).unwrap();
        assert_eq!(e1.discriminant(), 1296);
        assert_eq!(e1.reduce(3), Err(CurveError::BadReduction(3)));
        assert_eq!(e1.reduce(2), Err(CurveError::BadReduction(2)));
        let e2 = CurveOverQ::new(2, 3).unwrap();
        assert_eq!(e2.discriminant(), -4400);
        assert_eq!(e2.reduce(11), Err(CurveError::BadReduction(11)));
        assert_eq!(e2.reduce(9), Err(CurveError::NotPrime(9)));
        assert_eq!(CurveOverQ::new(-3, 2), Err(CurveError::Singular));
    }

    #[test]
    fn group_law_examples() {
        let c = curve(7, 2, 3);
        let pt = Point::Affine { x: 2, y: 1 };
        assert!(c.contains(&pt));
        assert_eq!(c.add(&Point::Infinity, &pt), pt);
        assert_eq!(c.add(&pt, &Point::Affine { x: 2, y: 6 }), Point::Infinity);
        let dbl = c.double(&pt);
        assert!(c.contains(&dbl));
        assert!(c.scalar_mul(6, &dbl).is_infinity());
        assert!(c.scalar_mul(0, &pt).is_infinity());
        for q in c.points() {
            assert!(c.scalar_mul(6, &q).is_infinity());
        }
    }

    #[test]
    fn random_point_examples() {
        let c = curve(7, 2, 3);
        for seed in 0..50 {
            let pt = c.random_point(seed);
            assert!(c.contains(&pt));
            match pt {
                Point::Affine { x, .. } => assert!([2, 3, 6].contains(&x)),
                Point::Infinity => panic!("sampled infinity"),
            }
            assert_eq!(pt, c.random_point(seed));
        }
    }

    #[test]
    fn group_order_examples() {
        assert_eq!(curve(7, 2, 3).group_order().unwrap(), 6);
        assert_eq!(curve(7, -1, 0).group_order().unwrap(), 8);
    }

    #[test]
    fn structure_examples() {
        let c = curve(7, 2, 3);
        assert_eq!(c.group_structure().unwrap(), GroupStructure { order: 6, d: 1, e: 6 });
        assert!(c.is_cyclic().unwrap());
        assert!(!c.has_full_torsion(2).unwrap());
        let c = curve(7, -1, 0);
        assert_eq!(c.group_structure().unwrap(), GroupStructure { order: 8, d: 2, e: 4 });
        assert!(!c.is_cyclic().unwrap());
        assert!(c.has_full_torsion(2).unwrap());
    }

    #[test]
    fn point_order_examples() {
        let c = curve(7, 2, 3);
        assert_eq!(c.point_order(&Point::Infinity, 6), Ok(1));
        for pt in c.points().into_iter().skip(1) {
            assert!([2, 3, 6].contains(&c.point_order(&pt, 6).unwrap()));
        }
        let pt = Point::Affine { x: 2, y: 1 };
        assert_eq!(c.point_order(&pt, 5), Err(CurveError::BadWitness(5)));
    }

    #[test]
    fn bsgs_matches_counting() {
        // both code paths on the same curves, including primes far above
        // the exhaustive cutoff; above 229 the curve or its twist always
        // has a point with a unique multiple in the Hasse interval
        for (a, b) in [(-3i64, 1i64), (2, 3), (1, 3), (-12096, -544752), (-13392, -1080432), (-1, 0), (0, 1)] {
            let e = CurveOverQ::new(a, b).unwrap();
            let primes = crate::modmath::sieve_primes(20_000).unwrap();
            for (i, &p) in primes.iter().enumerate() {
                let p = p as u64;
                if p <= 229 || (p > 5000 && i % 8 != 0) || e.has_bad_reduction(p) {
                    continue;
                }
                let c = e.reduce(p).unwrap();
                let mut rng = ChaCha8Rng::seed_from_u64(c.seed());
                assert_eq!(
                    c.order_by_bsgs(&mut rng).unwrap(),
                    c.order_by_counting(),
                    "curve ({a},{b}) p = {p}"
                );
            }
        }
    }

    #[test]
    fn structure_matches_exhaustive_for_larger_primes() {
        // includes CM curves, where large full torsion is common
        for (a, b) in [(-1i64, 0i64), (0, 1), (-3, 1), (2, 3)] {
            let e = CurveOverQ::new(a, b).unwrap();
            for p in [1009u64, 1201, 2017, 3361, 4801, 7681, 10369] {
                if e.has_bad_reduction(p) {
                    continue;
                }
                let c = e.reduce(p).unwrap();
                assert_eq!(c.group_structure().unwrap(), brute_structure(&c), "({a},{b}) p={p}");
            }
        }
    }

    #[test]
    fn twist_orders_sum() {
        let c = curve(1009, 2, 3);
        let t = c.quadratic_twist();
        assert_eq!(c.order_by_counting() + t.order_by_counting(), 2 * 1009 + 2);
    }

    #[test]
    fn group_axioms_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (p, a, b) in [(1_000_003u64, -3i64, 1i64), (65_537, 2, 3), (999_983, 1, 3)] {
            let c = curve(p, a, b);
            for _ in 0..1000 {
                let x = c.sample_point(&mut rng);
                let y = c.sample_point(&mut rng);
                let z = c.sample_point(&mut rng);
                assert!(c.contains(&c.add(&x, &y)));
                assert_eq!(c.add(&x, &y), c.add(&y, &x));
                assert_eq!(c.add(&c.add(&x, &y), &z), c.add(&x, &c.add(&y, &z)));
                assert!(c.add(&x, &c.negate(&x)).is_infinity());
                assert_eq!(c.add(&x, &Point::Infinity), x);
            }
        }
    }
}
