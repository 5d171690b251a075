//! Exact evaluation of the cyclic reduction density
//! `delta = sum_m mu(m) / [K_m : K]` and its Euler-product forms.
//!
//! Corrections and finite sums are exact rationals. The infinite products
//! over all primes are intervals: the product over `l <= L` (exact, or
//! rounded outward to `2^-256` once it grows large) times the tail
//! enclosure `[1 - 1/L^3, 1]`. The tail bound holds for every `L >= 2`:
//!
//! ```text
//! prod_{l > L} (1 - a_l) >= 1 - sum_{n > L} 1/((n^2 - 1)(n^2 - n))
//!                        >= 1 - sum_{k >= L} 1/k^4 >= 1 - 1/L^3
//! ```
//!
//! using `n(n - 1)^2(n + 1) >= (n - 1)^4` and `1/L^4 + 1/(3L^3) <= 1/L^3`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::CurveOverQ;
use crate::modmath::{self, divisors, moebius, prime_factors};

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DensityError {
    #[error("no degree for the entangled composite m = {0}; add an override")]
    MissingDegree(u64),
    #[error("nonmaximal prime {0} does not divide the entanglement modulus")]
    ProfileLeak(u64),
    #[error("degree 1 at l = {0} is a pole of the character sum formula")]
    DegreeOne(u64),
    #[error("naive density interval straddles zero with positive correction")]
    Indeterminate,
    #[error("{0} is not squarefree")]
    NotSquarefree(u64),
    #[error("the character sum formula needs at least two primes")]
    TooFewPrimes,
    #[error("invalid degree profile: {0}")]
    InvalidProfile(String),
    #[error("discriminant too large to factor")]
    Unfactorable,
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn rat_u128(n: u128, d: u128) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `#GL_2(F_l) = (l^2 - 1)(l^2 - l)`.
pub fn gl2_order(l: u64) -> u128 {
    let l = l as u128;
    (l * l - 1) * (l * l - l)
}

/// `1 - 1/degree`.
fn euler_factor(degree: u128) -> Rational {
    rat_u128(degree - 1, degree)
}

/// Closed interval of rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        Interval { lo, hi }
    }

    pub fn point(x: Rational) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn zero() -> Self {
        Interval::point(Rational::zero())
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// Multiply by a non-negative rational.
    pub fn scale(&self, k: &Rational) -> Interval {
        assert!(!k.is_negative(), "interval scaled by a negative factor");
        Interval {
            lo: &self.lo * k,
            hi: &self.hi * k,
        }
    }

    /// Whether every point lies within `radius` of `center`.
    pub fn within(&self, center: &Rational, radius: &Rational) -> bool {
        (&self.lo - center).abs() <= *radius && (&self.hi - center).abs() <= *radius
    }

    pub fn midpoint_f64(&self) -> f64 {
        ((&self.lo + &self.hi) / rat(2, 1)).to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}]",
            to_decimal(&self.lo, 20, Rounding::Down),
            to_decimal(&self.hi, 20, Rounding::Up)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    Down,
    Up,
    Nearest,
}

/// Fixed-point decimal with `digits` fractional digits.
pub fn to_decimal(x: &Rational, digits: usize, mode: Rounding) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = x * Rational::from_integer(scale.clone());
    let n = match mode {
        Rounding::Down => scaled.floor(),
        Rounding::Up => scaled.ceil(),
        Rounding::Nearest => scaled.round(),
    }
    .to_integer();
    let neg = n.is_negative();
    let (int_part, frac_part) = n.abs().div_rem(&scale);
    let frac = frac_part.to_string();
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push_str(&int_part.to_string());
    if digits > 0 {
        out.push('.');
        out.push_str(&"0".repeat(digits - frac.len()));
        out.push_str(&frac);
    }
    out
}

/// Parse a plain decimal like `0.6510015` or `-3` exactly.
pub fn parse_decimal(s: &str) -> Option<Rational> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (ip, fp) = body.split_once('.').unwrap_or((body, ""));
    if ip.is_empty() && fp.is_empty() {
        return None;
    }
    let digits: String = format!("{ip}{fp}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let num: BigInt = digits.parse().ok()?;
    let den = BigInt::from(10u32).pow(fp.len() as u32);
    let r = Rational::new(num, den);
    Some(if neg { -r } else { r })
}

/// Parse `n/d` or an integer.
pub fn parse_rational(s: &str) -> Option<Rational> {
    match s.split_once('/') {
        Some((n, d)) => {
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(n.trim().parse().ok()?, d))
        }
        None => Some(Rational::from_integer(s.trim().parse().ok()?)),
    }
}

/// Division-field degree data.
///
/// Primes absent from `degrees` have the maximal degree `#GL_2(F_l)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegreeProfile {
    #[serde(default)]
    pub degrees: BTreeMap<u64, u64>,
    /// Primes whose non-splitting condition is implied by another one.
    #[serde(default)]
    pub superfluous: BTreeSet<u64>,
    /// Primes `l | 2D` tied together by a single quadratic character.
    #[serde(default)]
    pub charsum: BTreeSet<u64>,
    /// Explicit `[K_m : K]` for squarefree `m`.
    #[serde(default)]
    pub overrides: BTreeMap<u64, u64>,
}

impl DegreeProfile {
    pub fn maximal() -> Self {
        DegreeProfile::default()
    }

    pub fn with_degrees(pairs: &[(u64, u64)]) -> Self {
        DegreeProfile {
            degrees: pairs.iter().copied().collect(),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), DensityError> {
        let bad = |msg: String| Err(DensityError::InvalidProfile(msg));
        for (&l, &d) in &self.degrees {
            if !modmath::is_prime(l) {
                return bad(format!("degree key {l} is not prime"));
            }
            if d == 0 || !gl2_order(l).is_multiple_of(d as u128) {
                return bad(format!("degree {d} at {l} does not divide #GL2(F_{l})"));
            }
        }
        for &l in self.superfluous.iter().chain(&self.charsum) {
            if !modmath::is_prime(l) {
                return bad(format!("{l} is not prime"));
            }
        }
        if let Some(l) = self.superfluous.intersection(&self.charsum).next() {
            return bad(format!("{l} is both superfluous and a character-sum prime"));
        }
        if self.charsum.len() == 1 {
            return bad("a character-sum set needs at least two primes".into());
        }
        for (&m, &d) in &self.overrides {
            if m == 0 || !modmath::is_squarefree(m) {
                return bad(format!("override key {m} is not squarefree"));
            }
            if d == 0 {
                return bad(format!("override degree for {m} is zero"));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, DensityError> {
        let p: DegreeProfile =
            serde_json::from_str(text).map_err(|e| DensityError::InvalidProfile(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("profile serializes")
    }

    /// `[K_l : K]`.
    pub fn degree(&self, l: u64) -> u128 {
        self.degrees
            .get(&l)
            .map_or_else(|| gl2_order(l), |&d| d as u128)
    }

    /// Primes whose degree differs from the maximal one.
    pub fn nonmaximal(&self) -> BTreeSet<u64> {
        self.degrees
            .iter()
            .filter(|&(&l, &d)| d as u128 != gl2_order(l))
            .map(|(&l, _)| l)
            .collect()
    }

    /// Every prime that carries an annotation.
    pub fn special_primes(&self) -> BTreeSet<u64> {
        let mut s = self.nonmaximal();
        s.extend(&self.superfluous);
        s.extend(&self.charsum);
        s
    }

    pub fn has_degree_one(&self) -> bool {
        self.degrees.values().any(|&d| d == 1)
    }

    /// `[K_m : K]` for squarefree `m`: an override if present, otherwise
    /// the product of prime degrees, halved when `m` covers the whole
    /// character-sum set. A superfluous prime together with another
    /// annotated prime has no default and needs an override.
    pub fn composite_degree(&self, m: u64) -> Result<u128, DensityError> {
        if let Some(&d) = self.overrides.get(&m) {
            return Ok(d as u128);
        }
        let ls = prime_factors(m);
        if ls.len() == 1 {
            return Ok(self.degree(ls[0]));
        }
        let special = self.special_primes();
        let entangled = ls.iter().filter(|l| special.contains(l)).count();
        if entangled > 1 && ls.iter().any(|l| self.superfluous.contains(l)) {
            return Err(DensityError::MissingDegree(m));
        }
        let mut d: u128 = ls.iter().map(|&l| self.degree(l)).product();
        if !self.charsum.is_empty() && self.charsum.iter().all(|l| ls.contains(l)) {
            d /= 2;
        }
        Ok(d)
    }
}

/// Numerator and denominator of `prod_{l <= L} (1 - 1/[K_l:K])`, unreduced,
/// built from product trees.
fn euler_partial_product(bound: u64, degree: impl Fn(u64) -> u128) -> (BigUint, BigUint) {
    let primes = modmath::sieve_primes(bound).expect("truncation bound below 2^32");
    let mut nums: Vec<BigUint> = Vec::with_capacity(primes.len());
    let mut dens: Vec<BigUint> = Vec::with_capacity(primes.len());
    for &l in &primes {
        let d = degree(l as u64);
        nums.push(BigUint::from(d - 1));
        dens.push(BigUint::from(d));
    }
    (product_tree(nums), product_tree(dens))
}

fn product_tree(mut xs: Vec<BigUint>) -> BigUint {
    if xs.is_empty() {
        return BigUint::one();
    }
    while xs.len() > 1 {
        xs = xs
            .chunks(2)
            .map(|c| if c.len() == 2 { &c[0] * &c[1] } else { c[0].clone() })
            .collect();
    }
    xs.pop().unwrap()
}

/// Fractions with larger denominators are rounded outward to multiples of
/// `2^-ROUNDING_BITS`; reducing them exactly costs a quadratic gcd.
const EXACT_BITS: u64 = 512;
const ROUNDING_BITS: usize = 256;

/// `num / den` exactly when small, otherwise the enclosing pair of dyadic
/// rationals.
fn enclose(num: BigUint, den: BigUint) -> (Rational, Rational) {
    if den.bits() <= EXACT_BITS {
        let x = Rational::new(num.into(), den.into());
        return (x.clone(), x);
    }
    let (q, r) = (num << ROUNDING_BITS).div_rem(&den);
    let scale = BigInt::one() << ROUNDING_BITS;
    let hi = if r.is_zero() { q.clone() } else { &q + 1u32 };
    (
        Rational::new(q.into(), scale.clone()),
        Rational::new(hi.into(), scale),
    )
}

/// `1 - 1/L^3`.
fn tail_lower(bound: u64) -> Rational {
    let l3 = (bound as u128).pow(3);
    rat_u128(l3 - 1, l3)
}

type ProductCache = Mutex<HashMap<u64, Arc<(Rational, Rational)>>>;

/// Enclosure of the partial product over `l <= L`, cached per bound.
fn artin_partial(bound: u64) -> Arc<(Rational, Rational)> {
    static CACHE: OnceLock<ProductCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&bound) {
        return v.clone();
    }
    let (num, den) = euler_partial_product(bound, gl2_order);
    let v = Arc::new(enclose(num, den));
    cache.lock().unwrap().insert(bound, v.clone());
    v
}

/// Enclosure of `A_inf = prod_l (1 - 1/#GL_2(F_l))` truncated at `L`.
pub fn artin_constant(bound: u64) -> Interval {
    assert!(bound >= 2, "truncation bound must be at least 2");
    let p = artin_partial(bound);
    Interval::new(&p.0 * tail_lower(bound), p.1.clone())
}

/// `prod_{nonmaximal l} (1 - 1/deg_l) / (1 - 1/#GL_2(F_l))`.
pub fn nonmaximal_ratio(profile: &DegreeProfile) -> Rational {
    let mut r = Rational::one();
    for &l in profile.degrees.keys() {
        r *= euler_factor(profile.degree(l)) / euler_factor(gl2_order(l));
    }
    r
}

/// Enclosure of the naive density `prod_l (1 - 1/[K_l:K])`.
pub fn naive_density(profile: &DegreeProfile, bound: u64) -> Interval {
    let base = artin_constant(bound);
    let mut k = Rational::one();
    for &l in profile.degrees.keys() {
        let d = profile.degree(l);
        if l <= bound {
            k *= euler_factor(d) / euler_factor(gl2_order(l));
        } else {
            // not part of the truncated product; the tail bound still
            // covers the remaining primes above the bound
            k *= euler_factor(d);
        }
    }
    base.scale(&k)
}

/// `delta(n) = sum_{m | n} mu(m) / [K_m : K]`.
pub fn delta_partial(n: u64, profile: &DegreeProfile) -> Result<Rational, DensityError> {
    if n == 0 || !modmath::is_squarefree(n) {
        return Err(DensityError::NotSquarefree(n));
    }
    let mut sum = Rational::zero();
    for m in divisors(n) {
        let mu = moebius(m);
        let d = profile.composite_degree(m)?;
        sum += rat_u128(1, d) * rat(mu as i64, 1);
    }
    Ok(sum)
}

/// `delta(N) * prod_{l not dividing N} (1 - 1/[K_l:K])`.
pub fn delta_factored(
    modulus: u64,
    delta_n: &Rational,
    profile: &DegreeProfile,
    bound: u64,
) -> Result<Interval, DensityError> {
    if let Some(&l) = profile.special_primes().iter().find(|&&l| !modulus.is_multiple_of(l)) {
        return Err(DensityError::ProfileLeak(l));
    }
    if delta_n.is_zero() {
        return Ok(Interval::zero());
    }
    let mut k = delta_n.clone();
    for l in prime_factors(modulus) {
        if l <= bound {
            k /= euler_factor(gl2_order(l));
        }
    }
    Ok(artin_constant(bound).scale(&k))
}

/// Rational `c` with `delta = c * A_inf`, given the full correction `alpha`.
pub fn c_factor(profile: &DegreeProfile, alpha: &Rational) -> Rational {
    alpha * nonmaximal_ratio(profile)
}

/// `1 + prod_l (-1 / ([K_l:Q] - 1))`.
pub fn charsum_alpha(degrees: &BTreeMap<u64, u128>) -> Result<Rational, DensityError> {
    if degrees.len() < 2 {
        return Err(DensityError::TooFewPrimes);
    }
    let mut prod = Rational::one();
    for (&l, &d) in degrees {
        if d <= 1 {
            return Err(DensityError::DegreeOne(l));
        }
        prod *= rat_u128(1, d - 1);
        prod = -prod;
    }
    Ok(Rational::one() + prod)
}

/// `prod_{l superfluous} 1 / (1 - 1/[K_l:K])`.
pub fn superfluous_correction(profile: &DegreeProfile) -> Result<Rational, DensityError> {
    let mut r = Rational::one();
    for &l in &profile.superfluous {
        let d = profile.degree(l);
        if d <= 1 {
            return Err(DensityError::DegreeOne(l));
        }
        r /= euler_factor(d);
    }
    Ok(r)
}

/// The character-sum correction for the profile's `charsum` set (1 if
/// the set is empty).
pub fn profile_charsum_alpha(profile: &DegreeProfile) -> Result<Rational, DensityError> {
    if profile.charsum.is_empty() {
        return Ok(Rational::one());
    }
    let degrees = profile.charsum.iter().map(|&l| (l, profile.degree(l))).collect();
    charsum_alpha(&degrees)
}

/// Squarefree `N` made of `2, 3, 5`, the primes of `disc_k`, the primes of
/// bad reduction and the nonmaximal primes.
pub fn entanglement_modulus(
    curve: &CurveOverQ,
    nonmaximal: &BTreeSet<u64>,
    disc_k: i64,
) -> Result<u64, DensityError> {
    let mut ls: BTreeSet<u64> = [2, 3, 5].into_iter().collect();
    ls.extend(prime_factors(disc_k.unsigned_abs()));
    let bad = modmath::prime_factors_u128(curve.discriminant().unsigned_abs())
        .ok_or(DensityError::Unfactorable)?;
    ls.extend(bad);
    ls.extend(nonmaximal);
    Ok(ls.into_iter().product())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vanishing {
    Positive,
    Trivial,
    NonTrivial,
}

pub fn classify_vanishing(
    naive: &Interval,
    alpha: &Rational,
    profile: &DegreeProfile,
) -> Result<Vanishing, DensityError> {
    if profile.has_degree_one() {
        return Ok(Vanishing::Trivial);
    }
    if naive.lo().is_positive() {
        return Ok(if alpha.is_zero() {
            Vanishing::NonTrivial
        } else {
            Vanishing::Positive
        });
    }
    Err(DensityError::Indeterminate)
}

/// Every density quantity for one profile at one truncation bound.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityReport {
    pub truncation: u64,
    pub a_inf: Interval,
    pub naive: Interval,
    pub charsum_alpha: Rational,
    pub superfluous_factor: Rational,
    /// Full correction: `charsum_alpha * superfluous_factor` unless
    /// supplied explicitly.
    pub alpha: Rational,
    pub c_factor: Rational,
    pub delta: Interval,
    pub vanishing: Vanishing,
}

impl DensityReport {
    pub fn build(
        profile: &DegreeProfile,
        bound: u64,
        alpha_override: Option<Rational>,
    ) -> Result<Self, DensityError> {
        profile.validate()?;
        let a_inf = artin_constant(bound);
        let naive = naive_density(profile, bound);
        let charsum = profile_charsum_alpha(profile)?;
        let superfluous = superfluous_correction(profile)?;
        let alpha = alpha_override.unwrap_or_else(|| &charsum * &superfluous);
        if alpha.is_negative() {
            return Err(DensityError::InvalidProfile("negative correction factor".into()));
        }
        let c = c_factor(profile, &alpha);
        let delta = naive.scale(&alpha);
        let vanishing = classify_vanishing(&naive, &alpha, profile)?;
        Ok(DensityReport {
            truncation: bound,
            a_inf,
            naive,
            charsum_alpha: charsum,
            superfluous_factor: superfluous,
            alpha,
            c_factor: c,
            delta,
            vanishing,
        })
    }
}
