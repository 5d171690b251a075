//! Division-field data over the rationals: the exact degree of the
//! 2-division field, Frobenius traces, and a one-sided sampling certificate
//! that the mod-`l` image is all of `GL_2(F_l)`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{CurveError, CurveOverQ};
use crate::modmath::{self, divisors, inv_mod, isqrt, mul_mod, sub_mod, PrimeModulus};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GaloisError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("surjectivity certification needs a prime l >= 5, got {0}")]
    InvalidPrime(u64),
}

/// Integer roots of `x^3 + Ax + B`.
pub fn rational_two_torsion(curve: &CurveOverQ) -> Vec<i64> {
    let (a, b) = (curve.a() as i128, curve.b() as i128);
    let f = |x: i128| x * x * x + a * x + b;
    let mut roots = Vec::new();
    if b == 0 {
        roots.push(0);
        // x^2 + A = 0
        if a < 0 {
            let r = isqrt((-a) as u64) as i128;
            if r * r == -a {
                roots.extend([-r as i64, r as i64]);
            }
        }
    } else {
        for d in divisors(b.unsigned_abs() as u64) {
            for x in [d as i128, -(d as i128)] {
                if f(x) == 0 {
                    roots.push(x as i64);
                }
            }
        }
    }
    roots.sort_unstable();
    roots
}

/// Degree over `Q` of the splitting field of `x^3 + Ax + B`.
pub fn two_division_degree(curve: &CurveOverQ) -> u32 {
    match rational_two_torsion(curve).len() {
        3 => 1,
        1 => 2,
        _ => {
            let (a, b) = (curve.a() as i128, curve.b() as i128);
            let disc = -4 * a * a * a - 27 * b * b;
            if is_square_i128(disc) {
                3
            } else {
                6
            }
        }
    }
}

fn is_square_i128(n: i128) -> bool {
    if n < 0 {
        return false;
    }
    let n = n as u128;
    let mut r = (n as f64).sqrt() as u128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r * r == n
}

/// `a_p = p + 1 - #E(F_p)`.
pub fn frobenius_trace(curve: &CurveOverQ, p: u64) -> Result<i64, GaloisError> {
    let n = curve.reduce(p)?.group_order()?;
    Ok(p as i64 + 1 - n as i64)
}

/// What Frobenius sampling saw modulo `l`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageFingerprint {
    pub ell: u64,
    pub samples: usize,
    /// Non-zero trace with `t^2 - 4d` a non-zero non-square.
    pub w1: bool,
    /// Non-zero trace with `t^2 - 4d` a non-zero square.
    pub w2: bool,
    /// Non-zero trace with `u = t^2/d` outside `{0, 1, 2, 4}` and
    /// `u^2 - 3u + 1 != 0`.
    pub w3: bool,
    /// Observed `(a_p mod l, p mod l)`.
    pub trace_det_pairs: BTreeSet<(u64, u64)>,
    /// Certification rests on the subgroup classification of `GL_2(F_l)`,
    /// not on a computed Galois group.
    pub heuristic: bool,
}

impl ImageFingerprint {
    pub fn all_witnesses(&self) -> bool {
        self.w1 && self.w2 && self.w3
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SurjectivityCheck {
    Certified(ImageFingerprint),
    Inconclusive(ImageFingerprint),
}

impl SurjectivityCheck {
    pub fn is_certified(&self) -> bool {
        matches!(self, SurjectivityCheck::Certified(_))
    }

    pub fn fingerprint(&self) -> &ImageFingerprint {
        match self {
            SurjectivityCheck::Certified(f) | SurjectivityCheck::Inconclusive(f) => f,
        }
    }
}

pub const DEFAULT_SAMPLE_BOUND: u64 = 10_000;

/// Sample good primes `p <= bound`, `p != l`, in increasing order and
/// record the witness flags. Sampling stops once all three are seen.
pub fn image_fingerprint(curve: &CurveOverQ, ell: u64, bound: u64) -> Result<ImageFingerprint, GaloisError> {
    if !modmath::is_prime(ell) {
        return Err(GaloisError::InvalidPrime(ell));
    }
    let mut fp = ImageFingerprint {
        ell,
        samples: 0,
        w1: false,
        w2: false,
        w3: false,
        trace_det_pairs: BTreeSet::new(),
        heuristic: true,
    };
    let primes = modmath::sieve_primes(bound.max(2)).expect("sample bound below 2^32");
    let modulus = if ell >= 5 { PrimeModulus::new(ell).ok() } else { None };
    for &p in &primes {
        let p = p as u64;
        if p == ell || curve.has_bad_reduction(p) {
            continue;
        }
        let ap = frobenius_trace(curve, p)?;
        debug_assert!(ap.unsigned_abs().pow(2) <= 4 * p);
        let t = modmath::reduce_signed(ap as i128, ell);
        let d = p % ell;
        fp.samples += 1;
        fp.trace_det_pairs.insert((t, d));
        if let Some(m) = modulus {
            if t != 0 {
                let disc = sub_mod(mul_mod(t, t, ell), mul_mod(4, d, ell), ell);
                match modmath::legendre(disc, m) {
                    -1 => fp.w1 = true,
                    1 => fp.w2 = true,
                    _ => {}
                }
                let u = mul_mod(mul_mod(t, t, ell), inv_mod(d, ell).expect("p != l"), ell);
                let quad = (mul_mod(u, u, ell) + ell * 3 - mul_mod(3, u, ell) + 1) % ell;
                if ![0, 1, 2, 4 % ell].contains(&u) && quad != 0 {
                    fp.w3 = true;
                }
            }
        }
        if fp.all_witnesses() {
            break;
        }
    }
    Ok(fp)
}

/// `Certified` only when all three witnesses were observed. `Inconclusive`
/// makes no claim about the image.
pub fn certify_surjective(curve: &CurveOverQ, ell: u64, bound: u64) -> Result<SurjectivityCheck, GaloisError> {
    if ell < 5 || !modmath::is_prime(ell) {
        return Err(GaloisError::InvalidPrime(ell));
    }
    let fp = image_fingerprint(curve, ell, bound)?;
    Ok(if fp.all_witnesses() {
        SurjectivityCheck::Certified(fp)
    } else {
        SurjectivityCheck::Inconclusive(fp)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(a: i64, b: i64) -> CurveOverQ {
        CurveOverQ::new(a, b).unwrap()
    }

    const SECTION_CURVES: [(i64, i64, u32); 5] = [
        (-3, 1, 3),
        (2, 3, 2),
        (-12096, -544752, 6),
        (1, 3, 6),
        (-13392, -1080432, 6),
    ];

    #[test]
    fn two_division_examples() {
        assert_eq!(two_division_degree(&e(-3, 1)), 3);
        assert_eq!(two_division_degree(&e(2, 3)), 2);
        assert_eq!(rational_two_torsion(&e(2, 3)), vec![-1]);
        assert_eq!(two_division_degree(&e(1, 3)), 6);
        assert_eq!(two_division_degree(&e(-1, 0)), 1);
        assert_eq!(two_division_degree(&e(1, 0)), 2);
        // (x - 1)(x - 2)(x + 3)
        assert_eq!(two_division_degree(&e(-7, 6)), 1);
    }

    /// Root counts of the cubic mod p: the Frobenius cycle types present
    /// pin down the Galois group of the splitting field.
    #[test]
    fn two_division_degree_matches_splitting_patterns() {
        for (a, b, expected) in SECTION_CURVES {
            let curve = e(a, b);
            let mut patterns = BTreeSet::new();
            let mut seen = 0;
            for p in modmath::sieve_primes(5000).unwrap() {
                let p = p as u64;
                if curve.has_bad_reduction(p) {
                    continue;
                }
                let c = curve.reduce(p).unwrap();
                let roots = (0..p).filter(|&x| c.rhs(x) == 0).count();
                patterns.insert(roots);
                seen += 1;
                if seen == 100 {
                    break;
                }
            }
            let from_patterns = match patterns.into_iter().collect::<Vec<_>>().as_slice() {
                [3] => 1,
                [1, 3] => 2,
                [0, 3] => 3,
                [0, 1, 3] => 6,
                other => panic!("unexpected pattern set {other:?}"),
            };
            assert_eq!(from_patterns, expected, "curve ({a}, {b})");
            assert_eq!(two_division_degree(&curve), expected);
        }
    }

    #[test]
    fn frobenius_trace_examples() {
        assert_eq!(frobenius_trace(&e(2, 3), 7), Ok(2));
        assert_eq!(frobenius_trace(&e(-1, 0), 7), Ok(0));
        assert!(matches!(frobenius_trace(&e(2, 3), 11), Err(GaloisError::Curve(CurveError::BadReduction(11)))));
        let curve = e(-13392, -1080432);
        for p in modmath::sieve_primes(200_000).unwrap().into_iter().step_by(17).take(1000) {
            let p = p as u64;
            if curve.has_bad_reduction(p) {
                continue;
            }
            let ap = frobenius_trace(&curve, p).unwrap();
            assert!((ap * ap) as u64 <= 4 * p);
        }
    }

    #[test]
    fn certify_examples() {
        assert!(certify_surjective(&e(1, 3), 7, DEFAULT_SAMPLE_BOUND).unwrap().is_certified());
        assert!(certify_surjective(&e(-3, 1), 7, DEFAULT_SAMPLE_BOUND).unwrap().is_certified());
        let ex5 = certify_surjective(&e(-13392, -1080432), 5, DEFAULT_SAMPLE_BOUND).unwrap();
        assert!(!ex5.is_certified());
        assert!(ex5.fingerprint().heuristic);
        assert_eq!(certify_surjective(&e(1, 3), 3, 100), Err(GaloisError::InvalidPrime(3)));
        assert!(image_fingerprint(&e(1, 3), 3, 100).is_ok());
    }

    #[test]
    fn trace_residues_consistent() {
        let curve = e(1, 3);
        let fp = image_fingerprint(&curve, 7, 2000).unwrap();
        for &(t, d) in &fp.trace_det_pairs {
            assert!(t < 7 && d < 7 && d != 0);
        }
        for p in [11u64, 17, 23, 101] {
            let n = curve.reduce(p).unwrap().group_order().unwrap();
            let ap = frobenius_trace(&curve, p).unwrap();
            assert_eq!((p as i64 + 1 - ap).rem_euclid(7), (n % 7) as i64);
        }
    }
}
