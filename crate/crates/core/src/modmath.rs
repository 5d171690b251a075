//! Word-sized modular arithmetic, primality, sieving and small arithmetic
//! functions.
//!
//! Residues are always the least non-negative representatives. Products are
//! taken in `u128` unless the modulus is below 2^32, where a plain `u64`
//! product cannot overflow.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModMathError {
    #[error("{0} is not a quadratic residue modulo {1}")]
    NotAResidue(u64, u64),
    #[error("sieve limit {0} exceeds 2^32")]
    LimitTooLarge(u64),
    #[error("{0} is not an odd prime below 2^62")]
    InvalidModulus(u64),
}

/// An odd prime `p` with `2 < p < 2^62`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeModulus(u64);

impl PrimeModulus {
    pub const MAX: u64 = 1 << 62;

    pub fn new(p: u64) -> Result<Self, ModMathError> {
        if p <= 2 || p >= Self::MAX || !is_prime(p) {
            return Err(ModMathError::InvalidModulus(p));
        }
        Ok(PrimeModulus(p))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    if m <= u32::MAX as u64 {
        (a * b) % m
    } else {
        ((a as u128 * b as u128) % m as u128) as u64
    }
}

#[inline]
pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    let (s, overflow) = a.overflowing_add(b);
    if overflow || s >= m {
        s.wrapping_sub(m)
    } else {
        s
    }
}

#[inline]
pub fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        m - (b - a)
    }
}

/// `base^exp mod m` by square-and-multiply. Works for any modulus `m >= 1`.
pub fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut result = 1;
    let mut b = base % m;
    while exp > 0 {
        if exp & 1 == 1 {
            result = mul_mod(result, b, m);
        }
        b = mul_mod(b, b, m);
        exp >>= 1;
    }
    result
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Reduce a signed integer to `[0, m)`.
#[inline]
pub fn reduce_signed(a: i128, m: u64) -> u64 {
    a.rem_euclid(m as i128) as u64
}

/// Legendre symbol `(a / p)` for `a < p`.
pub fn legendre(a: u64, p: PrimeModulus) -> i8 {
    let p = p.get();
    let a = a % p;
    if a == 0 {
        return 0;
    }
    if pow_mod(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Square root modulo `p`, canonicalized to `min(r, p - r)`.
pub fn sqrt_mod(a: u64, p: PrimeModulus) -> Result<u64, ModMathError> {
    let pv = p.get();
    let a = a % pv;
    if a == 0 {
        return Ok(0);
    }
    if legendre(a, p) != 1 {
        return Err(ModMathError::NotAResidue(a, pv));
    }
    let r = if pv % 4 == 3 {
        pow_mod(a, (pv + 1) / 4, pv)
    } else {
        tonelli_shanks(a, pv)
    };
    debug_assert_eq!(mul_mod(r, r, pv), a);
    Ok(r.min(pv - r))
}

fn tonelli_shanks(a: u64, p: u64) -> u64 {
    let mut q = p - 1;
    let mut s = 0u32;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    // smallest non-residue
    let mut z = 2;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let mut b = c;
        for _ in 0..(m - i - 1) {
            b = mul_mod(b, b, p);
        }
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    r
}

/// Witness set that makes the strong probable-prime test deterministic for
/// every 64-bit integer.
const MR_BASES: [u64; 7] = [2, 325, 9375, 28178, 450775, 9780504, 1795265022];

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &q in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(q) {
            return n == q;
        }
    }
    if n < 41 * 41 {
        return true;
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &base in &MR_BASES {
        let a = base % n;
        if a == 0 {
            continue;
        }
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub const SIEVE_MAX: u64 = 1 << 32;

/// All primes `<= x` in increasing order (segmented sieve of Eratosthenes
/// over odd numbers).
pub fn sieve_primes(x: u64) -> Result<Vec<u32>, ModMathError> {
    if x > SIEVE_MAX {
        return Err(ModMathError::LimitTooLarge(x));
    }
    let mut primes = Vec::new();
    if x < 2 {
        return Ok(primes);
    }
    primes.push(2);
    let x = x.min(u32::MAX as u64);
    let root = isqrt(x);
    // base primes by a plain sieve
    let mut small = vec![true; root as usize + 1];
    let mut base = Vec::new();
    for i in 2..=root as usize {
        if small[i] {
            if i > 2 {
                base.push(i as u64);
            }
            let mut j = i * i;
            while j <= root as usize {
                small[j] = false;
                j += i;
            }
        }
    }

    const SEGMENT: u64 = 1 << 18;
    let mut composite = vec![false; SEGMENT as usize];
    // segment covers odd numbers lo, lo+2, ..., lo + 2*(SEGMENT-1)
    let mut lo = 3u64;
    while lo <= x {
        let hi = (lo + 2 * (SEGMENT - 1)).min(x);
        let len = ((hi - lo) / 2 + 1) as usize;
        composite[..len].fill(false);
        for &q in &base {
            if q * q > hi {
                break;
            }
            let mut start = (q * q).max(lo.div_ceil(q) * q);
            if start % 2 == 0 {
                start += q;
            }
            let mut j = ((start - lo) / 2) as usize;
            while j < len {
                composite[j] = true;
                j += q as usize;
            }
        }
        for (i, &c) in composite[..len].iter().enumerate() {
            if !c {
                primes.push((lo + 2 * i as u64) as u32);
            }
        }
        lo = hi + 2;
        if hi.is_multiple_of(2) {
            lo = hi + 1;
        }
    }
    Ok(primes)
}

pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd(a, b) * b
}

const TRIAL_BOUND: u64 = 100_000;

/// Prime factorization as `(prime, exponent)` pairs with increasing primes.
///
/// Trial division up to 10^5, then Brent's variant of Pollard rho with a
/// fixed sequence of polynomial constants.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n <= 1 {
        return out;
    }
    let push = |q: u64, n: &mut u64, out: &mut Vec<(u64, u32)>| {
        let mut e = 0;
        while (*n).is_multiple_of(q) {
            *n /= q;
            e += 1;
        }
        if e > 0 {
            out.push((q, e));
        }
    };
    push(2, &mut n, &mut out);
    let mut q = 3;
    while q <= TRIAL_BOUND && q * q <= n {
        push(q, &mut n, &mut out);
        q += 2;
    }
    if n == 1 {
        return out;
    }
    let mut stack = vec![n];
    let mut large = Vec::new();
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime(m) {
            large.push(m);
            continue;
        }
        let f = pollard_brent(m);
        stack.push(f);
        stack.push(m / f);
    }
    large.sort_unstable();
    for q in large {
        match out.last_mut() {
            Some((last, e)) if *last == q => *e += 1,
            _ => out.push((q, 1)),
        }
    }
    out
}

/// A non-trivial factor of the odd composite `n`.
fn pollard_brent(n: u64) -> u64 {
    if let Some(r) = perfect_square_root(n) {
        return r;
    }
    let f = |x: u64, c: u64| add_mod(mul_mod(x, x, n), c, n);
    for c in 1u64.. {
        let mut y = 2u64;
        let mut r = 1u64;
        let mut q = 1u64;
        let mut g = 1u64;
        let mut x = y;
        let mut ys = y;
        const BATCH: u64 = 128;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y, c);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y, c);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += BATCH;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys, c);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!()
}

fn perfect_square_root(n: u64) -> Option<u64> {
    let r = isqrt(n);
    (r * r == n).then_some(r)
}

/// Distinct prime factors of a 128-bit integer, or `None` when the part
/// left after trial division to 10^5 does not fit in 64 bits.
pub fn prime_factors_u128(mut n: u128) -> Option<Vec<u64>> {
    let mut out = Vec::new();
    if n <= 1 {
        return Some(out);
    }
    let mut q = 2u128;
    while n > u64::MAX as u128 && q <= TRIAL_BOUND as u128 {
        if n.is_multiple_of(q) {
            out.push(q as u64);
            while n.is_multiple_of(q) {
                n /= q;
            }
        }
        q += if q == 2 { 1 } else { 2 };
    }
    if n > u64::MAX as u128 {
        return None;
    }
    out.extend(prime_factors(n as u64));
    out.sort_unstable();
    out.dedup();
    Some(out)
}

pub fn moebius(m: u64) -> i8 {
    assert!(m >= 1, "moebius is defined for positive integers");
    let mut sign = 1;
    for (_, e) in factorize(m) {
        if e > 1 {
            return 0;
        }
        sign = -sign;
    }
    sign
}

pub fn divisors(n: u64) -> Vec<u64> {
    assert!(n >= 1, "divisors of zero");
    let mut out = vec![1u64];
    for (q, e) in factorize(n) {
        let len = out.len();
        let mut pw = 1;
        for _ in 0..e {
            pw *= q;
            for i in 0..len {
                out.push(out[i] * pw);
            }
        }
    }
    out.sort_unstable();
    out
}

pub fn is_squarefree(n: u64) -> bool {
    n >= 1 && factorize(n).iter().all(|&(_, e)| e == 1)
}

/// Distinct prime factors of `n`.
pub fn prime_factors(n: u64) -> Vec<u64> {
    factorize(n).into_iter().map(|(q, _)| q).collect()
}

/// Exponent of the prime `q` in `n` (n > 0).
pub fn valuation(mut n: u64, q: u64) -> u32 {
    let mut v = 0;
    while n.is_multiple_of(q) {
        n /= q;
        v += 1;
    }
    v
}
