//! Integer services: primality, factorization and the multiplicative
//! functions ω, W = 2^ω, θ = φ(m)/m, φ, μ and Rad.
//!
//! Everything here works on `u128`, which covers every group order
//! q^n - 1 the rest of the crate is willing to handle.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};

const TRIAL_BOUND: u64 = 1 << 12;

fn small_primes() -> &'static [u64] {
    static SMALL: OnceLock<Vec<u64>> = OnceLock::new();
    SMALL.get_or_init(|| primes_up_to(TRIAL_BOUND))
}

/// Complete prime factorization of a positive integer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Factorization {
    value: u128,
    factors: Vec<(u128, u32)>,
}

impl Factorization {
    /// Builds a factorization from (prime, exponent) pairs, merging repeats.
    /// The primes are trusted; use [`factorize`] when they are not known.
    pub fn from_factors(mut pairs: Vec<(u128, u32)>) -> Self {
        pairs.retain(|&(_, e)| e > 0);
        pairs.sort_unstable();
        let mut factors: Vec<(u128, u32)> = Vec::with_capacity(pairs.len());
        for (p, e) in pairs {
            match factors.last_mut() {
                Some(last) if last.0 == p => last.1 += e,
                _ => factors.push((p, e)),
            }
        }
        let value = factors
            .iter()
            .fold(1u128, |acc, &(p, e)| acc * p.pow(e));
        Factorization { value, factors }
    }

    pub fn value(&self) -> u128 {
        self.value
    }

    pub fn factors(&self) -> &[(u128, u32)] {
        &self.factors
    }

    /// Distinct primes in increasing order.
    pub fn primes(&self) -> Vec<u128> {
        self.factors.iter().map(|&(p, _)| p).collect()
    }

    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    /// W(m) = 2^ω(m), the number of square-free divisors.
    pub fn big_w(&self) -> u128 {
        1u128 << self.omega()
    }

    /// θ(m) = φ(m)/m = ∏ (1 - 1/p).
    pub fn theta(&self) -> BigRational {
        theta_of_primes(self.factors.iter().map(|&(p, _)| p))
    }

    pub fn euler_phi(&self) -> u128 {
        self.factors
            .iter()
            .fold(1u128, |acc, &(p, e)| acc * (p - 1) * p.pow(e - 1))
    }

    pub fn radical(&self) -> u128 {
        self.factors.iter().map(|&(p, _)| p).product()
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    /// Square-free divisors in increasing order.
    pub fn squarefree_divisors(&self) -> Vec<u128> {
        let mut out = vec![1u128];
        for &(p, _) in &self.factors {
            let extra: Vec<u128> = out.iter().map(|d| d * p).collect();
            out.extend(extra);
        }
        out.sort_unstable();
        out
    }

    /// Factorization of a divisor `d` of this value, reusing the known primes.
    pub fn of_divisor(&self, d: u128) -> Option<Factorization> {
        if d == 0 || self.value % d != 0 {
            return None;
        }
        let mut rest = d;
        let mut pairs = Vec::new();
        for &(p, _) in &self.factors {
            let mut e = 0;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            if e > 0 {
                pairs.push((p, e));
            }
        }
        Some(Factorization::from_factors(pairs))
    }
}

/// θ over a set of distinct primes.
pub fn theta_of_primes<I: IntoIterator<Item = u128>>(primes: I) -> BigRational {
    primes.into_iter().fold(BigRational::one(), |acc, p| {
        acc * BigRational::new(BigInt::from(p - 1), BigInt::from(p))
    })
}

/// Möbius function; 0 for non-square-free input and for 0.
pub fn moebius(m: u128) -> i8 {
    let Ok(f) = factorize(m) else { return 0 };
    if !f.is_squarefree() {
        0
    } else if f.omega() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn gcd(a: u128, b: u128) -> u128 {
    a.gcd(&b)
}

fn add_mod(a: u128, b: u128, m: u128) -> u128 {
    // a, b < m
    if a >= m - b {
        a - (m - b)
    } else {
        a + b
    }
}

pub fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    if m <= u64::MAX as u128 {
        return (a % m) * (b % m) % m;
    }
    let mut a = a % m;
    let mut b = b % m;
    let mut acc = 0u128;
    while b > 0 {
        if b & 1 == 1 {
            acc = add_mod(acc, a, m);
        }
        a = add_mod(a, a, m);
        b >>= 1;
    }
    acc
}

pub fn pow_mod(mut base: u128, mut exp: u128, m: u128) -> u128 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u128;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Miller-Rabin with the first twelve prime bases: deterministic below
/// 3.18·10^23 (every q^n - 1 with q^n ≤ 10^21), a strong probable-prime
/// test above that.
pub fn is_prime(n: u128) -> bool {
    const BASES: [u128; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n == b {
            return true;
        }
        if n % b == 0 {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x.checked_mul(x).is_none_or(|v| v > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|v| v <= n) {
        x += 1;
    }
    x
}

// Brent's variant of Pollard rho; None when the cycle collapses onto n.
fn brent(n: u128, c: u128) -> Option<u128> {
    let step = |x: u128| add_mod(mul_mod(x, x, n), c, n);
    const BATCH: u64 = 128;
    let (mut x, mut y, mut ys) = (2u128, 2u128, 2u128);
    let (mut g, mut r, mut q) = (1u128, 1u64, 1u128);
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = step(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..BATCH.min(r - k) {
                y = step(y);
                q = mul_mod(q, x.abs_diff(y), n);
            }
            g = gcd(q, n);
            k += BATCH;
        }
        r *= 2;
    }
    if g == n {
        loop {
            ys = step(ys);
            g = gcd(x.abs_diff(ys), n);
            if g > 1 {
                break;
            }
        }
    }
    (g != n).then_some(g)
}

fn split_into(n: u128, out: &mut Vec<(u128, u32)>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push((n, 1));
        return;
    }
    let r = isqrt(n);
    if r * r == n {
        split_into(r, out);
        split_into(r, out);
        return;
    }
    let d = (1u128..)
        .find_map(|c| brent(n, c))
        .expect("rho eventually splits a composite");
    split_into(d, out);
    split_into(n / d, out);
}

/// Complete factorization of `m`: trial division by small primes, then
/// Pollard-Brent rho with fixed increments and Miller-Rabin certification.
pub fn factorize(m: u128) -> Result<Factorization> {
    if m == 0 {
        return Err(Error::ZeroFactorization);
    }
    let mut rest = m;
    let mut pairs = Vec::new();
    for &p in small_primes() {
        let p = p as u128;
        if p * p > rest {
            break;
        }
        let mut e = 0;
        while rest % p == 0 {
            rest /= p;
            e += 1;
        }
        if e > 0 {
            pairs.push((p, e));
        }
    }
    split_into(rest, &mut pairs);
    Ok(Factorization::from_factors(pairs))
}

/// Factorization of q^n - 1, obtained by factoring each cyclotomic value
/// Φ_d(q), d | n, separately.
pub fn factorize_power_minus_one(q: u128, n: u32) -> Result<Factorization> {
    if n == 0 || q < 2 {
        return Err(Error::ZeroFactorization);
    }
    q.checked_pow(n).ok_or(Error::TooLarge {
        what: "q^n",
        size: u128::MAX,
        bound: u128::MAX,
    })?;
    let mut cyclo: Vec<(u32, u128)> = Vec::new();
    let mut pairs = Vec::new();
    for d in (1..=n).filter(|d| n % d == 0) {
        let mut v = q.pow(d) - 1;
        for &(e, phi) in &cyclo {
            if d % e == 0 {
                v /= phi;
            }
        }
        cyclo.push((d, v));
        pairs.extend_from_slice(factorize(v)?.factors());
    }
    Ok(Factorization::from_factors(pairs))
}

/// Decomposes q = p^h with p prime.
pub fn as_prime_power(q: u128) -> Option<(u128, u32)> {
    if q < 2 {
        return None;
    }
    let f = factorize(q).ok()?;
    match f.factors() {
        [(p, h)] => Some((*p, *h)),
        _ => None,
    }
}

/// Sieve of Eratosthenes.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// The first `count` primes.
pub fn first_primes(count: usize) -> Vec<u64> {
    if count == 0 {
        return Vec::new();
    }
    let x = count.max(6) as f64;
    let bound = (x * (x.ln() + x.ln().ln())).ceil() as u64 + 16;
    let mut ps = primes_up_to(bound);
    ps.truncate(count);
    ps
}

/// The i-th prime, with p_1 = 2.
pub fn nth_prime(i: usize) -> u64 {
    assert!(i >= 1, "primes are indexed from 1");
    first_primes(i)[i - 1]
}

/// Product of the first `count` primes.
pub fn primorial(count: usize) -> BigUint {
    first_primes(count)
        .into_iter()
        .fold(BigUint::one(), |acc, p| acc * p)
}

/// Prime powers in [lo, hi], increasing.
pub fn prime_powers_in(lo: u64, hi: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for p in primes_up_to(hi) {
        let mut pk = p;
        loop {
            if pk >= lo {
                out.push(pk);
            }
            match pk.checked_mul(p) {
                Some(next) if next <= hi => pk = next,
                _ => break,
            }
        }
    }
    out.sort_unstable();
    out
}
