//! Dense polynomials over a [`BaseField`], lowest degree first.
//!
//! Residues modulo a monic `f` of degree d are kept as vectors of length d.

use crate::intnum::factorize;

use super::base::BaseField;

pub(crate) fn constant(c: u64, d: usize) -> Vec<u64> {
    let mut v = vec![0; d.max(1)];
    v[0] = c;
    v
}

pub(crate) fn degree(a: &[u64]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

/// Remainder of `a` modulo the monic `f`, padded to length deg f.
pub(crate) fn rem(a: &[u64], f: &[u64], k: &BaseField) -> Vec<u64> {
    let d = f.len() - 1;
    let mut r = a.to_vec();
    if r.len() < d {
        r.resize(d, 0);
    }
    for i in (d..r.len()).rev() {
        let c = r[i];
        if c == 0 {
            continue;
        }
        r[i] = 0;
        for j in 0..d {
            if f[j] != 0 {
                r[i - d + j] = k.sub(r[i - d + j], k.mul(c, f[j]));
            }
        }
    }
    r.truncate(d.max(1));
    if d == 0 {
        r[0] = 0;
    }
    r
}

pub(crate) fn mul(a: &[u64], b: &[u64], k: &BaseField) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if y != 0 {
                out[i + j] = k.add(out[i + j], k.mul(x, y));
            }
        }
    }
    out
}

pub(crate) fn mul_mod(a: &[u64], b: &[u64], f: &[u64], k: &BaseField) -> Vec<u64> {
    rem(&mul(a, b, k), f, k)
}

pub(crate) fn pow_mod(a: &[u64], mut e: u128, f: &[u64], k: &BaseField) -> Vec<u64> {
    let d = f.len() - 1;
    let mut acc = constant(1, d);
    let mut base = rem(a, f, k);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(&acc, &base, f, k);
        }
        e >>= 1;
        if e > 0 {
            base = mul_mod(&base, &base, f, k);
        }
    }
    acc
}

// Monic gcd.
pub(crate) fn gcd(a: &[u64], b: &[u64], k: &BaseField) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    loop {
        match degree(&b) {
            None => break,
            Some(db) => {
                let lead_inv = k.inv(b[db]).expect("nonzero leading coefficient");
                let monic: Vec<u64> = b[..=db].iter().map(|&c| k.mul(c, lead_inv)).collect();
                let r = if degree(&a).is_some_and(|da| da >= db) {
                    rem(&a, &monic, k)
                } else {
                    a.clone()
                };
                a = monic;
                b = r;
            }
        }
    }
    match degree(&a) {
        None => a,
        Some(da) => {
            let lead_inv = k.inv(a[da]).unwrap();
            a[..=da].iter().map(|&c| k.mul(c, lead_inv)).collect()
        }
    }
}

/// Rabin's test: f (monic, degree d) is irreducible iff x^{q^d} ≡ x and
/// gcd(x^{q^{d/r}} - x, f) = 1 for each prime r | d.
pub(crate) fn is_irreducible(f: &[u64], k: &BaseField) -> bool {
    let d = f.len() - 1;
    if d == 0 {
        return false;
    }
    if d == 1 {
        return true;
    }
    if f[0] == 0 {
        return false;
    }
    let q = k.q() as u128;
    let mut x = vec![0u64; d];
    x[1] = 1;
    let prime_divs: Vec<usize> = factorize(d as u128)
        .unwrap()
        .primes()
        .into_iter()
        .map(|r| d / r as usize)
        .collect();
    let mut frob = x.clone();
    for i in 1..=d {
        frob = pow_mod(&frob, q, f, k);
        if prime_divs.contains(&i) {
            let mut diff = frob.clone();
            diff[1] = k.sub(diff[1], 1);
            let g = gcd(f, &diff, k);
            if degree(&g) != Some(0) {
                return false;
            }
        }
    }
    frob == x
}

/// The monic polynomial of degree `d` whose lower coefficients have
/// base-q encoding `code`.
pub(crate) fn monic_from_code(code: u128, d: usize, q: u64) -> Vec<u64> {
    let mut c = code;
    let mut f: Vec<u64> = (0..d)
        .map(|_| {
            let v = (c % q as u128) as u64;
            c /= q as u128;
            v
        })
        .collect();
    f.push(1);
    f
}

/// First monic irreducible polynomial of degree `d` in encoding order.
pub(crate) fn first_irreducible(k: &BaseField, d: u32) -> Vec<u64> {
    (0u128..)
        .map(|code| monic_from_code(code, d as usize, k.q()))
        .find(|f| is_irreducible(f, k))
        .expect("irreducible polynomials exist in every degree")
}
