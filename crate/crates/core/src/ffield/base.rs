//! The base field F_q = F_p[z]/(g).
//!
//! Elements are encoded as integers in [0, q) whose base-p digits are the
//! coefficients in the power basis of z, lowest degree first. Prime fields
//! use modular arithmetic directly; proper extensions use exp/log tables
//! built from the least primitive element in encoding order.

use crate::error::{Error, Result};
use crate::intnum::{factorize, is_prime, Factorization};

use super::poly;

/// Largest q backed by exp/log tables.
pub const TABLE_LIMIT: u64 = 1 << 24;

#[derive(Debug, Clone)]
struct Tables {
    exp: Vec<u32>,
    log: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct BaseField {
    p: u64,
    h: u32,
    q: u64,
    modulus: Vec<u64>,
    tables: Option<Tables>,
    order_fact: Factorization,
}

impl BaseField {
    pub fn prime(p: u64) -> Result<Self> {
        if !is_prime(p as u128) {
            return Err(Error::NotPrime(p as u128));
        }
        Ok(BaseField {
            p,
            h: 1,
            q: p,
            modulus: vec![0, 1],
            tables: None,
            order_fact: factorize(p as u128 - 1)?,
        })
    }

    pub fn new(p: u64, h: u32) -> Result<Self> {
        if h == 0 {
            return Err(Error::InvalidDegree(0));
        }
        let prime = Self::prime(p)?;
        if h == 1 {
            return Ok(prime);
        }
        let q = p
            .checked_pow(h)
            .filter(|&q| q <= TABLE_LIMIT)
            .ok_or(Error::FieldTooLarge { p, degree: h })?;
        let modulus = poly::first_irreducible(&prime, h);
        let order_fact = factorize(q as u128 - 1)?;
        let order = q - 1;
        let cofactors: Vec<u128> = order_fact
            .primes()
            .into_iter()
            .map(|l| order as u128 / l)
            .collect();
        let one = poly::constant(1, h as usize);
        let gen = (1..q)
            .map(|code| digits_of(code, p, h))
            .find(|g| {
                cofactors
                    .iter()
                    .all(|&c| poly::pow_mod(g, c, &modulus, &prime) != one)
            })
            .expect("F_q* is cyclic");
        let mut exp = vec![0u32; order as usize];
        let mut log = vec![u32::MAX; q as usize];
        let mut cur = one.clone();
        for (k, slot) in exp.iter_mut().enumerate() {
            let code = code_of(&cur, p);
            *slot = code as u32;
            log[code as usize] = k as u32;
            cur = poly::mul_mod(&cur, &gen, &modulus, &prime);
        }
        Ok(BaseField {
            p,
            h,
            q,
            modulus,
            tables: Some(Tables { exp, log }),
            order_fact,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn h(&self) -> u32 {
        self.h
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Defining polynomial of F_q over F_p (x for a prime field).
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// Factorization of q - 1.
    pub fn order_factorization(&self) -> &Factorization {
        &self.order_fact
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        if self.h == 1 {
            let s = a + b;
            if s >= self.p {
                s - self.p
            } else {
                s
            }
        } else if self.p == 2 {
            a ^ b
        } else {
            let (mut a, mut b, mut place, mut out) = (a, b, 1u64, 0u64);
            for _ in 0..self.h {
                out += ((a % self.p + b % self.p) % self.p) * place;
                a /= self.p;
                b /= self.p;
                place *= self.p;
            }
            out
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if self.h == 1 {
            if a == 0 {
                0
            } else {
                self.p - a
            }
        } else if self.p == 2 {
            a
        } else {
            let (mut a, mut place, mut out) = (a, 1u64, 0u64);
            for _ in 0..self.h {
                out += ((self.p - a % self.p) % self.p) * place;
                a /= self.p;
                place *= self.p;
            }
            out
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        match &self.tables {
            None => ((a as u128 * b as u128) % self.p as u128) as u64,
            Some(t) => {
                if a == 0 || b == 0 {
                    return 0;
                }
                let s = t.log[a as usize] as u64 + t.log[b as usize] as u64;
                t.exp[(s % (self.q - 1)) as usize] as u64
            }
        }
    }

    pub fn pow(&self, a: u64, e: u128) -> u64 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        match &self.tables {
            None => crate::intnum::pow_mod(a as u128, e, self.p as u128) as u64,
            Some(t) => {
                let k = (t.log[a as usize] as u128 * (e % (self.q as u128 - 1))) % (self.q as u128 - 1);
                t.exp[k as usize] as u64
            }
        }
    }

    pub fn inv(&self, a: u64) -> Result<u64> {
        if a == 0 {
            return Err(Error::ZeroInverse);
        }
        Ok(self.pow(a, self.q as u128 - 2))
    }

    /// The integer n·1 of the field.
    pub fn from_int(&self, n: u64) -> u64 {
        n % self.p
    }

    pub fn is_primitive(&self, a: u64) -> bool {
        if a == 0 {
            return false;
        }
        let order = self.q as u128 - 1;
        self.order_fact
            .primes()
            .into_iter()
            .all(|l| self.pow(a, order / l) != 1)
    }

    /// Least primitive element in encoding order.
    pub fn least_primitive(&self) -> u64 {
        if self.q == 2 {
            return 1;
        }
        (1..self.q).find(|&a| self.is_primitive(a)).expect("F_q* is cyclic")
    }

    /// Absolute trace F_q → F_p, returned as an integer in [0, p).
    pub fn abs_trace(&self, a: u64) -> u64 {
        let mut acc = 0;
        let mut cur = a;
        for _ in 0..self.h {
            acc = self.add(acc, cur);
            cur = self.pow(cur, self.p as u128);
        }
        acc
    }

    /// Coordinates over F_p, lowest degree first.
    pub fn digits(&self, a: u64) -> Vec<u64> {
        digits_of(a, self.p, self.h)
    }

    pub fn from_digits(&self, d: &[u64]) -> u64 {
        code_of(d, self.p)
    }
}

pub(crate) fn digits_of(mut code: u64, p: u64, h: u32) -> Vec<u64> {
    (0..h)
        .map(|_| {
            let d = code % p;
            code /= p;
            d
        })
        .collect()
}

pub(crate) fn code_of(d: &[u64], p: u64) -> u64 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}
