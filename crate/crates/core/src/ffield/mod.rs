//! Arithmetic in F_{q^n} = F_q[x]/(f), with F_q = F_p[z]/(g).
//!
//! Both moduli are the first monic irreducible polynomial of the required
//! degree in encoding order, so a context is a pure function of (p, h, n).
//! F_q sits inside F_{q^n} as the constant residues.

mod base;
pub(crate) mod poly;

use std::sync::Arc;

pub use base::{BaseField, TABLE_LIMIT};

use crate::error::{Error, Result};
use crate::intnum::{factorize, factorize_power_minus_one, is_prime, Factorization};

/// An element of F_{q^n}: n coefficients in F_q (each an encoded integer in
/// [0, q)) with respect to the power basis 1, x, ..., x^{n-1}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement(Vec<u64>);

impl FieldElement {
    pub fn coeffs(&self) -> &[u64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

#[derive(Debug, Clone)]
pub struct FieldContext {
    base: Arc<BaseField>,
    n: u32,
    modulus: Vec<u64>,
    size: u128,
    order_fact: Arc<Factorization>,
    cofactors: Vec<u128>,
    basis_traces: Vec<u64>,
}

impl FieldContext {
    /// Deterministic context for F_{(p^h)^n}.
    pub fn build(p: u64, h: u32, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDegree(0));
        }
        if !is_prime(p as u128) {
            return Err(Error::NotPrime(p as u128));
        }
        let base = Arc::new(BaseField::new(p, h)?);
        let modulus = poly::first_irreducible(&base, n);
        let fact = Self::group_order(&base, n)?;
        Ok(Self::assemble(base, modulus, Arc::new(fact)))
    }

    /// Context over an explicit monic irreducible modulus.
    pub fn with_modulus(base: Arc<BaseField>, modulus: Vec<u64>) -> Result<Self> {
        let n = modulus.len().checked_sub(1).ok_or(Error::NotMonic)? as u32;
        if n == 0 || modulus.last() != Some(&1) {
            return Err(Error::NotMonic);
        }
        if !poly::is_irreducible(&modulus, &base) {
            return Err(Error::Reducible);
        }
        let fact = Self::group_order(&base, n)?;
        Ok(Self::assemble(base, modulus, Arc::new(fact)))
    }

    /// As [`with_modulus`](Self::with_modulus) without the irreducibility
    /// check, reusing a known factorization of q^n - 1.
    pub(crate) fn with_modulus_unchecked(
        base: Arc<BaseField>,
        modulus: Vec<u64>,
        order_fact: Arc<Factorization>,
    ) -> Self {
        Self::assemble(base, modulus, order_fact)
    }

    fn group_order(base: &BaseField, n: u32) -> Result<Factorization> {
        let q = base.q() as u128;
        if q.checked_pow(n).is_none() {
            return Err(Error::FieldTooLarge {
                p: base.p(),
                degree: base.h() * n,
            });
        }
        factorize_power_minus_one(q, n)
    }

    fn assemble(base: Arc<BaseField>, modulus: Vec<u64>, order_fact: Arc<Factorization>) -> Self {
        let n = (modulus.len() - 1) as u32;
        let size = (base.q() as u128).pow(n);
        let order = size - 1;
        let cofactors = order_fact.primes().into_iter().map(|l| order / l).collect();
        let mut ctx = FieldContext {
            base,
            n,
            modulus,
            size,
            order_fact,
            cofactors,
            basis_traces: Vec::new(),
        };
        ctx.basis_traces = (0..n as usize)
            .map(|i| {
                let mut v = vec![0u64; n as usize];
                v[i] = 1;
                let t = ctx.trace_to_base(&FieldElement(poly::rem(&v, &ctx.modulus, &ctx.base)));
                t.0[0]
            })
            .collect();
        ctx
    }

    pub fn base(&self) -> &BaseField {
        &self.base
    }

    pub fn base_arc(&self) -> &Arc<BaseField> {
        &self.base
    }

    pub fn p(&self) -> u64 {
        self.base.p()
    }

    pub fn h(&self) -> u32 {
        self.base.h()
    }

    pub fn q(&self) -> u64 {
        self.base.q()
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// q^n.
    pub fn size(&self) -> u128 {
        self.size
    }

    /// q^n - 1.
    pub fn order(&self) -> u128 {
        self.size - 1
    }

    pub fn order_factorization(&self) -> &Factorization {
        &self.order_fact
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement(vec![0; self.n as usize])
    }

    pub fn one(&self) -> FieldElement {
        self.from_base(1)
    }

    /// Embeds c ∈ F_q.
    pub fn from_base(&self, c: u64) -> FieldElement {
        let mut v = vec![0; self.n as usize];
        v[0] = c;
        FieldElement(v)
    }

    /// The residue class of x, a root of the modulus.
    pub fn root(&self) -> FieldElement {
        FieldElement(poly::rem(&[0, 1], &self.modulus, &self.base))
    }

    /// Validates F_q coefficients into an element.
    pub fn element(&self, coeffs: Vec<u64>) -> Result<FieldElement> {
        if coeffs.len() != self.n as usize {
            return Err(Error::MalformedWitness(format!(
                "expected {} coefficients, got {}",
                self.n,
                coeffs.len()
            )));
        }
        if let Some(&c) = coeffs.iter().find(|&&c| c >= self.q()) {
            return Err(Error::MalformedWitness(format!("coefficient {c} outside F_q")));
        }
        Ok(FieldElement(coeffs))
    }

    /// Coordinates over F_p: h·n residues, F_q digit blocks in basis order.
    pub fn prime_coords(&self, a: &FieldElement) -> Vec<u64> {
        a.0.iter().flat_map(|&c| self.base.digits(c)).collect()
    }

    pub fn from_prime_coords(&self, coords: &[u64]) -> Result<FieldElement> {
        let h = self.h() as usize;
        if coords.len() != h * self.n as usize {
            return Err(Error::MalformedWitness(format!(
                "expected {} coordinates, got {}",
                h * self.n as usize,
                coords.len()
            )));
        }
        if let Some(&c) = coords.iter().find(|&&c| c >= self.p()) {
            return Err(Error::MalformedWitness(format!("coordinate {c} outside F_p")));
        }
        Ok(FieldElement(
            coords.chunks(h).map(|d| self.base.from_digits(d)).collect(),
        ))
    }

    /// Index of an element in [0, q^n): Σ c_i q^i.
    pub fn index_of(&self, a: &FieldElement) -> u128 {
        let q = self.q() as u128;
        a.0.iter().rev().fold(0u128, |acc, &c| acc * q + c as u128)
    }

    pub fn element_at(&self, mut index: u128) -> FieldElement {
        let q = self.q() as u128;
        FieldElement(
            (0..self.n)
                .map(|_| {
                    let c = (index % q) as u64;
                    index /= q;
                    c
                })
                .collect(),
        )
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        FieldElement(a.0.iter().zip(&b.0).map(|(&x, &y)| self.base.add(x, y)).collect())
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        FieldElement(a.0.iter().zip(&b.0).map(|(&x, &y)| self.base.sub(x, y)).collect())
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        FieldElement(a.0.iter().map(|&x| self.base.neg(x)).collect())
    }

    pub fn scale(&self, c: u64, a: &FieldElement) -> FieldElement {
        FieldElement(a.0.iter().map(|&x| self.base.mul(c, x)).collect())
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        FieldElement(poly::mul_mod(&a.0, &b.0, &self.modulus, &self.base))
    }

    pub fn pow(&self, a: &FieldElement, e: u128) -> FieldElement {
        FieldElement(poly::pow_mod(&a.0, e, &self.modulus, &self.base))
    }

    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement> {
        if a.is_zero() {
            return Err(Error::ZeroInverse);
        }
        Ok(self.pow(a, self.size - 2))
    }

    /// α ↦ α^q.
    pub fn frobenius(&self, a: &FieldElement) -> FieldElement {
        self.pow(a, self.q() as u128)
    }

    /// Membership in the embedded F_q: α^q = α.
    pub fn is_in_base(&self, a: &FieldElement) -> bool {
        &self.frobenius(a) == a
    }

    /// Tr(α) = Σ_{i<n} α^{q^i}, as an element of F_{q^n} lying in F_q.
    pub fn trace_to_base(&self, a: &FieldElement) -> FieldElement {
        let mut acc = self.zero();
        let mut cur = a.clone();
        for _ in 0..self.n {
            acc = self.add(&acc, &cur);
            cur = self.frobenius(&cur);
        }
        acc
    }

    /// Tr(α) as an F_q code, using linearity over precomputed Tr(x^i).
    pub fn trace(&self, a: &FieldElement) -> u64 {
        a.0.iter()
            .zip(&self.basis_traces)
            .fold(0, |acc, (&c, &t)| self.base.add(acc, self.base.mul(c, t)))
    }

    /// α + α⁻¹, or None for α = 0.
    pub fn plus_inverse(&self, a: &FieldElement) -> Option<FieldElement> {
        self.inv(a).ok().map(|ai| self.add(a, &ai))
    }

    pub fn element_order(&self, a: &FieldElement) -> Result<u128> {
        if a.is_zero() {
            return Err(Error::ZeroOrder);
        }
        let one = self.one();
        let mut order = self.order();
        for &(l, e) in self.order_fact.factors() {
            for _ in 0..e {
                if self.pow(a, order / l) == one {
                    order /= l;
                } else {
                    break;
                }
            }
        }
        Ok(order)
    }

    /// α is e-free iff α^{(q^n-1)/ℓ} ≠ 1 for every prime ℓ | e.
    /// The zero element is never e-free.
    pub fn is_e_free(&self, a: &FieldElement, e: u128) -> Result<bool> {
        let order = self.order();
        if e == 0 || order % e != 0 {
            return Err(Error::NotDivisor { e, order });
        }
        if a.is_zero() {
            return Ok(false);
        }
        let one = self.one();
        Ok(self
            .order_fact
            .primes()
            .into_iter()
            .zip(&self.cofactors)
            .filter(|(l, _)| e % l == 0)
            .all(|(_, &c)| self.pow(a, c) != one))
    }

    pub fn is_primitive(&self, a: &FieldElement) -> bool {
        if a.is_zero() {
            return false;
        }
        let one = self.one();
        self.cofactors.iter().all(|&c| self.pow(a, c) != one)
    }

    /// Least primitive element in index order.
    pub fn least_primitive_element(&self) -> FieldElement {
        (1..self.size)
            .map(|i| self.element_at(i))
            .find(|a| self.is_primitive(a))
            .expect("F_{q^n}* is cyclic")
    }

    /// Discrete-log table for a fixed generator; refuses fields above `bound`.
    pub fn log_table(&self, bound: u128) -> Result<LogTable> {
        if self.size > bound {
            return Err(Error::TooLarge {
                what: "discrete-log table",
                size: self.size,
                bound,
            });
        }
        let generator = self.least_primitive_element();
        let order = self.order() as usize;
        let mut exp = vec![0u32; order];
        let mut log = vec![u32::MAX; self.size as usize];
        let mut cur = self.one();
        for (k, slot) in exp.iter_mut().enumerate() {
            let idx = self.index_of(&cur) as usize;
            *slot = idx as u32;
            log[idx] = k as u32;
            cur = self.mul(&cur, &generator);
        }
        Ok(LogTable { generator, exp, log })
    }
}

/// Powers and discrete logarithms of a fixed generator, indexed by
/// [`FieldContext::index_of`].
#[derive(Debug, Clone)]
pub struct LogTable {
    generator: FieldElement,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl LogTable {
    pub fn generator(&self) -> &FieldElement {
        &self.generator
    }

    /// log_g of the element with the given index; None for zero.
    pub fn log(&self, index: usize) -> Option<u32> {
        let l = self.log[index];
        (l != u32::MAX).then_some(l)
    }

    /// Index of g^k.
    pub fn exp(&self, k: usize) -> usize {
        self.exp[k % self.exp.len()] as usize
    }
}

/// Least positive primitive root modulo the prime q.
pub fn least_primitive_root(q: u128) -> Result<u128> {
    if !is_prime(q) || q > u64::MAX as u128 {
        return Err(Error::NotPrime(q));
    }
    Ok(BaseField::prime(q as u64)?.least_primitive() as u128)
}

/// Whether the monic `f` (coefficients in F_q, lowest first) is primitive:
/// irreducible with x of order q^n - 1 modulo f.
pub fn is_primitive_polynomial(base: &BaseField, f: &[u64]) -> Result<bool> {
    let n = f.len().saturating_sub(1) as u32;
    if n == 0 || f.last() != Some(&1) {
        return Err(Error::NotMonic);
    }
    let fact = factorize_power_minus_one(base.q() as u128, n)?;
    is_primitive_polynomial_with(base, f, &fact)
}

/// As [`is_primitive_polynomial`], reusing the factorization of q^n - 1.
pub fn is_primitive_polynomial_with(base: &BaseField, f: &[u64], order_fact: &Factorization) -> Result<bool> {
    let n = f.len().saturating_sub(1);
    if n == 0 || f.last() != Some(&1) {
        return Err(Error::NotMonic);
    }
    if f.iter().any(|&c| c >= base.q()) {
        return Err(Error::NotMonic);
    }
    // The norm of a root is (-1)^n f(0) and must generate F_q*.
    let norm = if n % 2 == 0 { f[0] } else { base.neg(f[0]) };
    if !base.is_primitive(norm) {
        return Ok(false);
    }
    if !poly::is_irreducible(f, base) {
        return Ok(false);
    }
    let order = order_fact.value();
    let one = poly::constant(1, n);
    let x = poly::rem(&[0, 1], f, base);
    Ok(order_fact
        .primes()
        .into_iter()
        .all(|l| poly::pow_mod(&x, order / l, f, base) != one))
}

/// φ(m) for convenience at call sites that only hold m.
pub fn euler_phi(m: u128) -> Result<u128> {
    Ok(factorize(m)?.euler_phi())
}
