//! Mixed character sums
//!
//!   S(χ_{d₁}, χ_{d₂}, u) = Σ_{α ≠ 0} χ_{d₁}(α) χ_{d₂}(α + α⁻¹) ψ̂₀(uα)
//!
//! the counting formula for N_a(e₁, e₂) built from them, and a brute-force
//! counter that only uses field arithmetic. Multiplicative characters vanish
//! at 0 for every order, the trivial one included, so α with α² + 1 = 0 never
//! contribute.

use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ffield::{FieldContext, LogTable};
use crate::intnum::{gcd, moebius, Factorization};

/// Default bound on q^n for the log-table based engine.
pub const CHARSUM_LIMIT: u128 = 1_000_000;
/// Default bound on q^n for the brute-force counter.
pub const BRUTE_LIMIT: u128 = 10_000_000;

/// χ(g^k) = exp(2πi·jk/d) for the engine's fixed generator g.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MultCharacter {
    pub order: u128,
    pub index: u128,
}

impl MultCharacter {
    pub fn trivial() -> Self {
        MultCharacter { order: 1, index: 0 }
    }

    /// Exponent c with χ(g^k) = ζ_G^{ck}, G = q^n - 1.
    pub fn exponent(&self, group_order: u128) -> u128 {
        self.index * (group_order / self.order)
    }

    /// Characters of exact order d.
    pub fn of_order(d: u128) -> Vec<MultCharacter> {
        if d == 1 {
            return vec![MultCharacter::trivial()];
        }
        (1..d)
            .filter(|&j| gcd(j, d) == 1)
            .map(|j| MultCharacter { order: d, index: j })
            .collect()
    }
}

/// Compensated complex accumulator.
#[derive(Clone, Copy, Default)]
struct Kahan {
    sum: Complex64,
    comp: Complex64,
}

impl Kahan {
    fn add(&mut self, x: Complex64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

fn unit_roots(m: usize) -> Vec<Complex64> {
    (0..m)
        .map(|k| Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / m as f64))
        .collect()
}

/// Per element g^k: log of g^k + g^{-k} (None when zero) and Tr(g^k).
struct ElementData {
    log_plus_inv: Vec<Option<u32>>,
    trace: Vec<u32>,
}

/// Sums over all characters of orders (d₁, d₂), indexed by u.
type OrderPairTable = Vec<Vec<Vec<Complex64>>>;

pub struct CharSumEngine<'a> {
    ctx: &'a FieldContext,
    table: LogTable,
    group_order: usize,
    q: usize,
    roots_g: Vec<Complex64>,
    roots_p: Vec<Complex64>,
    /// psi_code[u * q + t] = Tr_{F_q/F_p}(u t).
    psi_code: Vec<u32>,
    data: ElementData,
    orders: Vec<u128>,
    characters: Vec<MultCharacter>,
    by_orders: OnceLock<OrderPairTable>,
}

impl<'a> CharSumEngine<'a> {
    pub fn new(ctx: &'a FieldContext, bound: u128) -> Result<Self> {
        let table = ctx.log_table(bound)?;
        let g = ctx.order() as usize;
        let q = ctx.q() as usize;
        let base = ctx.base();
        let mut psi_code = vec![0u32; q * q];
        for u in 0..q {
            for t in 0..q {
                psi_code[u * q + t] = base.abs_trace(base.mul(u as u64, t as u64)) as u32;
            }
        }
        let (log_plus_inv, trace): (Vec<_>, Vec<_>) = (0..g)
            .into_par_iter()
            .map(|k| {
                let a = ctx.element_at(table.exp(k) as u128);
                let b = ctx.plus_inverse(&a).expect("nonzero");
                let lb = table.log(ctx.index_of(&b) as usize);
                (lb, ctx.trace(&a) as u32)
            })
            .unzip();
        let orders = ctx.order_factorization().squarefree_divisors();
        let characters = orders.iter().flat_map(|&d| MultCharacter::of_order(d)).collect();
        Ok(CharSumEngine {
            ctx,
            table,
            group_order: g,
            q,
            roots_g: unit_roots(g),
            roots_p: unit_roots(ctx.p() as usize),
            psi_code,
            data: ElementData { log_plus_inv, trace },
            orders,
            characters,
            by_orders: OnceLock::new(),
        })
    }

    pub fn context(&self) -> &FieldContext {
        self.ctx
    }

    pub fn log_table(&self) -> &LogTable {
        &self.table
    }

    /// Square-free divisors of q^n - 1, ascending.
    pub fn squarefree_orders(&self) -> &[u128] {
        &self.orders
    }

    /// Every character whose order is a square-free divisor of q^n - 1.
    pub fn characters(&self) -> &[MultCharacter] {
        &self.characters
    }

    /// χ(α) for α given by its field index.
    pub fn eval_mult(&self, chi: MultCharacter, index: usize) -> Complex64 {
        match self.table.log(index) {
            None => Complex64::new(0.0, 0.0),
            Some(k) => {
                let c = chi.exponent(self.group_order as u128) as usize;
                self.roots_g[(c * k as usize) % self.group_order]
            }
        }
    }

    /// ψ₀(x) for x ∈ F_q.
    pub fn psi0(&self, x: u64) -> Complex64 {
        self.roots_p[self.ctx.base().abs_trace(x) as usize]
    }

    /// ψ̂₀(uα) for u ∈ F_q and α given by its field index.
    pub fn psi_hat(&self, u: u64, index: usize) -> Complex64 {
        let t = self.ctx.trace(&self.ctx.element_at(index as u128)) as usize;
        self.roots_p[self.psi_code[u as usize * self.q + t] as usize]
    }

    // A[t] = Σ_{Tr(α) = t} χ₁(α) χ₂(α + α⁻¹). With `partner` false the
    // second factor is dropped entirely, zeros of α² + 1 included.
    fn trace_profile(&self, c1: usize, c2: usize, partner: bool) -> Vec<Complex64> {
        let g = self.group_order;
        let mut acc = vec![Kahan::default(); self.q];
        for k in 0..g {
            let e = match self.data.log_plus_inv[k] {
                _ if !partner => (c1 * k) % g,
                Some(lb) => (c1 * k + c2 * lb as usize) % g,
                None => continue,
            };
            acc[self.data.trace[k] as usize].add(self.roots_g[e]);
        }
        acc.into_iter().map(|k| k.sum).collect()
    }

    fn sums_from_profile(&self, profile: &[Complex64]) -> Vec<Complex64> {
        (0..self.q)
            .map(|u| {
                let mut s = Kahan::default();
                for (t, &v) in profile.iter().enumerate() {
                    s.add(v * self.roots_p[self.psi_code[u * self.q + t] as usize]);
                }
                s.sum
            })
            .collect()
    }

    /// S(χ₁, χ₂, u) for every u ∈ F_q.
    pub fn mixed_sums(&self, chi1: MultCharacter, chi2: MultCharacter) -> Vec<Complex64> {
        let g = self.group_order as u128;
        let c1 = (chi1.exponent(g) % g) as usize;
        let c2 = (chi2.exponent(g) % g) as usize;
        self.sums_from_profile(&self.trace_profile(c1, c2, true))
    }

    /// Σ_{α ≠ 0} χ(α) ψ̂₀(uα) for every u: the sum with no factor at
    /// α + α⁻¹ at all.
    pub fn multiplicative_sums(&self, chi: MultCharacter) -> Vec<Complex64> {
        let g = self.group_order as u128;
        let c = (chi.exponent(g) % g) as usize;
        self.sums_from_profile(&self.trace_profile(c, 0, false))
    }

    pub fn mixed_sum(&self, chi1: MultCharacter, chi2: MultCharacter, u: u64) -> Complex64 {
        self.mixed_sums(chi1, chi2)[u as usize]
    }

    fn order_pairs(&self) -> &OrderPairTable {
        self.by_orders.get_or_init(|| {
            self.orders
                .par_iter()
                .map(|&d1| {
                    self.orders
                        .iter()
                        .map(|&d2| {
                            let mut total = vec![Complex64::new(0.0, 0.0); self.q];
                            for x1 in MultCharacter::of_order(d1) {
                                for x2 in MultCharacter::of_order(d2) {
                                    for (t, s) in total.iter_mut().zip(self.mixed_sums(x1, x2)) {
                                        *t += s;
                                    }
                                }
                            }
                            total
                        })
                        .collect()
                })
                .collect()
        })
    }

    fn check_divisor(&self, e: u128) -> Result<Factorization> {
        self.ctx
            .order_factorization()
            .of_divisor(e)
            .ok_or(Error::NotDivisor { e, order: self.ctx.order() })
    }

    /// Evaluates the counting formula for N_a(e₁, e₂).
    pub fn count_by_formula(&self, a: u64, e1: u128, e2: u128) -> Result<f64> {
        let f1 = self.check_divisor(e1)?;
        let f2 = self.check_divisor(e2)?;
        let pairs = self.order_pairs();
        let pos = |d: u128| self.orders.binary_search(&d).expect("square-free divisor");
        let base = self.ctx.base();
        let minus_a = base.neg(a);
        let weights: Vec<Complex64> = (0..self.q as u64).map(|u| self.psi0(base.mul(minus_a, u))).collect();
        let mut total = Kahan::default();
        for d1 in f1.squarefree_divisors() {
            for d2 in f2.squarefree_divisors() {
                let mu = (moebius(d1) * moebius(d2)) as f64;
                let phi = (euler_phi_sf(d1) * euler_phi_sf(d2)) as f64;
                let row = &pairs[pos(d1)][pos(d2)];
                let mut inner = Kahan::default();
                for (w, s) in weights.iter().zip(row) {
                    inner.add(w * s);
                }
                total.add(inner.sum * (mu / phi));
            }
        }
        let theta = theta_f64(&f1) * theta_f64(&f2);
        Ok(total.sum.re * theta / self.q as f64)
    }

    /// Checks every bound the sieve relies on over all square-free
    /// character orders and all u.
    pub fn verify_bounds(&self, brute: Option<&BruteForceCounter>) -> BoundsReport {
        let p = self.ctx.q() as f64;
        let n = self.ctx.n() as f64;
        let cq = if self.ctx.q() % 2 == 1 { 3.0 } else { 2.0 };
        let half = p.powf(n / 2.0);
        let prime_order = |d: u128| d > 1 && self.ctx.order_factorization().primes().contains(&d);

        let rows: Vec<(MultCharacter, MultCharacter, Vec<Complex64>)> = self
            .characters
            .par_iter()
            .flat_map_iter(|&x1| self.characters.iter().map(move |&x2| (x1, x2, self.mixed_sums(x1, x2))))
            .collect();

        let mut general = BoundClass::new("general", "mixed sum |S| <= C_q q^(n/2)");
        let mut trivial_u = BoundClass::new("trivial_shifted", "trivial characters, u != 0: |S| <= C_q");
        let mut multiplicative_only = BoundClass::new("alpha_only", "prime order on alpha only: |S| <= q^(n/2)");
        let mut partner_only = BoundClass::new("partner_only", "prime order on alpha + 1/alpha only: |S| <= (C_q - 1) q^(n/2)");
        let mut s_trivial = 0.0;
        for (x1, x2, sums) in &rows {
            for (u, s) in sums.iter().enumerate() {
                let triple = Triple { chi1: *x1, chi2: *x2, u: u as u64 };
                let m = s.norm();
                let both_trivial = x1.order == 1 && x2.order == 1;
                if both_trivial && u == 0 {
                    s_trivial = s.re;
                    continue;
                }
                general.observe(m / (cq * half), triple);
                if both_trivial {
                    trivial_u.observe(m / cq, triple);
                }
                if x1.order == 1 && prime_order(x2.order) {
                    partner_only.observe(m / ((cq - 1.0) * half), triple);
                }
            }
        }

        for &x1 in self.characters.iter().filter(|c| prime_order(c.order)) {
            for (u, s) in self.multiplicative_sums(x1).iter().enumerate() {
                let triple = Triple { chi1: x1, chi2: MultCharacter::trivial(), u: u as u64 };
                multiplicative_only.observe(s.norm() / half, triple);
            }
        }

        let expected_trivial = self.ctx.order() - square_roots_of_minus_one(self.ctx);
        let mut trace_lower = BoundClass::new("trace_restricted", "trace-restricted trivial sum >= q^(n-1) - C_q");
        let trivial_row = &rows
            .iter()
            .find(|(a, b, _)| a.order == 1 && b.order == 1)
            .expect("trivial pair present")
            .2;
        let base = self.ctx.base();
        let floor = p.powf(n - 1.0) - cq;
        for a in 0..self.q as u64 {
            let mut acc = Kahan::default();
            for (u, s) in trivial_row.iter().enumerate() {
                acc.add(self.psi0(base.mul(base.neg(a), u as u64)) * s);
            }
            let value = acc.sum.re / p;
            trace_lower.observe(
                floor / value,
                Triple { chi1: MultCharacter::trivial(), chi2: MultCharacter::trivial(), u: a },
            );
        }

        let mut classes = vec![general, trivial_u, trace_lower, multiplicative_only, partner_only];
        if let Some(b) = brute {
            classes.extend(b.difference_bounds());
        }
        BoundsReport {
            q: self.ctx.q(),
            n: self.ctx.n(),
            trivial_sum: s_trivial,
            trivial_sum_expected: expected_trivial,
            classes,
        }
    }
}

fn euler_phi_sf(d: u128) -> u128 {
    crate::ffield::euler_phi(d).expect("positive")
}

fn theta_f64(f: &Factorization) -> f64 {
    f.primes().iter().map(|&p| 1.0 - 1.0 / p as f64).product()
}

/// Number of α ∈ F_{q^n} with α² + 1 = 0, counted by enumeration.
pub fn square_roots_of_minus_one(ctx: &FieldContext) -> u128 {
    let minus_one = ctx.neg(&ctx.one());
    (1..ctx.size())
        .filter(|&i| {
            let a = ctx.element_at(i);
            ctx.mul(&a, &a) == minus_one
        })
        .count() as u128
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Triple {
    pub chi1: MultCharacter,
    pub chi2: MultCharacter,
    /// The shift u, or the trace value a for the trace-restricted classes.
    pub u: u64,
}

/// Largest observed |value| / bound over one family of sums or counts.
#[derive(Clone, Debug, Serialize)]
pub struct BoundClass {
    pub key: &'static str,
    pub name: String,
    pub max_ratio: f64,
    pub worst: Option<Triple>,
    pub checked: u64,
}

impl BoundClass {
    fn new(key: &'static str, name: &str) -> Self {
        BoundClass {
            key,
            name: name.to_string(),
            max_ratio: 0.0,
            worst: None,
            checked: 0,
        }
    }

    fn observe(&mut self, ratio: f64, at: Triple) {
        self.checked += 1;
        if ratio > self.max_ratio || self.worst.is_none() {
            self.max_ratio = ratio;
            self.worst = Some(at);
        }
    }

    pub fn holds(&self) -> bool {
        self.max_ratio <= 1.0 + 1e-9
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub q: u64,
    pub n: u32,
    /// S(χ₁, χ₁, 0).
    pub trivial_sum: f64,
    /// q^n - 1 minus the number of roots of α² + 1.
    pub trivial_sum_expected: u128,
    pub classes: Vec<BoundClass>,
}

impl BoundsReport {
    pub fn trivial_sum_exact(&self) -> bool {
        (self.trivial_sum - self.trivial_sum_expected as f64).abs() < 1e-6
    }

    pub fn class(&self, key: &str) -> Option<&BoundClass> {
        self.classes.iter().find(|c| c.key == key)
    }

    pub fn all_hold(&self) -> bool {
        self.trivial_sum_exact() && self.classes.iter().all(BoundClass::holds)
    }
}

/// N_a(e₁, e₂) with the divisor pair it was computed for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PairCount {
    pub a: u64,
    pub e1: u128,
    pub e2: u128,
    pub count: u64,
}

/// Exhaustive counter: for each α ≠ 0 stores its trace and the set of
/// primes ℓ | q^n - 1 for which α (resp. α + α⁻¹) is an ℓ-th power.
pub struct BruteForceCounter<'a> {
    ctx: &'a FieldContext,
    primes: Vec<u128>,
    trace: Vec<u32>,
    power_mask: Vec<u64>,
    /// u64::MAX marks α + α⁻¹ = 0.
    partner_mask: Vec<u64>,
}

impl<'a> BruteForceCounter<'a> {
    pub fn new(ctx: &'a FieldContext, bound: u128) -> Result<Self> {
        if ctx.size() > bound {
            return Err(Error::TooLarge {
                what: "brute-force count",
                size: ctx.size(),
                bound,
            });
        }
        let primes = ctx.order_factorization().primes();
        if primes.len() > 63 {
            return Err(Error::TooLarge {
                what: "distinct primes of q^n - 1",
                size: primes.len() as u128,
                bound: 63,
            });
        }
        let g = ctx.order();
        let one = ctx.one();
        let mask = |a: &crate::ffield::FieldElement| -> u64 {
            primes
                .iter()
                .enumerate()
                .filter(|(_, &l)| ctx.pow(a, g / l) == one)
                .fold(0u64, |m, (i, _)| m | (1 << i))
        };
        let rows: Vec<(u32, u64, u64)> = (1..ctx.size())
            .into_par_iter()
            .map(|i| {
                let a = ctx.element_at(i);
                let b = ctx.plus_inverse(&a).expect("nonzero");
                let pm = if b.is_zero() { u64::MAX } else { mask(&b) };
                (ctx.trace_to_base(&a).coeffs()[0] as u32, mask(&a), pm)
            })
            .collect();
        let mut trace = Vec::with_capacity(rows.len());
        let mut power_mask = Vec::with_capacity(rows.len());
        let mut partner_mask = Vec::with_capacity(rows.len());
        for (t, m, pm) in rows {
            trace.push(t);
            power_mask.push(m);
            partner_mask.push(pm);
        }
        Ok(BruteForceCounter {
            ctx,
            primes,
            trace,
            power_mask,
            partner_mask,
        })
    }

    pub fn context(&self) -> &FieldContext {
        self.ctx
    }

    /// Bit i set iff the i-th prime of q^n - 1 divides e.
    pub fn prime_mask(&self, e: u128) -> Result<u64> {
        let order = self.ctx.order();
        if e == 0 || order % e != 0 {
            return Err(Error::NotDivisor { e, order });
        }
        Ok(self
            .primes
            .iter()
            .enumerate()
            .filter(|(_, &l)| e % l == 0)
            .fold(0, |m, (i, _)| m | (1 << i)))
    }

    /// N_a for every a, keyed by prime masks.
    pub fn counts_by_mask(&self, m1: u64, m2: u64) -> Vec<u64> {
        let mut out = vec![0u64; self.ctx.q() as usize];
        for i in 0..self.trace.len() {
            let pm = self.partner_mask[i];
            if pm != u64::MAX && self.power_mask[i] & m1 == 0 && pm & m2 == 0 {
                out[self.trace[i] as usize] += 1;
            }
        }
        out
    }

    /// Like [`Self::counts_by_mask`] with no condition at all on α + α⁻¹.
    pub fn counts_free(&self, m1: u64) -> Vec<u64> {
        let mut out = vec![0u64; self.ctx.q() as usize];
        for i in 0..self.trace.len() {
            if self.power_mask[i] & m1 == 0 {
                out[self.trace[i] as usize] += 1;
            }
        }
        out
    }

    pub fn count(&self, a: u64, e1: u128, e2: u128) -> Result<PairCount> {
        let counts = self.counts_by_mask(self.prime_mask(e1)?, self.prime_mask(e2)?);
        Ok(PairCount { a, e1, e2, count: counts[a as usize] })
    }

    /// Number of α ≠ 0 with the given trace, no other condition.
    pub fn trace_count(&self, a: u64) -> u64 {
        self.trace.iter().filter(|&&t| t as u64 == a).count() as u64
    }

    pub fn primes(&self) -> &[u128] {
        &self.primes
    }

    // Differences N_a(k, kp) - θ(p) N_a(k,k) and the large-prime analogues,
    // each against its bound. Summing the per-u bound over u ∈ F_q and
    // dividing by q leaves q^{n/2}, which is what the large-prime
    // differences are checked against.
    fn difference_bounds(&self) -> Vec<BoundClass> {
        let q = self.ctx.q() as f64;
        let n = self.ctx.n() as f64;
        let cq = if self.ctx.q() % 2 == 1 { 3.0 } else { 2.0 };
        let half = q.powf(n / 2.0);
        let w = self.primes.len();
        let mut sieve = BoundClass::new("sieve_difference", "sieve difference <= (1 - 1/p) C_q W(k)^2 q^(n/2)");
        let mut left = BoundClass::new("large_alpha", "large prime on alpha <= (1 - 1/l) q^(n/2)");
        let mut right = BoundClass::new("large_partner", "large prime on alpha + 1/alpha <= (C_q - 1)(1 - 1/l) q^(n/2)");
        let tag = |a: usize| Triple { chi1: MultCharacter::trivial(), chi2: MultCharacter::trivial(), u: a as u64 };
        let ones = self.counts_by_mask(0, 0);
        let free = self.counts_free(0);
        for k in 0u64..(1 << w) {
            let kk = self.counts_by_mask(k, k);
            let wk = 4f64.powi(k.count_ones() as i32);
            for (i, &p) in self.primes.iter().enumerate() {
                if k & (1 << i) != 0 {
                    continue;
                }
                let th = 1.0 - 1.0 / p as f64;
                let bound = th * cq * wk * half;
                let a1 = self.counts_by_mask(k | (1 << i), k);
                let a2 = self.counts_by_mask(k, k | (1 << i));
                for a in 0..kk.len() {
                    let base = th * kk[a] as f64;
                    sieve.observe((a1[a] as f64 - base).abs() / bound, tag(a));
                    sieve.observe((a2[a] as f64 - base).abs() / bound, tag(a));
                }
            }
        }
        for (i, &l) in self.primes.iter().enumerate() {
            let th = 1.0 - 1.0 / l as f64;
            let l1 = self.counts_free(1 << i);
            let l2 = self.counts_by_mask(0, 1 << i);
            for a in 0..ones.len() {
                let left_base = th * free[a] as f64;
                left.observe((l1[a] as f64 - left_base).abs() / (th * half), tag(a));
                let base = th * ones[a] as f64;
                right.observe((l2[a] as f64 - base).abs() / ((cq - 1.0) * th * half), tag(a));
            }
        }
        vec![sieve, left, right]
    }
}

/// One-shot exhaustive N_a(e₁, e₂).
pub fn count_by_bruteforce(ctx: &FieldContext, a: u64, e1: u128, e2: u128) -> Result<PairCount> {
    BruteForceCounter::new(ctx, BRUTE_LIMIT)?.count(a, e1, e2)
}
