//! Direct verification of membership: for every a ∈ F_q find a primitive
//! α ∈ F_{q^n} with Tr(α) = a and α + α⁻¹ primitive.
//!
//! Two searches are provided. The exhaustive one walks the primitive
//! elements γ^i, gcd(i, q^n - 1) = 1, in increasing i. The quartic one looks
//! for the least b such that x⁴ - a x³ + b x + c is primitive and its root x
//! has x + x⁻¹ primitive; all roots are Frobenius conjugates of x, as are
//! their companions, so testing x alone decides the question.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ffield::{is_primitive_polynomial_with, BaseField, FieldContext, FieldElement};
use crate::intnum::{as_prime_power, factorize_power_minus_one, gcd, is_prime, Factorization};

/// Default cap on q^n - 1 for the exhaustive search.
pub const EXHAUSTIVE_LIMIT: u128 = 100_000_000;

const CHUNK: u128 = 1 << 14;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Witness {
    /// α as h·n residues mod p in the power basis of the context.
    Element { coords: Vec<u64> },
    /// x⁴ - a x³ + b x + c over F_q, coefficients as F_q codes.
    Polynomial { a: u64, b: u64, c: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Success,
    Failure,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Success => "Success",
            Verdict::Failure => "Failure",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuarticStats {
    pub c: u64,
    pub b_start: u64,
    /// Largest per-a minimal b.
    pub max_min_b: u64,
    /// Every a attaining it, ascending.
    pub max_at: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationResult {
    pub q: u64,
    pub n: u32,
    pub outcome: Verdict,
    pub witnesses: BTreeMap<u64, Witness>,
    pub failures: Vec<u64>,
    pub stats: Option<QuarticStats>,
}

impl VerificationResult {
    fn assemble(q: u64, n: u32, targets: &[u64], witnesses: BTreeMap<u64, Witness>, stats: Option<QuarticStats>) -> Self {
        let failures: Vec<u64> = targets.iter().copied().filter(|a| !witnesses.contains_key(a)).collect();
        let outcome = if failures.is_empty() {
            Verdict::Success
        } else {
            Verdict::Failure
        };
        VerificationResult {
            q,
            n,
            outcome,
            witnesses,
            failures,
            stats,
        }
    }

    /// Minimal b per a for quartic searches.
    pub fn min_b(&self) -> BTreeMap<u64, u64> {
        self.witnesses
            .iter()
            .filter_map(|(&a, w)| match w {
                Witness::Polynomial { b, .. } => Some((a, *b)),
                Witness::Element { .. } => None,
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Restrict to one trace value.
    pub trace: Option<u64>,
    /// Cap on q^n - 1 for the exhaustive search.
    pub exhaustive_limit: u128,
    /// First b tried by the quartic search.
    pub b_start: u64,
    /// Append-only record file; existing records are reused.
    pub checkpoint: Option<PathBuf>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            trace: None,
            exhaustive_limit: EXHAUSTIVE_LIMIT,
            b_start: 0,
            checkpoint: None,
        }
    }
}

fn split_prime_power(q: u128) -> Result<(u64, u32)> {
    let (p, h) = as_prime_power(q).ok_or(Error::NotPrimePower(q))?;
    Ok((p as u64, h))
}

fn targets(q: u64, trace: Option<u64>) -> Result<Vec<u64>> {
    match trace {
        Some(a) if a >= q => Err(Error::MalformedWitness(format!("trace value {a} is not in F_{q}"))),
        Some(a) => Ok(vec![a]),
        None => Ok((0..q).collect()),
    }
}

/// Record file of the form `q,n,a,kind,payload...`, one line per trace
/// value, closed by `RESULT,q,n,Success|Failure`.
pub struct Checkpoint {
    path: PathBuf,
    q: u64,
    n: u32,
    records: BTreeMap<u64, Option<Witness>>,
    finished: bool,
}

impl Checkpoint {
    pub fn open(path: &Path, q: u64, n: u32) -> Result<Self> {
        let mut records = BTreeMap::new();
        let mut finished = false;
        if path.exists() {
            let reader = BufReader::new(File::open(path)?);
            for (lineno, line) in reader.lines().enumerate() {
                let line = line?;
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let bad = || Error::Checkpoint(format!("{}:{}: cannot parse {line:?}", path.display(), lineno + 1));
                let fields: Vec<&str> = line.split(',').collect();
                if fields[0] == "RESULT" {
                    finished = fields.get(1) == Some(&q.to_string().as_str()) && fields.get(2) == Some(&n.to_string().as_str());
                    continue;
                }
                let num = |i: usize| -> Result<u64> { fields.get(i).and_then(|s| s.parse().ok()).ok_or_else(bad) };
                if fields.len() < 4 {
                    return Err(bad());
                }
                if num(0)? != q || num(1)? != n as u64 {
                    continue;
                }
                let a = num(2)?;
                let w = match fields[3] {
                    "none" => None,
                    "elem" => Some(Witness::Element {
                        coords: (4..fields.len()).map(num).collect::<Result<_>>()?,
                    }),
                    "poly" if fields.len() == 6 => Some(Witness::Polynomial { a, b: num(4)?, c: num(5)? }),
                    _ => return Err(bad()),
                };
                records.insert(a, w);
            }
        }
        Ok(Checkpoint {
            path: path.to_path_buf(),
            q,
            n,
            records,
            finished,
        })
    }

    pub fn records(&self) -> &BTreeMap<u64, Option<Witness>> {
        &self.records
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn format_record(q: u64, n: u32, a: u64, w: Option<&Witness>) -> String {
        match w {
            None => format!("{q},{n},{a},none"),
            Some(Witness::Element { coords }) => {
                let payload: Vec<String> = coords.iter().map(u64::to_string).collect();
                format!("{q},{n},{a},elem,{}", payload.join(","))
            }
            Some(Witness::Polynomial { b, c, .. }) => format!("{q},{n},{a},poly,{b},{c}"),
        }
    }

    fn append(&mut self, rows: &[(u64, Option<Witness>)]) -> Result<()> {
        if rows.is_empty() {
            return Ok(());
        }
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
        for (a, w) in rows {
            writeln!(f, "{}", Self::format_record(self.q, self.n, *a, w.as_ref()))?;
            self.records.insert(*a, w.clone());
        }
        f.flush()?;
        Ok(())
    }

    fn finish(&mut self, verdict: Verdict) -> Result<()> {
        if self.finished {
            return Ok(());
        }
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
        writeln!(f, "RESULT,{},{},{}", self.q, self.n, verdict.name())?;
        self.finished = true;
        Ok(())
    }
}

fn open_checkpoint(opts: &VerifyOptions, q: u64, n: u32) -> Result<Option<Checkpoint>> {
    opts.checkpoint.as_deref().map(|p| Checkpoint::open(p, q, n)).transpose()
}

/// Exhaustive search over F_{q^n}.
pub fn verify_exhaustive(q: u128, n: u32, opts: &VerifyOptions) -> Result<VerificationResult> {
    let (p, h) = split_prime_power(q)?;
    if n == 0 {
        return Err(Error::InvalidDegree(n));
    }
    let size = q.checked_pow(n).ok_or(Error::FieldTooLarge { p, degree: h * n })?;
    if size - 1 > opts.exhaustive_limit {
        return Err(Error::TooLarge {
            what: "exhaustive search",
            size: size - 1,
            bound: opts.exhaustive_limit,
        });
    }
    let ctx = FieldContext::build(p, h, n)?;
    verify_exhaustive_in(&ctx, opts)
}

/// Exhaustive search in a given context.
pub fn verify_exhaustive_in(ctx: &FieldContext, opts: &VerifyOptions) -> Result<VerificationResult> {
    let q = ctx.q();
    let n = ctx.n();
    let all = targets(q, opts.trace)?;
    let mut cp = open_checkpoint(opts, q, n)?;
    let mut witnesses = BTreeMap::new();
    let mut pending: BTreeSet<u64> = all.iter().copied().collect();
    if let Some(cp) = &cp {
        for (a, w) in cp.records() {
            if pending.remove(a) {
                if let Some(w) = w {
                    witnesses.insert(*a, w.clone());
                }
            }
        }
    }

    let order = ctx.order();
    let gamma = ctx.least_primitive_element();
    let batch = rayon::current_num_threads().max(1) as u128 * 2;
    let mut start = 1u128;
    while !pending.is_empty() && start < order {
        let chunks: Vec<u128> = (0..batch)
            .map(|k| start + k * CHUNK)
            .filter(|&s| s < order)
            .collect();
        let found: Vec<Vec<(u64, u128, FieldElement)>> = chunks
            .par_iter()
            .map(|&s| scan_chunk(ctx, &gamma, s, (s + CHUNK).min(order), &pending))
            .collect();
        let mut best: BTreeMap<u64, (u128, FieldElement)> = BTreeMap::new();
        for (a, i, alpha) in found.into_iter().flatten() {
            match best.get(&a) {
                Some((j, _)) if *j <= i => {}
                _ => {
                    best.insert(a, (i, alpha));
                }
            }
        }
        let mut rows = Vec::new();
        for (a, (_, alpha)) in best {
            pending.remove(&a);
            let w = Witness::Element { coords: ctx.prime_coords(&alpha) };
            rows.push((a, Some(w.clone())));
            witnesses.insert(a, w);
        }
        if let Some(cp) = cp.as_mut() {
            cp.append(&rows)?;
        }
        start += batch * CHUNK;
    }
    let result = VerificationResult::assemble(q, n, &all, witnesses, None);
    if let Some(cp) = cp.as_mut() {
        let missing: Vec<(u64, Option<Witness>)> = result
            .failures
            .iter()
            .filter(|a| !cp.records().contains_key(a))
            .map(|&a| (a, None))
            .collect();
        cp.append(&missing)?;
        cp.finish(result.outcome)?;
    }
    Ok(result)
}

// First witness in γ^i, i ∈ [lo, hi), for every pending trace value.
fn scan_chunk(
    ctx: &FieldContext,
    gamma: &FieldElement,
    lo: u128,
    hi: u128,
    pending: &BTreeSet<u64>,
) -> Vec<(u64, u128, FieldElement)> {
    let order = ctx.order();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut alpha = ctx.pow(gamma, lo);
    for i in lo..hi {
        if gcd(i, order) == 1 {
            let a = ctx.trace(&alpha);
            if pending.contains(&a) && !seen.contains(&a) {
                let beta = ctx.plus_inverse(&alpha).expect("nonzero");
                if ctx.is_primitive(&beta) {
                    seen.insert(a);
                    out.push((a, i, alpha.clone()));
                    if seen.len() == pending.len() {
                        break;
                    }
                }
            }
        }
        alpha = ctx.mul(&alpha, gamma);
    }
    out
}

/// Shared data for the quartic search over a fixed F_q.
struct QuarticSearch {
    base: Arc<BaseField>,
    fact: Arc<Factorization>,
    c: u64,
}

impl QuarticSearch {
    fn new(base: BaseField) -> Result<Self> {
        let fact = factorize_power_minus_one(base.q() as u128, 4)?;
        let c = base.least_primitive();
        Ok(QuarticSearch {
            base: Arc::new(base),
            fact: Arc::new(fact),
            c,
        })
    }

    fn polynomial(&self, a: u64, b: u64) -> Vec<u64> {
        vec![self.c, b, 0, self.base.neg(a), 1]
    }

    /// Whether x⁴ - a x³ + b x + c is primitive with x + x⁻¹ primitive.
    fn accepts(&self, a: u64, b: u64) -> bool {
        let f = self.polynomial(a, b);
        if !is_primitive_polynomial_with(&self.base, &f, &self.fact).expect("monic") {
            return false;
        }
        let ctx = FieldContext::with_modulus_unchecked(self.base.clone(), f, self.fact.clone());
        let x = ctx.root();
        debug_assert_eq!(ctx.trace(&x), a);
        let partner = ctx.plus_inverse(&x).expect("nonzero");
        ctx.is_primitive(&partner)
    }

    fn least_b(&self, a: u64, b_start: u64) -> Option<u64> {
        (b_start..self.base.q()).find(|&b| self.accepts(a, b))
    }

    fn run(&self, opts: &VerifyOptions) -> Result<VerificationResult> {
        let q = self.base.q();
        let all = targets(q, opts.trace)?;
        let mut cp = open_checkpoint(opts, q, 4)?;
        let mut witnesses = BTreeMap::new();
        let mut todo = Vec::new();
        for &a in &all {
            match cp.as_ref().and_then(|cp| cp.records().get(&a)) {
                Some(Some(w)) => {
                    witnesses.insert(a, w.clone());
                }
                Some(None) => {}
                None => todo.push(a),
            }
        }
        let step = rayon::current_num_threads().max(1) * 8;
        for block in todo.chunks(step) {
            let rows: Vec<(u64, Option<Witness>)> = block
                .par_iter()
                .map(|&a| {
                    let w = self.least_b(a, opts.b_start).map(|b| Witness::Polynomial { a, b, c: self.c });
                    (a, w)
                })
                .collect();
            for (a, w) in &rows {
                if let Some(w) = w {
                    witnesses.insert(*a, w.clone());
                }
            }
            if let Some(cp) = cp.as_mut() {
                cp.append(&rows)?;
            }
        }
        let mut result = VerificationResult::assemble(q, 4, &all, witnesses, None);
        let min_b = result.min_b();
        let max_min_b = min_b.values().copied().max().unwrap_or(0);
        result.stats = Some(QuarticStats {
            c: self.c,
            b_start: opts.b_start,
            max_min_b,
            max_at: min_b.iter().filter(|&(_, &b)| b == max_min_b).map(|(&a, _)| a).collect(),
        });
        if let Some(cp) = cp.as_mut() {
            cp.finish(result.outcome)?;
        }
        Ok(result)
    }
}

/// Quartic search over a prime field, c the least primitive root mod q.
pub fn verify_quartic_prime(q: u128, opts: &VerifyOptions) -> Result<VerificationResult> {
    if !is_prime(q) || q > u32::MAX as u128 {
        return Err(Error::NotPrime(q));
    }
    QuarticSearch::new(BaseField::prime(q as u64)?)?.run(opts)
}

/// Quartic search over F_{p^h}; c is the least primitive element of F_q in
/// encoding order and b runs over F_q in the same order.
pub fn verify_quartic_primepower(p: u64, h: u32, opts: &VerifyOptions) -> Result<VerificationResult> {
    if !is_prime(p as u128) {
        return Err(Error::NotPrime(p as u128));
    }
    QuarticSearch::new(BaseField::new(p, h)?)?.run(opts)
}

/// Re-checks a witness from scratch with a freshly built context.
pub fn check_witness(q: u128, n: u32, a: u64, witness: &Witness) -> Result<bool> {
    let (p, h) = split_prime_power(q)?;
    if a as u128 >= q {
        return Err(Error::MalformedWitness(format!("trace value {a} is not in F_{q}")));
    }
    match witness {
        Witness::Element { coords } => {
            let ctx = FieldContext::build(p, h, n)?;
            if coords.len() != (h * n) as usize || coords.iter().any(|&c| c >= p) {
                return Err(Error::MalformedWitness(format!(
                    "expected {} residues mod {p}, got {coords:?}",
                    h * n
                )));
            }
            let alpha = ctx.from_prime_coords(coords)?;
            check_element(&ctx, a, &alpha)
        }
        Witness::Polynomial { a: pa, b, c } => {
            if n != 4 || *pa != a || *b as u128 >= q || *c as u128 >= q {
                return Err(Error::MalformedWitness(format!("polynomial witness {witness:?} for a = {a}, n = {n}")));
            }
            let base = Arc::new(BaseField::new(p, h)?);
            let f = vec![*c, *b, 0, base.neg(a), 1];
            let fact = factorize_power_minus_one(q, 4)?;
            if !is_primitive_polynomial_with(&base, &f, &fact)? {
                return Ok(false);
            }
            let ctx = FieldContext::with_modulus(base, f)?;
            let x = ctx.root();
            check_element(&ctx, a, &x)
        }
    }
}

fn check_element(ctx: &FieldContext, a: u64, alpha: &FieldElement) -> Result<bool> {
    if alpha.is_zero() || !ctx.is_primitive(alpha) {
        return Ok(false);
    }
    let t = ctx.trace_to_base(alpha);
    if !ctx.is_in_base(&t) || t.coeffs()[0] != a {
        return Ok(false);
    }
    let partner = ctx.plus_inverse(alpha).expect("nonzero");
    Ok(ctx.element_order(&partner).map(|o| o == ctx.order()).unwrap_or(false))
}
