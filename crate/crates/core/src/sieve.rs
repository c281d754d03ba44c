//! The basic criterion (BC), prime sieve criterion (PSC) and modified prime
//! sieve criterion (MPSC), each a sufficient condition
//!
//!   q^{n/2 - 1} > threshold
//!
//! for every a ∈ F_q to be the trace of a primitive α with α + α⁻¹ primitive.
//! All thresholds are exact rationals and the comparison is done in
//! integers (both sides squared when n is odd).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::decimal::{exact_string, format_sig, to_f64, Rounding};
use crate::error::{Error, Result};
use crate::intnum::{theta_of_primes, Factorization};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CriterionKind {
    #[serde(rename = "BC")]
    Bc,
    #[serde(rename = "PSC")]
    Psc,
    #[serde(rename = "MPSC")]
    Mpsc,
}

impl CriterionKind {
    pub fn name(self) -> &'static str {
        match self {
            CriterionKind::Bc => "BC",
            CriterionKind::Psc => "PSC",
            CriterionKind::Mpsc => "MPSC",
        }
    }

    pub const ALL: [CriterionKind; 3] = [CriterionKind::Bc, CriterionKind::Psc, CriterionKind::Mpsc];
}

impl std::str::FromStr for CriterionKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "BC" => Ok(CriterionKind::Bc),
            "PSC" => Ok(CriterionKind::Psc),
            "MPSC" => Ok(CriterionKind::Mpsc),
            other => Err(format!("unknown criterion {other}")),
        }
    }
}

/// C_q: 3 for odd q, 2 for even q.
pub fn c_q(q: u128) -> u32 {
    if q % 2 == 1 {
        3
    } else {
        2
    }
}

fn rat(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

fn reciprocal_sum(primes: &[u128]) -> BigRational {
    primes
        .iter()
        .fold(BigRational::zero(), |acc, &p| acc + BigRational::new(BigInt::one(), BigInt::from(p)))
}

/// Partition of the distinct primes of q^n - 1 into core, sieving and
/// large primes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SievePlan {
    q: u128,
    n: u32,
    core: Vec<u128>,
    sieving: Vec<u128>,
    large: Vec<u128>,
    delta: BigRational,
    epsilon: BigRational,
    cq: u32,
}

impl SievePlan {
    /// Core = the t smallest primes, large = the s largest, sieving = the rest.
    pub fn standard(q: u128, n: u32, fact: &Factorization, t: usize, s: usize) -> Result<Self> {
        let primes = fact.primes();
        if t + s > primes.len() {
            return Err(Error::BadPlan(format!(
                "t + s = {} exceeds ω = {}",
                t + s,
                primes.len()
            )));
        }
        let core = primes[..t].to_vec();
        let sieving = primes[t..primes.len() - s].to_vec();
        let large = primes[primes.len() - s..].to_vec();
        Self::from_sets(q, n, fact, core, sieving, large)
    }

    /// Explicit partition; must cover the primes of `fact` exactly once.
    pub fn from_sets(
        q: u128,
        n: u32,
        fact: &Factorization,
        mut core: Vec<u128>,
        mut sieving: Vec<u128>,
        mut large: Vec<u128>,
    ) -> Result<Self> {
        if q.checked_pow(n).map(|v| v - 1) != Some(fact.value()) {
            return Err(Error::BadPlan("factorization is not of q^n - 1".into()));
        }
        core.sort_unstable();
        sieving.sort_unstable();
        large.sort_unstable();
        let mut all: Vec<u128> = core.iter().chain(&sieving).chain(&large).copied().collect();
        all.sort_unstable();
        if all != fact.primes() {
            return Err(Error::BadPlan(format!(
                "{:?} is not a partition of {:?}",
                all,
                fact.primes()
            )));
        }
        let delta = rat(1) - rat(2) * reciprocal_sum(&sieving);
        let epsilon = reciprocal_sum(&large);
        Ok(SievePlan {
            q,
            n,
            core,
            sieving,
            large,
            delta,
            epsilon,
            cq: c_q(q),
        })
    }

    pub fn q(&self) -> u128 {
        self.q
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn core(&self) -> &[u128] {
        &self.core
    }

    pub fn sieving(&self) -> &[u128] {
        &self.sieving
    }

    pub fn large(&self) -> &[u128] {
        &self.large
    }

    pub fn t(&self) -> usize {
        self.core.len()
    }

    pub fn r(&self) -> usize {
        self.sieving.len()
    }

    pub fn s(&self) -> usize {
        self.large.len()
    }

    /// δ = 1 - 2 Σ 1/p over the sieving primes.
    pub fn delta(&self) -> &BigRational {
        &self.delta
    }

    /// ε = Σ 1/l over the large primes.
    pub fn epsilon(&self) -> &BigRational {
        &self.epsilon
    }

    pub fn cq(&self) -> u32 {
        self.cq
    }

    /// θ of the core's radical.
    pub fn theta_core(&self) -> BigRational {
        theta_of_primes(self.core.iter().copied())
    }
}

/// R = C_q 2^{2t} ((2r - 1)/δ + 2); None when δ ≤ 0.
pub fn psc_threshold(cq: u32, t: usize, r: usize, delta: &BigRational) -> Option<BigRational> {
    if !delta.is_positive() {
        return None;
    }
    let two_r_minus_one = rat(2 * r as i64 - 1);
    let scale = rat(cq) * rat(BigInt::one() << (2 * t));
    Some(scale * (two_r_minus_one / delta + rat(2)))
}

/// R' = C_q {θ²(k)(2r - 1 + 2δ) 2^{2t} + (s - ε)} / (θ²(k)δ - 2ε);
/// None when the denominator is not positive.
pub fn mpsc_threshold(
    cq: u32,
    t: usize,
    r: usize,
    s: usize,
    delta: &BigRational,
    epsilon: &BigRational,
    theta_k: &BigRational,
) -> Option<BigRational> {
    let theta2 = theta_k * theta_k;
    let den = &theta2 * delta - rat(2) * epsilon;
    if !den.is_positive() {
        return None;
    }
    let two_r_minus_one = rat(2 * r as i64 - 1);
    let num = &theta2 * (two_r_minus_one + rat(2) * delta) * rat(BigInt::one() << (2 * t))
        + rat(s as i64)
        - epsilon;
    Some(rat(cq) * num / den)
}

/// Exact test of q^{n/2 - 1} > threshold.
pub fn lhs_exceeds(q: u128, n: u32, threshold: &BigRational) -> bool {
    if !threshold.is_positive() {
        return true;
    }
    let qb = BigInt::from(q);
    if n % 2 == 0 {
        let lhs = qb.pow(n / 2 - 1);
        lhs * threshold.denom() > *threshold.numer()
    } else {
        let lhs = qb.pow(n - 2);
        let num = threshold.numer() * threshold.numer();
        let den = threshold.denom() * threshold.denom();
        lhs * den > num
    }
}

/// q^{n/2 - 1} as a float, for display only.
pub fn lhs_value(q: u128, n: u32) -> f64 {
    (q as f64).powf(n as f64 / 2.0 - 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Passed,
    Failed,
    /// The MPSC denominator θ²(k)δ - 2ε is not positive.
    Inapplicable,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriterionReport {
    pub q: u128,
    pub n: u32,
    pub kind: CriterionKind,
    /// Absent for BC.
    pub plan: Option<SievePlan>,
    /// None stands for an infinite (undefined) threshold.
    pub threshold: Option<BigRational>,
    pub outcome: Outcome,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Passed
    }

    /// threshold / q^{n/2-1} as a float; infinite when undefined.
    pub fn ratio(&self) -> f64 {
        match &self.threshold {
            Some(t) => to_f64(t) / lhs_value(self.q, self.n),
            None => f64::INFINITY,
        }
    }

    pub fn summary(&self) -> CriterionSummary {
        let (t, r, s, delta, epsilon) = match &self.plan {
            Some(p) => (p.t(), p.r(), p.s(), Some(p.delta()), Some(p.epsilon())),
            None => (0, 0, 0, None, None),
        };
        let six = |x: &BigRational| format_sig(x, 6, Rounding::Down);
        CriterionSummary {
            q: self.q,
            n: self.n,
            kind: self.kind,
            t,
            r,
            s,
            delta: delta.map(six),
            delta_exact: delta.map(exact_string),
            epsilon: epsilon.map(six),
            epsilon_exact: epsilon.map(exact_string),
            threshold: self.threshold.as_ref().map(six),
            threshold_exact: self.threshold.as_ref().map(exact_string),
            lhs: format!("{:.6e}", lhs_value(self.q, self.n)),
            lhs_exact: format!("{}^({}/2)", self.q, self.n as i64 - 2),
            outcome: self.outcome,
            passed: self.passed(),
        }
    }
}

/// Flat, serializable view of a [`CriterionReport`]. Decimals are rounded
/// toward zero to 6 significant figures; `*_exact` fields are "num/den".
#[derive(Clone, Debug, Serialize)]
pub struct CriterionSummary {
    pub q: u128,
    pub n: u32,
    pub kind: CriterionKind,
    pub t: usize,
    pub r: usize,
    pub s: usize,
    pub delta: Option<String>,
    pub delta_exact: Option<String>,
    pub epsilon: Option<String>,
    pub epsilon_exact: Option<String>,
    pub threshold: Option<String>,
    pub threshold_exact: Option<String>,
    pub lhs: String,
    pub lhs_exact: String,
    pub outcome: Outcome,
    pub passed: bool,
}

fn check_n(n: u32) -> Result<()> {
    if n < 3 {
        Err(Error::InvalidDegree(n))
    } else {
        Ok(())
    }
}

/// BC: q^{n/2-1} > C_q W²(q^n - 1).
pub fn bc_check(q: u128, n: u32, fact: &Factorization) -> Result<CriterionReport> {
    check_n(n)?;
    let w = BigInt::from(fact.big_w());
    let threshold = rat(c_q(q)) * rat(&w * &w);
    let outcome = if lhs_exceeds(q, n, &threshold) {
        Outcome::Passed
    } else {
        Outcome::Failed
    };
    Ok(CriterionReport {
        q,
        n,
        kind: CriterionKind::Bc,
        plan: None,
        threshold: Some(threshold),
        outcome,
    })
}

/// PSC for a plan with no large primes and r ≥ 1. δ ≤ 0 fails with an
/// undefined threshold.
pub fn psc_check(plan: &SievePlan) -> Result<CriterionReport> {
    check_n(plan.n)?;
    if plan.s() != 0 {
        return Err(Error::BadPlan("PSC plans have no large primes".into()));
    }
    if plan.r() == 0 {
        return Err(Error::BadPlan("PSC needs at least one sieving prime".into()));
    }
    let threshold = psc_threshold(plan.cq, plan.t(), plan.r(), &plan.delta);
    let outcome = match &threshold {
        Some(t) if lhs_exceeds(plan.q, plan.n, t) => Outcome::Passed,
        _ => Outcome::Failed,
    };
    Ok(CriterionReport {
        q: plan.q,
        n: plan.n,
        kind: CriterionKind::Psc,
        plan: Some(plan.clone()),
        threshold,
        outcome,
    })
}

/// MPSC for a plan with s ≥ 1.
pub fn mpsc_check(plan: &SievePlan) -> Result<CriterionReport> {
    check_n(plan.n)?;
    if plan.s() == 0 {
        return Err(Error::BadPlan("MPSC needs at least one large prime".into()));
    }
    let threshold = mpsc_threshold(
        plan.cq,
        plan.t(),
        plan.r(),
        plan.s(),
        &plan.delta,
        &plan.epsilon,
        &plan.theta_core(),
    );
    let outcome = match &threshold {
        None => Outcome::Inapplicable,
        Some(t) if lhs_exceeds(plan.q, plan.n, t) => Outcome::Passed,
        Some(_) => Outcome::Failed,
    };
    Ok(CriterionReport {
        q: plan.q,
        n: plan.n,
        kind: CriterionKind::Mpsc,
        plan: Some(plan.clone()),
        threshold,
        outcome,
    })
}

/// Evaluates `kinds` in the order BC, PSC (t = 0, 1, ...), MPSC (t = 1, ...
/// then s = 1, ...) and returns the first passing report. When nothing
/// passes, returns the report with the smallest defined threshold, or the
/// last one evaluated if every threshold is undefined.
pub fn optimize_plan_with(
    q: u128,
    n: u32,
    fact: &Factorization,
    kinds: &[CriterionKind],
) -> Result<CriterionReport> {
    check_n(n)?;
    let omega = fact.omega();
    let mut best: Option<CriterionReport> = None;
    let mut consider = |report: CriterionReport| -> Option<CriterionReport> {
        if report.passed() {
            return Some(report);
        }
        let better = match (&best, &report.threshold) {
            (_, None) => best.is_none(),
            (None, Some(_)) => true,
            (Some(b), Some(t)) => b.threshold.as_ref().is_none_or(|bt| t < bt),
        };
        if better {
            best = Some(report);
        }
        None
    };
    if kinds.contains(&CriterionKind::Bc) {
        if let Some(r) = consider(bc_check(q, n, fact)?) {
            return Ok(r);
        }
    }
    if kinds.contains(&CriterionKind::Psc) {
        for t in 0..omega {
            let plan = SievePlan::standard(q, n, fact, t, 0)?;
            if let Some(r) = consider(psc_check(&plan)?) {
                return Ok(r);
            }
        }
    }
    if kinds.contains(&CriterionKind::Mpsc) {
        for t in 1..omega.saturating_sub(1) {
            for s in 1..omega - t {
                let plan = SievePlan::standard(q, n, fact, t, s)?;
                if let Some(r) = consider(mpsc_check(&plan)?) {
                    return Ok(r);
                }
            }
        }
    }
    match best {
        Some(b) => Ok(b),
        None => bc_check(q, n, fact),
    }
}

/// Full cascade BC → PSC → MPSC.
pub fn optimize_plan(q: u128, n: u32, fact: &Factorization) -> Result<CriterionReport> {
    optimize_plan_with(q, n, fact, &CriterionKind::ALL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decimal::within_last_digit;
    use crate::intnum::factorize_power_minus_one;

    fn fact4(q: u128) -> Factorization {
        factorize_power_minus_one(q, 4).unwrap()
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn bc_small_and_omega13() {
        let rep = bc_check(2, 4, &fact4(2)).unwrap();
        assert_eq!(rep.threshold, Some(rat(32)));
        assert!(!rep.passed());
        let f = fact4(102829);
        assert_eq!(f.omega(), 13);
        let rep = bc_check(102829, 4, &f).unwrap();
        assert_eq!(rep.threshold, Some(rat(3i64 << 26)));
        assert!(!rep.passed());
        assert_eq!(bc_check(2, 2, &factorize_power_minus_one(2, 2).unwrap()).unwrap_err(), Error::InvalidDegree(2));
    }

    #[test]
    fn bc_via_w_bound_route() {
        // With W(m) < m^{1/16} the BC reduces to q^{3n/8 - 1} > 3, which holds
        // for q > 3^8 and n ≥ 3: q^{3n/8-1} ≥ q^{1/8} > 3.
        for n in 3u32..12 {
            let q = 6562f64;
            assert!(q.powf(3.0 * n as f64 / 8.0 - 1.0) > 3.0);
        }
    }

    #[test]
    fn exact_comparison_odd_degree() {
        // q^{1/2} > R  ⇔  q > R²
        assert!(lhs_exceeds(101, 3, &r(10, 1)));
        assert!(!lhs_exceeds(100, 3, &r(10, 1)));
        assert!(lhs_exceeds(100, 3, &r(99999, 10000)));
        assert!(!lhs_exceeds(100, 4, &rat(100)));
        assert!(lhs_exceeds(101, 4, &rat(100)));
    }

    #[test]
    fn psc_worked_examples() {
        let plan = SievePlan::standard(10009, 4, &fact4(10009), 3, 0).unwrap();
        assert_eq!(plan.r(), 7);
        let rep = psc_check(&plan).unwrap();
        assert!(within_last_digit(plan.delta(), "0.22671"));
        assert!(within_last_digit(rep.threshold.as_ref().unwrap(), "11393"));
        assert!(!rep.passed());

        let plan = SievePlan::standard(21013, 4, &fact4(21013), 3, 0).unwrap();
        assert_eq!(plan.r(), 9);
        let rep = psc_check(&plan).unwrap();
        assert!(within_last_digit(plan.delta(), "0.2093"));
        assert!(within_last_digit(rep.threshold.as_ref().unwrap(), "15977"));
        assert!(rep.passed());

        let plan = SievePlan::standard(20747, 4, &fact4(20747), 4, 0).unwrap();
        let rep = psc_check(&plan).unwrap();
        assert!(within_last_digit(plan.delta(), "0.3504"));
        assert!(within_last_digit(rep.threshold.as_ref().unwrap(), "34410"));
        assert!(!rep.passed());
    }

    #[test]
    fn mpsc_worked_examples() {
        let plan = SievePlan::standard(10009, 4, &fact4(10009), 3, 1).unwrap();
        assert_eq!(plan.large(), &[29173]);
        let rep = mpsc_check(&plan).unwrap();
        assert!(within_last_digit(plan.delta(), "0.22678"));
        assert!(within_last_digit(rep.threshold.as_ref().unwrap(), "9925.04"));
        assert!(rep.passed());

        let f = fact4(3947);
        let one = mpsc_check(&SievePlan::standard(3947, 4, &f, 3, 1).unwrap()).unwrap();
        assert!(within_last_digit(one.threshold.as_ref().unwrap(), "3993.6"));
        assert!(!one.passed());
        let plan = SievePlan::standard(3947, 4, &f, 3, 2).unwrap();
        assert_eq!(plan.large(), &[409, 1973]);
        let two = mpsc_check(&plan).unwrap();
        assert!(within_last_digit(plan.delta(), "0.51106"));
        assert!(within_last_digit(plan.epsilon(), "0.002951"));
        assert!(within_last_digit(two.threshold.as_ref().unwrap(), "3795.1"));
        assert!(two.passed());
    }

    #[test]
    fn degenerate_formulas_recover_weaker_criteria() {
        for q in [10009u128, 3947, 20747, 102829] {
            let f = fact4(q);
            for t in 0..f.omega() {
                let plan = SievePlan::standard(q, 4, &f, t, 0).unwrap();
                let theta = plan.theta_core();
                // R'(s = 0, ε = 0) = R once θ²(k) cancels
                let psc = psc_threshold(plan.cq(), t, plan.r(), plan.delta());
                let mpsc = mpsc_threshold(plan.cq(), t, plan.r(), 0, plan.delta(), &BigRational::zero(), &theta)
                    .map(|v| v - rat(plan.cq()) * rat(0) / (&theta * &theta * plan.delta()));
                assert_eq!(psc, mpsc);
            }
            // PSC with r = 0, δ = 1, t = ω is the BC
            let bc = bc_check(q, 4, &f).unwrap().threshold.unwrap();
            assert_eq!(psc_threshold(c_q(q), f.omega(), 0, &rat(1)).unwrap(), bc);
        }
    }

    #[test]
    fn plan_validation() {
        let f = fact4(10009);
        assert!(SievePlan::standard(10009, 4, &f, 8, 3).is_err());
        assert!(SievePlan::from_sets(10009, 4, &f, vec![2, 3], vec![5], vec![]).is_err());
        let p = SievePlan::standard(10009, 4, &f, 3, 1).unwrap();
        assert!(psc_check(&p).is_err());
        let p0 = SievePlan::standard(10009, 4, &f, 3, 0).unwrap();
        assert!(mpsc_check(&p0).is_err());
        // q even gives C_q = 2
        assert_eq!(SievePlan::standard(16, 4, &fact4(16), 1, 0).unwrap().cq(), 2);
    }

    #[test]
    fn delta_nonpositive_and_mpsc_inapplicable() {
        let f = fact4(10009);
        let plan = SievePlan::standard(10009, 4, &f, 0, 0).unwrap();
        let rep = psc_check(&plan).unwrap();
        assert!(!plan.delta().is_positive());
        assert_eq!(rep.threshold, None);
        assert_eq!(rep.outcome, Outcome::Failed);
        // t = 1 leaves 3 sieving: δ < 0, so θ²δ - 2ε < 0
        let plan = SievePlan::standard(10009, 4, &f, 1, 1).unwrap();
        assert_eq!(mpsc_check(&plan).unwrap().outcome, Outcome::Inapplicable);
    }

    #[test]
    fn optimizer_examples() {
        let rep = optimize_plan(102829, 4, &fact4(102829)).unwrap();
        assert_eq!(rep.kind, CriterionKind::Psc);
        let plan = rep.plan.as_ref().unwrap();
        assert_eq!((plan.t(), plan.r()), (4, 9));
        assert!(within_last_digit(plan.delta(), "0.2983"));
        assert!(within_last_digit(rep.threshold.as_ref().unwrap(), "45289"));

        assert!(!optimize_plan(20747, 4, &fact4(20747)).unwrap().passed());
        assert!(!optimize_plan(2, 4, &fact4(2)).unwrap().passed());
        assert!(!optimize_plan(3, 4, &fact4(3)).unwrap().passed());

        let rep = optimize_plan(21013, 4, &fact4(21013)).unwrap();
        assert_eq!((rep.kind, rep.plan.as_ref().unwrap().t()), (CriterionKind::Psc, 3));
        let rep = optimize_plan(10009, 4, &fact4(10009)).unwrap();
        assert_eq!(rep.kind, CriterionKind::Mpsc);
    }

    #[test]
    fn moving_a_prime_into_the_core_raises_both_factors() {
        let f = fact4(102829);
        for t in 0..f.omega() - 1 {
            let a = SievePlan::standard(102829, 4, &f, t, 0).unwrap();
            let b = SievePlan::standard(102829, 4, &f, t + 1, 0).unwrap();
            assert!(b.delta() > a.delta());
            assert_eq!(b.t(), a.t() + 1);
        }
    }
}
