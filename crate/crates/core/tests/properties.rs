use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use primpair::decimal::{format_sig, parse_decimal, within_last_digit, Rounding};
use primpair::intnum::factorize;
use primpair::sieve::{mpsc_threshold, psc_threshold, CriterionKind};
use primpair::survey::scan;

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

proptest! {
    #[test]
    fn modified_sieve_reduces_to_prime_sieve(cq in 2u32..4, t in 0usize..8, r in 1usize..40, dn in 1i64..1000) {
        let delta = ratio(dn, 1000);
        let zero = ratio(0, 1);
        let one = ratio(1, 1);
        prop_assert_eq!(mpsc_threshold(cq, t, r, 0, &delta, &zero, &one), psc_threshold(cq, t, r, &delta));
    }

    #[test]
    fn larger_delta_lowers_the_threshold(t in 0usize..6, r in 1usize..30, a in 1i64..999) {
        let lo = psc_threshold(3, t, r, &ratio(a, 1000)).unwrap();
        let hi = psc_threshold(3, t, r, &ratio(a + 1, 1000)).unwrap();
        prop_assert!(hi < lo);
    }

    #[test]
    fn factorization_multiplies_back(m in 1u128..(1u128 << 64)) {
        let f = factorize(m).unwrap();
        let back = f.factors().iter().fold(1u128, |acc, &(p, e)| acc * p.pow(e));
        prop_assert_eq!(back, m);
        prop_assert!(f.factors().windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn formatting_is_within_a_unit(n in 1i64..10_000_000_000, d in 1i64..1_000_000, sf in 2u32..9) {
        let x = ratio(n, d);
        // Integer digits beyond the precision are printed as zeros.
        prop_assume!(x < ratio(10i64.pow(sf), 1));
        let s = format_sig(&x, sf, Rounding::Nearest);
        prop_assert!(within_last_digit(&x, &s), "{} vs {}", s, x);
        let (down, _) = parse_decimal(&format_sig(&x, sf, Rounding::Down)).unwrap();
        prop_assert!(down <= x);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn scans_split_and_concatenate(lo in 2u64..400, len in 1u64..400, cut in 0u64..400) {
        let hi = lo + len;
        let mid = lo + cut % len;
        let kinds = CriterionKind::ALL;
        let whole = scan(4, lo, hi, &kinds).unwrap();
        let mut parts = scan(4, lo, mid, &kinds).unwrap();
        parts.extend(scan(4, mid + 1, hi, &kinds).unwrap());
        let rows = |v: &[primpair::survey::SurveyRecord]| v.iter().map(|r| r.csv_line()).collect::<Vec<_>>();
        prop_assert_eq!(rows(&whole), rows(&parts));
    }
}
