//! Decimal renderings of exact rationals.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rounding {
    /// Toward zero.
    Down,
    Nearest,
}

fn pow10(e: u32) -> BigInt {
    BigInt::from(10u32).pow(e)
}

// 10^e as a rational, e of either sign.
fn pow10_rat(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(pow10(e as u32))
    } else {
        BigRational::new(BigInt::one(), pow10((-e) as u32))
    }
}

/// Decimal exponent e with 10^e ≤ x < 10^(e+1), for x > 0.
pub fn decimal_exponent(x: &BigRational) -> i64 {
    debug_assert!(x.is_positive());
    let digits = |v: &BigInt| v.magnitude().to_string().len() as i64;
    let mut e = digits(x.numer()) - digits(x.denom());
    while &pow10_rat(e) > x {
        e -= 1;
    }
    while &pow10_rat(e + 1) <= x {
        e += 1;
    }
    e
}

/// Renders `x` to `sf` significant figures. Uses positional notation when
/// the exponent is in [-6, 15] and scientific notation otherwise.
pub fn format_sig(x: &BigRational, sf: u32, mode: Rounding) -> String {
    assert!(sf >= 1);
    if x.is_zero() {
        return "0".to_string();
    }
    let sign = if x.is_negative() { "-" } else { "" };
    let ax = x.abs();
    let mut e = decimal_exponent(&ax);
    let scaled = &ax * pow10_rat(sf as i64 - 1 - e);
    let mut m = match mode {
        Rounding::Down => scaled.floor().to_integer(),
        Rounding::Nearest => {
            let (q, r) = scaled.numer().div_rem(scaled.denom());
            if BigInt::from(2) * r >= *scaled.denom() {
                q + 1
            } else {
                q
            }
        }
    };
    if m == pow10(sf) {
        m /= 10;
        e += 1;
    }
    let digits = m.to_string();
    if !(-6..=15).contains(&e) {
        let (head, tail) = digits.split_at(1);
        return if tail.is_empty() {
            format!("{sign}{head}e{e}")
        } else {
            format!("{sign}{head}.{tail}e{e}")
        };
    }
    let point = e + 1; // digits before the decimal point
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else if point as usize >= digits.len() {
        format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
    } else {
        let (int, frac) = digits.split_at(point as usize);
        format!("{int}.{frac}")
    };
    format!("{sign}{body}")
}

/// Exact "num/den" string.
pub fn exact_string(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parses a plain decimal literal such as `0.22671`, `.4109` or `9925.04`
/// exactly. Returns the value and the number of digits after the point.
pub fn parse_decimal(s: &str) -> Option<(BigRational, u32)> {
    let s = s.trim();
    let (neg, s) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let joined = format!("{int}{frac}");
    let mag = BigInt::parse_bytes(joined.as_bytes(), 10).unwrap_or_else(BigInt::zero);
    let mag = if neg { -mag } else { mag };
    let places = frac.len() as u32;
    Some((BigRational::new(mag, pow10(places)), places))
}

/// True when `x` lies within one unit of the last printed digit of `printed`.
pub fn within_last_digit(x: &BigRational, printed: &str) -> bool {
    let Some((p, places)) = parse_decimal(printed) else {
        return false;
    };
    let ulp = BigRational::new(BigInt::one(), pow10(places));
    (x - p).abs() <= ulp
}

/// Lower decimal logarithm of a positive big integer, accurate to about 1e-12.
pub fn log10_big(x: &BigInt) -> f64 {
    assert_eq!(x.sign(), Sign::Plus);
    let s = x.to_string();
    let lead = &s[..s.len().min(17)];
    let mant: f64 = lead.parse().unwrap();
    mant.log10() + (s.len() - lead.len()) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn significant_figures() {
        assert_eq!(format_sig(&r(2, 3), 4, Rounding::Down), "0.6666");
        assert_eq!(format_sig(&r(2, 3), 4, Rounding::Nearest), "0.6667");
        assert_eq!(format_sig(&r(113930, 10), 4, Rounding::Down), "11390");
        assert_eq!(format_sig(&r(99999, 1), 4, Rounding::Nearest), "100000");
        assert_eq!(format_sig(&r(-5, 4), 6, Rounding::Nearest), "-1.25000");
        assert_eq!(format_sig(&r(1, 1000), 2, Rounding::Down), "0.0010");
        assert_eq!(format_sig(&r(0, 1), 6, Rounding::Down), "0");
        let big = BigRational::from_integer(pow10(30) * 3217);
        assert_eq!(format_sig(&big, 4, Rounding::Down), "3.217e33");
    }

    #[test]
    fn exponent_boundaries() {
        assert_eq!(decimal_exponent(&r(1, 1)), 0);
        assert_eq!(decimal_exponent(&r(999, 1000)), -1);
        assert_eq!(decimal_exponent(&r(1000, 1)), 3);
        assert_eq!(decimal_exponent(&r(1, 7)), -1);
    }

    #[test]
    fn printed_digit_tolerance() {
        assert_eq!(parse_decimal(".4109").unwrap(), (r(4109, 10000), 4));
        assert_eq!(parse_decimal("9926").unwrap(), (r(9926, 1), 0));
        assert!(within_last_digit(&r(992504, 100), "9926"));
        assert!(!within_last_digit(&r(992504, 100), "9927"));
        assert!(within_last_digit(&r(226716, 1_000_000), "0.22671"));
        assert!(parse_decimal("1.2.3").is_none());
        assert!(parse_decimal("").is_none());
    }

    #[test]
    fn log_of_big_integer() {
        let x = BigInt::from(10u32).pow(40) * 3;
        assert!((log10_big(&x) - (40.0 + 3f64.log10())).abs() < 1e-12);
    }
}
