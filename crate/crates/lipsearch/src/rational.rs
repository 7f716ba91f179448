//! Exact rational scalars and their file representations.
//!
//! Every quantity in the model (locations, qualities, costs, measures) is a
//! `BigRational`. Floats never enter the core; they exist only in callers
//! that want approximate display. Numbers cross the file boundary as JSON
//! numbers in decimal notation, or as `"p/q"` strings when the value has no
//! finite decimal form, and parse back to the identical rational. File
//! denominators are capped at 2^32 after reduction.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = num_rational::BigRational;

/// Largest denominator accepted from files, after reduction.
pub const DENOM_LIMIT_BITS: u64 = 32;

pub fn from_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

fn denom_ok(r: &Rat) -> bool {
    r.denom().magnitude() <= &(BigUint::one() << DENOM_LIMIT_BITS)
}

/// Parses a decimal string (`"0.3"`, `"-1.25e-2"`, `"7"`) or a fraction
/// string (`"11/15"`) into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::InvalidNumber("empty string".into()));
    }
    let r = if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::InvalidNumber(format!("bad numerator in {s:?}")))?;
        let den: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::InvalidNumber(format!("bad denominator in {s:?}")))?;
        if den.is_zero() {
            return Err(Error::InvalidNumber(format!("zero denominator in {s:?}")));
        }
        Rat::new(num, den)
    } else {
        parse_decimal(s).ok_or_else(|| Error::InvalidNumber(format!("not a decimal: {s:?}")))?
    };
    if !denom_ok(&r) {
        return Err(Error::InvalidNumber(format!(
            "denominator of {s:?} exceeds 2^{DENOM_LIMIT_BITS} after reduction"
        )));
    }
    Ok(r)
}

fn parse_decimal(s: &str) -> Option<Rat> {
    let (sign, rest) = match s.as_bytes()[0] {
        b'-' => (-1, &s[1..]),
        b'+' => (1, &s[1..]),
        _ => (1, s),
    };
    let (mantissa, exp) = match rest.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i64>().ok()?),
        None => (rest, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let shift = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let r = if shift >= 0 {
        Rat::from_integer(digits * ten.pow(shift as u32))
    } else {
        Rat::new(digits, ten.pow((-shift) as u32))
    };
    Some(if sign < 0 { -r } else { r })
}

/// Exact decimal form, if the reduced denominator is of the form 2^a * 5^b.
pub fn render_exact_decimal(r: &Rat) -> Option<String> {
    let mut den = r.denom().magnitude().clone();
    let (mut twos, mut fives) = (0u32, 0u32);
    let two = BigUint::from(2u32);
    let five = BigUint::from(5u32);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return None;
    }
    let k = twos.max(fives);
    let scale = BigUint::from(10u32).pow(k) / r.denom().magnitude();
    let scaled = r.numer().magnitude() * scale;
    let mut digits = scaled.to_string();
    if digits.len() <= k as usize {
        digits = format!("{}{}", "0".repeat(k as usize + 1 - digits.len()), digits);
    }
    let split = digits.len() - k as usize;
    let (int_part, frac_part) = digits.split_at(split);
    let frac_part = frac_part.trim_end_matches('0');
    let sign = if r.is_negative() { "-" } else { "" };
    Some(if frac_part.is_empty() {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    })
}

/// 12 significant digits, rounding half away from zero.
fn round_12_sig(r: &Rat) -> String {
    debug_assert!(!r.is_zero());
    let abs = r.abs();
    // e such that 10^(e-1) <= |r| < 10^e.
    let mut e = r.numer().magnitude().to_string().len() as i64
        - r.denom().magnitude().to_string().len() as i64
        + 1;
    let pow = |k: i64| -> Rat {
        if k >= 0 {
            Rat::from_integer(BigInt::from(10).pow(k as u32))
        } else {
            Rat::new(BigInt::one(), BigInt::from(10).pow((-k) as u32))
        }
    };
    while abs >= pow(e) {
        e += 1;
    }
    while abs < pow(e - 1) {
        e -= 1;
    }
    let scaled = &abs * pow(12 - e) + ratio(1, 2);
    let mut m = scaled.floor().numer().magnitude().clone();
    let cap = BigUint::from(10u32).pow(12);
    if m >= cap {
        m /= BigUint::from(10u32);
        e += 1;
    }
    let digits = m.to_string();
    debug_assert_eq!(digits.len(), 12);
    let sign = if r.is_negative() { "-" } else { "" };
    if e <= 0 {
        format!("{sign}0.{}{digits}", "0".repeat((-e) as usize))
    } else if (e as usize) < digits.len() {
        let (i, f) = digits.split_at(e as usize);
        format!("{sign}{i}.{f}")
    } else {
        format!("{sign}{digits}{}", "0".repeat(e as usize - digits.len()))
    }
}

/// Text form for CSV cells and logs: the exact decimal when one exists,
/// otherwise 12 significant digits flagged with `~`.
pub fn render_cell(r: &Rat) -> String {
    if r.is_zero() {
        return "0".into();
    }
    match render_exact_decimal(r) {
        Some(s) => s,
        None => format!("~{}", round_12_sig(r)),
    }
}

/// Lossless fraction text, `p/q` in lowest terms.
pub fn render_fraction(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// JSON form: a plain number when the decimal terminates, else a `"p/q"`
/// string so round-trips stay exact.
pub fn to_json(r: &Rat) -> serde_json::Value {
    match render_exact_decimal(r) {
        Some(s) => serde_json::Value::Number(
            s.parse().expect("exact decimal is a valid JSON number"),
        ),
        None => serde_json::Value::String(render_fraction(r)),
    }
}

pub fn from_json(v: &serde_json::Value) -> Result<Rat> {
    match v {
        serde_json::Value::Number(n) => parse_rat(&n.to_string()),
        serde_json::Value::String(s) => parse_rat(s),
        other => Err(Error::InvalidNumber(format!("expected a number, got {other}"))),
    }
}

/// Convenience for display layers; exactness ends here.
pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_rat("0.3").unwrap(), ratio(3, 10));
        assert_eq!(parse_rat("-1.25e-2").unwrap(), ratio(-1, 80));
        assert_eq!(parse_rat("7").unwrap(), from_int(7));
        assert_eq!(parse_rat(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse_rat("11/15").unwrap(), ratio(11, 15));
        assert_eq!(parse_rat("4/6").unwrap(), ratio(2, 3));
    }

    #[test]
    fn rejects_junk_and_big_denominators() {
        assert!(parse_rat("").is_err());
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("0x12").is_err());
        assert!(parse_rat("1.2.3").is_err());
        // 2^32 is the last admissible denominator.
        assert!(parse_rat("1/4294967296").is_ok());
        assert!(parse_rat("1/4294967297").is_err());
        assert!(parse_rat("2/8589934592").is_ok()); // reduces to 1/2^32
    }

    #[test]
    fn exact_decimal_rendering() {
        assert_eq!(render_exact_decimal(&ratio(3, 10)), Some("0.3".into()));
        assert_eq!(render_exact_decimal(&ratio(-7, 4)), Some("-1.75".into()));
        assert_eq!(render_exact_decimal(&from_int(12)), Some("12".into()));
        assert_eq!(render_exact_decimal(&ratio(1, 64)), Some("0.015625".into()));
        assert_eq!(render_exact_decimal(&ratio(11, 15)), None);
    }

    #[test]
    fn approximate_rendering_is_marked() {
        assert_eq!(render_cell(&ratio(11, 15)), "~0.733333333333");
        assert_eq!(render_cell(&ratio(19, 30)), "~0.633333333333");
        assert_eq!(render_cell(&ratio(2, 3)), "~0.666666666667");
        assert_eq!(render_cell(&ratio(1, 3000)), "~0.000333333333333");
        assert_eq!(render_cell(&ratio(1000, 3)), "~333.333333333");
        assert_eq!(render_cell(&ratio(3, 10)), "0.3");
        assert_eq!(render_cell(&Rat::zero()), "0");
    }

    #[test]
    fn json_round_trip() {
        for s in ["0.3", "11/15", "1", "-0.015625", "19/30"] {
            let r = parse_rat(s).unwrap();
            let v = to_json(&r);
            assert_eq!(from_json(&v).unwrap(), r, "round-trip of {s}");
        }
        let v = to_json(&ratio(3, 10));
        assert_eq!(serde_json::to_string(&v).unwrap(), "0.3");
        let v = to_json(&ratio(11, 15));
        assert_eq!(serde_json::to_string(&v).unwrap(), "\"11/15\"");
    }
}
