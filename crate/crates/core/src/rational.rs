//! Exact rational scalar support: parsing, medians, decimal rendering.
//!
//! All mechanism arithmetic runs on [`Rational`] (arbitrary-precision,
//! always in lowest terms with positive denominator). Floating point is
//! reserved for Shannon entropy, which is only ever compared, never fed
//! back into a mechanism.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Arbitrary-precision rational number.
pub type Rational = num_rational::BigRational;

/// Shorthand for small rational constants.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parses a decimal string ("0.4", "1", ".25") or a fraction string ("2/5")
/// into an exact rational. No floating-point round trip.
pub fn parse_rational(input: &str) -> Result<Rational, Error> {
    let s = input.trim();
    let err = || Error::ParseRational {
        input: input.to_string(),
    };
    if s.is_empty() {
        return Err(err());
    }
    if let Some((numer, denom)) = s.split_once('/') {
        let numer: BigInt = numer.trim().parse().map_err(|_| err())?;
        let denom: BigInt = denom.trim().parse().map_err(|_| err())?;
        if denom.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(numer, denom));
    }
    let (sign, digits) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    let valid = |p: &str| p.chars().all(|c| c.is_ascii_digit());
    if !valid(int_part) || !valid(frac_part) {
        return Err(err());
    }
    let mut numer: BigInt = if int_part.is_empty() {
        BigInt::zero()
    } else {
        int_part.parse().map_err(|_| err())?
    };
    let mut denom = BigInt::one();
    for c in frac_part.chars() {
        numer = numer * 10 + c.to_digit(10).expect("ascii digit") as i64;
        denom *= 10;
    }
    Ok(Rational::new(numer * sign, denom))
}

/// Exact median of an odd number of values.
///
/// Panics if `values` is empty or has even length; every median in this
/// crate is over `2n + 1` entries, so the middle element always exists.
pub fn median(values: &[Rational]) -> Rational {
    assert!(
        values.len() % 2 == 1,
        "median requires an odd number of values, got {}",
        values.len()
    );
    let mut sorted: Vec<&Rational> = values.iter().collect();
    sorted.sort();
    sorted[values.len() / 2].clone()
}

/// Median of three values without allocating.
pub fn median3(a: &Rational, b: &Rational, c: &Rational) -> Rational {
    let lo = a.min(b);
    let hi = a.max(b);
    c.clamp(lo, hi).clone()
}

/// Clamps `value` into `[lower, upper]`.
pub fn clamp(value: &Rational, lower: &Rational, upper: &Rational) -> Rational {
    debug_assert!(lower <= upper);
    value.clamp(lower, upper).clone()
}

/// Converts to `f64`, for entropy and report rendering only.
pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().expect("rational convertible to f64")
}

/// Exact rational equal to the given finite float.
pub fn from_f64_exact(value: f64) -> Option<Rational> {
    Rational::from_float(value)
}

/// Renders `value` as a decimal string with the given number of significant
/// digits (round half away from zero), trimming trailing zeros.
pub fn to_decimal_string(value: &Rational, significant: usize) -> String {
    assert!(significant > 0);
    if value.is_zero() {
        return "0".to_string();
    }
    let negative = value.is_negative();
    let v = value.abs();
    // Scale so that the integer part carries `significant` digits.
    let digits_before = {
        let trunc = v.to_integer();
        if trunc.is_zero() {
            0usize
        } else {
            trunc.to_string().len()
        }
    };
    let mut exponent: i64 = digits_before as i64;
    if digits_before == 0 {
        // Leading zeros after the decimal point.
        let ten = BigInt::from(10);
        let mut scaled = v.clone();
        while scaled.to_integer().is_zero() {
            scaled *= Rational::from_integer(ten.clone());
            exponent -= 1;
        }
        exponent += 1;
    }
    // value = 0.d1 d2 ... * 10^exponent with d1 != 0
    let shift = significant as i64 - exponent;
    let ten = Rational::from_integer(BigInt::from(10));
    let mut scaled = v.clone();
    if shift >= 0 {
        for _ in 0..shift {
            scaled *= ten.clone();
        }
    } else {
        for _ in 0..(-shift) {
            scaled /= ten.clone();
        }
    }
    // Round half away from zero.
    let rounded = (scaled + rat(1, 2)).floor().to_integer();
    let mut digits = rounded.to_string();
    // Rounding may produce an extra digit (e.g. 999.6 -> 1000).
    if digits.len() > significant {
        digits.truncate(significant);
        exponent += 1;
    }
    while digits.len() < significant {
        digits.insert(0, '0');
    }
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if exponent <= 0 {
        out.push_str("0.");
        for _ in 0..(-exponent) {
            out.push('0');
        }
        out.push_str(digits.trim_end_matches('0'));
    } else if (exponent as usize) >= digits.len() {
        out.push_str(&digits);
        for _ in 0..(exponent as usize - digits.len()) {
            out.push('0');
        }
    } else {
        let (int_part, frac_part) = digits.split_at(exponent as usize);
        out.push_str(int_part);
        let frac = frac_part.trim_end_matches('0');
        if !frac.is_empty() {
            out.push('.');
            out.push_str(frac);
        }
    }
    if out == "-0" {
        out = "0".to_string();
    }
    out
}
