//! Deterministic number formatting for report emission. All rounding is
//! integer arithmetic on exact rationals, so output bytes never depend on
//! platform float printing.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio, Rational64};
use num_traits::Signed;

/// p-value with 6 significant digits: plain decimal down to 1e-4, scientific
/// below that, bare zero for zero.
pub fn sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if v >= 1e-4 {
        let magnitude = v.abs().log10().floor() as i32;
        let decimals = (5 - magnitude).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.5e}")
    }
}

/// Fixed-point decimal rendering of an exact rational, rounding half away
/// from zero.
pub fn big_rational_fixed(r: &BigRational, places: usize) -> String {
    let scale = BigInt::from(10u32).pow(places as u32);
    let num = r.numer() * &scale;
    let den = r.denom().clone();
    debug_assert!(den.is_positive());
    let neg = num.is_negative();
    let num_abs = num.abs();
    // round(n/d) half away from zero = (2n + d) / 2d, floored.
    let scaled = (BigInt::from(2) * &num_abs + &den) / (BigInt::from(2) * &den);
    let digits = scaled.to_string();
    let mut s = if digits.len() > places {
        let (int_part, frac_part) = digits.split_at(digits.len() - places);
        if places == 0 {
            int_part.to_string()
        } else {
            format!("{int_part}.{frac_part}")
        }
    } else {
        format!("0.{digits:0>places$}")
    };
    if neg && s.trim_start_matches(['0', '.']).chars().any(|c| c != '0') {
        s.insert(0, '-');
    }
    s
}

pub fn rational64_fixed(r: Rational64, places: usize) -> String {
    big_rational_fixed(
        &BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom())),
        places,
    )
}

pub fn ratio_u64_fixed(r: Ratio<u64>, places: usize) -> String {
    big_rational_fixed(
        &BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom())),
        places,
    )
}

pub fn ratio_u128_fixed(r: Ratio<u128>, places: usize) -> String {
    big_rational_fixed(
        &BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom())),
        places,
    )
}

/// Exact rational -> f64 (for feeding test statistics).
pub fn ratio_u64_to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Debug, PartialEq, Eq)]
pub struct DecimalParseError(pub String);

impl std::fmt::Display for DecimalParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "not a non-negative decimal number: {:?}", self.0)
    }
}

impl std::error::Error for DecimalParseError {}

/// Parses a non-negative decimal string ("1", "0.5", "99.9") into an exact
/// rational.
pub fn parse_decimal(s: &str) -> Result<Ratio<u64>, DecimalParseError> {
    let err = || DecimalParseError(s.to_string());
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(err());
    }
    if frac_part.len() > 12 {
        return Err(err());
    }
    let int_val: u64 = if int_part.is_empty() { 0 } else { int_part.parse().map_err(|_| err())? };
    let den = 10u64.pow(frac_part.len() as u32);
    let frac_val: u64 =
        if frac_part.is_empty() { 0 } else { frac_part.parse().map_err(|_| err())? };
    let num = int_val.checked_mul(den).and_then(|v| v.checked_add(frac_val)).ok_or_else(err)?;
    Ok(Ratio::new(num, den))
}
