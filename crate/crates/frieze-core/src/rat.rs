//! Exact rational scalars.
//!
//! Everything on the certification path is computed with `Ratio<T>` where
//! `T` is an exact integer scalar. The crate default is `BigInt` (no
//! overflow, deterministic across platforms); fixed-width scalars such as
//! `i128` satisfy the same bound and are used in tests to cross-check the
//! algebra. Floating point never appears on this path: all the chain
//! inequalities are strict, and rounding must not be able to flip them.

use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive};

/// Integer scalar usable inside `Ratio<T>` on the exact path.
pub trait RatioInt:
    Integer + Signed + Clone + FromPrimitive + ToPrimitive + fmt::Display + fmt::Debug + 'static
{
}

impl<T> RatioInt for T where
    T: Integer + Signed + Clone + FromPrimitive + ToPrimitive + fmt::Display + fmt::Debug + 'static
{
}

/// Exact rational from a non-negative machine count.
pub fn from_u64<T: RatioInt>(x: u64) -> Ratio<T> {
    Ratio::from_integer(T::from_u64(x).expect("count representable in scalar type"))
}

/// Exact rational from a signed machine integer.
pub fn from_i64<T: RatioInt>(x: i64) -> Ratio<T> {
    Ratio::from_integer(T::from_i64(x).expect("integer representable in scalar type"))
}

/// Exact ratio of two machine integers. Panics if `den == 0`.
pub fn of_u64s<T: RatioInt>(num: u64, den: u64) -> Ratio<T> {
    assert!(den != 0, "zero denominator");
    Ratio::new(
        T::from_u64(num).expect("numerator representable"),
        T::from_u64(den).expect("denominator representable"),
    )
}

/// Exact ratio of two u128 counts. Panics if `den == 0`.
pub fn of_u128s<T: RatioInt>(num: u128, den: u128) -> Ratio<T> {
    assert!(den != 0, "zero denominator");
    Ratio::new(
        T::from_u128(num).expect("numerator representable"),
        T::from_u128(den).expect("denominator representable"),
    )
}

/// Largest integer `<= r`, as u64. `None` when negative or out of range.
pub fn floor_u64<T: RatioInt>(r: &Ratio<T>) -> Option<u64> {
    r.floor().to_integer().to_u64()
}

/// Smallest integer strictly greater than `r`, i.e. `floor(r) + 1`.
pub fn next_int_above<T: RatioInt>(r: &Ratio<T>) -> Ratio<T> {
    Ratio::from_integer(r.floor().to_integer() + T::one())
}

/// Largest integer strictly less than `r`: `r - 1` when `r` is an integer,
/// `floor(r)` otherwise.
pub fn last_int_below<T: RatioInt>(r: &Ratio<T>) -> Ratio<T> {
    if r.is_integer() {
        r - Ratio::one()
    } else {
        r.floor()
    }
}

/// Renders `r` as `num/den` (always with the slash, e.g. `0/1`, `3/1`).
pub fn render<T: RatioInt>(r: &Ratio<T>) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Error from [`parse`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRatioError(pub String);

impl fmt::Display for ParseRatioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid rational `{}`", self.0)
    }
}

impl std::error::Error for ParseRatioError {}

/// Parses an exact rational: `p/q`, a decimal literal (`0.1` becomes 1/10),
/// or a plain integer. No rounding ever happens.
pub fn parse<T: RatioInt>(s: &str) -> Result<Ratio<T>, ParseRatioError> {
    let s = s.trim();
    let bad = || ParseRatioError(s.to_string());
    if s.is_empty() {
        return Err(bad());
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() {
        return Err(bad());
    }
    let value: Ratio<T> = if let Some((num, den)) = body.split_once('/') {
        let num = parse_digits::<T>(num).ok_or_else(bad)?;
        let den = parse_digits::<T>(den).ok_or_else(bad)?;
        if den.is_zero() {
            return Err(bad());
        }
        Ratio::new(num, den)
    } else if let Some((int_part, frac_part)) = body.split_once('.') {
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        let int_digits = if int_part.is_empty() { "0" } else { int_part };
        let int_val = parse_digits::<T>(int_digits).ok_or_else(bad)?;
        let mut num = int_val;
        let mut den = T::one();
        if !frac_part.is_empty() {
            let frac_val = parse_digits::<T>(frac_part).ok_or_else(bad)?;
            let ten = T::from_u64(10).expect("10 representable");
            for _ in 0..frac_part.len() {
                den = den * ten.clone();
            }
            num = num * den.clone() + frac_val;
        }
        Ratio::new(num, den)
    } else {
        Ratio::from_integer(parse_digits::<T>(body).ok_or_else(bad)?)
    };
    Ok(if negative { -value } else { value })
}

fn parse_digits<T: RatioInt>(s: &str) -> Option<T> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    T::from_str_radix(s, 10).ok()
}
