//! Exact durations measured in shift-operation units.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Sub};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// Number of shift units in one XOR under the default cost parameters.
pub const SHIFTS_PER_XOR: i64 = 6;

/// A non-negative exact duration; one unit is the time of a single shift.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TimeQuantum(Rational);

impl TimeQuantum {
    pub const ZERO: TimeQuantum = TimeQuantum(Ratio::new_raw(0, 1));

    pub fn shifts(n: i64) -> Self {
        TimeQuantum(Rational::from_integer(n))
    }

    /// Duration in default XOR units (`6` shifts each).
    pub fn xors(n: impl Into<Rational>) -> Self {
        TimeQuantum(n.into() * SHIFTS_PER_XOR)
    }

    pub fn from_rational(r: Rational) -> Self {
        TimeQuantum(r)
    }

    pub fn as_shifts(self) -> Rational {
        self.0
    }

    /// Value expressed in default XOR units.
    pub fn in_xors(self) -> Rational {
        self.0 / SHIFTS_PER_XOR
    }

    /// Value expressed in units of `unit`.
    pub fn ratio_to(self, unit: TimeQuantum) -> Rational {
        self.0 / unit.0
    }

    pub fn is_zero(self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(self) -> bool {
        self.0.is_integer()
    }

    pub fn to_f64(self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn scale(self, k: Rational) -> Self {
        TimeQuantum(self.0 * k)
    }
}

impl Add for TimeQuantum {
    type Output = TimeQuantum;
    fn add(self, rhs: Self) -> Self {
        TimeQuantum(self.0 + rhs.0)
    }
}

impl AddAssign for TimeQuantum {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
    }
}

impl Sub for TimeQuantum {
    type Output = TimeQuantum;
    fn sub(self, rhs: Self) -> Self {
        TimeQuantum(self.0 - rhs.0)
    }
}

impl Mul<i64> for TimeQuantum {
    type Output = TimeQuantum;
    fn mul(self, rhs: i64) -> Self {
        TimeQuantum(self.0 * rhs)
    }
}

impl Mul<Rational> for TimeQuantum {
    type Output = TimeQuantum;
    fn mul(self, rhs: Rational) -> Self {
        TimeQuantum(self.0 * rhs)
    }
}

impl Div<TimeQuantum> for TimeQuantum {
    type Output = Rational;
    fn div(self, rhs: TimeQuantum) -> Rational {
        self.0 / rhs.0
    }
}

impl Sum for TimeQuantum {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(TimeQuantum::ZERO, Add::add)
    }
}

impl fmt::Display for TimeQuantum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_rational(self.0))
    }
}

impl fmt::Debug for TimeQuantum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} T_shift", fmt_rational(self.0))
    }
}

/// `7`, `280/3`, `-1/2`.
pub fn fmt_rational(r: Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Accepts `3`, `3/4`, `0.75`, `-1.5`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Rational(s.to_string());
    let t = s.trim();
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let negative = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        if frac.is_empty() && int_digits.is_empty() {
            return Err(bad());
        }
        if !int_digits.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{int_digits}{frac}");
        let mag: i64 = if digits.is_empty() { 0 } else { digits.parse().map_err(|_| bad())? };
        let den = 10i64.checked_pow(frac.len() as u32).ok_or_else(bad)?;
        let r = Rational::new(mag, den);
        return Ok(if negative { -r } else { r });
    }
    let n: i64 = t.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// Number of digits after the decimal point in a printed number (`"0.705"` → 3).
pub fn printed_decimals(s: &str) -> u32 {
    s.split_once('.').map_or(0, |(_, f)| f.len() as u32)
}

/// Round half away from zero to `decimals` places, returned as an exact rational.
pub fn round_to(r: Rational, decimals: u32) -> Rational {
    let scale = 10i64.pow(decimals);
    let scaled = r * scale;
    let (q, rem) = scaled.numer().div_rem(scaled.denom());
    let twice = rem.abs() * 2;
    let q = if twice >= *scaled.denom() { q + rem.signum() } else { q };
    Rational::new(q, scale)
}

/// Truncate toward zero to `decimals` places.
pub fn truncate_to(r: Rational, decimals: u32) -> Rational {
    let scale = 10i64.pow(decimals);
    let scaled = r * scale;
    Rational::new(scaled.numer() / scaled.denom(), scale)
}

/// Decimal rendering with a fixed number of places (half away from zero).
pub fn fmt_decimal(r: Rational, decimals: u32) -> String {
    let rounded = round_to(r, decimals);
    let scale = 10i64.pow(decimals);
    let units = (rounded * scale).to_integer();
    let sign = if units < 0 { "-" } else { "" };
    let units = units.abs();
    if decimals == 0 {
        format!("{sign}{units}")
    } else {
        format!(
            "{sign}{}.{:0width$}",
            units / scale,
            units % scale,
            width = decimals as usize
        )
    }
}

impl FromStr for TimeQuantum {
    type Err = Error;
    /// Parses a value in shift units.
    fn from_str(s: &str) -> Result<Self> {
        let r = parse_rational(s)?;
        if r.is_negative() {
            return Err(Error::Rational(s.to_string()));
        }
        Ok(TimeQuantum(r))
    }
}

/// Exact rational serialized as a numerator/denominator pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalPair {
    pub num: i64,
    pub den: i64,
}

impl From<Rational> for RationalPair {
    fn from(r: Rational) -> Self {
        RationalPair {
            num: *r.numer(),
            den: *r.denom(),
        }
    }
}

impl From<RationalPair> for Rational {
    fn from(p: RationalPair) -> Self {
        Rational::new(p.num, p.den)
    }
}
