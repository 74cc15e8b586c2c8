//! Exact money arithmetic.
//!
//! Every bid, valuation, critical bid and payment is a [`Money`]: an exact
//! rational number. Property checks compare payments with `==` and `<=`, so no
//! value in this crate ever passes through floating point.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, Signed, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Longest fractional part accepted when parsing a decimal literal.
const MAX_FRACTION_DIGITS: usize = 18;

/// An exact rational amount of money.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Money(Ratio<i128>);

impl Money {
    pub const ZERO: Money = Money(Ratio::new_raw(0, 1));
    pub const ONE: Money = Money(Ratio::new_raw(1, 1));

    pub fn from_integer(value: i64) -> Self {
        Money(Ratio::from_integer(value as i128))
    }

    /// `numer / denom`, reduced.
    ///
    /// Panics if `denom` is zero.
    pub fn from_ratio(numer: i64, denom: i64) -> Self {
        Money(Ratio::new(numer as i128, denom as i128))
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    /// The point halfway between `self` and `other`.
    pub fn midpoint(self, other: Money) -> Money {
        (self + other) * Money::from_ratio(1, 2)
    }

    /// Lossy conversion for display and foreign callers only.
    pub fn to_f64(self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    /// True when the value has a finite decimal expansion.
    fn is_terminating_decimal(&self) -> bool {
        let mut d = self.denom();
        while d % 2 == 0 {
            d /= 2;
        }
        while d % 5 == 0 {
            d /= 5;
        }
        d == 1
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0.checked_add(&rhs.0).expect("money overflow in addition"))
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        *self = *self + rhs;
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0.checked_sub(&rhs.0).expect("money overflow in subtraction"))
    }
}

impl Mul for Money {
    type Output = Money;
    fn mul(self, rhs: Money) -> Money {
        Money(self.0.checked_mul(&rhs.0).expect("money overflow in multiplication"))
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Money> for Money {
    fn sum<I: Iterator<Item = &'a Money>>(iter: I) -> Money {
        iter.copied().sum()
    }
}

impl From<i64> for Money {
    fn from(value: i64) -> Self {
        Money::from_integer(value)
    }
}

impl fmt::Display for Money {
    /// Terminating values print as plain decimals (`-8`, `2.5`); anything
    /// else prints as a reduced fraction (`1/3`).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.is_terminating_decimal() {
            return write!(f, "{}/{}", self.numer(), self.denom());
        }
        let numer = self.numer();
        let denom = self.denom();
        let sign = if numer < 0 { "-" } else { "" };
        let abs = numer.unsigned_abs();
        let whole = abs / denom as u128;
        let mut rem = abs % denom as u128;
        if rem == 0 {
            return write!(f, "{sign}{whole}");
        }
        let mut digits = String::new();
        while rem != 0 {
            rem *= 10;
            digits.push(char::from(b'0' + (rem / denom as u128) as u8));
            rem %= denom as u128;
        }
        write!(f, "{sign}{whole}.{digits}")
    }
}

impl fmt::Debug for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Money({self})")
    }
}

impl FromStr for Money {
    type Err = Error;

    /// Accepts integers, decimals (`-3.25`) and fractions (`7/2`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::InvalidMoney(s.to_string());
        let text = s.trim();
        if let Some((n, d)) = text.split_once('/') {
            let numer: i128 = n.trim().parse().map_err(|_| bad())?;
            let denom: i128 = d.trim().parse().map_err(|_| bad())?;
            if denom == 0 {
                return Err(bad());
            }
            return Ok(Money(Ratio::new(numer, denom)));
        }
        let (negative, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text.strip_prefix('+').unwrap_or(text)),
        };
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        if (int_part.is_empty() && frac_part.is_empty())
            || !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
            || frac_part.len() > MAX_FRACTION_DIGITS
        {
            return Err(bad());
        }
        let digits = format!("{int_part}{frac_part}");
        let numer: i128 = if digits.is_empty() { 0 } else { digits.parse().map_err(|_| bad())? };
        let denom = 10i128.pow(frac_part.len() as u32);
        let value = Ratio::new(numer, denom);
        Ok(Money(if negative { -value } else { value }))
    }
}

impl Serialize for Money {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(MoneyVisitor)
    }
}

struct MoneyVisitor;

impl Visitor<'_> for MoneyVisitor {
    type Value = Money;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or a decimal/fraction string")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Money, E> {
        Ok(Money::from_integer(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Money, E> {
        Ok(Money(Ratio::from_integer(v as i128)))
    }

    // JSON numbers with a fraction arrive as f64; the shortest round-trip
    // rendering recovers the literal the author wrote (`0.1` stays 1/10).
    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Money, E> {
        if !v.is_finite() {
            return Err(E::custom("non-finite money value"));
        }
        format!("{v}").parse().map_err(E::custom)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Money, E> {
        v.parse().map_err(E::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(s: &str) -> Money {
        s.parse().unwrap()
    }

    #[test]
    fn parses_decimals_and_fractions() {
        assert_eq!(m("2.5"), Money::from_ratio(5, 2));
        assert_eq!(m("-3.25"), Money::from_ratio(-13, 4));
        assert_eq!(m("7/2"), Money::from_ratio(7, 2));
        assert_eq!(m(".5"), Money::from_ratio(1, 2));
        assert_eq!(m("10"), Money::from_integer(10));
        assert_eq!(m("0.1") + m("0.2"), m("0.3"));
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "-", "1.2.3", "abc", "1/0", "1e5", "."] {
            assert!(s.parse::<Money>().is_err(), "{s:?} should not parse");
        }
    }

    #[test]
    fn display_is_exact() {
        assert_eq!(Money::from_integer(-8).to_string(), "-8");
        assert_eq!(Money::from_ratio(5, 2).to_string(), "2.5");
        assert_eq!(Money::from_ratio(-1, 8).to_string(), "-0.125");
        assert_eq!(Money::from_ratio(1, 3).to_string(), "1/3");
    }

    #[test]
    fn json_accepts_numbers_and_strings() {
        let v: Vec<Money> = serde_json::from_str(r#"[2.0, 10, "0.1", "1/3", -4]"#).unwrap();
        assert_eq!(v, vec![m("2"), m("10"), m("0.1"), m("1/3"), m("-4")]);
        assert_eq!(serde_json::to_string(&m("2.5")).unwrap(), r#""2.5""#);
    }

    #[test]
    fn midpoint() {
        assert_eq!(m("1").midpoint(m("2")), m("1.5"));
    }
}
