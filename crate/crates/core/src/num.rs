//! Numeric newtypes.
//!
//! [`Num`] is an `f64` with a total order so that terms holding measures and
//! coordinates can be compared, sorted and hashed. [`Amount`] is a fixed-point
//! decimal with six fractional digits used for batteries and energy costs, so
//! that the exhaustion threshold `b < max(c_in, c_out)` is decided exactly.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Sub};
use std::str::FromStr;

use thiserror::Error;

/// A real number with total ordering. `-0.0` is normalized to `0.0`.
#[derive(Clone, Copy, Debug)]
pub struct Num(f64);

impl Num {
    pub fn new(v: f64) -> Self {
        if v == 0.0 {
            Num(0.0)
        } else {
            Num(v)
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl From<f64> for Num {
    fn from(v: f64) -> Self {
        Num::new(v)
    }
}

impl PartialEq for Num {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits()
    }
}

impl Eq for Num {}

impl PartialOrd for Num {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Num {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Hash for Num {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Rust's shortest round-trip representation, never in exponent form.
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AmountError {
    #[error("invalid decimal `{0}`")]
    Invalid(String),
    #[error("`{0}` has more than six fractional digits")]
    TooPrecise(String),
    #[error("`{0}` is out of range")]
    Overflow(String),
}

/// Fixed-point decimal with six fractional digits (micro-units).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Amount(i64);

impl Amount {
    pub const SCALE: i64 = 1_000_000;
    pub const ZERO: Amount = Amount(0);

    pub const fn from_micros(micros: i64) -> Self {
        Amount(micros)
    }

    pub const fn from_units(units: i64) -> Self {
        Amount(units * Self::SCALE)
    }

    pub const fn micros(self) -> i64 {
        self.0
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / Self::SCALE as f64
    }

    pub fn checked_mul(self, n: i64) -> Option<Amount> {
        self.0.checked_mul(n).map(Amount)
    }
}

impl Add for Amount {
    type Output = Amount;
    fn add(self, rhs: Amount) -> Amount {
        Amount(self.0 + rhs.0)
    }
}

impl Sub for Amount {
    type Output = Amount;
    fn sub(self, rhs: Amount) -> Amount {
        Amount(self.0 - rhs.0)
    }
}

impl std::iter::Sum for Amount {
    fn sum<I: Iterator<Item = Amount>>(iter: I) -> Amount {
        iter.fold(Amount::ZERO, |a, b| a + b)
    }
}

impl FromStr for Amount {
    type Err = AmountError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let invalid = || AmountError::Invalid(s.to_string());
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int, frac) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int.is_empty() || !int.bytes().all(|c| c.is_ascii_digit()) {
            return Err(invalid());
        }
        if !frac.bytes().all(|c| c.is_ascii_digit()) || (body.contains('.') && frac.is_empty()) {
            return Err(invalid());
        }
        let frac = frac.trim_end_matches('0');
        if frac.len() > 6 {
            return Err(AmountError::TooPrecise(s.to_string()));
        }
        let overflow = || AmountError::Overflow(s.to_string());
        let int: i64 = int.parse().map_err(|_| overflow())?;
        let mut frac_micros: i64 = 0;
        for (i, c) in frac.bytes().enumerate() {
            frac_micros += i64::from(c - b'0') * 10i64.pow(5 - i as u32);
        }
        let micros = int
            .checked_mul(Self::SCALE)
            .and_then(|m| m.checked_add(frac_micros))
            .ok_or_else(overflow)?;
        Ok(Amount(if neg { -micros } else { micros }))
    }
}

impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let int = abs / Self::SCALE as u64;
        let frac = abs % Self::SCALE as u64;
        if frac == 0 {
            write!(f, "{sign}{int}")
        } else {
            let digits = format!("{frac:06}");
            write!(f, "{sign}{int}.{}", digits.trim_end_matches('0'))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn amount_parses_exact_decimals() {
        assert_eq!("10".parse::<Amount>().unwrap(), Amount::from_units(10));
        assert_eq!("0.1".parse::<Amount>().unwrap().micros(), 100_000);
        assert_eq!("2.000001".parse::<Amount>().unwrap().micros(), 2_000_001);
        assert_eq!("-1.5".parse::<Amount>().unwrap().micros(), -1_500_000);
        assert_eq!("3.1000000".parse::<Amount>().unwrap().micros(), 3_100_000);
    }

    #[test]
    fn amount_rejects_bad_input() {
        assert!(matches!("1.0000001".parse::<Amount>(), Err(AmountError::TooPrecise(_))));
        assert!("".parse::<Amount>().is_err());
        assert!("1.".parse::<Amount>().is_err());
        assert!("a1".parse::<Amount>().is_err());
        assert!(matches!(
            "99999999999999999".parse::<Amount>(),
            Err(AmountError::Overflow(_))
        ));
    }

    #[test]
    fn amount_display_round_trips() {
        for s in ["0", "1", "0.5", "12.000001", "-3.25", "100"] {
            assert_eq!(s.parse::<Amount>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn num_total_order_and_zero() {
        assert_eq!(Num::new(-0.0), Num::new(0.0));
        assert!(Num::new(1.0) < Num::new(2.0));
        assert_eq!(Num::new(7.0).to_string(), "7");
        assert_eq!(Num::new(0.1).to_string(), "0.1");
    }
}
