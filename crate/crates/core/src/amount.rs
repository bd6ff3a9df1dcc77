//! Exact asset quantities.
//!
//! Every asset amount in the game is an arbitrary-precision rational. The
//! interchange form is the string `"num/den"` (always with a denominator,
//! always reduced), which round-trips bit-exactly.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{de, Deserialize, Deserializer, Serializer};
use thiserror::Error;

/// An exact, nonnegative-by-convention asset quantity.
pub type Amount = BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid amount {input:?}: {reason}")]
pub struct AmountParseError {
    pub input: String,
    pub reason: &'static str,
}

pub fn int(n: i64) -> Amount {
    Amount::from_integer(BigInt::from(n))
}

/// `num / den`, reduced. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Amount {
    Amount::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Amount {
    Amount::zero()
}

pub fn one() -> Amount {
    Amount::one()
}

/// Formats as `"num/den"`. Integers keep the `/1`.
pub fn format_amount(a: &Amount) -> String {
    format!("{}/{}", a.numer(), a.denom())
}

/// Accepts `"n"`, `"n/d"` and surrounding whitespace.
pub fn parse_amount(s: &str) -> Result<Amount, AmountParseError> {
    let err = |reason| AmountParseError {
        input: s.to_string(),
        reason,
    };
    let t = s.trim();
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = n.parse().map_err(|_| err("numerator is not an integer"))?;
    let den: BigInt = d.parse().map_err(|_| err("denominator is not an integer"))?;
    if den.is_zero() {
        return Err(err("zero denominator"));
    }
    Ok(Amount::new(num, den))
}

/// Largest integer not above `a`, as a `u64`. Negative inputs give zero.
pub fn floor_units(a: &Amount) -> u64 {
    if a.is_negative() {
        return 0;
    }
    let f = a.floor().to_integer();
    u64::try_from(f).unwrap_or(u64::MAX)
}

pub fn is_integer(a: &Amount) -> bool {
    a.is_integer()
}

/// Display adaptor for log lines.
pub struct Show<'a>(pub &'a Amount);

impl fmt::Display for Show<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

/// `#[serde(with = "ddab_core::amount::serde_str")]` for `Amount` fields.
///
/// Serializes as `"num/den"`. Deserializes from a string or a JSON integer.
pub mod serde_str {
    use super::*;

    pub fn serialize<S: Serializer>(a: &Amount, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_amount(a))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Amount, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Int(i64),
        }
        match Repr::deserialize(d)? {
            Repr::Text(s) => parse_amount(&s).map_err(de::Error::custom),
            Repr::Int(i) => Ok(int(i)),
        }
    }
}

/// Same as [`serde_str`] for `Option<Amount>`.
pub mod serde_opt_str {
    use super::*;

    pub fn serialize<S: Serializer>(a: &Option<Amount>, s: S) -> Result<S::Ok, S::Error> {
        match a {
            Some(a) => s.serialize_some(&format_amount(a)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Amount>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "super::serde_str")] Amount);
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}
