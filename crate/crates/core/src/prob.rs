//! Exact rational probabilities.
//!
//! Every probability in the engine is a [`BigRational`]; floating point only
//! shows up when a value is formatted for humans or compared against sampled
//! frequencies.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid probability literal `{literal}`: {reason}")]
pub struct ParseProbabilityError {
    pub literal: String,
    pub reason: &'static str,
}

/// Parses `"p/q"`, an integer, or a decimal such as `"0.125"` / `"1.5e-2"`
/// into an exact rational. Decimals are read digit by digit, never through
/// `f64`.
pub fn parse_rational(text: &str) -> Result<BigRational, ParseProbabilityError> {
    let err = |reason| ParseProbabilityError {
        literal: text.to_string(),
        reason,
    };
    let s = text.trim();
    if s.is_empty() {
        return Err(err("empty"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim()).map_err(|_| err("bad numerator"))?;
        let d = BigInt::from_str(den.trim()).map_err(|_| err("bad denominator"))?;
        if d.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(BigRational::new(n, d));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = s[i + 1..].parse().map_err(|_| err("bad exponent"))?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err("no digits"));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err("not a number"));
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(BigInt::from_str(&digits).map_err(|_| err("not a number"))?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Ok(if negative { -value } else { value })
}

/// Formats a rational as `p/q`, or as a bare integer when `q == 1`.
pub fn format_rational(value: &BigRational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn rational_to_f64(value: &BigRational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// An exact probability, guaranteed to lie in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Probability(BigRational);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0} is not a probability")]
pub struct OutOfRange(pub String);

impl Probability {
    pub fn new(value: BigRational) -> Result<Self, OutOfRange> {
        if value.is_negative() || value > BigRational::one() {
            return Err(OutOfRange(format_rational(&value)));
        }
        Ok(Self(value))
    }

    /// For values that are in range by construction (sums of products of
    /// cpt entries over disjoint events).
    pub(crate) fn exact(value: BigRational) -> Self {
        debug_assert!(!value.is_negative() && value <= BigRational::one(), "{value}");
        Self(value)
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    pub fn ratio(numer: i64, denom: i64) -> Result<Self, OutOfRange> {
        Self::new(BigRational::new(numer.into(), denom.into()))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn into_inner(self) -> BigRational {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn complement(&self) -> Self {
        Self(BigRational::one() - &self.0)
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

impl FromStr for Probability {
    type Err = ParseProbabilityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let value = parse_rational(s)?;
        Probability::new(value).map_err(|_| ParseProbabilityError {
            literal: s.to_string(),
            reason: "outside [0, 1]",
        })
    }
}

impl Serialize for Probability {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Probability {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = ProbabilityText::deserialize(deserializer)?;
        text.as_str().parse().map_err(serde::de::Error::custom)
    }
}

/// JSON accepts probabilities either as strings or as bare numbers; numbers
/// are re-read from their shortest decimal rendering.
#[derive(Deserialize)]
#[serde(untagged)]
enum ProbabilityText {
    Text(String),
    Number(serde_json::Number),
}

impl ProbabilityText {
    fn as_str(&self) -> String {
        match self {
            ProbabilityText::Text(s) => s.clone(),
            ProbabilityText::Number(n) => n.to_string(),
        }
    }
}
