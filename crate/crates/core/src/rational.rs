//! Exact rational numbers and their textual forms.
//!
//! Probabilities are carried as [`BigRational`] so that every verdict in the
//! crate is decided without tolerances. Text input accepts `"a/b"`, integers
//! and finite decimal literals (`"0.85"`, `"-1.5e-2"`); output is always the
//! reduced `"a/b"` form, or a bare integer when the denominator is one.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::Serializer;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {input:?} as an exact rational: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    pub reason: &'static str,
}

fn parse_err(input: &str, reason: &'static str) -> ParseRationalError {
    ParseRationalError {
        input: input.to_string(),
        reason,
    }
}

/// Parses `"a/b"`, an integer, or a decimal literal into an exact rational.
pub fn parse_rational(input: &str) -> Result<Rational, ParseRationalError> {
    let s = input.trim();
    if s.is_empty() {
        return Err(parse_err(input, "empty string"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num
            .trim()
            .parse()
            .map_err(|_| parse_err(input, "bad numerator"))?;
        let den: BigInt = den
            .trim()
            .parse()
            .map_err(|_| parse_err(input, "bad denominator"))?;
        if den.is_zero() {
            return Err(parse_err(input, "zero denominator"));
        }
        return Ok(Rational::new(num, den));
    }
    parse_decimal(s).ok_or_else(|| parse_err(input, "not an integer, fraction or decimal"))
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(idx) => (&s[..idx], s[idx + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(all_digits.parse::<BigInt>().ok()?);
    let scale = exponent - frac_part.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Some(if negative { -value } else { value })
}

/// Canonical text form: `"a/b"` in lowest terms, or `"a"` for integers.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Shorthand for building small constants in code and tests.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn is_probability(value: &Rational) -> bool {
    !value.is_negative() && value <= &Rational::one()
}

/// Display adapter for slices of rationals, e.g. `(1, 0, 1/2)`.
pub struct VecDisplay<'a>(pub &'a [Rational]);

impl fmt::Display for VecDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(&format_rational(v))?;
        }
        f.write_str(")")
    }
}

/// Serde adapter: `#[serde(with = "nclab::rational::serde_str")]`.
///
/// Deserialization accepts strings as well as JSON numbers; numbers are read
/// from their literal text, so `0.1` becomes exactly `1/10`.
pub mod serde_str {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        from_json(&value).map_err(de::Error::custom)
    }

    use serde::Deserialize;
}

/// Reads a rational from a JSON string or number literal.
pub fn from_json(value: &serde_json::Value) -> Result<Rational, ParseRationalError> {
    match value {
        serde_json::Value::String(s) => parse_rational(s),
        serde_json::Value::Number(n) => parse_rational(&n.to_string()),
        other => Err(parse_err(&other.to_string(), "expected a string or number")),
    }
}

/// Serde adapter for `BTreeMap<String, Rational>` values.
pub mod serde_map {
    use std::collections::BTreeMap;

    use super::*;
    use serde::ser::SerializeMap;

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<String, Rational>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let mut out = s.serialize_map(Some(map.len()))?;
        for (k, v) in map {
            out.serialize_entry(k, &format_rational(v))?;
        }
        out.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<String, Rational>, D::Error> {
        struct MapVisitor;
        impl<'de> Visitor<'de> for MapVisitor {
            type Value = BTreeMap<String, Rational>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map of rationals")
            }
            fn visit_map<A: de::MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut out = BTreeMap::new();
                while let Some((k, v)) = access.next_entry::<String, serde_json::Value>()? {
                    out.insert(k, from_json(&v).map_err(de::Error::custom)?);
                }
                Ok(out)
            }
        }
        d.deserialize_map(MapVisitor)
    }
}

/// Serde adapter for `Vec<Rational>`.
pub mod serde_vec {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::Deserialize;

    pub fn serialize<S: Serializer>(values: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(values.len()))?;
        for v in values {
            seq.serialize_element(&format_rational(v))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let raw = Vec::<serde_json::Value>::deserialize(d)?;
        raw.iter()
            .map(|v| from_json(v).map_err(de::Error::custom))
            .collect()
    }
}
