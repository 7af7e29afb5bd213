//! Exact rationals and their `"p/q"` string encoding.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{CakeError, Result};

/// Exact rational number, always kept in lowest terms with a positive denominator.
pub type Fraction = BigRational;

pub fn frac(numer: i64, denom: i64) -> Fraction {
    Fraction::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Fraction {
    Fraction::from_integer(BigInt::from(value))
}

pub fn zero() -> Fraction {
    Fraction::zero()
}

pub fn one() -> Fraction {
    Fraction::one()
}

/// Parses `"p/q"` or an integer string. Decimal and exponent notation are
/// rejected so that no value ever passes through a float.
pub fn parse_fraction(text: &str) -> Result<Fraction> {
    let text = text.trim();
    if text.is_empty() {
        return Err(CakeError::Parse("empty fraction".into()));
    }
    if !text
        .chars()
        .all(|c| c.is_ascii_digit() || c == '/' || c == '-' || c == '+')
    {
        return Err(CakeError::Parse(format!(
            "`{text}` is not an exact fraction (expected \"p/q\" or an integer)"
        )));
    }
    Fraction::from_str(text).map_err(|e| CakeError::Parse(format!("`{text}`: {e}")))
}

/// Lossy rendering for human-facing reports only.
pub fn to_f64(value: &Fraction) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

pub fn ceil_to_usize(value: &Fraction) -> Option<usize> {
    value.ceil().to_integer().to_usize()
}

/// Serde adapter: a `Fraction` as a `"p/q"` string.
pub mod serde_str {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use super::{parse_fraction, Fraction};

    pub fn serialize<S: Serializer>(value: &Fraction, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&value.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Fraction, D::Error> {
        let text = String::deserialize(d)?;
        parse_fraction(&text).map_err(D::Error::custom)
    }
}

pub mod serde_str_opt {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use super::{parse_fraction, Fraction};

    pub fn serialize<S: Serializer>(value: &Option<Fraction>, s: S) -> Result<S::Ok, S::Error> {
        match value {
            Some(v) => s.serialize_some(&v.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Fraction>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|text| parse_fraction(&text).map_err(D::Error::custom))
            .transpose()
    }
}

pub mod serde_str_vec {
    use serde::{de::Error, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    use super::{parse_fraction, Fraction};

    pub fn serialize<S: Serializer>(values: &[Fraction], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(values.len()))?;
        for v in values {
            seq.serialize_element(&v.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Fraction>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|text| parse_fraction(text).map_err(D::Error::custom))
            .collect()
    }
}

/// Serde adapter for reports: `{"exact": "p/q", "decimal": 0.25}`.
pub mod serde_rendered {
    use serde::{ser::SerializeStruct, Serializer};

    use super::{to_f64, Fraction};

    pub fn serialize<S: Serializer>(value: &Fraction, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Rendered", 2)?;
        st.serialize_field("exact", &value.to_string())?;
        st.serialize_field("decimal", &to_f64(value))?;
        st.end()
    }
}

pub mod serde_rendered_opt {
    use serde::Serializer;

    use super::Fraction;

    pub fn serialize<S: Serializer>(value: &Option<Fraction>, s: S) -> Result<S::Ok, S::Error> {
        match value {
            Some(v) => super::serde_rendered::serialize(v, s),
            None => s.serialize_none(),
        }
    }
}

pub mod serde_rendered_matrix {
    use serde::{ser::SerializeSeq, Serializer};

    use super::Fraction;

    pub fn serialize<S: Serializer>(rows: &[Vec<Fraction>], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(rows.len()))?;
        for row in rows {
            let rendered: Vec<String> = row.iter().map(ToString::to_string).collect();
            seq.serialize_element(&rendered)?;
        }
        seq.end()
    }
}
