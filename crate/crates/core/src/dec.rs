//! JSON encoding of arbitrary-precision integers as decimal strings.
//!
//! Emitted integers are always strings. Parsing also accepts plain JSON
//! integers so hand-written instance files stay convenient.

use std::fmt;

use num_bigint::BigInt;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dec(pub BigInt);

impl Serialize for Dec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

struct DecVisitor;

impl Visitor<'_> for DecVisitor {
    type Value = Dec;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("an integer or a decimal integer string")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Dec, E> {
        Ok(Dec(v.into()))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Dec, E> {
        Ok(Dec(v.into()))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Dec, E> {
        let trimmed = v.strip_prefix('+').unwrap_or(v);
        let digits = trimmed.strip_prefix('-').unwrap_or(trimmed);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(E::custom(format!("not a decimal integer: {v:?}")));
        }
        trimmed
            .parse::<BigInt>()
            .map(Dec)
            .map_err(|e| E::custom(format!("not a decimal integer: {v:?} ({e})")))
    }
}

impl<'de> Deserialize<'de> for Dec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_any(DecVisitor)
    }
}

/// `#[serde(with = "dec::int")]` for `BigInt` fields.
pub mod int {
    use super::*;

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        Dec::deserialize(d).map(|x| x.0)
    }
}

/// `#[serde(with = "dec::int_u32")]`: small counts carried as decimal strings.
pub mod int_u32 {
    use super::*;
    use num_traits::ToPrimitive;

    pub fn serialize<S: Serializer>(v: &u32, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u32, D::Error> {
        let v = Dec::deserialize(d)?.0;
        v.to_u32()
            .ok_or_else(|| de::Error::custom(format!("{v} does not fit in u32")))
    }
}

/// `#[serde(with = "dec::int_u64")]`.
pub mod int_u64 {
    use super::*;
    use num_traits::ToPrimitive;

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let v = Dec::deserialize(d)?.0;
        v.to_u64()
            .ok_or_else(|| de::Error::custom(format!("{v} does not fit in u64")))
    }
}

/// `#[serde(with = "dec::ints")]` for `Vec<BigInt>` fields.
pub mod ints {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Ok(Vec::<Dec>::deserialize(d)?.into_iter().map(|x| x.0).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_numbers_and_strings() {
        let v: Vec<Dec> = serde_json::from_str(r#"[1, "-22", "123456789012345678901234567890"]"#).unwrap();
        assert_eq!(v[1].0, BigInt::from(-22));
        assert_eq!(
            v[2].0.to_string(),
            "123456789012345678901234567890"
        );
        assert_eq!(serde_json::to_string(&v[1]).unwrap(), "\"-22\"");
    }

    #[test]
    fn rejects_garbage() {
        assert!(serde_json::from_str::<Dec>(r#""1e3""#).is_err());
        assert!(serde_json::from_str::<Dec>(r#""""#).is_err());
        assert!(serde_json::from_str::<Dec>("1.5").is_err());
    }
}
