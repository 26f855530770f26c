//! Shared exact-number plumbing: integer/rational aliases and their JSON
//! encodings.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

pub type Int = BigInt;
pub type Rat = BigRational;

/// Largest magnitude that survives a round trip through an IEEE double.
const JSON_SAFE_LIMIT: i64 = 1 << 53;

pub fn int(v: i64) -> Int {
    Int::from(v)
}

pub fn rat(v: i64) -> Rat {
    Rat::from_integer(Int::from(v))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(Int::from(n), Int::from(d))
}

pub fn is_even(v: &Int) -> bool {
    (v % 2u8).is_zero()
}

/// `(-1)^e` for an integer exponent.
pub fn sign_power(e: &Int) -> i8 {
    if is_even(e) {
        1
    } else {
        -1
    }
}

/// Formats a rational as `"n/d"` (denominator always present).
pub fn rat_to_string(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Formats a rational compactly (`3`, `-1/2`) for human-facing output.
pub fn rat_display(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: Int = n.trim().parse().ok()?;
            let d: Int = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rat::new(n, d))
        }
        None => s.parse::<Int>().ok().map(Rat::from_integer),
    }
}

pub fn int_to_json(v: &Int) -> serde_json::Value {
    match v.to_i64() {
        Some(x) if x.abs() <= JSON_SAFE_LIMIT => serde_json::Value::from(x),
        _ => serde_json::Value::String(v.to_string()),
    }
}

pub fn int_from_json(v: &serde_json::Value) -> Option<Int> {
    match v {
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Some(Int::from(i))
            } else { n.as_u64().map(Int::from) }
        }
        serde_json::Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

/// Serde adapter: integers as JSON numbers, or decimal strings beyond 2^53.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JsonInt(pub Int);

impl Serialize for JsonInt {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        int_to_json(&self.0).serialize(s)
    }
}

impl<'de> Deserialize<'de> for JsonInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        int_from_json(&v)
            .map(JsonInt)
            .ok_or_else(|| de::Error::custom(format!("expected an integer, found {v}")))
    }
}

/// Serde adapter for rationals encoded as `"n/d"` strings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JsonRat(pub Rat);

impl Serialize for JsonRat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&rat_to_string(&self.0))
    }
}

impl<'de> Deserialize<'de> for JsonRat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        let parsed = match &v {
            serde_json::Value::String(s) => parse_rat(s),
            other => int_from_json(other).map(Rat::from_integer),
        };
        parsed
            .map(JsonRat)
            .ok_or_else(|| de::Error::custom(format!("expected a rational \"n/d\", found {v}")))
    }
}

pub fn lcm(a: &Int, b: &Int) -> Int {
    use num_integer::Integer;
    a.lcm(b).abs()
}

pub fn is_integral(r: &Rat) -> bool {
    r.denom().is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn big_integers_switch_to_strings() {
        let small = int(1 << 53);
        assert_eq!(int_to_json(&small), serde_json::json!(9007199254740992i64));
        let big = int(1 << 53) + 1;
        assert_eq!(int_to_json(&big), serde_json::json!("9007199254740993"));
        assert_eq!(int_from_json(&serde_json::json!("9007199254740993")), Some(big));
        assert_eq!(int_from_json(&serde_json::json!(1.5)), None);
    }

    #[test]
    fn rational_strings() {
        assert_eq!(rat_to_string(&ratio(-2, 4)), "-1/2");
        assert_eq!(rat_to_string(&rat(3)), "3/1");
        assert_eq!(parse_rat("-1/2"), Some(ratio(-1, 2)));
        assert_eq!(parse_rat("7"), Some(rat(7)));
        assert_eq!(parse_rat("1/0"), None);
        assert_eq!(rat_display(&ratio(6, 3)), "2");
    }
}
