use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::numfmt::fmt_g;

/// A real number or one of the two poles.
///
/// Wraps an `f64` that is never NaN, which gives a total order. Arithmetic on
/// raw values happens on `f64` inside the engine; this type is what the public
/// API hands out.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct ExtendedReal(f64);

impl ExtendedReal {
    pub const POS_INF: ExtendedReal = ExtendedReal(f64::INFINITY);
    pub const NEG_INF: ExtendedReal = ExtendedReal(f64::NEG_INFINITY);
    pub const ZERO: ExtendedReal = ExtendedReal(0.0);

    /// Returns `None` for NaN.
    pub fn new(v: f64) -> Option<Self> {
        if v.is_nan() {
            None
        } else {
            Some(ExtendedReal(v))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    /// `|self - other| <= tol`, treating equal poles as equal.
    pub fn approx_eq(self, other: ExtendedReal, tol: f64) -> bool {
        if self.0 == other.0 {
            return true;
        }
        (self.0 - other.0).abs() <= tol
    }
}

impl Eq for ExtendedReal {}

impl Ord for ExtendedReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).expect("ExtendedReal is never NaN")
    }
}

impl From<ExtendedReal> for f64 {
    fn from(v: ExtendedReal) -> f64 {
        v.0
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_g(self.0, 12))
    }
}

// Poles serialize as the strings "inf" / "-inf" since JSON has no infinity.
impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else if self.0 > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(ExtendedReal(v)),
            Repr::Str(s) => match s.as_str() {
                "inf" | "+inf" => Ok(ExtendedReal::POS_INF),
                "-inf" => Ok(ExtendedReal::NEG_INF),
                other => Err(serde::de::Error::custom(format!("not an extended real: {other}"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_order_and_poles() {
        let mut v = vec![
            ExtendedReal::POS_INF,
            ExtendedReal::new(1.5).unwrap(),
            ExtendedReal::NEG_INF,
            ExtendedReal::ZERO,
        ];
        v.sort();
        assert_eq!(v[0], ExtendedReal::NEG_INF);
        assert_eq!(v[3], ExtendedReal::POS_INF);
        assert!(ExtendedReal::new(f64::NAN).is_none());
    }

    #[test]
    fn json_round_trip() {
        let xs = vec![ExtendedReal::POS_INF, ExtendedReal::new(-2.25).unwrap()];
        let s = serde_json::to_string(&xs).unwrap();
        assert_eq!(s, r#"["inf",-2.25]"#);
        let back: Vec<ExtendedReal> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, xs);
    }
}
