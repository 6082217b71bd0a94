//! The ordered cost domain: lexicographic integer pairs with an absorbing infinity.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

/// Components saturate at this magnitude instead of overflowing.
pub const SATURATION: i64 = 1 << 62;

/// A cost value. `Finite` values compare lexicographically (primary first),
/// and every finite value is below `Infinity`.
///
/// The derived ordering relies on the variant order: `Finite` must stay first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CostVec {
    Finite { primary: i64, secondary: i64 },
    Infinity,
}

impl CostVec {
    pub const ZERO: CostVec = CostVec::Finite {
        primary: 0,
        secondary: 0,
    };

    /// Builds a finite value, clamping both components into the saturation range.
    pub const fn new(primary: i64, secondary: i64) -> Self {
        CostVec::Finite {
            primary: clamp(primary),
            secondary: clamp(secondary),
        }
    }

    pub const fn primary_only(primary: i64) -> Self {
        Self::new(primary, 0)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, CostVec::Infinity)
    }

    pub fn is_finite(&self) -> bool {
        !self.is_infinite()
    }

    pub fn primary(&self) -> Option<i64> {
        match *self {
            CostVec::Finite { primary, .. } => Some(primary),
            CostVec::Infinity => None,
        }
    }

    pub fn secondary(&self) -> Option<i64> {
        match *self {
            CostVec::Finite { secondary, .. } => Some(secondary),
            CostVec::Infinity => None,
        }
    }

    /// Whether both components are non-negative (infinity counts as non-negative).
    pub fn is_non_negative(&self) -> bool {
        match *self {
            CostVec::Finite { primary, secondary } => primary >= 0 && secondary >= 0,
            CostVec::Infinity => true,
        }
    }

    /// Strict lexicographic comparison.
    pub fn less_than(&self, other: &CostVec) -> bool {
        self.cmp(other) == Ordering::Less
    }
}

const fn clamp(x: i64) -> i64 {
    if x > SATURATION {
        SATURATION
    } else if x < -SATURATION {
        -SATURATION
    } else {
        x
    }
}

impl Default for CostVec {
    fn default() -> Self {
        CostVec::ZERO
    }
}

impl Add for CostVec {
    type Output = CostVec;

    fn add(self, rhs: CostVec) -> CostVec {
        match (self, rhs) {
            (
                CostVec::Finite {
                    primary: p1,
                    secondary: s1,
                },
                CostVec::Finite {
                    primary: p2,
                    secondary: s2,
                },
            ) => CostVec::new(p1.saturating_add(p2), s1.saturating_add(s2)),
            _ => CostVec::Infinity,
        }
    }
}

impl AddAssign for CostVec {
    fn add_assign(&mut self, rhs: CostVec) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for CostVec {
    fn sum<I: Iterator<Item = CostVec>>(iter: I) -> CostVec {
        iter.fold(CostVec::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for CostVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostVec::Finite { primary, secondary } => write!(f, "[{primary},{secondary}]"),
            CostVec::Infinity => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed cost `{0}`: expected `inf` or `[primary,secondary]`")]
pub struct ParseCostError(pub String);

impl FromStr for CostVec {
    type Err = ParseCostError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t == "inf" {
            return Ok(CostVec::Infinity);
        }
        let inner = t
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| ParseCostError(s.to_string()))?;
        let mut parts = inner.split(',');
        let (Some(p), Some(q), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(ParseCostError(s.to_string()));
        };
        let p: i64 = p
            .trim()
            .parse()
            .map_err(|_| ParseCostError(s.to_string()))?;
        let q: i64 = q
            .trim()
            .parse()
            .map_err(|_| ParseCostError(s.to_string()))?;
        Ok(CostVec::new(p, q))
    }
}

impl Serialize for CostVec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match *self {
            CostVec::Infinity => serializer.serialize_str("inf"),
            CostVec::Finite { primary, secondary } => {
                let mut seq = serializer.serialize_seq(Some(2))?;
                seq.serialize_element(&primary)?;
                seq.serialize_element(&secondary)?;
                seq.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for CostVec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct CostVisitor;

        impl<'de> Visitor<'de> for CostVisitor {
            type Value = CostVec;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("the string \"inf\" or a two-element integer array")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<CostVec, E> {
                if v == "inf" {
                    Ok(CostVec::Infinity)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<CostVec, A::Error> {
                let p: i64 = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let s: i64 = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if seq.next_element::<i64>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &self));
                }
                Ok(CostVec::new(p, s))
            }
        }

        deserializer.deserialize_any(CostVisitor)
    }
}
