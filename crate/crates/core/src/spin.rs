//! Half-integer spin quantum numbers and `(F, mF)` level labels.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// A non-negative half-integer (0, 1/2, 1, 3/2, ...), stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HalfSpin(u32);

impl HalfSpin {
    pub const ZERO: HalfSpin = HalfSpin(0);
    pub const HALF: HalfSpin = HalfSpin(1);

    /// Construct from twice the value (`3` means spin 3/2).
    pub const fn from_doubled(two_s: u32) -> Self {
        HalfSpin(two_s)
    }

    /// Construct from a floating-point value, rejecting non-half-integers.
    pub fn new(value: f64) -> Result<Self> {
        let two = value * 2.0;
        if !(two.is_finite() && two >= 0.0 && (two - two.round()).abs() < 1e-9) {
            return Err(Error::InvalidSpin { value });
        }
        Ok(HalfSpin(two.round() as u32))
    }

    #[inline]
    pub fn doubled(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Number of magnetic sublevels, `2s + 1`.
    #[inline]
    pub fn multiplicity(self) -> usize {
        self.0 as usize + 1
    }

    /// Projections `m = -s ..= s` as doubled integers, ascending.
    pub fn projections(self) -> impl Iterator<Item = i32> {
        let two_s = self.0 as i32;
        (-two_s..=two_s).step_by(2)
    }
}

impl TryFrom<f64> for HalfSpin {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        HalfSpin::new(v)
    }
}

impl From<HalfSpin> for f64 {
    fn from(s: HalfSpin) -> f64 {
        s.value()
    }
}

impl fmt::Display for HalfSpin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Format a doubled projection quantum number (`-3` -> `-3/2`).
pub(crate) fn fmt_doubled(two_m: i32) -> String {
    if two_m % 2 == 0 {
        format!("{}", two_m / 2)
    } else {
        format!("{}/2", two_m)
    }
}

/// An `|F, mF⟩` label within the hyperfine manifold.
///
/// Both quantum numbers are stored doubled so that integer and
/// half-integer manifolds share one representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateLabel {
    pub two_f: u32,
    pub two_mf: i32,
}

impl StateLabel {
    pub const fn from_doubled(two_f: u32, two_mf: i32) -> Self {
        StateLabel { two_f, two_mf }
    }

    /// Convenience constructor for integer `F`, `mF` (the `I = 3/2` case).
    pub const fn new(f: u32, mf: i32) -> Self {
        StateLabel {
            two_f: 2 * f,
            two_mf: 2 * mf,
        }
    }

    #[inline]
    pub fn f(&self) -> f64 {
        self.two_f as f64 / 2.0
    }

    #[inline]
    pub fn mf(&self) -> f64 {
        self.two_mf as f64 / 2.0
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "|{},{}>",
            HalfSpin::from_doubled(self.two_f),
            fmt_doubled(self.two_mf)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_spin_construction() {
        assert_eq!(HalfSpin::new(1.5).unwrap().doubled(), 3);
        assert_eq!(HalfSpin::new(0.0).unwrap().doubled(), 0);
        assert_eq!(HalfSpin::new(2.0).unwrap().multiplicity(), 5);
        assert!(HalfSpin::new(0.7).is_err());
        assert!(HalfSpin::new(-0.5).is_err());
        assert!(HalfSpin::new(f64::NAN).is_err());
    }

    #[test]
    fn projections_ascend() {
        let ps: Vec<i32> = HalfSpin::new(1.5).unwrap().projections().collect();
        assert_eq!(ps, vec![-3, -1, 1, 3]);
    }

    #[test]
    fn display_forms() {
        assert_eq!(HalfSpin::new(1.5).unwrap().to_string(), "3/2");
        assert_eq!(HalfSpin::new(2.0).unwrap().to_string(), "2");
        assert_eq!(StateLabel::new(2, -1).to_string(), "|2,-1>");
        assert_eq!(StateLabel::from_doubled(3, -1).to_string(), "|3/2,-1/2>");
    }
}
