//! Exact decay exponents: rationals carrying an infinitesimal slack marker.
//!
//! A marker `+` on an exponent `q` means `q + eps` for an arbitrarily small
//! `eps > 0` of our choosing, `-` means `q - eps`. Sums are conservative for
//! upper-bound bookkeeping: mixing `+` and `-` resolves to `-` (the weaker
//! decay claim), since the two infinitesimals are not known to cancel.

use num_rational::Ratio;
use serde::Serialize;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Sub};

pub type Rat = Ratio<i64>;

/// Infinitesimal slack marker on a rational exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Slack {
    /// `q - eps`: strictly less decay than `q`.
    Minus,
    /// Exactly `q`.
    Exact,
    /// `q + eps`: strictly more decay than `q`.
    Plus,
}

impl Slack {
    fn rank(self) -> i8 {
        match self {
            Slack::Minus => -1,
            Slack::Exact => 0,
            Slack::Plus => 1,
        }
    }

    /// Conservative combination under addition of exponents.
    pub fn combine(self, other: Slack) -> Slack {
        match (self, other) {
            (Slack::Exact, s) | (s, Slack::Exact) => s,
            (Slack::Plus, Slack::Plus) => Slack::Plus,
            _ => Slack::Minus,
        }
    }

    fn suffix(self) -> &'static str {
        match self {
            Slack::Minus => "-",
            Slack::Exact => "",
            Slack::Plus => "+",
        }
    }
}

/// A decay exponent: the factor `<x>^-p` in a pointwise bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exponent {
    pub value: Rat,
    pub slack: Slack,
}

impl Exponent {
    pub fn exact(value: Rat) -> Self {
        Self {
            value,
            slack: Slack::Exact,
        }
    }

    pub fn exact_int(value: i64) -> Self {
        Self::exact(Rat::from_integer(value))
    }

    pub fn plus(value: Rat) -> Self {
        Self {
            value,
            slack: Slack::Plus,
        }
    }

    pub fn minus(value: Rat) -> Self {
        Self {
            value,
            slack: Slack::Minus,
        }
    }

    /// Drop the slack marker, keeping the rational envelope.
    pub fn envelope(self) -> Self {
        Self::exact(self.value)
    }

    pub fn double(self) -> Self {
        Self {
            value: self.value * 2,
            slack: self.slack,
        }
    }

    /// Strictly greater than a rational threshold (slack-aware).
    pub fn gt(self, threshold: Rat) -> bool {
        self.value > threshold || (self.value == threshold && self.slack == Slack::Plus)
    }

    /// Strictly less than a rational threshold (slack-aware).
    pub fn lt(self, threshold: Rat) -> bool {
        self.value < threshold || (self.value == threshold && self.slack == Slack::Minus)
    }

    /// At least a rational threshold (not strictly below it).
    pub fn ge(self, threshold: Rat) -> bool {
        !self.lt(threshold)
    }
}

impl Add for Exponent {
    type Output = Exponent;
    fn add(self, rhs: Exponent) -> Exponent {
        Exponent {
            value: self.value + rhs.value,
            slack: self.slack.combine(rhs.slack),
        }
    }
}

impl Sub for Exponent {
    type Output = Exponent;
    fn sub(self, rhs: Exponent) -> Exponent {
        let flipped = match rhs.slack {
            Slack::Plus => Slack::Minus,
            Slack::Minus => Slack::Plus,
            Slack::Exact => Slack::Exact,
        };
        Exponent {
            value: self.value - rhs.value,
            slack: self.slack.combine(flipped),
        }
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .cmp(&other.value)
            .then(self.slack.rank().cmp(&other.slack.rank()))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.value, self.slack.suffix())
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Region a pointwise bound is valid on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    /// `r >= t/2`.
    Exterior,
    /// `r <= 3t/4`.
    Interior,
    /// Whole forward region (`u > 1` in practice).
    Global,
}

impl Region {
    fn name(self) -> &'static str {
        match self {
            Region::Exterior => "exterior",
            Region::Interior => "interior",
            Region::Global => "global",
        }
    }
}

/// Symbolic pointwise bound `<r>^-p_r <v>^-p_v <u>^-p_u` on a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DecayBound {
    pub p_r: Exponent,
    pub p_v: Exponent,
    pub p_u: Exponent,
    pub region: Region,
}

impl DecayBound {
    pub fn global(p_r: Exponent, p_v: Exponent, p_u: Exponent) -> Self {
        Self {
            p_r,
            p_v,
            p_u,
            region: Region::Global,
        }
    }

    /// Total `v`/`u` decay, the quantity that improves monotonically along
    /// a rule trace.
    pub fn total_vu(&self) -> Rat {
        self.p_v.value + self.p_u.value
    }

    /// Rational envelope: all slack markers dropped.
    pub fn envelope(&self) -> Self {
        Self {
            p_r: self.p_r.envelope(),
            p_v: self.p_v.envelope(),
            p_u: self.p_u.envelope(),
            region: self.region,
        }
    }
}

impl fmt::Display for DecayBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(p_r={}, p_v={}, p_u={}; {})",
            self.p_r,
            self.p_v,
            self.p_u,
            self.region.name()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    #[test]
    fn conservative_slack_addition() {
        let a = Exponent::plus(r(2, 1));
        let b = Exponent::minus(r(1, 2));
        let s = a + b;
        assert_eq!(s.value, r(5, 2));
        assert_eq!(s.slack, Slack::Minus);
        assert_eq!(
            (Exponent::exact_int(1) + Exponent::plus(r(1, 3))).slack,
            Slack::Plus
        );
    }

    #[test]
    fn strict_comparisons_respect_slack() {
        assert!(Exponent::plus(r(2, 1)).gt(r(2, 1)));
        assert!(!Exponent::exact_int(2).gt(r(2, 1)));
        assert!(Exponent::minus(r(1, 1)).lt(r(1, 1)));
        assert!(Exponent::minus(r(1, 1)) < Exponent::exact_int(1));
        assert!(Exponent::exact_int(1) < Exponent::plus(r(1, 1)));
    }

    #[test]
    fn envelope_strips_slack_only() {
        let e = Exponent::minus(r(3, 4)).envelope();
        assert_eq!(e, Exponent::exact(r(3, 4)));
    }

    #[test]
    fn display_forms() {
        assert_eq!(Exponent::plus(r(2, 1)).to_string(), "2+");
        assert_eq!(Exponent::minus(r(1, 2)).to_string(), "1/2-");
        assert_eq!(Exponent::exact_int(0).to_string(), "0");
    }
}
