use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{CakeError, Result};
use crate::fraction::Fraction;

/// A closed sub-interval of the cake `[0, 1]`, or the empty piece.
///
/// Two intervals that meet only at an endpoint are treated as disjoint,
/// since valuations are atomless.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(into = "IntervalRepr", try_from = "IntervalRepr")]
pub enum Interval {
    #[default]
    Empty,
    Closed { lo: Fraction, hi: Fraction },
}

impl Interval {
    pub fn new(lo: Fraction, hi: Fraction) -> Result<Self> {
        if lo < Fraction::zero() || hi > Fraction::one() || lo > hi {
            return Err(CakeError::Domain(format!(
                "[{lo}, {hi}] is not a sub-interval of [0, 1]"
            )));
        }
        Ok(Interval::Closed { lo, hi })
    }

    /// Builds `[lo, hi]` for points the caller already knows are ordered and in range.
    pub(crate) fn span(lo: Fraction, hi: Fraction) -> Self {
        debug_assert!(lo <= hi);
        Interval::Closed { lo, hi }
    }

    pub fn whole() -> Self {
        Interval::Closed {
            lo: Fraction::zero(),
            hi: Fraction::one(),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Interval::Empty)
    }

    pub fn bounds(&self) -> Option<(&Fraction, &Fraction)> {
        match self {
            Interval::Empty => None,
            Interval::Closed { lo, hi } => Some((lo, hi)),
        }
    }

    pub fn lo(&self) -> Option<&Fraction> {
        self.bounds().map(|(lo, _)| lo)
    }

    pub fn hi(&self) -> Option<&Fraction> {
        self.bounds().map(|(_, hi)| hi)
    }

    pub fn length(&self) -> Fraction {
        match self {
            Interval::Empty => Fraction::zero(),
            Interval::Closed { lo, hi } => hi - lo,
        }
    }

    /// True when the two pieces share at most an endpoint.
    pub fn is_disjoint(&self, other: &Interval) -> bool {
        match (self.bounds(), other.bounds()) {
            (Some((a_lo, a_hi)), Some((b_lo, b_hi))) => a_lo.max(b_lo) >= a_hi.min(b_hi),
            _ => true,
        }
    }

    /// `other ⊆ self`; the empty piece is contained in everything.
    pub fn contains(&self, other: &Interval) -> bool {
        match (self.bounds(), other.bounds()) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some((a_lo, a_hi)), Some((b_lo, b_hi))) => a_lo <= b_lo && b_hi <= a_hi,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Interval::Empty => write!(f, "∅"),
            Interval::Closed { lo, hi } => write!(f, "[{lo}, {hi}]"),
        }
    }
}

/// Wire form: `{"lo": "p/q", "hi": "p/q"}`, both omitted for the empty piece.
#[derive(Serialize, Deserialize)]
struct IntervalRepr {
    #[serde(
        default,
        with = "crate::fraction::serde_str_opt",
        skip_serializing_if = "Option::is_none"
    )]
    lo: Option<Fraction>,
    #[serde(
        default,
        with = "crate::fraction::serde_str_opt",
        skip_serializing_if = "Option::is_none"
    )]
    hi: Option<Fraction>,
}

impl From<Interval> for IntervalRepr {
    fn from(value: Interval) -> Self {
        match value {
            Interval::Empty => IntervalRepr { lo: None, hi: None },
            Interval::Closed { lo, hi } => IntervalRepr {
                lo: Some(lo),
                hi: Some(hi),
            },
        }
    }
}

impl TryFrom<IntervalRepr> for Interval {
    type Error = CakeError;

    fn try_from(value: IntervalRepr) -> Result<Self> {
        match (value.lo, value.hi) {
            (None, None) => Ok(Interval::Empty),
            (Some(lo), Some(hi)) => Interval::new(lo, hi),
            _ => Err(CakeError::Parse(
                "an interval needs both `lo` and `hi`, or neither".into(),
            )),
        }
    }
}
