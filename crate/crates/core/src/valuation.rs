//! Piecewise-constant valuations on the cake.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fraction::{self, Fraction};

/// The first property of a valuation that failed validation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValuationError {
    #[error("need at least two breakpoints, got {0}")]
    TooFewBreakpoints(usize),
    #[error("expected {expected} densities for the breakpoints given, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("breakpoints must start at 0 and end at 1")]
    Endpoints,
    #[error("breakpoints not strictly increasing at index {0}")]
    NotIncreasing(usize),
    #[error("density {index} is negative ({value})")]
    Negative { index: usize, value: Fraction },
    #[error("total mass is {0}, expected exactly 1")]
    NotNormalized(Fraction),
}

/// Checks breakpoint ordering, nonnegativity and exact unit mass, reporting
/// the first violation found.
pub fn validate(breakpoints: &[Fraction], densities: &[Fraction]) -> Result<(), ValuationError> {
    if breakpoints.len() < 2 {
        return Err(ValuationError::TooFewBreakpoints(breakpoints.len()));
    }
    if densities.len() != breakpoints.len() - 1 {
        return Err(ValuationError::LengthMismatch {
            expected: breakpoints.len() - 1,
            actual: densities.len(),
        });
    }
    if !breakpoints[0].is_zero() || !breakpoints[breakpoints.len() - 1].is_one() {
        return Err(ValuationError::Endpoints);
    }
    if let Some(k) = breakpoints.windows(2).position(|w| w[0] >= w[1]) {
        return Err(ValuationError::NotIncreasing(k + 1));
    }
    if let Some((index, value)) = densities.iter().enumerate().find(|(_, d)| d.is_negative()) {
        return Err(ValuationError::Negative {
            index,
            value: value.clone(),
        });
    }
    let mass: Fraction = densities
        .iter()
        .zip(breakpoints.windows(2))
        .map(|(d, w)| d * (&w[1] - &w[0]))
        .sum();
    if !mass.is_one() {
        return Err(ValuationError::NotNormalized(mass));
    }
    Ok(())
}

impl From<ValuationError> for crate::CakeError {
    fn from(e: ValuationError) -> Self {
        crate::CakeError::Instance(e.to_string())
    }
}

/// A normalized, piecewise-constant density on `[0, 1]`.
///
/// All queries are answered exactly. The cumulative mass at each breakpoint is
/// cached so a point query costs one binary search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "ValuationRepr", try_from = "ValuationRepr")]
pub struct Valuation {
    breakpoints: Vec<Fraction>,
    densities: Vec<Fraction>,
    cumulative: Vec<Fraction>,
}

impl Valuation {
    pub fn new(breakpoints: Vec<Fraction>, densities: Vec<Fraction>) -> Result<Self, ValuationError> {
        validate(&breakpoints, &densities)?;
        let mut cumulative = Vec::with_capacity(breakpoints.len());
        let mut acc = Fraction::zero();
        cumulative.push(acc.clone());
        for (d, w) in densities.iter().zip(breakpoints.windows(2)) {
            acc += d * (&w[1] - &w[0]);
            cumulative.push(acc.clone());
        }
        Ok(Valuation {
            breakpoints,
            densities,
            cumulative,
        })
    }

    pub fn uniform() -> Self {
        Valuation::new(vec![fraction::zero(), fraction::one()], vec![fraction::one()])
            .expect("uniform density is valid")
    }

    /// Rescales nonnegative per-segment weights into densities of total mass 1.
    pub fn from_weights(
        breakpoints: Vec<Fraction>,
        weights: &[Fraction],
    ) -> Result<Self, ValuationError> {
        if breakpoints.len() < 2 || weights.len() != breakpoints.len() - 1 {
            // let validate report the precise shape problem
            return Valuation::new(breakpoints, weights.to_vec());
        }
        let mass: Fraction = weights
            .iter()
            .zip(breakpoints.windows(2))
            .map(|(w, b)| w * (&b[1] - &b[0]))
            .sum();
        if !mass.is_positive() {
            return Err(ValuationError::NotNormalized(mass));
        }
        let densities = weights.iter().map(|w| w / &mass).collect();
        Valuation::new(breakpoints, densities)
    }

    pub fn breakpoints(&self) -> &[Fraction] {
        &self.breakpoints
    }

    pub fn densities(&self) -> &[Fraction] {
        &self.densities
    }

    fn segment_of(&self, x: &Fraction) -> usize {
        let idx = self.breakpoints.partition_point(|b| b <= x);
        idx.saturating_sub(1).min(self.densities.len() - 1)
    }

    /// Mass of `[0, x]`; `x` must lie in `[0, 1]`.
    pub fn mass_before(&self, x: &Fraction) -> Fraction {
        let k = self.segment_of(x);
        &self.cumulative[k] + &self.densities[k] * (x - &self.breakpoints[k])
    }

    /// Leftmost point `x` with `mass_before(x) >= mass`, or `None` when `mass > 1`.
    pub fn point_at_mass(&self, mass: &Fraction) -> Option<Fraction> {
        if !mass.is_positive() {
            return Some(Fraction::zero());
        }
        if mass > &self.cumulative[self.cumulative.len() - 1] {
            return None;
        }
        // first segment whose right-end cumulative mass reaches the target
        let k = self.cumulative[1..].partition_point(|c| c < mass);
        let start = &self.breakpoints[k];
        let density = &self.densities[k];
        debug_assert!(density.is_positive());
        Some(start + (mass - &self.cumulative[k]) / density)
    }

    /// Uncounted value of `[x, y]`. Callers guarantee `0 <= x <= y <= 1`.
    pub fn value(&self, x: &Fraction, y: &Fraction) -> Fraction {
        self.mass_before(y) - self.mass_before(x)
    }

    pub fn value_of(&self, piece: &crate::Interval) -> Fraction {
        match piece.bounds() {
            None => Fraction::zero(),
            Some((lo, hi)) => self.value(lo, hi),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ValuationRepr {
    #[serde(with = "fraction::serde_str_vec")]
    breakpoints: Vec<Fraction>,
    #[serde(with = "fraction::serde_str_vec")]
    densities: Vec<Fraction>,
}

impl From<Valuation> for ValuationRepr {
    fn from(v: Valuation) -> Self {
        ValuationRepr {
            breakpoints: v.breakpoints,
            densities: v.densities,
        }
    }
}

impl TryFrom<ValuationRepr> for Valuation {
    type Error = ValuationError;

    fn try_from(r: ValuationRepr) -> Result<Self, Self::Error> {
        Valuation::new(r.breakpoints, r.densities)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fraction::{frac, int};

    #[test]
    fn uniform_is_valid() {
        let v = Valuation::uniform();
        assert!(validate(v.breakpoints(), v.densities()).is_ok());
    }

    #[test]
    fn double_mass_is_a_normalization_violation() {
        let err = validate(&[frac(0, 1), frac(1, 2), frac(1, 1)], &[int(2), int(2)]).unwrap_err();
        assert_eq!(err, ValuationError::NotNormalized(int(2)));
    }

    #[test]
    fn negative_density_is_reported() {
        let err = validate(&[frac(0, 1), frac(1, 2), frac(1, 1)], &[int(3), int(-1)]).unwrap_err();
        assert!(matches!(err, ValuationError::Negative { index: 1, .. }));
    }

    #[test]
    fn shape_errors() {
        assert_eq!(
            validate(&[frac(0, 1)], &[]),
            Err(ValuationError::TooFewBreakpoints(1))
        );
        assert_eq!(
            validate(&[frac(0, 1), frac(1, 1)], &[int(1), int(1)]),
            Err(ValuationError::LengthMismatch {
                expected: 1,
                actual: 2
            })
        );
        assert_eq!(
            validate(&[frac(1, 4), frac(1, 1)], &[frac(4, 3)]),
            Err(ValuationError::Endpoints)
        );
        assert_eq!(
            validate(&[frac(0, 1), frac(1, 2), frac(1, 2), frac(1, 1)], &[int(1), int(1), int(1)]),
            Err(ValuationError::NotIncreasing(2))
        );
    }

    #[test]
    fn from_weights_normalizes_exactly() {
        let v = Valuation::from_weights(
            vec![frac(0, 1), frac(1, 3), frac(1, 1)],
            &[int(3), int(1)],
        )
        .unwrap();
        // mass = 3*(1/3) + 1*(2/3) = 5/3
        assert_eq!(v.densities(), &[frac(9, 5), frac(3, 5)]);
        assert!(Valuation::from_weights(vec![frac(0, 1), frac(1, 1)], &[int(0)]).is_err());
    }

    #[test]
    fn point_at_mass_skips_zero_plateaus() {
        let v = Valuation::new(vec![frac(0, 1), frac(1, 2), frac(1, 1)], vec![int(0), int(2)]).unwrap();
        assert_eq!(v.point_at_mass(&frac(1, 2)), Some(frac(3, 4)));
        assert_eq!(v.point_at_mass(&frac(0, 1)), Some(frac(0, 1)));
        assert_eq!(v.point_at_mass(&frac(1, 1)), Some(frac(1, 1)));
        assert_eq!(v.point_at_mass(&frac(3, 2)), None);
        // mass 0 at 1/2 is first reached at 0, mass 1/1000 past the plateau
        assert!(v.point_at_mass(&frac(1, 1000)).unwrap() > frac(1, 2));
    }

    #[test]
    fn json_round_trip_rejects_invalid() {
        let text = r#"{"breakpoints":["0","1/3","1"],"densities":["3/2","3/4"]}"#;
        let v: Valuation = serde_json::from_str(text).unwrap();
        assert_eq!(serde_json::to_string(&v).unwrap(), text);
        let bad = r#"{"breakpoints":["0","1"],"densities":["2"]}"#;
        assert!(serde_json::from_str::<Valuation>(bad).is_err());
    }
}
