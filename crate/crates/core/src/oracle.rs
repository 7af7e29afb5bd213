//! Robertson-Webb query access with query accounting.

use std::sync::atomic::{AtomicU64, Ordering};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{CakeError, Result};
use crate::fraction::Fraction;
use crate::interval::Interval;
use crate::valuation::Valuation;

/// Shared eval/cut counters. Relaxed atomics are enough: counts are only
/// read after the run that produced them has finished.
#[derive(Debug, Default)]
pub struct QueryCounter {
    evals: AtomicU64,
    cuts: AtomicU64,
}

impl QueryCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn counts(&self) -> QueryCounts {
        QueryCounts {
            eval: self.evals.load(Ordering::Relaxed),
            cut: self.cuts.load(Ordering::Relaxed),
        }
    }

    fn record_eval(&self) {
        self.evals.fetch_add(1, Ordering::Relaxed);
    }

    fn record_cut(&self) {
        self.cuts.fetch_add(1, Ordering::Relaxed);
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryCounts {
    pub eval: u64,
    pub cut: u64,
}

impl std::ops::Add for QueryCounts {
    type Output = QueryCounts;

    fn add(self, rhs: QueryCounts) -> QueryCounts {
        QueryCounts {
            eval: self.eval + rhs.eval,
            cut: self.cut + rhs.cut,
        }
    }
}

fn check_point(x: &Fraction, what: &str) -> Result<()> {
    if x.is_negative() || x > &Fraction::one() {
        return Err(CakeError::Domain(format!("{what} = {x} lies outside [0, 1]")));
    }
    Ok(())
}

/// One agent's valuation seen through Eval and Cut queries.
#[derive(Clone, Copy, Debug)]
pub struct Oracle<'a> {
    valuation: &'a Valuation,
    counter: &'a QueryCounter,
}

impl<'a> Oracle<'a> {
    pub fn new(valuation: &'a Valuation, counter: &'a QueryCounter) -> Self {
        Oracle { valuation, counter }
    }

    pub fn valuation(&self) -> &'a Valuation {
        self.valuation
    }

    /// `Eval(x, y)`: the exact value of `[x, y]`.
    pub fn eval(&self, x: &Fraction, y: &Fraction) -> Result<Fraction> {
        check_point(x, "x")?;
        check_point(y, "y")?;
        if x > y {
            return Err(CakeError::Domain(format!("eval needs x <= y, got [{x}, {y}]")));
        }
        self.counter.record_eval();
        Ok(self.valuation.value(x, y))
    }

    /// Value of a piece; the empty piece is worth 0 and costs no query.
    pub fn eval_piece(&self, piece: &Interval) -> Result<Fraction> {
        match piece.bounds() {
            None => Ok(Fraction::zero()),
            Some((lo, hi)) => self.eval(lo, hi),
        }
    }

    /// `Cut(x, nu)`: the leftmost `y` in `[x, 1]` with `Eval(x, y) >= nu`, or `1`
    /// when the rest of the cake is worth less than `nu`. Callers that need the
    /// target reached must re-check the returned point.
    ///
    /// `nu = 1` is accepted as well, since the hat-valuation cut asks for it.
    pub fn cut(&self, x: &Fraction, nu: &Fraction) -> Result<Fraction> {
        check_point(x, "x")?;
        if !nu.is_positive() || nu > &Fraction::one() {
            return Err(CakeError::Domain(format!("cut value {nu} outside (0, 1]")));
        }
        self.counter.record_cut();
        let target = self.valuation.mass_before(x) + nu;
        Ok(self
            .valuation
            .point_at_mass(&target)
            .unwrap_or_else(Fraction::one))
    }

    /// Leftmost `z` in `[x, y]` with `Eval(x, z) = lambda * Eval(x, y)`.
    pub fn divide_point(&self, x: &Fraction, y: &Fraction, lambda: &Fraction) -> Result<Fraction> {
        check_point(x, "x")?;
        check_point(y, "y")?;
        if x > y {
            return Err(CakeError::Domain(format!("divide_point needs x <= y, got [{x}, {y}]")));
        }
        if lambda.is_negative() || lambda > &Fraction::one() {
            return Err(CakeError::Domain(format!("lambda = {lambda} outside [0, 1]")));
        }
        self.counter.record_cut();
        let start = self.valuation.mass_before(x);
        let total = self.valuation.mass_before(y) - &start;
        if lambda.is_zero() || total.is_zero() {
            return Ok(x.clone());
        }
        let target = start + lambda * total;
        self.valuation
            .point_at_mass(&target)
            .ok_or_else(|| CakeError::Internal(format!("mass {target} unreachable")))
    }
}
