//! The bifurcation-aware extension `v̂` of a valuation.
//!
//! An interval `[x, y]` is *bifurcating* for an agent when it is worth at
//! least 1/4 and at most 1/2 of the agent's value lies on either side of it.
//! `v̂` scores bifurcating intervals as 1 and everything else at face value;
//! it is monotone under inclusion but neither additive nor divisible.

use num_traits::{One, Signed, Zero};

use crate::error::{CakeError, Result};
use crate::fraction::{frac, Fraction};
use crate::interval::Interval;
use crate::oracle::Oracle;

pub fn quarter() -> Fraction {
    frac(1, 4)
}

pub fn half() -> Fraction {
    frac(1, 2)
}

/// `v̂` of a piece together with the branch that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HatValue {
    pub value: Fraction,
    pub bifurcating: bool,
}

/// Bifurcation test from three Eval queries. The empty piece never bifurcates.
pub fn is_bifurcating(oracle: &Oracle<'_>, piece: &Interval) -> Result<bool> {
    Ok(hat_eval(oracle, piece)?.bifurcating)
}

pub fn hat_eval(oracle: &Oracle<'_>, piece: &Interval) -> Result<HatValue> {
    let Some((lo, hi)) = piece.bounds() else {
        return Ok(HatValue {
            value: Fraction::zero(),
            bifurcating: false,
        });
    };
    let inside = oracle.eval(lo, hi)?;
    let bifurcating = inside >= quarter()
        && oracle.eval(&Fraction::zero(), lo)? <= half()
        && oracle.eval(hi, &Fraction::one())? <= half();
    Ok(if bifurcating {
        HatValue {
            value: Fraction::one(),
            bifurcating: true,
        }
    } else {
        HatValue {
            value: inside,
            bifurcating: false,
        }
    })
}

/// Leftmost `y` in `[x, 1]` with `v̂([x, y]) >= nu`, or `None`.
///
/// Two candidates are raised: the plain cut point for `nu`, and the right end
/// of the shortest bifurcating interval starting at `x`. Both are re-checked
/// because Cut clamps to 1 when the target is out of reach.
pub fn hat_cut(oracle: &Oracle<'_>, x: &Fraction, nu: &Fraction) -> Result<Option<Fraction>> {
    if x.is_negative() || x > &Fraction::one() {
        return Err(CakeError::Domain(format!("hat_cut start {x} outside [0, 1]")));
    }
    if !nu.is_positive() {
        return Err(CakeError::Domain(format!("hat_cut value {nu} must be positive")));
    }
    if nu > &Fraction::one() {
        return Ok(None);
    }

    let mut best: Option<Fraction> = None;

    let plain = oracle.cut(x, nu)?;
    if &oracle.eval(x, &plain)? >= nu {
        best = Some(plain);
    }

    if oracle.eval(&Fraction::zero(), x)? <= half() {
        let reach_quarter = oracle.cut(x, &quarter())?;
        let reach_half = oracle.cut(&Fraction::zero(), &half())?;
        let candidate = reach_quarter.max(reach_half);
        let improves = best.as_ref().is_none_or(|b| &candidate < b);
        if improves && is_bifurcating(oracle, &Interval::span(x.clone(), candidate.clone()))? {
            best = Some(candidate);
        }
    }

    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fraction::int;
    use crate::oracle::QueryCounter;
    use crate::valuation::Valuation;

    fn iv(lo: Fraction, hi: Fraction) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    // Dense left-to-right scan of `v̂` on multiples of 1/res.
    fn scan(oracle: &Oracle<'_>, x: &Fraction, nu: &Fraction, res: i64) -> Option<Fraction> {
        (0..=res)
            .map(|k| frac(k, res))
            .filter(|y| y >= x)
            .find(|y| &hat_eval(oracle, &iv(x.clone(), y.clone())).unwrap().value >= nu)
    }

    #[test]
    fn bifurcation_examples() {
        let c = QueryCounter::new();
        let u = Valuation::uniform();
        let o = Oracle::new(&u, &c);
        assert!(is_bifurcating(&o, &iv(frac(1, 4), frac(3, 4))).unwrap());
        assert!(!is_bifurcating(&o, &iv(frac(0, 1), frac(1, 5))).unwrap());
        assert!(is_bifurcating(&o, &Interval::whole()).unwrap());
        assert!(!is_bifurcating(&o, &Interval::Empty).unwrap());
    }

    #[test]
    fn hat_eval_examples() {
        let c = QueryCounter::new();
        let u = Valuation::uniform();
        let o = Oracle::new(&u, &c);
        let h = hat_eval(&o, &iv(frac(1, 4), frac(3, 4))).unwrap();
        assert_eq!(h, HatValue { value: int(1), bifurcating: true });
        let h = hat_eval(&o, &iv(frac(0, 1), frac(1, 5))).unwrap();
        assert_eq!(h, HatValue { value: frac(1, 5), bifurcating: false });
        assert_eq!(hat_eval(&o, &Interval::Empty).unwrap().value, int(0));
    }

    #[test]
    fn hat_cut_examples_match_scan() {
        let c = QueryCounter::new();
        let u = Valuation::uniform();
        let o = Oracle::new(&u, &c);

        assert_eq!(scan(&o, &frac(0, 1), &int(1), 1000), Some(frac(1, 2)));
        assert_eq!(hat_cut(&o, &frac(0, 1), &int(1)).unwrap(), Some(frac(1, 2)));

        assert_eq!(scan(&o, &frac(3, 5), &int(1), 1000), None);
        assert_eq!(hat_cut(&o, &frac(3, 5), &int(1)).unwrap(), None);

        assert_eq!(scan(&o, &frac(0, 1), &frac(1, 10), 1000), Some(frac(1, 10)));
        assert_eq!(hat_cut(&o, &frac(0, 1), &frac(1, 10)).unwrap(), Some(frac(1, 10)));
    }

    #[test]
    fn hat_cut_above_one_is_none() {
        let c = QueryCounter::new();
        let u = Valuation::uniform();
        let o = Oracle::new(&u, &c);
        assert_eq!(hat_cut(&o, &frac(0, 1), &frac(11, 10)).unwrap(), None);
        assert!(hat_cut(&o, &frac(0, 1), &int(0)).is_err());
    }

    #[test]
    fn clamped_candidate_is_rejected() {
        // All value in [0, 1/10]. From x = 1/20 the plain cut for 1 clamps to 1
        // without reaching the target; the bifurcating candidate 3/40 wins.
        let v = Valuation::new(
            vec![frac(0, 1), frac(1, 10), frac(1, 1)],
            vec![int(10), int(0)],
        )
        .unwrap();
        let c = QueryCounter::new();
        let o = Oracle::new(&v, &c);
        let got = hat_cut(&o, &frac(1, 20), &int(1)).unwrap();
        assert_eq!(got, scan(&o, &frac(1, 20), &int(1), 1000));
        assert_eq!(got, Some(frac(3, 40)));
        // starting past all the mass nothing bifurcates
        assert_eq!(hat_cut(&o, &frac(1, 5), &frac(1, 2)).unwrap(), None);
    }
}
