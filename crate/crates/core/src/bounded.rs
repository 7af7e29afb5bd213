//! ε-envy-free division when few distinct valuations are present.
//!
//! Each distinct valuation cuts the cake into pieces worth exactly `ε`
//! (the last one possibly less). Every segment between consecutive points of
//! the merged grid is then worth at most `ε` to everyone, and agents pick
//! segments greedily in index order.

use num_traits::{One, Signed};
use serde::Serialize;

use crate::allocation::Allocation;
use crate::audit::{check_bounded_bounds, AuditReport, InvariantResult};
use crate::batch;
use crate::error::{CakeError, Result};
use crate::fraction::{self, int, Fraction};
use crate::instance::Instance;
use crate::interval::Interval;
use crate::oracle::{Oracle, QueryCounter};
use crate::valuation::Valuation;

/// Points `0 = x_0 < x_1 < ... < x_T = 1` with `v([x_{t-1}, x_t]) = ε` for
/// every segment but the last.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CutGrid {
    #[serde(with = "fraction::serde_str_vec")]
    pub points: Vec<Fraction>,
}

/// Sorted, deduplicated union of all cut grids and its segments.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MergedGrid {
    #[serde(with = "fraction::serde_str_vec")]
    pub points: Vec<Fraction>,
    pub segments: Vec<Interval>,
}

#[derive(Clone, Debug)]
pub struct BoundedSolution {
    pub allocation: Allocation,
    pub grid: MergedGrid,
    pub report: AuditReport,
}

fn check_epsilon(epsilon: &Fraction) -> Result<()> {
    if !epsilon.is_positive() || epsilon >= &Fraction::one() {
        return Err(CakeError::Domain(format!("epsilon = {epsilon} must lie in (0, 1)")));
    }
    Ok(())
}

/// Number of segments, `T = ceil(1/ε)`.
pub fn segment_count(epsilon: &Fraction) -> usize {
    fraction::ceil_to_usize(&epsilon.recip()).expect("ε > 0")
}

pub fn cut_point_grid(oracle: &Oracle<'_>, epsilon: &Fraction) -> Result<CutGrid> {
    check_epsilon(epsilon)?;
    let t = segment_count(epsilon);
    let mut points = Vec::with_capacity(t + 1);
    points.push(fraction::zero());
    for _ in 1..t {
        let next = oracle.cut(points.last().expect("non-empty"), epsilon)?;
        points.push(next);
    }
    points.push(Fraction::one());
    Ok(CutGrid { points })
}

pub fn merge_grids<'a>(grids: impl IntoIterator<Item = &'a CutGrid>) -> MergedGrid {
    let mut points: Vec<Fraction> = grids.into_iter().flat_map(|g| g.points.iter().cloned()).collect();
    points.sort();
    points.dedup();
    let segments = points
        .windows(2)
        .map(|w| Interval::span(w[0].clone(), w[1].clone()))
        .collect();
    MergedGrid { points, segments }
}

/// Rejects instances with more than `εn - 1` distinct valuations.
pub fn check_heterogeneity(instance: &Instance, epsilon: &Fraction) -> Result<()> {
    let d = instance.distinct_valuations();
    let bound = epsilon * int(instance.n() as i64) - Fraction::one();
    if int(d as i64) > bound {
        return Err(CakeError::Heterogeneity {
            distinct: d,
            bound: bound.to_string(),
        });
    }
    Ok(())
}

pub fn solve_bounded(instance: &Instance, epsilon: &Fraction) -> Result<BoundedSolution> {
    check_epsilon(epsilon)?;
    check_heterogeneity(instance, epsilon)?;
    let counter = QueryCounter::new();

    let distinct: Vec<&Valuation> = instance
        .distinct_valuation_ids()
        .into_iter()
        .map(|id| &instance.valuations()[id])
        .collect();
    let grids = batch::map_items(&distinct, |v| cut_point_grid(&Oracle::new(v, &counter), epsilon))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let grid = merge_grids(&grids);

    let oracles = instance.oracles(&counter);
    let mut remaining = grid.segments.clone();
    let mut pieces = Vec::with_capacity(instance.n());
    for o in &oracles {
        if remaining.is_empty() {
            pieces.push(Interval::Empty);
            continue;
        }
        let mut best = 0;
        let mut best_value = o.eval_piece(&remaining[0])?;
        for (k, seg) in remaining.iter().enumerate().skip(1) {
            let v = o.eval_piece(seg)?;
            if v > best_value {
                best = k;
                best_value = v;
            }
        }
        pieces.push(remaining.remove(best));
    }
    if !remaining.is_empty() {
        return Err(CakeError::Internal(format!(
            "{} segments left over for {} agents",
            grid.segments.len(),
            instance.n()
        )));
    }
    let allocation = Allocation::new(pieces)?;

    let mut report = AuditReport::for_pieces(allocation.pieces(), instance);
    report.queries = counter.counts();
    report.absorb(check_bounded_bounds(allocation.pieces(), instance, epsilon));
    let n = instance.n();
    report.invariants.push(if grid.points.len() <= n + 1 {
        InvariantResult::pass("grid_size")
    } else {
        InvariantResult::fail("grid_size", format!("{} grid points for {n} agents", grid.points.len()))
    });
    Ok(BoundedSolution {
        allocation,
        grid,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fraction::frac;

    fn grid_of(v: &Valuation, eps: Fraction) -> Vec<Fraction> {
        let counter = QueryCounter::new();
        cut_point_grid(&Oracle::new(v, &counter), &eps).unwrap().points
    }

    #[test]
    fn uniform_grids() {
        let u = Valuation::uniform();
        assert_eq!(grid_of(&u, frac(1, 2)), vec![frac(0, 1), frac(1, 2), frac(1, 1)]);
        assert_eq!(
            grid_of(&u, frac(1, 3)),
            vec![frac(0, 1), frac(1, 3), frac(2, 3), frac(1, 1)]
        );
        // ε = 2/5: T = 3, last segment worth 1/5
        assert_eq!(
            grid_of(&u, frac(2, 5)),
            vec![frac(0, 1), frac(2, 5), frac(4, 5), frac(1, 1)]
        );
    }

    #[test]
    fn skewed_grid_matches_scan() {
        let v = Valuation::new(vec![frac(0, 1), frac(1, 2), frac(1, 1)], vec![int(2), int(0)]).unwrap();
        let grid = grid_of(&v, frac(1, 2));
        assert_eq!(grid, vec![frac(0, 1), frac(1, 4), frac(1, 1)]);
        // first point on a 1/1000 grid where the mass reaches 1/2
        let scan = (0..=1000)
            .map(|k| frac(k, 1000))
            .find(|x| v.value(&frac(0, 1), x) >= frac(1, 2))
            .unwrap();
        assert_eq!(scan, grid[1]);
    }

    #[test]
    fn shared_uniform_leaves_agents_empty() {
        let inst = Instance::identical(4, Valuation::uniform()).unwrap();
        let sol = solve_bounded(&inst, &frac(1, 2)).unwrap();
        assert_eq!(
            sol.allocation.pieces(),
            &[
                Interval::new(frac(0, 1), frac(1, 2)).unwrap(),
                Interval::new(frac(1, 2), frac(1, 1)).unwrap(),
                Interval::Empty,
                Interval::Empty
            ]
        );
        assert_eq!(sol.report.max_additive_envy, frac(1, 2));
        assert!(sol.report.passed());
    }

    #[test]
    fn greedy_prefers_the_leftmost_maximum() {
        let v = Valuation::new(vec![frac(0, 1), frac(1, 2), frac(1, 1)], vec![int(2), int(0)]).unwrap();
        let inst = Instance::new(
            [("a".to_string(), Valuation::uniform()), ("b".to_string(), v)].into(),
            vec!["b".into(), "a".into(), "a".into(), "a".into(), "a".into(), "a".into()],
        )
        .unwrap();
        let sol = solve_bounded(&inst, &frac(1, 2)).unwrap();
        assert_eq!(sol.grid.points, vec![frac(0, 1), frac(1, 4), frac(1, 2), frac(1, 1)]);
        // agent 1 values [0,1/4] and [1/4,1/2] equally and takes the left one
        assert_eq!(sol.allocation.piece(0), &Interval::new(frac(0, 1), frac(1, 4)).unwrap());
        assert_eq!(sol.allocation.piece(1), &Interval::new(frac(1, 2), frac(1, 1)).unwrap());
        assert!(sol.report.passed(), "{:?}", sol.report.failures().collect::<Vec<_>>());
    }

    #[test]
    fn too_many_valuations_are_rejected() {
        let v = Valuation::new(vec![frac(0, 1), frac(1, 2), frac(1, 1)], vec![int(2), int(0)]).unwrap();
        let inst = Instance::from_valuations(vec![Valuation::uniform(), v.clone(), Valuation::uniform(), v]).unwrap();
        match solve_bounded(&inst, &frac(1, 4)) {
            Err(CakeError::Heterogeneity { distinct, bound }) => {
                assert_eq!(distinct, 4);
                assert_eq!(bound, "0");
            }
            other => panic!("expected rejection, got {other:?}"),
        }
        assert!(solve_bounded(&inst, &int(1)).is_err());
    }
}
