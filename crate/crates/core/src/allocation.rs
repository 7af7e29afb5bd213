//! Partial and complete allocations of the cake.

use std::ops::Deref;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{CakeError, Result};
use crate::fraction::Fraction;
use crate::interval::Interval;

fn check_disjoint(pieces: &[Interval]) -> Result<()> {
    for (i, a) in pieces.iter().enumerate() {
        for (j, b) in pieces.iter().enumerate().skip(i + 1) {
            if !a.is_disjoint(b) {
                return Err(CakeError::Domain(format!(
                    "pieces of agents {} and {} overlap: {a} and {b}",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(())
}

/// Non-empty pieces sorted by left endpoint, paired with their owner.
fn sorted_pieces(pieces: &[Interval]) -> Vec<(usize, &Fraction, &Fraction)> {
    let mut out: Vec<_> = pieces
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.bounds().map(|(lo, hi)| (i, lo, hi)))
        .collect();
    out.sort_by(|a, b| (a.1, a.2).cmp(&(b.1, b.2)));
    out
}

/// `n` pairwise-disjoint pieces indexed by agent; need not cover the cake.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PartialAllocation {
    pieces: Vec<Interval>,
}

impl PartialAllocation {
    pub fn new(pieces: Vec<Interval>) -> Result<Self> {
        check_disjoint(&pieces)?;
        Ok(PartialAllocation { pieces })
    }

    pub fn empty(n: usize) -> Self {
        PartialAllocation {
            pieces: vec![Interval::Empty; n],
        }
    }

    pub fn n(&self) -> usize {
        self.pieces.len()
    }

    pub fn piece(&self, agent: usize) -> &Interval {
        &self.pieces[agent]
    }

    pub fn pieces(&self) -> &[Interval] {
        &self.pieces
    }

    pub fn into_pieces(self) -> Vec<Interval> {
        self.pieces
    }

    /// Replaces one agent's piece. The caller keeps the pieces disjoint.
    pub(crate) fn assign(&mut self, agent: usize, piece: Interval) {
        self.pieces[agent] = piece;
    }

    pub fn nonempty_count(&self) -> usize {
        self.pieces.iter().filter(|p| !p.is_empty()).count()
    }

    pub fn unassigned(&self) -> GapList {
        unassigned(self)
    }
}

/// Maximal unassigned intervals, left to right.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct GapList {
    gaps: Vec<Interval>,
}

impl GapList {
    pub fn into_vec(self) -> Vec<Interval> {
        self.gaps
    }

    /// The gap whose left end is exactly `x`.
    pub fn starting_at(&self, x: &Fraction) -> Option<&Interval> {
        self.gaps.iter().find(|g| g.lo() == Some(x))
    }
}

impl Deref for GapList {
    type Target = [Interval];

    fn deref(&self) -> &[Interval] {
        &self.gaps
    }
}

/// The minimum-cardinality cover of the unassigned part of the cake.
/// Zero-length gaps are dropped, and zero-length pieces do not split a gap.
pub fn unassigned(partial: &PartialAllocation) -> GapList {
    gaps_of(partial.pieces())
}

pub(crate) fn gaps_of(pieces: &[Interval]) -> GapList {
    let mut gaps = Vec::new();
    let mut cursor = Fraction::zero();
    for (_, lo, hi) in sorted_pieces(pieces).into_iter().filter(|(_, lo, hi)| lo < hi) {
        if &cursor < lo {
            gaps.push(Interval::span(cursor.clone(), lo.clone()));
        }
        if hi > &cursor {
            cursor = hi.clone();
        }
    }
    if cursor < Fraction::one() {
        gaps.push(Interval::span(cursor, Fraction::one()));
    }
    GapList { gaps }
}

/// A complete division: disjoint pieces whose union is exactly `[0, 1]`.
/// Some agents may hold the empty piece.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Allocation {
    pieces: Vec<Interval>,
}

impl Allocation {
    pub fn new(pieces: Vec<Interval>) -> Result<Self> {
        check_disjoint(&pieces)?;
        if pieces.is_empty() {
            return Err(CakeError::Domain("an allocation needs at least one agent".into()));
        }
        let gaps = gaps_of(&pieces);
        if let Some(gap) = gaps.first() {
            return Err(CakeError::Domain(format!(
                "allocation leaves {gap} unassigned"
            )));
        }
        Ok(Allocation { pieces })
    }

    pub fn n(&self) -> usize {
        self.pieces.len()
    }

    pub fn piece(&self, agent: usize) -> &Interval {
        &self.pieces[agent]
    }

    pub fn pieces(&self) -> &[Interval] {
        &self.pieces
    }

    /// Interior cut points, left to right.
    pub fn cut_points(&self) -> Vec<Fraction> {
        let mut cuts: Vec<Fraction> = sorted_pieces(&self.pieces)
            .into_iter()
            .map(|(_, _, hi)| hi.clone())
            .filter(|hi| hi < &Fraction::one())
            .collect();
        cuts.dedup();
        cuts
    }
}
