//! Exhaustive minimum-envy search over a finite grid of cut positions.
//!
//! Meant as a cross-check on tiny instances: all nondecreasing placements of
//! `n - 1` cuts on the grid are tried against every assignment of pieces to
//! agents, and the placement minimizing the maximum additive envy wins. Ties
//! go to the placement whose worst-off agent values its own piece most.

use num_traits::Zero;

use crate::allocation::Allocation;
use crate::batch;
use crate::error::{CakeError, Result};
use crate::fraction::{frac, Fraction};
use crate::instance::Instance;
use crate::interval::Interval;

pub const MAX_AGENTS: usize = 4;
pub const MAX_RESOLUTION: usize = 200;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruteForce {
    pub allocation: Allocation,
    pub max_envy: Fraction,
    /// Number of grid points searched.
    pub grid_size: usize,
}

/// Searches cuts on all valuation breakpoints and the points `k/R`.
pub fn brute_force_min_envy(instance: &Instance, resolution: usize) -> Result<BruteForce> {
    brute_force_min_envy_with(instance, resolution, &[])
}

/// Like [`brute_force_min_envy`] with `extra` points added to the grid, e.g.
/// another allocation's cut points so that allocation is among the candidates.
pub fn brute_force_min_envy_with(
    instance: &Instance,
    resolution: usize,
    extra: &[Fraction],
) -> Result<BruteForce> {
    let n = instance.n();
    if n > MAX_AGENTS {
        return Err(CakeError::Limit(format!("{n} agents, at most {MAX_AGENTS} supported")));
    }
    if resolution == 0 || resolution > MAX_RESOLUTION {
        return Err(CakeError::Limit(format!(
            "resolution {resolution} outside 1..={MAX_RESOLUTION}"
        )));
    }
    if let Some(x) = extra.iter().find(|x| **x < Fraction::zero() || **x > frac(1, 1)) {
        return Err(CakeError::Domain(format!("grid point {x} outside [0, 1]")));
    }

    let mut grid: Vec<Fraction> = (0..=resolution as i64).map(|k| frac(k, resolution as i64)).collect();
    for v in instance.valuations().values() {
        grid.extend(v.breakpoints().iter().cloned());
    }
    grid.extend(extra.iter().cloned());
    grid.sort();
    grid.dedup();

    // mass[i][g] = v_i([0, grid[g]])
    let mass: Vec<Vec<Fraction>> = (0..n)
        .map(|i| grid.iter().map(|x| instance.valuation(i).mass_before(x)).collect())
        .collect();
    let perms = permutations(n);
    let last = grid.len() - 1;

    let search = |first: usize| -> Option<Candidate> {
        let mut best: Option<Candidate> = None;
        let mut cuts = vec![0; n + 1];
        cuts[n] = last;
        if n > 1 {
            cuts[1] = first;
        }
        search_from(2, n, &mut cuts, &mut |cuts| {
            for (p, perm) in perms.iter().enumerate() {
                let bound = best.as_ref().map(|b| &b.score.0);
                if let Some(score) = score(&mass, cuts, perm, bound) {
                    if best.as_ref().is_none_or(|b| score.beats(&b.score)) {
                        best = Some(Candidate {
                            score,
                            cuts: cuts.to_vec(),
                            perm: p,
                        });
                    }
                }
            }
        });
        best
    };
    let firsts = if n > 1 { grid.len() } else { 1 };
    let best = batch::map_range(firsts, search)
        .into_iter()
        .flatten()
        .reduce(|a, b| if b.score.beats(&a.score) { b } else { a })
        .expect("the grid contains 0 and 1");
    let (cuts, p) = (best.cuts, best.perm);
    let max_envy = best.score.0;

    let mut pieces = vec![Interval::Empty; n];
    for (k, &agent) in perms[p].iter().enumerate() {
        let (lo, hi) = (cuts[k], cuts[k + 1]);
        if lo < hi {
            pieces[agent] = Interval::span(grid[lo].clone(), grid[hi].clone());
        }
    }
    Ok(BruteForce {
        allocation: Allocation::new(pieces)?,
        max_envy,
        grid_size: grid.len(),
    })
}

/// Fills `cuts[k..n]` with nondecreasing grid indices no smaller than `cuts[k-1]`.
fn search_from(k: usize, n: usize, cuts: &mut [usize], visit: &mut impl FnMut(&[usize])) {
    if k >= n {
        visit(cuts);
        return;
    }
    for c in cuts[k - 1]..=cuts[n] {
        cuts[k] = c;
        search_from(k + 1, n, cuts, visit);
    }
}

/// `(max envy, smallest own value)`: lower envy wins, then a larger smallest
/// own value, then enumeration order.
struct Score(Fraction, Fraction);

impl Score {
    fn beats(&self, other: &Score) -> bool {
        self.0 < other.0 || (self.0 == other.0 && self.1 > other.1)
    }
}

struct Candidate {
    score: Score,
    cuts: Vec<usize>,
    perm: usize,
}

/// Score when segment `k` goes to agent `perm[k]`, or `None` as soon as the
/// envy exceeds `bound`.
fn score(mass: &[Vec<Fraction>], cuts: &[usize], perm: &[usize], bound: Option<&Fraction>) -> Option<Score> {
    let n = perm.len();
    let mut owner_segment = vec![0; n];
    for (k, &agent) in perm.iter().enumerate() {
        owner_segment[agent] = k;
    }
    let mut worst = Fraction::zero();
    let mut poorest: Option<Fraction> = None;
    for (i, row) in mass.iter().enumerate() {
        let value = |k: usize| &row[cuts[k + 1]] - &row[cuts[k]];
        let own = value(owner_segment[i]);
        for k in 0..n {
            let envy = value(k) - &own;
            if envy > worst {
                worst = envy;
                if bound.is_some_and(|b| &worst > b) {
                    return None;
                }
            }
        }
        if poorest.as_ref().is_none_or(|p| &own < p) {
            poorest = Some(own);
        }
    }
    Some(Score(worst, poorest.expect("at least one agent")))
}

/// All permutations of `0..n` in lexicographic order.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..n).collect();
    let mut out = vec![current.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).expect("pivot has a successor");
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
}
