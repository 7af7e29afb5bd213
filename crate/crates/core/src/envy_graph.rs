//! Envy graphs over hat values and envy-cycle elimination.
//!
//! Agent `i` points at agent `j` when `v̂_i(P_i) < v̂_i(P_j)`. Rotating the
//! pieces along a cycle strictly lowers the edge count while no agent's hat
//! value drops, so repeated rotation reaches an acyclic graph.

use crate::allocation::PartialAllocation;
use crate::error::{CakeError, Result};
use crate::fraction::Fraction;
use crate::hat::hat_eval;
use crate::interval::Interval;
use crate::oracle::Oracle;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvyGraph {
    successors: Vec<Vec<usize>>,
}

impl EnvyGraph {
    /// Builds a graph from 0-based `(from, to)` pairs.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut successors = vec![Vec::new(); n];
        for &(from, to) in edges {
            successors[from].push(to);
        }
        for s in &mut successors {
            s.sort_unstable();
            s.dedup();
        }
        EnvyGraph { successors }
    }

    pub fn n(&self) -> usize {
        self.successors.len()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.successors[from].binary_search(&to).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.successors.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.successors
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.iter().map(move |&j| (i, j)))
            .collect()
    }

    /// First cycle met by a depth-first search that visits vertices and
    /// successors in increasing index order. The cycle `[a, b, .., z]` has
    /// edges `a→b→..→z→a`.
    pub fn find_cycle(&self) -> Option<Vec<usize>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Unseen,
            OnStack,
            Done,
        }

        fn visit(
            g: &EnvyGraph,
            u: usize,
            marks: &mut [Mark],
            stack: &mut Vec<usize>,
        ) -> Option<Vec<usize>> {
            marks[u] = Mark::OnStack;
            stack.push(u);
            for &w in &g.successors[u] {
                match marks[w] {
                    Mark::OnStack => {
                        let start = stack.iter().position(|&x| x == w).expect("on stack");
                        return Some(stack[start..].to_vec());
                    }
                    Mark::Unseen => {
                        if let Some(cycle) = visit(g, w, marks, stack) {
                            return Some(cycle);
                        }
                    }
                    Mark::Done => {}
                }
            }
            stack.pop();
            marks[u] = Mark::Done;
            None
        }

        let mut marks = vec![Mark::Unseen; self.n()];
        let mut stack = Vec::new();
        for u in 0..self.n() {
            if marks[u] == Mark::Unseen {
                if let Some(cycle) = visit(self, u, &mut marks, &mut stack) {
                    return Some(cycle);
                }
            }
        }
        None
    }

    pub fn is_acyclic(&self) -> bool {
        self.find_cycle().is_none()
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n()];
        for s in &self.successors {
            for &j in s {
                deg[j] += 1;
            }
        }
        deg
    }
}

/// Lowest-index vertex with no incoming edge. The graph must be acyclic.
pub fn find_source(graph: &EnvyGraph) -> Result<usize> {
    if let Some(cycle) = graph.find_cycle() {
        return Err(CakeError::Internal(format!(
            "envy graph still has a cycle through agents {:?}",
            cycle.iter().map(|a| a + 1).collect::<Vec<_>>()
        )));
    }
    graph
        .in_degrees()
        .iter()
        .position(|&d| d == 0)
        .ok_or_else(|| CakeError::Internal("acyclic graph without a source".into()))
}

/// `v̂_i` of every piece slot, for every agent. Piece slots stay fixed while
/// ownership moves, so rotating a cycle never needs new queries.
#[derive(Clone, Debug)]
pub(crate) struct HatTable {
    values: Vec<Vec<Fraction>>,
}

impl HatTable {
    pub(crate) fn build(oracles: &[Oracle<'_>], slots: &[Interval]) -> Result<Self> {
        let values = oracles
            .iter()
            .map(|o| {
                slots
                    .iter()
                    .map(|s| hat_eval(o, s).map(|h| h.value))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(HatTable { values })
    }

    pub(crate) fn refresh_slot(
        &mut self,
        oracles: &[Oracle<'_>],
        slot: usize,
        piece: &Interval,
    ) -> Result<()> {
        for (row, o) in self.values.iter_mut().zip(oracles) {
            row[slot] = hat_eval(o, piece)?.value;
        }
        Ok(())
    }

    pub(crate) fn value(&self, agent: usize, slot: usize) -> &Fraction {
        &self.values[agent][slot]
    }

    /// `holding[i]` is the slot owned by agent `i`.
    pub(crate) fn graph(&self, holding: &[usize]) -> EnvyGraph {
        let n = holding.len();
        let successors = (0..n)
            .map(|i| {
                let own = self.value(i, holding[i]);
                (0..n)
                    .filter(|&j| j != i && own < self.value(i, holding[j]))
                    .collect()
            })
            .collect();
        EnvyGraph { successors }
    }
}

/// Rotates pieces along cycles until the graph is acyclic. Returns the edge
/// count before the first rotation and after each one.
pub(crate) fn resolve_cycles(table: &HatTable, holding: &mut [usize]) -> Result<Vec<usize>> {
    let n = holding.len();
    let mut graph = table.graph(holding);
    let mut edge_counts = vec![graph.edge_count()];
    while let Some(cycle) = graph.find_cycle() {
        if edge_counts.len() > n * n {
            return Err(CakeError::Internal(format!(
                "cycle elimination exceeded {} rotations",
                n * n
            )));
        }
        let taken: Vec<usize> = cycle
            .iter()
            .cycle()
            .skip(1)
            .take(cycle.len())
            .map(|&next| holding[next])
            .collect();
        for (&agent, slot) in cycle.iter().zip(taken) {
            holding[agent] = slot;
        }
        graph = table.graph(holding);
        edge_counts.push(graph.edge_count());
    }
    Ok(edge_counts)
}

pub fn build_envy_graph(partial: &PartialAllocation, oracles: &[Oracle<'_>]) -> Result<EnvyGraph> {
    let table = HatTable::build(oracles, partial.pieces())?;
    let holding: Vec<usize> = (0..partial.n()).collect();
    Ok(table.graph(&holding))
}

/// Result of [`eliminate_cycles`].
#[derive(Clone, Debug)]
pub struct CycleElimination {
    pub allocation: PartialAllocation,
    /// Number of cycle rotations performed.
    pub resolutions: usize,
    /// Edge count of the envy graph before the first rotation and after each one.
    pub edge_counts: Vec<usize>,
}

/// Reassigns the pieces of `partial` so that its envy graph becomes acyclic
/// without lowering any agent's hat value.
pub fn eliminate_cycles(
    partial: &PartialAllocation,
    oracles: &[Oracle<'_>],
) -> Result<CycleElimination> {
    let table = HatTable::build(oracles, partial.pieces())?;
    let mut holding: Vec<usize> = (0..partial.n()).collect();
    let edge_counts = resolve_cycles(&table, &mut holding)?;
    let pieces = holding.iter().map(|&k| partial.piece(k).clone()).collect();
    Ok(CycleElimination {
        allocation: PartialAllocation::new(pieces)?,
        resolutions: edge_counts.len() - 1,
        edge_counts,
    })
}
