//! Connected division with `(1/4 + 2δ/n)`-additive and near-`1/2`-multiplicative
//! envy guarantees.
//!
//! Phase one grows intervals: while some unassigned gap is worth
//! `v̂_i(P_i) + δ/n` to an agent, the agent whose qualifying prefix of that gap
//! ends leftmost trades its piece for the prefix. Phase two makes the envy
//! graph acyclic and feeds crumbs worth at most `δ/n` to everyone to a source
//! agent until at most `n` gaps remain. Each remaining gap is finally merged
//! into a distinct adjacent piece.

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::allocation::{gaps_of, Allocation, PartialAllocation};
use crate::audit::{
    check_iteration_bound, check_minimal_prefix, check_multiplicative_bounds,
    check_phase_invariants, check_theorem_bounds, AuditReport, CheckOutcome, InvariantResult,
    IterationCounts, PhaseTag,
};
use crate::envy_graph::{find_source, resolve_cycles, HatTable};
use crate::error::{CakeError, Result};
use crate::fraction::{self, int, Fraction};
use crate::hat::{hat_cut, hat_eval};
use crate::instance::Instance;
use crate::interval::Interval;
use crate::oracle::{Oracle, QueryCounter, QueryCounts};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceLevel {
    #[default]
    Off,
    PhaseBoundaries,
    /// Every iteration, with the minimal-prefix check re-run each time.
    Full,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    pub delta: Fraction,
    pub trace_level: TraceLevel,
}

impl SolverConfig {
    pub fn new(delta: Fraction) -> Result<Self> {
        if !delta.is_positive() || delta >= Fraction::one() {
            return Err(CakeError::Domain(format!("delta = {delta} must lie in (0, 1)")));
        }
        Ok(SolverConfig {
            delta,
            trace_level: TraceLevel::Off,
        })
    }

    /// Configuration for a `1/(2 + c)`-multiplicative guarantee: `δ = c/8`.
    pub fn multiplicative(c: &Fraction) -> Result<Self> {
        if !c.is_positive() || c >= &Fraction::one() {
            return Err(CakeError::Domain(format!("c = {c} must lie in (0, 1)")));
        }
        SolverConfig::new(c / int(8))
    }

    pub fn with_trace(mut self, level: TraceLevel) -> Self {
        self.trace_level = level;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Start,
    PhaseOne,
    PhaseOneEnd,
    PhaseTwo,
    PhaseTwoEnd,
    Final,
}

/// The move made in one iteration. `agent` is 1-based.
#[derive(Clone, Debug, Serialize)]
pub struct Step {
    pub gap: Interval,
    pub agent: usize,
    #[serde(with = "fraction::serde_str")]
    pub cut_point: Fraction,
}

#[derive(Clone, Debug, Serialize)]
pub struct Snapshot {
    pub phase: Phase,
    pub pieces: Vec<Interval>,
    pub gaps: Vec<Interval>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<Step>,
    /// `v̂_i(P_i)` for every agent.
    #[serde(with = "fraction::serde_str_vec")]
    pub hat_values: Vec<Fraction>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Trace {
    pub level: TraceLevel,
    pub snapshots: Vec<Snapshot>,
}

impl Trace {
    /// Every agent's own hat value never decreases from one snapshot to the next.
    pub fn check_hat_monotone(&self) -> InvariantResult {
        let name = "trace/hat_monotone";
        for (k, w) in self.snapshots.windows(2).enumerate() {
            for (i, (before, after)) in w[0].hat_values.iter().zip(&w[1].hat_values).enumerate() {
                if after < before {
                    return InvariantResult::fail(
                        name,
                        format!("agent {} drops from {before} to {after} at snapshot {}", i + 1, k + 1),
                    );
                }
            }
        }
        InvariantResult::pass(name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("traces always serialize")
    }
}

/// Everything one run of the connected solver produces.
#[derive(Clone, Debug)]
pub struct Solution {
    pub allocation: Allocation,
    pub phase_one: PartialAllocation,
    pub phase_two: PartialAllocation,
    pub trace: Trace,
    pub report: AuditReport,
}

/// A partial allocation at a phase boundary with the cost of reaching it.
#[derive(Clone, Debug)]
pub struct PhaseOutcome {
    pub allocation: PartialAllocation,
    pub iterations: IterationCounts,
    pub queries: QueryCounts,
}

struct Run<'a> {
    oracles: Vec<Oracle<'a>>,
    instance: &'a Instance,
    delta: Fraction,
    delta_over_n: Fraction,
    level: TraceLevel,
    snapshots: Vec<Snapshot>,
    own_hat: Vec<Fraction>,
    hat_drop: Option<String>,
    prefix_failure: Option<String>,
    iterations: IterationCounts,
}

impl<'a> Run<'a> {
    fn new(instance: &'a Instance, counter: &'a QueryCounter, config: &SolverConfig) -> Self {
        let n = instance.n();
        Run {
            oracles: instance.oracles(counter),
            instance,
            delta: config.delta.clone(),
            delta_over_n: &config.delta / int(n as i64),
            level: config.trace_level,
            snapshots: Vec::new(),
            own_hat: vec![Fraction::zero(); n],
            hat_drop: None,
            prefix_failure: None,
            iterations: IterationCounts::default(),
        }
    }

    fn n(&self) -> usize {
        self.oracles.len()
    }

    fn iteration_cap(&self) -> usize {
        let cap = int((self.n() * self.n()) as i64) / &self.delta;
        fraction::ceil_to_usize(&cap).unwrap_or(usize::MAX).saturating_add(1)
    }

    /// Records agent `i`'s new own hat value, remembering the first decrease.
    fn note_hat(&mut self, agent: usize, value: Fraction) {
        if value < self.own_hat[agent] && self.hat_drop.is_none() {
            self.hat_drop = Some(format!(
                "agent {} drops from {} to {value}",
                agent + 1,
                self.own_hat[agent]
            ));
        }
        self.own_hat[agent] = value;
    }

    fn wants(&self, agent: usize, gap: &Interval) -> Result<bool> {
        let h = hat_eval(&self.oracles[agent], gap)?.value;
        Ok(h >= &self.own_hat[agent] + &self.delta_over_n)
    }

    fn record(&mut self, phase: Phase, pieces: &[Interval], step: Option<Step>) {
        let keep = match self.level {
            TraceLevel::Off => false,
            TraceLevel::PhaseBoundaries => !matches!(phase, Phase::PhaseOne | Phase::PhaseTwo),
            TraceLevel::Full => true,
        };
        if !keep {
            return;
        }
        // merged pieces legitimately extend past their minimal prefixes
        if self.level == TraceLevel::Full && phase != Phase::Final && self.prefix_failure.is_none() {
            let r = check_minimal_prefix(pieces, self.instance, &self.delta, "minimal_prefix");
            if let Some(w) = r.witness {
                self.prefix_failure = Some(format!("{phase:?}: {w}"));
            }
        }
        self.snapshots.push(Snapshot {
            phase,
            pieces: pieces.to_vec(),
            gaps: gaps_of(pieces).into_vec(),
            step,
            hat_values: self.own_hat.clone(),
        });
    }

    fn phase_one(&mut self) -> Result<PartialAllocation> {
        let n = self.n();
        let cap = self.iteration_cap();
        let mut partial = PartialAllocation::empty(n);
        self.own_hat = vec![Fraction::zero(); n];
        // which agents qualify for each current gap; only the mover's column goes stale
        let mut wants: HashMap<Interval, Vec<bool>> = HashMap::new();

        loop {
            let gaps = partial.unassigned();
            wants.retain(|g, _| gaps.contains(g));
            let mut chosen = None;
            for gap in gaps.iter() {
                if !wants.contains_key(gap) {
                    let row = (0..n).map(|i| self.wants(i, gap)).collect::<Result<Vec<_>>>()?;
                    wants.insert(gap.clone(), row);
                }
                let row = &wants[gap];
                if row.iter().any(|&b| b) {
                    chosen = Some((gap.clone(), row.clone()));
                    break;
                }
            }
            let Some((gap, row)) = chosen else { break };
            let (lo, hi) = gap.bounds().expect("gaps are non-empty");

            let mut best: Option<(usize, Fraction)> = None;
            for agent in (0..n).filter(|&i| row[i]) {
                let threshold = &self.own_hat[agent] + &self.delta_over_n;
                let Some(end) = hat_cut(&self.oracles[agent], lo, &threshold)? else {
                    continue;
                };
                if &end > hi {
                    continue;
                }
                if best.as_ref().is_none_or(|(_, b)| &end < b) {
                    best = Some((agent, end));
                }
            }
            let (agent, end) = best.ok_or_else(|| {
                CakeError::Internal(format!("no candidate reaches its threshold inside {gap}"))
            })?;

            let piece = Interval::span(lo.clone(), end.clone());
            let value = hat_eval(&self.oracles[agent], &piece)?.value;
            if value < &self.own_hat[agent] + &self.delta_over_n {
                return Err(CakeError::Internal(format!(
                    "agent {} gained less than δ/n with {piece}",
                    agent + 1
                )));
            }
            self.note_hat(agent, value);
            partial.assign(agent, piece);
            self.iterations.phase_one += 1;
            if self.iterations.phase_one > cap {
                return Err(CakeError::Internal(format!("phase one exceeded {cap} iterations")));
            }

            for (g, row) in wants.iter_mut() {
                let h = hat_eval(&self.oracles[agent], g)?.value;
                row[agent] = h >= &self.own_hat[agent] + &self.delta_over_n;
            }

            let step = Step {
                gap,
                agent: agent + 1,
                cut_point: end,
            };
            self.record(Phase::PhaseOne, partial.pieces(), Some(step));
        }
        Ok(partial)
    }

    fn phase_two(&mut self, partial: PartialAllocation) -> Result<PartialAllocation> {
        let n = self.n();
        let cap = self.iteration_cap();
        let mut slots = partial.into_pieces();
        let mut holding: Vec<usize> = (0..n).collect();
        let mut table = HatTable::build(&self.oracles, &slots)?;
        self.own_hat = (0..n).map(|i| table.value(i, i).clone()).collect();

        loop {
            let gaps = gaps_of(&slots);
            if gaps.len() <= n {
                break;
            }
            // with more than n gaps every piece is non-empty and has a gap on its right
            for (k, slot) in slots.iter().enumerate() {
                let right_gap = slot.hi().and_then(|hi| gaps.starting_at(hi));
                if right_gap.is_none() {
                    return Err(CakeError::Internal(format!(
                        "{} gaps but piece {slot} (slot {k}) has no gap on its right",
                        gaps.len()
                    )));
                }
            }

            let edge_counts = resolve_cycles(&table, &mut holding)?;
            self.iterations.cycle_resolutions += edge_counts.len() - 1;
            for (i, &slot) in holding.iter().enumerate() {
                self.note_hat(i, table.value(i, slot).clone());
            }

            let source = find_source(&table.graph(&holding))?;
            let slot = holding[source];
            let (left, right) = slots[slot]
                .bounds()
                .map(|(l, r)| (l.clone(), r.clone()))
                .expect("checked non-empty above");
            let gap_end = gaps
                .starting_at(&right)
                .and_then(|g| g.hi())
                .cloned()
                .expect("checked above");

            let mut crumb_end = gap_end.clone();
            for o in &self.oracles {
                let x = o.cut(&right, &self.delta_over_n)?;
                if x < crumb_end {
                    crumb_end = x;
                }
            }

            slots[slot] = Interval::span(left, crumb_end.clone());
            table.refresh_slot(&self.oracles, slot, &slots[slot])?;
            self.note_hat(source, table.value(source, slot).clone());
            self.iterations.phase_two += 1;
            if self.iterations.phase_two > cap {
                return Err(CakeError::Internal(format!("phase two exceeded {cap} iterations")));
            }

            if self.level == TraceLevel::Full {
                let pieces: Vec<Interval> = holding.iter().map(|&k| slots[k].clone()).collect();
                let step = Step {
                    gap: Interval::span(right, gap_end),
                    agent: source + 1,
                    cut_point: crumb_end,
                };
                self.record(Phase::PhaseTwo, &pieces, Some(step));
            }
        }
        PartialAllocation::new(holding.iter().map(|&k| slots[k].clone()).collect())
    }

    fn online_checks(&self) -> CheckOutcome {
        let n = self.n();
        let mut out = CheckOutcome::default();
        out.push(match &self.hat_drop {
            None => InvariantResult::pass("hat_monotone"),
            Some(w) => InvariantResult::fail("hat_monotone", w.clone()),
        });
        out.push(check_iteration_bound(
            "phase_one/iteration_bound",
            self.iterations.phase_one,
            n,
            &self.delta,
        ));
        out.push(check_iteration_bound(
            "phase_two/iteration_bound",
            self.iterations.phase_two,
            n,
            &self.delta,
        ));
        if self.level == TraceLevel::Full {
            out.push(match &self.prefix_failure {
                None => InvariantResult::pass("trace/minimal_prefix"),
                Some(w) => InvariantResult::fail("trace/minimal_prefix", w.clone()),
            });
        }
        out
    }
}

/// Runs the interval-growing loop from the all-empty allocation.
pub fn phase_one(instance: &Instance, config: &SolverConfig) -> Result<PhaseOutcome> {
    let counter = QueryCounter::new();
    let mut run = Run::new(instance, &counter, config);
    let allocation = run.phase_one()?;
    Ok(PhaseOutcome {
        allocation,
        iterations: run.iterations,
        queries: counter.counts(),
    })
}

/// Runs the crumb-feeding loop on a phase-one result until at most `n` gaps remain.
pub fn phase_two(
    partial: &PartialAllocation,
    instance: &Instance,
    config: &SolverConfig,
) -> Result<PhaseOutcome> {
    if partial.n() != instance.n() {
        return Err(CakeError::Domain(format!(
            "{} pieces for {} agents",
            partial.n(),
            instance.n()
        )));
    }
    let counter = QueryCounter::new();
    let mut run = Run::new(instance, &counter, config);
    let allocation = run.phase_two(partial.clone())?;
    Ok(PhaseOutcome {
        allocation,
        iterations: run.iterations,
        queries: counter.counts(),
    })
}

/// Merges every gap into a distinct adjacent piece.
///
/// Gaps are matched to neighbouring non-empty pieces by augmenting paths,
/// trying the piece on a gap's left before the one on its right. A gap left
/// over (possible only when some agents hold nothing) goes whole to the
/// lowest-indexed empty-handed agent.
pub fn merge_final(partial: &PartialAllocation) -> Result<Allocation> {
    let n = partial.n();
    let pieces: Vec<Interval> = partial
        .pieces()
        .iter()
        .map(|p| match p.bounds() {
            Some((lo, hi)) if lo == hi => Interval::Empty,
            _ => p.clone(),
        })
        .collect();
    let gaps = gaps_of(&pieces).into_vec();
    if gaps.len() > n {
        return Err(CakeError::Domain(format!(
            "{} gaps cannot be merged into {n} pieces",
            gaps.len()
        )));
    }

    let neighbours: Vec<Vec<usize>> = gaps
        .iter()
        .map(|g| {
            let left = pieces.iter().position(|p| p.hi().is_some() && p.hi() == g.lo());
            let right = pieces.iter().position(|p| p.lo().is_some() && p.lo() == g.hi());
            left.into_iter().chain(right).collect()
        })
        .collect();

    fn augment(
        gap: usize,
        neighbours: &[Vec<usize>],
        seen: &mut [bool],
        owner_gap: &mut [Option<usize>],
    ) -> bool {
        for &agent in &neighbours[gap] {
            if seen[agent] {
                continue;
            }
            seen[agent] = true;
            let free = match owner_gap[agent] {
                None => true,
                Some(other) => augment(other, neighbours, seen, owner_gap),
            };
            if free {
                owner_gap[agent] = Some(gap);
                return true;
            }
        }
        false
    }

    let mut owner_gap: Vec<Option<usize>> = vec![None; n];
    let mut leftover = Vec::new();
    for g in 0..gaps.len() {
        let mut seen = vec![false; n];
        if !augment(g, &neighbours, &mut seen, &mut owner_gap) {
            leftover.push(g);
        }
    }
    let empty: Vec<usize> = (0..n)
        .filter(|&i| pieces[i].is_empty() && owner_gap[i].is_none())
        .collect();
    let mut empty_agents = empty.into_iter();
    for g in leftover {
        let agent = empty_agents.next().ok_or_else(|| {
            CakeError::Internal(format!("gap {} has no free neighbour or empty agent", gaps[g]))
        })?;
        owner_gap[agent] = Some(g);
    }

    let merged = pieces
        .iter()
        .zip(&owner_gap)
        .map(|(piece, gap)| match (piece.bounds(), gap.map(|g| &gaps[g])) {
            (_, None) => piece.clone(),
            (None, Some(gap)) => gap.clone(),
            (Some((lo, hi)), Some(gap)) => {
                let (g_lo, g_hi) = gap.bounds().expect("gaps are non-empty");
                Interval::span(lo.min(g_lo).clone(), hi.max(g_hi).clone())
            }
        })
        .collect();
    Allocation::new(merged)
}

/// Computes a complete connected allocation and audits it.
pub fn solve(instance: &Instance, config: &SolverConfig) -> Result<Solution> {
    let counter = QueryCounter::new();
    let mut run = Run::new(instance, &counter, config);
    run.record(Phase::Start, PartialAllocation::empty(instance.n()).pieces(), None);

    let phase_one = run.phase_one()?;
    run.record(Phase::PhaseOneEnd, phase_one.pieces(), None);
    let phase_two = run.phase_two(phase_one.clone())?;
    run.record(Phase::PhaseTwoEnd, phase_two.pieces(), None);
    let allocation = merge_final(&phase_two)?;
    run.record(Phase::Final, allocation.pieces(), None);

    let mut report = AuditReport::for_pieces(allocation.pieces(), instance);
    report.queries = counter.counts();
    report.iterations = run.iterations;
    report.absorb(run.online_checks());
    let trace = Trace {
        level: config.trace_level,
        snapshots: std::mem::take(&mut run.snapshots),
    };
    if config.trace_level != TraceLevel::Off {
        report.invariants.push(trace.check_hat_monotone());
    }
    report.absorb(check_phase_invariants(
        phase_one.pieces(),
        instance,
        &config.delta,
        PhaseTag::PhaseOne,
    ));
    report.absorb(check_phase_invariants(
        phase_two.pieces(),
        instance,
        &config.delta,
        PhaseTag::PhaseTwo,
    ));
    report.absorb(check_theorem_bounds(allocation.pieces(), instance, &config.delta));

    Ok(Solution {
        allocation,
        phase_one,
        phase_two,
        trace,
        report,
    })
}

/// Runs [`solve`] with `δ = c/8` and additionally audits the
/// `1/(2 + c)`-multiplicative bound.
pub fn solve_mult(instance: &Instance, c: &Fraction) -> Result<Solution> {
    let config = SolverConfig::multiplicative(c)?;
    let mut solution = solve(instance, &config)?;
    solution
        .report
        .absorb(check_multiplicative_bounds(solution.allocation.pieces(), instance, c));
    Ok(solution)
}
