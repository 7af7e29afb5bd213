//! Exact verification of the envy bounds and phase-level invariants.
//!
//! Every check here is an exact rational comparison. Values are read
//! straight from the valuations and never go through the solver's oracles,
//! so audits neither depend on nor inflate the solver's query counts.

use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::allocation::{gaps_of, Allocation};
use crate::batch;
use crate::fraction::{self, int, Fraction};
use crate::hat::{half, hat_eval, quarter};
use crate::instance::Instance;
use crate::interval::Interval;
use crate::oracle::{Oracle, QueryCounter, QueryCounts};

/// Outcome of one named check, with a human-readable witness on failure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvariantResult {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl InvariantResult {
    pub fn pass(name: impl Into<String>) -> Self {
        InvariantResult {
            name: name.into(),
            passed: true,
            witness: None,
        }
    }

    pub fn fail(name: impl Into<String>, witness: impl Into<String>) -> Self {
        InvariantResult {
            name: name.into(),
            passed: false,
            witness: Some(witness.into()),
        }
    }

    fn from_witness(name: &str, witness: Option<String>) -> Self {
        match witness {
            None => Self::pass(name),
            Some(w) => Self::fail(name, w),
        }
    }
}

/// A batch of named checks.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct CheckOutcome {
    pub results: Vec<InvariantResult>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &InvariantResult> {
        self.results.iter().filter(|r| !r.passed)
    }

    pub fn get(&self, name: &str) -> Option<&InvariantResult> {
        self.results.iter().find(|r| r.name == name)
    }

    pub fn push(&mut self, result: InvariantResult) {
        self.results.push(result);
    }

    pub fn extend(&mut self, other: CheckOutcome) {
        self.results.extend(other.results);
    }
}

/// Smallest `v_i(I_i) / v_i(I_j)` over pairs `i != j` with `v_i(I_j) > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MultRatio {
    Finite(Fraction),
    /// No agent values any other agent's piece.
    Infinite,
}

impl MultRatio {
    pub fn at_least(&self, bound: &Fraction) -> bool {
        match self {
            MultRatio::Finite(r) => r >= bound,
            MultRatio::Infinite => true,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            MultRatio::Finite(r) => fraction::to_f64(r),
            MultRatio::Infinite => f64::INFINITY,
        }
    }
}

impl Serialize for MultRatio {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            MultRatio::Finite(r) => fraction::serde_rendered::serialize(r, s),
            MultRatio::Infinite => s.serialize_str("infinite"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IterationCounts {
    pub phase_one: usize,
    pub phase_two: usize,
    pub cycle_resolutions: usize,
}

/// Envy matrices, invariant verdicts and cost counters for one run.
#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    #[serde(with = "fraction::serde_rendered_matrix")]
    pub additive_envy: Vec<Vec<Fraction>>,
    #[serde(with = "fraction::serde_rendered")]
    pub max_additive_envy: Fraction,
    pub min_multiplicative_ratio: MultRatio,
    pub invariants: Vec<InvariantResult>,
    pub queries: QueryCounts,
    pub iterations: IterationCounts,
}

impl AuditReport {
    pub fn for_pieces(pieces: &[Interval], instance: &Instance) -> Self {
        let values = value_matrix(pieces, instance);
        let envy = envy_from_values(&values);
        AuditReport {
            max_additive_envy: max_entry(&envy),
            additive_envy: envy,
            min_multiplicative_ratio: ratio_from_values(&values),
            invariants: Vec::new(),
            queries: QueryCounts::default(),
            iterations: IterationCounts::default(),
        }
    }

    pub fn passed(&self) -> bool {
        self.invariants.iter().all(|r| r.passed)
    }

    pub fn absorb(&mut self, outcome: CheckOutcome) {
        self.invariants.extend(outcome.results);
    }

    pub fn failures(&self) -> impl Iterator<Item = &InvariantResult> {
        self.invariants.iter().filter(|r| !r.passed)
    }
}

/// `values[i][j] = v_i(piece_j)`.
pub fn value_matrix(pieces: &[Interval], instance: &Instance) -> Vec<Vec<Fraction>> {
    batch::map_range(instance.n(), |i| {
        let v = instance.valuation(i);
        pieces.iter().map(|p| v.value_of(p)).collect()
    })
}

fn envy_from_values(values: &[Vec<Fraction>]) -> Vec<Vec<Fraction>> {
    values
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .map(|vj| (vj - &row[i]).max(Fraction::zero()))
                .collect()
        })
        .collect()
}

fn max_entry(matrix: &[Vec<Fraction>]) -> Fraction {
    matrix
        .iter()
        .flatten()
        .max()
        .cloned()
        .unwrap_or_else(Fraction::zero)
}

fn ratio_from_values(values: &[Vec<Fraction>]) -> MultRatio {
    let mut best: Option<Fraction> = None;
    for (i, row) in values.iter().enumerate() {
        for (j, vj) in row.iter().enumerate() {
            if i != j && vj.is_positive() {
                let r = &row[i] / vj;
                if best.as_ref().is_none_or(|b| &r < b) {
                    best = Some(r);
                }
            }
        }
    }
    best.map_or(MultRatio::Infinite, MultRatio::Finite)
}

/// `envy[i][j] = max(0, v_i(piece_j) - v_i(piece_i))`.
pub fn additive_envy(pieces: &[Interval], instance: &Instance) -> Vec<Vec<Fraction>> {
    envy_from_values(&value_matrix(pieces, instance))
}

pub fn max_additive_envy(pieces: &[Interval], instance: &Instance) -> Fraction {
    max_entry(&additive_envy(pieces, instance))
}

pub fn multiplicative_ratio(pieces: &[Interval], instance: &Instance) -> MultRatio {
    ratio_from_values(&value_matrix(pieces, instance))
}

/// First pair `i != j` for which `violates` fires, as a 1-based witness.
fn first_pair_violation(
    values: &[Vec<Fraction>],
    violates: impl Fn(usize, usize, &[Fraction]) -> Option<String>,
) -> Option<String> {
    let n = values.len();
    (0..n).find_map(|i| {
        (0..n)
            .filter(|&j| j != i)
            .find_map(|j| violates(i, j, &values[i]).map(|w| format!("agent {} toward agent {}: {w}", i + 1, j + 1)))
    })
}

fn structure_checks(pieces: &[Interval], instance: &Instance) -> CheckOutcome {
    let mut out = CheckOutcome::default();
    out.push(if pieces.len() == instance.n() {
        InvariantResult::pass("one_piece_per_agent")
    } else {
        InvariantResult::fail(
            "one_piece_per_agent",
            format!("{} pieces for {} agents", pieces.len(), instance.n()),
        )
    });
    out.push(match Allocation::new(pieces.to_vec()) {
        Ok(_) => InvariantResult::pass("complete_disjoint"),
        Err(e) => InvariantResult::fail("complete_disjoint", e.to_string()),
    });
    out
}

/// Completeness plus the two envy families of the connected algorithm:
/// `(1/4 + 2δ/n)`-additive envy and `v_i(I_i) >= v_i(I_j)/2 - δ/n`.
pub fn check_theorem_bounds(pieces: &[Interval], instance: &Instance, delta: &Fraction) -> CheckOutcome {
    let mut out = structure_checks(pieces, instance);
    if pieces.len() != instance.n() {
        return out;
    }
    let n = int(instance.n() as i64);
    let dn = delta / &n;
    let envy_bound = quarter() + &dn + &dn;
    let values = value_matrix(pieces, instance);

    let witness = first_pair_violation(&values, |i, j, row| {
        let envy = &row[j] - &row[i];
        (envy > envy_bound).then(|| format!("envy {envy} > {envy_bound}"))
    });
    out.push(InvariantResult::from_witness("additive_envy_bound", witness));

    let witness = first_pair_violation(&values, |i, j, row| {
        let floor = &row[j] / int(2) - &dn;
        (row[i] < floor).then(|| format!("own value {} < {floor}", row[i]))
    });
    out.push(InvariantResult::from_witness("half_envy_bound", witness));
    out
}

/// `(2 + c) v_i(I_i) >= v_i(I_j)` for all pairs and `v_i(I_i) >= 1/(4n)`.
pub fn check_multiplicative_bounds(pieces: &[Interval], instance: &Instance, c: &Fraction) -> CheckOutcome {
    let mut out = structure_checks(pieces, instance);
    if pieces.len() != instance.n() {
        return out;
    }
    let values = value_matrix(pieces, instance);
    let factor = int(2) + c;
    let witness = first_pair_violation(&values, |i, j, row| {
        let scaled = &factor * &row[i];
        (scaled < row[j]).then(|| format!("{factor}*{} < {}", row[i], row[j]))
    });
    out.push(InvariantResult::from_witness("multiplicative_envy_bound", witness));

    let floor = Fraction::one() / int(4 * instance.n() as i64);
    let witness = values.iter().enumerate().find_map(|(i, row)| {
        (row[i] < floor).then(|| format!("agent {} holds {} < {floor}", i + 1, row[i]))
    });
    out.push(InvariantResult::from_witness("min_share", witness));
    out
}

/// Completeness, `epsilon`-additive envy, and `v_i(I_j) <= epsilon` for every
/// pair (the per-segment bound behind it).
pub fn check_bounded_bounds(pieces: &[Interval], instance: &Instance, epsilon: &Fraction) -> CheckOutcome {
    let mut out = structure_checks(pieces, instance);
    if pieces.len() != instance.n() {
        return out;
    }
    let values = value_matrix(pieces, instance);
    let witness = first_pair_violation(&values, |i, j, row| {
        let envy = &row[j] - &row[i];
        (&envy > epsilon).then(|| format!("envy {envy} > {epsilon}"))
    });
    out.push(InvariantResult::from_witness("additive_envy_bound", witness));
    let witness = values.iter().enumerate().find_map(|(i, row)| {
        row.iter().enumerate().find_map(|(j, v)| {
            (v > epsilon).then(|| format!("agent {} values piece {} at {v} > {epsilon}", i + 1, j + 1))
        })
    });
    out.push(InvariantResult::from_witness("segment_value_bound", witness));
    out
}

/// Which phase boundary a partial allocation comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseTag {
    PhaseOne,
    PhaseTwo,
}

impl PhaseTag {
    pub fn prefix(self) -> &'static str {
        match self {
            PhaseTag::PhaseOne => "phase_one",
            PhaseTag::PhaseTwo => "phase_two",
        }
    }
}

/// Minimal-prefix property: for every `i` and non-empty `P_j = [l, r]`, the
/// leftmost `x` with `v_i([l, x]) >= v̂_i(P_i) + δ/n` is `>= r` or absent.
pub fn check_minimal_prefix(
    pieces: &[Interval],
    instance: &Instance,
    delta: &Fraction,
    name: &str,
) -> InvariantResult {
    let counter = QueryCounter::new();
    let oracles = instance.oracles(&counter);
    let dn = delta / int(instance.n() as i64);
    let witness = oracles.iter().enumerate().find_map(|(i, o)| {
        let own = hat_eval(o, &pieces[i]).ok()?.value;
        let threshold = own + &dn;
        if threshold > Fraction::one() {
            return None;
        }
        pieces.iter().enumerate().find_map(|(j, p)| {
            let (lo, hi) = p.bounds()?;
            let x = o.cut(lo, &threshold).ok()?;
            let reached = o.eval(lo, &x).ok()? >= threshold;
            (reached && &x < hi).then(|| {
                format!(
                    "agent {} reaches {threshold} inside agent {}'s piece {p} at {x}",
                    i + 1,
                    j + 1
                )
            })
        })
    });
    InvariantResult::from_witness(name, witness)
}

fn hat_own(oracles: &[Oracle<'_>], pieces: &[Interval]) -> Vec<(Fraction, bool)> {
    oracles
        .iter()
        .zip(pieces)
        .map(|(o, p)| {
            let h = hat_eval(o, p).expect("pieces lie in [0, 1]");
            (h.value, h.bifurcating)
        })
        .collect()
}

/// The structural invariants at a phase boundary:
/// minimal prefixes, bounded envy toward pieces and gaps, the bifurcation
/// margin, and the loop exit condition (phase one) or the gap count (phase two).
pub fn check_phase_invariants(
    pieces: &[Interval],
    instance: &Instance,
    delta: &Fraction,
    phase: PhaseTag,
) -> CheckOutcome {
    let prefix = phase.prefix();
    let name = |s: &str| format!("{prefix}/{s}");
    let n = instance.n();
    let dn = delta / int(n as i64);
    let counter = QueryCounter::new();
    let oracles = instance.oracles(&counter);
    let own = hat_own(&oracles, pieces);
    let gaps = gaps_of(pieces);
    let values = value_matrix(pieces, instance);
    let mut out = CheckOutcome::default();

    out.push(check_minimal_prefix(pieces, instance, delta, &name("minimal_prefix")));

    let witness = (0..n).find_map(|i| {
        (0..n).find_map(|j| {
            let floor = &values[i][j] - &dn;
            (own[i].0 < floor).then(|| {
                format!("agent {}: hat {} < v(P_{}) - δ/n = {floor}", i + 1, own[i].0, j + 1)
            })
        })
    });
    out.push(InvariantResult::from_witness(&name("envy_to_pieces"), witness));

    let witness = (0..n).find_map(|i| {
        let v = instance.valuation(i);
        gaps.iter().find_map(|g| {
            let floor = v.value_of(g) - &dn;
            (own[i].0 < floor)
                .then(|| format!("agent {}: hat {} < v({g}) - δ/n = {floor}", i + 1, own[i].0))
        })
    });
    out.push(InvariantResult::from_witness(&name("envy_to_gaps"), witness));

    let quarter_margin = quarter() + &dn;
    let half_margin = half() - &dn;
    let witness = (0..n).filter(|&i| !own[i].1).find_map(|i| {
        let o = &oracles[i];
        (0..n).filter(|&j| j != i).find_map(|j| {
            let (_, hi) = pieces[j].bounds()?;
            if !hat_eval(o, &pieces[j]).ok()?.bifurcating {
                return None;
            }
            let inside = &values[i][j];
            let right = instance.valuation(i).value(hi, &Fraction::one());
            (inside >= &quarter_margin && right <= half_margin).then(|| {
                format!(
                    "agent {} sees bifurcating piece of agent {} with value {inside} and right side {right}",
                    i + 1,
                    j + 1
                )
            })
        })
    });
    out.push(InvariantResult::from_witness(&name("bifurcation_margin"), witness));

    match phase {
        PhaseTag::PhaseOne => {
            let witness = oracles.iter().enumerate().find_map(|(i, o)| {
                let threshold = &own[i].0 + &dn;
                gaps.iter().find_map(|g| {
                    let h = hat_eval(o, g).ok()?.value;
                    (h >= threshold).then(|| {
                        format!("agent {} still wants gap {g}: hat {h} >= {threshold}", i + 1)
                    })
                })
            });
            out.push(InvariantResult::from_witness(&name("loop_exit"), witness));
        }
        PhaseTag::PhaseTwo => {
            out.push(if gaps.len() <= n {
                InvariantResult::pass(name("gap_count"))
            } else {
                InvariantResult::fail(name("gap_count"), format!("{} gaps for {n} agents", gaps.len()))
            });
        }
    }
    out
}

/// `iterations <= n^2 / δ`, checked as `iterations * δ <= n^2`.
pub fn check_iteration_bound(name: &str, iterations: usize, n: usize, delta: &Fraction) -> InvariantResult {
    let lhs = int(iterations as i64) * delta;
    let rhs = int((n * n) as i64);
    if lhs <= rhs {
        InvariantResult::pass(name)
    } else {
        InvariantResult::fail(name, format!("{iterations} iterations exceed n^2/δ = {}", rhs / delta))
    }
}

/// `1/(2 + c)`, the multiplicative guarantee for parameter `c`.
pub fn mult_guarantee(c: &Fraction) -> Fraction {
    Fraction::one() / (int(2) + c)
}
