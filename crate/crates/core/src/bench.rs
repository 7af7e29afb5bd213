//! Seeded batch runs of the connected solver with aggregated audit statistics.

use std::ops::RangeInclusive;

use serde::Serialize;

use crate::audit::{IterationCounts, MultRatio};
use crate::batch;
use crate::brute::{brute_force_min_envy_with, MAX_AGENTS};
use crate::connected::{solve, SolverConfig};
use crate::error::{CakeError, Result};
use crate::fraction::{self, Fraction};
use crate::generate::{Family, GeneratorSpec};
use crate::oracle::QueryCounts;

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub count: usize,
    pub n: RangeInclusive<usize>,
    pub delta: Fraction,
    pub max_pieces: usize,
    pub family: Family,
    /// Instance `k` uses seed `seed + k`.
    pub seed: u64,
    /// Grid resolution for the brute-force comparison on instances with `n <= 4`.
    pub brute_force: Option<usize>,
}

impl BenchConfig {
    pub fn new(count: usize, n: RangeInclusive<usize>, delta: Fraction) -> Self {
        BenchConfig {
            count,
            n,
            delta,
            max_pieces: 12,
            family: Family::Random,
            seed: 0,
            brute_force: None,
        }
    }

    /// The generator spec for instance `k`; `n` cycles through the range.
    pub fn instance_spec(&self, k: usize) -> GeneratorSpec {
        let (lo, hi) = (*self.n.start(), *self.n.end());
        let n = lo + k % (hi - lo + 1);
        GeneratorSpec::new(n, self.max_pieces, self.seed.wrapping_add(k as u64), self.family)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRecord {
    pub seed: u64,
    pub n: usize,
    pub passed: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
    #[serde(with = "fraction::serde_rendered")]
    pub max_additive_envy: Fraction,
    pub min_multiplicative_ratio: MultRatio,
    pub queries: QueryCounts,
    pub iterations: IterationCounts,
    /// Minimum max-envy found by exhaustive search on a grid containing the
    /// solver's own cuts.
    #[serde(with = "fraction::serde_rendered_opt", skip_serializing_if = "Option::is_none")]
    pub brute_force_envy: Option<Fraction>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchSummary {
    pub count: usize,
    pub parallel: bool,
    pub passed: usize,
    pub violations: usize,
    #[serde(with = "fraction::serde_rendered")]
    pub worst_additive_envy: Fraction,
    pub worst_multiplicative_ratio: MultRatio,
    pub total_queries: QueryCounts,
    pub mean_queries: f64,
    pub brute_force_compared: usize,
    /// Instances where the exhaustive optimum exceeded the solver's envy.
    /// Always zero unless the search itself is broken.
    pub brute_force_above_solver: usize,
    pub records: Vec<BenchRecord>,
}

impl BenchSummary {
    pub fn all_passed(&self) -> bool {
        self.violations == 0 && self.brute_force_above_solver == 0
    }
}

fn run_one(config: &BenchConfig, k: usize) -> Result<BenchRecord> {
    let spec = config.instance_spec(k);
    let instance = spec.generate()?;
    let solution = solve(&instance, &SolverConfig::new(config.delta.clone())?)?;
    let report = &solution.report;
    let brute_force_envy = match config.brute_force {
        Some(r) if instance.n() <= MAX_AGENTS => {
            let cuts = solution.allocation.cut_points();
            Some(brute_force_min_envy_with(&instance, r, &cuts)?.max_envy)
        }
        _ => None,
    };
    Ok(BenchRecord {
        seed: spec.seed,
        n: spec.n,
        passed: report.passed(),
        failures: report.failures().map(|f| f.name.clone()).collect(),
        max_additive_envy: report.max_additive_envy.clone(),
        min_multiplicative_ratio: report.min_multiplicative_ratio.clone(),
        queries: report.queries,
        iterations: report.iterations,
        brute_force_envy,
    })
}

pub fn run_bench(config: &BenchConfig) -> Result<BenchSummary> {
    if config.count == 0 || config.n.is_empty() || *config.n.start() == 0 {
        return Err(CakeError::Domain("bench needs count >= 1 and a non-empty range of n >= 1".into()));
    }
    let records = batch::map_range(config.count, |k| run_one(config, k))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(records))
}

pub fn summarize(records: Vec<BenchRecord>) -> BenchSummary {
    let mut total = QueryCounts::default();
    let mut worst_envy = fraction::zero();
    let mut worst_ratio = MultRatio::Infinite;
    let mut compared = 0;
    let mut above = 0;
    for r in &records {
        total = total + r.queries;
        if r.max_additive_envy > worst_envy {
            worst_envy = r.max_additive_envy.clone();
        }
        let lower = match (&worst_ratio, &r.min_multiplicative_ratio) {
            (_, MultRatio::Infinite) => false,
            (MultRatio::Infinite, _) => true,
            (MultRatio::Finite(a), MultRatio::Finite(b)) => b < a,
        };
        if lower {
            worst_ratio = r.min_multiplicative_ratio.clone();
        }
        if let Some(b) = &r.brute_force_envy {
            compared += 1;
            if b > &r.max_additive_envy {
                above += 1;
            }
        }
    }
    let count = records.len();
    BenchSummary {
        count,
        parallel: batch::is_parallel(),
        passed: records.iter().filter(|r| r.passed).count(),
        violations: records.iter().map(|r| r.failures.len()).sum(),
        worst_additive_envy: worst_envy,
        worst_multiplicative_ratio: worst_ratio,
        mean_queries: (total.eval + total.cut) as f64 / count.max(1) as f64,
        total_queries: total,
        brute_force_compared: compared,
        brute_force_above_solver: above,
        records,
    }
}
