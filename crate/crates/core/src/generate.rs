//! Seeded random instance families.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CakeError, Result};
use crate::fraction::{frac, int, Fraction};
use crate::instance::Instance;
use crate::valuation::Valuation;

/// Breakpoints are drawn from multiples of `1/GRID`.
const GRID: i64 = 1000;
const MAX_WEIGHT: i64 = 9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// A fresh valuation per agent.
    Random,
    /// One valuation shared by everyone.
    Identical,
    /// Agent `i` cares only about `[i/n, (i+1)/n]`.
    DisjointBlocks,
    /// `k` distinct valuations dealt round-robin.
    Grouped(usize),
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Random => f.write_str("random"),
            Family::Identical => f.write_str("identical"),
            Family::DisjointBlocks => f.write_str("disjoint-blocks"),
            Family::Grouped(k) => write!(f, "grouped:{k}"),
        }
    }
}

impl FromStr for Family {
    type Err = CakeError;

    /// Accepts `random`, `identical`, `disjoint-blocks`, `grouped:k` and `grouped(k)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "random" => return Ok(Family::Random),
            "identical" => return Ok(Family::Identical),
            "disjoint-blocks" | "disjoint_blocks" => return Ok(Family::DisjointBlocks),
            _ => {}
        }
        let k = s
            .strip_prefix("grouped:")
            .or_else(|| s.strip_prefix("grouped(").and_then(|r| r.strip_suffix(')')))
            .ok_or_else(|| CakeError::Parse(format!("unknown instance family `{s}`")))?;
        let k: usize = k
            .parse()
            .map_err(|_| CakeError::Parse(format!("bad group count in `{s}`")))?;
        if k == 0 {
            return Err(CakeError::Parse("grouped family needs k >= 1".into()));
        }
        Ok(Family::Grouped(k))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub n: usize,
    /// Upper bound on the number of constant pieces per density.
    pub max_pieces: usize,
    pub seed: u64,
    pub family: Family,
}

impl GeneratorSpec {
    pub fn new(n: usize, max_pieces: usize, seed: u64, family: Family) -> Self {
        GeneratorSpec {
            n,
            max_pieces,
            seed,
            family,
        }
    }

    pub fn generate(&self) -> Result<Instance> {
        if self.n == 0 {
            return Err(CakeError::Domain("n must be at least 1".into()));
        }
        if self.max_pieces == 0 || self.max_pieces > GRID as usize {
            return Err(CakeError::Domain(format!(
                "max pieces {} outside 1..={GRID}",
                self.max_pieces
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        match self.family {
            Family::Random => {
                let vs = (0..self.n)
                    .map(|_| random_valuation(&mut rng, self.max_pieces))
                    .collect::<Result<Vec<_>>>()?;
                Instance::from_valuations(vs)
            }
            Family::Identical => Instance::identical(self.n, random_valuation(&mut rng, self.max_pieces)?),
            Family::DisjointBlocks => {
                let n = self.n as i64;
                let vs = (0..n).map(|i| block(i, n)).collect::<Result<Vec<_>>>()?;
                Instance::from_valuations(vs)
            }
            Family::Grouped(k) => {
                if k > self.n {
                    return Err(CakeError::Domain(format!("{k} groups for {} agents", self.n)));
                }
                let ids: Vec<String> = (1..=k).map(|g| format!("v{g}")).collect();
                let mut valuations = BTreeMap::new();
                for id in &ids {
                    valuations.insert(id.clone(), random_valuation(&mut rng, self.max_pieces)?);
                }
                let agents = (0..self.n).map(|i| ids[i % k].clone()).collect();
                Instance::new(valuations, agents)
            }
        }
    }
}

fn random_valuation(rng: &mut impl Rng, max_pieces: usize) -> Result<Valuation> {
    let pieces = rng.gen_range(1..=max_pieces);
    let mut inner: Vec<usize> = sample(rng, GRID as usize - 1, pieces - 1)
        .into_iter()
        .map(|k| k + 1)
        .collect();
    inner.sort_unstable();
    let mut breakpoints = vec![int(0)];
    breakpoints.extend(inner.into_iter().map(|k| frac(k as i64, GRID)));
    breakpoints.push(int(1));

    let mut weights: Vec<Fraction> = (0..pieces).map(|_| int(rng.gen_range(0..=MAX_WEIGHT))).collect();
    if weights.iter().all(|w| w == &int(0)) {
        let k = rng.gen_range(0..pieces);
        weights[k] = int(rng.gen_range(1..=MAX_WEIGHT));
    }
    Ok(Valuation::from_weights(breakpoints, &weights)?)
}

fn block(i: i64, n: i64) -> Result<Valuation> {
    let mut breakpoints = vec![int(0)];
    let mut weights = Vec::new();
    if i > 0 {
        breakpoints.push(frac(i, n));
        weights.push(int(0));
    }
    weights.push(int(1));
    if i + 1 < n {
        breakpoints.push(frac(i + 1, n));
        weights.push(int(0));
    }
    breakpoints.push(int(1));
    Ok(Valuation::from_weights(breakpoints, &weights)?)
}
