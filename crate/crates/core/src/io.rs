//! Allocation files: what was computed, with which parameter, and its audit.

use serde::{Deserialize, Serialize};

use crate::audit::{
    check_bounded_bounds, check_multiplicative_bounds, check_theorem_bounds, AuditReport,
};
use crate::error::{CakeError, Result};
use crate::fraction::{self, int, Fraction};
use crate::instance::Instance;
use crate::interval::Interval;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Connected solver with additive parameter `delta`.
    Connected,
    /// Connected solver run for the multiplicative bound with parameter `c`.
    Multiplicative,
    /// Bounded-heterogeneity solver with parameter `epsilon`.
    Bounded,
}

/// One agent's piece; `lo`/`hi` are absent for an empty piece.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceEntry {
    /// 1-based agent index.
    pub agent: usize,
    #[serde(default, with = "fraction::serde_str_opt", skip_serializing_if = "Option::is_none")]
    pub lo: Option<Fraction>,
    #[serde(default, with = "fraction::serde_str_opt", skip_serializing_if = "Option::is_none")]
    pub hi: Option<Fraction>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AllocationFile {
    pub algorithm: Algorithm,
    pub pieces: Vec<PieceEntry>,
    #[serde(default, with = "fraction::serde_str_opt", skip_serializing_if = "Option::is_none")]
    pub delta: Option<Fraction>,
    #[serde(default, with = "fraction::serde_str_opt", skip_serializing_if = "Option::is_none")]
    pub c: Option<Fraction>,
    #[serde(default, with = "fraction::serde_str_opt", skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Fraction>,
    /// The report written alongside the allocation. Never trusted by [`audit_file`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<serde_json::Value>,
}

impl AllocationFile {
    /// `parameter` is `delta`, `c` or `epsilon` according to `algorithm`.
    pub fn new(
        algorithm: Algorithm,
        parameter: Fraction,
        pieces: &[Interval],
        report: Option<&AuditReport>,
    ) -> Self {
        let pieces = pieces
            .iter()
            .enumerate()
            .map(|(i, p)| PieceEntry {
                agent: i + 1,
                lo: p.lo().cloned(),
                hi: p.hi().cloned(),
            })
            .collect();
        let (mut delta, mut c, mut epsilon) = (None, None, None);
        match algorithm {
            Algorithm::Connected => delta = Some(parameter),
            Algorithm::Multiplicative => {
                delta = Some(&parameter / int(8));
                c = Some(parameter);
            }
            Algorithm::Bounded => epsilon = Some(parameter),
        }
        AllocationFile {
            algorithm,
            pieces,
            delta,
            c,
            epsilon,
            audit: report.map(|r| serde_json::to_value(r).expect("reports always serialize")),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("allocation files always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CakeError::Parse(e.to_string()))
    }

    /// Pieces in agent order; every agent `1..=n` must appear exactly once.
    pub fn intervals(&self, n: usize) -> Result<Vec<Interval>> {
        let mut out: Vec<Option<Interval>> = vec![None; n];
        for entry in &self.pieces {
            if entry.agent == 0 || entry.agent > n {
                return Err(CakeError::Parse(format!("agent {} outside 1..={n}", entry.agent)));
            }
            let piece = match (&entry.lo, &entry.hi) {
                (None, None) => Interval::Empty,
                (Some(lo), Some(hi)) => Interval::new(lo.clone(), hi.clone())?,
                _ => {
                    return Err(CakeError::Parse(format!(
                        "agent {} has only one endpoint",
                        entry.agent
                    )))
                }
            };
            if out[entry.agent - 1].replace(piece).is_some() {
                return Err(CakeError::Parse(format!("agent {} listed twice", entry.agent)));
            }
        }
        out.into_iter()
            .enumerate()
            .map(|(i, p)| p.ok_or_else(|| CakeError::Parse(format!("agent {} has no piece", i + 1))))
            .collect()
    }

    fn parameter(&self, name: &str, value: &Option<Fraction>) -> Result<Fraction> {
        value
            .clone()
            .ok_or_else(|| CakeError::Parse(format!("{:?} allocation without `{name}`", self.algorithm)))
    }
}

/// Re-derives the audit of an allocation file from the instance alone.
pub fn audit_file(file: &AllocationFile, instance: &Instance) -> Result<AuditReport> {
    let pieces = file.intervals(instance.n())?;
    let mut report = AuditReport::for_pieces(&pieces, instance);
    match file.algorithm {
        Algorithm::Connected => {
            let delta = file.parameter("delta", &file.delta)?;
            report.absorb(check_theorem_bounds(&pieces, instance, &delta));
        }
        Algorithm::Multiplicative => {
            let c = file.parameter("c", &file.c)?;
            report.absorb(check_theorem_bounds(&pieces, instance, &(&c / int(8))));
            report.absorb(check_multiplicative_bounds(&pieces, instance, &c));
        }
        Algorithm::Bounded => {
            let epsilon = file.parameter("epsilon", &file.epsilon)?;
            report.absorb(check_bounded_bounds(&pieces, instance, &epsilon));
        }
    }
    Ok(report)
}
