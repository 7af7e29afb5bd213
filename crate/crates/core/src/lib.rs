//! Exact-arithmetic cake cutting on `[0, 1]`.
//!
//! Valuations are piecewise-constant densities with rational breakpoints and
//! values; every query, cut point and audit is an exact rational. Two solvers
//! are provided: [`connected::solve`] for connected pieces with roughly
//! `1/4`-additive and `1/2`-multiplicative envy, and
//! [`bounded::solve_bounded`] for `ε`-envy-freeness when only a few distinct
//! valuations are present.
//!
//! ```
//! use cakecut::{frac, solve, Instance, SolverConfig, Valuation};
//!
//! let instance = Instance::identical(3, Valuation::uniform()).unwrap();
//! let solution = solve(&instance, &SolverConfig::new(frac(1, 10)).unwrap()).unwrap();
//! assert!(solution.report.passed());
//! ```

pub mod allocation;
pub mod audit;
pub mod batch;
pub mod bench;
pub mod bounded;
pub mod brute;
pub mod connected;
pub mod envy_graph;
pub mod error;
pub mod fraction;
pub mod generate;
pub mod hat;
pub mod instance;
pub mod interval;
pub mod io;
pub mod oracle;
pub mod valuation;

pub use allocation::{Allocation, GapList, PartialAllocation};
pub use audit::{AuditReport, InvariantResult, MultRatio};
pub use bounded::{solve_bounded, BoundedSolution};
pub use brute::{brute_force_min_envy, BruteForce};
pub use connected::{solve, solve_mult, Solution, SolverConfig, TraceLevel};
pub use envy_graph::{eliminate_cycles, EnvyGraph};
pub use error::{CakeError, Result};
pub use fraction::{frac, parse_fraction, Fraction};
pub use generate::{Family, GeneratorSpec};
pub use hat::{hat_cut, hat_eval};
pub use instance::Instance;
pub use interval::Interval;
pub use oracle::{Oracle, QueryCounter, QueryCounts};
pub use valuation::Valuation;
