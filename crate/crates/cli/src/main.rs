//! Command-line front end for the cake-cutting engine.
//!
//! Exit status is 0 when every audit passes, 1 when an audit fails, and 2
//! when the input is rejected. Diagnostics go to stderr as one JSON object.

use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use cakecut::bench::{run_bench, BenchConfig};
use cakecut::io::{audit_file, Algorithm, AllocationFile};
use cakecut::{
    parse_fraction, solve, solve_bounded, solve_mult, AuditReport, CakeError, Family, Fraction,
    GeneratorSpec, Instance, SolverConfig, TraceLevel,
};

#[derive(Parser)]
#[command(name = "cakecut", version, about = "Connected, approximately envy-free cake cutting")]
struct Cli {
    /// Directory for output files when no explicit path is given.
    #[arg(long, global = true, env = "CAKECUT_OUT_DIR")]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Gen {
        #[arg(long)]
        n: usize,
        /// random, identical, disjoint-blocks or grouped:K
        #[arg(long, default_value = "random", value_parser = parse_family)]
        family: Family,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 12)]
        max_pieces: usize,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Connected division with additive parameter delta.
    Solve {
        instance: PathBuf,
        #[arg(long, value_parser = parse_frac)]
        delta: Fraction,
        #[arg(long, value_enum, default_value_t = TraceArg::Off)]
        trace: TraceArg,
        /// Where to write the trace (requires --trace).
        #[arg(long)]
        trace_output: Option<PathBuf>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Connected division audited for the 1/(2 + c) multiplicative bound.
    SolveMult {
        instance: PathBuf,
        #[arg(long, value_parser = parse_frac)]
        c: Fraction,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// epsilon-envy-free division for instances with few distinct valuations.
    Bounded {
        instance: PathBuf,
        #[arg(long, value_parser = parse_frac)]
        epsilon: Fraction,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Re-verify an allocation file against its instance.
    Audit {
        instance: PathBuf,
        allocation: PathBuf,
    },
    /// Solve a batch of generated instances and summarize the audits.
    Bench {
        #[arg(long)]
        count: usize,
        /// A single size or an inclusive range such as 2..8.
        #[arg(long, value_parser = parse_range)]
        n: RangeInclusive<usize>,
        #[arg(long, value_parser = parse_frac)]
        delta: Fraction,
        #[arg(long, default_value = "random", value_parser = parse_family)]
        family: Family,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 12)]
        max_pieces: usize,
        /// Compare against exhaustive search at this grid resolution (n <= 4 only).
        #[arg(long)]
        brute_force: Option<usize>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceArg {
    Off,
    PhaseBoundaries,
    Full,
}

impl From<TraceArg> for TraceLevel {
    fn from(t: TraceArg) -> Self {
        match t {
            TraceArg::Off => TraceLevel::Off,
            TraceArg::PhaseBoundaries => TraceLevel::PhaseBoundaries,
            TraceArg::Full => TraceLevel::Full,
        }
    }
}

fn parse_frac(s: &str) -> Result<Fraction, String> {
    parse_fraction(s).map_err(|e| e.to_string())
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: CakeError| e.to_string())
}

fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("`{t}` is not a size"));
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (num(lo)?, num(hi.strip_prefix('=').unwrap_or(hi))?),
        None => {
            let n = num(s)?;
            (n, n)
        }
    };
    if lo == 0 || lo > hi {
        return Err(format!("`{s}` is not a non-empty range of sizes >= 1"));
    }
    Ok(lo..=hi)
}

enum Failure {
    Invalid { kind: &'static str, message: String },
    Audit { failures: Vec<serde_json::Value> },
}

impl From<CakeError> for Failure {
    fn from(e: CakeError) -> Self {
        let kind = match &e {
            CakeError::Domain(_) => "domain",
            CakeError::Instance(_) => "instance",
            CakeError::Parse(_) => "parse",
            CakeError::Heterogeneity { .. } => "heterogeneity",
            CakeError::Limit(_) => "limit",
            // a broken guarantee is an audit failure, not bad input
            CakeError::Internal(message) => {
                return Failure::Audit {
                    failures: vec![json!({"name": "internal", "witness": message})],
                }
            }
        };
        Failure::Invalid {
            kind,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Invalid {
        kind: "io",
        message: format!("{}: {e}", path.display()),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_failure(path, e))
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    Ok(Instance::from_json(&read(path)?)?)
}

struct Output<'a> {
    out_dir: Option<&'a Path>,
}

impl Output<'_> {
    /// Writes to `explicit`, else to `default_name` in the output directory,
    /// else to stdout. Returns the path written, if any.
    fn emit(&self, explicit: Option<&Path>, default_name: &str, text: &str) -> Result<Option<PathBuf>, Failure> {
        let path = match (explicit, self.out_dir) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(dir)) => {
                fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
                dir.join(default_name)
            }
            (None, None) => {
                print!("{text}");
                return Ok(None);
            }
        };
        fs::write(&path, text).map_err(|e| io_failure(&path, e))?;
        Ok(Some(path))
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned())
}

fn verdict(report: &AuditReport) -> Result<(), Failure> {
    if report.passed() {
        return Ok(());
    }
    Err(Failure::Audit {
        failures: report
            .failures()
            .map(|f| json!({"name": f.name, "witness": f.witness}))
            .collect(),
    })
}

fn summary(path: Option<PathBuf>, report: &AuditReport) {
    if let Some(path) = path {
        let line = json!({
            "output": path.display().to_string(),
            "passed": report.passed(),
            "max_additive_envy": report.max_additive_envy.to_string(),
        });
        println!("{line}");
    }
}

fn write_allocation(
    out: &Output<'_>,
    output: Option<&Path>,
    instance: &Path,
    algorithm: Algorithm,
    parameter: Fraction,
    pieces: &[cakecut::Interval],
    report: &AuditReport,
) -> Result<(), Failure> {
    let name = format!("{}.{}.allocation.json", stem(instance), serde_json::to_value(algorithm).unwrap().as_str().unwrap());
    let file = AllocationFile::new(algorithm, parameter, pieces, Some(report));
    let written = out.emit(output, &name, &file.to_json())?;
    summary(written, report);
    verdict(report)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let out = Output {
        out_dir: cli.out_dir.as_deref(),
    };
    match cli.command {
        Command::Gen {
            n,
            family,
            seed,
            max_pieces,
            output,
        } => {
            let instance = GeneratorSpec::new(n, max_pieces, seed, family).generate()?;
            let name = format!("{family}-n{n}-s{seed}.json").replace(':', "");
            let mut text = instance.to_json();
            text.push('\n');
            if let Some(path) = out.emit(output.as_deref(), &name, &text)? {
                println!("{}", json!({"output": path.display().to_string()}));
            }
            Ok(())
        }
        Command::Solve {
            instance,
            delta,
            trace,
            trace_output,
            output,
        } => {
            let inst = read_instance(&instance)?;
            let config = SolverConfig::new(delta.clone())?.with_trace(trace.into());
            let sol = solve(&inst, &config)?;
            if !matches!(trace, TraceArg::Off) {
                let name = format!("{}.trace.json", stem(&instance));
                let mut text = sol.trace.to_json();
                text.push('\n');
                if trace_output.is_some() || out.out_dir.is_some() {
                    out.emit(trace_output.as_deref(), &name, &text)?;
                }
            }
            write_allocation(&out, output.as_deref(), &instance, Algorithm::Connected, delta, sol.allocation.pieces(), &sol.report)
        }
        Command::SolveMult { instance, c, output } => {
            let inst = read_instance(&instance)?;
            let sol = solve_mult(&inst, &c)?;
            write_allocation(&out, output.as_deref(), &instance, Algorithm::Multiplicative, c, sol.allocation.pieces(), &sol.report)
        }
        Command::Bounded {
            instance,
            epsilon,
            output,
        } => {
            let inst = read_instance(&instance)?;
            let sol = solve_bounded(&inst, &epsilon)?;
            write_allocation(&out, output.as_deref(), &instance, Algorithm::Bounded, epsilon, sol.allocation.pieces(), &sol.report)
        }
        Command::Audit { instance, allocation } => {
            let inst = read_instance(&instance)?;
            let file = AllocationFile::from_json(&read(&allocation)?)?;
            let report = audit_file(&file, &inst)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
            verdict(&report)
        }
        Command::Bench {
            count,
            n,
            delta,
            family,
            seed,
            max_pieces,
            brute_force,
            output,
        } => {
            let mut config = BenchConfig::new(count, n.clone(), delta);
            config.family = family;
            config.seed = seed;
            config.max_pieces = max_pieces;
            config.brute_force = brute_force;
            let summary = run_bench(&config)?;
            let name = format!("bench-{count}-n{}-{}-s{seed}.json", n.start(), n.end());
            let mut text = serde_json::to_string_pretty(&summary).expect("summaries serialize");
            text.push('\n');
            if let Some(path) = out.emit(output.as_deref(), &name, &text)? {
                let line = json!({
                    "output": path.display().to_string(),
                    "count": summary.count,
                    "passed": summary.passed,
                    "violations": summary.violations,
                    "worst_additive_envy": summary.worst_additive_envy.to_string(),
                });
                println!("{line}");
            }
            if summary.all_passed() {
                Ok(())
            } else {
                Err(Failure::Audit {
                    failures: summary
                        .records
                        .iter()
                        .filter(|r| !r.passed)
                        .map(|r| json!({"seed": r.seed, "n": r.n, "failures": r.failures}))
                        .collect(),
                })
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Audit { failures }) => {
            eprintln!("{}", json!({"status": "audit_failed", "failures": failures}));
            ExitCode::from(1)
        }
        Err(Failure::Invalid { kind, message }) => {
            eprintln!("{}", json!({"status": "invalid", "kind": kind, "message": message}));
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2..8").unwrap(), 2..=8);
        assert_eq!(parse_range("2..=8").unwrap(), 2..=8);
        assert_eq!(parse_range("5").unwrap(), 5..=5);
        assert!(parse_range("8..2").is_err());
        assert!(parse_range("0..3").is_err());
        assert!(parse_range("a..3").is_err());
    }

    #[test]
    fn floats_are_rejected() {
        assert!(parse_frac("0.1").is_err());
        assert!(parse_frac("1/10").is_ok());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
