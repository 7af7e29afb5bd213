//! End-to-end acceptance criteria. Each test prints one PASS/FAIL line to
//! stderr (visible without `--nocapture`) before asserting.
//!
//! Envy and value checks here use a direct segment-overlap integration of the
//! densities, independent of the library's cumulative-mass queries.

use std::collections::BTreeSet;
use std::io::Write;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cakecut::audit::check_phase_invariants;
use cakecut::audit::PhaseTag;
use cakecut::bench::{run_bench, BenchConfig};
use cakecut::bounded::solve_bounded;
use cakecut::brute::brute_force_min_envy;
use cakecut::connected::{solve, solve_mult, SolverConfig, TraceLevel};
use cakecut::envy_graph::{build_envy_graph, eliminate_cycles};
use cakecut::fraction::{frac, int, to_f64, Fraction};
use cakecut::hat::{hat_cut, hat_eval};
use cakecut::io::{AllocationFile, Algorithm};
use cakecut::{Family, GeneratorSpec, Instance, Interval, PartialAllocation, QueryCounter, Valuation};

fn report(number: usize, name: &str, passed: bool, detail: &str) {
    let verdict = if passed { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "[acceptance {number}] {verdict} {name}: {detail}");
}

fn naive_value(v: &Valuation, piece: &Interval) -> Fraction {
    let Some((lo, hi)) = piece.bounds() else {
        return Fraction::zero();
    };
    naive_between(v, lo, hi)
}

fn naive_between(v: &Valuation, lo: &Fraction, hi: &Fraction) -> Fraction {
    let bps = v.breakpoints();
    let mut total = Fraction::zero();
    for (k, d) in v.densities().iter().enumerate() {
        let a = lo.max(&bps[k]);
        let b = hi.min(&bps[k + 1]);
        if a < b {
            total += d * (b - a);
        }
    }
    total
}

fn naive_hat(v: &Valuation, lo: &Fraction, hi: &Fraction) -> Fraction {
    let inside = naive_between(v, lo, hi);
    let bifurcating = inside >= frac(1, 4)
        && naive_between(v, &Fraction::zero(), lo) <= frac(1, 2)
        && naive_between(v, hi, &Fraction::one()) <= frac(1, 2);
    if bifurcating {
        Fraction::one()
    } else {
        inside
    }
}

fn values(pieces: &[Interval], inst: &Instance) -> Vec<Vec<Fraction>> {
    (0..inst.n())
        .map(|i| pieces.iter().map(|p| naive_value(inst.valuation(i), p)).collect())
        .collect()
}

/// Complete, pairwise disjoint, exact union `[0, 1]`.
fn tiles_the_cake(pieces: &[Interval]) -> bool {
    let mut spans: Vec<(Fraction, Fraction)> = pieces
        .iter()
        .filter_map(|p| p.bounds().map(|(a, b)| (a.clone(), b.clone())))
        .filter(|(a, b)| a < b)
        .collect();
    spans.sort();
    let mut reach = Fraction::zero();
    for (a, b) in spans {
        if a != reach {
            return false;
        }
        reach = b;
    }
    reach == Fraction::one()
}

fn max_envy(vals: &[Vec<Fraction>]) -> Fraction {
    let mut worst = Fraction::zero();
    for (i, row) in vals.iter().enumerate() {
        for v in row {
            let e = v - &row[i];
            if e > worst {
                worst = e;
            }
        }
    }
    worst
}

#[test]
fn criterion_1_additive_envy_suite() {
    let delta = frac(1, 10);
    let config = SolverConfig::new(delta.clone()).unwrap();
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut worst_slack = f64::INFINITY;
    for k in 0..500u64 {
        let n = 2 + (k % 7) as usize;
        let inst = GeneratorSpec::new(n, 12, k, Family::Random).generate().unwrap();
        let sol = solve(&inst, &config).unwrap();
        let pieces = sol.allocation.pieces();
        let bound = frac(1, 4) + int(2) * &delta / int(n as i64);
        let envy = max_envy(&values(pieces, &inst));
        worst_slack = worst_slack.min(to_f64(&(&bound - &envy)));
        if pieces.len() != n || !tiles_the_cake(pieces) || envy > bound || !sol.report.passed() {
            failures.push(format!("seed {k} (n = {n}): envy {envy} vs bound {bound}"));
        }
    }
    let elapsed = start.elapsed();
    let passed = failures.is_empty();
    report(
        1,
        "500 instances, n in 2..=8, delta = 1/10, envy <= 1/4 + 2delta/n",
        passed,
        &format!(
            "{} violations, smallest slack {worst_slack:.4}, {:.1}s",
            failures.len(),
            elapsed.as_secs_f64()
        ),
    );
    assert!(passed, "{failures:?}");
}

#[test]
fn criterion_2_headline_instance() {
    let inst = GeneratorSpec::new(100, 12, 0, Family::Random).generate().unwrap();
    let start = Instant::now();
    let sol = solve(&inst, &SolverConfig::new(frac(1, 20)).unwrap()).unwrap();
    let elapsed = start.elapsed();
    let vals = values(sol.allocation.pieces(), &inst);
    let envy = max_envy(&vals);
    let mut ratio: Option<Fraction> = None;
    for (i, row) in vals.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if i != j && !v.is_zero() {
                let r = &row[i] / v;
                if ratio.as_ref().is_none_or(|b| &r < b) {
                    ratio = Some(r);
                }
            }
        }
    }
    let envy_ok = envy <= frac(251, 1000);
    let ratio_ok = ratio.as_ref().is_none_or(|r| r >= &frac(499, 1000));
    let time_ok = elapsed < Duration::from_secs(60);
    let passed = envy_ok && ratio_ok && time_ok && tiles_the_cake(sol.allocation.pieces());
    report(
        2,
        "n = 100, delta = 1/20: envy <= 0.251 and multiplicative ratio >= 0.499 within 60s",
        passed,
        &format!(
            "envy {:.4} ({}), ratio {} ({}), {:.1}s ({})",
            to_f64(&envy),
            if envy_ok { "ok" } else { "too high" },
            ratio.as_ref().map_or("infinite".to_string(), |r| format!("{:.4}", to_f64(r))),
            if ratio_ok { "ok" } else { "too low" },
            elapsed.as_secs_f64(),
            if time_ok { "ok" } else { "too slow" },
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_3_multiplicative_suite() {
    let c = frac(1, 10);
    let mut failures = Vec::new();
    let mut worst = f64::INFINITY;
    for k in 0..200u64 {
        let n = 2 + (k % 7) as usize;
        let inst = GeneratorSpec::new(n, 12, 10_000 + k, Family::Random).generate().unwrap();
        let sol = solve_mult(&inst, &c).unwrap();
        let vals = values(sol.allocation.pieces(), &inst);
        let share = frac(1, 4 * n as i64);
        for (i, row) in vals.iter().enumerate() {
            if row[i] < share {
                failures.push(format!("seed {}: agent {} holds {} < 1/(4n)", 10_000 + k, i + 1, row[i]));
            }
            for (j, v) in row.iter().enumerate() {
                if (int(2) + &c) * &row[i] < *v {
                    failures.push(format!("seed {}: agent {} envies {} beyond 2 + c", 10_000 + k, i + 1, j + 1));
                }
                if i != j && !v.is_zero() {
                    worst = worst.min(to_f64(&(&row[i] / v)));
                }
            }
        }
        if !sol.report.passed() {
            failures.push(format!("seed {}: report failed", 10_000 + k));
        }
    }
    let passed = failures.is_empty();
    report(
        3,
        "200 instances, c = 1/10: (2 + c) v_i(I_i) >= v_i(I_j) and v_i(I_i) >= 1/(4n)",
        passed,
        &format!("{} violations, smallest ratio {worst:.4} (guarantee {:.4})", failures.len(), 1.0 / 2.1),
    );
    assert!(passed, "{failures:?}");
}

#[test]
fn criterion_4_phase_invariants() {
    let delta = frac(1, 10);
    let config = SolverConfig::new(delta.clone()).unwrap().with_trace(TraceLevel::Full);
    let families = [Family::Random, Family::Identical, Family::DisjointBlocks, Family::Grouped(2)];
    let mut failures = Vec::new();
    let mut phase_two_runs = 0;
    for k in 0..200u64 {
        let n = 2 + (k % 7) as usize;
        let family = families[(k as usize / 7) % families.len()];
        let inst = GeneratorSpec::new(n, 12, 20_000 + k, family).generate().unwrap();
        let sol = solve(&inst, &config).unwrap();
        let mut checks = check_phase_invariants(sol.phase_one.pieces(), &inst, &delta, PhaseTag::PhaseOne);
        checks.extend(check_phase_invariants(sol.phase_two.pieces(), &inst, &delta, PhaseTag::PhaseTwo));
        checks.push(sol.trace.check_hat_monotone());
        for f in checks.failures() {
            failures.push(format!("seed {}: {} {:?}", 20_000 + k, f.name, f.witness));
        }
        for f in sol.report.failures() {
            failures.push(format!("seed {}: {} {:?}", 20_000 + k, f.name, f.witness));
        }
        let cap = int((n * n) as i64) / &delta;
        let it = sol.report.iterations;
        if int(it.phase_one as i64) > cap || int(it.phase_two as i64) > cap {
            failures.push(format!("seed {}: {it:?} exceeds n^2/delta", 20_000 + k));
        }
        if it.phase_two > 0 {
            phase_two_runs += 1;
        }
    }
    let passed = failures.is_empty();
    report(
        4,
        "200 instances: phase-boundary invariants, hat monotonicity, iteration bounds",
        passed,
        &format!("{} violations ({phase_two_runs} runs exercised phase two)", failures.len()),
    );
    assert!(passed, "{failures:?}");
}

fn random_partial(rng: &mut impl Rng, n: usize) -> PartialAllocation {
    let filled = rng.gen_range(0..=n);
    let mut points = BTreeSet::new();
    while points.len() < 2 * filled {
        points.insert(rng.gen_range(0..=1000i64));
    }
    let points: Vec<i64> = points.into_iter().collect();
    let mut pieces: Vec<Interval> = points
        .chunks(2)
        .map(|w| Interval::new(frac(w[0], 1000), frac(w[1], 1000)).unwrap())
        .collect();
    pieces.resize(n, Interval::Empty);
    for i in (1..n).rev() {
        pieces.swap(i, rng.gen_range(0..=i));
    }
    PartialAllocation::new(pieces).unwrap()
}

#[test]
fn criterion_5_cycle_elimination() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = Vec::new();
    let mut rotations = 0;
    for k in 0..1000u64 {
        let n = rng.gen_range(2..=8);
        let inst = GeneratorSpec::new(n, 12, 40_000 + k, Family::Random).generate().unwrap();
        let partial = random_partial(&mut rng, n);
        let counter = QueryCounter::new();
        let oracles = inst.oracles(&counter);
        let out = eliminate_cycles(&partial, &oracles).unwrap();
        rotations += out.resolutions;

        if !build_envy_graph(&out.allocation, &oracles).unwrap().is_acyclic() {
            failures.push(format!("case {k}: cycle remains"));
        }
        for i in 0..n {
            let v = inst.valuation(i);
            let hat = |p: &Interval| p.bounds().map_or(Fraction::zero(), |(a, b)| naive_hat(v, a, b));
            if hat(out.allocation.piece(i)) < hat(partial.piece(i)) {
                failures.push(format!("case {k}: agent {} lost hat value", i + 1));
            }
        }
        let mut before = partial.pieces().to_vec();
        let mut after = out.allocation.pieces().to_vec();
        before.sort_by_key(|p| p.to_string());
        after.sort_by_key(|p| p.to_string());
        if before != after {
            failures.push(format!("case {k}: pieces changed"));
        }
        if out.edge_counts.windows(2).any(|w| w[1] >= w[0]) {
            failures.push(format!("case {k}: edge counts {:?} not strictly decreasing", out.edge_counts));
        }
    }
    let passed = failures.is_empty();
    report(
        5,
        "1000 random partial allocations: acyclic, hat values kept, pieces preserved, edges decrease",
        passed,
        &format!("{} violations over {rotations} rotations", failures.len()),
    );
    assert!(passed, "{failures:?}");
}

const SCAN_STEPS: i64 = 10_000;

/// First grid point `g = k/10^4 >= x` with hat value of `[x, g]` at least `nu`.
/// The hat value is nondecreasing in the right end, so bisection finds the
/// same point a linear scan would.
fn scan_hat_cut(v: &Valuation, x: &Fraction, nu: &Fraction) -> Option<Fraction> {
    let point = |k: i64| frac(k, SCAN_STEPS);
    let mut lo = (0..=SCAN_STEPS).find(|&k| &point(k) >= x).expect("x <= 1");
    let mut hi = SCAN_STEPS;
    if naive_hat(v, x, &point(hi)) < *nu {
        return None;
    }
    if naive_hat(v, x, &point(lo)) >= *nu {
        return Some(point(lo));
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if naive_hat(v, x, &point(mid)) >= *nu {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(point(hi))
}

#[test]
fn criterion_6_hat_cut_matches_grid_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let step = frac(1, SCAN_STEPS);
    let mut failures = Vec::new();
    let mut none_count = 0;
    let valuations: Vec<Valuation> = (0..100u64)
        .map(|s| GeneratorSpec::new(1, 12, 60_000 + s, Family::Random).generate().unwrap().valuation(0).clone())
        .collect();
    for t in 0..10_000 {
        let v = &valuations[t % valuations.len()];
        let denom = rng.gen_range(1..=997i64);
        let x = frac(rng.gen_range(0..denom), denom);
        let nu = frac(rng.gen_range(1..=1100i64), 1000);
        let counter = QueryCounter::new();
        let o = cakecut::Oracle::new(v, &counter);
        let got = hat_cut(&o, &x, &nu).unwrap();
        let scanned = scan_hat_cut(v, &x, &nu);
        match (&got, &scanned) {
            (None, None) => none_count += 1,
            (Some(y), Some(g)) => {
                if !(y <= g && &(g - &step) < y) {
                    failures.push(format!("x {x}, nu {nu}: hat_cut {y}, scan {g}"));
                }
                let exact = hat_eval(&o, &Interval::new(x.clone(), y.clone()).unwrap()).unwrap().value;
                if exact < nu || naive_hat(v, &x, y) < nu {
                    failures.push(format!("x {x}, nu {nu}: hat value at {y} is {exact}"));
                }
            }
            _ => failures.push(format!("x {x}, nu {nu}: hat_cut {got:?}, scan {scanned:?}")),
        }
    }
    let passed = failures.is_empty();
    report(
        6,
        "10000 (valuation, x, nu) triples: hat_cut within one 1e-4 grid step of a scan",
        passed,
        &format!("{} disagreements ({none_count} unreachable targets)", failures.len()),
    );
    assert!(passed, "{:?}", &failures[..failures.len().min(10)]);
}

#[test]
fn criterion_7_bounded_heterogeneity_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = Vec::new();
    let mut largest_grid_fill = 0.0f64;
    for k in 0..200u64 {
        let d = rng.gen_range(1..=3usize);
        let n = rng.gen_range(d + 2..=d + 14);
        // the smallest admissible epsilon, (d + 1)/n, up to (n - 1)/n
        let numer = rng.gen_range(d + 1..n) as i64;
        let epsilon = frac(numer, n as i64);
        assert!(int(d as i64) <= &epsilon * int(n as i64) - Fraction::one());
        let inst = GeneratorSpec::new(n, 12, 70_000 + k, Family::Grouped(d)).generate().unwrap();
        let sol = solve_bounded(&inst, &epsilon).unwrap();
        let pieces = sol.allocation.pieces();
        let envy = max_envy(&values(pieces, &inst));
        if !tiles_the_cake(pieces) || envy > epsilon {
            failures.push(format!("seed {}: envy {envy} vs epsilon {epsilon}", 70_000 + k));
        }
        if sol.grid.points.len() > n + 1 {
            failures.push(format!("seed {}: {} grid points for n = {n}", 70_000 + k, sol.grid.points.len()));
        }
        if !sol.report.passed() {
            failures.push(format!("seed {}: report failed", 70_000 + k));
        }
        largest_grid_fill = largest_grid_fill.max(sol.grid.points.len() as f64 / (n + 1) as f64);
    }
    let passed = failures.is_empty();
    report(
        7,
        "200 grouped instances with d <= epsilon n - 1: complete, envy <= epsilon, |Z| <= n + 1",
        passed,
        &format!("{} violations, largest |Z|/(n+1) = {largest_grid_fill:.2}", failures.len()),
    );
    assert!(passed, "{failures:?}");
}

#[test]
fn criterion_8_brute_force_cross_check() {
    let two = brute_force_min_envy(&Instance::identical(2, Valuation::uniform()).unwrap(), 100).unwrap();
    let three = brute_force_min_envy(&Instance::identical(3, Valuation::uniform()).unwrap(), 99).unwrap();
    let exact_ok = two.max_envy.is_zero()
        && two.allocation.cut_points() == vec![frac(1, 2)]
        && three.max_envy.is_zero()
        && three.allocation.cut_points() == vec![frac(1, 3), frac(2, 3)];

    let mut config = BenchConfig::new(20, 2..=3, frac(1, 10));
    config.max_pieces = 6;
    config.seed = 80_000;
    config.brute_force = Some(40);
    let summary = run_bench(&config).unwrap();
    let gaps: Vec<f64> = summary
        .records
        .iter()
        .filter_map(|r| r.brute_force_envy.as_ref().map(|b| to_f64(&(&r.max_additive_envy - b))))
        .collect();
    let mean_gap = gaps.iter().sum::<f64>() / gaps.len().max(1) as f64;
    let bench_ok = summary.brute_force_compared == config.count && summary.all_passed();

    let passed = exact_ok && bench_ok;
    report(
        8,
        "brute force finds zero envy on uniform n = 2, 3 and never exceeds the solver's envy in a batch",
        passed,
        &format!(
            "n=2 cuts {:?}, n=3 cuts {:?}; {} bench comparisons, {} optima above solver, mean solver excess {mean_gap:.4}",
            two.allocation.cut_points().iter().map(ToString::to_string).collect::<Vec<_>>(),
            three.allocation.cut_points().iter().map(ToString::to_string).collect::<Vec<_>>(),
            summary.brute_force_compared,
            summary.brute_force_above_solver,
        ),
    );
    assert!(passed);
}

fn allocation_bytes(seed: u64, algorithm: Algorithm) -> (String, String) {
    let family = match algorithm {
        Algorithm::Bounded => Family::Grouped(1),
        _ => Family::Random,
    };
    let inst = GeneratorSpec::new(5, 12, seed, family).generate().unwrap();
    let instance_json = inst.to_json();
    let file = match algorithm {
        Algorithm::Connected => {
            let config = SolverConfig::new(frac(1, 10)).unwrap();
            let sol = solve(&inst, &config).unwrap();
            AllocationFile::new(algorithm, frac(1, 10), sol.allocation.pieces(), Some(&sol.report))
        }
        Algorithm::Multiplicative => {
            let sol = solve_mult(&inst, &frac(1, 10)).unwrap();
            AllocationFile::new(algorithm, frac(1, 10), sol.allocation.pieces(), Some(&sol.report))
        }
        Algorithm::Bounded => {
            let sol = solve_bounded(&inst, &frac(1, 2)).unwrap();
            AllocationFile::new(algorithm, frac(1, 2), sol.allocation.pieces(), Some(&sol.report))
        }
    };
    (instance_json, file.to_json())
}

#[test]
fn criterion_9_determinism() {
    let mut mismatches = Vec::new();
    let mut runs = 0;
    for seed in 0..10u64 {
        for algorithm in [Algorithm::Connected, Algorithm::Multiplicative, Algorithm::Bounded] {
            let first = allocation_bytes(seed, algorithm);
            let second = allocation_bytes(seed, algorithm);
            runs += 1;
            if first != second {
                mismatches.push(format!("seed {seed}, {algorithm:?}"));
            }
        }
    }
    let passed = mismatches.is_empty();
    report(
        9,
        "repeated seeded runs give byte-identical instance and allocation files",
        passed,
        &format!("{} of {runs} repeated runs differ", mismatches.len()),
    );
    assert!(passed, "{mismatches:?}");
}

#[test]
fn trace_files_are_deterministic_too() {
    let inst = GeneratorSpec::new(4, 12, 3, Family::Random).generate().unwrap();
    let config = SolverConfig::new(frac(1, 10)).unwrap().with_trace(TraceLevel::Full);
    let a = solve(&inst, &config).unwrap().trace.to_json();
    let b = solve(&inst, &config).unwrap().trace.to_json();
    assert_eq!(a, b);
}
