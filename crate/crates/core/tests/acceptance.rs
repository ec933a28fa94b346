//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each, and
//! exits non-zero if any criterion fails.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{random_instance, random_solution, rel_err, simulate_events};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uvrp::bench::{self, ci95_half_width, mean, spearman, TrialOutcome, DEFAULT_MU_SWEEP};
use uvrp::exact::{brute_force, check_constraints, solution_to_flow, FlowSolution};
use uvrp::gen::{generate, GenSpec, WeightModel};
use uvrp::saga::{crossover, init_population, mutate_assignment, sa_mutations, saga, SagaConfig, TraceRecord};
use uvrp::{evaluate, AssignMatrix, Instance, Mission, Point2, Solution};

const SCALAR_REL_TOL: f64 = 1e-9;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Default)]
struct Traces(Vec<Vec<TraceRecord>>);

impl Traces {
    fn extend(&mut self, runs: &[TrialOutcome]) {
        self.0.extend(runs.iter().map(|t| t.trace.clone()));
    }
}

fn records_consistent(runs: &[TrialOutcome]) -> bool {
    runs.iter()
        .all(|t| t.ra.is_consistent(SCALAR_REL_TOL) && t.saga.is_consistent(SCALAR_REL_TOL))
}

/// 1. SAGA within 5% of the exhaustive optimum on at least 18 of 20 tiny instances.
fn oracle_equivalence(traces: &mut Traces) -> Verdict {
    let clock = Instant::now();
    let mut within = 0;
    let mut worst_gap: f64 = 0.0;
    for i in 0..20u64 {
        let n = [2, 3][i as usize % 2];
        let m = [2, 3, 4][i as usize % 3];
        let mu = [0.0, 0.5, 1.0][(i as usize / 2) % 3];
        let spec = GenSpec {
            weight_model: WeightModel::uniform(2),
            ..GenSpec::new(n, m, 1000 + i)
        };
        let inst = generate(&spec).unwrap();
        let (_, optimum) = brute_force(&inst, mu).unwrap();
        let cfg = SagaConfig {
            mu,
            seed: i,
            ..SagaConfig::default()
        };
        let out = saga(&inst, &cfg).unwrap();
        let gap = (out.report.j_scalar - optimum.j_scalar) / optimum.j_scalar;
        worst_gap = worst_gap.max(gap);
        if out.report.j_scalar <= 1.05 * optimum.j_scalar {
            within += 1;
        }
        traces.0.push(out.trace);
    }
    let elapsed = clock.elapsed();
    // Context only: the same draw repeated on 200 further instances.
    let mut wider = 0;
    for i in 0..200u64 {
        let (n, m, mu) = ([2, 3][i as usize % 2], [2, 3, 4][i as usize % 3], [0.0, 0.5, 1.0][(i as usize / 2) % 3]);
        let spec = GenSpec {
            weight_model: WeightModel::uniform(2),
            ..GenSpec::new(n, m, 50_000 + i)
        };
        let inst = generate(&spec).unwrap();
        let (_, optimum) = brute_force(&inst, mu).unwrap();
        let out = saga(&inst, &SagaConfig { mu, seed: i, ..SagaConfig::default() }).unwrap();
        if out.report.j_scalar <= 1.05 * optimum.j_scalar {
            wider += 1;
        }
    }
    Verdict::new(
        within >= 18 && elapsed < Duration::from_secs(300),
        format!(
            "{within}/20 within 5% of optimum (worst gap {:.3}%), {:.1}s; wider sample {wider}/200",
            100.0 * worst_gap,
            elapsed.as_secs_f64()
        ),
    )
}

/// 2. Every operator output maps to a feasible flow; the opposite-order cycle does not.
fn deadlock_freedom() -> Verdict {
    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut checked = [0usize; 4];
    let mut failures = 0usize;
    let mut check = |inst: &Instance, order: &[usize], genome: &AssignMatrix, slot: usize, checked: &mut [usize; 4]| {
        let flow = solution_to_flow(inst, &Solution::new(order.to_vec(), genome.clone())).unwrap();
        if !check_constraints(inst, &flow).is_empty() {
            failures += 1;
        }
        checked[slot] += 1;
    };
    let cfg = SagaConfig::default();
    while checked.iter().any(|&c| c < 10_000) {
        let inst = random_instance(&mut rng, 4, 8, 3);
        let order: Vec<usize> = (0..8).collect();
        let pop = init_population(&inst, &order, &cfg, &mut rng).unwrap();
        for g in &pop.genomes {
            check(&inst, &order, g, 0, &mut checked);
        }
        for pair in pop.genomes.chunks_exact(2) {
            let child = crossover(&pair[0], &pair[1], &mut rng).unwrap();
            check(&inst, &order, &child, 1, &mut checked);
        }
        for g in &pop.genomes {
            let mutated = mutate_assignment(g, 0.3, &mut rng);
            check(&inst, &order, &mutated, 2, &mut checked);
        }
        let (new_order, genomes) = sa_mutations(&order, &pop.genomes, &mut rng);
        for g in &genomes {
            check(&inst, &new_order, g, 3, &mut checked);
        }
    }

    let inst = Instance::new(
        vec![Point2::new(0.0, 0.0), Point2::new(4.0, 0.0)],
        vec![
            Mission::new(Point2::new(1.0, 1.0), Point2::new(1.0, 2.0), 2.0),
            Mission::new(Point2::new(3.0, 1.0), Point2::new(3.0, 2.0), 2.0),
        ],
        1.0,
        1.0,
    )
    .unwrap();
    let mut cycle = FlowSolution::empty(2, 2);
    for (d, a, b) in [(0usize, 2usize, 3usize), (1, 3, 2)] {
        cycle.set_arc(d, d, a, true);
        cycle.set_arc(d, a, b, true);
        cycle.set_arc(d, b, d, true);
    }
    cycle.potentials = vec![0.0, 0.0, 0.5, 1.0];
    let cycle_flagged = check_constraints(&inst, &cycle)
        .iter()
        .any(|v| v.family() == "potential");
    let elapsed = clock.elapsed();
    Verdict::new(
        failures == 0 && cycle_flagged && elapsed < Duration::from_secs(60),
        format!(
            "{} operator outputs checked (init/crossover/mutation/sa = {:?}), {failures} infeasible; cycle flagged: {cycle_flagged}; {:.1}s",
            checked.iter().sum::<usize>(),
            checked,
            elapsed.as_secs_f64()
        ),
    )
}

/// 3. Evaluator agrees with the event-driven simulator and the hand-computed examples.
fn evaluator_correctness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let inst = random_instance(&mut rng, 5, 10, 3);
        let sol = random_solution(&mut rng, &inst);
        let report = evaluate(&inst, &sol, 0.5).unwrap();
        let des = simulate_events(&inst, &sol.order, &sol.assign.to_drone_lists());
        worst = worst.max(rel_err(report.j_dist, des.j_dist));
        worst = worst.max(rel_err(report.j_time, des.j_time));
        for pos in &report.positions {
            let start = des.start[pos.mission];
            for (i, &d) in pos.drones.iter().enumerate() {
                let &(_, arrival) = des.arrival[pos.mission].iter().find(|(x, _)| *x == d).unwrap();
                worst = worst.max(rel_err(pos.waiting[i], start - arrival));
            }
        }
    }

    let single = Instance::new(
        vec![Point2::new(0.0, 0.0)],
        vec![Mission::new(Point2::new(3.0, 0.0), Point2::new(3.0, 4.0), 1.0)],
        1.0,
        1.0,
    )
    .unwrap();
    let r1 = evaluate(
        &single,
        &Solution::new(vec![0], AssignMatrix::from_rows(&[vec![true]]).unwrap()),
        0.0,
    )
    .unwrap();
    // 3 to the pickup, 4 loaded, 5 back to the depot.
    let single_ok = r1.j_dist == 12.0 && r1.j_time == 12.0 && r1.j_scalar == 12.0 && r1.positions[0].waiting == [0.0];

    let pair = Instance::new(
        vec![Point2::new(0.0, 0.0), Point2::new(10.0, 0.0)],
        vec![Mission::new(Point2::new(2.0, 0.0), Point2::new(2.0, 2.0), 2.0)],
        1.0,
        1.0,
    )
    .unwrap();
    let r2 = evaluate(
        &pair,
        &Solution::new(vec![0], AssignMatrix::from_rows(&[vec![true, true]]).unwrap()),
        0.0,
    )
    .unwrap();
    let pair_ok = r2.positions[0].arrival == [2.0, 8.0]
        && r2.positions[0].waiting == [6.0, 0.0]
        && r2.positions[0].finish == 10.0
        && r2.drone_finish == [10.0 + 8f64.sqrt(), 10.0 + 68f64.sqrt()]
        && r2.j_time == 10.0 + 68f64.sqrt()
        && r2.j_dist == (2.0 + 2.0 + 8f64.sqrt()) + (8.0 + 2.0 + 68f64.sqrt());

    Verdict::new(
        worst <= 1e-9 && single_ok && pair_ok,
        format!("200 pairs, worst relative error {worst:.2e}; single-drone example {single_ok}, two-drone example {pair_ok}"),
    )
}

fn saga_means(runs: &[TrialOutcome]) -> (f64, f64) {
    let ra: Vec<f64> = runs.iter().map(|t| t.ra.j_scalar).collect();
    let sg: Vec<f64> = runs.iter().map(|t| t.saga.j_scalar).collect();
    (mean(&ra), mean(&sg))
}

/// 4. SAGA at least 10% below RA on average and never worse on a paired trial.
fn saga_beats_ra(traces: &mut Traces) -> Verdict {
    let clock = Instant::now();
    let cfg = SagaConfig {
        mu: 0.2,
        ..SagaConfig::default()
    };
    let runs = bench::benchmark(&GenSpec::new(5, 100, 0), &cfg, 30, 4).unwrap();
    traces.extend(&runs);
    let (ra, sg) = saga_means(&runs);
    let paired = runs.iter().filter(|t| t.saga.j_scalar <= t.ra.j_scalar).count();
    let elapsed = clock.elapsed();
    Verdict::new(
        sg <= 0.9 * ra && paired == runs.len() && records_consistent(&runs) && elapsed < Duration::from_secs(1800),
        format!(
            "mean J: RA {ra:.1}, SAGA {sg:.1} ({:.1}% lower); SAGA <= RA in {paired}/{}; {:.1}s",
            100.0 * (1.0 - sg / ra),
            runs.len(),
            elapsed.as_secs_f64()
        ),
    )
}

/// 5. Makespan falls as the fleet grows at m = 300.
fn makespan_vs_drones(traces: &mut Traces) -> Verdict {
    let cfg = SagaConfig {
        mu: 0.2,
        ..SagaConfig::default()
    };
    let mut stats = Vec::new();
    let mut consistent = true;
    for n in [4, 8, 20] {
        let runs = bench::benchmark(&GenSpec::new(n, 300, 0), &cfg, 10, 5).unwrap();
        traces.extend(&runs);
        consistent &= records_consistent(&runs);
        let times: Vec<f64> = runs.iter().map(|t| t.saga.j_time).collect();
        stats.push((n, mean(&times), ci95_half_width(&times).unwrap()));
    }
    let decreasing = stats.windows(2).all(|w| w[1].1 < w[0].1);
    let separated = stats[0].1 - stats[0].2 > stats[2].1 + stats[2].2;
    let summary: Vec<String> = stats
        .iter()
        .map(|(n, m, hw)| format!("n={n}: {m:.1} ± {hw:.1}"))
        .collect();
    Verdict::new(
        decreasing && separated && consistent,
        format!("SAGA J_time {}; strictly decreasing {decreasing}, CIs separated {separated}", summary.join(", ")),
    )
}

/// 6. Distance falls and makespan rises as mu grows.
fn pareto_tradeoff(traces: &mut Traces) -> Verdict {
    let (points, runs) =
        bench::pareto_sweep(&GenSpec::new(4, 100, 0), &SagaConfig::default(), &DEFAULT_MU_SWEEP, 50, 6).unwrap();
    traces.extend(&runs);
    let mus: Vec<f64> = points.iter().map(|p| p.mu).collect();
    let dist: Vec<f64> = points.iter().map(|p| p.mean_j_dist).collect();
    let time: Vec<f64> = points.iter().map(|p| p.mean_j_time).collect();
    let rho_dist = spearman(&mus, &dist);
    let rho_time = spearman(&mus, &time);
    let rows: Vec<String> = points
        .iter()
        .map(|p| format!("{:.2}:({:.1} m, {:.1} s)", p.mu, p.mean_j_dist, p.mean_j_time))
        .collect();
    Verdict::new(
        points.len() == 6 && rho_dist <= 0.0 && rho_time >= 0.0 && records_consistent(&runs),
        format!("rho(mu, J_dist) = {rho_dist:.3}, rho(mu, J_time) = {rho_time:.3}; {}", rows.join(" ")),
    )
}

/// 7. Every recorded best-so-far trace is non-increasing.
fn monotone_traces(traces: &Traces) -> Verdict {
    let bad = traces
        .0
        .iter()
        .filter(|t| !t.windows(2).all(|w| w[1].j_scalar <= w[0].j_scalar))
        .count();
    Verdict::new(
        bad == 0 && !traces.0.is_empty(),
        format!("{} traces, {bad} non-monotone", traces.0.len()),
    )
}

fn run_cli(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_uvrp"))
        .args(args)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn same_bytes(a: &Path, b: &Path) -> bool {
    matches!((std::fs::read(a), std::fs::read(b)), (Ok(x), Ok(y)) if x == y && !x.is_empty())
}

/// 8. Same seed, byte-identical solution files and CSVs.
fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name);
    let s = |path: &Path| path.to_str().unwrap().to_string();
    let inst = p("a.toml");
    let mut ok = run_cli(&["generate", "--n", "4", "--m", "15", "--seed", "3", "--out", &s(&inst)]);
    let mut detail = Vec::new();
    for (kind, outs) in [("solve", ["s1.toml", "s2.toml"]), ("benchmark", ["b1.csv", "b2.csv"]), ("pareto", ["p1.csv", "p2.csv"])] {
        for out in outs {
            let out = s(&p(out));
            let args: Vec<&str> = match kind {
                "solve" => vec!["solve", "--instance", inst.to_str().unwrap(), "--seed", "7", "--mu", "0.2", "--out", &out],
                "benchmark" => vec![
                    "benchmark", "--n", "3", "--m", "12", "--trials", "2", "--seed", "7", "--ga-iters", "30", "--sa-iters", "60",
                    "--out", &out,
                ],
                _ => vec![
                    "pareto", "--n", "3", "--m", "12", "--trials", "2", "--mu-list", "0.2,0.8", "--seed", "7", "--ga-iters",
                    "30", "--sa-iters", "60", "--out", &out,
                ],
            };
            ok &= run_cli(&args);
        }
        let same = same_bytes(&p(outs[0]), &p(outs[1]));
        detail.push(format!("{kind}: {}", if same { "identical" } else { "DIFFERENT" }));
        ok &= same;
    }
    Verdict::new(ok, detail.join(", "))
}

/// 9. Single-drone missions never wait, and the makespan is the longest tour.
fn mtsp_reduction() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut nonzero_wait = 0usize;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let inst = random_instance(&mut rng, 4, 12, 1);
        let sol = random_solution(&mut rng, &inst);
        let report = evaluate(&inst, &sol, 0.5).unwrap();
        nonzero_wait += report
            .positions
            .iter()
            .flat_map(|p| p.waiting.iter())
            .filter(|&&w| w != 0.0)
            .count();
        let mut longest: f64 = 0.0;
        for d in 0..inst.num_drones() {
            let mut at = inst.depots()[d];
            let mut length = 0.0;
            for (k, &i) in sol.order.iter().enumerate() {
                if sol.assign.get(k, d) {
                    let mission = &inst.missions()[i];
                    length += at.distance(&mission.pickup) + mission.transport_length();
                    at = mission.delivery;
                }
            }
            length += at.distance(&inst.depots()[d]);
            longest = longest.max(length / inst.velocity());
        }
        worst = worst.max(rel_err(report.j_time, longest));
    }
    Verdict::new(
        nonzero_wait == 0 && worst <= 1e-9,
        format!("100 instances, {nonzero_wait} non-zero waits, worst makespan relative error {worst:.2e}"),
    )
}

fn main() {
    let mut traces = Traces::default();
    let mut results: Vec<(&str, Verdict)> = Vec::new();
    let mut record = |name: &'static str, verdict: Verdict| {
        println!("[{}] {name}: {}", if verdict.pass { "PASS" } else { "FAIL" }, verdict.detail);
        results.push((name, verdict));
    };
    record("1 oracle equivalence", oracle_equivalence(&mut traces));
    record("2 deadlock freedom", deadlock_freedom());
    record("3 evaluator correctness", evaluator_correctness());
    record("4 SAGA beats RA", saga_beats_ra(&mut traces));
    record("5 makespan vs drones", makespan_vs_drones(&mut traces));
    record("6 pareto trade-off", pareto_tradeoff(&mut traces));
    record("7 monotone best-so-far", monotone_traces(&traces));
    record("8 determinism", determinism());
    record("9 mTSP reduction", mtsp_reduction());

    let failed: Vec<&str> = results.iter().filter(|(_, v)| !v.pass).map(|(n, _)| *n).collect();
    println!(
        "acceptance: {}/{} criteria passed",
        results.len() - failed.len(),
        results.len()
    );
    if !failed.is_empty() {
        eprintln!("failed: {}", failed.join("; "));
        std::process::exit(1);
    }
}
