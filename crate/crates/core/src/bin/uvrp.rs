use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use uvrp::bench::{self, Algorithm, RunRecord, TrialOutcome};
use uvrp::evaluate::{evaluate, validate, ScheduleReport};
use uvrp::exact::{self, brute_force, check_constraints, routes_to_flow, ExactError};
use uvrp::gen::{generate, GenError, GenSpec, WeightModel};
use uvrp::io::{self, FileError};
use uvrp::model::{Instance, ModelError};
use uvrp::saga::{random_assignment, saga, SagaConfig, SagaError};

#[derive(Debug, Parser)]
#[command(name = "uvrp", version, about = "Cooperative-transport vehicle routing solver and benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a random instance file.
    Generate(GenerateArgs),
    /// Solve one instance file and write the solution file.
    Solve(SolveArgs),
    /// Paired SAGA vs. random-assignment runs on generated instances.
    Benchmark(BenchmarkArgs),
    /// Sweep mu and record mean distance and makespan.
    Pareto(ParetoArgs),
    /// Exhaustive optimum of a tiny instance; optionally certify a solution.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 200)]
    ga_iters: usize,
    #[arg(long, default_value_t = 500)]
    sa_iters: usize,
    #[arg(long, default_value_t = 3)]
    alt_iters: usize,
    #[arg(long, default_value_t = 50)]
    pop_size: usize,
    #[arg(long, default_value_t = 3)]
    offspring_per_pair: usize,
    #[arg(long, default_value_t = 0.8)]
    selection_ratio: f64,
    #[arg(long, default_value_t = 0.05)]
    mutation_rate: f64,
    #[arg(long, default_value_t = 0.7)]
    reinsertion_ratio: f64,
    #[arg(long, default_value_t = 0.97)]
    cooling_rate: f64,
    #[arg(long, default_value_t = 15000.0)]
    start_temperature: f64,
}

impl SolverArgs {
    fn config(&self, mu: f64, seed: u64) -> SagaConfig {
        SagaConfig {
            ga_iters: self.ga_iters,
            sa_iters: self.sa_iters,
            alt_iters: self.alt_iters,
            pop_size: self.pop_size,
            offspring_per_pair: self.offspring_per_pair,
            selection_ratio: self.selection_ratio,
            mutation_rate: self.mutation_rate,
            reinsertion_ratio: self.reinsertion_ratio,
            cooling_rate: self.cooling_rate,
            start_temperature: self.start_temperature,
            mu,
            seed,
        }
    }
}

#[derive(Debug, Args)]
struct GeneratorArgs {
    /// Workspace side length in meters.
    #[arg(long, default_value_t = 4.0)]
    workspace: f64,
    #[arg(long, default_value_t = 2.0)]
    delivery_mean: f64,
    #[arg(long, default_value_t = 2.0)]
    delivery_std: f64,
    #[arg(long, default_value_t = 1.0)]
    capacity: f64,
    #[arg(long, default_value_t = 0.5)]
    velocity: f64,
    /// Relative weights of missions needing 1, 2, ... drones.
    #[arg(long, value_delimiter = ',', default_value = "1,1")]
    drone_mix: Vec<f64>,
}

impl GeneratorArgs {
    fn spec(&self, n: usize, m: usize, seed: u64) -> GenSpec {
        GenSpec {
            n,
            m,
            workspace: self.workspace,
            delivery_mean: self.delivery_mean,
            delivery_std: self.delivery_std,
            capacity: self.capacity,
            weight_model: WeightModel {
                probabilities: self.drone_mix.clone(),
            },
            velocity: self.velocity,
            seed,
        }
    }
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    generator: GeneratorArgs,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum SolveAlgorithm {
    Saga,
    Ra,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Solution file to write.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.2)]
    mu: f64,
    #[arg(long, value_enum, default_value_t = SolveAlgorithm::Saga)]
    algorithm: SolveAlgorithm,
    /// Full schedule report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Best-so-far trace as CSV (SAGA only).
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
struct BenchmarkArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0.2)]
    mu: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV of run records.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    generator: GeneratorArgs,
}

#[derive(Debug, Args)]
struct ParetoArgs {
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    m: usize,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.15,0.30,0.45,0.60,0.75,0.90")]
    mu_list: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV of sweep points.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    generator: GeneratorArgs,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Solution file to certify against the optimum.
    #[arg(long, alias = "solution")]
    check: Option<PathBuf>,
    #[arg(long, default_value_t = 0.2)]
    mu: f64,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Invalid(String),
    Infeasible(String),
    Guard(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::Infeasible(_) => 3,
            Failure::Guard(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(s) | Failure::Invalid(s) | Failure::Infeasible(s) | Failure::Guard(s) => s,
        }
    }
}

impl From<FileError> for Failure {
    fn from(e: FileError) -> Self {
        match e {
            FileError::Model(ModelError::Infeasible { .. }) => Failure::Infeasible(e.to_string()),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

impl From<GenError> for Failure {
    fn from(e: GenError) -> Self {
        match e {
            GenError::Infeasible { .. } | GenError::Model(ModelError::Infeasible { .. }) => {
                Failure::Infeasible(e.to_string())
            }
            other => Failure::Invalid(other.to_string()),
        }
    }
}

impl From<SagaError> for Failure {
    fn from(e: SagaError) -> Self {
        match e {
            SagaError::Infeasible { .. } => Failure::Infeasible(e.to_string()),
            SagaError::InvalidConfig(_) => Failure::Usage(e.to_string()),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

impl From<bench::BenchError> for Failure {
    fn from(e: bench::BenchError) -> Self {
        match e {
            bench::BenchError::Gen(g) => g.into(),
            bench::BenchError::Saga(s) => s.into(),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

fn io_failure(path: &std::path::Path, e: impl std::fmt::Display) -> Failure {
    Failure::Invalid(format!("{}: {e}", path.display()))
}

fn check_mu(mu: f64) -> Result<(), Failure> {
    if (0.0..=1.0).contains(&mu) {
        Ok(())
    } else {
        Err(Failure::Usage(format!("mu must lie in [0, 1], got {mu}")))
    }
}

fn print_report(report: &ScheduleReport) {
    println!("J_dist   = {:.6} m", report.j_dist);
    println!("J_time   = {:.6} s", report.j_time);
    println!("J (mu={}) = {:.6}", report.mu, report.j_scalar);
    let waiting: f64 = report.positions.iter().flat_map(|p| p.waiting.iter()).sum();
    println!("total waiting = {waiting:.6} s");
    println!("drone  finish_s  distance_m");
    for (d, (t, dist)) in report.drone_finish.iter().zip(&report.drone_distance).enumerate() {
        println!("{:>5}  {:>8.3}  {:>10.3}", d + 1, t, dist);
    }
}

fn print_solution(solution: &uvrp::Solution) {
    for (k, &mission) in solution.order.iter().enumerate() {
        let drones: Vec<String> = solution.assign.drones(k).map(|d| (d + 1).to_string()).collect();
        println!("{:>4}: mission {:<4} drones [{}]", k + 1, mission + 1, drones.join(", "));
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Failure> {
    let instance = generate(&args.generator.spec(args.n, args.m, args.seed))?;
    io::write_instance(&args.out, &instance)?;
    println!("wrote {} ({} drones, {} missions)", args.out.display(), args.n, args.m);
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> Result<(), Failure> {
    check_mu(args.mu)?;
    let instance = io::read_instance(&args.instance)?;
    let cfg = args.solver.config(args.mu, args.seed);
    let (solution, report, trace) = match args.algorithm {
        SolveAlgorithm::Saga => {
            let out = saga(&instance, &cfg)?;
            (out.solution, out.report, Some(out.trace))
        }
        SolveAlgorithm::Ra => {
            let (s, r) = random_assignment(&instance, &cfg)?;
            (s, r, None)
        }
    };
    io::write_solution(&args.out, &solution)?;
    if let Some(path) = &args.report {
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        std::fs::write(path, text).map_err(|e| io_failure(path, e))?;
    }
    if let (Some(path), Some(trace)) = (&args.trace, &trace) {
        let file = File::create(path).map_err(|e| io_failure(path, e))?;
        let mut writer = csv::Writer::from_writer(BufWriter::new(file));
        for record in trace {
            writer.serialize(record).map_err(|e| io_failure(path, e))?;
        }
        writer.flush().map_err(|e| io_failure(path, e))?;
    }
    print_report(&report);
    println!("wrote {}", args.out.display());
    Ok(())
}

fn fmt_stat(xs: &[f64]) -> String {
    let mean = bench::mean(xs);
    match bench::ci95_half_width(xs) {
        Some(hw) => format!("{mean:.2} ± {hw:.2}"),
        None => format!("{mean:.2} ± n/a"),
    }
}

fn print_benchmark_summary(runs: &[TrialOutcome]) {
    let column = |alg: Algorithm, f: fn(&RunRecord) -> f64| -> Vec<f64> {
        runs.iter()
            .map(|t| if alg == Algorithm::Ra { f(&t.ra) } else { f(&t.saga) })
            .collect()
    };
    println!("{:<5} {:>22} {:>22} {:>22} {:>10}", "alg", "J_time (s)", "J_dist (m)", "J", "wall (s)");
    for alg in [Algorithm::Ra, Algorithm::Saga] {
        println!(
            "{:<5} {:>22} {:>22} {:>22} {:>10.3}",
            alg.as_str().to_uppercase(),
            fmt_stat(&column(alg, |r| r.j_time)),
            fmt_stat(&column(alg, |r| r.j_dist)),
            fmt_stat(&column(alg, |r| r.j_scalar)),
            bench::mean(&column(alg, |r| r.wall_time)),
        );
    }
    let wins = runs.iter().filter(|t| t.saga.j_scalar <= t.ra.j_scalar).count();
    println!("paired: SAGA <= RA in {wins}/{} trials", runs.len());
}

fn create(path: &std::path::Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| io_failure(path, e))
}

fn cmd_benchmark(args: BenchmarkArgs) -> Result<(), Failure> {
    check_mu(args.mu)?;
    if args.trials == 0 {
        return Err(Failure::Usage("trials must be at least 1".into()));
    }
    let gen = args.generator.spec(args.n, args.m, 0);
    gen.validate()?;
    let cfg = args.solver.config(args.mu, args.seed);
    cfg.validate()?;
    let runs = bench::benchmark(&gen, &cfg, args.trials, args.seed)?;
    bench::write_runs_csv(create(&args.out)?, &runs)?;
    println!("n = {}, m = {}, mu = {}, trials = {}", args.n, args.m, args.mu, args.trials);
    print_benchmark_summary(&runs);
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_pareto(args: ParetoArgs) -> Result<(), Failure> {
    if args.mu_list.is_empty() {
        return Err(Failure::Usage("mu-list must not be empty".into()));
    }
    for &mu in &args.mu_list {
        check_mu(mu)?;
    }
    if args.trials == 0 {
        return Err(Failure::Usage("trials must be at least 1".into()));
    }
    let gen = args.generator.spec(args.n, args.m, 0);
    gen.validate()?;
    let cfg = args.solver.config(args.mu_list[0], args.seed);
    cfg.validate()?;
    let (points, _) = bench::pareto_sweep(&gen, &cfg, &args.mu_list, args.trials, args.seed)?;
    bench::write_pareto_csv(create(&args.out)?, &points)?;
    println!("{:>6} {:>14} {:>14}", "mu", "mean J_dist", "mean J_time");
    for p in &points {
        println!("{:>6.2} {:>14.3} {:>14.3}", p.mu, p.mean_j_dist, p.mean_j_time);
    }
    if points.len() >= 2 {
        let mus: Vec<f64> = points.iter().map(|p| p.mu).collect();
        let dist: Vec<f64> = points.iter().map(|p| p.mean_j_dist).collect();
        let time: Vec<f64> = points.iter().map(|p| p.mean_j_time).collect();
        println!(
            "spearman(mu, J_dist) = {:.3}, spearman(mu, J_time) = {:.3}",
            bench::spearman(&mus, &dist),
            bench::spearman(&mus, &time)
        );
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

fn certify(instance: &Instance, path: &std::path::Path, mu: f64, optimum: f64) -> Result<(), Failure> {
    let solution = io::read_solution(path, instance.num_drones())?;
    let m = instance.num_missions();
    let mut feasible = true;
    if let Err(v) = validate(instance, &solution) {
        println!("violation: {v}");
        feasible = false;
    }
    let transcribable = solution.order.len() == m
        && solution.order.iter().all(|&i| i < m)
        && solution.assign.num_rows() == m;
    if transcribable {
        let violations = check_constraints(instance, &routes_to_flow(instance, &solution.order, &solution.assign));
        if violations.is_empty() {
            println!("constraints: all satisfied");
        } else {
            feasible = false;
            for v in &violations {
                println!("constraint violated: {v}");
            }
        }
    }
    if !feasible {
        return Err(Failure::Invalid(format!("{} is not a feasible solution", path.display())));
    }
    let report = evaluate(instance, &solution, mu).expect("validated above");
    println!("candidate J = {:.6}", report.j_scalar);
    println!(
        "gap = {:.6} ({:.4}%)",
        report.j_scalar - optimum,
        100.0 * (report.j_scalar - optimum) / optimum.abs().max(f64::MIN_POSITIVE)
    );
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> Result<(), Failure> {
    check_mu(args.mu)?;
    let instance = io::read_instance(&args.instance)?;
    let (solution, report) = match brute_force(&instance, args.mu) {
        Ok(found) => found,
        Err(e @ ExactError::TooLarge { .. }) => return Err(Failure::Guard(e.to_string())),
        Err(e) => return Err(Failure::Invalid(e.to_string())),
    };
    println!(
        "search space: {:.0} candidates",
        exact::search_space_size(&instance)
    );
    println!("optimum:");
    print_solution(&solution);
    print_report(&report);
    if let Some(path) = &args.check {
        certify(&instance, path, args.mu, report.j_scalar)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::Pareto(a) => cmd_pareto(a),
        Command::Oracle(a) => cmd_oracle(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
