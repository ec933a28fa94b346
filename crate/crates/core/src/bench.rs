//! Paired SAGA vs. random-assignment trials, mu sweeps, and summary statistics.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::evaluate::scalarize;
use crate::gen::{generate, GenError, GenSpec};
use crate::saga::{random_assignment, saga, SagaConfig, SagaError, TraceRecord};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Saga(#[from] SagaError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Saga,
    Ra,
    Oracle,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Saga => "saga",
            Algorithm::Ra => "ra",
            Algorithm::Oracle => "oracle",
        }
    }
}

/// One solver run on one generated instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub trial: usize,
    pub n: usize,
    pub m: usize,
    pub instance_seed: u64,
    pub solver_seed: u64,
    pub algorithm: Algorithm,
    pub mu: f64,
    pub j_dist: f64,
    pub j_time: f64,
    pub j_scalar: f64,
    /// Kept out of the CSV so that output files are reproducible byte for byte.
    #[serde(skip)]
    pub wall_time: f64,
}

impl RunRecord {
    /// Whether `j_scalar` recomputes from the components within `rel_tol`.
    pub fn is_consistent(&self, rel_tol: f64) -> bool {
        let expect = scalarize(self.j_dist, self.j_time, self.mu);
        (self.j_scalar - expect).abs() <= rel_tol * expect.abs().max(f64::MIN_POSITIVE)
    }
}

pub const RUN_CSV_HEADER: &str = "trial,n,m,instance_seed,solver_seed,algorithm,mu,j_dist,j_time,j_scalar";

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub ra: RunRecord,
    pub saga: RunRecord,
    pub trace: Vec<TraceRecord>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trial `trial` of stream `stream` (0 = instances, 1 = solver).
pub fn derive_seed(base: u64, stream: u64, trial: usize) -> u64 {
    splitmix64(splitmix64(base ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03)) ^ trial as u64)
}

/// Generates the instance for `trial` and runs RA and SAGA on the same
/// initial population.
pub fn run_trial(gen: &GenSpec, cfg: &SagaConfig, base_seed: u64, trial: usize) -> Result<TrialOutcome, BenchError> {
    let spec = GenSpec {
        seed: derive_seed(base_seed, 0, trial),
        ..gen.clone()
    };
    let instance = generate(&spec)?;
    let cfg = SagaConfig {
        seed: derive_seed(base_seed, 1, trial),
        ..cfg.clone()
    };
    let record = |algorithm, obj: crate::evaluate::Objective, wall_time| RunRecord {
        trial,
        n: spec.n,
        m: spec.m,
        instance_seed: spec.seed,
        solver_seed: cfg.seed,
        algorithm,
        mu: cfg.mu,
        j_dist: obj.j_dist,
        j_time: obj.j_time,
        j_scalar: obj.j_scalar,
        wall_time,
    };

    let clock = Instant::now();
    let (_, ra_report) = random_assignment(&instance, &cfg)?;
    let ra = record(Algorithm::Ra, ra_report.objective(), clock.elapsed().as_secs_f64());

    let clock = Instant::now();
    let outcome = saga(&instance, &cfg)?;
    let saga = record(Algorithm::Saga, outcome.report.objective(), clock.elapsed().as_secs_f64());
    Ok(TrialOutcome {
        ra,
        saga,
        trace: outcome.trace,
    })
}

pub fn benchmark(gen: &GenSpec, cfg: &SagaConfig, trials: usize, base_seed: u64) -> Result<Vec<TrialOutcome>, BenchError> {
    (0..trials).map(|t| run_trial(gen, cfg, base_seed, t)).collect()
}

pub fn write_runs_csv<W: Write>(out: W, trials: &[TrialOutcome]) -> Result<(), BenchError> {
    let mut writer = csv::Writer::from_writer(out);
    for t in trials {
        writer.serialize(&t.ra)?;
        writer.serialize(&t.saga)?;
    }
    if trials.is_empty() {
        writer.write_record(RUN_CSV_HEADER.split(','))?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub const DEFAULT_MU_SWEEP: [f64; 6] = [0.15, 0.30, 0.45, 0.60, 0.75, 0.90];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoPoint {
    pub mu: f64,
    pub trials: usize,
    pub mean_j_dist: f64,
    pub mean_j_time: f64,
    pub mean_j_scalar: f64,
}

pub const PARETO_CSV_HEADER: &str = "mu,trials,mean_j_dist,mean_j_time,mean_j_scalar";

/// Solves the same `trials` instances at every mu and averages the SAGA results.
pub fn pareto_sweep(
    gen: &GenSpec,
    cfg: &SagaConfig,
    mus: &[f64],
    trials: usize,
    base_seed: u64,
) -> Result<(Vec<ParetoPoint>, Vec<TrialOutcome>), BenchError> {
    let mut points = Vec::with_capacity(mus.len());
    let mut runs = Vec::with_capacity(mus.len() * trials);
    for &mu in mus {
        let cfg = SagaConfig { mu, ..cfg.clone() };
        let outcomes = benchmark(gen, &cfg, trials, base_seed)?;
        let mean = |f: fn(&RunRecord) -> f64| mean(&outcomes.iter().map(|o| f(&o.saga)).collect::<Vec<_>>());
        points.push(ParetoPoint {
            mu,
            trials,
            mean_j_dist: mean(|r| r.j_dist),
            mean_j_time: mean(|r| r.j_time),
            mean_j_scalar: mean(|r| r.j_scalar),
        });
        runs.extend(outcomes);
    }
    Ok((points, runs))
}

pub fn write_pareto_csv<W: Write>(out: W, points: &[ParetoPoint]) -> Result<(), BenchError> {
    let mut writer = csv::Writer::from_writer(out);
    for p in points {
        writer.serialize(p)?;
    }
    if points.is_empty() {
        writer.write_record(PARETO_CSV_HEADER.split(','))?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Normal-approximation 95% half-width, `1.96 * s / sqrt(k)`; `None` below two samples.
pub fn ci95_half_width(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let mu = mean(xs);
    let var = xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    Some(1.96 * (var / xs.len() as f64).sqrt())
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let (rx, ry) = (ranks(xs), ranks(ys));
    let (mx, my) = (mean(&rx), mean(&ry));
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}
