//! Alternating GA + SA search over drone assignments and mission order.
//!
//! The population shares a single mission order. The GA phase evolves the
//! assignment matrices for that order; the SA phase permutes the order and
//! carries every genome's rows along, so row cardinalities stay valid and the
//! schedule stays deadlock-free throughout.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluate::{evaluate, objective_unchecked, AssignMatrix, Objective, ScheduleReport, Solution};
use crate::model::Instance;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SagaError {
    #[error("mission {mission} needs {required} drones but only {available} exist")]
    Infeasible {
        mission: usize,
        required: usize,
        available: usize,
    },
    #[error("parents differ in shape: {a_rows}x{a_cols} vs {b_rows}x{b_cols}")]
    DimensionMismatch {
        a_rows: usize,
        a_cols: usize,
        b_rows: usize,
        b_cols: usize,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Solver hyperparameters. Defaults are the reference settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SagaConfig {
    pub ga_iters: usize,
    pub sa_iters: usize,
    pub alt_iters: usize,
    pub pop_size: usize,
    pub offspring_per_pair: usize,
    pub selection_ratio: f64,
    pub mutation_rate: f64,
    pub reinsertion_ratio: f64,
    pub cooling_rate: f64,
    pub start_temperature: f64,
    pub mu: f64,
    pub seed: u64,
}

impl Default for SagaConfig {
    fn default() -> Self {
        Self {
            ga_iters: 200,
            sa_iters: 500,
            alt_iters: 3,
            pop_size: 50,
            offspring_per_pair: 3,
            selection_ratio: 0.8,
            mutation_rate: 0.05,
            reinsertion_ratio: 0.7,
            cooling_rate: 0.97,
            start_temperature: 15000.0,
            mu: 0.2,
            seed: 0,
        }
    }
}

impl SagaConfig {
    pub fn validate(&self) -> Result<(), SagaError> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(SagaError::InvalidConfig(format!("{name} must lie in [0, 1], got {v}")))
            }
        };
        if self.pop_size == 0 {
            return Err(SagaError::InvalidConfig("pop_size must be at least 1".into()));
        }
        unit("selection_ratio", self.selection_ratio)?;
        unit("mutation_rate", self.mutation_rate)?;
        unit("reinsertion_ratio", self.reinsertion_ratio)?;
        unit("mu", self.mu)?;
        if !(self.cooling_rate > 0.0 && self.cooling_rate < 1.0) {
            return Err(SagaError::InvalidConfig(format!(
                "cooling_rate must lie in (0, 1), got {}",
                self.cooling_rate
            )));
        }
        if !(self.start_temperature > 0.0 && self.start_temperature.is_finite()) {
            return Err(SagaError::InvalidConfig(format!(
                "start_temperature must be positive, got {}",
                self.start_temperature
            )));
        }
        Ok(())
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Assignment genomes aligned to one shared mission order, with cached costs.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub genomes: Vec<AssignMatrix>,
    pub costs: Vec<f64>,
}

impl Population {
    pub fn from_genomes(instance: &Instance, order: &[usize], genomes: Vec<AssignMatrix>, mu: f64) -> Self {
        let costs = genomes
            .iter()
            .map(|g| objective_unchecked(instance, order, g, mu).j_scalar)
            .collect();
        Self { genomes, costs }
    }

    pub fn len(&self) -> usize {
        self.genomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genomes.is_empty()
    }

    /// Index of the lowest-cost genome; the first one on ties.
    pub fn best_index(&self) -> usize {
        let mut best = 0;
        for (i, &c) in self.costs.iter().enumerate() {
            if c < self.costs[best] {
                best = i;
            }
        }
        best
    }

    pub fn best_cost(&self) -> f64 {
        self.costs[self.best_index()]
    }
}

fn sample_row<R: Rng + ?Sized>(row: &mut [bool], count: usize, rng: &mut R) {
    row.iter_mut().for_each(|b| *b = false);
    for d in index::sample(rng, row.len(), count) {
        row[d] = true;
    }
}

/// Random genome: each row gets `c` distinct drones drawn uniformly.
pub fn random_genome<R: Rng + ?Sized>(instance: &Instance, order: &[usize], rng: &mut R) -> Result<AssignMatrix, SagaError> {
    let n = instance.num_drones();
    let mut genome = AssignMatrix::zeros(order.len(), n);
    for (k, &mission) in order.iter().enumerate() {
        let required = instance.required(mission);
        if required > n {
            return Err(SagaError::Infeasible {
                mission,
                required,
                available: n,
            });
        }
        sample_row(genome.row_mut(k), required, rng);
    }
    Ok(genome)
}

pub fn init_population<R: Rng + ?Sized>(
    instance: &Instance,
    order: &[usize],
    cfg: &SagaConfig,
    rng: &mut R,
) -> Result<Population, SagaError> {
    let genomes = (0..cfg.pop_size)
        .map(|_| random_genome(instance, order, rng))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Population::from_genomes(instance, order, genomes, cfg.mu))
}

/// Uniform crossover over whole rows: each row comes from either parent with
/// probability 1/2, so row cardinalities carry over unchanged.
pub fn crossover<R: Rng + ?Sized>(a: &AssignMatrix, b: &AssignMatrix, rng: &mut R) -> Result<AssignMatrix, SagaError> {
    if a.num_rows() != b.num_rows() || a.num_drones() != b.num_drones() {
        return Err(SagaError::DimensionMismatch {
            a_rows: a.num_rows(),
            a_cols: a.num_drones(),
            b_rows: b.num_rows(),
            b_cols: b.num_drones(),
        });
    }
    let mut child = a.clone();
    for k in 0..a.num_rows() {
        if rng.random_bool(0.5) {
            child.row_mut(k).copy_from_slice(b.row(k));
        }
    }
    Ok(child)
}

/// Each row, with probability `rate`, is redrawn as a fresh drone set of the same size.
pub fn mutate_assignment<R: Rng + ?Sized>(genome: &AssignMatrix, rate: f64, rng: &mut R) -> AssignMatrix {
    let mut out = genome.clone();
    for k in 0..out.num_rows() {
        if rng.random_bool(rate) {
            let count = out.row_count(k);
            sample_row(out.row_mut(k), count, rng);
        }
    }
    out
}

fn roulette_weights(costs: &[f64]) -> Vec<f64> {
    let worst = costs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let eps = 1e-9 * worst.abs();
    costs.iter().map(|&c| worst - c + eps).collect()
}

/// One GA generation: roulette selection, paired crossover + mutation, then
/// elitist reinsertion of the best offspring over the worst members.
pub fn ga_step<R: Rng + ?Sized>(
    instance: &Instance,
    order: &[usize],
    pop: Population,
    cfg: &SagaConfig,
    rng: &mut R,
) -> Population {
    let size = pop.len();
    let num_parents = (cfg.selection_ratio * size as f64).floor() as usize;
    let pairs = num_parents / 2;
    if pairs == 0 || cfg.offspring_per_pair == 0 {
        return pop;
    }

    let weights = roulette_weights(&pop.costs);
    let mut parents: Vec<usize> = match WeightedIndex::new(&weights) {
        Ok(wheel) => (0..num_parents).map(|_| wheel.sample(rng)).collect(),
        // All fitness zero (every cost is 0): select uniformly.
        Err(_) => (0..num_parents).map(|_| rng.random_range(0..size)).collect(),
    };
    parents.shuffle(rng);

    let mut offspring = Vec::with_capacity(pairs * cfg.offspring_per_pair);
    for pair in parents.chunks_exact(2) {
        let (a, b) = (&pop.genomes[pair[0]], &pop.genomes[pair[1]]);
        for _ in 0..cfg.offspring_per_pair {
            let child = crossover(a, b, rng).expect("population genomes share one shape");
            offspring.push(mutate_assignment(&child, cfg.mutation_rate, rng));
        }
    }
    let offspring_costs: Vec<f64> = offspring
        .iter()
        .map(|g| objective_unchecked(instance, order, g, cfg.mu).j_scalar)
        .collect();

    let replace = ((cfg.reinsertion_ratio * offspring.len() as f64).floor() as usize).min(size - 1);
    let mut by_quality: Vec<usize> = (0..offspring.len()).collect();
    by_quality.sort_by(|&x, &y| offspring_costs[x].total_cmp(&offspring_costs[y]));
    let mut worst_first: Vec<usize> = (0..size).collect();
    worst_first.sort_by(|&x, &y| pop.costs[y].total_cmp(&pop.costs[x]));

    let Population { mut genomes, mut costs } = pop;
    // The incumbent best sits at the end of worst_first and `replace < size`.
    for (&slot, &child) in worst_first.iter().zip(&by_quality).take(replace) {
        genomes[slot] = offspring[child].clone();
        costs[slot] = offspring_costs[child];
    }
    Population { genomes, costs }
}

/// Index rearrangement applied jointly to the order and to every genome's rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaMove {
    Swap { a: usize, b: usize },
    /// Reverse positions `start..=end`.
    Reverse { start: usize, end: usize },
    /// Remove position `from`, reinsert it at `to` in the shortened sequence.
    Insert { from: usize, to: usize },
    /// Remove `start..start + len`, reinsert the slice at `to` in the remainder.
    InsertSlice { start: usize, len: usize, to: usize },
}

impl SaMove {
    /// Draws one of the four moves uniformly. Requires `m >= 2`.
    pub fn sample<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        assert!(m >= 2, "moves need at least two positions");
        let other = |rng: &mut R, x: usize, range: usize| {
            let y = rng.random_range(0..range - 1);
            if y >= x {
                y + 1
            } else {
                y
            }
        };
        match rng.random_range(0..4) {
            0 => {
                let a = rng.random_range(0..m);
                let b = other(rng, a, m);
                SaMove::Swap { a, b }
            }
            1 => {
                let gap = m / 2;
                let start = rng.random_range(0..m - gap);
                SaMove::Reverse { start, end: start + gap }
            }
            2 => {
                let from = rng.random_range(0..m);
                let to = other(rng, from, m);
                SaMove::Insert { from, to }
            }
            _ => {
                let len = rng.random_range(1..m);
                let start = rng.random_range(0..=m - len);
                let to = other(rng, start, m - len + 1);
                SaMove::InsertSlice { start, len, to }
            }
        }
    }

    /// Source index for each new position: `new[k] = old[perm[k]]`.
    pub fn permutation(&self, m: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..m).collect();
        match *self {
            SaMove::Swap { a, b } => idx.swap(a, b),
            SaMove::Reverse { start, end } => idx[start..=end].reverse(),
            SaMove::Insert { from, to } => {
                let x = idx.remove(from);
                idx.insert(to, x);
            }
            SaMove::InsertSlice { start, len, to } => {
                let slice: Vec<usize> = idx.drain(start..start + len).collect();
                idx.splice(to..to, slice);
            }
        }
        idx
    }

    pub fn apply(&self, order: &[usize], genomes: &[AssignMatrix]) -> (Vec<usize>, Vec<AssignMatrix>) {
        let perm = self.permutation(order.len());
        let new_order = perm.iter().map(|&k| order[k]).collect();
        let new_genomes = genomes.iter().map(|g| g.permute_rows(&perm)).collect();
        (new_order, new_genomes)
    }
}

/// Draws a random move and applies it to the order and all genomes.
/// With fewer than two missions the input comes back unchanged.
pub fn sa_mutations<R: Rng + ?Sized>(
    order: &[usize],
    genomes: &[AssignMatrix],
    rng: &mut R,
) -> (Vec<usize>, Vec<AssignMatrix>) {
    if order.len() < 2 {
        return (order.to_vec(), genomes.to_vec());
    }
    SaMove::sample(order.len(), rng).apply(order, genomes)
}

/// Mean of the (up to) three lowest costs.
pub fn mean_of_best_three(costs: &[f64]) -> f64 {
    let mut sorted = costs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.len().min(3);
    sorted[..k].iter().sum::<f64>() / k as f64
}

pub fn sa_cost(instance: &Instance, order: &[usize], pop: &Population, mu: f64) -> f64 {
    let costs: Vec<f64> = pop
        .genomes
        .iter()
        .map(|g| objective_unchecked(instance, order, g, mu).j_scalar)
        .collect();
    mean_of_best_three(&costs)
}

/// Metropolis acceptance probability for a cost change `delta`.
pub fn acceptance_probability(delta: f64, temperature: f64) -> f64 {
    if delta <= 0.0 {
        1.0
    } else {
        (-delta / temperature).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaState {
    pub order: Vec<usize>,
    pub population: Population,
    pub temperature: f64,
    /// `sa_cost` of the current state.
    pub cost: f64,
}

impl SaState {
    pub fn new(instance: &Instance, order: Vec<usize>, population: Population, temperature: f64, mu: f64) -> Self {
        let cost = mean_of_best_three(&population.costs);
        debug_assert_eq!(cost, sa_cost(instance, &order, &population, mu));
        Self {
            order,
            population,
            temperature,
            cost,
        }
    }
}

pub fn sa_step<R: Rng + ?Sized>(instance: &Instance, state: SaState, cfg: &SagaConfig, rng: &mut R) -> SaState {
    let SaState {
        order,
        population,
        temperature,
        cost,
    } = state;
    let next_temperature = cfg.cooling_rate * temperature;
    if order.len() < 2 {
        return SaState {
            order,
            population,
            temperature: next_temperature,
            cost,
        };
    }
    let (proposed_order, proposed_genomes) = sa_mutations(&order, &population.genomes, rng);
    let proposed = Population::from_genomes(instance, &proposed_order, proposed_genomes, cfg.mu);
    let proposed_cost = mean_of_best_three(&proposed.costs);
    let delta = proposed_cost - cost;
    let accept = delta <= 0.0 || rng.random::<f64>() < acceptance_probability(delta, temperature);
    if accept {
        SaState {
            order: proposed_order,
            population: proposed,
            temperature: next_temperature,
            cost: proposed_cost,
        }
    } else {
        SaState {
            order,
            population,
            temperature: next_temperature,
            cost,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Init,
    Ga,
    Sa,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Init => "init",
            Phase::Ga => "ga",
            Phase::Sa => "sa",
        }
    }
}

/// Best-so-far snapshot after one solver step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub phase: Phase,
    pub round: usize,
    pub iteration: usize,
    pub j_scalar: f64,
    pub j_dist: f64,
    pub j_time: f64,
}

#[derive(Debug, Clone)]
pub struct SagaOutcome {
    pub solution: Solution,
    pub report: ScheduleReport,
    pub trace: Vec<TraceRecord>,
}

/// Random initial order and population, drawn from `rng`.
pub fn initialize<R: Rng + ?Sized>(
    instance: &Instance,
    cfg: &SagaConfig,
    rng: &mut R,
) -> Result<(Vec<usize>, Population), SagaError> {
    cfg.validate()?;
    let n = instance.num_drones();
    for (mission, &required) in instance.required_counts().iter().enumerate() {
        if required > n {
            return Err(SagaError::Infeasible {
                mission,
                required,
                available: n,
            });
        }
    }
    let mut order: Vec<usize> = (0..instance.num_missions()).collect();
    order.shuffle(rng);
    let population = init_population(instance, &order, cfg, rng)?;
    Ok((order, population))
}

struct Incumbent {
    order: Vec<usize>,
    genome: AssignMatrix,
    objective: Objective,
}

impl Incumbent {
    fn of(instance: &Instance, order: &[usize], pop: &Population, mu: f64) -> Self {
        let genome = pop.genomes[pop.best_index()].clone();
        let objective = objective_unchecked(instance, order, &genome, mu);
        Self {
            order: order.to_vec(),
            genome,
            objective,
        }
    }

    fn offer(&mut self, instance: &Instance, order: &[usize], pop: &Population, mu: f64) {
        let best = pop.best_index();
        if pop.costs[best] < self.objective.j_scalar {
            self.genome = pop.genomes[best].clone();
            self.order = order.to_vec();
            self.objective = objective_unchecked(instance, order, &self.genome, mu);
        }
    }

    fn record(&self, phase: Phase, round: usize, iteration: usize) -> TraceRecord {
        TraceRecord {
            phase,
            round,
            iteration,
            j_scalar: self.objective.j_scalar,
            j_dist: self.objective.j_dist,
            j_time: self.objective.j_time,
        }
    }

    fn into_solution(self) -> Solution {
        Solution::new(self.order, self.genome)
    }
}

/// Best member of an unoptimized initial population. Uses the same random
/// stream as [`saga`], so both start from identical populations for a seed.
pub fn random_assignment(instance: &Instance, cfg: &SagaConfig) -> Result<(Solution, ScheduleReport), SagaError> {
    let mut rng = cfg.rng();
    let (order, population) = initialize(instance, cfg, &mut rng)?;
    let best = Incumbent::of(instance, &order, &population, cfg.mu).into_solution();
    let report = evaluate(instance, &best, cfg.mu).expect("initial genomes are valid");
    Ok((best, report))
}

/// Runs the alternating GA/SA search and returns the best solution seen.
pub fn saga(instance: &Instance, cfg: &SagaConfig) -> Result<SagaOutcome, SagaError> {
    let mut rng = cfg.rng();
    let (mut order, mut population) = initialize(instance, cfg, &mut rng)?;
    let mut incumbent = Incumbent::of(instance, &order, &population, cfg.mu);
    let mut trace = Vec::with_capacity(1 + cfg.alt_iters * (cfg.ga_iters + cfg.sa_iters));
    trace.push(incumbent.record(Phase::Init, 0, 0));

    for round in 0..cfg.alt_iters {
        for it in 0..cfg.ga_iters {
            population = ga_step(instance, &order, population, cfg, &mut rng);
            incumbent.offer(instance, &order, &population, cfg.mu);
            trace.push(incumbent.record(Phase::Ga, round, it));
        }
        let mut state = SaState::new(instance, order, population, cfg.start_temperature, cfg.mu);
        for it in 0..cfg.sa_iters {
            state = sa_step(instance, state, cfg, &mut rng);
            incumbent.offer(instance, &state.order, &state.population, cfg.mu);
            trace.push(incumbent.record(Phase::Sa, round, it));
        }
        order = state.order;
        population = state.population;
    }

    let solution = incumbent.into_solution();
    let report = evaluate(instance, &solution, cfg.mu).expect("solver keeps solutions valid");
    Ok(SagaOutcome {
        solution,
        report,
        trace,
    })
}
