//! Python bindings: instances, solutions, the evaluator, the SAGA solver,
//! the random-assignment baseline, the exhaustive oracle and the generator.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use uvrp_core::exact::{self, ExactError};
use uvrp_core::gen::{self, GenError, GenSpec, WeightModel};
use uvrp_core::io;
use uvrp_core::model::{self, ModelError};
use uvrp_core::saga::{self, SagaError};
use uvrp_core::{AssignMatrix, Mission, Point2, ScheduleReport};

create_exception!(pyuvrp, InfeasibleError, PyValueError, "A mission needs more drones than the fleet has.");

fn model_err(e: ModelError) -> PyErr {
    match e {
        ModelError::Infeasible { .. } => InfeasibleError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn saga_err(e: SagaError) -> PyErr {
    match e {
        SagaError::Infeasible { .. } => InfeasibleError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn gen_err(e: GenError) -> PyErr {
    match e {
        GenError::Infeasible { .. } => InfeasibleError::new_err(e.to_string()),
        GenError::Model(inner) => model_err(inner),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn exact_err(e: ExactError) -> PyErr {
    match e {
        ExactError::TooLarge { .. } => PyRuntimeError::new_err(e.to_string()),
        ExactError::Invalid(_) => PyValueError::new_err(e.to_string()),
    }
}

fn file_err(e: io::FileError) -> PyErr {
    match e {
        io::FileError::Model(inner) => model_err(inner),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn point((x, y): (f64, f64)) -> Point2 {
    Point2::new(x, y)
}

type MissionTuple = ((f64, f64), (f64, f64), f64);

/// Depots, missions, payload capacity and drone velocity.
#[pyclass(name = "Instance", module = "pyuvrp", skip_from_py_object, frozen)]
#[derive(Clone)]
pub struct PyInstance {
    inner: model::Instance,
}

#[pymethods]
impl PyInstance {
    #[new]
    #[pyo3(signature = (depots, missions, capacity = 1.0, velocity = 0.5))]
    fn new(depots: Vec<(f64, f64)>, missions: Vec<MissionTuple>, capacity: f64, velocity: f64) -> PyResult<Self> {
        let depots = depots.into_iter().map(point).collect();
        let missions = missions
            .into_iter()
            .map(|(p, d, w)| Mission::new(point(p), point(d), w))
            .collect();
        let inner = model::Instance::new(depots, missions, capacity, velocity).map_err(model_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn num_drones(&self) -> usize {
        self.inner.num_drones()
    }

    #[getter]
    fn num_missions(&self) -> usize {
        self.inner.num_missions()
    }

    #[getter]
    fn capacity(&self) -> f64 {
        self.inner.capacity()
    }

    #[getter]
    fn velocity(&self) -> f64 {
        self.inner.velocity()
    }

    #[getter]
    fn depots(&self) -> Vec<(f64, f64)> {
        self.inner.depots().iter().map(|p| (p.x, p.y)).collect()
    }

    #[getter]
    fn missions(&self) -> Vec<MissionTuple> {
        self.inner
            .missions()
            .iter()
            .map(|m| ((m.pickup.x, m.pickup.y), (m.delivery.x, m.delivery.y), m.weight))
            .collect()
    }

    /// Drones needed per mission.
    #[getter]
    fn required_counts(&self) -> Vec<usize> {
        self.inner.required_counts().to_vec()
    }

    /// Square distance table over depots then missions.
    fn distance_table(&self) -> Vec<Vec<f64>> {
        let table = model::build_distance_table(&self.inner);
        (0..table.size())
            .map(|a| (0..table.size()).map(|b| table.get(a, b)).collect())
            .collect()
    }

    fn to_toml(&self) -> String {
        io::instance_to_string(&self.inner)
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        let inner = io::instance_from_str(text).map_err(file_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn read(path: std::path::PathBuf) -> PyResult<Self> {
        let inner = io::read_instance(path).map_err(file_err)?;
        Ok(Self { inner })
    }

    fn write(&self, path: std::path::PathBuf) -> PyResult<()> {
        io::write_instance(path, &self.inner).map_err(file_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(num_drones={}, num_missions={}, capacity={}, velocity={})",
            self.inner.num_drones(),
            self.inner.num_missions(),
            self.inner.capacity(),
            self.inner.velocity()
        )
    }
}

/// Mission order plus, for each position, the set of drones serving it.
/// Indices are 0-based.
#[pyclass(name = "Solution", module = "pyuvrp", skip_from_py_object, frozen)]
#[derive(Clone)]
pub struct PySolution {
    inner: uvrp_core::Solution,
}

#[pymethods]
impl PySolution {
    /// `assign[k]` lists the drones serving the mission at position `k`.
    #[new]
    fn new(order: Vec<usize>, assign: Vec<Vec<usize>>, num_drones: usize) -> PyResult<Self> {
        let assign = AssignMatrix::from_drone_lists(&assign, num_drones).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self {
            inner: uvrp_core::Solution::new(order, assign),
        })
    }

    #[getter]
    fn order(&self) -> Vec<usize> {
        self.inner.order.clone()
    }

    #[getter]
    fn assign(&self) -> Vec<Vec<usize>> {
        self.inner.assign.to_drone_lists()
    }

    /// The assignment as 0/1 rows.
    #[getter]
    fn matrix(&self) -> Vec<Vec<bool>> {
        self.inner.assign.to_rows()
    }

    #[getter]
    fn num_drones(&self) -> usize {
        self.inner.assign.num_drones()
    }

    fn to_toml(&self) -> String {
        io::solution_to_string(&self.inner)
    }

    #[staticmethod]
    fn from_toml(text: &str, num_drones: usize) -> PyResult<Self> {
        let inner = io::solution_from_str(text, num_drones).map_err(file_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn read(path: std::path::PathBuf, num_drones: usize) -> PyResult<Self> {
        let inner = io::read_solution(path, num_drones).map_err(file_err)?;
        Ok(Self { inner })
    }

    fn write(&self, path: std::path::PathBuf) -> PyResult<()> {
        io::write_solution(path, &self.inner).map_err(file_err)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Solution(order={:?}, assign={:?})", self.inner.order, self.inner.assign.to_drone_lists())
    }
}

/// Timeline of one execution position.
#[pyclass(name = "Position", module = "pyuvrp", skip_from_py_object, frozen, get_all)]
#[derive(Clone)]
pub struct PyPosition {
    mission: usize,
    drones: Vec<usize>,
    arrival: Vec<f64>,
    waiting: Vec<f64>,
    start: f64,
    finish: f64,
}

/// Evaluated schedule: objectives, per-drone totals and per-position timeline.
#[pyclass(name = "Report", module = "pyuvrp", skip_from_py_object, frozen, get_all)]
#[derive(Clone)]
pub struct PyReport {
    j_dist: f64,
    j_time: f64,
    j_scalar: f64,
    mu: f64,
    drone_finish: Vec<f64>,
    drone_distance: Vec<f64>,
    positions: Vec<PyPosition>,
}

impl From<ScheduleReport> for PyReport {
    fn from(r: ScheduleReport) -> Self {
        let positions = r
            .positions
            .into_iter()
            .map(|p| PyPosition {
                mission: p.mission,
                drones: p.drones,
                arrival: p.arrival,
                waiting: p.waiting,
                start: p.start,
                finish: p.finish,
            })
            .collect();
        Self {
            j_dist: r.j_dist,
            j_time: r.j_time,
            j_scalar: r.j_scalar,
            mu: r.mu,
            drone_finish: r.drone_finish,
            drone_distance: r.drone_distance,
            positions,
        }
    }
}

#[pymethods]
impl PyReport {
    fn __repr__(&self) -> String {
        format!(
            "Report(j_dist={:.6}, j_time={:.6}, j_scalar={:.6}, mu={})",
            self.j_dist, self.j_time, self.j_scalar, self.mu
        )
    }
}

/// Solver hyperparameters. Every field can be passed as a keyword.
#[pyclass(name = "SagaConfig", module = "pyuvrp", skip_from_py_object, get_all, set_all)]
#[derive(Clone)]
pub struct PySagaConfig {
    ga_iters: usize,
    sa_iters: usize,
    alt_iters: usize,
    pop_size: usize,
    offspring_per_pair: usize,
    selection_ratio: f64,
    mutation_rate: f64,
    reinsertion_ratio: f64,
    cooling_rate: f64,
    start_temperature: f64,
    mu: f64,
    seed: u64,
}

impl From<&PySagaConfig> for saga::SagaConfig {
    fn from(c: &PySagaConfig) -> Self {
        Self {
            ga_iters: c.ga_iters,
            sa_iters: c.sa_iters,
            alt_iters: c.alt_iters,
            pop_size: c.pop_size,
            offspring_per_pair: c.offspring_per_pair,
            selection_ratio: c.selection_ratio,
            mutation_rate: c.mutation_rate,
            reinsertion_ratio: c.reinsertion_ratio,
            cooling_rate: c.cooling_rate,
            start_temperature: c.start_temperature,
            mu: c.mu,
            seed: c.seed,
        }
    }
}

#[pymethods]
impl PySagaConfig {
    #[new]
    #[pyo3(signature = (
        *, ga_iters = None, sa_iters = None, alt_iters = None, pop_size = None, offspring_per_pair = None,
        selection_ratio = None, mutation_rate = None, reinsertion_ratio = None, cooling_rate = None,
        start_temperature = None, mu = None, seed = None
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        ga_iters: Option<usize>,
        sa_iters: Option<usize>,
        alt_iters: Option<usize>,
        pop_size: Option<usize>,
        offspring_per_pair: Option<usize>,
        selection_ratio: Option<f64>,
        mutation_rate: Option<f64>,
        reinsertion_ratio: Option<f64>,
        cooling_rate: Option<f64>,
        start_temperature: Option<f64>,
        mu: Option<f64>,
        seed: Option<u64>,
    ) -> PyResult<Self> {
        let d = saga::SagaConfig::default();
        let cfg = Self {
            ga_iters: ga_iters.unwrap_or(d.ga_iters),
            sa_iters: sa_iters.unwrap_or(d.sa_iters),
            alt_iters: alt_iters.unwrap_or(d.alt_iters),
            pop_size: pop_size.unwrap_or(d.pop_size),
            offspring_per_pair: offspring_per_pair.unwrap_or(d.offspring_per_pair),
            selection_ratio: selection_ratio.unwrap_or(d.selection_ratio),
            mutation_rate: mutation_rate.unwrap_or(d.mutation_rate),
            reinsertion_ratio: reinsertion_ratio.unwrap_or(d.reinsertion_ratio),
            cooling_rate: cooling_rate.unwrap_or(d.cooling_rate),
            start_temperature: start_temperature.unwrap_or(d.start_temperature),
            mu: mu.unwrap_or(d.mu),
            seed: seed.unwrap_or(d.seed),
        };
        saga::SagaConfig::from(&cfg).validate().map_err(saga_err)?;
        Ok(cfg)
    }

    fn __repr__(&self) -> String {
        format!("{:?}", saga::SagaConfig::from(self))
    }
}

fn checked_config(config: Option<&PySagaConfig>) -> PyResult<saga::SagaConfig> {
    let cfg = config.map(saga::SagaConfig::from).unwrap_or_default();
    cfg.validate().map_err(saga_err)?;
    Ok(cfg)
}

fn solution(inner: uvrp_core::Solution) -> PySolution {
    PySolution { inner }
}

/// Drones needed to lift `weight` with per-drone `capacity`.
#[pyfunction]
fn required_drones(weight: f64, capacity: f64) -> PyResult<usize> {
    model::required_drones(weight, capacity).map_err(model_err)
}

/// First structural problem with `solution`, or None when it is valid.
#[pyfunction]
fn validate(instance: &PyInstance, solution: &PySolution) -> Option<String> {
    uvrp_core::validate(&instance.inner, &solution.inner).err().map(|v| v.to_string())
}

#[pyfunction]
#[pyo3(signature = (instance, solution, mu = 0.2))]
fn evaluate(instance: &PyInstance, solution: &PySolution, mu: f64) -> PyResult<PyReport> {
    uvrp_core::evaluate(&instance.inner, &solution.inner, mu)
        .map(PyReport::from)
        .map_err(|v| PyValueError::new_err(v.to_string()))
}

/// Routing-constraint violations of the flow form of `solution`; empty when feasible.
#[pyfunction]
fn check_constraints(instance: &PyInstance, solution: &PySolution) -> PyResult<Vec<String>> {
    let flow = exact::solution_to_flow(&instance.inner, &solution.inner).map_err(|v| PyValueError::new_err(v.to_string()))?;
    Ok(exact::check_constraints(&instance.inner, &flow)
        .iter()
        .map(ToString::to_string)
        .collect())
}

/// Runs the solver. Returns (solution, report, trace) where each trace entry is
/// (phase, round, iteration, best j_scalar, j_dist, j_time).
#[pyfunction]
#[pyo3(signature = (instance, config = None))]
#[allow(clippy::type_complexity)]
fn solve(
    py: Python<'_>,
    instance: &PyInstance,
    config: Option<&PySagaConfig>,
) -> PyResult<(PySolution, PyReport, Vec<(&'static str, usize, usize, f64, f64, f64)>)> {
    let cfg = checked_config(config)?;
    let out = py.detach(|| saga::saga(&instance.inner, &cfg)).map_err(saga_err)?;
    let trace = out
        .trace
        .iter()
        .map(|t| (t.phase.as_str(), t.round, t.iteration, t.j_scalar, t.j_dist, t.j_time))
        .collect();
    Ok((solution(out.solution), out.report.into(), trace))
}

/// Best member of a random initial population, without optimization.
#[pyfunction]
#[pyo3(signature = (instance, config = None))]
fn random_assignment(instance: &PyInstance, config: Option<&PySagaConfig>) -> PyResult<(PySolution, PyReport)> {
    let cfg = checked_config(config)?;
    let (sol, report) = saga::random_assignment(&instance.inner, &cfg).map_err(saga_err)?;
    Ok((solution(sol), report.into()))
}

/// Exhaustive optimum; raises RuntimeError when the search space is too large.
#[pyfunction]
#[pyo3(signature = (instance, mu = 0.2))]
fn brute_force(py: Python<'_>, instance: &PyInstance, mu: f64) -> PyResult<(PySolution, PyReport)> {
    let (sol, report) = py.detach(|| exact::brute_force(&instance.inner, mu)).map_err(exact_err)?;
    Ok((solution(sol), report.into()))
}

/// Seeded random instance. `drone_mix[c - 1]` is the relative weight of
/// missions that need `c` drones.
#[pyfunction]
#[pyo3(signature = (
    n, m, seed = 0, *, workspace = 4.0, delivery_mean = 2.0, delivery_std = 2.0, capacity = 1.0,
    velocity = 0.5, drone_mix = None
))]
#[allow(clippy::too_many_arguments)]
fn generate(
    n: usize,
    m: usize,
    seed: u64,
    workspace: f64,
    delivery_mean: f64,
    delivery_std: f64,
    capacity: f64,
    velocity: f64,
    drone_mix: Option<Vec<f64>>,
) -> PyResult<PyInstance> {
    let spec = GenSpec {
        workspace,
        delivery_mean,
        delivery_std,
        capacity,
        velocity,
        weight_model: drone_mix.map_or_else(WeightModel::default, |probabilities| WeightModel { probabilities }),
        ..GenSpec::new(n, m, seed)
    };
    let inner = gen::generate(&spec).map_err(gen_err)?;
    Ok(PyInstance { inner })
}

#[pymodule]
fn pyuvrp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("InfeasibleError", m.py().get_type::<InfeasibleError>())?;
    m.add_class::<PyInstance>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyPosition>()?;
    m.add_class::<PyReport>()?;
    m.add_class::<PySagaConfig>()?;
    m.add_function(wrap_pyfunction!(required_drones, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(check_constraints, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(random_assignment, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    Ok(())
}
