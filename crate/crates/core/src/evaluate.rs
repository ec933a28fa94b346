//! Cost evaluation of a mission order plus drone assignment.
//!
//! The order fixes each drone's personal queue: a drone serves its missions in
//! the order they appear, and a joint mission starts once the last assigned
//! drone has reached the pickup. Missions on disjoint drone sets overlap in
//! time, and since every queue is a subsequence of one global order no cyclic
//! wait can arise.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Instance, Point2};

/// Binary drone-assignment matrix with one row per execution position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AssignMatrix {
    num_drones: usize,
    cells: Vec<bool>,
}

impl AssignMatrix {
    pub fn zeros(rows: usize, num_drones: usize) -> Self {
        Self {
            num_drones,
            cells: vec![false; rows * num_drones],
        }
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self, Violation> {
        let num_drones = rows.first().map_or(0, Vec::len);
        let mut cells = Vec::with_capacity(rows.len() * num_drones);
        for (k, row) in rows.iter().enumerate() {
            if row.len() != num_drones {
                return Err(Violation::RowWidth {
                    row: k,
                    expected: num_drones,
                    found: row.len(),
                });
            }
            cells.extend_from_slice(row);
        }
        Ok(Self { num_drones, cells })
    }

    /// Builds a matrix from per-row drone index lists (0-based).
    pub fn from_drone_lists(lists: &[Vec<usize>], num_drones: usize) -> Result<Self, Violation> {
        let mut matrix = Self::zeros(lists.len(), num_drones);
        for (k, drones) in lists.iter().enumerate() {
            for &d in drones {
                if d >= num_drones {
                    return Err(Violation::DroneOutOfRange { row: k, drone: d });
                }
                if matrix.get(k, d) {
                    return Err(Violation::DuplicateDrone { row: k, drone: d });
                }
                matrix.set(k, d, true);
            }
        }
        Ok(matrix)
    }

    #[inline]
    pub fn num_rows(&self) -> usize {
        self.cells.len().checked_div(self.num_drones).unwrap_or(0)
    }

    #[inline]
    pub fn num_drones(&self) -> usize {
        self.num_drones
    }

    #[inline]
    pub fn row(&self, k: usize) -> &[bool] {
        &self.cells[k * self.num_drones..(k + 1) * self.num_drones]
    }

    #[inline]
    pub fn row_mut(&mut self, k: usize) -> &mut [bool] {
        &mut self.cells[k * self.num_drones..(k + 1) * self.num_drones]
    }

    #[inline]
    pub fn get(&self, k: usize, d: usize) -> bool {
        self.cells[k * self.num_drones + d]
    }

    #[inline]
    pub fn set(&mut self, k: usize, d: usize, value: bool) {
        self.cells[k * self.num_drones + d] = value;
    }

    /// Assigned drones of row `k` in ascending order.
    pub fn drones(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(k)
            .iter()
            .enumerate()
            .filter_map(|(d, &on)| on.then_some(d))
    }

    pub fn row_count(&self, k: usize) -> usize {
        self.row(k).iter().filter(|&&on| on).count()
    }

    pub fn to_drone_lists(&self) -> Vec<Vec<usize>> {
        (0..self.num_rows()).map(|k| self.drones(k).collect()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<bool>> {
        (0..self.num_rows()).map(|k| self.row(k).to_vec()).collect()
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    /// Row `k` of the result is row `perm[k]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        debug_assert_eq!(perm.len(), self.num_rows());
        let mut cells = Vec::with_capacity(self.cells.len());
        for &src in perm {
            cells.extend_from_slice(self.row(src));
        }
        Self {
            num_drones: self.num_drones,
            cells,
        }
    }
}

impl fmt::Display for AssignMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.num_rows() {
            let line: Vec<&str> = self.row(k).iter().map(|&b| if b { "1" } else { "0" }).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// Mission order (0-based mission indices) and the matching assignment rows.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Solution {
    pub order: Vec<usize>,
    pub assign: AssignMatrix,
}

impl Solution {
    pub fn new(order: Vec<usize>, assign: AssignMatrix) -> Self {
        Self { order, assign }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Violation {
    #[error("order has {found} entries, expected {expected}")]
    OrderLength { expected: usize, found: usize },
    #[error("order position {position} names mission {mission}, which does not exist")]
    MissionOutOfRange { position: usize, mission: usize },
    #[error("mission {mission} appears more than once in the order (again at position {position})")]
    DuplicateMission { position: usize, mission: usize },
    #[error("assignment has {found} rows, expected {expected}")]
    RowCount { expected: usize, found: usize },
    #[error("row {row} has {found} columns, expected {expected}")]
    RowWidth {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row} names drone {drone}, which does not exist")]
    DroneOutOfRange { row: usize, drone: usize },
    #[error("row {row} names drone {drone} twice")]
    DuplicateDrone { row: usize, drone: usize },
    #[error("row {row} (mission {mission}) assigns {found} drones, mission requires {expected}")]
    RowCardinality {
        row: usize,
        mission: usize,
        expected: usize,
        found: usize,
    },
}

/// Returns the first violated solution invariant.
pub fn validate(instance: &Instance, solution: &Solution) -> Result<(), Violation> {
    let m = instance.num_missions();
    let n = instance.num_drones();
    let mut seen = vec![false; m];
    for (position, &mission) in solution.order.iter().enumerate() {
        if mission >= m {
            return Err(Violation::MissionOutOfRange { position, mission });
        }
        if seen[mission] {
            return Err(Violation::DuplicateMission { position, mission });
        }
        seen[mission] = true;
    }
    if solution.order.len() != m {
        return Err(Violation::OrderLength {
            expected: m,
            found: solution.order.len(),
        });
    }
    let assign = &solution.assign;
    if assign.num_rows() != m {
        return Err(Violation::RowCount {
            expected: m,
            found: assign.num_rows(),
        });
    }
    if assign.num_drones() != n {
        return Err(Violation::RowWidth {
            row: 0,
            expected: n,
            found: assign.num_drones(),
        });
    }
    for (row, &mission) in solution.order.iter().enumerate() {
        let expected = instance.required(mission);
        let found = assign.row_count(row);
        if found != expected {
            return Err(Violation::RowCardinality {
                row,
                mission,
                expected,
                found,
            });
        }
    }
    Ok(())
}

/// Timeline of one execution position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionTimeline {
    pub mission: usize,
    /// Assigned drones in ascending order; `arrival` and `waiting` align with it.
    pub drones: Vec<usize>,
    pub arrival: Vec<f64>,
    pub waiting: Vec<f64>,
    pub start: f64,
    pub finish: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleReport {
    pub positions: Vec<PositionTimeline>,
    pub drone_finish: Vec<f64>,
    pub drone_distance: Vec<f64>,
    pub j_dist: f64,
    pub j_time: f64,
    pub j_scalar: f64,
    pub mu: f64,
}

/// Summary objective values without the per-position timeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub j_dist: f64,
    pub j_time: f64,
    pub j_scalar: f64,
}

#[inline]
pub fn scalarize(j_dist: f64, j_time: f64, mu: f64) -> f64 {
    mu * j_dist + (1.0 - mu) * j_time
}

struct DroneState {
    clock: f64,
    location: Point2,
    distance: f64,
}

/// Walks the queue timeline once, reporting each position to `observe`.
/// Assumes a validated solution.
fn simulate<F>(instance: &Instance, order: &[usize], assign: &AssignMatrix, mut observe: F) -> (Vec<f64>, Vec<f64>)
where
    F: FnMut(usize, &[(usize, f64)], f64, f64),
{
    let v = instance.velocity();
    let mut drones: Vec<DroneState> = instance
        .depots()
        .iter()
        .map(|&depot| DroneState {
            clock: 0.0,
            location: depot,
            distance: 0.0,
        })
        .collect();
    let mut arrivals: Vec<(usize, f64)> = Vec::with_capacity(instance.num_drones());
    for (k, &i) in order.iter().enumerate() {
        let mission = &instance.missions()[i];
        arrivals.clear();
        let mut start = f64::NEG_INFINITY;
        for d in assign.drones(k) {
            let state = &drones[d];
            let arrival = state.clock + state.location.distance(&mission.pickup) / v;
            start = start.max(arrival);
            arrivals.push((d, arrival));
        }
        let leg = mission.transport_length();
        let finish = start + leg / v;
        for &(d, _) in &arrivals {
            let state = &mut drones[d];
            state.distance += state.location.distance(&mission.pickup) + leg;
            state.clock = finish;
            state.location = mission.delivery;
        }
        observe(k, &arrivals, start, finish);
    }
    let mut finish = Vec::with_capacity(drones.len());
    let mut distance = Vec::with_capacity(drones.len());
    for (state, depot) in drones.iter().zip(instance.depots()) {
        let back = state.location.distance(depot);
        finish.push(state.clock + back / v);
        distance.push(state.distance + back);
    }
    (finish, distance)
}

fn totals(finish: &[f64], distance: &[f64]) -> (f64, f64) {
    let j_dist = distance.iter().sum();
    let j_time = finish.iter().copied().fold(0.0, f64::max);
    (j_dist, j_time)
}

/// Full schedule for a solution; `mu` weighs distance against makespan.
pub fn evaluate(instance: &Instance, solution: &Solution, mu: f64) -> Result<ScheduleReport, Violation> {
    validate(instance, solution)?;
    let mut positions = Vec::with_capacity(solution.order.len());
    let (drone_finish, drone_distance) =
        simulate(instance, &solution.order, &solution.assign, |k, arrivals, start, finish| {
            positions.push(PositionTimeline {
                mission: solution.order[k],
                drones: arrivals.iter().map(|&(d, _)| d).collect(),
                arrival: arrivals.iter().map(|&(_, t)| t).collect(),
                waiting: arrivals.iter().map(|&(_, t)| start - t).collect(),
                start,
                finish,
            });
        });
    let (j_dist, j_time) = totals(&drone_finish, &drone_distance);
    Ok(ScheduleReport {
        positions,
        drone_finish,
        drone_distance,
        j_dist,
        j_time,
        j_scalar: scalarize(j_dist, j_time, mu),
        mu,
    })
}

/// Objective only, for solver inner loops. The caller guarantees validity.
pub fn objective_unchecked(instance: &Instance, order: &[usize], assign: &AssignMatrix, mu: f64) -> Objective {
    let (finish, distance) = simulate(instance, order, assign, |_, _, _, _| {});
    let (j_dist, j_time) = totals(&finish, &distance);
    Objective {
        j_dist,
        j_time,
        j_scalar: scalarize(j_dist, j_time, mu),
    }
}

pub fn objective(instance: &Instance, solution: &Solution, mu: f64) -> Result<Objective, Violation> {
    validate(instance, solution)?;
    Ok(objective_unchecked(instance, &solution.order, &solution.assign, mu))
}

impl ScheduleReport {
    pub fn objective(&self) -> Objective {
        Objective {
            j_dist: self.j_dist,
            j_time: self.j_time,
            j_scalar: self.j_scalar,
        }
    }
}
