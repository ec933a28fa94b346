//! Under-capacitated vehicle routing: missions whose payload exceeds one
//! vehicle's capacity must be carried jointly, so the makespan includes the
//! time drones spend waiting for their partners at shared pickups.
//!
//! Solutions are a global mission order plus a binary drone-assignment matrix.
//! Every drone serves its missions in that global order, which makes cyclic
//! waiting impossible by construction.

pub mod bench;
pub mod evaluate;
pub mod exact;
pub mod gen;
pub mod io;
pub mod model;
pub mod saga;

pub use evaluate::{evaluate, validate, AssignMatrix, Objective, ScheduleReport, Solution, Violation};
pub use exact::{brute_force, check_constraints, solution_to_flow, ConstraintViolation, FlowSolution};
pub use gen::{generate, GenSpec, WeightModel};
pub use model::{build_distance_table, required_drones, DistanceTable, Instance, Mission, ModelError, Point2};
pub use saga::{random_assignment, saga, SagaConfig, SagaOutcome};
