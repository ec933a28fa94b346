//! Problem instances: depots, missions, and the distance table between them.
//!
//! Assignment ids follow one shared numbering across the crate: depots occupy
//! `0..n` and missions occupy `n..n + m`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite coordinate in {0}")]
    NonFinite(String),
    #[error("mission {mission} needs {required} drones but only {available} are available")]
    Infeasible {
        mission: usize,
        required: usize,
        available: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mission {
    pub pickup: Point2,
    pub delivery: Point2,
    pub weight: f64,
}

impl Mission {
    pub fn new(pickup: Point2, delivery: Point2, weight: f64) -> Self {
        Self {
            pickup,
            delivery,
            weight,
        }
    }

    /// Length of the loaded pickup-to-delivery leg.
    #[inline]
    pub fn transport_length(&self) -> f64 {
        self.pickup.distance(&self.delivery)
    }
}

/// Number of drones that must lift a payload together: `ceil(weight / capacity)`.
pub fn required_drones(weight: f64, capacity: f64) -> Result<usize, ModelError> {
    if !(weight > 0.0 && weight.is_finite()) {
        return Err(ModelError::InvalidArgument(format!(
            "weight must be positive and finite, got {weight}"
        )));
    }
    if !(capacity > 0.0 && capacity.is_finite()) {
        return Err(ModelError::InvalidArgument(format!(
            "capacity must be positive and finite, got {capacity}"
        )));
    }
    Ok((weight / capacity).ceil() as usize)
}

/// An immutable, validated problem statement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Instance {
    depots: Vec<Point2>,
    missions: Vec<Mission>,
    capacity: f64,
    velocity: f64,
    #[serde(skip)]
    required: Vec<usize>,
}

impl Instance {
    pub fn new(
        depots: Vec<Point2>,
        missions: Vec<Mission>,
        capacity: f64,
        velocity: f64,
    ) -> Result<Self, ModelError> {
        if depots.is_empty() {
            return Err(ModelError::InvalidArgument("at least one depot is required".into()));
        }
        if missions.is_empty() {
            return Err(ModelError::InvalidArgument("at least one mission is required".into()));
        }
        if !(velocity > 0.0 && velocity.is_finite()) {
            return Err(ModelError::InvalidArgument(format!(
                "velocity must be positive and finite, got {velocity}"
            )));
        }
        if !(capacity > 0.0 && capacity.is_finite()) {
            return Err(ModelError::InvalidArgument(format!(
                "capacity must be positive and finite, got {capacity}"
            )));
        }
        for (d, p) in depots.iter().enumerate() {
            if !p.is_finite() {
                return Err(ModelError::NonFinite(format!("depot {d}")));
            }
        }
        let n = depots.len();
        let mut required = Vec::with_capacity(missions.len());
        for (i, mission) in missions.iter().enumerate() {
            if !mission.pickup.is_finite() || !mission.delivery.is_finite() {
                return Err(ModelError::NonFinite(format!("mission {i}")));
            }
            let c = required_drones(mission.weight, capacity)?;
            if c > n {
                return Err(ModelError::Infeasible {
                    mission: i,
                    required: c,
                    available: n,
                });
            }
            required.push(c);
        }
        Ok(Self {
            depots,
            missions,
            capacity,
            velocity,
            required,
        })
    }

    #[inline]
    pub fn num_drones(&self) -> usize {
        self.depots.len()
    }

    #[inline]
    pub fn num_missions(&self) -> usize {
        self.missions.len()
    }

    pub fn depots(&self) -> &[Point2] {
        &self.depots
    }

    pub fn missions(&self) -> &[Mission] {
        &self.missions
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn velocity(&self) -> f64 {
        self.velocity
    }

    /// Drones required by mission `i` (0-based mission index).
    #[inline]
    pub fn required(&self, mission: usize) -> usize {
        self.required[mission]
    }

    pub fn required_counts(&self) -> &[usize] {
        &self.required
    }

    /// Same problem with every travel speed replaced.
    pub fn with_velocity(&self, velocity: f64) -> Result<Self, ModelError> {
        Self::new(
            self.depots.clone(),
            self.missions.clone(),
            self.capacity,
            velocity,
        )
    }

    /// Location of assignment node `g` where a drone arriving there has to be.
    fn node_entry(&self, g: usize) -> Point2 {
        let n = self.num_drones();
        if g < n {
            self.depots[g]
        } else {
            self.missions[g - n].pickup
        }
    }
}

/// Asymmetric travel distances between assignment nodes.
///
/// Leaving a depot costs the straight line to the target's entry point. Leaving
/// a mission first pays the transport leg, then flies from the delivery point.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceTable {
    size: usize,
    num_drones: usize,
    dist: Vec<f64>,
}

impl DistanceTable {
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.dist[from * self.size + to]
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn num_drones(&self) -> usize {
        self.num_drones
    }

    pub fn mission_node(&self, mission: usize) -> usize {
        self.num_drones + mission
    }
}

pub fn build_distance_table(instance: &Instance) -> DistanceTable {
    let n = instance.num_drones();
    let size = n + instance.num_missions();
    let mut dist = vec![0.0; size * size];
    for from in 0..size {
        for to in 0..size {
            let target = instance.node_entry(to);
            dist[from * size + to] = if from < n {
                instance.depots[from].distance(&target)
            } else {
                let mission = &instance.missions[from - n];
                mission.transport_length() + mission.delivery.distance(&target)
            };
        }
    }
    DistanceTable {
        size,
        num_drones: n,
        dist,
    }
}
