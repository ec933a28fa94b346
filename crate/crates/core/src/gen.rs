//! Seeded random instances on a square workspace.
//!
//! Randomness comes from ChaCha8 seeded through `seed_from_u64`, so a seed
//! names the same instance on every platform.

use std::f64::consts::TAU;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Instance, Mission, ModelError, Point2};

const MAX_PLACEMENT_ATTEMPTS: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("weight model allows {c_max} drones per mission but only {n} drones exist")]
    Infeasible { c_max: usize, n: usize },
    #[error("could not place a delivery inside the workspace after {0} attempts")]
    Placement(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Distribution over the number of drones a mission needs.
/// `probabilities[k]` weighs `k + 1` drones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightModel {
    pub probabilities: Vec<f64>,
}

impl WeightModel {
    pub fn uniform(c_max: usize) -> Self {
        Self {
            probabilities: vec![1.0; c_max],
        }
    }

    pub fn c_max(&self) -> usize {
        self.probabilities.len()
    }
}

impl Default for WeightModel {
    fn default() -> Self {
        Self::uniform(2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenSpec {
    pub n: usize,
    pub m: usize,
    /// Side length of the square workspace, meters.
    pub workspace: f64,
    pub delivery_mean: f64,
    pub delivery_std: f64,
    pub capacity: f64,
    pub weight_model: WeightModel,
    pub velocity: f64,
    pub seed: u64,
}

impl Default for GenSpec {
    fn default() -> Self {
        Self {
            n: 4,
            m: 20,
            workspace: 4.0,
            delivery_mean: 2.0,
            delivery_std: 2.0,
            capacity: 1.0,
            weight_model: WeightModel::default(),
            velocity: 0.5,
            seed: 0,
        }
    }
}

impl GenSpec {
    pub fn new(n: usize, m: usize, seed: u64) -> Self {
        Self {
            n,
            m,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.n == 0 || self.m == 0 {
            return Err(GenError::InvalidSpec("n and m must be positive".into()));
        }
        if !(self.workspace > 0.0 && self.workspace.is_finite()) {
            return Err(GenError::InvalidSpec(format!("workspace must be positive, got {}", self.workspace)));
        }
        if !(self.delivery_std >= 0.0 && self.delivery_std.is_finite()) {
            return Err(GenError::InvalidSpec(format!(
                "delivery_std must be non-negative, got {}",
                self.delivery_std
            )));
        }
        if !(self.delivery_mean.is_finite()) || (self.delivery_std == 0.0 && self.delivery_mean <= 0.0) {
            return Err(GenError::InvalidSpec(format!(
                "delivery distance must be able to be positive, mean {} std {}",
                self.delivery_mean, self.delivery_std
            )));
        }
        let probs = &self.weight_model.probabilities;
        if probs.is_empty() || probs.iter().any(|p| !(*p >= 0.0 && p.is_finite())) || probs.iter().sum::<f64>() <= 0.0 {
            return Err(GenError::InvalidSpec("weight model needs non-negative weights with positive sum".into()));
        }
        if self.weight_model.c_max() > self.n {
            return Err(GenError::Infeasible {
                c_max: self.weight_model.c_max(),
                n: self.n,
            });
        }
        Ok(())
    }
}

/// Distance from pickup to delivery: normal, redrawn until positive.
pub fn sample_delivery_distance<R: Rng + ?Sized>(mean: f64, std: f64, rng: &mut R) -> f64 {
    if std == 0.0 {
        return mean;
    }
    let normal = Normal::new(mean, std).expect("std is finite and positive");
    loop {
        let x = normal.sample(rng);
        if x > 0.0 {
            return x;
        }
    }
}

fn uniform_point<R: Rng + ?Sized>(side: f64, rng: &mut R) -> Point2 {
    Point2::new(rng.random::<f64>() * side, rng.random::<f64>() * side)
}

fn inside(p: &Point2, side: f64) -> bool {
    (0.0..=side).contains(&p.x) && (0.0..=side).contains(&p.y)
}

pub fn generate(spec: &GenSpec) -> Result<Instance, GenError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let side = spec.workspace;
    let counts = WeightedIndex::new(&spec.weight_model.probabilities)
        .map_err(|e| GenError::InvalidSpec(e.to_string()))?;

    let depots = (0..spec.n).map(|_| uniform_point(side, &mut rng)).collect();
    let mut missions = Vec::with_capacity(spec.m);
    for _ in 0..spec.m {
        let pickup = uniform_point(side, &mut rng);
        let mut delivery = None;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let r = sample_delivery_distance(spec.delivery_mean, spec.delivery_std, &mut rng);
            let theta = rng.random::<f64>() * TAU;
            let p = Point2::new(pickup.x + r * theta.cos(), pickup.y + r * theta.sin());
            if inside(&p, side) {
                delivery = Some(p);
                break;
            }
        }
        let delivery = delivery.ok_or(GenError::Placement(MAX_PLACEMENT_ATTEMPTS))?;
        let required = counts.sample(&mut rng) + 1;
        let weight = (required as f64 - 0.5) * spec.capacity;
        missions.push(Mission::new(pickup, delivery, weight));
    }
    Ok(Instance::new(depots, missions, spec.capacity, spec.velocity)?)
}
