//! TOML instance and solution files.
//!
//! Instance file:
//!
//! ```toml
//! version = 1
//! capacity = 1.0
//! velocity = 0.5
//! depots = [[0.5, 1.0], [3.0, 2.5]]
//!
//! [[missions]]
//! pickup = [1.0, 1.0]
//! delivery = [2.0, 3.5]
//! weight = 1.5
//! ```
//!
//! Solution file, with 1-based mission ids and 1-based drone ids:
//!
//! ```toml
//! version = 1
//! order = [2, 1]
//! assign = [[1, 2], [2]]
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluate::{AssignMatrix, Solution, Violation};
use crate::model::{Instance, Mission, ModelError, Point2};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported format version {0}")]
    Version(u32),
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Structure(#[from] Violation),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionRecord {
    pub pickup: [f64; 2],
    pub delivery: [f64; 2],
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub version: u32,
    pub capacity: f64,
    pub velocity: f64,
    pub depots: Vec<[f64; 2]>,
    pub missions: Vec<MissionRecord>,
}

impl From<&Instance> for InstanceFile {
    fn from(instance: &Instance) -> Self {
        Self {
            version: FORMAT_VERSION,
            capacity: instance.capacity(),
            velocity: instance.velocity(),
            depots: instance.depots().iter().map(|p| [p.x, p.y]).collect(),
            missions: instance
                .missions()
                .iter()
                .map(|m| MissionRecord {
                    pickup: [m.pickup.x, m.pickup.y],
                    delivery: [m.delivery.x, m.delivery.y],
                    weight: m.weight,
                })
                .collect(),
        }
    }
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<Instance, FileError> {
        if self.version != FORMAT_VERSION {
            return Err(FileError::Version(self.version));
        }
        let pt = |a: [f64; 2]| Point2::new(a[0], a[1]);
        let depots = self.depots.into_iter().map(pt).collect();
        let missions = self
            .missions
            .into_iter()
            .map(|m| Mission::new(pt(m.pickup), pt(m.delivery), m.weight))
            .collect();
        Ok(Instance::new(depots, missions, self.capacity, self.velocity)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub version: u32,
    pub order: Vec<usize>,
    pub assign: Vec<Vec<usize>>,
}

impl From<&Solution> for SolutionFile {
    fn from(solution: &Solution) -> Self {
        Self {
            version: FORMAT_VERSION,
            order: solution.order.iter().map(|&i| i + 1).collect(),
            assign: solution
                .assign
                .to_drone_lists()
                .into_iter()
                .map(|row| row.into_iter().map(|d| d + 1).collect())
                .collect(),
        }
    }
}

impl SolutionFile {
    /// Converts ids to 0-based form. Only structural problems are rejected here;
    /// cardinality and permutation checks are left to `validate`.
    pub fn into_solution(self, num_drones: usize) -> Result<Solution, FileError> {
        if self.version != FORMAT_VERSION {
            return Err(FileError::Version(self.version));
        }
        let zero_based = |id: usize, what: &str| {
            id.checked_sub(1)
                .ok_or_else(|| FileError::Format(format!("{what} ids are 1-based, found 0")))
        };
        let order = self
            .order
            .into_iter()
            .map(|i| zero_based(i, "mission"))
            .collect::<Result<Vec<_>, _>>()?;
        let lists = self
            .assign
            .into_iter()
            .map(|row| row.into_iter().map(|d| zero_based(d, "drone")).collect())
            .collect::<Result<Vec<Vec<usize>>, _>>()?;
        let assign = AssignMatrix::from_drone_lists(&lists, num_drones)?;
        Ok(Solution::new(order, assign))
    }
}

fn read(path: &Path) -> Result<String, FileError> {
    fs::read_to_string(path).map_err(|source| FileError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), FileError> {
    fs::write(path, text).map_err(|source| FileError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn instance_to_string(instance: &Instance) -> String {
    toml::to_string(&InstanceFile::from(instance)).expect("instance file serializes")
}

pub fn instance_from_str(text: &str) -> Result<Instance, FileError> {
    let file: InstanceFile = toml::from_str(text).map_err(|e| FileError::Parse(e.to_string()))?;
    file.into_instance()
}

pub fn solution_to_string(solution: &Solution) -> String {
    toml::to_string(&SolutionFile::from(solution)).expect("solution file serializes")
}

pub fn solution_from_str(text: &str, num_drones: usize) -> Result<Solution, FileError> {
    let file: SolutionFile = toml::from_str(text).map_err(|e| FileError::Parse(e.to_string()))?;
    file.into_solution(num_drones)
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance, FileError> {
    instance_from_str(&read(path.as_ref())?)
}

pub fn write_instance(path: impl AsRef<Path>, instance: &Instance) -> Result<(), FileError> {
    write(path.as_ref(), &instance_to_string(instance))
}

pub fn read_solution(path: impl AsRef<Path>, num_drones: usize) -> Result<Solution, FileError> {
    solution_from_str(&read(path.as_ref())?, num_drones)
}

pub fn write_solution(path: impl AsRef<Path>, solution: &Solution) -> Result<(), FileError> {
    write(path.as_ref(), &solution_to_string(solution))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{generate, GenSpec};
    use proptest::prelude::*;

    #[test]
    fn parses_documented_example() {
        let text = r#"
version = 1
capacity = 1.0
velocity = 0.5
depots = [[0.5, 1.0], [3.0, 2.5]]

[[missions]]
pickup = [1.0, 1.0]
delivery = [2.0, 3.5]
weight = 1.5
"#;
        let inst = instance_from_str(text).unwrap();
        assert_eq!(inst.num_drones(), 2);
        assert_eq!(inst.required(0), 2);
        let sol = solution_from_str("version = 1\norder = [1]\nassign = [[1, 2]]\n", 2).unwrap();
        assert_eq!(sol.order, vec![0]);
        assert_eq!(sol.assign.row(0), [true, true]);
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(matches!(instance_from_str("capacity = "), Err(FileError::Parse(_))));
        assert!(matches!(
            solution_from_str("version = 1\norder = [0]\nassign = [[1]]\n", 1),
            Err(FileError::Format(_))
        ));
        assert!(matches!(
            solution_from_str("version = 2\norder = [1]\nassign = [[1]]\n", 1),
            Err(FileError::Version(2))
        ));
        assert!(matches!(
            solution_from_str("version = 1\norder = [1]\nassign = [[3]]\n", 2),
            Err(FileError::Structure(Violation::DroneOutOfRange { .. }))
        ));
        let infeasible = "version = 1\ncapacity = 1.0\nvelocity = 1.0\ndepots = [[0.0, 0.0]]\n\
                          [[missions]]\npickup = [0.0, 0.0]\ndelivery = [1.0, 1.0]\nweight = 2.0\n";
        assert!(matches!(
            instance_from_str(infeasible),
            Err(FileError::Model(ModelError::Infeasible { .. }))
        ));
    }

    proptest! {
        #[test]
        fn instance_round_trip_is_lossless(seed in any::<u64>(), n in 2usize..6, m in 1usize..12) {
            let inst = generate(&GenSpec::new(n, m, seed)).unwrap();
            let back = instance_from_str(&instance_to_string(&inst)).unwrap();
            prop_assert_eq!(back, inst);
        }
    }
}
