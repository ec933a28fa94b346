//! Flow-variable view of a solution, constraint checking, and exhaustive search.
//!
//! A flow solution holds one binary arc variable per (drone, from, to) triple
//! over all assignment nodes, plus a potential per node. Potentials order the
//! missions: a drone may only fly from mission `i` to mission `j` when `j`
//! sits strictly later, which rules out subtours and cyclic waits alike.

use std::cmp::Ordering;

use thiserror::Error;

use crate::evaluate::{evaluate, objective_unchecked, validate, AssignMatrix, ScheduleReport, Solution, Violation};
use crate::model::Instance;

/// Largest search space `brute_force` accepts.
pub const BRUTE_FORCE_LIMIT: f64 = 1e7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExactError {
    #[error("search space of {bound:.0} candidates exceeds the limit of {limit:.0}")]
    TooLarge { bound: f64, limit: f64 },
    #[error(transparent)]
    Invalid(#[from] Violation),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution {
    num_drones: usize,
    num_nodes: usize,
    arcs: Vec<bool>,
    pub potentials: Vec<f64>,
}

impl FlowSolution {
    pub fn empty(num_drones: usize, num_missions: usize) -> Self {
        let num_nodes = num_drones + num_missions;
        Self {
            num_drones,
            num_nodes,
            arcs: vec![false; num_drones * num_nodes * num_nodes],
            potentials: vec![0.0; num_nodes],
        }
    }

    pub fn num_drones(&self) -> usize {
        self.num_drones
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    #[inline]
    fn index(&self, drone: usize, from: usize, to: usize) -> usize {
        (drone * self.num_nodes + from) * self.num_nodes + to
    }

    #[inline]
    pub fn arc(&self, drone: usize, from: usize, to: usize) -> bool {
        self.arcs[self.index(drone, from, to)]
    }

    pub fn set_arc(&mut self, drone: usize, from: usize, to: usize, value: bool) {
        let idx = self.index(drone, from, to);
        self.arcs[idx] = value;
    }

    /// Arcs `(drone, from, to)` that are set, in index order.
    pub fn active_arcs(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for d in 0..self.num_drones {
            for i in 0..self.num_nodes {
                for j in 0..self.num_nodes {
                    if self.arc(d, i, j) {
                        out.push((d, i, j));
                    }
                }
            }
        }
        out
    }
}

/// A failed constraint of the flow model, with the offending indices.
/// Node ids use the shared numbering: depots `0..n`, missions `n..n+m`.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstraintViolation {
    #[error("coverage: mission node {node} is left by {found} drones, requires {expected}")]
    Coverage { node: usize, expected: usize, found: usize },
    #[error("flow balance: drone {drone} enters mission node {node} {inflow} times and leaves {outflow} times")]
    FlowBalance {
        drone: usize,
        node: usize,
        inflow: usize,
        outflow: usize,
    },
    #[error("depot: drone {drone} leaves its depot {outflow} times and returns {inflow} times")]
    Depot { drone: usize, outflow: usize, inflow: usize },
    #[error("depot: drone {drone} uses arc {from} -> {to} touching another drone's depot")]
    ForeignDepot { drone: usize, from: usize, to: usize },
    #[error("potential: drone {drone} flies {from} -> {to} but u[{from}] = {u_from}, u[{to}] = {u_to}")]
    Potential {
        drone: usize,
        from: usize,
        to: usize,
        u_from: f64,
        u_to: f64,
    },
    #[error("domain: potential u[{node}] = {value} lies outside [0, 1]")]
    PotentialDomain { node: usize, value: f64 },
}

impl ConstraintViolation {
    /// Short label of the constraint family.
    pub fn family(&self) -> &'static str {
        match self {
            Self::Coverage { .. } => "coverage",
            Self::FlowBalance { .. } => "flow-balance",
            Self::Depot { .. } | Self::ForeignDepot { .. } => "depot",
            Self::Potential { .. } => "potential",
            Self::PotentialDomain { .. } => "domain",
        }
    }
}

/// Writes drone routes as arcs without checking cardinalities.
///
/// Each drone flies depot -> its missions in order -> depot; an idle drone
/// keeps the depot self-loop. The mission at position `k` (1-based) gets
/// potential `k / m`, depots get 0.
pub fn routes_to_flow(instance: &Instance, order: &[usize], assign: &AssignMatrix) -> FlowSolution {
    let n = instance.num_drones();
    let m = instance.num_missions();
    let mut flow = FlowSolution::empty(n, m);
    for (k, &mission) in order.iter().enumerate() {
        flow.potentials[n + mission] = (k + 1) as f64 / m as f64;
    }
    for d in 0..n {
        let mut at = d;
        for (k, &mission) in order.iter().enumerate() {
            if assign.get(k, d) {
                let node = n + mission;
                flow.set_arc(d, at, node, true);
                at = node;
            }
        }
        flow.set_arc(d, at, d, true);
    }
    flow
}

pub fn solution_to_flow(instance: &Instance, solution: &Solution) -> Result<FlowSolution, Violation> {
    validate(instance, solution)?;
    Ok(routes_to_flow(instance, &solution.order, &solution.assign))
}

/// Checks coverage, flow balance, depot and potential constraints.
///
/// The potential constraint reads `u_j - u_i >= (1 + 1/m) t - 1` for every
/// drone and mission pair `i != j`, so an active arc requires `u_j >= u_i + 1/m`
/// and an inactive one is always satisfied for potentials in `[0, 1]`. Arcs
/// into depots are exempt because depot potentials are pinned to 0.
pub fn check_constraints(instance: &Instance, flow: &FlowSolution) -> Vec<ConstraintViolation> {
    let n = instance.num_drones();
    let m = instance.num_missions();
    let nodes = n + m;
    assert_eq!(flow.num_drones(), n, "flow drone count does not match instance");
    assert_eq!(flow.num_nodes(), nodes, "flow node count does not match instance");
    let mut out = Vec::new();

    for (node, &u) in flow.potentials.iter().enumerate() {
        if !(0.0..=1.0).contains(&u) {
            out.push(ConstraintViolation::PotentialDomain { node, value: u });
        }
    }

    for i in n..nodes {
        let found = (0..n)
            .map(|d| (0..nodes).filter(|&j| flow.arc(d, i, j)).count())
            .sum();
        let expected = instance.required(i - n);
        if found != expected {
            out.push(ConstraintViolation::Coverage { node: i, expected, found });
        }
    }

    for d in 0..n {
        for i in n..nodes {
            let outflow = (0..nodes).filter(|&j| flow.arc(d, i, j)).count();
            let inflow = (0..nodes).filter(|&j| flow.arc(d, j, i)).count();
            if outflow != inflow || outflow > 1 {
                out.push(ConstraintViolation::FlowBalance {
                    drone: d,
                    node: i,
                    inflow,
                    outflow,
                });
            }
        }
    }

    for d in 0..n {
        let outflow = (0..nodes).filter(|&j| flow.arc(d, d, j)).count();
        let inflow = (0..nodes).filter(|&j| flow.arc(d, j, d)).count();
        if outflow != 1 || inflow != 1 {
            out.push(ConstraintViolation::Depot { drone: d, outflow, inflow });
        }
        for other in (0..n).filter(|&o| o != d) {
            for j in 0..nodes {
                if flow.arc(d, other, j) {
                    out.push(ConstraintViolation::ForeignDepot { drone: d, from: other, to: j });
                }
                if flow.arc(d, j, other) && j != other {
                    out.push(ConstraintViolation::ForeignDepot { drone: d, from: j, to: other });
                }
            }
        }
    }

    let step = 1.0 / m as f64;
    for d in 0..n {
        for i in n..nodes {
            for j in n..nodes {
                if !flow.arc(d, i, j) {
                    continue;
                }
                let (u_from, u_to) = (flow.potentials[i], flow.potentials[j]);
                // Tolerance covers k/m rounding only.
                if u_to - u_from < step - 1e-12 {
                    out.push(ConstraintViolation::Potential {
                        drone: d,
                        from: i,
                        to: j,
                        u_from,
                        u_to,
                    });
                }
            }
        }
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `m! * prod_i C(n, c_i)`, the number of candidates `brute_force` would visit.
pub fn search_space_size(instance: &Instance) -> f64 {
    let n = instance.num_drones();
    let m = instance.num_missions();
    let perms: f64 = (1..=m).map(|k| k as f64).product();
    instance
        .required_counts()
        .iter()
        .fold(perms, |acc, &c| acc * binomial(n, c).round())
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(current.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if current[i] < n - k + i {
                current[i] += 1;
                for j in i + 1..k {
                    current[j] = current[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Lexicographic successor of `perm`; false once the last permutation is reached.
fn next_permutation(perm: &mut [usize]) -> bool {
    if perm.len() < 2 {
        return false;
    }
    let mut i = perm.len() - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = perm.len() - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Flattened 0/1 key used to break cost ties.
fn tie_key(order: &[usize], assign: &AssignMatrix) -> (Vec<usize>, Vec<u8>) {
    (order.to_vec(), assign.cells().iter().map(|&b| b as u8).collect())
}

/// Exhaustive minimizer of the scalarized cost.
///
/// Ties go to the lexicographically smallest `(order, flattened assign)`.
pub fn brute_force(instance: &Instance, mu: f64) -> Result<(Solution, ScheduleReport), ExactError> {
    let bound = search_space_size(instance);
    if bound > BRUTE_FORCE_LIMIT {
        return Err(ExactError::TooLarge {
            bound,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let n = instance.num_drones();
    let m = instance.num_missions();
    let subsets: Vec<Vec<Vec<usize>>> = (0..m)
        .map(|i| combinations(n, instance.required(i)))
        .collect();

    // (cost, tie-break key, solution)
    type Best = (f64, (Vec<usize>, Vec<u8>), Solution);
    let mut best: Option<Best> = None;
    let mut order: Vec<usize> = (0..m).collect();
    let mut assign = AssignMatrix::zeros(m, n);
    let mut choice = vec![0usize; m];
    loop {
        choice.iter_mut().for_each(|c| *c = 0);
        'subsets: loop {
            for (k, &mission) in order.iter().enumerate() {
                let row = assign.row_mut(k);
                row.iter_mut().for_each(|b| *b = false);
                for &d in &subsets[mission][choice[k]] {
                    row[d] = true;
                }
            }
            let cost = objective_unchecked(instance, &order, &assign, mu).j_scalar;
            let better = match &best {
                None => true,
                Some((best_cost, best_key, _)) => match cost.partial_cmp(best_cost) {
                    Some(Ordering::Less) => true,
                    Some(Ordering::Equal) => tie_key(&order, &assign) < *best_key,
                    _ => false,
                },
            };
            if better {
                best = Some((
                    cost,
                    tie_key(&order, &assign),
                    Solution::new(order.clone(), assign.clone()),
                ));
            }
            // Odometer over the per-position subset choices, last position fastest.
            let mut k = m;
            loop {
                if k == 0 {
                    break 'subsets;
                }
                k -= 1;
                choice[k] += 1;
                if choice[k] < subsets[order[k]].len() {
                    break;
                }
                choice[k] = 0;
            }
        }
        if !next_permutation(&mut order) {
            break;
        }
    }
    let (_, _, solution) = best.expect("search space is non-empty");
    let report = evaluate(instance, &solution, mu)?;
    Ok((solution, report))
}
