//! Test-only oracles written independently of the library's evaluation path.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rand::seq::{index, SliceRandom};
use rand::Rng;
use uvrp::{AssignMatrix, Instance, Mission, Point2, Solution};

fn euclid(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

fn xy(p: &Point2) -> (f64, f64) {
    (p.x, p.y)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Event {
    Arrive { drone: usize, mission: usize },
    Complete { mission: usize },
    Home { drone: usize },
}

#[derive(Debug)]
struct Scheduled {
    time: f64,
    seq: usize,
    event: Event,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Scheduled {}
impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Scheduled {
    // Min-heap on time, FIFO on ties.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Results of the event-driven simulation, keyed by mission id.
#[derive(Debug, Clone)]
pub struct DesResult {
    /// `arrival[mission]` = (drone, time) pairs in arrival order.
    pub arrival: Vec<Vec<(usize, f64)>>,
    pub start: Vec<f64>,
    pub finish: Vec<f64>,
    pub drone_finish: Vec<f64>,
    pub drone_distance: Vec<f64>,
    pub j_dist: f64,
    pub j_time: f64,
}

/// Event-driven simulation of the mission queues. Each drone gets its own
/// FIFO of missions; a joint mission starts when its last drone arrives.
pub fn simulate_events(instance: &Instance, order: &[usize], assign: &[Vec<usize>]) -> DesResult {
    let n = instance.num_drones();
    let m = instance.num_missions();
    let v = instance.velocity();
    let missions: &[Mission] = instance.missions();
    let depots: Vec<(f64, f64)> = instance.depots().iter().map(xy).collect();

    let mut queues: Vec<VecDeque<usize>> = vec![VecDeque::new(); n];
    let mut crew: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (k, &mission) in order.iter().enumerate() {
        for &d in &assign[k] {
            queues[d].push_back(mission);
            crew[mission].push(d);
        }
    }

    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    let mut push = |heap: &mut BinaryHeap<Scheduled>, time: f64, event: Event| {
        heap.push(Scheduled { time, seq, event });
        seq += 1;
    };
    let mut location = depots.clone();
    let mut distance = vec![0.0; n];
    let mut arrival = vec![Vec::new(); m];
    let mut start = vec![f64::NAN; m];
    let mut finish = vec![f64::NAN; m];
    let mut drone_finish = vec![f64::NAN; n];

    let dispatch = |d: usize,
                    now: f64,
                    queues: &mut Vec<VecDeque<usize>>,
                    location: &mut Vec<(f64, f64)>,
                    distance: &mut Vec<f64>|
     -> (f64, Event) {
        match queues[d].pop_front() {
            Some(next) => {
                let leg = euclid(location[d], xy(&missions[next].pickup));
                distance[d] += leg;
                location[d] = xy(&missions[next].pickup);
                (now + leg / v, Event::Arrive { drone: d, mission: next })
            }
            None => {
                let leg = euclid(location[d], depots[d]);
                distance[d] += leg;
                location[d] = depots[d];
                (now + leg / v, Event::Home { drone: d })
            }
        }
    };

    for d in 0..n {
        let (t, e) = dispatch(d, 0.0, &mut queues, &mut location, &mut distance);
        push(&mut heap, t, e);
    }
    while let Some(Scheduled { time, event, .. }) = heap.pop() {
        match event {
            Event::Arrive { drone, mission } => {
                arrival[mission].push((drone, time));
                if arrival[mission].len() == crew[mission].len() {
                    start[mission] = time;
                    let leg = euclid(xy(&missions[mission].pickup), xy(&missions[mission].delivery));
                    push(&mut heap, time + leg / v, Event::Complete { mission });
                }
            }
            Event::Complete { mission } => {
                finish[mission] = time;
                let leg = euclid(xy(&missions[mission].pickup), xy(&missions[mission].delivery));
                for &d in &crew[mission] {
                    distance[d] += leg;
                    location[d] = xy(&missions[mission].delivery);
                    let (t, e) = dispatch(d, time, &mut queues, &mut location, &mut distance);
                    push(&mut heap, t, e);
                }
            }
            Event::Home { drone } => drone_finish[drone] = time,
        }
    }
    assert!(drone_finish.iter().all(|t| t.is_finite()), "simulation deadlocked");
    let j_dist = distance.iter().sum();
    let j_time = drone_finish.iter().copied().fold(0.0, f64::max);
    DesResult {
        arrival,
        start,
        finish,
        drone_finish,
        drone_distance: distance,
        j_dist,
        j_time,
    }
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Random instance with coordinates in [0, 10)^2 and required counts in 1..=c_max.
pub fn random_instance<R: Rng>(rng: &mut R, n: usize, m: usize, c_max: usize) -> Instance {
    let point = |rng: &mut R| Point2::new(rng.random::<f64>() * 10.0, rng.random::<f64>() * 10.0);
    let depots = (0..n).map(|_| point(rng)).collect();
    let missions = (0..m)
        .map(|_| {
            let c = rng.random_range(1..=c_max);
            Mission::new(point(rng), point(rng), c as f64 - 0.5)
        })
        .collect();
    Instance::new(depots, missions, 1.0, 0.5 + rng.random::<f64>()).unwrap()
}

pub fn random_solution<R: Rng>(rng: &mut R, instance: &Instance) -> Solution {
    let mut order: Vec<usize> = (0..instance.num_missions()).collect();
    order.shuffle(rng);
    let lists: Vec<Vec<usize>> = order
        .iter()
        .map(|&i| {
            let mut s = index::sample(rng, instance.num_drones(), instance.required(i)).into_vec();
            s.sort_unstable();
            s
        })
        .collect();
    let assign = AssignMatrix::from_drone_lists(&lists, instance.num_drones()).unwrap();
    Solution::new(order, assign)
}

/// Second exhaustive search: recursive over positions, choosing an unused
/// mission and a drone bitmask of the right size, scored by the event simulator.
pub fn enumerate_optimum(instance: &Instance, mu: f64) -> f64 {
    let n = instance.num_drones();
    let m = instance.num_missions();
    let masks: Vec<Vec<Vec<usize>>> = (0..m)
        .map(|i| {
            (0u32..(1 << n))
                .filter(|mask| mask.count_ones() as usize == instance.required(i))
                .map(|mask| (0..n).filter(|d| mask & (1 << d) != 0).collect())
                .collect()
        })
        .collect();
    let mut best = f64::INFINITY;
    let mut order = Vec::with_capacity(m);
    let mut assign = Vec::with_capacity(m);
    let mut used = vec![false; m];
    recurse(instance, mu, &masks, &mut used, &mut order, &mut assign, &mut best);
    best
}

fn recurse(
    instance: &Instance,
    mu: f64,
    masks: &[Vec<Vec<usize>>],
    used: &mut [bool],
    order: &mut Vec<usize>,
    assign: &mut Vec<Vec<usize>>,
    best: &mut f64,
) {
    let m = used.len();
    if order.len() == m {
        let r = simulate_events(instance, order, assign);
        let j = mu * r.j_dist + (1.0 - mu) * r.j_time;
        if j < *best {
            *best = j;
        }
        return;
    }
    for i in 0..m {
        if used[i] {
            continue;
        }
        used[i] = true;
        order.push(i);
        for set in &masks[i] {
            assign.push(set.clone());
            recurse(instance, mu, masks, used, order, assign, best);
            assign.pop();
        }
        order.pop();
        used[i] = false;
    }
}

/// Standard normal density.
pub fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Composite Simpson rule on [a, b] with `steps` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, steps: usize) -> f64 {
    let h = (b - a) / steps as f64;
    let mut sum = f(a) + f(b);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}
