//! Car traffic on a directed road graph: gap keeping, slow-down at turns and
//! crossings, yielding at pedestrian stops and random parking.

pub mod graph;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use graph::{NodeKind, RoadEdge, RoadGraph, RoadNode, BUILTIN_ROADS};

use crate::keyval::KeyValError;
use crate::sim::Vec2;

/// First car id; pedestrians use `1..=1000`.
pub const CAR_ID_BASE: u32 = 10_001;
pub const CAR_LENGTH: f64 = 4.5;
pub const CAR_WIDTH: f64 = 1.8;
pub const CAR_HEIGHT: f64 = 1.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrafficError {
    #[error("unknown road graph `{0}`")]
    Unknown(String),
    #[error("invalid road graph: {0}")]
    Invalid(String),
    #[error("road file: {0}")]
    Parse(#[from] KeyValError),
    #[error("node {0} has no outgoing edge")]
    NoExit(u32),
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficParams {
    pub park_probability: f64,
    pub dwell_min_s: f64,
    pub dwell_max_s: f64,
    /// One car per entry attempt every this many seconds.
    pub spawn_interval_s: f64,
    pub max_cars: usize,
    /// Speed factor applied within `slow_radius` of turns and crossings.
    pub slow_factor: f64,
    pub slow_radius: f64,
    /// Cars yield while a pedestrian is this close to a stop node.
    pub ped_stop_radius: f64,
    /// Yielding cars halt this far before the stop node.
    pub stop_margin: f64,
    /// Bumper-to-bumper gap kept behind the car ahead.
    pub min_gap: f64,
}

impl Default for TrafficParams {
    fn default() -> Self {
        Self {
            park_probability: 0.3,
            dwell_min_s: 5.0,
            dwell_max_s: 15.0,
            spawn_interval_s: 5.0,
            max_cars: 8,
            slow_factor: 0.4,
            slow_radius: 8.0,
            ped_stop_radius: 3.0,
            stop_margin: 2.5,
            min_gap: 2.0,
        }
    }
}

impl TrafficParams {
    /// Center-to-center spacing between consecutive cars.
    pub fn spacing(&self) -> f64 {
        CAR_LENGTH + self.min_gap
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CarMode {
    Driving,
    /// In a bay at the end node of `edge`.
    Parked {
        remaining_s: f64,
        slot: usize,
    },
    Yielding,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CarState {
    pub id: u32,
    pub edge: usize,
    /// Arc length of the car center along `edge`.
    pub s: f64,
    pub speed: f64,
    pub mode: CarMode,
    /// Edge taken after the end node of `edge`.
    pub next_edge: usize,
}

impl CarState {
    pub fn is_parked(&self) -> bool {
        matches!(self.mode, CarMode::Parked { .. })
    }

    /// Ground-plane center and unit heading.
    pub fn pose(&self, graph: &RoadGraph) -> (Vec2, Vec2) {
        let edge = &graph.edges[self.edge];
        let dir = edge.direction(graph);
        match self.mode {
            CarMode::Parked { slot, .. } => {
                let node = graph.nodes[edge.to].position;
                let right = Vec2::new(dir.y, -dir.x);
                let along = (slot as f64 - 0.5) * (CAR_LENGTH + 1.0);
                (node + right * 3.0 + dir * along, dir)
            }
            _ => (graph.nodes[edge.from].position + dir * self.s, dir),
        }
    }

    /// Axis-aligned ground footprint `(min, max)` of the rotated car body.
    pub fn footprint(&self, graph: &RoadGraph) -> (Vec2, Vec2) {
        let (c, dir) = self.pose(graph);
        let half = Vec2::new(
            (dir.x * CAR_LENGTH).abs() / 2.0 + (dir.y * CAR_WIDTH).abs() / 2.0,
            (dir.y * CAR_LENGTH).abs() / 2.0 + (dir.x * CAR_WIDTH).abs() / 2.0,
        );
        (c - half, c + half)
    }
}

/// Dynamic traffic state.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficState {
    pub step: u64,
    pub fps: u32,
    pub cars: Vec<CarState>,
    pub next_id: u32,
    spawned: u64,
    pub rng: ChaCha8Rng,
}

impl TrafficState {
    pub fn new(seed: u64, fps: u32) -> Self {
        Self {
            step: 0,
            fps,
            cars: Vec::new(),
            next_id: CAR_ID_BASE,
            spawned: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Places a car explicitly (scripted scenarios); returns its id.
    pub fn add_car(
        &mut self,
        graph: &RoadGraph,
        edge: usize,
        s: f64,
        speed: f64,
    ) -> Result<u32, TrafficError> {
        let node = graph.edges[edge].to;
        let next_edge = graph.choose_exit(node, Some(graph.edges[edge].from), &mut self.rng)?;
        let id = self.next_id;
        self.next_id += 1;
        self.cars.push(CarState {
            id,
            edge,
            s,
            speed,
            mode: CarMode::Driving,
            next_edge,
        });
        Ok(id)
    }

    /// Cars parked at node index `node`.
    pub fn occupancy(&self, graph: &RoadGraph, node: usize) -> usize {
        self.cars
            .iter()
            .filter(|c| c.is_parked() && graph.edges[c.edge].to == node)
            .count()
    }
}

fn rear_car_s(cars: &[CarState], edge: usize, skip: usize) -> Option<f64> {
    cars.iter()
        .enumerate()
        .filter(|(i, c)| *i != skip && c.edge == edge && !c.is_parked())
        .map(|(_, c)| c.s)
        .fold(None, |acc: Option<f64>, s| {
            Some(acc.map_or(s, |a| a.min(s)))
        })
}

fn leader_s(cars: &[CarState], edge: usize, me: usize) -> Option<f64> {
    let my_s = cars[me].s;
    cars.iter()
        .enumerate()
        .filter(|(i, c)| {
            *i != me && c.edge == edge && !c.is_parked() && (c.s > my_s || (c.s == my_s && *i < me))
        })
        .map(|(_, c)| c.s)
        .fold(None, |acc: Option<f64>, s| {
            Some(acc.map_or(s, |a| a.min(s)))
        })
}

/// Advances all cars by one step of `1 / fps` seconds.
///
/// Driving cars are processed front to back per edge, each against the
/// already-updated positions of the cars ahead, so spacing and ordering hold
/// after every step.
pub fn step_cars(
    graph: &RoadGraph,
    state: &mut TrafficState,
    pedestrians: &[Vec2],
    params: &TrafficParams,
) {
    let dt = 1.0 / state.fps as f64;
    let spacing = params.spacing();
    let interval = (params.spawn_interval_s * state.fps as f64)
        .round()
        .max(1.0) as u64;

    if state.step.is_multiple_of(interval) && state.cars.len() < params.max_cars {
        let entry = graph.entries[(state.spawned % graph.entries.len() as u64) as usize];
        state.spawned += 1;
        let clear = rear_car_s(&state.cars, entry, usize::MAX).is_none_or(|s| s >= spacing);
        if clear {
            let limit = graph.edges[entry].speed_limit;
            // validated graphs always have an exit
            let _ = state.add_car(graph, entry, 0.0, 0.5 * limit);
        }
    }

    let mut order: Vec<usize> = (0..state.cars.len()).collect();
    order.sort_by(|&a, &b| {
        let (ca, cb) = (&state.cars[a], &state.cars[b]);
        ca.edge
            .cmp(&cb.edge)
            .then(cb.s.total_cmp(&ca.s))
            .then(ca.id.cmp(&cb.id))
    });

    for i in order {
        if let CarMode::Parked { remaining_s, slot } = state.cars[i].mode {
            let remaining_s = remaining_s - dt;
            if remaining_s > 0.0 {
                state.cars[i].mode = CarMode::Parked { remaining_s, slot };
                continue;
            }
            let out = state.cars[i].next_edge;
            if rear_car_s(&state.cars, out, i).is_none_or(|s| s >= spacing) {
                let node = graph.edges[out].to;
                let next = graph
                    .choose_exit(node, Some(graph.edges[out].from), &mut state.rng)
                    .unwrap_or(out);
                let car = &mut state.cars[i];
                car.edge = out;
                car.s = 0.0;
                car.speed = 0.0;
                car.mode = CarMode::Driving;
                car.next_edge = next;
            } else {
                state.cars[i].mode = CarMode::Parked {
                    remaining_s: 0.0,
                    slot,
                };
            }
            continue;
        }

        let car = &state.cars[i];
        let edge = &graph.edges[car.edge];
        let end = &graph.nodes[edge.to];
        let to_end = edge.length - car.s;
        let mut target = edge.speed_limit;
        if matches!(end.kind, NodeKind::Turn | NodeKind::Crossing) && to_end <= params.slow_radius {
            target *= params.slow_factor;
        }
        let mut travel = target * dt;
        match leader_s(&state.cars, car.edge, i) {
            Some(ls) => travel = travel.min(ls - car.s - spacing),
            None => {
                if let Some(rs) = rear_car_s(&state.cars, car.next_edge, i) {
                    travel = travel.min(to_end + rs - spacing);
                }
            }
        }
        let mut yielding = false;
        if end.kind == NodeKind::PedStop {
            let r2 = params.ped_stop_radius * params.ped_stop_radius;
            if pedestrians
                .iter()
                .any(|p| (p - end.position).norm_squared() <= r2)
            {
                let stop_line = edge.length - params.stop_margin;
                if car.s + travel > stop_line {
                    travel = stop_line - car.s;
                    yielding = true;
                }
            }
        }
        let travel = travel.max(0.0);
        let new_s = car.s + travel;
        let speed = travel / dt;
        let (car_edge, next_edge) = (car.edge, car.next_edge);

        if new_s < edge.length {
            let car = &mut state.cars[i];
            car.s = new_s;
            car.speed = speed;
            car.mode = if yielding && travel == 0.0 {
                CarMode::Yielding
            } else {
                CarMode::Driving
            };
            continue;
        }

        // Arrived at the end node.
        if end.kind == NodeKind::Parking {
            let wants = state.rng.random::<f64>() < params.park_probability;
            let used: Vec<usize> = state
                .cars
                .iter()
                .filter_map(|c| match c.mode {
                    CarMode::Parked { slot, .. } if graph.edges[c.edge].to == edge.to => Some(slot),
                    _ => None,
                })
                .collect();
            if wants && used.len() < end.capacity {
                let slot = (0..end.capacity).find(|k| !used.contains(k)).unwrap_or(0);
                let dwell = state
                    .rng
                    .random_range(params.dwell_min_s..=params.dwell_max_s);
                let car = &mut state.cars[i];
                car.s = edge.length;
                car.speed = 0.0;
                car.mode = CarMode::Parked {
                    remaining_s: dwell,
                    slot,
                };
                continue;
            }
        }
        let next_len = graph.edges[next_edge].length;
        let after = graph
            .choose_exit(
                graph.edges[next_edge].to,
                Some(graph.edges[next_edge].from),
                &mut state.rng,
            )
            .unwrap_or(next_edge);
        let car = &mut state.cars[i];
        debug_assert_eq!(car.edge, car_edge);
        car.edge = next_edge;
        car.s = (new_s - edge.length).min(next_len);
        car.speed = speed;
        car.mode = CarMode::Driving;
        car.next_edge = after;
    }
    state.step += 1;
}

#[cfg(test)]
mod tests {
    use super::*;

    const LOOP: &str =
        "node = 1 0 0 plain\nnode = 2 100 0 plain\nnode = 3 100 100 plain\nnode = 4 0 100 plain\n\
edge = 1 2 10\nedge = 2 3 10\nedge = 3 4 10\nedge = 4 1 10\nentry = 1 2\n";

    fn no_spawn() -> TrafficParams {
        TrafficParams {
            max_cars: 0,
            ..TrafficParams::default()
        }
    }

    #[test]
    fn free_road_kinematics() {
        let g = RoadGraph::parse("loop", LOOP).unwrap();
        let mut t = TrafficState::new(1, 25);
        t.add_car(&g, 0, 10.0, 10.0).unwrap();
        step_cars(&g, &mut t, &[], &no_spawn());
        assert!((t.cars[0].s - 10.4).abs() < 1e-12);
        assert_eq!(t.cars[0].speed, 10.0);
    }

    #[test]
    fn follower_queues_behind_yielding_leader() {
        let src = LOOP.replace("node = 2 100 0 plain", "node = 2 100 0 ped_stop");
        let g = RoadGraph::parse("loop", &src).unwrap();
        let mut t = TrafficState::new(1, 25);
        t.add_car(&g, 0, 40.0, 10.0).unwrap();
        t.add_car(&g, 0, 20.0, 10.0).unwrap();
        let params = no_spawn();
        let ped = [Vec2::new(101.0, 0.0)];
        for _ in 0..500 {
            step_cars(&g, &mut t, &ped, &params);
            let d = t.cars[0].s - t.cars[1].s;
            assert!(d >= params.spacing() - 1e-9, "gap {d}");
        }
        assert_eq!(t.cars[0].mode, CarMode::Yielding);
        assert!((t.cars[0].s - (100.0 - params.stop_margin)).abs() < 1e-9);
        assert!((t.cars[1].s - (100.0 - params.stop_margin - params.spacing())).abs() < 1e-9);
    }

    #[test]
    fn wraps_onto_next_edge() {
        let g = RoadGraph::parse("loop", LOOP).unwrap();
        let mut t = TrafficState::new(1, 25);
        t.add_car(&g, 0, 99.8, 10.0).unwrap();
        step_cars(&g, &mut t, &[], &no_spawn());
        assert_eq!(t.cars[0].edge, 1);
        assert!((t.cars[0].s - 0.2).abs() < 1e-9);
    }

    #[test]
    fn spawns_on_entry_at_interval() {
        let g = RoadGraph::parse("loop", LOOP).unwrap();
        let mut t = TrafficState::new(1, 25);
        let params = TrafficParams::default();
        for _ in 0..(125 * 3) {
            step_cars(&g, &mut t, &[], &params);
        }
        assert_eq!(t.cars.len(), 3);
        assert_eq!(t.cars[0].id, CAR_ID_BASE);
    }
}
