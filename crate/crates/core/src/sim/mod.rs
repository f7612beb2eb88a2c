//! Pedestrian simulation: world, global planning, steering and interaction zones.

pub mod agent;
pub mod geometry;
pub mod nav;
pub mod world;
pub mod zone;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use agent::{spawn_agents, AgentId, AgentMode, AgentState, SteeringParams, MAX_SPEED};
pub use geometry::{Polygon, Rect, Vec2};
pub use nav::{Cell, GridPath, NavGrid, OctileCost, CELL_SIZE};
pub use world::{CameraMount, World, ZoneSpec, BUILTIN_PLACES};
pub use zone::{Zone, ZoneEvent, ZoneParams};

use crate::keyval::KeyValError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("unknown place `{0}`")]
    UnknownPlace(String),
    #[error("invalid place: {0}")]
    Invalid(String),
    #[error("place file: {0}")]
    Parse(#[from] KeyValError),
    #[error("{0}")]
    Argument(String),
    #[error("no path to goal")]
    NoPath,
    #[error("{0}")]
    Io(String),
}

/// Simulation-wide parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub fps: u32,
    pub steering: SteeringParams,
    pub zones: ZoneParams,
    /// Agents draw a new goal on arrival; otherwise they stop (`Done`).
    pub cycle_goals: bool,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            fps: 25,
            steering: SteeringParams::default(),
            zones: ZoneParams::default(),
            cycle_goals: true,
        }
    }
}

/// Dynamic pedestrian state. A plain value: clone it, send it across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub step: u64,
    pub fps: u32,
    pub agents: Vec<AgentState>,
    pub zones: Vec<Zone>,
    pub rng: ChaCha8Rng,
}

impl SimState {
    /// Fresh state with `n` spawned agents.
    pub fn new(world: &World, n: usize, seed: u64, fps: u32) -> Result<Self, SimError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let agents = spawn_agents(world, n, &mut rng)?;
        Ok(Self::with_agents(world, agents, rng, fps))
    }

    /// State from explicitly placed agents (scripted scenarios).
    pub fn with_agents(world: &World, agents: Vec<AgentState>, rng: ChaCha8Rng, fps: u32) -> Self {
        let zones = world
            .zones
            .iter()
            .enumerate()
            .map(|(i, z)| Zone::new(i, z.clone()))
            .collect();
        Self {
            step: 0,
            fps,
            agents,
            zones,
            rng,
        }
    }

    /// Elapsed time, computed from the step count (never accumulated).
    pub fn time_s(&self) -> f64 {
        self.step as f64 / self.fps as f64
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.fps as f64
    }
}

/// Advances every agent by one fixed step of `1 / fps` seconds.
///
/// Forces are evaluated on the pre-step snapshot, so the result does not
/// depend on agent order. After integration, overlaps between agents are
/// relaxed, then every agent is projected out of obstacles and bounds.
pub fn step_agents(world: &World, state: &mut SimState, params: &SimParams) {
    let dt = state.dt();
    let steering = &params.steering;

    for agent in state.agents.iter_mut() {
        if matches!(agent.mode, AgentMode::Walking | AgentMode::Queued { .. })
            && agent::advance_waypoints(agent, steering.waypoint_tolerance)
        {
            if params.cycle_goals {
                agent::assign_new_goal(world, agent, &mut state.rng);
            } else if agent.mode == AgentMode::Walking {
                agent.mode = AgentMode::Done;
            }
        }
    }

    let desired: Vec<Vec2> = state
        .agents
        .iter()
        .map(|a| {
            let slot = match a.mode {
                AgentMode::Interacting { zone, .. } => state.zones[zone].slot(a.id),
                _ => None,
            };
            agent::desired_velocity(a, slot, steering)
        })
        .collect();
    let forces: Vec<Vec2> = (0..state.agents.len())
        .map(|i| agent::social_force(world, &state.agents, i, desired[i], steering))
        .collect();

    for (a, f) in state.agents.iter_mut().zip(forces) {
        let mut v = a.velocity + f * dt;
        let speed = v.norm();
        if speed > MAX_SPEED {
            v *= MAX_SPEED / speed;
        }
        a.velocity = v;
        a.position += v * dt;
    }

    agent::separate_agents(&mut state.agents, 3);
    for a in state.agents.iter_mut() {
        agent::enforce_clearance(world, a);
    }

    state.step += 1;

    for zi in 0..state.zones.len() {
        let events = state.zones[zi].update(
            &state.agents,
            state.step,
            state.fps,
            &params.zones,
            &mut state.rng,
        );
        let released = zone::apply_events(
            &state.zones[zi],
            &events,
            &mut state.agents,
            state.step,
            state.fps,
        );
        for id in released {
            if let Some(a) = state.agents.iter_mut().find(|a| a.id == id) {
                agent::replan(world, a, &mut state.rng);
            }
        }
    }
    for a in state.agents.iter_mut() {
        if let AgentMode::Interacting { zone, .. } = a.mode {
            a.mode = AgentMode::Interacting {
                zone,
                remaining_s: state.zones[zone].remaining_s(state.step, state.fps),
            };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open_world() -> World {
        World::parse("bounds = 0 0 40 40\nspawn = 2 2\ngoal = 38 38\n").unwrap()
    }

    #[test]
    fn idle_agent_stays_put() {
        let w = open_world();
        let a = AgentState::at(1, Vec2::new(20.0, 20.0));
        let mut s = SimState::with_agents(&w, vec![a], ChaCha8Rng::seed_from_u64(0), 25);
        let params = SimParams {
            cycle_goals: false,
            ..SimParams::default()
        };
        step_agents(&w, &mut s, &params);
        assert_eq!(s.agents[0].position, Vec2::new(20.0, 20.0));
    }

    #[test]
    fn straight_walk_displacement() {
        let w = open_world();
        let start = Vec2::new(5.0, 20.0);
        let a = AgentState::on_route(1, start, 1.3, vec![Vec2::new(35.0, 20.0)]);
        let mut s = SimState::with_agents(&w, vec![a], ChaCha8Rng::seed_from_u64(0), 25);
        let params = SimParams::default();
        let mut prev = start;
        for _ in 0..100 {
            step_agents(&w, &mut s, &params);
            let p = s.agents[0].position;
            assert!(((p - prev).norm() - 1.3 * 0.04).abs() < 1e-9);
            prev = p;
        }
    }

    #[test]
    fn time_is_step_over_fps() {
        let w = open_world();
        let mut s = SimState::new(&w, 3, 1, 25).unwrap();
        for _ in 0..777 {
            step_agents(&w, &mut s, &SimParams::default());
        }
        assert_eq!(s.time_s(), 777.0 / 25.0);
    }
}
