//! Pedestrian agents: spawning and social-force steering.

use std::collections::VecDeque;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::geometry::Vec2;
use super::world::World;
use super::SimError;

pub type AgentId = u32;

/// Hard speed cap in m/s.
pub const MAX_SPEED: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AgentMode {
    Walking,
    Queued {
        zone: usize,
    },
    Interacting {
        zone: usize,
        remaining_s: f64,
    },
    /// Reached its final goal and does not draw another one.
    Done,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub id: AgentId,
    pub position: Vec2,
    pub velocity: Vec2,
    pub preferred_speed: f64,
    pub radius: f64,
    pub height: f64,
    pub path: VecDeque<Vec2>,
    /// Index into `World::goal_points` of the current goal, if any.
    pub goal: Option<usize>,
    pub mode: AgentMode,
}

impl AgentState {
    /// Idle agent with default body at `position`.
    pub fn at(id: AgentId, position: Vec2) -> Self {
        Self {
            id,
            position,
            velocity: Vec2::zeros(),
            preferred_speed: 1.4,
            radius: 0.25,
            height: 1.7,
            path: VecDeque::new(),
            goal: None,
            mode: AgentMode::Walking,
        }
    }

    /// Agent following `waypoints`, already moving toward the first one at
    /// its preferred speed.
    pub fn on_route(
        id: AgentId,
        position: Vec2,
        preferred_speed: f64,
        waypoints: Vec<Vec2>,
    ) -> Self {
        let mut a = Self::at(id, position);
        a.preferred_speed = preferred_speed;
        a.path = waypoints.into();
        a.velocity = a.desired_toward_path();
        a
    }

    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }

    fn desired_toward_path(&self) -> Vec2 {
        match self.path.front() {
            Some(w) => {
                let d = w - self.position;
                let n = d.norm();
                if n > 1e-12 {
                    d * (self.preferred_speed / n)
                } else {
                    Vec2::zeros()
                }
            }
            None => Vec2::zeros(),
        }
    }
}

/// Steering constants for the social-force model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteeringParams {
    /// Relaxation time toward the desired velocity (s).
    pub tau: f64,
    /// Repulsion strength (m/s^2).
    pub repulsion_a: f64,
    /// Repulsion range (m).
    pub repulsion_b: f64,
    /// Neighbors and obstacles farther than this are ignored (m).
    pub interaction_range: f64,
    /// A waypoint is reached within this distance (m).
    pub waypoint_tolerance: f64,
    /// Fraction of the repulsion applied sideways (to the right) when two
    /// agents approach each other.
    pub sidestep: f64,
}

impl Default for SteeringParams {
    fn default() -> Self {
        Self {
            tau: 0.5,
            repulsion_a: 2.0,
            repulsion_b: 0.3,
            interaction_range: 2.0,
            waypoint_tolerance: 0.3,
            sidestep: 0.3,
        }
    }
}

/// Draws a goal index different from `current`, uniformly.
pub fn draw_goal<R: Rng + ?Sized>(world: &World, current: Option<usize>, rng: &mut R) -> usize {
    let n = world.goal_points.len();
    match current {
        Some(c) if n > 1 => {
            let k = rng.random_range(0..n - 1);
            if k >= c {
                k + 1
            } else {
                k
            }
        }
        _ => rng.random_range(0..n),
    }
}

/// Gives the agent a new goal and route; tries up to 10 goals. Leaves the
/// route empty if none is reachable.
pub fn assign_new_goal<R: Rng + ?Sized>(world: &World, agent: &mut AgentState, rng: &mut R) {
    for _ in 0..10 {
        let g = draw_goal(world, agent.goal, rng);
        if let Ok(route) = world.plan_path(&agent.position, &world.goal_points[g]) {
            agent.goal = Some(g);
            agent.path = route.into();
            return;
        }
    }
    agent.path.clear();
}

/// Re-plans to the current goal (after an interaction moved the agent).
pub fn replan<R: Rng + ?Sized>(world: &World, agent: &mut AgentState, rng: &mut R) {
    match agent.goal {
        Some(g) => match world.plan_path(&agent.position, &world.goal_points[g]) {
            Ok(route) => agent.path = route.into(),
            Err(_) => assign_new_goal(world, agent, rng),
        },
        None => assign_new_goal(world, agent, rng),
    }
}

/// Creates `n` agents at the world's spawn points (round-robin, jittered).
///
/// Ids are `1..=n`. Preferred speed ~ N(1.4, 0.2^2) clamped to [0.8, 2.0],
/// height ~ U[1.5, 1.9], radius ~ U[0.2, 0.3].
pub fn spawn_agents<R: Rng + ?Sized>(
    world: &World,
    n: usize,
    rng: &mut R,
) -> Result<Vec<AgentState>, SimError> {
    if !(1..=1000).contains(&n) {
        return Err(SimError::Argument(format!(
            "agent count must be in 1..=1000, got {n}"
        )));
    }
    let speed: Normal<f64> = Normal::new(1.4, 0.2).expect("valid normal");
    let mut agents: Vec<AgentState> = Vec::with_capacity(n);
    for i in 0..n {
        let base = world.spawn_points[i % world.spawn_points.len()];
        let radius = rng.random_range(0.2..=0.3);
        let height = rng.random_range(1.5..=1.9);
        let preferred_speed = speed.sample(rng).clamp(0.8, MAX_SPEED);

        let mut position = base;
        let mut fallback = None;
        for attempt in 0..200 {
            let spread = 1.5 + 0.02 * attempt as f64;
            let r = spread * rng.random::<f64>().sqrt();
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            let p = base + Vec2::new(theta.cos(), theta.sin()) * r;
            if !world.is_free(&p, radius) {
                continue;
            }
            fallback.get_or_insert(p);
            let clear = agents
                .iter()
                .all(|o| (o.position - p).norm() >= o.radius + radius);
            if clear {
                position = p;
                fallback = None;
                break;
            }
        }
        if let Some(p) = fallback {
            position = p;
        }

        let mut agent = AgentState::at(i as AgentId + 1, position);
        agent.radius = radius;
        agent.height = height;
        agent.preferred_speed = preferred_speed;
        assign_new_goal(world, &mut agent, rng);
        agent.velocity = agent.desired_toward_path();
        agents.push(agent);
    }
    Ok(agents)
}

/// Pops reached waypoints; returns true when the route became empty this way.
pub(crate) fn advance_waypoints(agent: &mut AgentState, tolerance: f64) -> bool {
    let mut popped = false;
    while let Some(w) = agent.path.front() {
        if (w - agent.position).norm() <= tolerance {
            agent.path.pop_front();
            popped = true;
        } else {
            break;
        }
    }
    popped && agent.path.is_empty()
}

/// Desired velocity for the agent's current mode. `slot` is the hold
/// position of interacting agents.
pub(crate) fn desired_velocity(
    agent: &AgentState,
    slot: Option<Vec2>,
    params: &SteeringParams,
) -> Vec2 {
    match agent.mode {
        AgentMode::Walking | AgentMode::Queued { .. } => agent.desired_toward_path(),
        AgentMode::Interacting { .. } => match slot {
            Some(target) => {
                let d = target - agent.position;
                let v = d / params.tau;
                let n = v.norm();
                if n > agent.preferred_speed {
                    v * (agent.preferred_speed / n)
                } else {
                    v
                }
            }
            None => Vec2::zeros(),
        },
        AgentMode::Done => Vec2::zeros(),
    }
}

/// Exponential repulsion magnitude for a gap of `gap` meters between bodies.
fn repulsion(params: &SteeringParams, gap: f64) -> f64 {
    params.repulsion_a * (-gap / params.repulsion_b).exp()
}

/// Social force on agent `i` given a snapshot of all agents.
pub(crate) fn social_force(
    world: &World,
    agents: &[AgentState],
    i: usize,
    desired: Vec2,
    params: &SteeringParams,
) -> Vec2 {
    let me = &agents[i];
    let mut force = (desired - me.velocity) / params.tau;
    let range = params.interaction_range;

    for (j, other) in agents.iter().enumerate() {
        if j == i {
            continue;
        }
        let offset = me.position - other.position;
        let dist = offset.norm();
        if dist >= range || dist < 1e-12 {
            continue;
        }
        let normal = offset / dist;
        let magnitude = repulsion(params, dist - (me.radius + other.radius));
        force += normal * magnitude;
        // approaching pair: both veer right
        if (me.velocity - other.velocity).dot(&normal) < 0.0 {
            // right-hand side of the heading toward `other` (which is -normal)
            let right = Vec2::new(-normal.y, normal.x);
            let heading = me.velocity.dot(&-normal);
            if heading > 0.0 {
                force += right * (params.sidestep * magnitude);
            }
        }
    }

    for obstacle in &world.obstacles {
        let (q, d) = obstacle.closest_boundary_point(&me.position);
        if d >= range || d < 1e-12 {
            continue;
        }
        let mut normal = (me.position - q) / d;
        if obstacle.contains(&me.position) {
            normal = -normal;
        }
        force += normal * repulsion(params, d - me.radius);
    }

    let b = &world.bounds;
    let walls = [
        (me.position.x - b.min.x, Vec2::new(1.0, 0.0)),
        (b.max.x - me.position.x, Vec2::new(-1.0, 0.0)),
        (me.position.y - b.min.y, Vec2::new(0.0, 1.0)),
        (b.max.y - me.position.y, Vec2::new(0.0, -1.0)),
    ];
    for (d, normal) in walls {
        if d < range {
            force += normal * repulsion(params, d - me.radius);
        }
    }
    force
}

/// Pushes overlapping agents apart (symmetric, order-independent per pass).
pub(crate) fn separate_agents(agents: &mut [AgentState], passes: usize) {
    let n = agents.len();
    for _ in 0..passes {
        let mut shift = vec![Vec2::zeros(); n];
        let mut any = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let offset = agents[i].position - agents[j].position;
                let dist = offset.norm();
                let min = agents[i].radius + agents[j].radius;
                if dist >= min {
                    continue;
                }
                any = true;
                let normal = if dist > 1e-12 {
                    offset / dist
                } else {
                    // coincident: split along x by id order
                    Vec2::new(1.0, 0.0)
                };
                let push = normal * ((min - dist) / 2.0 + 1e-9);
                shift[i] += push;
                shift[j] -= push;
            }
        }
        if !any {
            break;
        }
        for (a, s) in agents.iter_mut().zip(shift) {
            a.position += s;
        }
    }
}

/// Moves the agent out of obstacles and bounds so that every obstacle edge
/// is at least `radius` away.
pub(crate) fn enforce_clearance(world: &World, agent: &mut AgentState) {
    for _ in 0..4 {
        let mut moved = false;
        for obstacle in &world.obstacles {
            let (q, d) = obstacle.closest_boundary_point(&agent.position);
            let inside = obstacle.contains(&agent.position);
            if !inside && d >= agent.radius {
                continue;
            }
            let normal = if d > 1e-12 {
                let n = (agent.position - q) / d;
                if inside {
                    -n
                } else {
                    n
                }
            } else {
                // on the boundary: step away from the centroid
                let c = obstacle.vertices().iter().sum::<Vec2>() / obstacle.vertices().len() as f64;
                (agent.position - c).normalize()
            };
            agent.position = q + normal * (agent.radius + 1e-9);
            moved = true;
        }
        let b = &world.bounds;
        let r = agent.radius;
        let clamped = Vec2::new(
            agent.position.x.clamp(b.min.x + r, b.max.x - r),
            agent.position.y.clamp(b.min.y + r, b.max.y - r),
        );
        if clamped != agent.position {
            agent.position = clamped;
            moved = true;
        }
        if !moved {
            break;
        }
    }
}
