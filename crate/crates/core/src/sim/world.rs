//! Static world description: bounds, obstacles, spawn/goal points, interaction
//! zones and camera mounts, plus the place file format.
//!
//! Place files use the [`keyval`](crate::keyval) grammar:
//!
//! ```text
//! name     = park
//! bounds   = 0 0 60 40                    # min_x min_y max_x max_y
//! obstacle = 10 10, 14 10, 14 13, 10 13   # convex polygon, one per line
//! spawn    = 2 2, 58 2                    # any number of lines
//! goal     = 30 38
//! zone     = dance 30 20 2.5 2 8 5        # kind cx cy radius required_agents duration_s leave_radius
//! camera   = 30 -8 6 90 25                # x y height yaw_deg pitch_deg
//! roads    = park                         # optional built-in road graph name
//! ```

use std::path::Path;

use super::geometry::{Polygon, Rect, Vec2};
use super::nav::{NavGrid, CELL_SIZE};
use super::SimError;
use crate::keyval;

/// Largest agent radius; spawn and goal points must keep this clearance.
pub const MAX_AGENT_RADIUS: f64 = 0.3;

/// Static part of an interaction zone.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneSpec {
    pub kind: String,
    pub center: Vec2,
    pub radius: f64,
    pub required_agents: usize,
    pub duration_s: f64,
    pub leave_radius: f64,
}

/// Where a camera is mounted: ground position, height and viewing angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraMount {
    pub position: Vec2,
    pub height: f64,
    /// Heading in degrees, counter-clockwise from +x.
    pub yaw_deg: f64,
    /// Downward tilt in degrees.
    pub pitch_deg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub name: String,
    pub bounds: Rect,
    pub obstacles: Vec<Polygon>,
    pub spawn_points: Vec<Vec2>,
    pub goal_points: Vec<Vec2>,
    pub zones: Vec<ZoneSpec>,
    pub cameras: Vec<CameraMount>,
    /// Road graph to load for car traffic, if any.
    pub roads: Option<String>,
    pub nav_grid: NavGrid,
}

/// Names of the shipped places.
pub const BUILTIN_PLACES: [&str; 3] = ["square", "park", "junction"];

fn builtin_source(name: &str) -> Option<&'static str> {
    match name {
        "square" => Some(include_str!("../../places/square.place")),
        "park" => Some(include_str!("../../places/park.place")),
        "junction" => Some(include_str!("../../places/junction.place")),
        _ => None,
    }
}

impl World {
    /// Resolves a built-in place name or a path to a place file.
    pub fn build(place: &str) -> Result<World, SimError> {
        if let Some(src) = builtin_source(place) {
            return World::parse(src);
        }
        let path = Path::new(place);
        if path.is_file() {
            let text = std::fs::read_to_string(path)
                .map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
            return World::parse(&text);
        }
        Err(SimError::UnknownPlace(place.to_string()))
    }

    pub fn parse(text: &str) -> Result<World, SimError> {
        let entries = keyval::parse(text)?;
        let mut name = None;
        let mut bounds = None;
        let mut obstacles = Vec::new();
        let mut spawn_points = Vec::new();
        let mut goal_points = Vec::new();
        let mut zones = Vec::new();
        let mut cameras = Vec::new();
        let mut roads = None;
        let to_vec = |p: [f64; 2]| Vec2::new(p[0], p[1]);
        for e in &entries {
            match e.key.as_str() {
                "name" => name = Some(e.value.clone()),
                "bounds" => match e.numbers()?.as_slice() {
                    [x0, y0, x1, y1] if x1 > x0 && y1 > y0 => {
                        bounds = Some(Rect::new(Vec2::new(*x0, *y0), Vec2::new(*x1, *y1)))
                    }
                    _ => {
                        return Err(e
                            .error("expected `min_x min_y max_x max_y` with max > min")
                            .into())
                    }
                },
                "obstacle" => {
                    let pts = e.points()?.into_iter().map(to_vec).collect();
                    obstacles.push(Polygon::new(pts).map_err(|m| e.error(m))?);
                }
                "spawn" => spawn_points.extend(e.points()?.into_iter().map(to_vec)),
                "goal" => goal_points.extend(e.points()?.into_iter().map(to_vec)),
                "zone" => {
                    let mut parts = e.value.split_whitespace();
                    let kind = parts.next().ok_or_else(|| e.error("missing zone kind"))?;
                    let nums: Vec<f64> = parts
                        .map(|t| {
                            t.parse::<f64>()
                                .map_err(|_| e.error(format!("`{t}` is not a number")))
                        })
                        .collect::<Result<_, _>>()?;
                    let [cx, cy, radius, required, duration, leave] = nums[..] else {
                        return Err(e
                            .error("expected `kind cx cy radius required_agents duration_s leave_radius`")
                            .into());
                    };
                    zones.push(ZoneSpec {
                        kind: kind.to_string(),
                        center: Vec2::new(cx, cy),
                        radius,
                        required_agents: required as usize,
                        duration_s: duration,
                        leave_radius: leave,
                    });
                }
                "camera" => match e.numbers()?.as_slice() {
                    [x, y, h, yaw, pitch] => cameras.push(CameraMount {
                        position: Vec2::new(*x, *y),
                        height: *h,
                        yaw_deg: *yaw,
                        pitch_deg: *pitch,
                    }),
                    _ => return Err(e.error("expected `x y height yaw_deg pitch_deg`").into()),
                },
                "roads" => roads = Some(e.value.clone()),
                _ => return Err(e.error("unknown key").into()),
            }
        }
        let bounds = bounds.ok_or_else(|| SimError::Invalid("place has no `bounds`".into()))?;
        let nav_grid = NavGrid::from_obstacles(&bounds, &obstacles);
        let world = World {
            name: name.unwrap_or_else(|| "unnamed".into()),
            bounds,
            obstacles,
            spawn_points,
            goal_points,
            zones,
            cameras,
            roads,
            nav_grid,
        };
        world.validate()?;
        Ok(world)
    }

    /// Checks the world invariants.
    pub fn validate(&self) -> Result<(), SimError> {
        if self.spawn_points.is_empty() {
            return Err(SimError::Invalid("place has no spawn points".into()));
        }
        if self.goal_points.is_empty() {
            return Err(SimError::Invalid("place has no goal points".into()));
        }
        let named = self
            .spawn_points
            .iter()
            .map(|p| ("spawn", p))
            .chain(self.goal_points.iter().map(|p| ("goal", p)));
        for (what, p) in named {
            if !self.bounds.contains(p) || self.bounds.inner_clearance(p) < MAX_AGENT_RADIUS {
                return Err(SimError::Invalid(format!(
                    "{what} point ({}, {}) is outside the bounds",
                    p.x, p.y
                )));
            }
            if self.obstacle_clearance(p) < MAX_AGENT_RADIUS {
                return Err(SimError::Invalid(format!(
                    "{what} point ({}, {}) is inside or too close to an obstacle",
                    p.x, p.y
                )));
            }
        }
        for z in &self.zones {
            if z.required_agents < 2 {
                return Err(SimError::Invalid(format!(
                    "zone `{}` needs required_agents >= 2",
                    z.kind
                )));
            }
            if !(z.radius > 0.0 && z.leave_radius > z.radius && z.duration_s > 0.0) {
                return Err(SimError::Invalid(format!(
                    "zone `{}` needs radius > 0, leave_radius > radius and duration > 0",
                    z.kind
                )));
            }
            if !self.bounds.contains(&z.center) {
                return Err(SimError::Invalid(format!(
                    "zone `{}` center is outside the bounds",
                    z.kind
                )));
            }
        }
        for c in &self.cameras {
            if c.height <= 0.0 {
                return Err(SimError::Invalid("camera height must be positive".into()));
            }
        }
        Ok(())
    }

    /// Signed distance to the nearest obstacle (negative inside one).
    pub fn obstacle_clearance(&self, p: &Vec2) -> f64 {
        self.obstacles
            .iter()
            .map(|o| o.signed_distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether a disc of `radius` at `p` is inside the bounds and clear of obstacles.
    pub fn is_free(&self, p: &Vec2, radius: f64) -> bool {
        self.bounds.contains(p)
            && self.bounds.inner_clearance(p) >= radius
            && self.obstacle_clearance(p) >= radius
    }

    /// Plans a waypoint route from `start` to `goal` on the navigation grid.
    ///
    /// The route ends exactly at `goal`; intermediate waypoints are cell
    /// centers. Endpoints lying in a blocked cell are snapped to the nearest
    /// free cell for the search.
    pub fn plan_path(&self, start: &Vec2, goal: &Vec2) -> Result<Vec<Vec2>, SimError> {
        if start == goal {
            return Ok(vec![*goal]);
        }
        let grid = &self.nav_grid;
        let s = grid
            .nearest_free(grid.cell_of(start))
            .ok_or(SimError::NoPath)?;
        let g = grid
            .nearest_free(grid.cell_of(goal))
            .ok_or(SimError::NoPath)?;
        let path = grid.astar(s, g).ok_or(SimError::NoPath)?;
        let n = path.cells.len();
        let mut waypoints: Vec<Vec2> = path
            .cells
            .iter()
            .skip(1)
            .take(n.saturating_sub(2))
            .map(|c| grid.cell_center(*c))
            .collect();
        waypoints.push(*goal);
        Ok(waypoints)
    }

    /// Cell size of the navigation grid.
    pub fn nav_cell_size(&self) -> f64 {
        CELL_SIZE
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const OPEN: &str = "name = open\nbounds = 0 0 10 10\nspawn = 1 1\ngoal = 9 9\n";

    #[test]
    fn builtins_parse_and_validate() {
        for name in BUILTIN_PLACES {
            let w = World::build(name).unwrap();
            assert_eq!(w.name, name);
            assert!(w.cameras.len() >= 3, "{name} needs three camera mounts");
        }
    }

    #[test]
    fn park_has_obstacles_and_spawns() {
        let w = World::build("park").unwrap();
        assert!(!w.obstacles.is_empty());
        assert!(w.spawn_points.len() >= 4);
    }

    #[test]
    fn unknown_place_is_an_error() {
        assert!(matches!(
            World::build("atlantis"),
            Err(SimError::UnknownPlace(_))
        ));
    }

    #[test]
    fn empty_obstacles_give_free_grid() {
        let w = World::parse(OPEN).unwrap();
        assert_eq!(w.nav_grid.blocked_count(), 0);
        assert_eq!(w.nav_grid.cols, 20);
    }

    #[test]
    fn spawn_inside_obstacle_is_rejected() {
        let src = format!("{OPEN}obstacle = 4 4, 6 4, 6 6, 4 6\nspawn = 5 5\n");
        match World::parse(&src) {
            Err(SimError::Invalid(msg)) => assert!(msg.contains("(5, 5)"), "{msg}"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn plan_identity_and_endpoint() {
        let w = World::parse(OPEN).unwrap();
        let p = Vec2::new(3.2, 4.1);
        assert_eq!(w.plan_path(&p, &p).unwrap(), vec![p]);
        let goal = Vec2::new(8.7, 2.3);
        let route = w.plan_path(&p, &goal).unwrap();
        assert_eq!(*route.last().unwrap(), goal);
    }

    #[test]
    fn plan_around_wall() {
        let src = format!("{OPEN}obstacle = 4.9 0, 5.1 0, 5.1 10, 4.9 10\n");
        let w = World::parse(&src).unwrap();
        assert!(matches!(
            w.plan_path(&Vec2::new(1.0, 1.0), &Vec2::new(9.0, 9.0)),
            Err(SimError::NoPath)
        ));
    }
}
