//! Virtual cameras: projection of simulated bodies into ground-truth boxes and
//! a parametric detector producing noisy detections from them.

pub mod camera;
pub mod channel;
pub mod visibility;

use thiserror::Error;

pub use camera::{Aabb3, Camera, Intrinsics, Vec3, IMAGE_HEIGHT, IMAGE_WIDTH, NEAR_PLANE};
pub use channel::{
    perturb_detections, synthesize_detections, synthesize_detections_traced, Origin, Weather,
    WeatherModel, FALSE_POSITIVE_CONFIDENCE, TRUE_CONFIDENCE,
};
pub use visibility::compute_visibility;

use crate::bbox::BBox2D;
use crate::sim::AgentState;
use crate::traffic::{CarState, RoadGraph, CAR_HEIGHT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SensorError {
    #[error("camera: {0}")]
    Camera(String),
    #[error("weather: {0}")]
    Weather(String),
}

/// MOT Challenge class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ObjectClass {
    Pedestrian = 1,
    Car = 3,
}

impl ObjectClass {
    pub fn label(self) -> u32 {
        self as u32
    }

    pub fn from_label(label: u32) -> Option<Self> {
        match label {
            1 => Some(Self::Pedestrian),
            3 => Some(Self::Car),
            _ => None,
        }
    }
}

/// One ground-truth box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtEntry {
    /// 1-based.
    pub frame: u32,
    pub object_id: u32,
    pub bbox: BBox2D,
    pub class: ObjectClass,
    pub visibility: f64,
    /// Camera depth of the body center; not serialized.
    pub depth: f64,
}

/// One detector output; carries no identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub frame: u32,
    pub bbox: BBox2D,
    pub conf: f64,
}

/// A world-space body to be imaged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Body {
    pub id: u32,
    pub class: ObjectClass,
    pub aabb: Aabb3,
}

impl Body {
    /// Upright box with a `2r x 2r` footprint and the agent's height.
    pub fn pedestrian(agent: &AgentState) -> Self {
        let (p, r) = (agent.position, agent.radius);
        Self {
            id: agent.id,
            class: ObjectClass::Pedestrian,
            aabb: Aabb3::new(
                Vec3::new(p.x - r, p.y - r, 0.0),
                Vec3::new(p.x + r, p.y + r, agent.height),
            ),
        }
    }

    pub fn car(car: &CarState, graph: &RoadGraph) -> Self {
        let (lo, hi) = car.footprint(graph);
        Self {
            id: car.id,
            class: ObjectClass::Car,
            aabb: Aabb3::new(
                Vec3::new(lo.x, lo.y, 0.0),
                Vec3::new(hi.x, hi.y, CAR_HEIGHT),
            ),
        }
    }
}

/// Bodies of all agents followed by all cars.
pub fn scene_bodies(agents: &[AgentState], cars: Option<(&[CarState], &RoadGraph)>) -> Vec<Body> {
    let mut out: Vec<Body> = agents.iter().map(Body::pedestrian).collect();
    if let Some((cars, graph)) = cars {
        out.extend(cars.iter().map(|c| Body::car(c, graph)));
    }
    out
}

/// Boxes thinner than this after clipping, in pixels, are not reported.
pub const MIN_BOX_SIDE: f64 = 1.0;

/// Ground truth of one frame as seen by `camera`, sorted by object id.
///
/// Bodies that do not project into the image, or only as a sliver narrower
/// than [`MIN_BOX_SIDE`], are dropped. Visibility is computed among the kept
/// bodies.
pub fn capture_frame(camera: &Camera, bodies: &[Body], frame: u32) -> Vec<GtEntry> {
    let mut entries: Vec<GtEntry> = bodies
        .iter()
        .filter_map(|b| {
            let bbox = camera
                .project_box(&b.aabb)
                .filter(|r| r.width >= MIN_BOX_SIDE && r.height >= MIN_BOX_SIDE)?;
            Some(GtEntry {
                frame,
                object_id: b.id,
                bbox,
                class: b.class,
                visibility: 1.0,
                depth: camera.depth(&b.aabb.center()),
            })
        })
        .collect();
    entries.sort_by_key(|e| e.object_id);
    compute_visibility(&mut entries);
    entries
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Vec2;

    fn camera() -> Camera {
        Camera::new(
            Vec3::new(0.0, 0.0, 1.7),
            Vec3::new(1.0, 0.0, 1.7),
            Intrinsics::default(),
            800,
            600,
        )
        .unwrap()
    }

    fn agent(id: u32, x: f64, y: f64) -> AgentState {
        AgentState::at(id, Vec2::new(x, y))
    }

    #[test]
    fn empty_scene_gives_nothing() {
        assert!(capture_frame(&camera(), &[], 1).is_empty());
    }

    #[test]
    fn ten_separate_agents_fully_visible() {
        // a row across the view at 10 m, 1 m apart: boxes are 40 px wide, 80 px apart
        let agents: Vec<_> = (0..10)
            .map(|i| agent(i + 1, 10.0, -4.5 + i as f64))
            .collect();
        let gt = capture_frame(&camera(), &scene_bodies(&agents, None), 1);
        assert_eq!(gt.len(), 10);
        for e in &gt {
            assert_eq!(e.visibility, 1.0);
            assert_eq!(e.class, ObjectClass::Pedestrian);
        }
        assert!(gt.windows(2).all(|w| w[0].object_id < w[1].object_id));
    }

    #[test]
    fn agent_leaving_the_frustum_disappears() {
        let cam = camera();
        let mut present = Vec::new();
        for frame in 1..=40u32 {
            // walks sideways out of a 53 degree field of view at 10 m
            let a = agent(1, 10.0, -0.25 * frame as f64);
            present.push(!capture_frame(&cam, &scene_bodies(&[a], None), frame).is_empty());
        }
        let exit = present.iter().position(|p| !p).unwrap();
        assert!(exit > 5);
        assert!(present[exit..].iter().all(|p| !p));
    }

    #[test]
    fn nearer_agent_occludes() {
        let agents = [agent(1, 6.0, 0.0), agent(2, 12.0, 0.0)];
        let gt = capture_frame(&camera(), &scene_bodies(&agents, None), 3);
        assert_eq!(gt[0].visibility, 1.0);
        assert!(gt[1].visibility < 0.05);
        assert!(gt[0].depth < gt[1].depth);
    }

    #[test]
    fn slivers_at_the_image_edge_are_dropped() {
        let cam = camera();
        let mut slivers = 0;
        for k in 0..2000 {
            let a = agent(1, 10.0, 5.0 + 0.0005 * k as f64);
            let body = Body::pedestrian(&a);
            let raw = cam.project_box(&body.aabb);
            let gt = capture_frame(&cam, &[body], 1);
            match raw {
                Some(r) if r.width < MIN_BOX_SIDE => {
                    slivers += 1;
                    assert!(gt.is_empty());
                }
                Some(_) => assert_eq!(gt.len(), 1),
                None => assert!(gt.is_empty()),
            }
        }
        assert!(slivers > 0, "sweep never produced a sliver");
    }
}
