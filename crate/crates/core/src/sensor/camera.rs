//! Pinhole camera model and box projection.

use nalgebra::{Matrix3, Vector3};

use super::SensorError;
use crate::bbox::BBox2D;
use crate::sim::CameraMount;

pub type Vec3 = Vector3<f64>;

/// Points closer than this along the optical axis are not imaged.
pub const NEAR_PLANE: f64 = 0.1;
pub const IMAGE_WIDTH: u32 = 800;
pub const IMAGE_HEIGHT: u32 = 600;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl Default for Intrinsics {
    fn default() -> Self {
        Self {
            fx: 800.0,
            fy: 800.0,
            cx: 400.0,
            cy: 300.0,
        }
    }
}

/// Axis-aligned 3D box in world meters (z up).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb3 {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb3 {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Self { min, max }
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) / 2.0
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let (a, b) = (self.min, self.max);
        [
            Vec3::new(a.x, a.y, a.z),
            Vec3::new(b.x, a.y, a.z),
            Vec3::new(a.x, b.y, a.z),
            Vec3::new(b.x, b.y, a.z),
            Vec3::new(a.x, a.y, b.z),
            Vec3::new(b.x, a.y, b.z),
            Vec3::new(a.x, b.y, b.z),
            Vec3::new(b.x, b.y, b.z),
        ]
    }

    fn has_extent(&self) -> bool {
        self.max.x > self.min.x && self.max.y > self.min.y && self.max.z > self.min.z
    }
}

/// Corner index pairs forming the 12 box edges.
const BOX_EDGES: [(usize, usize); 12] = [
    (0, 1),
    (2, 3),
    (4, 5),
    (6, 7),
    (0, 2),
    (1, 3),
    (4, 6),
    (5, 7),
    (0, 4),
    (1, 5),
    (2, 6),
    (3, 7),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Camera {
    pub position: Vec3,
    pub look_at: Vec3,
    pub intrinsics: Intrinsics,
    pub width: u32,
    pub height: u32,
    /// Rows are the camera axes in world coordinates: right, down, forward.
    rotation: Matrix3<f64>,
}

impl Camera {
    pub fn new(
        position: Vec3,
        look_at: Vec3,
        intrinsics: Intrinsics,
        width: u32,
        height: u32,
    ) -> Result<Self, SensorError> {
        let Intrinsics { fx, fy, cx, cy } = intrinsics;
        if !(fx > 0.0 && fy > 0.0) {
            return Err(SensorError::Camera("focal lengths must be positive".into()));
        }
        if !((0.0..width as f64).contains(&cx) && (0.0..height as f64).contains(&cy)) {
            return Err(SensorError::Camera(
                "principal point outside the image".into(),
            ));
        }
        let forward = look_at - position;
        if forward.norm() < 1e-9 {
            return Err(SensorError::Camera(
                "look_at coincides with position".into(),
            ));
        }
        let forward = forward.normalize();
        let up = Vec3::z();
        let mut right = forward.cross(&up);
        if right.norm() < 1e-9 {
            // looking straight up or down: image x follows world x
            right = Vec3::x();
        }
        let right = right.normalize();
        let down = forward.cross(&right);
        let rotation =
            Matrix3::from_rows(&[right.transpose(), down.transpose(), forward.transpose()]);
        Ok(Self {
            position,
            look_at,
            intrinsics,
            width,
            height,
            rotation,
        })
    }

    /// Camera on a mount, using default image size.
    pub fn from_mount(mount: &CameraMount, intrinsics: Intrinsics) -> Result<Self, SensorError> {
        let position = Vec3::new(mount.position.x, mount.position.y, mount.height);
        let (yaw, pitch) = (mount.yaw_deg.to_radians(), mount.pitch_deg.to_radians());
        let dir = Vec3::new(
            yaw.cos() * pitch.cos(),
            yaw.sin() * pitch.cos(),
            -pitch.sin(),
        );
        Self::new(
            position,
            position + dir,
            intrinsics,
            IMAGE_WIDTH,
            IMAGE_HEIGHT,
        )
    }

    /// World point in camera coordinates (x right, y down, z forward).
    pub fn to_camera(&self, p: &Vec3) -> Vec3 {
        self.rotation * (p - self.position)
    }

    /// Distance along the optical axis.
    pub fn depth(&self, p: &Vec3) -> f64 {
        self.to_camera(p).z
    }

    fn pixel(&self, c: &Vec3) -> (f64, f64) {
        let k = &self.intrinsics;
        (k.fx * c.x / c.z + k.cx, k.fy * c.y / c.z + k.cy)
    }

    /// Projects a world point; `None` in front of the near plane.
    pub fn project_point(&self, p: &Vec3) -> Option<(f64, f64)> {
        let c = self.to_camera(p);
        (c.z >= NEAR_PLANE).then(|| self.pixel(&c))
    }

    /// Image rectangle covering the box, clipped to the image.
    ///
    /// Corners behind the near plane are replaced by the points where box
    /// edges cross it. `None` when nothing of the box is in front of the
    /// camera or the rectangle misses the image.
    pub fn project_box(&self, b: &Aabb3) -> Option<BBox2D> {
        if !b.has_extent() {
            return None;
        }
        let cam: Vec<Vec3> = b.corners().iter().map(|c| self.to_camera(c)).collect();
        let mut pts: Vec<(f64, f64)> = cam
            .iter()
            .filter(|c| c.z >= NEAR_PLANE)
            .map(|c| self.pixel(c))
            .collect();
        if pts.is_empty() {
            return None;
        }
        if pts.len() < 8 {
            for &(i, j) in &BOX_EDGES {
                let (a, c) = (cam[i], cam[j]);
                if (a.z < NEAR_PLANE) != (c.z < NEAR_PLANE) {
                    let t = (NEAR_PLANE - a.z) / (c.z - a.z);
                    let mut q = a + (c - a) * t;
                    q.z = NEAR_PLANE;
                    pts.push(self.pixel(&q));
                }
            }
        }
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for (u, v) in pts {
            x0 = x0.min(u);
            y0 = y0.min(v);
            x1 = x1.max(u);
            y1 = y1.max(v);
        }
        BBox2D::from_corners(x0, y0, x1, y1).clip_to(self.width as f64, self.height as f64)
    }
}
