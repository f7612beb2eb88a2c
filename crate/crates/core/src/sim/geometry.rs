use nalgebra::Vector2;

pub type Vec2 = Vector2<f64>;

/// Axis-aligned rectangle in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        Self { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn contains(&self, p: &Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Distance from an interior point to the nearest side.
    pub fn inner_clearance(&self, p: &Vec2) -> f64 {
        (p.x - self.min.x)
            .min(self.max.x - p.x)
            .min(p.y - self.min.y)
            .min(self.max.y - p.y)
    }
}

/// Convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Vec2>,
}

fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

impl Polygon {
    /// Accepts either winding; rejects fewer than 3 vertices, zero area and
    /// non-convex input.
    pub fn new(mut vertices: Vec<Vec2>) -> Result<Self, String> {
        if vertices.len() < 3 {
            return Err(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            ));
        }
        let n = vertices.len();
        let area2: f64 = (0..n)
            .map(|i| cross(&vertices[i], &vertices[(i + 1) % n]))
            .sum();
        if area2.abs() < 1e-12 {
            return Err("polygon has zero area".into());
        }
        if area2 < 0.0 {
            vertices.reverse();
        }
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if cross(&(b - a), &(c - b)) < -1e-12 {
                return Err("polygon is not convex".into());
            }
        }
        Ok(Self { vertices })
    }

    /// Axis-aligned rectangle as a polygon.
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self {
            vertices: vec![
                Vec2::new(x0, y0),
                Vec2::new(x1, y0),
                Vec2::new(x1, y1),
                Vec2::new(x0, y1),
            ],
        }
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// True for points strictly inside (boundary excluded).
    pub fn contains(&self, p: &Vec2) -> bool {
        self.edges().all(|(a, b)| cross(&(b - a), &(p - a)) > 0.0)
    }

    /// Closest point on the boundary and its distance. Inside points report
    /// their distance to the nearest edge too; combine with [`contains`](Self::contains).
    pub fn closest_boundary_point(&self, p: &Vec2) -> (Vec2, f64) {
        let mut best = (self.vertices[0], f64::INFINITY);
        for (a, b) in self.edges() {
            let ab = b - a;
            let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
            let q = a + ab * t;
            let d = (p - q).norm();
            if d < best.1 {
                best = (q, d);
            }
        }
        best
    }

    /// Signed distance: negative inside, positive outside.
    pub fn signed_distance(&self, p: &Vec2) -> f64 {
        let (_, d) = self.closest_boundary_point(p);
        if self.contains(p) {
            -d
        } else {
            d
        }
    }

    /// Whether the polygon and the open rectangle share interior area
    /// (separating axis test; touching does not count).
    pub fn intersects_rect(&self, min: &Vec2, max: &Vec2) -> bool {
        let (mut px0, mut px1, mut py0, mut py1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for v in &self.vertices {
            px0 = px0.min(v.x);
            px1 = px1.max(v.x);
            py0 = py0.min(v.y);
            py1 = py1.max(v.y);
        }
        if px1 <= min.x || px0 >= max.x || py1 <= min.y || py0 >= max.y {
            return false;
        }
        let corners = [
            Vec2::new(min.x, min.y),
            Vec2::new(max.x, min.y),
            Vec2::new(max.x, max.y),
            Vec2::new(min.x, max.y),
        ];
        for (a, b) in self.edges() {
            let edge = b - a;
            // Outward normal for CCW winding.
            let normal = Vec2::new(edge.y, -edge.x);
            let offset = normal.dot(&a);
            if corners.iter().all(|c| normal.dot(c) >= offset) {
                return false;
            }
        }
        true
    }
}
