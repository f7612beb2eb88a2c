//! Axis-aligned image-plane boxes in MOT `left, top, width, height` convention.

/// A 2D bounding box in pixels. `left`/`top` may be fractional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox2D {
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
}

impl BBox2D {
    pub const fn new(left: f64, top: f64, width: f64, height: f64) -> Self {
        Self {
            left,
            top,
            width,
            height,
        }
    }

    /// Builds a box from its min/max corners.
    pub fn from_corners(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self::new(x0, y0, x1 - x0, y1 - y0)
    }

    /// Builds a box from center, width and height.
    pub fn from_center(cx: f64, cy: f64, width: f64, height: f64) -> Self {
        Self::new(cx - width / 2.0, cy - height / 2.0, width, height)
    }

    #[inline]
    pub fn right(&self) -> f64 {
        self.left + self.width
    }

    #[inline]
    pub fn bottom(&self) -> f64 {
        self.top + self.height
    }

    #[inline]
    pub fn center(&self) -> (f64, f64) {
        (self.left + self.width / 2.0, self.top + self.height / 2.0)
    }

    #[inline]
    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn is_valid(&self) -> bool {
        self.width > 0.0 && self.height > 0.0 && self.left.is_finite() && self.top.is_finite()
    }

    #[inline]
    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        x >= self.left && x < self.right() && y >= self.top && y < self.bottom()
    }

    /// Area of the intersection with `other` (0 when disjoint or touching).
    pub fn intersection_area(&self, other: &BBox2D) -> f64 {
        let w = self.right().min(other.right()) - self.left.max(other.left);
        let h = self.bottom().min(other.bottom()) - self.top.max(other.top);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    pub fn overlaps(&self, other: &BBox2D) -> bool {
        self.intersection_area(other) > 0.0
    }

    /// Clips the box to `[0, width) x [0, height)`. Returns `None` when nothing is left.
    pub fn clip_to(&self, image_width: f64, image_height: f64) -> Option<BBox2D> {
        let x0 = self.left.max(0.0);
        let y0 = self.top.max(0.0);
        let x1 = self.right().min(image_width);
        let y1 = self.bottom().min(image_height);
        if x1 > x0 && y1 > y0 {
            Some(BBox2D::from_corners(x0, y0, x1, y1))
        } else {
            None
        }
    }
}

/// Intersection over union of two boxes, in `[0, 1]`.
///
/// Symmetric bit-for-bit: the intersection is computed with commutative
/// min/max and the union as `a + b - i` with `a + b` commutative.
pub fn iou(a: &BBox2D, b: &BBox2D) -> f64 {
    let inter = a.intersection_area(b);
    if inter <= 0.0 {
        return 0.0;
    }
    // Areas from the same corner arithmetic as `inter`, so `iou(a, a) == 1` exactly.
    let extent = |r: &BBox2D| (r.right() - r.left) * (r.bottom() - r.top);
    let union = extent(a) + extent(b) - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).min(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_boxes_have_unit_iou() {
        let a = BBox2D::new(3.5, 7.25, 20.0, 41.0);
        assert_eq!(iou(&a, &a), 1.0);
    }

    #[test]
    fn corner_touching_boxes_do_not_overlap() {
        let a = BBox2D::new(0.0, 0.0, 10.0, 10.0);
        let b = BBox2D::new(10.0, 10.0, 10.0, 10.0);
        assert_eq!(iou(&a, &b), 0.0);
        let c = BBox2D::new(10.0, 0.0, 5.0, 10.0);
        assert_eq!(iou(&a, &c), 0.0);
    }

    #[test]
    fn half_shifted_box() {
        // intersection 5x10 = 50, union 100 + 100 - 50 = 150
        let a = BBox2D::new(0.0, 0.0, 10.0, 10.0);
        let b = BBox2D::new(5.0, 0.0, 10.0, 10.0);
        assert!((iou(&a, &b) - 50.0 / 150.0).abs() < 1e-12);
    }

    #[test]
    fn clip_outside_image_is_none() {
        let b = BBox2D::new(-50.0, 10.0, 20.0, 20.0);
        assert!(b.clip_to(800.0, 600.0).is_none());
        let c = BBox2D::new(790.0, 590.0, 20.0, 20.0)
            .clip_to(800.0, 600.0)
            .unwrap();
        assert_eq!(c, BBox2D::new(790.0, 590.0, 10.0, 10.0));
    }

    fn arb_box() -> impl Strategy<Value = BBox2D> {
        (
            -100.0..900.0f64,
            -100.0..700.0f64,
            0.5..300.0f64,
            0.5..300.0f64,
        )
            .prop_map(|(l, t, w, h)| BBox2D::new(l, t, w, h))
    }

    proptest! {
        #[test]
        fn iou_is_symmetric_and_bounded(a in arb_box(), b in arb_box()) {
            let ab = iou(&a, &b);
            prop_assert_eq!(ab.to_bits(), iou(&b, &a).to_bits());
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert_eq!(iou(&a, &a), 1.0);
        }
    }
}
