//! Box-and-depth occlusion estimate.

use super::GtEntry;

/// Lattice spacing in pixels.
pub const LATTICE_STEP: f64 = 4.0;

/// Fills `visibility` for entries of one frame and camera.
///
/// An entry's visibility is the fraction of lattice samples inside its box
/// that no strictly nearer entry's box covers. Samples sit at the centers of
/// a grid with pitch close to [`LATTICE_STEP`] that tiles the box exactly.
pub fn compute_visibility(entries: &mut [GtEntry]) {
    let boxes: Vec<_> = entries.iter().map(|e| (e.bbox, e.depth)).collect();
    for (i, e) in entries.iter_mut().enumerate() {
        let b = e.bbox;
        let occluders: Vec<_> = boxes
            .iter()
            .enumerate()
            .filter(|(j, (ob, od))| *j != i && *od < e.depth && ob.overlaps(&b))
            .map(|(_, (ob, _))| *ob)
            .collect();
        if occluders.is_empty() {
            e.visibility = 1.0;
            continue;
        }
        let nx = (b.width / LATTICE_STEP).ceil().max(1.0) as usize;
        let ny = (b.height / LATTICE_STEP).ceil().max(1.0) as usize;
        let (sx, sy) = (b.width / nx as f64, b.height / ny as f64);
        let mut covered = 0usize;
        for iy in 0..ny {
            let y = b.top + (iy as f64 + 0.5) * sy;
            for ix in 0..nx {
                let x = b.left + (ix as f64 + 0.5) * sx;
                if occluders.iter().any(|o| o.contains_point(x, y)) {
                    covered += 1;
                }
            }
        }
        e.visibility = 1.0 - covered as f64 / (nx * ny) as f64;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bbox::BBox2D;
    use crate::sensor::ObjectClass;
    use proptest::prelude::*;

    fn entry(id: u32, bbox: BBox2D, depth: f64) -> GtEntry {
        GtEntry {
            frame: 1,
            object_id: id,
            bbox,
            class: ObjectClass::Pedestrian,
            visibility: 1.0,
            depth,
        }
    }

    #[test]
    fn lone_entry_fully_visible() {
        let mut e = vec![entry(1, BBox2D::new(10.0, 10.0, 30.0, 80.0), 5.0)];
        e[0].visibility = 0.3;
        compute_visibility(&mut e);
        assert_eq!(e[0].visibility, 1.0);
    }

    #[test]
    fn duplicate_nearer_box_hides_completely() {
        let b = BBox2D::new(10.0, 10.0, 30.0, 80.0);
        let mut e = vec![entry(1, b, 9.0), entry(2, b, 5.0)];
        compute_visibility(&mut e);
        assert_eq!(e[0].visibility, 0.0);
        assert_eq!(e[1].visibility, 1.0);
    }

    #[test]
    fn half_overlap_is_about_half() {
        // analytic covered fraction: 50 / 100 of the width
        let far = BBox2D::new(100.0, 100.0, 100.0, 100.0);
        let near = BBox2D::new(50.0, 80.0, 100.0, 200.0);
        let mut e = vec![entry(1, far, 20.0), entry(2, near, 10.0)];
        compute_visibility(&mut e);
        assert!((e[0].visibility - 0.5).abs() <= 0.05, "{}", e[0].visibility);
    }

    #[test]
    fn equal_depth_does_not_occlude() {
        let b = BBox2D::new(10.0, 10.0, 30.0, 80.0);
        let mut e = vec![entry(1, b, 5.0), entry(2, b, 5.0)];
        compute_visibility(&mut e);
        assert_eq!(e[0].visibility, 1.0);
    }

    fn arb_entries() -> impl Strategy<Value = Vec<GtEntry>> {
        prop::collection::vec(
            (
                0.0..700.0f64,
                0.0..500.0f64,
                5.0..120.0f64,
                5.0..200.0f64,
                1.0..50.0f64,
            ),
            1..8,
        )
        .prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (l, t, w, h, d))| entry(i as u32 + 1, BBox2D::new(l, t, w, h), d))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn adding_an_occluder_never_increases_visibility(
            entries in arb_entries(),
            extra in (0.0..700.0f64, 0.0..500.0f64, 5.0..150.0f64, 5.0..250.0f64, 0.5..50.0f64),
        ) {
            let mut before = entries.clone();
            compute_visibility(&mut before);
            let mut after = entries;
            after.push(entry(99, BBox2D::new(extra.0, extra.1, extra.2, extra.3), extra.4));
            compute_visibility(&mut after);
            for (b, a) in before.iter().zip(&after) {
                prop_assert!((0.0..=1.0).contains(&a.visibility));
                prop_assert!(a.visibility <= b.visibility);
            }
        }
    }
}
