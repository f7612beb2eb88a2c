use std::path::Path;

use crowdsim_core::bbox::BBox2D;
use crowdsim_core::harness::{simulate_scenario, ScenarioConfig};
use crowdsim_core::motio::{self, MotError, SequenceMeta};
use crowdsim_core::sensor::{Detection, GtEntry, ObjectClass};
use proptest::prelude::*;

fn cents(lo: i64, hi: i64) -> impl Strategy<Value = f64> {
    (lo..hi).prop_map(|c| c as f64 / 100.0)
}

fn arb_box() -> impl Strategy<Value = BBox2D> {
    (
        cents(-5_000, 80_000),
        cents(-5_000, 60_000),
        cents(1, 30_000),
        cents(1, 30_000),
    )
        .prop_map(|(l, t, w, h)| BBox2D::new(l, t, w, h))
}

/// Sorted, duplicate-free gt over `len` frames plus a det list.
fn arb_sequence() -> impl Strategy<Value = (u32, Vec<GtEntry>, Vec<Detection>)> {
    (1u32..60).prop_flat_map(|len| {
        let gt = prop::collection::btree_map(
            (1..=len, 1u32..40),
            (arb_box(), prop::bool::ANY, 0i64..=100),
            0..80,
        )
        .prop_map(|m| {
            m.into_iter()
                .map(|((frame, object_id), (bbox, car, vis))| GtEntry {
                    frame,
                    object_id,
                    bbox,
                    class: if car {
                        ObjectClass::Car
                    } else {
                        ObjectClass::Pedestrian
                    },
                    visibility: vis as f64 / 100.0,
                    depth: 0.0,
                })
                .collect::<Vec<_>>()
        });
        let det =
            prop::collection::vec((1..=len, arb_box(), cents(0, 101)), 0..80).prop_map(|mut v| {
                v.sort_by_key(|d| d.0);
                v.into_iter()
                    .map(|(frame, bbox, conf)| Detection { frame, bbox, conf })
                    .collect::<Vec<_>>()
            });
        (Just(len), gt, det)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn sequences_round_trip((len, gt, det) in arb_sequence()) {
        let dir = tempfile::tempdir().unwrap();
        let meta = SequenceMeta::new("prop", 25, len);
        motio::write_sequence(dir.path(), &meta, &gt, &det).unwrap();
        let (meta2, gt2, det2) = motio::read_sequence(dir.path()).unwrap();
        prop_assert_eq!(meta2, meta);
        prop_assert_eq!(gt2, gt);
        prop_assert_eq!(det2, det);
    }
}

#[test]
fn generated_sequences_round_trip_to_two_decimals() {
    let cfg = ScenarioConfig {
        cameras: 1,
        duration_s: 4.0,
        ..ScenarioConfig::default()
    };
    let seq = simulate_scenario(&cfg).unwrap().remove(0);
    let dir = tempfile::tempdir().unwrap();
    motio::write_sequence(dir.path(), &seq.meta, &seq.gt, &seq.det).unwrap();
    let (_, gt, det) = motio::read_sequence(dir.path()).unwrap();
    assert_eq!(gt.len(), seq.gt.len());
    assert_eq!(det.len(), seq.det.len());
    for (a, b) in gt.iter().zip(&seq.gt) {
        assert_eq!(
            (a.frame, a.object_id, a.class),
            (b.frame, b.object_id, b.class)
        );
        for (x, y) in [
            (a.bbox.left, b.bbox.left),
            (a.bbox.top, b.bbox.top),
            (a.bbox.width, b.bbox.width),
            (a.bbox.height, b.bbox.height),
            (a.visibility, b.visibility),
        ] {
            assert!((x - y).abs() <= 0.005 + 1e-9, "{x} vs {y}");
        }
    }
    // rewriting what was read is a fixed point
    let again = tempfile::tempdir().unwrap();
    motio::write_sequence(again.path(), &seq.meta, &gt, &det).unwrap();
    for f in ["gt/gt.txt", "det/det.txt", "seqinfo.ini"] {
        assert_eq!(
            std::fs::read(dir.path().join(f)).unwrap(),
            std::fs::read(again.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn writing_is_byte_deterministic() {
    let cfg = ScenarioConfig {
        cameras: 2,
        duration_s: 2.0,
        ..ScenarioConfig::default()
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (out, s) in [
        (&a, simulate_scenario(&cfg).unwrap()),
        (&b, simulate_scenario(&cfg).unwrap()),
    ] {
        for seq in s {
            motio::write_sequence(
                &out.path().join(&seq.meta.name),
                &seq.meta,
                &seq.gt,
                &seq.det,
            )
            .unwrap();
        }
    }
    for name in ["square-sun-n20-s1-cam1", "square-sun-n20-s1-cam2"] {
        for f in ["gt/gt.txt", "det/det.txt", "seqinfo.ini"] {
            let p = Path::new(name).join(f);
            assert_eq!(
                std::fs::read(a.path().join(&p)).unwrap(),
                std::fs::read(b.path().join(&p)).unwrap()
            );
        }
    }
}

#[test]
fn missing_file_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    match motio::read_sequence(dir.path()) {
        Err(MotError::Missing(p)) => assert!(p.ends_with("seqinfo.ini")),
        other => panic!("{other:?}"),
    }
    let meta = SequenceMeta::new("x", 25, 3);
    std::fs::write(dir.path().join("seqinfo.ini"), meta.to_ini()).unwrap();
    match motio::read_sequence(dir.path()) {
        Err(MotError::Missing(p)) => assert!(p.ends_with("gt.txt")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn short_line_names_file_and_line() {
    let text = "1,1,10.00,10.00,5.00,5.00,1,1,1.00\n1,2,3,4,5\n";
    match motio::parse_gt(text, Path::new("gt.txt")) {
        Err(MotError::Parse {
            file,
            line,
            message,
        }) => {
            assert_eq!(file, Path::new("gt.txt"));
            assert_eq!(line, 2);
            assert!(message.contains('5'), "{message}");
        }
        other => panic!("{other:?}"),
    }
    let e = motio::parse_det("1,-1,1,1,1\n", Path::new("det.txt")).unwrap_err();
    assert!(matches!(e, MotError::Parse { line: 1, .. }));
}

#[test]
fn unsorted_gt_is_rejected() {
    let text = "2,1,0,0,5,5,1,1,1\n1,1,0,0,5,5,1,1,1\n";
    assert!(matches!(
        motio::parse_gt(text, Path::new("gt.txt")),
        Err(MotError::Parse { line: 2, .. })
    ));
}
