use crowdsim_core::bbox::BBox2D;
use crowdsim_core::harness::{simulate_scenario, ScenarioConfig};
use crowdsim_core::motio::by_frame;
use crowdsim_core::sensor::{Detection, Weather};
use crowdsim_core::tracking::{
    kalman_step, run_tracker, solve_assignment, track_iou, track_sort, IouParams, KalmanBoxState,
    SortParams, TrackerKind, TrackerParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Minimum total cost over all assignments of `min(n, m)` pairs.
fn brute_force(cost: &[Vec<f64>]) -> f64 {
    fn go(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>, left: usize) -> f64 {
        if left == 0 {
            return 0.0;
        }
        let n = cost.len();
        if n - row < left {
            return f64::INFINITY;
        }
        // skip this row only when more rows remain than pairs needed
        let mut best = go(cost, row + 1, used, left);
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                best = best.min(cost[row][j] + go(cost, row + 1, used, left - 1));
                used[j] = false;
            }
        }
        best
    }
    let m = cost[0].len();
    go(cost, 0, &mut vec![false; m], cost.len().min(m))
}

fn check(cost: &[Vec<f64>]) {
    let pairs = solve_assignment(cost);
    let (n, m) = (cost.len(), cost[0].len());
    assert_eq!(pairs.len(), n.min(m));
    let mut rows: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    let mut cols: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    rows.dedup();
    cols.sort_unstable();
    cols.dedup();
    assert_eq!(
        (rows.len(), cols.len()),
        (pairs.len(), pairs.len()),
        "not a matching"
    );
    let total: f64 = pairs.iter().map(|&(i, j)| cost[i][j]).sum();
    let best = brute_force(cost);
    assert!(
        (total - best).abs() < 1e-9,
        "{n}x{m}: {total} vs optimum {best}"
    );
}

#[test]
fn hungarian_matches_brute_force_for_every_shape() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 1..=6 {
        for m in 1..=6 {
            for _ in 0..5 {
                let cost: Vec<Vec<f64>> = (0..n)
                    .map(|_| (0..m).map(|_| rng.random::<f64>()).collect())
                    .collect();
                check(&cost);
            }
        }
    }
}

#[test]
fn hungarian_matches_brute_force_on_random_square_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in 0..100 {
        let cost: Vec<Vec<f64>> = (0..6)
            .map(|_| {
                (0..6)
                    .map(|_| {
                        // every fourth matrix uses small integers to force ties
                        if k % 4 == 0 {
                            rng.random_range(0..3) as f64
                        } else {
                            rng.random_range(-5.0..5.0)
                        }
                    })
                    .collect()
            })
            .collect();
        check(&cost);
    }
}

fn speed(kf: &KalmanBoxState) -> f64 {
    let (du, dv) = kf.velocity();
    du.hypot(dv)
}

#[test]
fn kalman_velocity_settles_on_fixed_measurement() {
    let target = BBox2D::new(130.0, 90.0, 44.0, 96.0);
    // started on the measurement, and started off by up to jitter-sized offsets
    for offset in [0.0, 1.0, 2.0, 3.0] {
        let mut kf = KalmanBoxState::new(&BBox2D::new(130.0 - offset, 90.0 + offset, 44.0, 96.0));
        for _ in 0..50 {
            kf = kalman_step(&kf, Some(&target));
        }
        assert!(
            speed(&kf) < 1e-3,
            "offset {offset}: velocity {:?}",
            kf.velocity()
        );
        let (cu, cv) = kf.bbox().center();
        assert!((cu - 152.0).abs() < 1e-2 && (cv - 138.0).abs() < 1e-2);
        assert!((kf.p - kf.p.transpose()).abs().max() < 1e-9);
        assert!((0..7).all(|i| kf.p[(i, i)] > 0.0));
    }
}

#[test]
fn kalman_velocity_decays_geometrically_after_a_jump() {
    let target = BBox2D::new(130.0, 90.0, 44.0, 96.0);
    let mut kf = KalmanBoxState::new(&BBox2D::new(100.0, 100.0, 40.0, 100.0));
    let mut mags = Vec::new();
    for _ in 0..80 {
        kf = kalman_step(&kf, Some(&target));
        mags.push(speed(&kf));
    }
    // once the transient is over each step shrinks the velocity by a constant factor
    for w in mags[20..].windows(2) {
        assert!(w[1] < 0.93 * w[0], "{} -> {}", w[0], w[1]);
    }
    assert!(mags[79] < 1e-3);
}

#[test]
fn kalman_tracks_constant_velocity() {
    let mut kf = KalmanBoxState::new(&BBox2D::new(0.0, 0.0, 20.0, 50.0));
    for t in 1..=40 {
        kf = kalman_step(
            &kf,
            Some(&BBox2D::new(3.0 * t as f64, -(t as f64), 20.0, 50.0)),
        );
    }
    let (du, dv) = kf.velocity();
    assert!(
        (du - 3.0).abs() < 0.05 && (dv + 1.0).abs() < 0.05,
        "({du}, {dv})"
    );
    // coasting extrapolates
    let coast = kalman_step(&kf, None);
    assert!((coast.bbox().left - 123.0).abs() < 0.5);
}

/// `k` objects moving right in separate horizontal lanes.
fn lanes(k: usize, frames: u32) -> Vec<Vec<Detection>> {
    (1..=frames)
        .map(|f| {
            (0..k)
                .map(|i| Detection {
                    frame: f,
                    bbox: BBox2D::new(10.0 + 2.0 * f as f64, 20.0 + 110.0 * i as f64, 40.0, 100.0),
                    conf: 1.0,
                })
                .collect()
        })
        .collect()
}

#[test]
fn clean_lanes_give_one_track_per_object() {
    let frames = lanes(5, 60);
    let iou = track_iou(&frames, &IouParams::default());
    assert_eq!(iou.len(), 5);
    assert!(iou.iter().all(|t| t.boxes.len() == 60));
    let sort = track_sort(&frames, &SortParams::default());
    assert_eq!(sort.len(), 5);
    let min_hits = SortParams::default().min_hits as usize;
    assert!(sort.iter().all(|t| t.boxes.len() == 60 - (min_hits - 1)));
    for t in &sort {
        let lane = ((t.boxes[0].1.top - 20.0) / 110.0).round();
        assert!(t
            .boxes
            .iter()
            .all(|(_, b)| ((b.top - 20.0) / 110.0).round() == lane));
        assert!(t.boxes.windows(2).all(|w| w[1].0 == w[0].0 + 1));
    }
}

#[test]
fn trackers_are_deterministic_on_noisy_input() {
    let cfg = ScenarioConfig {
        cameras: 1,
        n_pedestrians: 60,
        weather: Weather::Snow,
        duration_s: 10.0,
        ..ScenarioConfig::default()
    };
    let seq = simulate_scenario(&cfg).unwrap().remove(0);
    let frames = by_frame(&seq.det, |d| d.frame, seq.meta.seq_length);
    for kind in TrackerKind::ALL {
        let a = run_tracker(kind, &frames, &TrackerParams::default()).unwrap();
        let b = run_tracker(kind, &frames, &TrackerParams::default()).unwrap();
        assert_eq!(a, b);
        let ids: Vec<u32> = a.iter().map(|t| t.hyp_id).collect();
        assert_eq!(ids, (1..=a.len() as u32).collect::<Vec<_>>(), "{kind}");
    }
}

#[test]
fn invalid_parameters_are_rejected() {
    let params = TrackerParams {
        iou: IouParams {
            sigma_iou: 1.5,
            ..IouParams::default()
        },
        ..TrackerParams::default()
    };
    assert!(run_tracker(TrackerKind::Iou, &[], &params).is_err());
    assert!(run_tracker(TrackerKind::Sort, &[], &params).is_ok());
}
