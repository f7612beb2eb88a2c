//! SORT: Kalman prediction plus Hungarian association on IOU.

use super::hungarian::solve_assignment;
use super::kalman::KalmanBoxState;
use super::{Track, TrackError};
use crate::bbox::{iou, BBox2D};
use crate::sensor::Detection;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SortParams {
    pub iou_threshold: f64,
    /// Tracks are deleted after more than this many consecutive misses.
    pub max_age: u32,
    /// Consecutive hits before a track's boxes are emitted.
    pub min_hits: u32,
}

impl Default for SortParams {
    fn default() -> Self {
        Self {
            iou_threshold: 0.3,
            max_age: 3,
            min_hits: 3,
        }
    }
}

impl SortParams {
    pub fn validate(&self) -> Result<(), TrackError> {
        if !(0.0..=1.0).contains(&self.iou_threshold) {
            return Err(TrackError::Params(format!(
                "iou_threshold must be in [0, 1], got {}",
                self.iou_threshold
            )));
        }
        Ok(())
    }
}

struct Live {
    created: usize,
    kf: KalmanBoxState,
    hit_streak: u32,
    time_since_update: u32,
    emitted: Vec<(u32, BBox2D)>,
    max_conf: f64,
}

/// Runs SORT over `frames` (`frames[k]` holds frame `k + 1`). Tracks that
/// emitted at least one box are numbered from 1 in creation order.
pub fn track_sort(frames: &[Vec<Detection>], params: &SortParams) -> Vec<Track> {
    let mut live: Vec<Live> = Vec::new();
    let mut done: Vec<Live> = Vec::new();
    let mut created = 0;
    for (k, dets) in frames.iter().enumerate() {
        let frame = k as u32 + 1;
        let predicted: Vec<BBox2D> = live
            .iter_mut()
            .map(|t| {
                t.kf.predict();
                if t.time_since_update > 0 {
                    t.hit_streak = 0;
                }
                t.time_since_update += 1;
                t.kf.bbox()
            })
            .collect();

        let mut det_taken = vec![false; dets.len()];
        if !predicted.is_empty() && !dets.is_empty() {
            let overlaps: Vec<Vec<f64>> = dets
                .iter()
                .map(|d| predicted.iter().map(|p| iou(&d.bbox, p)).collect())
                .collect();
            let cost: Vec<Vec<f64>> = overlaps
                .iter()
                .map(|r| r.iter().map(|o| 1.0 - o).collect())
                .collect();
            for (di, ti) in solve_assignment(&cost) {
                if overlaps[di][ti] < params.iou_threshold {
                    continue;
                }
                let d = &dets[di];
                let t = &mut live[ti];
                t.kf.update(&d.bbox);
                t.time_since_update = 0;
                t.hit_streak += 1;
                t.max_conf = t.max_conf.max(d.conf);
                det_taken[di] = true;
            }
        }
        for (d, _) in dets.iter().zip(&det_taken).filter(|(_, taken)| !**taken) {
            live.push(Live {
                created,
                kf: KalmanBoxState::new(&d.bbox),
                hit_streak: 1,
                time_since_update: 0,
                emitted: Vec::new(),
                max_conf: d.conf,
            });
            created += 1;
        }
        let mut kept = Vec::with_capacity(live.len());
        for mut t in live.drain(..) {
            if t.time_since_update == 0 && t.hit_streak >= params.min_hits {
                t.emitted.push((frame, t.kf.bbox()));
            }
            if t.time_since_update > params.max_age {
                done.push(t);
            } else {
                kept.push(t);
            }
        }
        live = kept;
    }
    done.extend(live);
    done.retain(|t| !t.emitted.is_empty());
    done.sort_by_key(|t| t.created);
    done.into_iter()
        .enumerate()
        .map(|(i, t)| Track {
            hyp_id: i as u32 + 1,
            boxes: t.emitted,
            max_conf: t.max_conf,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(n: u32, skip: &[u32]) -> Vec<Vec<Detection>> {
        (1..=n)
            .map(|f| {
                if skip.contains(&f) {
                    vec![]
                } else {
                    vec![Detection {
                        frame: f,
                        bbox: BBox2D::new(100.0 + 2.0 * f as f64, 100.0, 40.0, 100.0),
                        conf: 1.0,
                    }]
                }
            })
            .collect()
    }

    #[test]
    fn perfect_single_object() {
        let p = SortParams::default();
        let tracks = track_sort(&stream(30, &[]), &p);
        assert_eq!(tracks.len(), 1);
        assert_eq!(tracks[0].boxes.len(), 30 - (p.min_hits as usize - 1));
        assert_eq!(tracks[0].boxes[0].0, p.min_hits);
    }

    #[test]
    fn empty_stream_has_no_tracks() {
        assert!(track_sort(&vec![Vec::new(); 20], &SortParams::default()).is_empty());
    }

    #[test]
    fn gap_keeps_identity() {
        let tracks = track_sort(&stream(30, &[12]), &SortParams::default());
        assert_eq!(tracks.len(), 1);
        let frames: Vec<u32> = tracks[0].boxes.iter().map(|b| b.0).collect();
        assert!(!frames.contains(&12));
        assert!(frames.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*frames.last().unwrap(), 30);
    }

    #[test]
    fn long_gap_starts_a_new_track() {
        let tracks = track_sort(&stream(30, &[10, 11, 12, 13, 14]), &SortParams::default());
        assert_eq!(tracks.len(), 2);
    }
}
