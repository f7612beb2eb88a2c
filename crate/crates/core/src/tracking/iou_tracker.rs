//! IOU tracker: greedy frame-to-frame linking by box overlap, no motion model.

use super::{Track, TrackError};
use crate::bbox::{iou, BBox2D};
use crate::sensor::Detection;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IouParams {
    /// Detections below this confidence are ignored.
    pub sigma_l: f64,
    /// A finished track is kept only if its best confidence reaches this.
    pub sigma_h: f64,
    pub sigma_iou: f64,
    pub t_min: usize,
}

impl Default for IouParams {
    fn default() -> Self {
        Self {
            sigma_l: 0.0,
            sigma_h: 0.5,
            sigma_iou: 0.5,
            t_min: 2,
        }
    }
}

impl IouParams {
    pub fn validate(&self) -> Result<(), TrackError> {
        for (name, v) in [
            ("sigma_l", self.sigma_l),
            ("sigma_h", self.sigma_h),
            ("sigma_iou", self.sigma_iou),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(TrackError::Params(format!(
                    "{name} must be in [0, 1], got {v}"
                )));
            }
        }
        if self.t_min < 1 {
            return Err(TrackError::Params("t_min must be >= 1".into()));
        }
        Ok(())
    }
}

struct Open {
    created: usize,
    boxes: Vec<(u32, BBox2D)>,
    max_conf: f64,
}

/// Runs the tracker over `frames`, where `frames[k]` holds the detections of
/// frame `k + 1`. Kept tracks are numbered from 1 in creation order.
pub fn track_iou(frames: &[Vec<Detection>], params: &IouParams) -> Vec<Track> {
    let keep = |t: &Open| t.max_conf >= params.sigma_h && t.boxes.len() >= params.t_min;
    let mut active: Vec<Open> = Vec::new();
    let mut finished: Vec<Open> = Vec::new();
    let mut created = 0;
    for (k, dets) in frames.iter().enumerate() {
        let frame = k as u32 + 1;
        let mut pool: Vec<Option<&Detection>> = dets
            .iter()
            .filter(|d| d.conf >= params.sigma_l)
            .map(Some)
            .collect();
        let mut still_active = Vec::with_capacity(active.len());
        for mut t in active.drain(..) {
            let last = t.boxes.last().expect("tracks are never empty").1;
            let mut best: Option<(usize, f64)> = None;
            for (i, d) in pool.iter().enumerate() {
                let Some(d) = d else { continue };
                let o = iou(&last, &d.bbox);
                if best.is_none_or(|(_, b)| o > b) {
                    best = Some((i, o));
                }
            }
            match best {
                Some((i, o)) if o >= params.sigma_iou => {
                    let d = pool[i].take().expect("slot checked above");
                    t.boxes.push((frame, d.bbox));
                    t.max_conf = t.max_conf.max(d.conf);
                    still_active.push(t);
                }
                _ => {
                    if keep(&t) {
                        finished.push(t);
                    }
                }
            }
        }
        for d in pool.into_iter().flatten() {
            still_active.push(Open {
                created,
                boxes: vec![(frame, d.bbox)],
                max_conf: d.conf,
            });
            created += 1;
        }
        active = still_active;
    }
    finished.extend(active.into_iter().filter(|t| keep(t)));
    finished.sort_by_key(|t| t.created);
    finished
        .into_iter()
        .enumerate()
        .map(|(i, t)| Track {
            hyp_id: i as u32 + 1,
            boxes: t.boxes,
            max_conf: t.max_conf,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(frame: u32, x: f64, conf: f64) -> Detection {
        Detection {
            frame,
            bbox: BBox2D::new(x, 100.0, 40.0, 100.0),
            conf,
        }
    }

    fn stream(n: u32, skip: Option<u32>) -> Vec<Vec<Detection>> {
        (1..=n)
            .map(|f| {
                if Some(f) == skip {
                    vec![]
                } else {
                    vec![det(f, 100.0 + f as f64, 1.0)]
                }
            })
            .collect()
    }

    #[test]
    fn perfect_single_object() {
        let tracks = track_iou(&stream(50, None), &IouParams::default());
        assert_eq!(tracks.len(), 1);
        assert_eq!(tracks[0].boxes.len(), 50);
        assert_eq!(tracks[0].hyp_id, 1);
    }

    #[test]
    fn one_frame_gap_splits_the_track() {
        let tracks = track_iou(&stream(20, Some(10)), &IouParams::default());
        assert_eq!(tracks.len(), 2);
        assert_eq!(tracks[0].boxes.len(), 9);
        assert_eq!(tracks[1].boxes.len(), 10);
        assert_eq!(tracks[1].boxes[0].0, 11);
    }

    #[test]
    fn low_confidence_tracks_are_dropped() {
        let frames: Vec<_> = (1..=10).map(|f| vec![det(f, 0.0, 0.3)]).collect();
        assert!(track_iou(&frames, &IouParams::default()).is_empty());
    }

    #[test]
    fn short_tracks_are_dropped() {
        let frames = vec![vec![det(1, 0.0, 1.0)], vec![det(2, 400.0, 1.0)]];
        assert!(track_iou(&frames, &IouParams::default()).is_empty());
    }

    #[test]
    fn tie_goes_to_lower_detection_index() {
        // two identical candidates: the first one continues the track
        let frames = vec![
            vec![det(1, 0.0, 1.0)],
            vec![det(2, 0.0, 0.9), det(2, 0.0, 0.8)],
        ];
        let tracks = track_iou(
            &frames,
            &IouParams {
                t_min: 1,
                ..IouParams::default()
            },
        );
        assert_eq!(tracks.len(), 2);
        assert_eq!(tracks[0].boxes.len(), 2);
        assert_eq!(tracks[0].max_conf, 1.0);
        assert_eq!(tracks[1].max_conf, 0.8);
    }
}
