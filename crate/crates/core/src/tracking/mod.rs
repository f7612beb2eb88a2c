//! Tracking-by-detection: the IOU tracker and SORT.

pub mod hungarian;
pub mod iou_tracker;
pub mod kalman;
pub mod sort;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use hungarian::solve_assignment;
pub use iou_tracker::{track_iou, IouParams};
pub use kalman::{kalman_step, KalmanBoxState};
pub use sort::{track_sort, SortParams};

use crate::bbox::BBox2D;
use crate::sensor::{GtEntry, ObjectClass};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrackError {
    #[error("tracker parameters: {0}")]
    Params(String),
    #[error("unknown tracker `{0}` (expected iou or sort)")]
    Unknown(String),
}

/// One hypothesis identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub hyp_id: u32,
    /// `(frame, box)` with strictly increasing frames.
    pub boxes: Vec<(u32, BBox2D)>,
    pub max_conf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TrackerKind {
    Iou,
    Sort,
}

impl TrackerKind {
    pub const ALL: [TrackerKind; 2] = [TrackerKind::Iou, TrackerKind::Sort];

    pub fn as_str(&self) -> &'static str {
        match self {
            TrackerKind::Iou => "iou",
            TrackerKind::Sort => "sort",
        }
    }
}

impl fmt::Display for TrackerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TrackerKind {
    type Err = TrackError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "iou" => Ok(TrackerKind::Iou),
            "sort" => Ok(TrackerKind::Sort),
            _ => Err(TrackError::Unknown(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrackerParams {
    pub iou: IouParams,
    pub sort: SortParams,
}

pub fn run_tracker(
    kind: TrackerKind,
    frames: &[Vec<crate::sensor::Detection>],
    params: &TrackerParams,
) -> Result<Vec<Track>, TrackError> {
    Ok(match kind {
        TrackerKind::Iou => {
            params.iou.validate()?;
            track_iou(frames, &params.iou)
        }
        TrackerKind::Sort => {
            params.sort.validate()?;
            track_sort(frames, &params.sort)
        }
    })
}

/// Tracks as hypothesis records (class 1, visibility 1), sorted by
/// `(frame, id)`.
pub fn tracks_to_hypotheses(tracks: &[Track]) -> Vec<GtEntry> {
    let mut out: Vec<GtEntry> = tracks
        .iter()
        .flat_map(|t| {
            t.boxes.iter().map(move |&(frame, bbox)| GtEntry {
                frame,
                object_id: t.hyp_id,
                bbox,
                class: ObjectClass::Pedestrian,
                visibility: 1.0,
                depth: 0.0,
            })
        })
        .collect();
    out.sort_by_key(|e| (e.frame, e.object_id));
    out
}
