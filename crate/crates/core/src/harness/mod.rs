//! Pipeline orchestration behind the command-line tool: generation,
//! tracking, evaluation, sweeps and reports.

pub mod config;
pub mod report;
pub mod scenario;
pub mod sweep;

use std::path::Path;

use thiserror::Error;

pub use config::{ModelParams, ScenarioConfig, SweepConfig};
pub use report::{summarize, write_report, GroupBy};
pub use scenario::{detection_rng, run_scenario, simulate_scenario, GeneratedSequence};
pub use sweep::{read_results, run_sweep, thread_count, write_results, ResultRow};

use crate::keyval::KeyValError;
use crate::metrics::{evaluate_sequence, MetricsReport, DEFAULT_IOU_MIN};
use crate::motio::{self, by_frame, MotError, SequenceMeta};
use crate::sensor::SensorError;
use crate::sim::SimError;
use crate::tracking::{run_tracker, tracks_to_hypotheses, TrackError, TrackerKind, TrackerParams};
use crate::traffic::TrafficError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl HarnessError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Io(_) => 3,
        }
    }
}

impl From<KeyValError> for HarnessError {
    fn from(e: KeyValError) -> Self {
        HarnessError::Config(e.to_string())
    }
}

impl From<SimError> for HarnessError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Io(m) => HarnessError::Io(m),
            other => HarnessError::Config(other.to_string()),
        }
    }
}

impl From<TrafficError> for HarnessError {
    fn from(e: TrafficError) -> Self {
        match e {
            TrafficError::Io(m) => HarnessError::Io(m),
            other => HarnessError::Config(other.to_string()),
        }
    }
}

impl From<SensorError> for HarnessError {
    fn from(e: SensorError) -> Self {
        HarnessError::Config(e.to_string())
    }
}

impl From<TrackError> for HarnessError {
    fn from(e: TrackError) -> Self {
        HarnessError::Config(e.to_string())
    }
}

impl From<MotError> for HarnessError {
    fn from(e: MotError) -> Self {
        match e {
            MotError::Io { .. } | MotError::Missing(_) => HarnessError::Io(e.to_string()),
            other => HarnessError::Config(other.to_string()),
        }
    }
}

/// Runs a tracker on `dir/det/det.txt` and writes the hypothesis to `out`.
pub fn track_dir(
    dir: &Path,
    tracker: TrackerKind,
    params: &TrackerParams,
    out: &Path,
) -> Result<usize, HarnessError> {
    let meta = motio::read_meta(dir)?;
    let det = motio::read_det_file(&dir.join("det").join("det.txt"))?;
    let frames = by_frame(&det, |d| d.frame, meta.seq_length);
    let tracks = run_tracker(tracker, &frames, params)?;
    motio::write_gt_file(out, &tracks_to_hypotheses(&tracks))?;
    Ok(tracks.len())
}

/// Evaluates a hypothesis file against `dir/gt/gt.txt`.
pub fn evaluate_file(dir: &Path, hyp: &Path) -> Result<MetricsReport, HarnessError> {
    let gt = motio::read_gt_file(&dir.join("gt").join("gt.txt"))?;
    let hyp = motio::read_gt_file(hyp)?;
    Ok(evaluate_sequence(&gt, &hyp, DEFAULT_IOU_MIN))
}

/// Tracks a sequence directory (writing `hyp/<tracker>.txt`) and evaluates it.
pub fn evaluate_dir(
    dir: &Path,
    tracker: TrackerKind,
    params: &TrackerParams,
) -> Result<(MetricsReport, SequenceMeta), HarnessError> {
    let hyp = dir.join("hyp").join(format!("{tracker}.txt"));
    track_dir(dir, tracker, params, &hyp)?;
    let report = evaluate_file(dir, &hyp)?;
    Ok((report, motio::read_meta(dir)?))
}
