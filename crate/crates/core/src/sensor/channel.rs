//! Weather-conditioned detection channel: misses, box jitter and false
//! positives applied to ground truth.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

use super::{Detection, GtEntry, SensorError};
use crate::bbox::BBox2D;

/// Confidence attached to detections that come from a ground-truth object.
pub const TRUE_CONFIDENCE: f64 = 1.0;
/// Confidence attached to injected false positives.
pub const FALSE_POSITIVE_CONFIDENCE: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Weather {
    Sun,
    Rain,
    Fog,
    Snow,
}

impl Weather {
    pub const ALL: [Weather; 4] = [Weather::Sun, Weather::Rain, Weather::Fog, Weather::Snow];

    pub fn as_str(&self) -> &'static str {
        match self {
            Weather::Sun => "sun",
            Weather::Rain => "rain",
            Weather::Fog => "fog",
            Weather::Snow => "snow",
        }
    }
}

impl fmt::Display for Weather {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Weather {
    type Err = SensorError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sun" => Ok(Weather::Sun),
            "rain" => Ok(Weather::Rain),
            "fog" => Ok(Weather::Fog),
            "snow" => Ok(Weather::Snow),
            _ => Err(SensorError::Weather(format!("unknown weather `{s}`"))),
        }
    }
}

/// Parameters of the detection channel for one weather condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeatherModel {
    pub weather: Weather,
    /// Miss probability independent of geometry.
    pub base_miss: f64,
    /// Standard deviation of center and size jitter, in pixels.
    pub jitter_std: f64,
    /// Expected false positives per frame.
    pub fp_rate: f64,
    /// Distance attenuation scale in meters; `INFINITY` disables it.
    pub fog_beta: f64,
}

impl WeatherModel {
    /// Calibrated default channel for each weather. These are tuning values
    /// for the synthetic detector, not measurements; override them in the
    /// scenario config.
    pub fn preset(weather: Weather) -> Self {
        let (base_miss, jitter_std, fp_rate, fog_beta) = match weather {
            Weather::Sun => (0.01, 0.5, 0.01, f64::INFINITY),
            Weather::Rain => (0.05, 1.5, 0.05, f64::INFINITY),
            Weather::Fog => (0.03, 1.0, 0.03, 400.0),
            Weather::Snow => (0.08, 2.0, 0.10, f64::INFINITY),
        };
        Self {
            weather,
            base_miss,
            jitter_std,
            fp_rate,
            fog_beta,
        }
    }

    /// Channel without base misses, fog, jitter or false positives. Fully
    /// visible boxes pass unchanged; occluded ones can still be missed.
    pub fn identity(weather: Weather) -> Self {
        Self {
            weather,
            base_miss: 0.0,
            jitter_std: 0.0,
            fp_rate: 0.0,
            fog_beta: f64::INFINITY,
        }
    }

    pub fn validate(&self) -> Result<(), SensorError> {
        if !(0.0..=1.0).contains(&self.base_miss) {
            return Err(SensorError::Weather("base_miss must be in [0, 1]".into()));
        }
        if !(self.jitter_std >= 0.0 && self.jitter_std.is_finite()) {
            return Err(SensorError::Weather("jitter_std must be >= 0".into()));
        }
        if !(self.fp_rate >= 0.0 && self.fp_rate.is_finite()) {
            return Err(SensorError::Weather("fp_rate must be >= 0".into()));
        }
        if !(self.fog_beta > 0.0) {
            return Err(SensorError::Weather("fog_beta must be > 0".into()));
        }
        Ok(())
    }

    /// Probability that the detector misses `entry`.
    pub fn miss_probability(&self, entry: &GtEntry) -> f64 {
        let fog = if self.fog_beta.is_finite() {
            1.0 - (-entry.depth.max(0.0) / self.fog_beta).exp()
        } else {
            0.0
        };
        (self.base_miss + fog + 0.5 * (1.0 - entry.visibility)).min(1.0)
    }
}

/// Where a synthesized detection came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Object(u32),
    FalsePositive,
}

fn jitter<R: Rng + ?Sized>(b: &BBox2D, std: f64, rng: &mut R) -> BBox2D {
    if std == 0.0 {
        return *b;
    }
    let n = Normal::new(0.0, std).expect("finite std");
    let (cx, cy) = b.center();
    let cx = cx + n.sample(rng);
    let cy = cy + n.sample(rng);
    let w = (b.width + n.sample(rng)).max(1.0);
    let h = (b.height + n.sample(rng)).max(1.0);
    BBox2D::from_center(cx, cy, w, h)
}

/// Detections for one frame, each tagged with its origin.
///
/// Every entry is kept with probability `1 - miss_probability`; survivors are
/// jittered. A Poisson(`fp_rate`) number of false positives with plausible
/// pedestrian-shaped boxes is appended.
pub fn synthesize_detections_traced<R: Rng + ?Sized>(
    frame: u32,
    gt_frame: &[GtEntry],
    weather: &WeatherModel,
    image: (f64, f64),
    rng: &mut R,
) -> Vec<(Detection, Origin)> {
    let mut out = Vec::with_capacity(gt_frame.len() + 1);
    for e in gt_frame {
        let p_miss = weather.miss_probability(e);
        if rng.random::<f64>() < p_miss {
            continue;
        }
        let det = Detection {
            frame,
            bbox: jitter(&e.bbox, weather.jitter_std, rng),
            conf: TRUE_CONFIDENCE,
        };
        out.push((det, Origin::Object(e.object_id)));
    }
    if weather.fp_rate > 0.0 {
        let count = Poisson::new(weather.fp_rate)
            .expect("positive rate")
            .sample(rng) as usize;
        let (width, height) = image;
        for _ in 0..count {
            let h = rng.random_range(30.0..150.0f64).min(height);
            let w = (h * rng.random_range(0.35..0.5)).min(width);
            let left = rng.random_range(0.0..=(width - w));
            let top = rng.random_range(0.0..=(height - h));
            let det = Detection {
                frame,
                bbox: BBox2D::new(left, top, w, h),
                conf: FALSE_POSITIVE_CONFIDENCE,
            };
            out.push((det, Origin::FalsePositive));
        }
    }
    out
}

/// Detections for one frame (origins dropped).
pub fn synthesize_detections<R: Rng + ?Sized>(
    frame: u32,
    gt_frame: &[GtEntry],
    weather: &WeatherModel,
    image: (f64, f64),
    rng: &mut R,
) -> Vec<Detection> {
    synthesize_detections_traced(frame, gt_frame, weather, image, rng)
        .into_iter()
        .map(|(d, _)| d)
        .collect()
}

/// Randomly drops detections and duplicates survivors with a 1 px jitter.
pub fn perturb_detections<R: Rng + ?Sized>(
    dets: &[Detection],
    drop_prob: f64,
    dup_prob: f64,
    rng: &mut R,
) -> Result<Vec<Detection>, SensorError> {
    if !(0.0..=1.0).contains(&drop_prob) || !(0.0..=1.0).contains(&dup_prob) {
        return Err(SensorError::Weather(
            "perturbation probabilities must be in [0, 1]".into(),
        ));
    }
    let mut out = Vec::with_capacity(dets.len());
    for d in dets {
        let dropped = rng.random::<f64>() < drop_prob;
        let duplicated = rng.random::<f64>() < dup_prob;
        if dropped {
            continue;
        }
        out.push(*d);
        if duplicated {
            out.push(Detection {
                bbox: jitter(&d.bbox, 1.0, rng),
                ..*d
            });
        }
    }
    Ok(out)
}
