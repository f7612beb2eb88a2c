//! Scenario and sweep configuration files.
//!
//! Both use the `key = value` grammar of [`crate::keyval`]. Lists are comma
//! separated. Model parameters are overridden with dotted keys:
//!
//! ```text
//! weather.snow.base_miss = 0.1      # base_miss, jitter_std, fp_rate, fog_beta (inf allowed)
//! sim.p_ignore = 0.3                # tau, repulsion_a, repulsion_b, interaction_range,
//!                                   # waypoint_tolerance, sidestep, p_ignore, ignore_memory_s
//! traffic.max_cars = 4              # any TrafficParams field
//! camera.fx = 900                   # fx, fy, cx, cy
//! iou.sigma_iou = 0.4               # sweeps only: sigma_l, sigma_h, sigma_iou, t_min
//! sort.max_age = 1                  # sweeps only: iou_threshold, max_age, min_hits
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::HarnessError;
use crate::keyval::{self, Entry, KeyValError};
use crate::sensor::{Intrinsics, Weather, WeatherModel};
use crate::sim::SimParams;
use crate::tracking::{TrackerKind, TrackerParams};
use crate::traffic::TrafficParams;

pub const MAX_PEDESTRIANS: usize = 160;
pub const MAX_CAMERAS: usize = 3;

/// Model parameters shared by scenario and sweep configs.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub weathers: BTreeMap<Weather, WeatherModel>,
    pub sim: SimParams,
    pub traffic: TrafficParams,
    pub intrinsics: Intrinsics,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            weathers: Weather::ALL
                .iter()
                .map(|w| (*w, WeatherModel::preset(*w)))
                .collect(),
            sim: SimParams::default(),
            traffic: TrafficParams::default(),
            intrinsics: Intrinsics::default(),
        }
    }
}

fn float(e: &Entry) -> Result<f64, KeyValError> {
    let v: f64 = e.parse()?;
    if v.is_nan() {
        return Err(e.error("NaN is not allowed"));
    }
    Ok(v)
}

impl ModelParams {
    pub fn weather(&self, w: Weather) -> WeatherModel {
        self.weathers[&w]
    }

    /// Applies a dotted override; `Ok(false)` when the key is not a model key.
    fn apply(&mut self, e: &Entry) -> Result<bool, KeyValError> {
        let parts: Vec<&str> = e.key.split('.').collect();
        match parts[..] {
            ["weather", name, field] => {
                let w: Weather = name.parse().map_err(|err| e.error(err))?;
                let m = self.weathers.get_mut(&w).expect("all weathers present");
                match field {
                    "base_miss" => m.base_miss = float(e)?,
                    "jitter_std" => m.jitter_std = float(e)?,
                    "fp_rate" => m.fp_rate = float(e)?,
                    "fog_beta" => m.fog_beta = float(e)?,
                    _ => return Err(e.error("unknown weather field")),
                }
                m.validate().map_err(|err| e.error(err))?;
            }
            ["sim", field] => {
                let s = &mut self.sim;
                match field {
                    "tau" => s.steering.tau = float(e)?,
                    "repulsion_a" => s.steering.repulsion_a = float(e)?,
                    "repulsion_b" => s.steering.repulsion_b = float(e)?,
                    "interaction_range" => s.steering.interaction_range = float(e)?,
                    "waypoint_tolerance" => s.steering.waypoint_tolerance = float(e)?,
                    "sidestep" => s.steering.sidestep = float(e)?,
                    "p_ignore" => {
                        let p = float(e)?;
                        if !(0.0..=1.0).contains(&p) {
                            return Err(e.error("must be in [0, 1]"));
                        }
                        s.zones.p_ignore = p;
                    }
                    "ignore_memory_s" => s.zones.ignore_memory_s = float(e)?,
                    _ => return Err(e.error("unknown sim field")),
                }
                if !(s.steering.tau > 0.0) {
                    return Err(e.error("tau must be positive"));
                }
            }
            ["traffic", field] => {
                let t = &mut self.traffic;
                match field {
                    "park_probability" => t.park_probability = float(e)?,
                    "dwell_min_s" => t.dwell_min_s = float(e)?,
                    "dwell_max_s" => t.dwell_max_s = float(e)?,
                    "spawn_interval_s" => t.spawn_interval_s = float(e)?,
                    "max_cars" => t.max_cars = e.parse()?,
                    "slow_factor" => t.slow_factor = float(e)?,
                    "slow_radius" => t.slow_radius = float(e)?,
                    "ped_stop_radius" => t.ped_stop_radius = float(e)?,
                    "stop_margin" => t.stop_margin = float(e)?,
                    "min_gap" => t.min_gap = float(e)?,
                    _ => return Err(e.error("unknown traffic field")),
                }
                if !(0.0..=1.0).contains(&t.park_probability) || t.dwell_min_s > t.dwell_max_s {
                    return Err(e.error("inconsistent traffic parameters"));
                }
            }
            ["camera", field] => {
                let k = &mut self.intrinsics;
                match field {
                    "fx" => k.fx = float(e)?,
                    "fy" => k.fy = float(e)?,
                    "cx" => k.cx = float(e)?,
                    "cy" => k.cy = float(e)?,
                    _ => return Err(e.error("unknown camera field")),
                }
            }
            _ => return Ok(false),
        }
        Ok(true)
    }
}

fn apply_tracker(params: &mut TrackerParams, e: &Entry) -> Result<bool, KeyValError> {
    match e.key.as_str() {
        "iou.sigma_l" => params.iou.sigma_l = float(e)?,
        "iou.sigma_h" => params.iou.sigma_h = float(e)?,
        "iou.sigma_iou" => params.iou.sigma_iou = float(e)?,
        "iou.t_min" => params.iou.t_min = e.parse()?,
        "sort.iou_threshold" => params.sort.iou_threshold = float(e)?,
        "sort.max_age" => params.sort.max_age = e.parse()?,
        "sort.min_hits" => params.sort.min_hits = e.parse()?,
        _ => return Ok(false),
    }
    params.iou.validate().map_err(|err| e.error(err))?;
    params.sort.validate().map_err(|err| e.error(err))?;
    Ok(true)
}

fn read_config(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

fn frame_count(duration_s: f64, fps: u32) -> Result<u32, String> {
    if fps == 0 {
        return Err("fps must be positive".into());
    }
    let frames = duration_s * fps as f64;
    if !(duration_s > 0.0) || (frames - frames.round()).abs() > 1e-9 || frames.round() < 1.0 {
        return Err(format!(
            "duration_s * fps must be a positive integer, got {frames}"
        ));
    }
    Ok(frames.round() as u32)
}

/// One generation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub place: String,
    /// Number of cameras of the place to record, 1 to 3.
    pub cameras: usize,
    pub n_pedestrians: usize,
    pub enable_cars: bool,
    pub weather: Weather,
    pub duration_s: f64,
    pub fps: u32,
    pub seed: u64,
    /// Ground-truth boxes smaller than this (px²) are not emitted.
    pub min_area: f64,
    pub out_dir: PathBuf,
    pub model: ModelParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            place: "square".into(),
            cameras: 3,
            n_pedestrians: 20,
            enable_cars: true,
            weather: Weather::Sun,
            duration_s: 30.0,
            fps: 25,
            seed: 1,
            min_area: 0.0,
            out_dir: PathBuf::from("out"),
            model: ModelParams::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn n_frames(&self) -> u32 {
        frame_count(self.duration_s, self.fps).expect("validated config")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if !(1..=MAX_CAMERAS).contains(&self.cameras) {
            return bad(format!(
                "cameras must be 1..={MAX_CAMERAS}, got {}",
                self.cameras
            ));
        }
        if !(1..=MAX_PEDESTRIANS).contains(&self.n_pedestrians) {
            return bad(format!(
                "n_pedestrians must be 1..={MAX_PEDESTRIANS}, got {}",
                self.n_pedestrians
            ));
        }
        if !(self.min_area >= 0.0) {
            return bad("min_area must be >= 0".into());
        }
        frame_count(self.duration_s, self.fps).map_err(HarnessError::Config)?;
        Ok(())
    }

    /// Directory name of camera `k` (1-based).
    pub fn sequence_name(&self, place_name: &str, k: usize) -> String {
        format!(
            "{place_name}-{}-n{}-s{}-cam{k}",
            self.weather, self.n_pedestrians, self.seed
        )
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut cfg = ScenarioConfig::default();
        for e in keyval::parse(text)? {
            match e.key.as_str() {
                "place" => cfg.place = e.value.trim().to_string(),
                "cameras" => cfg.cameras = e.parse()?,
                "n_pedestrians" => cfg.n_pedestrians = e.parse()?,
                "enable_cars" => cfg.enable_cars = e.boolean()?,
                "weather" => cfg.weather = e.parse()?,
                "duration_s" => cfg.duration_s = float(&e)?,
                "fps" => cfg.fps = e.parse()?,
                "seed" => cfg.seed = e.parse()?,
                "min_area" => cfg.min_area = float(&e)?,
                "out_dir" => cfg.out_dir = PathBuf::from(e.value.trim()),
                _ => {
                    if !cfg.model.apply(&e)? {
                        return Err(e.error("unknown key").into());
                    }
                }
            }
        }
        cfg.model.sim.fps = cfg.fps;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::parse(&read_config(path)?)
    }
}

/// A factorial experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub places: Vec<String>,
    pub weathers: Vec<Weather>,
    pub densities: Vec<usize>,
    pub seeds: Vec<u64>,
    pub trackers: Vec<TrackerKind>,
    pub cameras: usize,
    pub enable_cars: bool,
    pub duration_s: f64,
    pub fps: u32,
    pub min_area: f64,
    /// Sequences go to `out_dir/sequences`.
    pub out_dir: PathBuf,
    /// Defaults to `out_dir/results.csv`.
    pub results: Option<PathBuf>,
    /// Worker threads; `None` uses all available cores.
    pub threads: Option<usize>,
    pub model: ModelParams,
    pub tracker_params: TrackerParams,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            places: vec!["square".into()],
            weathers: Weather::ALL.to_vec(),
            densities: vec![10, 40, 80, 120, 160],
            seeds: vec![1, 2, 3],
            trackers: TrackerKind::ALL.to_vec(),
            cameras: 1,
            enable_cars: true,
            duration_s: 30.0,
            fps: 25,
            min_area: 0.0,
            out_dir: PathBuf::from("sweep"),
            results: None,
            threads: None,
            model: ModelParams::default(),
            tracker_params: TrackerParams::default(),
        }
    }
}

impl SweepConfig {
    pub fn results_path(&self) -> PathBuf {
        self.results
            .clone()
            .unwrap_or_else(|| self.out_dir.join("results.csv"))
    }

    /// Scenario for one cell.
    pub fn scenario(
        &self,
        place: &str,
        weather: Weather,
        density: usize,
        seed: u64,
    ) -> ScenarioConfig {
        ScenarioConfig {
            place: place.to_string(),
            cameras: self.cameras,
            n_pedestrians: density,
            enable_cars: self.enable_cars,
            weather,
            duration_s: self.duration_s,
            fps: self.fps,
            seed,
            min_area: self.min_area,
            out_dir: self.out_dir.join("sequences"),
            model: self.model.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let empty = [
            ("places", self.places.is_empty()),
            ("weathers", self.weathers.is_empty()),
            ("densities", self.densities.is_empty()),
            ("seeds", self.seeds.is_empty()),
            ("trackers", self.trackers.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(HarnessError::Config(format!("{name} must not be empty")));
        }
        if self.threads == Some(0) {
            return Err(HarnessError::Config("threads must be >= 1".into()));
        }
        for &d in &self.densities {
            self.scenario(&self.places[0], self.weathers[0], d, self.seeds[0])
                .validate()?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut cfg = SweepConfig::default();
        for e in keyval::parse(text)? {
            match e.key.as_str() {
                "places" => cfg.places = e.list().into_iter().map(String::from).collect(),
                "weathers" => cfg.weathers = e.parse_list()?,
                "densities" => cfg.densities = e.parse_list()?,
                "seeds" => cfg.seeds = e.parse_list()?,
                "trackers" => cfg.trackers = e.parse_list()?,
                "cameras" => cfg.cameras = e.parse()?,
                "enable_cars" => cfg.enable_cars = e.boolean()?,
                "duration_s" => cfg.duration_s = float(&e)?,
                "fps" => cfg.fps = e.parse()?,
                "min_area" => cfg.min_area = float(&e)?,
                "out_dir" => cfg.out_dir = PathBuf::from(e.value.trim()),
                "results" => cfg.results = Some(PathBuf::from(e.value.trim())),
                "threads" => cfg.threads = Some(e.parse()?),
                _ => {
                    if !cfg.model.apply(&e)? && !apply_tracker(&mut cfg.tracker_params, &e)? {
                        return Err(e.error("unknown key").into());
                    }
                }
            }
        }
        cfg.model.sim.fps = cfg.fps;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::parse(&read_config(path)?)
    }
}
