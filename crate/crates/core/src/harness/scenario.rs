//! Scenario generation: simulate, capture every camera, add detector noise.

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{HarnessError, ScenarioConfig};
use crate::motio::{write_sequence, SequenceMeta};
use crate::sensor::{
    capture_frame, scene_bodies, synthesize_detections, Camera, Detection, GtEntry,
};
use crate::sim::{step_agents, SimState, Vec2, World};
use crate::traffic::{step_cars, RoadGraph, TrafficState};

/// Salt separating the traffic stream from the pedestrian stream.
const TRAFFIC_SALT: u64 = 0x7261_6666_6963_0001;

/// One camera's recording, in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedSequence {
    pub meta: SequenceMeta,
    pub gt: Vec<GtEntry>,
    pub det: Vec<Detection>,
}

/// Detector stream for `(seed, camera)`; each frame uses its own stream.
pub fn detection_rng(seed: u64, camera: usize, frame: u32) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(camera as u64).to_le_bytes());
    key[16..24].copy_from_slice(b"detector");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(frame as u64);
    rng
}

/// Runs the simulation and returns one sequence per camera, without
/// touching the file system. Frame `f` shows the state after `f - 1` steps.
pub fn simulate_scenario(cfg: &ScenarioConfig) -> Result<Vec<GeneratedSequence>, HarnessError> {
    cfg.validate()?;
    let world = World::build(&cfg.place)?;
    if world.cameras.len() < cfg.cameras {
        return Err(HarnessError::Config(format!(
            "place `{}` has {} camera(s), {} requested",
            world.name,
            world.cameras.len(),
            cfg.cameras
        )));
    }
    let cameras = world.cameras[..cfg.cameras]
        .iter()
        .map(|m| Camera::from_mount(m, cfg.model.intrinsics))
        .collect::<Result<Vec<_>, _>>()?;
    let roads = match (&world.roads, cfg.enable_cars) {
        (Some(r), true) => Some(RoadGraph::build(r)?),
        (None, true) => {
            log::info!("place `{}` has no roads; running without cars", world.name);
            None
        }
        _ => None,
    };
    let weather = cfg.model.weather(cfg.weather);
    weather.validate()?;

    let n_frames = cfg.n_frames();
    let mut sim = SimState::new(&world, cfg.n_pedestrians, cfg.seed, cfg.fps)?;
    let mut traffic = TrafficState::new(cfg.seed ^ TRAFFIC_SALT, cfg.fps);
    let mut sim_params = cfg.model.sim;
    sim_params.fps = cfg.fps;

    let mut gt: Vec<Vec<GtEntry>> = vec![Vec::new(); cameras.len()];
    for frame in 1..=n_frames {
        let bodies = scene_bodies(
            &sim.agents,
            roads.as_ref().map(|g| (traffic.cars.as_slice(), g)),
        );
        for (cam, out) in cameras.iter().zip(gt.iter_mut()) {
            out.extend(
                capture_frame(cam, &bodies, frame)
                    .into_iter()
                    .filter(|e| e.bbox.area() >= cfg.min_area),
            );
        }
        if frame == n_frames {
            break;
        }
        step_agents(&world, &mut sim, &sim_params);
        if let Some(g) = &roads {
            let peds: Vec<Vec2> = sim.agents.iter().map(|a| a.position).collect();
            step_cars(g, &mut traffic, &peds, &cfg.model.traffic);
        }
    }

    let image = (cameras[0].width as f64, cameras[0].height as f64);
    let mut out = Vec::with_capacity(cameras.len());
    for (k, gt) in gt.into_iter().enumerate() {
        let mut det = Vec::new();
        let mut start = 0;
        for frame in 1..=n_frames {
            let end = start + gt[start..].iter().take_while(|e| e.frame == frame).count();
            let mut rng = detection_rng(cfg.seed, k, frame);
            det.extend(synthesize_detections(
                frame,
                &gt[start..end],
                &weather,
                image,
                &mut rng,
            ));
            start = end;
        }
        let meta = SequenceMeta::new(cfg.sequence_name(&world.name, k + 1), cfg.fps, n_frames);
        out.push(GeneratedSequence { meta, gt, det });
    }
    Ok(out)
}

/// Generates the scenario and writes one MOT directory per camera under
/// `cfg.out_dir`. Returns the directories in camera order.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Vec<PathBuf>, HarnessError> {
    let sequences = simulate_scenario(cfg)?;
    let mut dirs = Vec::with_capacity(sequences.len());
    for s in sequences {
        let dir = cfg.out_dir.join(&s.meta.name);
        write_sequence(&dir, &s.meta, &s.gt, &s.det)?;
        log::info!(
            "wrote {} ({} gt, {} det)",
            dir.display(),
            s.gt.len(),
            s.det.len()
        );
        dirs.push(dir);
    }
    Ok(dirs)
}
