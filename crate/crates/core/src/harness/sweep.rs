//! Factorial sweeps: generate every cell, track, evaluate, collect a CSV.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;

use super::{evaluate_dir, run_scenario, HarnessError, SweepConfig};
use crate::sensor::Weather;
use crate::sim::World;
use crate::tracking::TrackerKind;

pub const RESULT_HEADER: [&str; 13] = [
    "place",
    "weather",
    "density",
    "seed",
    "camera",
    "tracker",
    "mota",
    "idsw",
    "fp",
    "fn",
    "num_gt",
    "mean_gt_per_frame",
    "error",
];

/// One line of the results CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub place: String,
    pub weather: Weather,
    pub density: usize,
    pub seed: u64,
    /// 1-based.
    pub camera: usize,
    pub tracker: TrackerKind,
    pub mota: Option<f64>,
    pub idsw: usize,
    pub fp: usize,
    pub fn_: usize,
    pub num_gt: usize,
    pub mean_gt_per_frame: f64,
    /// Empty on success.
    pub error: String,
}

type RowKey = (String, Weather, usize, u64, usize, TrackerKind);

impl ResultRow {
    pub fn key(&self) -> RowKey {
        (
            self.place.clone(),
            self.weather,
            self.density,
            self.seed,
            self.camera,
            self.tracker,
        )
    }

    fn record(&self) -> Vec<String> {
        let ok = self.error.is_empty();
        let num = |v: usize| if ok { v.to_string() } else { String::new() };
        vec![
            self.place.clone(),
            self.weather.to_string(),
            self.density.to_string(),
            self.seed.to_string(),
            self.camera.to_string(),
            self.tracker.to_string(),
            self.mota.map(|m| format!("{m:.6}")).unwrap_or_default(),
            num(self.idsw),
            num(self.fp),
            num(self.fn_),
            num(self.num_gt),
            if ok {
                format!("{:.4}", self.mean_gt_per_frame)
            } else {
                String::new()
            },
            self.error.clone(),
        ]
    }

    fn from_record(r: &csv::StringRecord, line: u64) -> Result<Self, HarnessError> {
        let bad = |what: &str| HarnessError::Config(format!("results line {line}: bad {what}"));
        if r.len() != RESULT_HEADER.len() {
            return Err(bad("field count"));
        }
        let count = |i: usize| -> Result<usize, HarnessError> {
            if r[i].is_empty() {
                Ok(0)
            } else {
                r[i].parse().map_err(|_| bad(RESULT_HEADER[i]))
            }
        };
        Ok(Self {
            place: r[0].to_string(),
            weather: r[1].parse().map_err(|_| bad("weather"))?,
            density: r[2].parse().map_err(|_| bad("density"))?,
            seed: r[3].parse().map_err(|_| bad("seed"))?,
            camera: r[4].parse().map_err(|_| bad("camera"))?,
            tracker: r[5].parse().map_err(|_| bad("tracker"))?,
            mota: if r[6].is_empty() {
                None
            } else {
                Some(r[6].parse().map_err(|_| bad("mota"))?)
            },
            idsw: count(7)?,
            fp: count(8)?,
            fn_: count(9)?,
            num_gt: count(10)?,
            mean_gt_per_frame: if r[11].is_empty() {
                0.0
            } else {
                r[11].parse().map_err(|_| bad("mean_gt_per_frame"))?
            },
            error: r[12].to_string(),
        })
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> HarnessError + '_ {
    move |e| HarnessError::Io(format!("{}: {e}", path.display()))
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>, HarnessError> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = reader.headers().map_err(csv_err(path))?.clone();
    if header.iter().collect::<Vec<_>>() != RESULT_HEADER {
        return Err(HarnessError::Config(format!(
            "{}: unexpected header",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        rows.push(ResultRow::from_record(&rec, i as u64 + 2)?);
    }
    Ok(rows)
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .map_err(|e| HarnessError::Io(format!("{}: {e}", parent.display())))?;
    }
    let tmp = path.with_extension("csv.tmp");
    {
        let mut w = csv::Writer::from_path(&tmp).map_err(csv_err(&tmp))?;
        w.write_record(RESULT_HEADER).map_err(csv_err(&tmp))?;
        for r in rows {
            w.write_record(r.record()).map_err(csv_err(&tmp))?;
        }
        w.flush()
            .map_err(|e| HarnessError::Io(format!("{}: {e}", tmp.display())))?;
    }
    fs::rename(&tmp, path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

/// Number of worker threads: the configured value (or all cores), capped by
/// `CROWDSIM_THREADS`.
pub fn thread_count(configured: Option<usize>) -> usize {
    let mut n =
        configured.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if let Some(cap) = std::env::var("CROWDSIM_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
    {
        if cap >= 1 {
            n = n.min(cap);
        }
    }
    n.max(1)
}

#[derive(Debug, Clone)]
struct Cell {
    place: String,
    weather: Weather,
    density: usize,
    seed: u64,
}

fn run_cell(cfg: &SweepConfig, cell: &Cell) -> Vec<ResultRow> {
    let scenario = cfg.scenario(&cell.place, cell.weather, cell.density, cell.seed);
    let row = |camera: usize, tracker: TrackerKind| ResultRow {
        place: cell.place.clone(),
        weather: cell.weather,
        density: cell.density,
        seed: cell.seed,
        camera,
        tracker,
        mota: None,
        idsw: 0,
        fp: 0,
        fn_: 0,
        num_gt: 0,
        mean_gt_per_frame: 0.0,
        error: String::new(),
    };
    let dirs = match run_scenario(&scenario) {
        Ok(d) => d,
        Err(e) => {
            log::warn!("cell {cell:?} failed: {e}");
            return (1..=cfg.cameras)
                .flat_map(|c| cfg.trackers.iter().map(move |t| (c, *t)))
                .map(|(c, t)| ResultRow {
                    error: e.to_string(),
                    ..row(c, t)
                })
                .collect();
        }
    };
    let mut rows = Vec::new();
    for (i, dir) in dirs.iter().enumerate() {
        for &tracker in &cfg.trackers {
            let mut r = row(i + 1, tracker);
            match evaluate_dir(dir, tracker, &cfg.tracker_params) {
                Ok((report, meta)) => {
                    r.mota = report.mota;
                    r.idsw = report.idsw;
                    r.fp = report.fp;
                    r.fn_ = report.fn_;
                    r.num_gt = report.num_gt;
                    r.mean_gt_per_frame = report.num_gt as f64 / meta.seq_length as f64;
                }
                Err(e) => r.error = e.to_string(),
            }
            rows.push(r);
        }
    }
    rows
}

/// Runs every cell of the sweep and writes the results CSV in canonical
/// order (config list order, then camera, then tracker).
///
/// Rows already present without an error are kept and their cells skipped,
/// so an interrupted sweep can be resumed by rerunning it.
pub fn run_sweep(cfg: &SweepConfig) -> Result<PathBuf, HarnessError> {
    cfg.validate()?;
    // a misspelled place should stop the sweep, not fill it with error rows
    for place in &cfg.places {
        World::build(place)?;
    }
    let path = cfg.results_path();
    let mut done: BTreeMap<RowKey, ResultRow> = BTreeMap::new();
    if path.is_file() {
        for r in read_results(&path)? {
            if r.error.is_empty() {
                done.insert(r.key(), r);
            }
        }
    }

    let mut order: Vec<RowKey> = Vec::new();
    let mut pending = Vec::new();
    for place in &cfg.places {
        for &weather in &cfg.weathers {
            for &density in &cfg.densities {
                for &seed in &cfg.seeds {
                    let keys: Vec<RowKey> = (1..=cfg.cameras)
                        .flat_map(|c| cfg.trackers.iter().map(move |t| (c, *t)))
                        .map(|(c, t)| (place.clone(), weather, density, seed, c, t))
                        .collect();
                    if !keys.iter().all(|k| done.contains_key(k)) {
                        pending.push(Cell {
                            place: place.clone(),
                            weather,
                            density,
                            seed,
                        });
                    }
                    order.extend(keys);
                }
            }
        }
    }
    log::info!(
        "{} cells to run, {} rows already done",
        pending.len(),
        done.len()
    );

    if !pending.is_empty() {
        if !path.is_file() {
            write_results(&path, &done.values().cloned().collect::<Vec<_>>())?;
        }
        let file = OpenOptions::new()
            .append(true)
            .open(&path)
            .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        let writer: Mutex<csv::Writer<File>> = Mutex::new(
            csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(file),
        );
        let fresh: Mutex<Vec<ResultRow>> = Mutex::new(Vec::new());
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(thread_count(cfg.threads))
            .build()
            .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
        let io_error: Mutex<Option<HarnessError>> = Mutex::new(None);
        pool.install(|| {
            pending.par_iter().for_each(|cell| {
                let rows = run_cell(cfg, cell);
                {
                    let mut w = writer.lock().expect("writer lock");
                    let res = rows
                        .iter()
                        .try_for_each(|r| w.write_record(r.record()))
                        .and_then(|_| w.flush().map_err(csv::Error::from));
                    if let Err(e) = res {
                        io_error
                            .lock()
                            .expect("error lock")
                            .get_or_insert(csv_err(&path)(e));
                    }
                }
                fresh.lock().expect("rows lock").extend(rows);
            })
        });
        if let Some(e) = io_error.into_inner().expect("error lock") {
            return Err(e);
        }
        for r in fresh.into_inner().expect("rows lock") {
            done.insert(r.key(), r);
        }
    }

    let rows: Vec<ResultRow> = order.iter().filter_map(|k| done.get(k).cloned()).collect();
    write_results(&path, &rows)?;
    Ok(path)
}
