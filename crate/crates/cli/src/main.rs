use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crowdsim_core::harness::{
    evaluate_file, run_scenario, run_sweep, track_dir, write_report, GroupBy, HarnessError,
    ScenarioConfig, SweepConfig,
};
use crowdsim_core::motio;
use crowdsim_core::sensor::perturb_detections;
use crowdsim_core::tracking::{IouParams, SortParams, TrackerKind, TrackerParams};

#[derive(Parser)]
#[command(
    name = "crowdsim",
    version,
    about = "Synthetic crowd tracking datasets and tracker evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write one MOT sequence per camera.
    Generate {
        config: PathBuf,
        /// Overrides `out_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a tracker on a sequence's det.txt.
    Track {
        seq_dir: PathBuf,
        #[arg(long, default_value = "iou")]
        tracker: String,
        /// Hypothesis file; defaults to <seq_dir>/hyp/<tracker>.txt.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = IouParams::default().sigma_l)]
        sigma_l: f64,
        #[arg(long, default_value_t = IouParams::default().sigma_h)]
        sigma_h: f64,
        #[arg(long, default_value_t = IouParams::default().sigma_iou)]
        sigma_iou: f64,
        #[arg(long, default_value_t = IouParams::default().t_min)]
        t_min: usize,
        #[arg(long, default_value_t = SortParams::default().iou_threshold)]
        iou_threshold: f64,
        #[arg(long, default_value_t = SortParams::default().max_age)]
        max_age: u32,
        #[arg(long, default_value_t = SortParams::default().min_hits)]
        min_hits: u32,
    },
    /// CLEAR-MOT metrics of a hypothesis file against a sequence's gt.txt.
    Evaluate { gt_dir: PathBuf, hyp_file: PathBuf },
    /// Randomly drop and duplicate detections of a det file.
    Perturb {
        det_file: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        drop: f64,
        #[arg(long, default_value_t = 0.0)]
        dup: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; defaults to overwriting the input.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a factorial sweep and write the results CSV.
    Sweep {
        config: PathBuf,
        /// Worker threads (default: all cores; capped by CROWDSIM_THREADS).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Summarize a results CSV by one factor.
    Report {
        results: PathBuf,
        #[arg(long, default_value = "tracker")]
        group_by: String,
        /// Only rows of this tracker.
        #[arg(long)]
        tracker: Option<String>,
        /// Output prefix; defaults to <results stem>-by-<key>.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn default_prefix(results: &Path, key: &str) -> PathBuf {
    let stem = results
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("results");
    results.with_file_name(format!("{stem}-by-{key}"))
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Generate { config, out } => {
            let mut cfg = ScenarioConfig::load(&config)?;
            if let Some(out) = out {
                cfg.out_dir = out;
            }
            for dir in run_scenario(&cfg)? {
                println!("{}", dir.display());
            }
        }
        Command::Track {
            seq_dir,
            tracker,
            out,
            sigma_l,
            sigma_h,
            sigma_iou,
            t_min,
            iou_threshold,
            max_age,
            min_hits,
        } => {
            let kind: TrackerKind = tracker.parse()?;
            let params = TrackerParams {
                iou: IouParams {
                    sigma_l,
                    sigma_h,
                    sigma_iou,
                    t_min,
                },
                sort: SortParams {
                    iou_threshold,
                    max_age,
                    min_hits,
                },
            };
            let out = out.unwrap_or_else(|| seq_dir.join("hyp").join(format!("{kind}.txt")));
            let n = track_dir(&seq_dir, kind, &params, &out)?;
            println!("{} ({n} tracks)", out.display());
        }
        Command::Evaluate { gt_dir, hyp_file } => {
            let r = evaluate_file(&gt_dir, &hyp_file)?;
            let mota = r.mota.map_or("n/a".to_string(), |m| format!("{m:.6}"));
            let motp = r.motp.map_or("n/a".to_string(), |m| format!("{m:.6}"));
            println!(
                "num_gt={} num_hyp={} matches={}",
                r.num_gt, r.num_hyp, r.matches
            );
            println!("fp={} fn={} idsw={}", r.fp, r.fn_, r.idsw);
            println!("mota={mota} motp={motp}");
            println!(
                "mostly_tracked={} mostly_lost={}",
                r.mostly_tracked, r.mostly_lost
            );
        }
        Command::Perturb {
            det_file,
            drop,
            dup,
            seed,
            out,
        } => {
            let det = motio::read_det_file(&det_file)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out_dets = perturb_detections(&det, drop, dup, &mut rng)?;
            let out = out.unwrap_or(det_file);
            motio::write_det_file(&out, &out_dets)?;
            println!(
                "{} ({} -> {} detections)",
                out.display(),
                det.len(),
                out_dets.len()
            );
        }
        Command::Sweep { config, threads } => {
            let mut cfg = SweepConfig::load(&config)?;
            if threads.is_some() {
                cfg.threads = threads;
                cfg.validate()?;
            }
            println!("{}", run_sweep(&cfg)?.display());
        }
        Command::Report {
            results,
            group_by,
            tracker,
            out,
        } => {
            let key: GroupBy = group_by.parse()?;
            let tracker = tracker.map(|t| t.parse::<TrackerKind>()).transpose()?;
            let prefix = out.unwrap_or_else(|| default_prefix(&results, key.as_str()));
            let (summary, quantiles) = write_report(&results, key, tracker, &prefix)?;
            print!("{}", std::fs::read_to_string(&summary).unwrap_or_default());
            println!("{}\n{}", summary.display(), quantiles.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("crowdsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
