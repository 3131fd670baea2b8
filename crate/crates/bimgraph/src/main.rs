use std::path::PathBuf;
use std::process::ExitCode;

use bimgraph::bench::bench;
use bimgraph::config::load_config;
use bimgraph::error::AppResult;
use bimgraph::io;
use bimgraph::pipeline::{run_offline, run_online, write_offline, OfflineInputs, OnlineInputs, OnlineOptions};
use bimgraph::world::{write_session, write_world};
use bimgraph_core::config::{PipelineConfig, SegmenterBackend};
use bimgraph_core::denoise::{corrupt, CorruptConfig, DenoiseBackend};
use bimgraph_core::graph::Layer;
use bimgraph_core::rooms::eval_segmentation;
use bimgraph_core::synth::{scenes, FloorplanSpec, SessionConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Structural segmentation and scene graphs from LiDAR maps.
#[derive(Parser)]
#[command(name = "bimgraph", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON configuration; missing keys keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one configuration value, e.g. `--set bev.ema_alpha=0.9`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    voxel_size: Option<f64>,
    #[arg(long)]
    ema_alpha: Option<f64>,
    #[arg(long)]
    tick_period: Option<f64>,
    /// Denoise with an external program, called with the input and output
    /// PGM paths appended.
    #[arg(long, num_args = 1.., value_name = "CMD")]
    denoiser: Option<Vec<String>>,
    /// Use this 16-bit label raster instead of the built-in segmenter.
    #[arg(long)]
    import_masks: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> AppResult<PipelineConfig> {
        let mut cfg = load_config(self.config.as_deref(), &self.set)?;
        if let Some(v) = self.voxel_size {
            cfg.bev.voxel_size = v;
        }
        if let Some(v) = self.ema_alpha {
            cfg.bev.ema_alpha = v;
        }
        if let Some(v) = self.tick_period {
            cfg.tick_period = v;
        }
        if let Some(cmd) = &self.denoiser {
            cfg.denoise.backend = DenoiseBackend::External { command: cmd.clone() };
        }
        if let Some(p) = &self.import_masks {
            cfg.segmenter_backend = SegmenterBackend::Import { path: p.display().to_string() };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Process a complete map in one pass.
    Offline {
        /// Pointcloud map (PLY or XYZ).
        #[arg(long)]
        map: PathBuf,
        /// Detections as JSON lines.
        #[arg(long)]
        detections: Option<PathBuf>,
        /// Trajectory in TUM format.
        #[arg(long)]
        poses: Option<PathBuf>,
        /// Camera calibration.
        #[arg(long)]
        camera: Option<PathBuf>,
        /// Ground-truth room raster; enables `metrics.json`.
        #[arg(long)]
        ground_truth: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Replay a recorded session tick by tick.
    Online {
        /// Directory with `map.ply` (per-point stamps), `poses.tum` and
        /// optionally `detections.jsonl` and `camera.txt`.
        #[arg(long)]
        session: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        max_ticks: Option<usize>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Compare a predicted room raster against ground truth.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Also write the metrics here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time the pipeline stages on synthetic maps of the given sizes.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "100000,300000,1000000")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Generate a synthetic world, or a recorded session through it.
    Synth {
        #[arg(long, value_enum, default_value_t = Scene::FiveRoom)]
        scene: Scene,
        /// A floorplan spec in JSON instead of a built-in scene.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write a session (stamped map, poses, detections, camera).
        #[arg(long)]
        session: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Add salt-and-pepper noise and wall gaps to a BEV image.
    Corrupt {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Percent of wall pixels cleared.
        #[arg(long, default_value_t = 0.0)]
        salt: f64,
        /// Percent of free interior pixels set to wall.
        #[arg(long, default_value_t = 0.0)]
        pepper: f64,
        #[arg(long, default_value_t = 0)]
        gaps: u32,
        #[arg(long, default_value_t = 5)]
        gap_len: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Scene {
    FiveRoom,
    Empty,
    Vents,
    Random,
    SingleRoom,
}

impl Scene {
    fn spec(self, seed: u64) -> FloorplanSpec {
        match self {
            Self::FiveRoom => scenes::five_room_apartment(seed),
            Self::Empty => scenes::empty_apartment(seed),
            Self::Vents => scenes::vent_apartment(seed),
            Self::Random => scenes::random_apartment(seed),
            Self::SingleRoom => scenes::single_room(6.0, 4.0),
        }
    }
}

fn print_json<T: serde::Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("report serializes"));
}

fn run(cli: Cli) -> AppResult<()> {
    match cli.command {
        Command::Offline { map, detections, poses, camera, ground_truth, out, config } => {
            let cfg = config.load()?;
            let inputs = OfflineInputs::load(
                &map,
                detections.as_deref(),
                poses.as_deref(),
                camera.as_deref(),
                ground_truth.as_deref(),
                &cfg,
            )?;
            let result = run_offline(&inputs, &cfg)?;
            write_offline(&out, &result)?;
            let g = &result.graph;
            println!(
                "{} points, {} rooms, {} buildings, {} scenes, {} objects in {:.0} ms",
                inputs.map.len(),
                g.count(Layer::Room),
                g.count(Layer::Building),
                g.count(Layer::Scene),
                g.count(Layer::Object),
                result.times.total_ms
            );
            if let Some(m) = &result.metrics {
                println!("mIoU {:.4}, precision {:.4}, recall {:.4}", m.miou, m.precision, m.recall);
            }
        }
        Command::Online { session, out, max_ticks, config } => {
            let cfg = config.load()?;
            let inputs = OnlineInputs::load(&session)?;
            if inputs.truncated {
                log::warn!("the detection stream ends mid-record; replaying what was read");
            }
            let opts = OnlineOptions { out_dir: Some(out), max_ticks };
            let summary = run_online(&inputs, &cfg, &opts, None, |t| {
                log::info!(
                    "tick {} t={:.1}s {} points, {} rooms, revision {}, {:.0} ms",
                    t.index,
                    t.stamp,
                    t.map_points,
                    t.masks.len(),
                    t.graph.revision,
                    t.times.total_ms
                );
            })?;
            let g = &summary.graph;
            println!(
                "{} ticks{}: {} rooms, {} buildings, {} scenes, {} objects",
                summary.ticks,
                if summary.interrupted { " (interrupted)" } else { "" },
                g.count(Layer::Room),
                g.count(Layer::Building),
                g.count(Layer::Scene),
                g.count(Layer::Object)
            );
        }
        Command::Eval { pred, gt, out } => {
            let gt = io::read_label_raster(&gt, None)?;
            let pred = io::read_label_raster(&pred, gt.transform)?;
            let m = eval_segmentation(&pred, &gt)?;
            if let Some(p) = out {
                io::write_json(&p, &m)?;
            }
            print_json(&m);
        }
        Command::Bench { sizes, seed, out, config } => {
            let report = bench(&config.load()?, &sizes, seed)?;
            if let Some(p) = out {
                io::write_json(&p, &report)?;
            }
            print_json(&report);
        }
        Command::Synth { scene, spec, seed, session, out } => {
            let spec = match spec {
                Some(p) => io::read_json::<FloorplanSpec>(&p)?,
                None => scene.spec(seed),
            };
            if session {
                let s = write_session(&out, &spec, &SessionConfig::default())?;
                println!("session of {:.1} s, {} detections written to {}", s.duration(), s.detections.len(), out.display());
            } else {
                write_world(&out, &spec)?;
                println!("world written to {}", out.display());
            }
        }
        Command::Corrupt { input, out, salt, pepper, gaps, gap_len, seed } => {
            let img = io::read_bev(&input)?;
            let cfg = CorruptConfig { salt_pct: salt, pepper_pct: pepper, gap_count: gaps, gap_len, seed };
            io::write_bev(&out, &corrupt(&img, &cfg)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
