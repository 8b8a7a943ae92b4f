//! Command-line flags and their translation into run configurations.

use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use section_pursuit::datagen::{hole_fixture, CavitySpec, ThdmRanges};
use section_pursuit::index::{Direction, Epsilon};
use section_pursuit::pursuit::{Method, OptimizerParams};
use section_pursuit::topotrace::TopotraceConfig;
use section_pursuit::ProjectionFrame;

use crate::error::{CliError, CliResult};
use crate::ingest::IngestOptions;
use crate::run::{
    absolute, DatagenRun, FrameChoice, Generator, IndexEvalRun, IndexOptions, PursueRun, RunConfig, TopotraceRun,
};

#[derive(Debug, Parser)]
#[command(name = "section-pursuit", version, about = "Search 2-D slices of high-dimensional data for hollow regions and grains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimize the slice index from a starting plane.
    Pursue(PursueArgs),
    /// Index profiles along random geodesics through a plane.
    Topotrace(TopotraceArgs),
    /// Evaluate the index for one plane and print it as JSON.
    IndexEval(IndexEvalArgs),
    /// Generate benchmark datasets.
    Datagen(DatagenArgs),
    /// Re-run a recorded manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Column holding class labels (excluded from the data).
    #[arg(long)]
    pub class_column: Option<String>,
    /// Drop rows with this class label.
    #[arg(long)]
    pub drop_class: Option<String>,
    /// Keep raw values instead of centering and scaling each column.
    #[arg(long)]
    pub no_scale: bool,
    /// Trimming radius; defaults to the 0.999 quantile of row norms.
    #[arg(long)]
    pub r_max: Option<f64>,
}

impl IngestArgs {
    fn options(&self) -> CliResult<IngestOptions> {
        Ok(IngestOptions {
            input: absolute(&self.input)?,
            class_column: self.class_column.clone(),
            drop_class: self.drop_class.clone(),
            scale: !self.no_scale,
            r_max: self.r_max,
        })
    }
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    /// low (holes) or up (grains).
    #[arg(long, default_value = "low")]
    pub direction: Direction,
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    /// Noise cutoff: a number or "auto".
    #[arg(long, default_value = "auto")]
    pub epsilon: Epsilon,
    /// Slice height as a fraction of r_max.
    #[arg(long, default_value_t = 0.25)]
    pub slice_height_ratio: f64,
    #[arg(long, default_value_t = 5)]
    pub radial_bins: usize,
    #[arg(long, default_value_t = 10)]
    pub angular_bins: usize,
    /// Within-bin rotations averaged per evaluation.
    #[arg(long, default_value_t = 1)]
    pub rotation_average: usize,
}

impl IndexArgs {
    fn options(&self) -> IndexOptions {
        IndexOptions {
            direction: self.direction,
            q: self.q,
            epsilon: self.epsilon,
            slice_height_ratio: self.slice_height_ratio,
            radial_bins: self.radial_bins,
            angular_bins: self.angular_bins,
            rotation_average: self.rotation_average,
        }
    }
}

#[derive(Debug, Args)]
pub struct StartArgs {
    /// Seed of a random starting plane (defaults to --seed).
    #[arg(long, conflicts_with_all = ["start_axes", "start_frame"])]
    pub start_seed: Option<u64>,
    /// Start in the plane of two 1-based columns.
    #[arg(long, num_args = 2, value_names = ["I", "J"], conflicts_with = "start_frame")]
    pub start_axes: Option<Vec<usize>>,
    /// Start from a frame JSON file `{"p": .., "basis": [column-major]}`.
    #[arg(long)]
    pub start_frame: Option<PathBuf>,
}

impl StartArgs {
    fn choice(&self, default_seed: u64) -> CliResult<FrameChoice> {
        if let Some(axes) = &self.start_axes {
            return Ok(FrameChoice::Axes { i: axes[0], j: axes[1] });
        }
        if let Some(path) = &self.start_frame {
            return read_frame(path);
        }
        Ok(FrameChoice::Random { seed: self.start_seed.unwrap_or(default_seed) })
    }
}

fn read_frame(path: &Path) -> CliResult<FrameChoice> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let frame: ProjectionFrame =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: invalid frame: {e}", path.display())))?;
    Ok(FrameChoice::Frame(frame))
}

#[derive(Debug, Args)]
pub struct PursueArgs {
    #[command(flatten)]
    pub ingest: IngestArgs,
    #[command(flatten)]
    pub index: IndexArgs,
    #[command(flatten)]
    pub start: StartArgs,
    /// search_better or geodesic_search.
    #[arg(long, default_value = "search_better")]
    pub optimizer: Method,
    #[arg(long, default_value_t = 60, value_parser = clap::value_parser!(u32).range(1..))]
    pub max_iter: u32,
    #[arg(long, default_value_t = 25, value_parser = clap::value_parser!(u32).range(1..))]
    pub candidates: u32,
    /// Initial neighbourhood angle in radians.
    #[arg(long, default_value_t = 0.5)]
    pub alpha0: f64,
    #[arg(long, default_value_t = 0.9)]
    pub cooling: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub min_improvement: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep every evaluated candidate in trace.json.
    #[arg(long)]
    pub record_candidates: bool,
    /// Also write tour.json with this many interpolation steps per accepted move.
    #[arg(long, default_value_t = 0)]
    pub interpolate: usize,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct TopotraceArgs {
    #[command(flatten)]
    pub ingest: IngestArgs,
    #[command(flatten)]
    pub index: IndexArgs,
    #[command(flatten)]
    pub start: StartArgs,
    /// Number of random directions.
    #[arg(long, default_value_t = 100)]
    pub m: usize,
    #[arg(long, default_value_t = FRAC_PI_2)]
    pub alpha_max: f64,
    /// Grid points on each side of the start.
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
    /// Squint threshold as a fraction of the start index.
    #[arg(long, default_value_t = 0.75)]
    pub fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("plane").required(true).args(["axes", "frame"])))]
pub struct IndexEvalArgs {
    #[command(flatten)]
    pub ingest: IngestArgs,
    #[command(flatten)]
    pub index: IndexArgs,
    /// Coordinate plane of two 1-based columns.
    #[arg(long, num_args = 2, value_names = ["I", "J"])]
    pub axes: Option<Vec<usize>>,
    /// Frame JSON file `{"p": .., "basis": [column-major]}`.
    #[arg(long)]
    pub frame: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct DatagenArgs {
    #[command(subcommand)]
    pub kind: DatagenKind,
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    #[arg(long, default_value = "out", global = true)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum DatagenKind {
    /// Uniform points in the p-ball.
    Ball {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
    },
    /// Uniform ball with ellipsoidal holes or grains.
    Cavity {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Built-in cavity set.
        #[arg(long, value_parser = ["hole-fixture"], conflicts_with = "cavities", required_unless_present = "cavities")]
        preset: Option<String>,
        /// JSON list of cavity specs.
        #[arg(long)]
        cavities: Option<PathBuf>,
    },
    /// Two-Higgs-doublet parameter scan in the standardized 7-ball.
    Thdm {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
    },
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

/// What to do after parsing.
pub enum Action {
    Run { config: RunConfig, out_dir: PathBuf },
    Replay { manifest: PathBuf, out_dir: PathBuf },
}

impl Command {
    pub fn into_action(self) -> CliResult<Action> {
        let (config, out_dir) = match self {
            Command::Pursue(a) => {
                let optimizer = OptimizerParams {
                    method: a.optimizer,
                    max_iter: a.max_iter as usize,
                    candidates_per_iter: a.candidates as usize,
                    alpha0: a.alpha0,
                    cooling: a.cooling,
                    min_improvement: a.min_improvement,
                    seed: a.seed,
                    record_candidates: a.record_candidates,
                };
                optimizer.validate().map_err(|e| CliError::Config(e.to_string()))?;
                let run = PursueRun {
                    ingest: a.ingest.options()?,
                    index: a.index.options(),
                    optimizer,
                    start: a.start.choice(a.seed)?,
                    interpolate: a.interpolate,
                };
                (RunConfig::Pursue(run), a.out_dir)
            }
            Command::Topotrace(a) => {
                // accept pi/2 given to a few decimals
                let alpha_max = if a.alpha_max > FRAC_PI_2 && a.alpha_max < FRAC_PI_2 + 1e-4 { FRAC_PI_2 } else { a.alpha_max };
                let tconfig = TopotraceConfig { m: a.m, alpha_max, steps: a.steps, seed: a.seed };
                tconfig.validate().map_err(|e| CliError::Config(e.to_string()))?;
                if !(a.fraction > 0.0 && a.fraction < 1.0) {
                    return Err(CliError::Config(format!("fraction {} outside (0, 1)", a.fraction)));
                }
                let run = TopotraceRun {
                    ingest: a.ingest.options()?,
                    index: a.index.options(),
                    topotrace: tconfig,
                    start: a.start.choice(a.seed)?,
                    fraction: a.fraction,
                };
                (RunConfig::Topotrace(run), a.out_dir)
            }
            Command::IndexEval(a) => {
                let frame = match (&a.axes, &a.frame) {
                    (Some(axes), _) => FrameChoice::Axes { i: axes[0], j: axes[1] },
                    (None, Some(path)) => read_frame(path)?,
                    (None, None) => return Err(CliError::Config("give --axes or --frame".into())),
                };
                let run = IndexEvalRun { ingest: a.ingest.options()?, index: a.index.options(), frame };
                (RunConfig::IndexEval(run), a.out_dir)
            }
            Command::Datagen(a) => {
                let generator = match a.kind {
                    DatagenKind::Ball { n, p, radius } => Generator::Ball { n, p, radius },
                    DatagenKind::Cavity { n, p, radius, preset, cavities } => {
                        let cavities = match (preset, cavities) {
                            (_, Some(path)) => {
                                let text = fs::read_to_string(&path)
                                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                                serde_json::from_str::<Vec<CavitySpec>>(&text)
                                    .map_err(|e| CliError::Input(format!("{}: invalid cavities: {e}", path.display())))?
                            }
                            _ => hole_fixture(p, radius),
                        };
                        Generator::Cavity { n, p, radius, cavities }
                    }
                    DatagenKind::Thdm { n, radius } => Generator::Thdm { n, radius, ranges: ThdmRanges::default() },
                };
                (RunConfig::Datagen(DatagenRun { generator, seed: a.seed }), a.out_dir)
            }
            Command::Replay(a) => return Ok(Action::Replay { manifest: a.manifest, out_dir: a.out_dir }),
        };
        Ok(Action::Run { config, out_dir })
    }
}
