//! Fully resolved run configurations, their execution and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};

use section_pursuit::binning::PolarGrid;
use section_pursuit::datagen::{
    sample_ball, sample_with_cavities, thdm_scan, CavitySpec, ThdmRanges, THDM_COLUMNS,
};
use section_pursuit::index::{Direction, Epsilon, IndexConfig};
use section_pursuit::pursuit::{evaluate_frame, interpolated_trace, optimize, OptimizerParams};
use section_pursuit::slicing::{slice, Dataset};
use section_pursuit::topotrace::{squint_summary, topotrace, TopotraceConfig};
use section_pursuit::ProjectionFrame;

use crate::error::{CliError, CliResult};
use crate::ingest::{file_digest, ingest, IngestOptions, Ingested};
use crate::svg;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexOptions {
    pub direction: Direction,
    pub q: f64,
    pub epsilon: Epsilon,
    pub slice_height_ratio: f64,
    pub radial_bins: usize,
    pub angular_bins: usize,
    pub rotation_average: usize,
}

impl IndexOptions {
    /// Index configuration for data of radius `radius`.
    pub fn to_config(&self, radius: f64) -> CliResult<IndexConfig> {
        if !(self.slice_height_ratio > 0.0 && self.slice_height_ratio <= 1.0) {
            return Err(CliError::Config(format!(
                "slice height ratio {} must lie in (0, 1]",
                self.slice_height_ratio
            )));
        }
        let config = IndexConfig {
            direction: self.direction,
            q: self.q,
            epsilon: self.epsilon,
            bin_weights: None,
            h: self.slice_height_ratio * radius,
            grid: PolarGrid::new(self.radial_bins, self.angular_bins, radius).map_err(|e| CliError::Config(e.to_string()))?,
            rotation_average: self.rotation_average,
        };
        config.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(config)
    }
}

/// Starting or evaluation plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameChoice {
    Random { seed: u64 },
    /// 1-based column numbers.
    Axes { i: usize, j: usize },
    Frame(ProjectionFrame),
}

impl FrameChoice {
    pub fn resolve(&self, p: usize) -> CliResult<ProjectionFrame> {
        match self {
            FrameChoice::Random { seed } => Ok(ProjectionFrame::random(p, *seed)?),
            FrameChoice::Axes { i, j } => {
                if *i == 0 || *j == 0 || *i > p || *j > p || i == j {
                    return Err(CliError::Config(format!("axes {i} {j} must be distinct columns in 1..={p}")));
                }
                Ok(ProjectionFrame::coordinate_plane(p, i - 1, j - 1)?)
            }
            FrameChoice::Frame(f) => {
                if f.p() != p {
                    return Err(CliError::Config(format!("frame has p = {}, data has p = {p}", f.p())));
                }
                Ok(f.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PursueRun {
    pub ingest: IngestOptions,
    pub index: IndexOptions,
    pub optimizer: OptimizerParams,
    pub start: FrameChoice,
    /// Interpolation steps per accepted segment for `tour.json`; 0 disables it.
    pub interpolate: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopotraceRun {
    pub ingest: IngestOptions,
    pub index: IndexOptions,
    pub topotrace: TopotraceConfig,
    pub start: FrameChoice,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEvalRun {
    pub ingest: IngestOptions,
    pub index: IndexOptions,
    pub frame: FrameChoice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    Ball { n: usize, p: usize, radius: f64 },
    Cavity { n: usize, p: usize, radius: f64, cavities: Vec<CavitySpec> },
    Thdm { n: usize, radius: f64, ranges: ThdmRanges },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatagenRun {
    pub generator: Generator,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum RunConfig {
    Pursue(PursueRun),
    Topotrace(TopotraceRun),
    IndexEval(IndexEvalRun),
    Datagen(DatagenRun),
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        match self {
            RunConfig::Pursue(_) => "pursue",
            RunConfig::Topotrace(_) => "topotrace",
            RunConfig::IndexEval(_) => "index-eval",
            RunConfig::Datagen(_) => "datagen",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            RunConfig::Pursue(r) => Some(r.optimizer.seed),
            RunConfig::Topotrace(r) => Some(r.topotrace.seed),
            RunConfig::IndexEval(r) => match r.frame {
                FrameChoice::Random { seed } => Some(seed),
                _ => None,
            },
            RunConfig::Datagen(r) => Some(r.seed),
        }
    }

    fn ingest_options(&self) -> Option<&IngestOptions> {
        match self {
            RunConfig::Pursue(r) => Some(&r.ingest),
            RunConfig::Topotrace(r) => Some(&r.ingest),
            RunConfig::IndexEval(r) => Some(&r.ingest),
            RunConfig::Datagen(_) => None,
        }
    }
}

/// Everything needed to reproduce a run byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub tool_version: String,
    pub seed: Option<u64>,
    /// SHA-256 of the input file, for subcommands that read one.
    pub input_digest: Option<String>,
    pub config: RunConfig,
}

/// Files written by a run, relative to the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    /// Text for standard output, if any.
    pub stdout: Option<String>,
}

fn write(dir: &Path, name: &str, contents: &str, files: &mut Vec<PathBuf>) -> CliResult<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    files.push(path);
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Numeric(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Make an input path absolute so manifests replay from any directory.
pub fn absolute(path: &Path) -> CliResult<PathBuf> {
    fs::canonicalize(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Execute a run and write its outputs and manifest into `out_dir`.
pub fn execute(config: &RunConfig, out_dir: &Path) -> CliResult<RunOutput> {
    fs::create_dir_all(out_dir).map_err(|e| CliError::Input(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut files = Vec::new();
    let mut digest = None;
    let mut stdout = None;
    match config {
        RunConfig::Pursue(run) => {
            let data = load(&run.ingest, &mut digest, out_dir, &mut files)?;
            pursue(run, &data, out_dir, &mut files)?;
        }
        RunConfig::Topotrace(run) => {
            let data = load(&run.ingest, &mut digest, out_dir, &mut files)?;
            trace_run(run, &data, out_dir, &mut files)?;
        }
        RunConfig::IndexEval(run) => {
            let data = load(&run.ingest, &mut digest, out_dir, &mut files)?;
            let index_config = run.index.to_config(data.dataset.radius_bound())?;
            let frame = run.frame.resolve(data.dataset.p())?;
            let value = evaluate_frame(&data.dataset, &frame, &index_config)?;
            let json = to_json(&value)?;
            write(out_dir, "index.json", &json, &mut files)?;
            stdout = Some(json);
        }
        RunConfig::Datagen(run) => datagen(run, out_dir, &mut files)?,
    }
    let manifest = RunManifest {
        subcommand: config.name().to_string(),
        tool_version: TOOL_VERSION.to_string(),
        seed: config.seed(),
        input_digest: digest,
        config: config.clone(),
    };
    write(out_dir, MANIFEST_FILE, &to_json(&manifest)?, &mut files)?;
    Ok(RunOutput { files, stdout })
}

/// Re-execute the run recorded in a manifest, checking the input is unchanged.
pub fn replay(manifest_path: &Path, out_dir: &Path) -> CliResult<RunOutput> {
    let text = fs::read_to_string(manifest_path)
        .map_err(|e| CliError::Input(format!("{}: {e}", manifest_path.display())))?;
    let manifest: RunManifest = serde_json::from_str(&text)?;
    if manifest.tool_version != TOOL_VERSION {
        warn!("manifest written by version {}, replaying with {TOOL_VERSION}", manifest.tool_version);
    }
    if let (Some(opts), Some(expected)) = (manifest.config.ingest_options(), &manifest.input_digest) {
        let actual = file_digest(&opts.input)?;
        if &actual != expected {
            return Err(CliError::Input(format!(
                "{} changed since the run (digest {actual}, manifest {expected})",
                opts.input.display()
            )));
        }
    }
    execute(&manifest.config, out_dir)
}

fn load(opts: &IngestOptions, digest: &mut Option<String>, out_dir: &Path, files: &mut Vec<PathBuf>) -> CliResult<Ingested> {
    let data = ingest(opts)?;
    *digest = Some(data.digest.clone());
    write(out_dir, "ingest.json", &to_json(&data.report)?, files)?;
    Ok(data)
}

fn pursue(run: &PursueRun, data: &Ingested, out_dir: &Path, files: &mut Vec<PathBuf>) -> CliResult<()> {
    let dataset = &data.dataset;
    let index_config = run.index.to_config(dataset.radius_bound())?;
    run.optimizer.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let start = run.start.resolve(dataset.p())?;
    let trace = optimize(dataset, &start, &index_config, &run.optimizer)?;
    for w in &trace.warnings {
        warn!("{w}");
    }
    write(out_dir, "trace.json", &with_newline(trace.to_json()?), files)?;
    if run.interpolate > 0 {
        let tour = interpolated_trace(dataset, &trace, run.interpolate)?;
        write(out_dir, "tour.json", &with_newline(tour.to_json()?), files)?;
    }
    let best = trace.best();
    let assignment = slice(dataset, &best.frame, index_config.h)?.centered();
    let view = svg::slice_view(&assignment, &best.frame, &data.report.columns, &index_config.grid, &best.index);
    write(out_dir, "best_slice.svg", &view, files)
}

fn with_newline(mut s: String) -> String {
    s.push('\n');
    s
}

fn trace_run(run: &TopotraceRun, data: &Ingested, out_dir: &Path, files: &mut Vec<PathBuf>) -> CliResult<()> {
    let dataset = &data.dataset;
    let index_config = run.index.to_config(dataset.radius_bound())?;
    run.topotrace.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let start = run.start.resolve(dataset.p())?;
    let set = topotrace(dataset, &start, &index_config, &run.topotrace)?;
    for w in &set.warnings {
        warn!("{w}");
    }
    write(out_dir, "topotrace.csv", &set.to_csv(), files)?;
    write(out_dir, "topotrace.json", &with_newline(set.to_json()?), files)?;
    write(out_dir, "topotrace.svg", &svg::topotrace_plot(&set), files)?;
    match squint_summary(&set, run.fraction) {
        Ok(summary) => write(out_dir, "squint.json", &to_json(&summary)?, files)?,
        Err(section_pursuit::Error::NoStructure) => warn!("start index is 0; squint angles skipped"),
        Err(e) => return Err(CliError::Config(e.to_string())),
    }
    Ok(())
}

fn dataset_csv(data: &Dataset, header: &[String]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in data.rows() {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn numbered(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("x{j}")).collect()
}

fn datagen(run: &DatagenRun, out_dir: &Path, files: &mut Vec<PathBuf>) -> CliResult<()> {
    match &run.generator {
        Generator::Ball { n, p, radius } => {
            let data = sample_ball(*n, *p, *radius, run.seed)?;
            write(out_dir, "data.csv", &dataset_csv(&data, &numbered(*p)), files)
        }
        Generator::Cavity { n, p, radius, cavities } => {
            let sample = sample_with_cavities(*n, *p, *radius, cavities, run.seed)?;
            write(out_dir, "data.csv", &dataset_csv(&sample.dataset, &numbered(*p)), files)?;
            let meta = serde_json::json!({
                "informative_axes": sample.informative_axes.map(|(i, j)| [i + 1, j + 1]),
                "rejected": sample.rejected,
                "grain_points": sample.grain_points,
                "rows": sample.dataset.n(),
            });
            write(out_dir, "cavity.json", &to_json(&meta)?, files)
        }
        Generator::Thdm { n, radius, ranges } => {
            let scan = thdm_scan(*n, *radius, run.seed, ranges)?;
            let header: Vec<String> = THDM_COLUMNS.iter().map(|s| s.to_string()).collect();
            write(out_dir, "data.csv", &dataset_csv(&scan.physical, &header), files)?;
            let mut full = String::new();
            let z: Vec<String> = THDM_COLUMNS.iter().map(|c| format!("z_{c}")).collect();
            full.push_str(&z.join(","));
            full.push_str(",lambda1,lambda2,lambda3,lambda4,lambda5,tan_beta,cos_beta_alpha,m2_h,m2_H,m2_Hpm,m2_A,physical\n");
            for pt in &scan.points {
                let mut cells: Vec<String> = pt.standardized.iter().map(f64::to_string).collect();
                cells.extend(pt.params.lambda.iter().map(f64::to_string));
                cells.push(pt.params.tan_beta.to_string());
                cells.push(pt.params.cos_beta_alpha.to_string());
                cells.extend(pt.masses.as_array().iter().map(f64::to_string));
                cells.push(pt.physical.to_string());
                full.push_str(&cells.join(","));
                full.push('\n');
            }
            write(out_dir, "thdm.csv", &full, files)?;
            let meta = serde_json::json!({
                "points": scan.points.len(),
                "physical": scan.physical.n(),
                "non_physical_fraction": scan.non_physical_fraction(),
                "resampled": scan.rejected,
            });
            write(out_dir, "thdm.json", &to_json(&meta)?, files)
        }
    }
}
