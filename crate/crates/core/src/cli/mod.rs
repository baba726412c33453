//! The `voxcurv` command line.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 internal consistency
//! failure.

mod report;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curvature::assign_curvatures;
use crate::features::{
    distance, distance_matrix, feature_vector, nearest_neighbors, FeatureLayout, FeatureVector,
    Metric, NeighborList,
};
use crate::multiscale::{
    project, pyramid, write_csv, write_pgm, MapFormat, MapKind, Plane, ScaleMap,
};
use crate::surface::{extract_surface, Axis};
use crate::voxgrid::{
    detect_format, generate_shape, load_grid, save_grid, GridFormat, ShapeSpec, VoxelGrid,
};

pub use report::{analyze, AnalysisReport, AnalyzeError};

pub const THREADS_ENV: &str = "VOXCURV_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "voxcurv",
    version,
    about = "Digital curvature analysis of binary voxel objects"
)]
pub struct Cli {
    /// Worker threads; falls back to VOXCURV_THREADS, then all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print a JSON report: type counts, genus, total curvature, feature vector.
    Analyze {
        input: PathBuf,
        /// Input format; detected from the leading bytes when omitted.
        #[arg(long)]
        format: Option<GridFormat>,
    },
    /// Write one curvature map.
    Curvmap {
        input: PathBuf,
        #[arg(long, default_value = "gauss")]
        kind: MapKind,
        #[arg(long, default_value = "z")]
        axis: Axis,
        /// Dyadic level; mean-abs maps at level k sum 2^k × 2^k blocks.
        #[arg(long, default_value_t = 0)]
        level: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: MapFormat,
        #[arg(long)]
        input_format: Option<GridFormat>,
    },
    /// Write every level of a curvature pyramid plus summary.json.
    Pyramid {
        input: PathBuf,
        #[arg(long, default_value = "gauss")]
        kind: MapKind,
        #[arg(long, default_value = "z")]
        axis: Axis,
        #[arg(long)]
        levels: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "csv")]
        format: MapFormat,
        #[arg(long)]
        input_format: Option<GridFormat>,
    },
    /// Print the feature-vector distance between two objects.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// euclid, sq or minkowski:<p>
        #[arg(long, default_value = "euclid")]
        metric: Metric,
        #[arg(long, default_value = "four")]
        layout: FeatureLayout,
    },
    /// Distance matrix CSV over a directory, list file or several inputs.
    Matrix {
        inputs: Vec<PathBuf>,
        /// JSON array of {"label", "ratios"} used instead of voxel inputs.
        #[arg(long)]
        vectors_json: Option<PathBuf>,
        #[arg(long, default_value = "euclid")]
        metric: Metric,
        #[arg(long, default_value = "four")]
        layout: FeatureLayout,
        #[arg(long)]
        out: PathBuf,
        /// Neighbours listed per object.
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Write a synthetic fixture, e.g. cube:3, torus:4,1, blob:7,20.
    Gen {
        shape: ShapeSpec,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "text")]
        format: GridFormat,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

#[derive(Default)]
struct Output {
    stdout: Vec<u8>,
    stderr: Vec<u8>,
}

impl Output {
    fn warn(&mut self, msg: impl AsRef<str>) {
        self.stderr
            .extend_from_slice(format!("warning: {}\n", msg.as_ref()).as_bytes());
    }
}

/// Runs the CLI with the given arguments; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = stdout.write_all(text.as_bytes());
            } else {
                let _ = stderr.write_all(text.as_bytes());
            }
            return if code == 0 { 0 } else { 2 };
        }
    };
    let threads = match resolve_threads(cli.threads) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return e.exit_code();
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot start worker pool: {e}");
            return 3;
        }
    };
    let mut out = Output::default();
    let result = pool.install(|| dispatch(cli.command, &mut out));
    let _ = stdout.write_all(&out.stdout);
    let _ = stderr.write_all(&out.stderr);
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// 0 lets the pool pick the core count.
fn resolve_threads(flag: Option<usize>) -> Result<usize, CliError> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be an integer, got '{v}'"))),
        _ => Ok(0),
    }
}

fn dispatch(command: Command, out: &mut Output) -> Result<(), CliError> {
    match command {
        Command::Analyze { input, format } => cmd_analyze(&input, format, out),
        Command::Curvmap {
            input,
            kind,
            axis,
            level,
            out: path,
            format,
            input_format,
        } => cmd_curvmap(
            &input,
            input_format,
            kind,
            axis,
            level,
            path.as_deref(),
            format,
            out,
        ),
        Command::Pyramid {
            input,
            kind,
            axis,
            levels,
            out: dir,
            format,
            input_format,
        } => cmd_pyramid(&input, input_format, kind, axis, levels, &dir, format, out),
        Command::Compare {
            a,
            b,
            metric,
            layout,
        } => cmd_compare(&a, &b, metric, layout, out),
        Command::Matrix {
            inputs,
            vectors_json,
            metric,
            layout,
            out: path,
            k,
        } => cmd_matrix(
            &inputs,
            vectors_json.as_deref(),
            metric,
            layout,
            &path,
            k,
            out,
        ),
        Command::Gen {
            shape,
            out: path,
            format,
        } => cmd_gen(&shape, path.as_deref(), format, out),
    }
}

fn read_grid(path: &Path, format: Option<GridFormat>) -> Result<(VoxelGrid, GridFormat), CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let format = format
        .or_else(|| detect_format(&bytes))
        .ok_or_else(|| CliError::Input(format!("{}: unrecognized grid format", path.display())))?;
    let grid = load_grid(bytes.as_slice(), format)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok((grid, format))
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(value).expect("report types serialize");
    s.push(b'\n');
    s
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn cmd_analyze(input: &Path, format: Option<GridFormat>, out: &mut Output) -> Result<(), CliError> {
    let (grid, format) = read_grid(input, format)?;
    let report = analyze(&grid, &input.display().to_string(), format).map_err(|e| match e {
        AnalyzeError::EmptyObject => CliError::Input("empty object".into()),
        AnalyzeError::Internal(e) => CliError::Internal(e.to_string()),
    })?;
    out.stdout.extend(to_json(&report));
    Ok(())
}

fn base_map(grid: &VoxelGrid, kind: MapKind, axis: Axis) -> ScaleMap {
    let field = assign_curvatures(&extract_surface(grid));
    project(&field, kind, Plane::across(axis))
}

fn encode_map(map: &ScaleMap, format: MapFormat) -> Result<Vec<u8>, CliError> {
    let mut bytes = Vec::new();
    let res = match format {
        MapFormat::Csv => write_csv(map, &mut bytes),
        MapFormat::Pgm => write_pgm(map, &mut bytes),
    };
    res.map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(bytes)
}

#[allow(clippy::too_many_arguments)]
fn cmd_curvmap(
    input: &Path,
    input_format: Option<GridFormat>,
    kind: MapKind,
    axis: Axis,
    level: u32,
    path: Option<&Path>,
    format: MapFormat,
    out: &mut Output,
) -> Result<(), CliError> {
    let (grid, _) = read_grid(input, input_format)?;
    let base = base_map(&grid, kind, axis);
    let top = base.levels_to_top();
    if level > top {
        out.warn(format!(
            "level {level} exceeds top level {top}; clamped to {top}"
        ));
    }
    let levels =
        pyramid(&base, level.min(top) as usize + 1).map_err(|e| CliError::Usage(e.to_string()))?;
    let map = levels.maps.last().expect("pyramid is non-empty");
    let bytes = encode_map(map, format)?;
    match path {
        Some(p) => write_file(p, &bytes),
        None => {
            out.stdout.extend(bytes);
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct LevelSummary {
    level: u32,
    dims: Vec<usize>,
    file: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    total_quarter_pi_units: Option<i64>,
    total: f64,
    argmax: Vec<usize>,
    max: f64,
}

#[derive(Serialize)]
struct PyramidSummary {
    kind: &'static str,
    axis: Axis,
    plane: Plane,
    requested_levels: usize,
    clamped: bool,
    levels: Vec<LevelSummary>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_pyramid(
    input: &Path,
    input_format: Option<GridFormat>,
    kind: MapKind,
    axis: Axis,
    levels: usize,
    dir: &Path,
    format: MapFormat,
    out: &mut Output,
) -> Result<(), CliError> {
    if levels == 0 {
        return Err(CliError::Usage("--levels must be >= 1".into()));
    }
    let (grid, _) = read_grid(input, input_format)?;
    let base = base_map(&grid, kind, axis);
    let pyr = pyramid(&base, levels).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(asked) = pyr.clamped_from {
        out.warn(format!(
            "{asked} levels requested, only {} available; clamped",
            pyr.maps.len()
        ));
    }
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
    let mut summaries = Vec::with_capacity(pyr.maps.len());
    for map in &pyr.maps {
        let file = format!("level_{}.{}", map.level(), format.extension());
        write_file(&dir.join(&file), &encode_map(map, format)?)?;
        let (argmax, max) = map.argmax().expect("maps are non-empty");
        summaries.push(LevelSummary {
            level: map.level(),
            dims: map.dims().to_vec(),
            file,
            total_quarter_pi_units: map.gauss_total().map(|g| g.quarter_pi_units()),
            total: map.total(),
            argmax,
            max,
        });
    }
    let summary = PyramidSummary {
        kind: kind.name(),
        axis,
        plane: Plane::across(axis),
        requested_levels: levels,
        clamped: pyr.clamped_from.is_some(),
        levels: summaries,
    };
    let json = to_json(&summary);
    write_file(&dir.join("summary.json"), &json)?;
    out.stdout.extend(json);
    Ok(())
}

fn grid_feature_vector(path: &Path, layout: FeatureLayout) -> Result<FeatureVector, CliError> {
    let (grid, _) = read_grid(path, None)?;
    feature_vector(&extract_surface(&grid), layout)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn cmd_compare(
    a: &Path,
    b: &Path,
    metric: Metric,
    layout: FeatureLayout,
    out: &mut Output,
) -> Result<(), CliError> {
    let (va, vb) = (
        grid_feature_vector(a, layout)?,
        grid_feature_vector(b, layout)?,
    );
    let d =
        distance(va.ratios(), vb.ratios(), metric).map_err(|e| CliError::Usage(e.to_string()))?;
    out.stdout.extend(format!("{d:.9}\n").into_bytes());
    Ok(())
}

#[derive(Debug, Deserialize)]
struct LabeledRatios {
    label: String,
    ratios: Vec<f64>,
}

#[derive(Serialize)]
struct MatrixVector<'a> {
    label: &'a str,
    ratios: &'a [f64],
    total_points: u64,
}

#[derive(Serialize)]
struct MatrixSummary<'a> {
    metric: String,
    labels: &'a [String],
    k: usize,
    vectors: Vec<MatrixVector<'a>>,
    neighbors: Vec<NeighborList>,
}

/// Expands directories and list files into grid paths.
fn collect_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut paths = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let entries = fs::read_dir(input)
                .map_err(|e| CliError::Input(format!("{}: {e}", input.display())))?;
            for entry in entries {
                let entry =
                    entry.map_err(|e| CliError::Input(format!("{}: {e}", input.display())))?;
                if entry.path().is_file() {
                    paths.push(entry.path());
                }
            }
            continue;
        }
        let bytes =
            fs::read(input).map_err(|e| CliError::Input(format!("{}: {e}", input.display())))?;
        if detect_format(&bytes).is_some() {
            paths.push(input.clone());
            continue;
        }
        let text = String::from_utf8(bytes).map_err(|_| {
            CliError::Input(format!(
                "{}: neither a grid nor a list file",
                input.display()
            ))
        })?;
        let base = input.parent().unwrap_or(Path::new("."));
        for line in text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
        {
            paths.push(base.join(line));
        }
    }
    Ok(paths)
}

#[allow(clippy::too_many_arguments)]
fn cmd_matrix(
    inputs: &[PathBuf],
    vectors_json: Option<&Path>,
    metric: Metric,
    layout: FeatureLayout,
    csv_path: &Path,
    k: usize,
    out: &mut Output,
) -> Result<(), CliError> {
    let mut labeled: Vec<(String, FeatureVector)> = Vec::new();
    if let Some(json) = vectors_json {
        let text = fs::read_to_string(json)
            .map_err(|e| CliError::Input(format!("{}: {e}", json.display())))?;
        let rows: Vec<LabeledRatios> = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("{}: {e}", json.display())))?;
        for row in rows {
            let v = FeatureVector::from_ratios(row.ratios)
                .map_err(|e| CliError::Input(format!("{}: {}: {e}", json.display(), row.label)))?;
            labeled.push((row.label, v));
        }
    } else {
        for path in collect_inputs(inputs)? {
            let label = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string());
            labeled.push((label, grid_feature_vector(&path, layout)?));
        }
    }
    labeled.sort_by(|a, b| a.0.cmp(&b.0));
    if let Some(w) = labeled.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(CliError::Input(format!("duplicate label '{}'", w[0].0)));
    }
    if labeled.len() < 2 {
        return Err(CliError::Usage(format!(
            "matrix needs at least 2 inputs, got {}",
            labeled.len()
        )));
    }
    let labels: Vec<String> = labeled.iter().map(|(l, _)| l.clone()).collect();
    let vectors: Vec<&FeatureVector> = labeled.iter().map(|(_, v)| v).collect();
    let ratios: Vec<&[f64]> = vectors.iter().map(|v| v.ratios()).collect();
    let matrix =
        distance_matrix(&ratios, &labels, metric).map_err(|e| CliError::Input(e.to_string()))?;
    let neighbors = nearest_neighbors(&matrix, k).map_err(|e| CliError::Usage(e.to_string()))?;
    write_file(csv_path, matrix.to_csv().as_bytes())?;
    let summary = MatrixSummary {
        metric: metric.to_string(),
        labels: &labels,
        k,
        vectors: labeled
            .iter()
            .map(|(l, v)| MatrixVector {
                label: l,
                ratios: v.ratios(),
                total_points: v.total(),
            })
            .collect(),
        neighbors,
    };
    out.stdout.extend(to_json(&summary));
    Ok(())
}

fn cmd_gen(
    shape: &ShapeSpec,
    path: Option<&Path>,
    format: GridFormat,
    out: &mut Output,
) -> Result<(), CliError> {
    let grid = generate_shape(shape).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut bytes = Vec::new();
    save_grid(&grid, format, &mut bytes).map_err(|e| CliError::Internal(e.to_string()))?;
    match path {
        Some(p) => write_file(p, &bytes),
        None => {
            out.stdout.extend(bytes);
            Ok(())
        }
    }
}
