//! Front end for `tfseg`: argument parsing, the segmentation pipeline over
//! files, and the phantom and Dice helpers.
//!
//! Outputs for an input `scan.pgm` land in the output directory as
//!
//! ```text
//! scan_mask.pgm        2-D mask, samples 0 / 255
//! scan_mask.raw/.hdr   3-D mask, u8 0 / 255 plus sidecar header
//! scan_contour.svg     2-D contours over the input (--emit contour)
//! scan_mesh.obj        3-D isosurface (--emit mesh)
//! scan_stats.txt       iteration table
//! scan_stats.kv        the same numbers as `key = value` lines
//! scan_smooth.pgm/.raw smoothed mask (--post-smooth)
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use tfseg::imaging::{self, VolumeHeader};
use tfseg::phantom::{self, PhantomSpec};
use tfseg::segment::{self, IterationStats, SegmentParams, Segmenter, StepOutcome};
use tfseg::transform::FrameBackend;
use tfseg::{Error, ImageField};

/// Environment variable holding the default output directory.
pub const OUT_DIR_ENV: &str = "TFSEG_OUT_DIR";

pub mod exit {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const INPUT: i32 = 3;
    pub const NO_CANDIDATES: i32 = 4;
    pub const ITERATION_CAP: i32 = 5;
}

#[derive(Debug, Parser)]
#[command(
    name = "tfseg",
    version,
    about = "Tight-frame segmentation of tubular structures"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment 2-D images (PGM, PNG) or 3-D raw volumes.
    Segment(SegmentArgs),
    /// Render a phantom description (file or bundled name) and its truth mask.
    Phantom(PhantomArgs),
    /// Print the Dice overlap of two masks.
    Dice(DiceArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Bspline,
    Dtcwt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, ValueEnum)]
pub enum Emit {
    Mask,
    Contour,
    Mesh,
    Stats,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    /// Images (.pgm, .png) or raw volumes with a `.hdr` sidecar.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Header for a raw volume when it is not the `.hdr` sidecar.
    #[arg(long)]
    pub header: Option<PathBuf>,
    /// Read inputs as 2-D images or 3-D volumes regardless of extension.
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=3))]
    pub dim: Option<u8>,
    /// Gradient threshold for the initial candidates [default: 0.003 in 2-D, 0.06 in 3-D].
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Soft-threshold applied to frame coefficients.
    #[arg(long, default_value_t = segment::DEFAULT_LAMBDA)]
    pub lambda: f64,
    /// [default: dtcwt in 2-D, bspline in 3-D]
    #[arg(long, value_enum)]
    pub backend: Option<Backend>,
    /// Dual-tree levels [default: 4].
    #[arg(long)]
    pub levels: Option<usize>,
    /// Fail with exit code 5 after this many iterations.
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long, env = OUT_DIR_ENV, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "mask,stats")]
    pub emit: Vec<Emit>,
    /// Also write one smoothing pass of the mask and draw contours/meshes from it.
    #[arg(long)]
    pub post_smooth: bool,
    /// Threshold the lowpass band as well.
    #[arg(long)]
    pub threshold_lowpass: bool,
}

#[derive(Debug, Args)]
pub struct PhantomArgs {
    /// TOML file, or the name of a bundled phantom (branching_y_2d, helix_3d).
    pub spec: String,
    #[arg(long, env = OUT_DIR_ENV, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DiceArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=3), default_value_t = 2)]
    pub dim: u8,
}

/// Fully resolved settings for [`run`]. Parameters that depend on the
/// dimensionality stay optional until the input has been read.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub header: Option<PathBuf>,
    pub dim: Option<usize>,
    pub epsilon: Option<f64>,
    pub lambda: f64,
    pub backend: Option<Backend>,
    pub levels: Option<usize>,
    pub max_iters: Option<usize>,
    pub out_dir: PathBuf,
    pub emit: Vec<Emit>,
    pub post_smooth: bool,
    pub threshold_lowpass: bool,
}

impl RunConfig {
    pub fn new(inputs: Vec<PathBuf>, out_dir: PathBuf) -> Self {
        Self {
            inputs,
            header: None,
            dim: None,
            epsilon: None,
            lambda: segment::DEFAULT_LAMBDA,
            backend: None,
            levels: None,
            max_iters: None,
            out_dir,
            emit: vec![Emit::Mask, Emit::Stats],
            post_smooth: false,
            threshold_lowpass: false,
        }
    }

    fn emits(&self, e: Emit) -> bool {
        self.emit.contains(&e)
    }

    /// Segmentation parameters for a field with `ndim` dimensions.
    pub fn params(&self, ndim: usize) -> Result<SegmentParams, CliError> {
        let usage = |msg: String| CliError::new(Stage::Configure, Error::InvalidArgument(msg));
        let mut p = SegmentParams::defaults_for(ndim);
        if let Some(e) = self.epsilon {
            p.epsilon = e;
        }
        p.lambda = self.lambda;
        p.max_iters = self.max_iters;
        p.lowpass_exempt = !self.threshold_lowpass;
        let backend = self.backend.unwrap_or(if ndim == 2 {
            Backend::Dtcwt
        } else {
            Backend::Bspline
        });
        p.backend = match backend {
            Backend::Bspline => {
                if self.levels.is_some_and(|l| l != 1) {
                    return Err(usage("--levels only applies to the dtcwt backend".into()));
                }
                FrameBackend::BSplineFramelet
            }
            Backend::Dtcwt => {
                if ndim != 2 {
                    return Err(usage(format!("the dtcwt backend is 2-D only, input is {ndim}-D")));
                }
                FrameBackend::dual_tree(self.levels.unwrap_or(tfseg::transform::DEFAULT_DTCWT_LEVELS))
            }
        };
        if self.emits(Emit::Contour) && ndim != 2 {
            return Err(usage("--emit contour needs a 2-D input".into()));
        }
        if self.emits(Emit::Mesh) && ndim != 3 {
            return Err(usage("--emit mesh needs a 3-D input".into()));
        }
        p.validate().map_err(|e| CliError::new(Stage::Configure, e))?;
        Ok(p)
    }
}

impl From<SegmentArgs> for RunConfig {
    fn from(a: SegmentArgs) -> Self {
        Self {
            inputs: a.inputs,
            header: a.header,
            dim: a.dim.map(usize::from),
            epsilon: a.epsilon,
            lambda: a.lambda,
            backend: a.backend,
            levels: a.levels,
            max_iters: a.max_iters,
            out_dir: a.out,
            emit: a.emit,
            post_smooth: a.post_smooth,
            threshold_lowpass: a.threshold_lowpass,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Configure,
    Read,
    Segment,
    Smooth,
    Write,
    Phantom,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Configure => "configure",
            Stage::Read => "read input",
            Stage::Segment => "segment",
            Stage::Smooth => "post-smooth",
            Stage::Write => "write output",
            Stage::Phantom => "phantom",
        })
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{stage}: {source}")]
pub struct CliError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

impl CliError {
    pub fn new(stage: Stage, source: Error) -> Self {
        Self { stage, source }
    }

    pub fn exit_code(&self) -> i32 {
        match &self.source {
            Error::NoCandidates { .. } => exit::NO_CANDIDATES,
            Error::IterationCapExceeded { .. } => exit::ITERATION_CAP,
            Error::InvalidArgument(_) | Error::UnsupportedBackend(_) => exit::USAGE,
            Error::MalformedHeader { .. }
            | Error::TruncatedPayload { .. }
            | Error::NotGrayscale { .. }
            | Error::UnknownElementType { .. }
            | Error::SizeMismatch { .. }
            | Error::Config { .. }
            | Error::Io { .. } => exit::INPUT,
            Error::InvalidInput(_) if self.stage == Stage::Read => exit::INPUT,
            _ => exit::OTHER,
        }
    }
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, CliError>;
}

impl<T> AtStage<T> for tfseg::Result<T> {
    fn at(self, stage: Stage) -> Result<T, CliError> {
        self.map_err(|e| CliError::new(stage, e))
    }
}

/// What one input produced.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub input: PathBuf,
    pub stats: IterationStats,
    pub written: Vec<PathBuf>,
}

struct Input {
    field: ImageField,
    spacing: [f64; 3],
}

fn looks_2d(path: &Path) -> bool {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    matches!(ext.as_deref(), Some("pgm" | "pnm" | "png"))
}

fn read_input(path: &Path, config: &RunConfig) -> Result<Input, CliError> {
    let as_2d = match config.dim {
        Some(d) => d == 2 && config.header.is_none(),
        None => looks_2d(path),
    };
    if as_2d {
        let field = imaging::read_image2d(path).at(Stage::Read)?;
        return Ok(Input {
            field,
            spacing: [1.0; 3],
        });
    }
    let (field, header) = imaging::read_volume_with_header(path, config.header.as_deref()).at(Stage::Read)?;
    if let Some(d) = config.dim {
        if field.ndim() != d {
            return Err(CliError::new(
                Stage::Read,
                Error::InvalidInput(format!(
                    "{}: header describes a {}-D field but --dim {d} was given",
                    path.display(),
                    field.ndim()
                )),
            ));
        }
    }
    let s = header.spacing_or_unit();
    let spacing = [s[0], s[1], s.get(2).copied().unwrap_or(1.0)];
    Ok(Input { field, spacing })
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into())
}

fn write_text(path: PathBuf, text: &str, written: &mut Vec<PathBuf>) -> Result<(), CliError> {
    std::fs::write(&path, text).map_err(|e| {
        CliError::new(
            Stage::Write,
            Error::Io {
                path: path.clone(),
                source: e,
            },
        )
    })?;
    written.push(path);
    Ok(())
}

fn write_stats(stats: &IterationStats, base: &Path, written: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let base = base.to_string_lossy();
    write_text(
        PathBuf::from(format!("{base}_stats.txt")),
        &stats.to_table(),
        written,
    )?;
    write_text(
        PathBuf::from(format!("{base}_stats.kv")),
        &stats.to_key_value(),
        written,
    )
}

fn write_field(field: &ImageField, base: &Path, written: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let base = base.to_string_lossy();
    if field.ndim() == 2 {
        let path = PathBuf::from(format!("{base}.pgm"));
        let scaled = field.map(|v| v.clamp(0.0, 1.0) * 65535.0);
        imaging::write_pgm(&scaled, &path, 65535).at(Stage::Write)?;
        written.push(path);
    } else {
        let path = PathBuf::from(format!("{base}.raw"));
        let header = VolumeHeader::new(field.extents(), imaging::ElementType::F32);
        written.extend(imaging::write_volume(field, &path, &header).at(Stage::Write)?);
    }
    Ok(())
}

fn run_one(path: &Path, config: &RunConfig) -> Result<RunReport, CliError> {
    let input = read_input(path, config)?;
    let field = &input.field;
    let params = config.params(field.ndim())?;
    std::fs::create_dir_all(&config.out_dir).map_err(|e| {
        CliError::new(
            Stage::Write,
            Error::Io {
                path: config.out_dir.clone(),
                source: e,
            },
        )
    })?;
    let base = config.out_dir.join(stem(path));
    let mut written = Vec::new();
    let emit_stats = config.emits(Emit::Stats);

    let mut seg = match Segmenter::new(field, &params) {
        Ok(s) => s,
        Err(e) => {
            if emit_stats && matches!(e, Error::NoCandidates { .. }) {
                write_stats(
                    &IterationStats::new(field.len(), field.ndim()),
                    &base,
                    &mut written,
                )?;
            }
            return Err(CliError::new(Stage::Segment, e));
        }
    };
    loop {
        match seg.step() {
            Ok(StepOutcome::Continue) => {}
            Ok(StepOutcome::Converged) => break,
            Err(e) => {
                if emit_stats {
                    write_stats(seg.stats(), &base, &mut written)?;
                }
                return Err(CliError::new(Stage::Segment, e));
            }
        }
    }
    let stats = seg.stats().clone();
    let mask = seg.current().clone();
    info!(
        "{}: {} iterations, |Lambda| {:?}",
        path.display(),
        stats.iterations(),
        stats.cardinalities()
    );

    let surface = if config.post_smooth {
        let smooth = segment::smooth_binary(&mask, params.backend, &params.thresholds()).at(Stage::Smooth)?;
        write_field(
            &smooth,
            &config.out_dir.join(format!("{}_smooth", stem(path))),
            &mut written,
        )?;
        smooth
    } else {
        mask.clone()
    };

    if config.emits(Emit::Mask) {
        let ext = if mask.ndim() == 2 { "pgm" } else { "raw" };
        let p = config.out_dir.join(format!("{}_mask.{ext}", stem(path)));
        written.extend(imaging::write_mask(&mask, &p).at(Stage::Write)?);
    }
    if config.emits(Emit::Contour) {
        let lines = imaging::contour_lines(&surface, 0.5).at(Stage::Write)?;
        let background = segment::normalize_dynamic_range(field).at(Stage::Write)?;
        let svg = imaging::contour_svg(&background, &lines).at(Stage::Write)?;
        write_text(
            config.out_dir.join(format!("{}_contour.svg", stem(path))),
            &svg,
            &mut written,
        )?;
    }
    if config.emits(Emit::Mesh) {
        let mesh = imaging::isosurface3d(&surface, 0.5, input.spacing).at(Stage::Write)?;
        write_text(
            config.out_dir.join(format!("{}_mesh.obj", stem(path))),
            &mesh.to_obj(),
            &mut written,
        )?;
    }
    if emit_stats {
        write_stats(&stats, &base, &mut written)?;
    }
    Ok(RunReport {
        input: path.to_path_buf(),
        stats,
        written,
    })
}

/// Segments every input in turn, stopping at the first failure.
pub fn run(config: &RunConfig) -> Result<Vec<RunReport>, CliError> {
    if config.header.is_some() && config.inputs.len() != 1 {
        return Err(CliError::new(
            Stage::Configure,
            Error::InvalidArgument("--header needs exactly one input".into()),
        ));
    }
    config.inputs.iter().map(|p| run_one(p, config)).collect()
}

/// Loads `spec` as a file, falling back to the bundled phantom of that name.
pub fn load_phantom_spec(spec: &str) -> Result<(String, PhantomSpec), CliError> {
    let path = Path::new(spec);
    if !path.exists() {
        if let Some(s) = phantom::bundled(spec) {
            return Ok((spec.to_string(), s));
        }
    }
    let s = PhantomSpec::load(path).at(Stage::Phantom)?;
    Ok((stem(path), s))
}

/// Writes the phantom image (16-bit PGM in 2-D, f32 raw in 3-D) and its truth
/// mask. Returns the files written.
pub fn write_phantom(spec: &str, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let (name, spec) = load_phantom_spec(spec)?;
    let ph = spec.generate().at(Stage::Phantom)?;
    for w in &ph.warnings {
        warn!("{name}: {w}");
    }
    std::fs::create_dir_all(out_dir).map_err(|e| {
        CliError::new(
            Stage::Write,
            Error::Io {
                path: out_dir.to_path_buf(),
                source: e,
            },
        )
    })?;
    let mut written = Vec::new();
    write_field(&ph.image, &out_dir.join(&name), &mut written)?;
    let ext = if ph.truth.ndim() == 2 { "pgm" } else { "raw" };
    let truth = out_dir.join(format!("{name}_truth.{ext}"));
    written.extend(imaging::write_mask(&ph.truth, &truth).at(Stage::Write)?);
    Ok(written)
}

pub fn dice_files(a: &Path, b: &Path, ndim: usize) -> Result<f64, CliError> {
    let ma = imaging::read_mask(a, ndim).at(Stage::Read)?;
    let mb = imaging::read_mask(b, ndim).at(Stage::Read)?;
    phantom::dice(&ma, &mb).at(Stage::Read)
}

/// Runs a parsed command line and returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Segment(args) => run(&RunConfig::from(args)).map(|reports| {
            for r in &reports {
                if reports.len() > 1 {
                    println!("{}", r.input.display());
                }
                print!("{}", r.stats.to_table());
            }
        }),
        Command::Phantom(args) => write_phantom(&args.spec, &args.out).map(|files| {
            for f in files {
                println!("{}", f.display());
            }
        }),
        Command::Dice(args) => dice_files(&args.a, &args.b, args.dim.into()).map(|d| println!("{d:.6}")),
    };
    match result {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("tfseg: {e}");
            e.exit_code()
        }
    }
}
