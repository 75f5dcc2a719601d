//! Command-line front end for `kreg`.
//!
//! [`run`] parses arguments, executes one subcommand and returns the process
//! exit code: 0 on success, 1 on usage errors, 2 on data errors. Diagnostics
//! are a single line on stderr.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use kreg::datagen::{add_outliers, generate_ideal, rescale_separation, IdealSpec, Manifest};
use kreg::dataset::{parse_csv, to_csv};
use kreg::geometry::{
    lambda_bounds, lambda_choice, regularized_deltas, tighter_upper_bound, Deltas, Regularizer,
};
use kreg::preprocess::{
    dct_features, density_cull, moment_features, GrayImage, DEFAULT_CULL_NEIGHBORS, DEFAULT_CULL_QUANTILE,
    DEFAULT_DCT_COEFFS, DEFAULT_DCT_WINDOW, DEFAULT_MOMENT_WINDOW, DEFAULT_WINDOWS,
};
use kreg::regularization::{estimate, EstimateConfig};
use kreg::{Dataset64, IdealGeometry64, LambdaBounds64, LambdaMode, Penalty, ShapeErrors64, SweepAlgorithm, UpperBoundShape};

pub mod report;

pub use report::{curves_csv, RunReport, REPORT_SCHEMA_VERSION};

/// Bundled Iris measurements: 150 rows of sepal length, sepal width, petal
/// length, petal width (cm).
pub const IRIS_CSV: &str = include_str!("../data/iris.csv");
/// Species of each Iris row, used only for purity reporting.
pub const IRIS_SPECIES: &str = include_str!("../data/iris_species.txt");

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "KREG_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl From<kreg::Error> for CliError {
    fn from(e: kreg::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "kreg", version, about = "Estimate the number of clusters with regularized k-means")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a seeded ideal-cluster dataset (CSV plus manifest JSON)
    Gen(GenArgs),
    /// Contract cluster centers toward the global mean
    Shrink(ShrinkArgs),
    /// Append uniformly distributed outliers
    Outliers(OutlierArgs),
    /// Remove the lowest-density points
    Cull(CullArgs),
    /// Extract texture features from a PGM image
    Features(FeatureArgs),
    /// Sweep k-means and estimate the number of clusters
    Estimate(EstimateArgs),
    /// Print ideal-cluster geometry, λ bounds and the dumbbell verdict
    Geom(GeomArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Dimension
    #[arg(long = "d", value_parser = clap::value_parser!(u64).range(1..))]
    dim: u64,
    /// Number of clusters
    #[arg(long = "k", value_parser = clap::value_parser!(u64).range(1..))]
    clusters: u64,
    /// Points per cluster
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    per_cluster: u64,
    /// Sphere radius R
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Minimum center distance as a multiple of 2R
    #[arg(long, default_value_t = 1.2)]
    separation: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Dataset CSV to write
    #[arg(long)]
    output: PathBuf,
    /// Manifest JSON to write [default: OUTPUT with extension .manifest.json]
    #[arg(long)]
    manifest: Option<PathBuf>,
}

/// Input dataset with optional ground truth.
#[derive(Debug, Args)]
struct InputArgs {
    /// Dataset CSV
    #[arg(long)]
    input: PathBuf,
    /// Skip one header line
    #[arg(long)]
    header: bool,
    /// Manifest carrying ground-truth labels and centroids
    #[arg(long)]
    manifest: Option<PathBuf>,
}

/// Output dataset; the manifest is written only when the input had one.
#[derive(Debug, Args)]
struct OutputArgs {
    /// Dataset CSV to write
    #[arg(long)]
    output: PathBuf,
    /// Manifest JSON to write [default: OUTPUT with extension .manifest.json]
    #[arg(long)]
    output_manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ShrinkArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Contraction factor in [0, 1]
    #[arg(long, value_parser = unit_interval)]
    factor: f64,
}

#[derive(Debug, Args)]
struct OutlierArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Number of outliers to append
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct CullArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Neighbour rank used for the density estimate
    #[arg(long, default_value_t = DEFAULT_CULL_NEIGHBORS)]
    m: usize,
    /// Fraction of points to remove, in [0, 1)
    #[arg(long, default_value_t = DEFAULT_CULL_QUANTILE, value_parser = half_open_unit)]
    quantile: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FeatureMode {
    Moments,
    Dct,
}

#[derive(Debug, Args)]
struct FeatureArgs {
    /// Binary (P5) or ASCII (P2) PGM image
    image: PathBuf,
    #[arg(long, value_enum)]
    mode: FeatureMode,
    /// Number of random windows
    #[arg(long, default_value_t = DEFAULT_WINDOWS)]
    windows: usize,
    /// Window side [default: 9 for moments, 8 for dct]
    #[arg(long)]
    window: Option<usize>,
    /// DCT coefficients kept, in zig-zag order
    #[arg(long, default_value_t = DEFAULT_DCT_COEFFS)]
    coeffs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Z-score every feature dimension
    #[arg(long)]
    standardize: bool,
    /// Feature CSV to write
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgorithmChoice {
    Alg1,
    Alg2,
    Both,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Dataset CSV, or `iris` for the bundled Iris data
    #[arg(long)]
    input: String,
    /// Skip one header line
    #[arg(long)]
    header: bool,
    /// Manifest with ground-truth labels, used only for purity reporting
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = AlgorithmChoice::Both)]
    algorithm: AlgorithmChoice,
    /// Largest k in the sweep (>= 3)
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u64).range(3..))]
    k_max: u64,
    /// linear, log, poly:P, exp or kl
    #[arg(long, default_value = "linear", value_parser = parse_penalty)]
    penalty: Penalty<f64>,
    /// midpoint or explicit:VALUE
    #[arg(long, default_value = "midpoint", value_parser = parse_lambda_mode)]
    lambda_mode: LambdaMode<f64>,
    /// Lloyd iteration cap
    #[arg(long, default_value_t = kreg::kmeans::DEFAULT_MAX_ITERATIONS as u64, value_parser = clap::value_parser!(u64).range(1..))]
    max_iterations: u64,
    /// JSON report; with `--algorithm both` the algorithm name is inserted
    /// before the extension
    #[arg(long)]
    report: Option<PathBuf>,
    /// Per-k CSV of E, k·E and the additive curves
    #[arg(long)]
    curves: Option<PathBuf>,
    /// Omit the metadata block (timing, thread count) so reports are
    /// byte-identical across runs
    #[arg(long)]
    reproducible: bool,
}

#[derive(Debug, Args)]
struct GeomArgs {
    /// Dimension
    #[arg(long = "d", value_parser = clap::value_parser!(u64).range(1..))]
    dim: u64,
    /// Sphere radius R
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Center distance L [default: 2R]
    #[arg(long = "l")]
    separation: Option<f64>,
    /// Number of points N (for the λ bounds)
    #[arg(long = "n")]
    n_points: Option<usize>,
    /// Number of clusters K (for the λ bounds and deltas)
    #[arg(long = "k")]
    clusters: Option<usize>,
    #[arg(long, default_value = "linear", value_parser = parse_penalty)]
    penalty: Penalty<f64>,
}

fn parse_penalty(s: &str) -> Result<Penalty<f64>, String> {
    Penalty::from_str(s).map_err(|e| e.to_string())
}

fn parse_lambda_mode(s: &str) -> Result<LambdaMode<f64>, String> {
    if s.eq_ignore_ascii_case("midpoint") {
        return Ok(LambdaMode::Midpoint);
    }
    let value = s
        .strip_prefix("explicit:")
        .ok_or_else(|| format!("expected `midpoint` or `explicit:VALUE`, got `{s}`"))?;
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(LambdaMode::Explicit(v)),
        _ => Err(format!("λ must be a finite non-negative number, got `{value}`")),
    }
}

fn unit_interval(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if (0.0..=1.0).contains(&v) => Ok(v),
        _ => Err(format!("expected a number in [0, 1], got `{s}`")),
    }
}

fn half_open_unit(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if (0.0..1.0).contains(&v) => Ok(v),
        _ => Err(format!("expected a number in [0, 1), got `{s}`")),
    }
}

/// Runs the command line `args` (including the program name) and returns
/// the exit code.
pub fn run<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match with_thread_cap(|| dispatch(cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("kreg: {}", e.to_string().replace('\n', " "));
            e.exit_code()
        }
    }
}

/// Number of worker threads requested through [`THREADS_ENV`].
fn thread_cap() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(_) => Err(CliError::Usage(format!("{THREADS_ENV} is not valid UTF-8"))),
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}

fn with_thread_cap<R: Send>(f: impl FnOnce() -> CliResult<R> + Send) -> CliResult<R> {
    match thread_cap()? {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Data(format!("cannot start thread pool: {e}")))?
            .install(f),
    }
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Gen(a) => cmd_gen(a),
        Command::Shrink(a) => cmd_shrink(a),
        Command::Outliers(a) => cmd_outliers(a),
        Command::Cull(a) => cmd_cull(a),
        Command::Features(a) => cmd_features(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Geom(a) => cmd_geom(a),
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn manifest_path(output: &Path, explicit: Option<PathBuf>) -> PathBuf {
    explicit.unwrap_or_else(|| output.with_extension("manifest.json"))
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Data(format!("cannot serialize: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn read_manifest(path: &Path) -> CliResult<Manifest> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| CliError::Data(format!("invalid manifest {}: {e}", path.display())))
}

/// Dataset plus the manifest it was loaded with, if any.
struct Loaded {
    data: Dataset64,
    manifest: Option<Manifest>,
}

fn load(args: &InputArgs) -> CliResult<Loaded> {
    let data = parse_csv::<f64>(&read_text(&args.input)?, args.header)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.input.display())))?;
    match &args.manifest {
        None => Ok(Loaded { data, manifest: None }),
        Some(path) => {
            let manifest = read_manifest(path)?;
            let data = manifest
                .apply(data)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            Ok(Loaded {
                data,
                manifest: Some(manifest),
            })
        }
    }
}

fn save(data: &Dataset64, source: Option<&Manifest>, out: OutputArgs) -> CliResult<()> {
    write_file(&out.output, to_csv(data))?;
    if let Some(m) = source {
        let manifest = Manifest::describe(data, m.spec.clone());
        write_file(&manifest_path(&out.output, out.output_manifest), to_json(&manifest)?)?;
    }
    Ok(())
}

fn cmd_gen(a: GenArgs) -> CliResult<()> {
    let mut spec = IdealSpec::new(a.dim as usize, a.clusters as usize, a.per_cluster as usize, a.seed);
    spec.radius = a.radius;
    spec.separation_factor = a.separation;
    let data = generate_ideal::<f64>(&spec)?;
    write_file(&a.output, to_csv(&data))?;
    let manifest = Manifest::describe(&data, Some(spec));
    write_file(&manifest_path(&a.output, a.manifest), to_json(&manifest)?)?;
    println!("wrote {} points in {} dimensions to {}", data.len(), data.dim(), a.output.display());
    Ok(())
}

fn cmd_shrink(a: ShrinkArgs) -> CliResult<()> {
    if a.input.manifest.is_none() {
        return Err(CliError::Usage("shrink needs --manifest with the true centroids".into()));
    }
    let loaded = load(&a.input)?;
    let out = rescale_separation(&loaded.data, a.factor)?;
    save(&out, loaded.manifest.as_ref(), a.output)
}

fn cmd_outliers(a: OutlierArgs) -> CliResult<()> {
    let loaded = load(&a.input)?;
    let out = add_outliers(&loaded.data, a.count, a.seed);
    save(&out, loaded.manifest.as_ref(), a.output)
}

fn cmd_cull(a: CullArgs) -> CliResult<()> {
    let loaded = load(&a.input)?;
    let out = density_cull(&loaded.data, a.m, a.quantile)?;
    eprintln!("kept {} of {} points", out.len(), loaded.data.len());
    save(&out, loaded.manifest.as_ref(), a.output)
}

fn cmd_features(a: FeatureArgs) -> CliResult<()> {
    let bytes = fs::read(&a.image).map_err(|e| CliError::Data(format!("cannot read {}: {e}", a.image.display())))?;
    let img = GrayImage::from_pgm(&bytes).map_err(|e| CliError::Data(format!("{}: {e}", a.image.display())))?;
    let data: Dataset64 = match a.mode {
        FeatureMode::Moments => moment_features(&img, a.windows, a.window.unwrap_or(DEFAULT_MOMENT_WINDOW), a.seed)?,
        FeatureMode::Dct => dct_features(&img, a.windows, a.window.unwrap_or(DEFAULT_DCT_WINDOW), a.coeffs, a.seed)?,
    };
    let data = if a.standardize { data.standardized() } else { data };
    write_file(&a.output, to_csv(&data))
}

/// Inserts `.alg1` / `.alg2` before the extension of `path`.
pub fn suffixed_path(path: &Path, algorithm: SweepAlgorithm) -> PathBuf {
    let name = algorithm.name();
    match (path.file_stem(), path.extension()) {
        (Some(stem), Some(ext)) => path.with_file_name(format!(
            "{}.{name}.{}",
            stem.to_string_lossy(),
            ext.to_string_lossy()
        )),
        _ => {
            let mut s = path.as_os_str().to_owned();
            s.push(format!(".{name}"));
            PathBuf::from(s)
        }
    }
}

/// Maps species names to label indices in order of first appearance.
fn species_labels(text: &str) -> Vec<Option<usize>> {
    let mut names: Vec<&str> = Vec::new();
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| {
            Some(names.iter().position(|n| *n == l).unwrap_or_else(|| {
                names.push(l);
                names.len() - 1
            }))
        })
        .collect()
}

fn load_estimate_input(a: &EstimateArgs) -> CliResult<Dataset64> {
    if a.input == "iris" {
        let data = parse_csv::<f64>(IRIS_CSV, false)?;
        return Ok(data.with_labels(species_labels(IRIS_SPECIES))?);
    }
    let input = InputArgs {
        input: PathBuf::from(&a.input),
        header: a.header,
        manifest: a.manifest.clone(),
    };
    Ok(load(&input)?.data)
}

fn cmd_estimate(a: EstimateArgs) -> CliResult<()> {
    let data = load_estimate_input(&a)?;
    let k_max = a.k_max as usize;
    if k_max > data.len() {
        return Err(CliError::Data(format!(
            "k_max = {k_max} exceeds the number of points N = {}",
            data.len()
        )));
    }
    let algorithms: &[SweepAlgorithm] = match a.algorithm {
        AlgorithmChoice::Alg1 => &[SweepAlgorithm::Alg1],
        AlgorithmChoice::Alg2 => &[SweepAlgorithm::Alg2],
        AlgorithmChoice::Both => &[SweepAlgorithm::Alg1, SweepAlgorithm::Alg2],
    };
    for &algorithm in algorithms {
        let started = Instant::now();
        let mut config = EstimateConfig::new(k_max, algorithm);
        config.penalty = a.penalty;
        config.lambda_mode = a.lambda_mode;
        config.max_iterations = a.max_iterations as usize;
        let estimation = estimate(&data, config)?;
        let mut report = RunReport::build(&a.input, a.header, &data, &estimation)?;
        if !a.reproducible {
            report.metadata = Some(report::Metadata::capture(started.elapsed()));
        }
        println!("{}", report.summary_line());
        let single = algorithms.len() == 1;
        if let Some(path) = &a.report {
            let path = if single { path.clone() } else { suffixed_path(path, algorithm) };
            write_file(&path, to_json(&report)?)?;
        }
        if let Some(path) = &a.curves {
            let path = if single { path.clone() } else { suffixed_path(path, algorithm) };
            write_file(&path, curves_csv(&estimation, data.dim()))?;
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct GeomReport {
    geometry: IdealGeometry64,
    alpha_over_two_beta: f64,
    shape_errors: ShapeErrors64,
    /// Eq. A-14 at θ = 0 and θ = π/4, and the stated minimum form.
    uneven_dumbbell_theta0: f64,
    uneven_dumbbell_theta_quarter_pi: f64,
    uneven_dumbbell_min_form: f64,
    perfect_dumbbell_upper: f64,
    uneven_dumbbell_upper: f64,
    /// `None` when L/R < 2.
    tighter_upper_bound: Option<UpperBoundShape>,
    lambda_bounds: Option<LambdaBounds64>,
    lambda_choice: Option<f64>,
    multiplicative_deltas: Option<Deltas<f64>>,
}

fn cmd_geom(a: GeomArgs) -> CliResult<()> {
    let dim = a.dim as usize;
    let geometry = IdealGeometry64::new(dim, a.radius)?;
    let l = a.separation.unwrap_or(2.0 * a.radius);
    if !(l.is_finite() && l > 0.0) {
        return Err(CliError::Usage(format!("--l must be positive, got {l}")));
    }
    let (bounds, choice) = match (a.n_points, a.clusters) {
        (Some(n), Some(k)) => (
            Some(lambda_bounds(a.penalty, &geometry, n, k, l)?),
            Some(lambda_choice(n, k, l)),
        ),
        _ => (None, None),
    };
    let deltas = match a.clusters {
        Some(k) => Some(regularized_deltas(Regularizer::Multiplicative, &geometry, k, l)?),
        None => None,
    };
    let report = GeomReport {
        alpha_over_two_beta: geometry.alpha_over_two_beta(),
        shape_errors: geometry.shape_errors(l),
        uneven_dumbbell_theta0: geometry.uneven_dumbbell_error(l, 0.0)?,
        uneven_dumbbell_theta_quarter_pi: geometry.uneven_dumbbell_error(l, std::f64::consts::FRAC_PI_4)?,
        uneven_dumbbell_min_form: geometry.uneven_dumbbell_min_error(l),
        perfect_dumbbell_upper: geometry.perfect_dumbbell_upper(l),
        uneven_dumbbell_upper: geometry.uneven_dumbbell_upper(l),
        tighter_upper_bound: tighter_upper_bound(dim, l / a.radius).ok(),
        lambda_bounds: bounds,
        lambda_choice: choice,
        multiplicative_deltas: deltas,
        geometry,
    };
    print!("{}", to_json(&report)?);
    Ok(())
}
