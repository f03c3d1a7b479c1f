//! `plateau` — find where a hyper-parameter search stops paying off.
//!
//! Subcommands:
//!
//! * `fit`     — fit a plateau boundary to an evaluation CSV, write a JSON
//!   report with the fitted parameters and the recommended configuration.
//! * `point`   — print the recommended configuration from a fit report.
//! * `contour` — sample the fitted boundary on a lattice (CSV) for plotting;
//!   two-dimensional fits only.
//! * `synth`   — generate a synthetic benchmark grid with a known boundary.
//!
//! Exit status: 0 on success, 2 for unusable input (malformed files, bad
//! flags, dimension mismatches), 3 when the input was read fine but the
//! method is degenerate on it (constant metric, one-sided partition, no
//! boundary crossing). Failures print a single-line JSON error object on
//! stderr.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use plateau_cli::report::{
    classify, BoundaryArg, ConfigEcho, DirectionArg, ErrorBody, ErrorReport, FitReport,
    OptimizerArg, PartitionSummary, PointReport, RestrictArg, SynthReport, TransformArg,
    EXIT_INPUT, SCHEMA_VERSION,
};
use plateau_core::grid::{
    auto_modes, fit_transform, generate_synthetic, load_grid_ignoring, write_grid_csv,
};
use plateau_core::likelihood::sigmoid;
use plateau_core::optimize::multi_start_fit;
use plateau_core::representative::{good_side, partition, representative_point};
use plateau_core::{
    BoundaryFamily, Error as CoreError, OptimOptions, QpParams, RepOptions, SynthSpec,
    TransformMode,
};

#[derive(Parser)]
#[command(
    name = "plateau",
    version,
    about = "Locate the plateau boundary in a hyper-parameter search and pick a configuration on it"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a boundary to an evaluation CSV and write a JSON fit report.
    Fit(FitArgs),
    /// Print the recommended configuration from a fit report.
    Point(PointArgs),
    /// Sample a fitted 2-D boundary on a lattice CSV for plotting.
    Contour(ContourArgs),
    /// Generate a synthetic benchmark grid with a known boundary.
    Synth(SynthArgs),
}

#[derive(Args)]
struct FitArgs {
    /// Evaluation CSV (one row per configuration; a `label` column is
    /// ignored).
    #[arg(long)]
    input: PathBuf,
    /// Where to write the JSON fit report.
    #[arg(long)]
    output: PathBuf,
    /// Name of the metric column.
    #[arg(long)]
    metric: String,
    /// Whether smaller or larger metric values are better.
    #[arg(long, value_enum, default_value_t = DirectionArg::Min)]
    direction: DirectionArg,
    /// Boundary family to fit.
    #[arg(long, value_enum, default_value_t = BoundaryArg::Qp)]
    boundary: BoundaryArg,
    /// Hidden width of the network boundary family.
    #[arg(long, default_value_t = 32)]
    hidden: usize,
    /// Number of multi-start restarts.
    #[arg(long, default_value_t = 16)]
    restarts: usize,
    /// RNG seed; drawn from the OS and echoed in the report when omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Optimizer override (defaults: qp uses bfgs, nn uses adam).
    #[arg(long, value_enum)]
    optimizer: Option<OptimizerArg>,
    /// Coordinate transform policy.
    #[arg(long, value_enum, default_value_t = TransformArg::Auto)]
    transform: TransformArg,
    /// Candidate set for the nearest evaluated configuration.
    #[arg(long, value_enum, default_value_t = RestrictArg::All)]
    restrict: RestrictArg,
}

#[derive(Args)]
struct PointArgs {
    /// Fit report written by `plateau fit`.
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args)]
struct ContourArgs {
    /// Fit report written by `plateau fit`.
    #[arg(long)]
    input: PathBuf,
    /// Where to write the lattice CSV.
    #[arg(long)]
    output: PathBuf,
    /// Lattice resolution as XxY counts, e.g. 200x200.
    #[arg(long, default_value = "200x200")]
    resolution: String,
}

#[derive(Args)]
struct SynthArgs {
    /// Where to write the benchmark CSV.
    #[arg(long)]
    output: PathBuf,
    /// Lattice shape, one count per dimension, e.g. 20x20.
    #[arg(long, default_value = "20x20")]
    resolution: String,
    /// Coordinate ranges, one lo:hi pair per dimension.
    #[arg(long, default_value = "-2:2,-2:2", allow_hyphen_values = true)]
    range: String,
    /// Packed quadratic truth (upper triangle of A row by row, then b, then
    /// c). Defaults to the unit circle.
    #[arg(long, allow_hyphen_values = true)]
    truth: Option<String>,
    /// Metric mean where the truth boundary is <= 0.
    #[arg(long, default_value_t = 0.0)]
    mu1: f64,
    /// Metric mean on the other side.
    #[arg(long, default_value_t = 10.0)]
    mu2: f64,
    /// Gaussian noise standard deviation.
    #[arg(long, default_value_t = 1.0)]
    noise_sd: f64,
    /// RNG seed; drawn from the OS and echoed when omitted.
    #[arg(long)]
    seed: Option<u64>,
}

/// Anything the tool can fail with, carrying enough context for a useful
/// one-line error object.
enum CliError {
    Core(CoreError),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    Usage(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Core(CoreError::Csv(e))
    }
}

impl CliError {
    fn render(&self) -> (i32, ErrorReport) {
        let (exit, code, message) = match self {
            CliError::Core(e) => {
                let (exit, code) = classify(e);
                (exit, code.to_string(), e.to_string())
            }
            CliError::Io { path, source } => (
                EXIT_INPUT,
                "io".to_string(),
                format!("{}: {}", path.display(), source),
            ),
            CliError::Json { path, source } => (
                EXIT_INPUT,
                "bad-fit-file".to_string(),
                format!("{}: {}", path.display(), source),
            ),
            CliError::Usage(msg) => (EXIT_INPUT, "bad-flag".to_string(), msg.clone()),
        };
        (
            exit,
            ErrorReport {
                schema: SCHEMA_VERSION,
                error: ErrorBody {
                    code,
                    exit,
                    message,
                },
            },
        )
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Point(args) => cmd_point(args),
        Command::Contour(args) => cmd_contour(args),
        Command::Synth(args) => cmd_synth(args),
    };
    if let Err(err) = result {
        let (exit, report) = err.render();
        eprintln!(
            "{}",
            serde_json::to_string(&report).expect("error object serializes")
        );
        std::process::exit(exit);
    }
}

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create(path: &Path) -> Result<File, CliError> {
    File::create(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Parses `"200x200"`-style lattice shapes; every count must be at least 2.
fn parse_shape(s: &str) -> Result<Vec<usize>, CliError> {
    let parts: Result<Vec<usize>, _> = s.split('x').map(|p| p.trim().parse::<usize>()).collect();
    match parts {
        Ok(counts) if !counts.is_empty() && counts.iter().all(|&k| k >= 2) => Ok(counts),
        _ => Err(CliError::Usage(format!(
            "--resolution must be counts >= 2 joined by 'x' (e.g. 200x200), got {s:?}"
        ))),
    }
}

/// Parses `"lo:hi,lo:hi"` coordinate ranges.
fn parse_ranges(s: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let bad = || {
        CliError::Usage(format!(
            "--range must be lo:hi pairs joined by ',' (e.g. -2:2,-2:2), got {s:?}"
        ))
    };
    s.split(',')
        .map(|pair| {
            let (lo, hi) = pair.split_once(':').ok_or_else(bad)?;
            let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
            let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
            Ok((lo, hi))
        })
        .collect()
}

/// Inclusive linear spacing with `k >= 2` points.
fn linspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    let steps = (k - 1) as f64;
    (0..k).map(|i| lo + (hi - lo) * i as f64 / steps).collect()
}

fn read_report(path: &Path) -> Result<FitReport, CliError> {
    let file = open(path)?;
    let report: FitReport =
        serde_json::from_reader(BufReader::new(file)).map_err(|source| CliError::Json {
            path: path.to_path_buf(),
            source,
        })?;
    if report.schema != SCHEMA_VERSION {
        return Err(CliError::Usage(format!(
            "{}: unsupported schema {} (this build reads schema {})",
            path.display(),
            report.schema,
            SCHEMA_VERSION
        )));
    }
    Ok(report)
}

fn cmd_fit(args: FitArgs) -> Result<(), CliError> {
    if args.restarts == 0 {
        return Err(CliError::Usage("--restarts must be at least 1".into()));
    }
    if args.hidden == 0 {
        return Err(CliError::Usage("--hidden must be at least 1".into()));
    }
    let seed = args.seed.unwrap_or_else(rand::random);
    let family = match args.boundary {
        BoundaryArg::Qp => BoundaryFamily::Qp,
        BoundaryArg::Nn => BoundaryFamily::Nn,
    };
    let optimizer = args.optimizer.unwrap_or(match args.boundary {
        BoundaryArg::Qp => OptimizerArg::Bfgs,
        BoundaryArg::Nn => OptimizerArg::Adam,
    });

    let grid = load_grid_ignoring(
        BufReader::new(open(&args.input)?),
        &args.metric,
        args.direction.to_direction(),
        &["label"],
    )?;
    if grid.dim() == 0 {
        return Err(CliError::Usage(
            "input has no coordinate columns besides the metric".into(),
        ));
    }
    if grid.metric_is_constant() {
        return Err(CoreError::ConstantMetric.into());
    }

    let modes = match args.transform {
        TransformArg::Auto => auto_modes(&grid),
        TransformArg::LogStd => vec![TransformMode::LogStd; grid.dim()],
        TransformArg::None => vec![TransformMode::Passthrough; grid.dim()],
    };
    let (tgrid, tspec) = fit_transform(&grid, &modes)?;

    let opts = OptimOptions {
        restarts: args.restarts,
        seed,
        hidden: args.hidden,
        optimizer: Some(optimizer.to_kind()),
        ..OptimOptions::default()
    };
    let fit = multi_start_fit(&tgrid, family, &opts, &tspec)?;

    let part = partition(&tgrid, &fit.params)?;
    let gside = good_side(&tgrid, &part);
    let rep = representative_point(
        &tgrid,
        &fit,
        &RepOptions {
            restrict_good_side: args.restrict == RestrictArg::GoodSide,
        },
    )?;

    let report = FitReport {
        schema: SCHEMA_VERSION,
        timestamp: now_unix(),
        config: ConfigEcho {
            input: args.input.display().to_string(),
            output: args.output.display().to_string(),
            metric: args.metric.clone(),
            direction: args.direction,
            boundary: args.boundary,
            hidden: args.hidden,
            restarts: args.restarts,
            seed,
            optimizer,
            transform: args.transform,
            restrict: args.restrict,
        },
        n: grid.len(),
        names: grid.names().to_vec(),
        data_range: grid.data_range(),
        transform: tspec,
        partition: PartitionSummary {
            side1: part.indices1.len(),
            side2: part.indices2.len(),
            good_side: gside,
        },
        representative: rep,
        fit,
    };

    let out = create(&args.output)?;
    let mut writer = BufWriter::new(out);
    serde_json::to_writer_pretty(&mut writer, &report).map_err(|source| CliError::Json {
        path: args.output.clone(),
        source,
    })?;
    use std::io::Write as _;
    writeln!(writer).map_err(|source| CliError::Io {
        path: args.output.clone(),
        source,
    })?;

    println!(
        "wrote {} (n = {}, loglik = {:.6}, sides = {}/{}, good side = {})",
        args.output.display(),
        report.n,
        report.fit.loglik,
        report.partition.side1,
        report.partition.side2,
        report.partition.good_side,
    );
    Ok(())
}

fn cmd_point(args: PointArgs) -> Result<(), CliError> {
    let report = read_report(&args.input)?;
    let rep = &report.representative;
    let point = PointReport {
        schema: SCHEMA_VERSION,
        boundary_point: rep.boundary_point_user.clone(),
        nearest_point: rep.nearest_point_user.clone(),
        nearest_index: rep.nearest_index,
        good_side: rep.good_side,
        restricted_to_good_side: rep.restricted_to_good_side,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&point).expect("point report serializes")
    );
    Ok(())
}

fn cmd_contour(args: ContourArgs) -> Result<(), CliError> {
    let report = read_report(&args.input)?;
    let m = report.fit.params.dim();
    if m != 2 {
        return Err(CliError::Usage(format!(
            "contour requires a 2-dimensional fit, this report has {m} dimension(s)"
        )));
    }
    let shape = parse_shape(&args.resolution)?;
    if shape.len() != 2 {
        return Err(CliError::Usage(format!(
            "--resolution for contour must be XxY, got {:?}",
            args.resolution
        )));
    }
    if report.data_range.len() != m {
        return Err(CliError::Usage(format!(
            "{}: data_range has {} entries for a {m}-dimensional fit",
            args.input.display(),
            report.data_range.len()
        )));
    }

    let transform = &report.fit.transform;
    let lo = transform.forward_point(&[report.data_range[0].0, report.data_range[1].0])?;
    let hi = transform.forward_point(&[report.data_range[0].1, report.data_range[1].1])?;
    // Cover the data span plus a 5% margin per axis, uniformly in the
    // transformed coordinates the boundary lives in.
    let axes: Vec<Vec<f64>> = (0..2)
        .map(|j| {
            let margin = 0.05 * (hi[j] - lo[j]);
            linspace(lo[j] - margin, hi[j] + margin, shape[j])
        })
        .collect();

    let out = create(&args.output)?;
    let mut w = csv::Writer::from_writer(BufWriter::new(out));
    w.write_record(["kind", "x", "y", "g", "s"])?;
    let write_row = |w: &mut csv::Writer<_>, kind: &str, t: &[f64], user: &[f64]| {
        let g = report.fit.params.eval(t);
        w.serialize((kind, user[0], user[1], g, sigmoid(g)))
    };
    for &tx in &axes[0] {
        for &ty in &axes[1] {
            let t = [tx, ty];
            let user = transform.inverse_point(&t)?;
            write_row(&mut w, "grid", &t, &user)?;
        }
    }
    let rep = &report.representative;
    let markers: [(&str, &[f64], &[f64]); 4] = [
        ("cog1", &rep.cog1, &rep.cog1_user),
        ("cog2", &rep.cog2, &rep.cog2_user),
        (
            "boundary_point",
            &rep.boundary_point,
            &rep.boundary_point_user,
        ),
        ("nearest_point", &rep.nearest_point, &rep.nearest_point_user),
    ];
    for (kind, t, user) in markers {
        write_row(&mut w, kind, t, user)?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: args.output.clone(),
        source,
    })?;

    println!(
        "wrote {} ({} lattice rows + 4 markers)",
        args.output.display(),
        shape[0] * shape[1]
    );
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<(), CliError> {
    let seed = args.seed.unwrap_or_else(rand::random);
    let ranges = parse_ranges(&args.range)?;
    let m = ranges.len();
    let shape = parse_shape(&args.resolution)?;
    if shape.len() != m {
        return Err(CliError::Usage(format!(
            "--resolution has {} axes but --range has {m}",
            shape.len()
        )));
    }
    let truth = match &args.truth {
        Some(spec) => {
            let packed: Result<Vec<f64>, _> =
                spec.split(',').map(|p| p.trim().parse::<f64>()).collect();
            let packed = packed.map_err(|_| {
                CliError::Usage(format!(
                    "--truth must be comma-separated numbers, got {spec:?}"
                ))
            })?;
            QpParams::from_packed(m, &packed)?
        }
        None => {
            let eye: Vec<Vec<f64>> = (0..m)
                .map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect();
            QpParams::new(eye, vec![0.0; m], -1.0)?
        }
    };
    let spec = SynthSpec {
        shape,
        ranges,
        truth,
        mu1: args.mu1,
        mu2: args.mu2,
        noise_sd: args.noise_sd,
        seed,
    };
    let (grid, labels) = generate_synthetic(&spec)?;
    let out = create(&args.output)?;
    write_grid_csv(&grid, Some(&labels), BufWriter::new(out))?;

    let echo = SynthReport {
        schema: SCHEMA_VERSION,
        output: args.output.display().to_string(),
        spec,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&echo).expect("synth echo serializes")
    );
    Ok(())
}
