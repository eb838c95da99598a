//! Command-line front end: `list`, `classify`, `verify`, `report`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::catalog::{inventory, CatalogError, CatalogId};
use crate::connection_geometry::DEFAULT_FD_STEP;
use crate::theorem_checks::{
    read_report, run_suite, summarize, write_csv, write_json, Mutation, SuiteConfig, SuiteError,
    SuiteTarget, Tolerances, DEFAULT_MARGIN,
};

/// Environment variable holding the worker count for `verify`.
pub const WORKERS_ENV: &str = "SLANTLAB_WORKERS";

const DEFAULT_K: usize = 2;

#[derive(Debug, Parser)]
#[command(name = "slantlab", version, about = "Slant geometry of submanifolds of flat Kähler space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the catalog fixtures.
    List,
    /// Print the slant decomposition at one parameter point.
    Classify {
        /// Catalog id (`pointwise:2`, `kslant:3`, `geodesic`) or DSL file.
        target: String,
        /// Comma-separated parameter coordinates, e.g. `0.3,0.2,0.5`.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// k for catalog ids given without one.
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
    },
    /// Run the identity suite and write a report.
    Verify {
        target: String,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Tolerance override `class=value`; repeatable.
        #[arg(long = "tol")]
        tol: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_FD_STEP)]
        fd_step: f64,
        #[arg(long, default_value_t = DEFAULT_MARGIN)]
        margin: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Output file; the report goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Corrupt the target on purpose to exercise a check.
        #[arg(long)]
        mutation: Option<String>,
    },
    /// Re-summarize a stored JSON report.
    Report { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Failure of a subcommand, carrying its exit code.
struct Exit {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Exit {
    Exit {
        code: 2,
        message: message.into(),
    }
}

impl From<SuiteError> for Exit {
    fn from(e: SuiteError) -> Self {
        let code = match e {
            SuiteError::Geometry(_) | SuiteError::Sampling(_) => 1,
            _ => 2,
        };
        Exit {
            code,
            message: e.to_string(),
        }
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code: 0 on success, 1 if a check failed, 2 on usage or
/// input errors.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::List => list(),
        Command::Classify { target, point, k } => classify(&target, &point, k),
        Command::Verify {
            target,
            k,
            points,
            seed,
            tol,
            fd_step,
            margin,
            format,
            out,
            mutation,
        } => (|| {
            let mut config = SuiteConfig::new(resolve_target(&target, k)?);
            config.points = points;
            config.seed = seed;
            config.fd_step = fd_step;
            config.margin = margin;
            config.tolerances = Tolerances::default();
            for t in &tol {
                config.tolerances.apply_override(t).map_err(Exit::from)?;
            }
            config.mutation = mutation
                .map(|m| m.parse::<Mutation>().map_err(|e| usage(e.to_string())))
                .transpose()?;
            config.workers = workers_from_env()?;
            verify(&config, format, out.as_deref())
        })(),
        Command::Report { path } => report(&path),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("slantlab: {}", e.message);
            e.code
        }
    }
}

fn workers_from_env() -> Result<Option<usize>, Exit> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(usage(format!("{WORKERS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}

/// A catalog id, or otherwise a path to a DSL file.
fn resolve_target(target: &str, k: usize) -> Result<SuiteTarget, Exit> {
    match target.parse::<CatalogId>() {
        Ok(id) => Ok(SuiteTarget::Catalog(id.build(k).map_err(SuiteError::from)?)),
        Err(CatalogError::UnknownId(_)) => {
            let path = Path::new(target);
            if !path.is_file() {
                return Err(usage(format!("{target}: file not found and not a catalog id")));
            }
            Ok(SuiteTarget::from_dsl_file(path)?)
        }
        Err(e) => Err(SuiteError::from(e).into()),
    }
}

fn list() -> Result<i32, Exit> {
    let mut out = std::io::stdout().lock();
    for (id, description) in inventory() {
        let _ = writeln!(out, "{id:<16} {description}");
    }
    Ok(0)
}

fn parse_point(s: &str) -> Result<Vec<f64>, Exit> {
    s.split(',')
        .map(|c| {
            c.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| usage(format!("bad coordinate `{c}` in --point")))
        })
        .collect()
}

fn classify(target: &str, point: &str, k: usize) -> Result<i32, Exit> {
    let target = resolve_target(target, k)?;
    let x = parse_point(point)?;
    let immersion = target.immersion();
    let program = &immersion.program;
    if x.len() != program.arity {
        return Err(usage(format!(
            "--point has {} coordinates, the immersion takes {}",
            x.len(),
            program.arity
        )));
    }
    if let Some(p) = program.domain.iter().find(|p| !p.admits(&x, 0.0)) {
        return Err(usage(format!("point lies outside the domain: `{p}` is violated")));
    }
    let tolerances = Tolerances::default();
    let g = immersion.geometry(&x, tolerances.cluster).map_err(SuiteError::from)?;
    let dec = &g.decomposition;

    let labels: Vec<String> = match target.fixture() {
        Some(fx) => dec
            .clusters
            .iter()
            .map(|c| {
                (0..fx.distribution_count())
                    .filter_map(|i| fx.expected_cos2_at(i, &x).ok().map(|e| (i, (e - c.cos2).abs())))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .map(|(i, _)| format!("D{i}"))
                    .unwrap_or_else(|| "?".into())
            })
            .collect(),
        None => crate::theorem_checks::cluster_labels(dec)
            .into_iter()
            .map(|i| format!("D{i}"))
            .collect(),
    };

    let mut out = std::io::stdout().lock();
    let _ = writeln!(
        out,
        "{}: dimension {} in R^{} at ({})",
        target.label(),
        g.dim(),
        g.ambient_dim(),
        point
    );
    let _ = writeln!(
        out,
        "{:<6} {:>4} {:>14} {:>14} {:>10}  kind",
        "label", "mult", "cos^2", "theta", "theta/pi"
    );
    for (c, label) in dec.clusters.iter().zip(&labels) {
        let _ = writeln!(
            out,
            "{:<6} {:>4} {:>14.10} {:>14.10} {:>10.6}  {:?}",
            label,
            c.multiplicity,
            c.cos2,
            c.angle,
            c.angle / std::f64::consts::PI,
            c.kind
        );
    }
    let _ = writeln!(
        out,
        "multiplicities {:?}; spectrum paired: {}; ambiguous: {}",
        dec.multiplicities(),
        dec.paired,
        dec.ambiguous
    );
    Ok(0)
}

fn verify(config: &SuiteConfig, format: Format, out: Option<&Path>) -> Result<i32, Exit> {
    let report = run_suite(config)?;
    let mut buf = Vec::new();
    match format {
        Format::Json => write_json(&report, &mut buf)?,
        Format::Csv => write_csv(&report, &mut buf)?,
    }
    match out {
        Some(path) => {
            std::fs::write(path, &buf).map_err(|source| {
                Exit::from(SuiteError::Io {
                    path: path.display().to_string(),
                    source,
                })
            })?;
            let _ = std::io::stdout().lock().write_all(report.render_summary().as_bytes());
        }
        None => {
            let _ = std::io::stdout().lock().write_all(&buf);
        }
    }
    if report.all_ambiguous() {
        eprintln!("slantlab: every sampled point had an ambiguous slant clustering");
    }
    Ok(report.exit_code())
}

fn report(path: &Path) -> Result<i32, Exit> {
    if !path.is_file() {
        return Err(usage(format!("{}: file not found", path.display())));
    }
    let mut report = read_report(path)?;
    // Trust the results, not a possibly hand-edited summary.
    report.summary = summarize(&report.results);
    // Write errors (a closed pipe, say) are not worth a panic.
    let mut out = std::io::stdout().lock();
    let _ = writeln!(
        out,
        "target {} ({} points, seed {})",
        report.config.target, report.config.points, report.config.seed
    );
    if let Some(m) = &report.config.mutation {
        let _ = writeln!(out, "mutation {m}");
    }
    let _ = out.write_all(report.render_summary().as_bytes());
    for (pattern, count) in &report.histogram {
        let _ = writeln!(out, "multiplicities {pattern}: {count} points");
    }
    for a in &report.evidence.angles {
        let _ = writeln!(
            out,
            "{} angle mean {:.10} stddev {:.3e} over {} points",
            a.distribution, a.mean, a.stddev, a.samples
        );
    }
    Ok(report.exit_code())
}
