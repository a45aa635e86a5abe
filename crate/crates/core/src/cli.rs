//! The `bures` command line.
//!
//! Exit codes: 0 success, 1 failed verification, 2 usage error,
//! 3 numerical non-convergence.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::closed_form::*;
use crate::density::{density_moment, DensityGrid, MomentWeight};
use crate::oracle::{constrained_average_m2, constrained_average_m3, unconstrained_average, OracleStatistic};
use crate::record::{OutputFormat, ResultRow, RunRecord};
use crate::sampling::{
    sample_bures_matrix_model, sample_unconstrained_mcmc, McmcConfig, SampleBatch, SampleMethod, Statistic,
};
use crate::verify::{run_verify, Level};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Seed used when neither `--seed`, the config file nor `BURES_SEED` give one.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "bures", version, about = "Bures-Hall ensemble entanglement entropies")]
struct Cli {
    /// TOML file of defaults, keyed by flag name; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form averages.
    Exact(Ensemble),
    /// Monte Carlo estimates next to the closed forms.
    Sample(SampleArgs),
    /// Brute-force quadrature of the joint density (m = 2, 3).
    Quadrature(QuadratureArgs),
    /// Tabulate the one-point density to CSV and check its moments.
    Density(DensityArgs),
    /// Run the verification suite.
    Verify(VerifyArgs),
}

/// `(m, n)` or `(m, α)`; never both `n` and `α`.
#[derive(Debug, Args)]
struct Ensemble {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, conflicts_with = "alpha")]
    n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Method {
    Mcmc,
    MatrixModel,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[command(flatten)]
    ensemble: Ensemble,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thinning: Option<usize>,
    #[arg(long)]
    step_scale: Option<f64>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// Also write the draws as CSV (with a `.meta.json` sidecar).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct QuadratureArgs {
    #[command(flatten)]
    ensemble: Ensemble,
    #[arg(long)]
    tol: Option<f64>,
    /// Integrate the unconstrained density instead (m = 1, 2).
    #[arg(long)]
    unconstrained: bool,
}

#[derive(Debug, Args)]
struct DensityArgs {
    #[command(flatten)]
    ensemble: Ensemble,
    #[arg(long, allow_hyphen_values = true)]
    x_min: Option<f64>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum LevelArg {
    Fast,
    Full,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    level: Option<LevelArg>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Config file contents; every key is a flag name.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FileConfig {
    format: Option<Format>,
    m: Option<usize>,
    n: Option<usize>,
    alpha: Option<f64>,
    count: Option<usize>,
    seed: Option<u64>,
    burn_in: Option<usize>,
    thinning: Option<usize>,
    step_scale: Option<f64>,
    method: Option<Method>,
    out: Option<PathBuf>,
    tol: Option<f64>,
    unconstrained: Option<bool>,
    x_min: Option<f64>,
    x_max: Option<f64>,
    points: Option<usize>,
    level: Option<LevelArg>,
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_USAGE },
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn load_config(path: Option<&Path>) -> CliResult<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::usage(format!("bad config {}: {e}", path.display())))
}

/// Flags win; the file's `n`/`alpha` pair is dropped as a whole when
/// either is given on the command line.
#[derive(Debug, Clone, Copy)]
enum Resolved {
    Dims(Dims),
    Params(EnsembleParams),
}

impl Resolved {
    fn params(self) -> EnsembleParams {
        match self {
            Resolved::Dims(d) => d.params(),
            Resolved::Params(p) => p,
        }
    }

    fn record(self, r: &mut RunRecord) {
        match self {
            Resolved::Dims(d) => {
                r.param("m", d.m).param("n", d.n);
            }
            Resolved::Params(p) => {
                r.param("m", p.m).param("alpha", p.alpha);
            }
        }
    }
}

fn resolve(e: &Ensemble, file: &FileConfig) -> CliResult<Resolved> {
    let m = e.m.or(file.m).ok_or_else(|| Failure::usage("--m is required"))?;
    let (n, alpha) = if e.n.is_some() || e.alpha.is_some() {
        (e.n, e.alpha)
    } else {
        (file.n, file.alpha)
    };
    match (n, alpha) {
        (Some(_), Some(_)) => Err(Failure::usage("give either --n or --alpha, not both")),
        (Some(n), None) => Ok(Resolved::Dims(Dims::new(m, n)?)),
        (None, Some(a)) => Ok(Resolved::Params(EnsembleParams::new(m, a)?)),
        (None, None) => Err(Failure::usage("one of --n or --alpha is required")),
    }
}

fn resolve_seed(flag: Option<u64>, file: &FileConfig) -> CliResult<u64> {
    if let Some(s) = flag.or(file.seed) {
        return Ok(s);
    }
    match std::env::var("BURES_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("BURES_SEED = {v:?} is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Failure::usage(format!("--{name} must be positive, got {v}")))
    }
}

fn cmd_exact(e: &Ensemble, file: &FileConfig) -> CliResult<RunRecord> {
    let ens = resolve(e, file)?;
    let p = ens.params();
    let mut r = RunRecord::new("exact");
    ens.record(&mut r);
    r.push(ResultRow::new("alpha", p.alpha));
    if let Resolved::Dims(d) = ens {
        r.push(ResultRow::new("S_P (m, n form)", avg_purity_bures(d)));
        r.push(ResultRow::new("S_vN (m, n form)", avg_vn_bures(d)));
    }
    r.push(ResultRow::new("S_P", avg_purity_general(p)));
    r.push(ResultRow::new("S_vN", avg_vn_general(p)));
    r.push(ResultRow::new("E_h[T_P]", induced_purity_mean(p)));
    r.push(ResultRow::new("E_h[T_vN]", induced_vn_mean(p)));
    Ok(r)
}

fn stat_reference(statistic: Statistic, p: EnsembleParams) -> f64 {
    match statistic {
        Statistic::SP => avg_purity_general(p),
        Statistic::SvN => avg_vn_general(p),
        Statistic::TP => induced_purity_mean(p),
        Statistic::TvN => induced_vn_mean(p),
        Statistic::TraceSum => p.trace_shape(),
    }
}

fn cmd_sample(a: &SampleArgs, file: &FileConfig) -> CliResult<RunRecord> {
    let ens = resolve(&a.ensemble, file)?;
    let p = ens.params();
    let seed = resolve_seed(a.seed, file)?;
    let count = a.count.or(file.count).unwrap_or(100_000);
    let method = a.method.or(file.method).unwrap_or(Method::Mcmc);
    let mut r = RunRecord::new("sample");
    ens.record(&mut r);
    r.seed = Some(seed);
    r.param("count", count);
    let batch: SampleBatch = match method {
        Method::Mcmc => {
            let mut cfg = McmcConfig::new(p.m, count, seed);
            cfg.burn_in = a.burn_in.or(file.burn_in).unwrap_or(cfg.burn_in);
            cfg.thinning = a.thinning.or(file.thinning).unwrap_or(cfg.thinning);
            cfg.step_scale = a.step_scale.or(file.step_scale).unwrap_or(cfg.step_scale);
            r.param("method", "mcmc")
                .param("burn_in", cfg.burn_in)
                .param("thinning", cfg.thinning)
                .param("step_scale", cfg.step_scale);
            sample_unconstrained_mcmc(p, cfg)?
        }
        Method::MatrixModel => {
            let Resolved::Dims(d) = ens else {
                return Err(Failure::usage("--method matrix-model needs --n, not --alpha"));
            };
            r.param("method", "matrix-model");
            r.param("experimental", d.m < d.n);
            sample_bures_matrix_model(d, count, seed)?
        }
    };
    let statistics: &[Statistic] = match batch.method {
        SampleMethod::McmcUnconstrained => {
            &[Statistic::SP, Statistic::SvN, Statistic::TP, Statistic::TvN, Statistic::TraceSum]
        }
        SampleMethod::MatrixModel => &[Statistic::SP, Statistic::SvN],
    };
    for &s in statistics {
        let est = batch.entropy_stats(s)?;
        r.push(
            ResultRow::new(s.name(), est.mean)
                .with_std_err(est.std_err)
                .with_reference(stat_reference(s, p)),
        );
    }
    if batch.method == SampleMethod::McmcUnconstrained {
        r.push(ResultRow::new("acceptance_rate", batch.acceptance_rate));
    }
    if let Some(out) = a.out.as_ref().or(file.out.as_ref()) {
        batch
            .write_csv(out)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", out.display())))?;
        r.param("out", out.display().to_string());
    }
    Ok(r)
}

fn cmd_quadrature(a: &QuadratureArgs, file: &FileConfig) -> CliResult<RunRecord> {
    let ens = resolve(&a.ensemble, file)?;
    let p = ens.params();
    let unconstrained = a.unconstrained || file.unconstrained.unwrap_or(false);
    let mut r = RunRecord::new("quadrature");
    ens.record(&mut r);
    r.param("ensemble", if unconstrained { "unconstrained" } else { "constrained" });
    let rows: Vec<(OracleStatistic, f64)> = if unconstrained {
        if !(1..=2).contains(&p.m) {
            return Err(Failure::usage("unconstrained quadrature supports m = 1, 2"));
        }
        vec![
            (OracleStatistic::TP, induced_purity_mean(p)),
            (OracleStatistic::TvN, induced_vn_mean(p)),
            (OracleStatistic::TraceSum, p.trace_shape()),
            (OracleStatistic::Unity, 1.0),
        ]
    } else {
        if !(2..=3).contains(&p.m) {
            return Err(Failure::usage("constrained quadrature supports m = 2, 3"));
        }
        vec![
            (OracleStatistic::SP, avg_purity_general(p)),
            (OracleStatistic::SvN, avg_vn_general(p)),
            (OracleStatistic::Unity, 1.0),
        ]
    };
    let default_tol = if p.m == 3 && !unconstrained { 1e-6 } else { 1e-8 };
    let tol = positive("tol", a.tol.or(file.tol).unwrap_or(default_tol))?;
    r.param("tol", tol);
    // a tenth of the budget goes to the integrator, the rest is reporting slack
    let inner = tol / 10.0;
    for (s, reference) in rows {
        let q = match (unconstrained, p.m) {
            (true, m) => unconstrained_average(m, p.alpha, s, inner)?,
            (false, 2) => constrained_average_m2(p.alpha, s, inner)?,
            (false, _) => constrained_average_m3(p.alpha, s, inner)?,
        };
        r.push(
            ResultRow::new(s.name(), q.value)
                .with_reference(reference)
                .with_error_estimate(q.abs_error_estimate)
                .with_tolerance(tol),
        );
    }
    Ok(r)
}

fn cmd_density(a: &DensityArgs, file: &FileConfig) -> CliResult<RunRecord> {
    let ens = resolve(&a.ensemble, file)?;
    let p = ens.params();
    let x_min = positive("x-min", a.x_min.or(file.x_min).unwrap_or(1e-3))?;
    let x_max = positive("x-max", a.x_max.or(file.x_max).unwrap_or(30.0))?;
    let points = a.points.or(file.points).unwrap_or(200);
    let tol = positive("tol", a.tol.or(file.tol).unwrap_or(crate::density::DEFAULT_POINT_TOL))?;
    let out = a
        .out
        .clone()
        .or_else(|| file.out.clone())
        .unwrap_or_else(|| PathBuf::from("density.csv"));
    let xs = DensityGrid::log_spaced(x_min, x_max, points)?;
    let grid = DensityGrid::compute(p, &xs, tol)?;
    std::fs::write(&out, grid.to_csv())
        .map_err(|e| Failure::usage(format!("cannot write {}: {e}", out.display())))?;
    let mut r = RunRecord::new("density");
    ens.record(&mut r);
    r.param("x_min", x_min)
        .param("x_max", x_max)
        .param("points", points)
        .param("tol", tol)
        .param("out", out.display().to_string());
    let moment_tol = crate::density::DEFAULT_MOMENT_TOL;
    let m = p.m as f64;
    for w in MomentWeight::ALL {
        let q = density_moment(p, w, moment_tol / 100.0)?;
        let (value, reference, gate) = match w {
            MomentWeight::Unity => (q.value / m, 1.0, moment_tol),
            MomentWeight::X => (q.value, p.trace_shape(), moment_tol),
            MomentWeight::XSquared => (q.value, induced_purity_mean(p), moment_tol),
            MomentWeight::XLogX => (q.value, induced_vn_mean(p), 10.0 * moment_tol),
        };
        let name = match w {
            MomentWeight::Unity => "normalisation".to_string(),
            other => format!("moment {}", other.name()),
        };
        r.push(ResultRow::new(name, value).with_reference(reference).with_tolerance(gate));
    }
    Ok(r)
}

fn cmd_verify(a: &VerifyArgs, file: &FileConfig) -> CliResult<RunRecord> {
    let level = match a.level.or(file.level).unwrap_or(LevelArg::Fast) {
        LevelArg::Fast => Level::Fast,
        LevelArg::Full => Level::Full,
    };
    let seed = resolve_seed(a.seed, file)?;
    Ok(run_verify(level, seed))
}

/// Parses `args` (including the program name), runs the command and
/// writes its output; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let start = Instant::now();
    let outcome = load_config(cli.config.as_deref()).and_then(|file| {
        let format = cli.format.or(file.format).unwrap_or(Format::Table);
        let record = match &cli.command {
            Command::Exact(e) => cmd_exact(e, &file),
            Command::Sample(a) => cmd_sample(a, &file),
            Command::Quadrature(a) => cmd_quadrature(a, &file),
            Command::Density(a) => cmd_density(a, &file),
            Command::Verify(a) => cmd_verify(a, &file),
        }?;
        Ok((record, format))
    });
    match outcome {
        Ok((mut record, format)) => {
            record.elapsed_ms = start.elapsed().as_millis() as u64;
            let format = match format {
                Format::Table => OutputFormat::Table,
                Format::Json => OutputFormat::Json,
                Format::Csv => OutputFormat::Csv,
            };
            let _ = write!(out, "{}", record.render(format));
            if record.command == "verify" && !record.all_passed() {
                let failed: Vec<&str> = record
                    .results
                    .iter()
                    .filter(|r| r.passed == Some(false))
                    .map(|r| r.name.as_str())
                    .collect();
                let _ = writeln!(err, "{} check(s) failed:", failed.len());
                for name in failed {
                    let _ = writeln!(err, "  {name}");
                }
                return EXIT_VERIFY_FAILED;
            }
            EXIT_OK
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("bures").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn ensemble_resolution() {
        let file = FileConfig {
            n: Some(3),
            ..Default::default()
        };
        let e = Ensemble {
            m: Some(2),
            n: None,
            alpha: Some(0.0),
        };
        // a flag for α displaces the file's n instead of clashing with it
        assert!(matches!(resolve(&e, &file).unwrap(), Resolved::Params(_)));
        let both = FileConfig {
            n: Some(3),
            alpha: Some(0.0),
            ..Default::default()
        };
        let bare = Ensemble {
            m: Some(2),
            n: None,
            alpha: None,
        };
        assert_eq!(resolve(&bare, &both).unwrap_err().code, EXIT_USAGE);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_str(&["exact", "--m", "2", "--n", "2"]).0, EXIT_OK);
        assert_eq!(run_str(&["exact", "--m", "3", "--n", "2"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["exact", "--m", "2", "--alpha", "-1"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["exact", "--m", "2", "--n", "2", "--alpha", "0"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["quadrature", "--m", "4", "--n", "4"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn exact_table_uses_twelve_digits() {
        let (_, out, _) = run_str(&["exact", "--m", "2", "--n", "2"]);
        assert!(out.contains("0.875"));
        assert!(out.contains("0.219627694453"), "{out}");
    }
}
