//! Command-line front end.
//!
//! Every JSON output carries its [`RunManifest`] under the `manifest` key and
//! every CSV output starts with the manifest as `# key: value` lines. The
//! manifest timestamp is taken from `SOURCE_DATE_EPOCH` when set, so reruns
//! can be byte-identical.
//!
//! Exit codes: 0 success, 1 usage, 2 I/O or parse failure, 3 numerical
//! precondition violation.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::certify::{certify_config, observables_from_config};
use crate::clifford::{
    clifford_family, perturb_pointset, projector_pointset, real_clifford_family,
    verify_metric_relations, ObservableFamily, PairMode, PointConfig,
};
use crate::embed::embed;
use crate::error::{Error, Result};
use crate::group::{homomorphism_defect, DefectMode};
use crate::report::RunManifest;
use crate::sweep::run_sweep;

/// Caps the worker pool size.
pub const THREADS_ENV: &str = "SCHATTEN_RIGIDITY_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "schatten-rigidity",
    version,
    about = "Clifford point configurations in the Schatten-1 norm: construction, verification, certification, embedding"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the canonical point configuration of a Clifford family
    Construct(ConstructArgs),
    /// Check the metric relations of a configuration and report the smallest δ they hold for
    Verify(VerifyArgs),
    /// Run the certification pipeline back to near-anticommuting observables
    Certify(CertifyArgs),
    /// Certify perturbed canonical configurations over a grid of δ and seeds
    Sweep(SweepArgs),
    /// Embed the canonical configuration through near-orthogonal vectors
    Embed(EmbedArgs),
    /// Measure the homomorphism defect of an observable family on C(n)
    GroupCheck(GroupCheckArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    All,
    Sampled,
    Exhaustive,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(long)]
    pub n: usize,
    /// Use the real family (twice the dimension)
    #[arg(long)]
    pub real: bool,
    /// Write the observable family instead of the point configuration
    #[arg(long)]
    pub family: bool,
    /// Perturb the configuration by this δ (Gaussian, Schatten-1 size δ/8 per point)
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub config: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::All)]
    pub mode: Mode,
    /// Pairs checked in sampled mode
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub n: usize,
    /// Comma-separated δ values
    #[arg(long)]
    pub grid: String,
    /// Seeds per δ
    #[arg(long, default_value_t = 10)]
    pub seeds: usize,
    /// First seed; cell seeds are seed, seed + 1, ...
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Configuration JSON; stats go to the same stem with `.stats.json`
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GroupCheckArgs {
    /// Observable family JSON, or a point configuration whose observables are certified first
    pub family: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
    pub mode: Mode,
    #[arg(long, default_value_t = 4096)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_usage() {
        1
    } else if err.is_io() {
        2
    } else {
        3
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let threads: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| Error::InvalidParameter(format!("{THREADS_ENV}={v}")))?;
        builder = builder.num_threads(threads);
    }
    builder
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
}

pub fn run(cli: Cli) -> Result<()> {
    thread_pool()?.install(|| match cli.command {
        Command::Construct(a) => cmd_construct(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Certify(a) => cmd_certify(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Embed(a) => cmd_embed(&a),
        Command::GroupCheck(a) => cmd_group_check(&a),
    })
}

/// `SOURCE_DATE_EPOCH` as RFC 3339, or the current UTC time.
pub fn manifest_timestamp() -> Result<String> {
    use chrono::{DateTime, SecondsFormat, Utc};
    let t = match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(v) => v
            .trim()
            .parse::<i64>()
            .ok()
            .and_then(|s| DateTime::<Utc>::from_timestamp(s, 0))
            .ok_or_else(|| Error::InvalidParameter(format!("SOURCE_DATE_EPOCH={v}")))?,
        Err(_) => Utc::now(),
    };
    Ok(t.to_rfc3339_opts(SecondsFormat::Secs, true))
}

fn manifest(command: &str, seed: u64) -> Result<RunManifest> {
    Ok(RunManifest::new(command, seed, manifest_timestamp()?))
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn read_config(path: &Path) -> Result<PointConfig> {
    let cfg: PointConfig = serde_json::from_value(read_json(path)?)?;
    cfg.validate()?;
    Ok(cfg)
}

fn json_with_manifest<T: Serialize>(body: &T, manifest: &RunManifest) -> Result<String> {
    let mut value = serde_json::to_value(body)?;
    match &mut value {
        Value::Object(map) => {
            map.insert("manifest".into(), serde_json::to_value(manifest)?);
        }
        _ => {
            return Err(Error::Malformed("report is not a JSON object".into()));
        }
    }
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    Ok(text)
}

fn csv_with_manifest(manifest: &RunManifest, write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<String> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    let body = String::from_utf8(buf).map_err(|e| Error::Malformed(e.to_string()))?;
    Ok(format!("{}{body}", manifest.csv_preamble()))
}

/// JSON to `out` (or stdout) and, when `out` is given, the CSV alongside it.
fn emit(out: Option<&Path>, json: String, csv: Option<String>) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, json)?;
            if let Some(csv) = csv {
                fs::write(path.with_extension("csv"), csv)?;
            }
        }
        None => print!("{json}"),
    }
    Ok(())
}

pub fn cmd_construct(a: &ConstructArgs) -> Result<()> {
    let fam = if a.real {
        real_clifford_family(a.n)?
    } else {
        clifford_family(a.n)?
    };
    let m = manifest("construct", a.seed)?
        .with("n", a.n)
        .with("real", a.real)
        .with("family", a.family)
        .with("delta", a.delta);
    let json = if a.family {
        if a.delta != 0.0 {
            return Err(Error::InvalidParameter("--delta applies to point configurations only".into()));
        }
        json_with_manifest(&fam, &m)?
    } else {
        let cfg = perturb_pointset(&projector_pointset(&fam), a.delta, a.seed)?;
        json_with_manifest(&cfg, &m)?
    };
    emit(a.out.as_deref(), json, None)
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<()> {
    let cfg = read_config(&a.config)?;
    let mode = match a.mode {
        Mode::All => PairMode::All,
        Mode::Sampled => PairMode::Sampled { count: a.samples, seed: a.seed },
        Mode::Exhaustive => {
            return Err(Error::InvalidParameter("verify supports --mode all or sampled".into()))
        }
    };
    let report = verify_metric_relations(&cfg, mode)?;
    let m = manifest("verify", a.seed)?
        .with("config", a.config.display())
        .with("mode", format!("{:?}", a.mode).to_lowercase())
        .with("samples", a.samples);
    let csv = csv_with_manifest(&m, |buf| report.write_csv(buf))?;
    emit(a.out.as_deref(), json_with_manifest(&report, &m)?, Some(csv))
}

pub fn cmd_certify(a: &CertifyArgs) -> Result<()> {
    let cfg = read_config(&a.config)?;
    let report = certify_config(&cfg)?;
    let m = manifest("certify", 0)?.with("config", a.config.display());
    let csv = csv_with_manifest(&m, |buf| report.write_csv(buf))?;
    emit(a.out.as_deref(), json_with_manifest(&report, &m)?, Some(csv))
}

fn parse_grid(grid: &str) -> Result<Vec<f64>> {
    grid.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("grid value {s:?} is not a number")))
        })
        .collect()
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let grid = parse_grid(&a.grid)?;
    let table = run_sweep(a.n, &grid, a.seeds, a.seed)?;
    log::info!("median trend (Spearman rho) = {}", table.median_trend());
    let m = manifest("sweep", a.seed)?
        .with("n", a.n)
        .with("grid", &a.grid)
        .with("seeds", a.seeds);
    let csv = csv_with_manifest(&m, |buf| table.write_csv(buf))?;
    match &a.out {
        Some(path) => fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

pub fn cmd_embed(a: &EmbedArgs) -> Result<()> {
    let (cfg, stats) = embed(a.n, a.delta, a.seed)?;
    let m = manifest("embed", a.seed)?
        .with("n", a.n)
        .with("delta", a.delta);
    let stats_json = json_with_manifest(&stats, &m)?;
    match &a.out {
        Some(path) => {
            fs::write(path, json_with_manifest(&cfg, &m)?)?;
            fs::write(path.with_extension("stats.json"), stats_json)?;
        }
        None => print!("{stats_json}"),
    }
    Ok(())
}

fn read_family(path: &Path) -> Result<ObservableFamily> {
    let value = read_json(path)?;
    if value.get("ops").is_some() {
        let fam: ObservableFamily = serde_json::from_value(value)?;
        fam.validate()?;
        Ok(fam)
    } else if value.get("X").is_some() {
        let cfg: PointConfig = serde_json::from_value(value)?;
        observables_from_config(&cfg)
    } else {
        Err(Error::Malformed(
            "expected an observable family (ops) or a point configuration (X, Y)".into(),
        ))
    }
}

pub fn cmd_group_check(a: &GroupCheckArgs) -> Result<()> {
    let fam = read_family(&a.family)?;
    let mode = match a.mode {
        Mode::Exhaustive => DefectMode::Exhaustive,
        Mode::Sampled => DefectMode::Sampled { count: a.samples, seed: a.seed },
        Mode::All => {
            return Err(Error::InvalidParameter(
                "group-check supports --mode exhaustive or sampled".into(),
            ))
        }
    };
    let report = homomorphism_defect(&fam, mode)?;
    let m = manifest("group-check", a.seed)?
        .with("family", a.family.display())
        .with("mode", format!("{:?}", a.mode).to_lowercase())
        .with("samples", a.samples);
    let csv = csv_with_manifest(&m, |buf| report.write_csv(buf))?;
    emit(a.out.as_deref(), json_with_manifest(&report, &m)?, Some(csv))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("1e-6, 1e-4,1e-2").unwrap(), vec![1e-6, 1e-4, 1e-2]);
        assert!(parse_grid("1e-6,x").is_err());
    }

    #[test]
    fn exit_code_classes() {
        assert_eq!(exit_code(&Error::InvalidParameter("x".into())), 1);
        assert_eq!(exit_code(&Error::Malformed("x".into())), 2);
        assert_eq!(exit_code(&Error::NeedTwoPairs), 3);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(main_with_args(["schatten-rigidity", "construct"]), 1);
        assert_eq!(main_with_args(["schatten-rigidity", "bogus"]), 1);
    }
}
