//! `grouplab` command line: flag and config parsing, dispatch, report output.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::experiments::{dimension_rows, laplacian_rows, Ctx, Experiment, ExperimentConfig, RunOutput, SCHEMA_VERSION};
use crate::group::{Family, GroupSpec};

pub const SEED_ENV: &str = "GROUPLAB_SEED";
pub const DEFAULT_SEED: u64 = 42;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "grouplab", version, about = "Haar sampling, representation audits and Monte-Carlo checks on compact matrix groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
enum Command {
    /// Unitarity, determinant and second-moment checks of the Haar sampler.
    HaarCheck,
    /// Gaussian coupling, ν-moments, GMD moments, λ_S and noise checks.
    Coupling,
    /// Dimensions of all representations up to a level, against the lower bounds (CSV).
    Dims,
    /// Laplacian eigenvalues up to a level, against 0 ≥ λ ≥ −2D² − 2nD (CSV).
    Laplacian,
    /// Low-degree weight of cap indicators.
    LevelD,
    /// Convolution forms of caps.
    Mixing,
    /// Products of negative caps.
    ProductFree,
    /// Lower bounds on μ(A²) from ‖f*f‖².
    Doubling,
    /// Exact dimension, Littlewood–Richardson and Laplacian audits.
    ReprAudit,
    /// Every experiment in sequence.
    All,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::HaarCheck => "haar-check",
            Command::Coupling => "coupling",
            Command::Dims => "dims",
            Command::Laplacian => "laplacian",
            Command::LevelD => "level-d",
            Command::Mixing => "mixing",
            Command::ProductFree => "product-free",
            Command::Doubling => "doubling",
            Command::ReprAudit => "repr-audit",
            Command::All => "all",
        }
    }
}

#[derive(Debug, Clone, Args)]
struct Opts {
    /// Group family: so, su, sp or spin.
    #[arg(long, global = true)]
    family: Option<Family>,
    /// Matrix size / rank parameter.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Master seed; falls back to $GROUPLAB_SEED, then 42.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Sets every Monte-Carlo sample count of the selected experiments.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// JSON report path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Per-cell (or per-row) CSV path.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// TOML file with one section per experiment.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Highest level for dims and laplacian.
    #[arg(long, global = true)]
    dmax: Option<u32>,
    /// Record wall times in the report (makes it run-dependent).
    #[arg(long, global = true)]
    timing: bool,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            eprintln!("grouplab: {e}");
            EXIT_USAGE
        }
    }
}

fn resolve_seed(opt: Option<u64>) -> Result<u64> {
    if let Some(s) = opt {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Error::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn write(path: &PathBuf, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

fn execute(cli: &Cli) -> Result<bool> {
    let o = &cli.opts;
    let seed = resolve_seed(o.seed)?;
    let mut cfg = match &o.config {
        Some(p) => ExperimentConfig::from_toml(&fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?)?,
        None => ExperimentConfig::default(),
    };
    if o.dmax.is_some() && !matches!(cli.command, Command::Dims | Command::Laplacian) {
        return Err(Error::Config(format!("--dmax does not apply to {}", cli.command.name())));
    }
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(j) = o.jobs {
            if j == 0 {
                return Err(Error::Config("--jobs must be at least 1".into()));
            }
            b = b.num_threads(j);
        }
        b.build().map_err(|e| Error::Config(e.to_string()))?
    };
    match cli.command {
        Command::Dims | Command::Laplacian => pool.install(|| tables(cli.command, o)),
        cmd => {
            apply_overrides(cmd, o, &mut cfg)?;
            let ctx = Ctx { seed, timing: o.timing };
            let experiments: Vec<Experiment> = match cmd {
                Command::HaarCheck => vec![Experiment::Haar],
                Command::Coupling => vec![Experiment::Coupling],
                Command::LevelD => vec![Experiment::LevelD],
                Command::Mixing => vec![Experiment::Mixing],
                Command::ProductFree => vec![Experiment::ProductFree],
                Command::Doubling => vec![Experiment::Doubling],
                Command::ReprAudit => vec![Experiment::ReprAudit],
                _ => Experiment::ALL.to_vec(),
            };
            let reports = pool.install(|| experiments.iter().map(|e| e.run(&cfg, &ctx)).collect::<Result<Vec<_>>>())?;
            let echo = json!({"seed": seed, "experiments": cfg});
            let output = RunOutput::new(cmd.name(), echo, reports);
            print!("{}", output.to_text());
            if let Some(p) = &o.out {
                write(p, &output.to_json())?;
            }
            if let Some(p) = &o.csv {
                write(p, &output.to_csv())?;
            }
            Ok(output.reports.iter().all(|r| r.passed()))
        }
    }
}

fn require_so(cmd: Command, family: Option<Family>) -> Result<()> {
    match family {
        None | Some(Family::SO) => Ok(()),
        Some(f) => Err(Error::Config(format!("{} runs on SO(n) only, got --family {f}", cmd.name()))),
    }
}

fn apply_overrides(cmd: Command, o: &Opts, cfg: &mut ExperimentConfig) -> Result<()> {
    if let Some(s) = o.samples {
        if s == 0 {
            return Err(Error::Config("--samples must be positive".into()));
        }
        cfg.override_samples(s);
    }
    let reject = |flag: &str| Err(Error::Config(format!("{flag} does not apply to {}; use --config", cmd.name())));
    match cmd {
        Command::HaarCheck => {
            if let Some(f) = o.family {
                cfg.haar.family = f;
            }
            if let Some(n) = o.n {
                cfg.haar.n = n;
            }
        }
        Command::Coupling => {
            require_so(cmd, o.family)?;
            if let Some(n) = o.n {
                cfg.coupling.roundtrip_n = n;
                cfg.coupling.diagonal_n = n;
                cfg.coupling.noise_n = n;
            }
        }
        Command::LevelD => {
            require_so(cmd, o.family)?;
            if let Some(n) = o.n {
                cfg.level_d.n = n;
            }
        }
        Command::ProductFree => {
            require_so(cmd, o.family)?;
            if let Some(n) = o.n {
                cfg.product_free.ns = vec![n];
            }
        }
        Command::Mixing => {
            require_so(cmd, o.family)?;
            if let Some(n) = o.n {
                let m = &mut cfg.mixing;
                (m.whole_n, m.typical_n, m.aligned_n, m.anti_n, m.sweep_n) = (n, n, n, n, n);
            }
        }
        Command::Doubling => {
            require_so(cmd, o.family)?;
            if let Some(n) = o.n {
                cfg.doubling.n = n;
            }
        }
        Command::ReprAudit | Command::All => {
            if o.family.is_some() {
                return reject("--family");
            }
            if o.n.is_some() {
                return reject("--n");
            }
        }
        Command::Dims | Command::Laplacian => unreachable!("tables are dispatched separately"),
    }
    if let Some(n) = o.n {
        if n < 2 {
            return Err(Error::Config(format!("--n {n} is too small")));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct TableOutput<R: Serialize> {
    schema: u32,
    command: &'static str,
    config: serde_json::Value,
    rows: Vec<R>,
    verdict: &'static str,
}

fn tables(cmd: Command, o: &Opts) -> Result<bool> {
    let family = o.family.unwrap_or(Family::SO);
    let n = o.n.ok_or_else(|| Error::Config(format!("{} needs --n", cmd.name())))?;
    let g = GroupSpec::new(family, n).map_err(|e| Error::Config(e.to_string()))?;
    let echo = |dmax: u32| json!({"family": family, "n": n, "dmax": dmax});
    let (csv, json, pass) = if cmd == Command::Dims {
        let dmax = o.dmax.unwrap_or(6);
        let rows = dimension_rows(&g, dmax)?;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["family", "n", "partition", "level", "dimension", "bound", "kind", "pass"]).expect("in-memory write");
        for r in &rows {
            let bound = r.bound.map(|b| format!("{b:.6}")).unwrap_or_default();
            let kind = serde_json::to_value(r.kind).expect("serializes").as_str().unwrap_or_default().to_string();
            w.write_record([r.family.to_string(), r.n.to_string(), r.partition.to_string(), r.level.to_string(), r.dimension.clone(), bound, kind, r.pass.to_string()])
                .expect("in-memory write");
        }
        let pass = rows.iter().all(|r| r.pass);
        let out = TableOutput { schema: SCHEMA_VERSION, command: "dims", config: echo(dmax), rows, verdict: if pass { "pass" } else { "fail" } };
        (into_string(w), serde_json::to_string_pretty(&out).expect("serializes"), pass)
    } else {
        let dmax = o.dmax.unwrap_or(8);
        let rows = laplacian_rows(&g, dmax)?;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["family", "n", "partition", "level", "eigenvalue", "bound", "pass"]).expect("in-memory write");
        for r in &rows {
            w.write_record([r.family.to_string(), r.n.to_string(), r.partition.to_string(), r.level.to_string(), r.eigenvalue.clone(), r.bound.to_string(), r.pass.to_string()])
                .expect("in-memory write");
        }
        let pass = rows.iter().all(|r| r.pass);
        let out = TableOutput { schema: SCHEMA_VERSION, command: "laplacian", config: echo(dmax), rows, verdict: if pass { "pass" } else { "fail" } };
        (into_string(w), serde_json::to_string_pretty(&out).expect("serializes"), pass)
    };
    print!("{csv}");
    if let Some(p) = &o.out {
        write(p, &(json + "\n"))?;
    }
    if let Some(p) = &o.csv {
        write(p, &csv)?;
    }
    Ok(pass)
}

fn into_string(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(args: &[&str]) -> i32 {
        run(std::iter::once("grouplab").chain(args.iter().copied()))
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        assert_eq!(code(&["frobnicate"]), EXIT_USAGE);
        assert_eq!(code(&[]), EXIT_USAGE);
    }

    #[test]
    fn inapplicable_flags_are_usage_errors() {
        assert_eq!(code(&["repr-audit", "--n", "5"]), EXIT_USAGE);
        assert_eq!(code(&["level-d", "--family", "su"]), EXIT_USAGE);
        assert_eq!(code(&["haar-check", "--dmax", "3"]), EXIT_USAGE);
        assert_eq!(code(&["dims", "--family", "so"]), EXIT_USAGE);
    }

    #[test]
    fn dims_example_passes() {
        assert_eq!(code(&["dims", "--family", "so", "--n", "11", "--dmax", "6"]), EXIT_PASS);
    }

    #[test]
    fn laplacian_table_passes() {
        assert_eq!(code(&["laplacian", "--family", "su", "--n", "5", "--dmax", "5"]), EXIT_PASS);
    }

    #[test]
    fn laplacian_sp_vector_rep_exceeds_envelope() {
        assert_eq!(code(&["laplacian", "--family", "sp", "--n", "2", "--dmax", "1"]), EXIT_FAIL);
    }
}
