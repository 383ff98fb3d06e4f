//! Command-line front end: `coeffs`, `check`, `run` and `orders`.
//!
//! Exit codes: 0 success, 1 parse or configuration error, 2 condition
//! violation, 3 I/O error, 4 numerical failure.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{Config, ParseError};
use crate::diagnostics::{check_conditions, growth_bound_fit, ConditionReport, GrowthFit};
use crate::dynamics::{simulate, RunRecord, RunStatus};
use crate::error::Error;
use crate::fields::State;
use crate::orders::{order_study, OrderStudy, OrderTarget};
use crate::regime::{compute_coefficients, validate_regime};

#[derive(Debug, Parser)]
#[command(
    name = "bilayer-gn",
    version,
    about = "Two-layer Green–Naghdi solver with topography"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the model coefficients and regime membership.
    Coeffs(CommonArgs),
    /// Check the admissibility conditions on the initial data.
    Check(CommonArgs),
    /// Run the scenario and write snapshots, diagnostics and a summary.
    Run(CommonArgs),
    /// Run the five order studies and report their slopes.
    Orders(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Scenario file (key/value text or JSON); defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed of the randomised studies.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Success = 0,
    Config = 1,
    Condition = 2,
    Io = 3,
    Numerical = 4,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    fn new(kind: ExitKind, message: impl Into<String>) -> Self {
        CliError {
            kind,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::new(ExitKind::Io, format!("{}: {e}", path.display()))
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::new(ExitKind::Config, format!("config: {e}"))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::new(exit_kind(&e), e.to_string())
    }
}

/// Exit class of a library error.
pub fn exit_kind(e: &Error) -> ExitKind {
    match e {
        Error::NonPositiveNu { .. }
        | Error::InvalidGrid(_)
        | Error::LengthMismatch { .. }
        | Error::InvalidProfile(_)
        | Error::DegenerateLadder { .. } => ExitKind::Config,
        Error::DepthViolation { .. }
        | Error::EllipticityViolation { .. }
        | Error::SymmetrizerViolation { .. } => ExitKind::Condition,
        Error::SolveFailure { .. }
        | Error::NonFiniteSpeed
        | Error::NonFiniteState { .. }
        | Error::EmptySeries => ExitKind::Numerical,
    }
}

/// Violated condition reported in the summary.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Violation {
    pub condition: Option<String>,
    pub time: f64,
    pub message: String,
}

/// Contents of `summary.json`. File paths are relative to the output directory.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Summary {
    pub status: RunStatus,
    pub final_time: f64,
    pub target_time: f64,
    pub steps: usize,
    pub violation: Option<Violation>,
    pub lambda_fit: Option<f64>,
    #[serde(rename = "C_fit")]
    pub c_fit: Option<f64>,
    pub growth_ok: Option<bool>,
    pub mass_drift: f64,
    pub seed: u64,
    pub snapshots: Vec<String>,
    pub diagnostics: String,
    pub slopes: BTreeMap<String, f64>,
}

pub const DIAGNOSTICS_HEADER: &str = "t,mass,E0,Es,min_h1,min_h2,min_q1,min_q2,min_H3,dt";
pub const SNAPSHOT_HEADER: &str = "x,zeta,v,b";

fn load_config<I, K, V>(args: &CommonArgs, env: I) -> Result<Config, CliError>
where
    I: IntoIterator<Item = (K, V)>,
    K: AsRef<str>,
    V: AsRef<str>,
{
    let text = match &args.config {
        Some(path) => fs::read_to_string(path).map_err(|e| CliError::io(path, e))?,
        None => String::new(),
    };
    let mut cfg = Config::load(&text, env)?;
    if let Some(seed) = args.seed {
        cfg.orders.seed = seed;
    }
    Ok(cfg)
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn cmd_coeffs(cfg: &Config, out: &mut impl Write) -> Result<(), CliError> {
    let p = &cfg.scenario.params;
    let report = validate_regime(p);
    let coeffs = compute_coefficients(p)?;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "mu = {}  eps = {}  delta = {}  gamma = {}  beta = {}  bo_inv = {}",
        p.mu, p.eps, p.delta, p.gamma, p.beta, p.bo_inv
    );
    for (name, value) in coeffs.table() {
        let _ = writeln!(s, "{name:<10} {}", sci(value));
    }
    let _ = writeln!(s, "in_SW = {}", report.in_sw);
    let _ = writeln!(s, "in_CH = {}", report.in_ch);
    for clause in &report.violations {
        let _ = writeln!(s, "violated: {clause}");
    }
    write_out(out, &s)
}

fn format_report(r: &ConditionReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "min_h1 = {}", sci(r.min_h1));
    let _ = writeln!(s, "min_h2 = {}", sci(r.min_h2));
    let _ = writeln!(s, "min_q1 = {}", sci(r.min_q1));
    let _ = writeln!(s, "min_q2 = {}", sci(r.min_q2));
    let _ = writeln!(s, "min_H3 = {}", sci(r.min_h3));
    let _ = writeln!(
        s,
        "ok_H1 = {}  ok_H2 = {}  ok_H3 = {}",
        r.ok_h1, r.ok_h2, r.ok_h3
    );
    if let Some(j) = r.first_violation_location {
        let _ = writeln!(s, "first violation at node {j}");
    }
    s
}

fn status_of(r: &ConditionReport) -> RunStatus {
    if !r.ok_h1 {
        RunStatus::HaltedH1
    } else if !r.ok_h2 {
        RunStatus::HaltedH2
    } else if !r.ok_h3 {
        RunStatus::HaltedH3
    } else {
        RunStatus::Completed
    }
}

pub fn cmd_check(cfg: &Config, out: &mut impl Write) -> Result<(), CliError> {
    let sc = &cfg.scenario;
    let model = sc.model()?;
    let state = sc.initial_state(&model.grid)?;
    let report = check_conditions(&model, &state, &sc.control.thresholds);
    let mut s = format_report(&report);
    let status = status_of(&report);
    if status == RunStatus::Completed {
        s.push_str("status: ok\n");
        write_out(out, &s)
    } else {
        let _ = writeln!(s, "status: {}", status.as_str());
        write_out(out, &s)?;
        Err(CliError::new(
            ExitKind::Condition,
            format!("initial data fails: {}", status.as_str()),
        ))
    }
}

fn write_out(out: &mut impl Write, s: &str) -> Result<(), CliError> {
    out.write_all(s.as_bytes())
        .map_err(|e| CliError::new(ExitKind::Io, format!("stdout: {e}")))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn snapshot_csv(run: &RunRecord, state: &State) -> String {
    let grid = &run.model.grid;
    let b = run.model.bathy.b();
    let mut s = String::with_capacity(96 * grid.n());
    s.push_str(SNAPSHOT_HEADER);
    s.push('\n');
    for j in 0..grid.n() {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            sci(grid.x(j)),
            sci(state.zeta[j]),
            sci(state.v[j]),
            sci(b[j])
        );
    }
    s
}

fn diagnostics_csv(run: &RunRecord) -> String {
    let mut s = String::new();
    s.push_str(DIAGNOSTICS_HEADER);
    s.push('\n');
    for row in &run.diagnostics {
        let (e, c) = (&row.energy, &row.conditions);
        let cols = [
            e.t, e.mass, e.e0, e.es, c.min_h1, c.min_h2, c.min_q1, c.min_q2, c.min_h3, row.dt,
        ];
        let line: Vec<String> = cols.iter().map(|&x| sci(x)).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

/// Runs the scenario and writes `snapshot_NNNNN.csv`, `diagnostics.csv` and
/// `summary.json` to `out_dir`.
pub fn cmd_run(cfg: &Config, out_dir: &Path, out: &mut impl Write) -> Result<Summary, CliError> {
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let run = simulate(&cfg.scenario)?;

    let mut snapshots = Vec::with_capacity(run.snapshots.len());
    for (i, state) in run.snapshots.iter().enumerate() {
        let name = format!("snapshot_{i:05}.csv");
        write_file(&out_dir.join(&name), &snapshot_csv(&run, state))?;
        snapshots.push(name);
    }
    let diagnostics = "diagnostics.csv".to_string();
    write_file(&out_dir.join(&diagnostics), &diagnostics_csv(&run))?;

    let fit: Option<GrowthFit> = if run.status == RunStatus::Completed {
        growth_bound_fit(
            &run.energies(),
            &cfg.scenario.params,
            cfg.scenario.control.lambda_cap,
        )
        .ok()
    } else {
        None
    };
    let violation = run.failure.as_ref().map(|(t, e)| Violation {
        condition: e.condition().map(|c| c.to_string()),
        time: *t,
        message: e.to_string(),
    });
    let summary = Summary {
        status: run.status,
        final_time: run.final_time(),
        target_time: run.t_final,
        steps: run.steps,
        violation,
        lambda_fit: fit.map(|f| f.lambda_fit),
        c_fit: fit.map(|f| f.c_fit),
        growth_ok: fit.map(|f| f.ok),
        mass_drift: run.mass_drift(),
        seed: cfg.orders.seed,
        snapshots,
        diagnostics,
        slopes: BTreeMap::new(),
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serialises");
    write_file(&out_dir.join("summary.json"), &(json + "\n"))?;

    let mut s = String::new();
    let _ = writeln!(s, "status: {}", summary.status.as_str());
    let _ = writeln!(
        s,
        "final_time = {}  steps = {}",
        summary.final_time, summary.steps
    );
    let _ = writeln!(s, "mass_drift = {:e}", summary.mass_drift);
    if let Some(f) = fit {
        let _ = writeln!(
            s,
            "lambda_fit = {}  C_fit = {}  ok = {}",
            f.lambda_fit, f.c_fit, f.ok
        );
    }
    if let Some(v) = &summary.violation {
        let _ = writeln!(s, "violation at t = {}: {}", v.time, v.message);
    }
    write_out(out, &s)?;

    match (run.status, &run.failure) {
        (RunStatus::Completed, _) => Ok(summary),
        (_, Some((_, e))) => Err(CliError::new(exit_kind(e), e.to_string())),
        (status, None) => Err(CliError::new(ExitKind::Numerical, status.as_str())),
    }
}

fn join(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| format!("{x:.6e}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Runs the five order studies, prints them and writes `orders.json` when an
/// output directory is given.
pub fn cmd_orders(
    cfg: &Config,
    out_dir: Option<&Path>,
    out: &mut impl Write,
) -> Result<Vec<OrderStudy>, CliError> {
    let mut studies = Vec::new();
    for target in OrderTarget::ALL {
        let study = order_study(target, &cfg.scenario, &cfg.orders)?;
        let mut s = String::new();
        let _ = writeln!(s, "{:<17} slope = {:.4}", target.as_str(), study.slope);
        let _ = writeln!(s, "  {:<9} {}", target.parameter(), join(&study.ladder));
        let _ = writeln!(s, "  {:<9} {}", "residual", join(&study.residuals));
        write_out(out, &s)?;
        studies.push(study);
    }
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let json = serde_json::to_string_pretty(&studies).expect("studies serialise");
        write_file(&dir.join("orders.json"), &(json + "\n"))?;
    }
    Ok(studies)
}

/// Parses `args`, dispatches and returns the process exit code.
pub fn run<I, T, E, K, V>(args: I, env: E, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
    E: IntoIterator<Item = (K, V)>,
    K: AsRef<str>,
    V: AsRef<str>,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                ExitKind::Config as i32
            } else {
                ExitKind::Success as i32
            };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
            } else {
                let _ = out.write_all(text.as_bytes());
            }
            return code;
        }
    };
    let args = match &cli.command {
        Command::Coeffs(a) | Command::Check(a) | Command::Run(a) | Command::Orders(a) => a.clone(),
    };
    let result = load_config(&args, env).and_then(|cfg| match cli.command {
        Command::Coeffs(_) => cmd_coeffs(&cfg, out),
        Command::Check(_) => cmd_check(&cfg, out),
        Command::Run(_) => {
            let dir = args
                .out
                .clone()
                .ok_or_else(|| CliError::new(ExitKind::Config, "run needs --out <dir>"))?;
            cmd_run(&cfg, &dir, out).map(|_| ())
        }
        Command::Orders(_) => cmd_orders(&cfg, args.out.as_deref(), out).map(|_| ()),
    });
    match result {
        Ok(()) => ExitKind::Success as i32,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.kind as i32
        }
    }
}
