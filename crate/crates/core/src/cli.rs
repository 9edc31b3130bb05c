//! Command-line front end: run configuration, presets, CSV output and the
//! `simulate`, `convergence` and `check` subcommands.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::Vector3;

use crate::algebra::{GroupElement, InertiaTensor};
use crate::check::{CheckSuite, GroupResult, DEFAULT_SAMPLES, DEFAULT_SEED};
use crate::diagnostics::{estimate_order, OrderEstimate};
use crate::error::{Error, Result};
use crate::integrators::{simulate_with, Method, Record, StepperConfig, DEFAULT_NEWTON_MAX_ITER, DEFAULT_NEWTON_TOL};
use crate::suslov::{FullState, SuslovState, SuslovSystem};

pub const CSV_HEADER: &str = "step,t,R11,R12,R13,R21,R22,R23,R31,R32,R33,Pi1,Pi2,Pi3,Omega1,Omega2,Omega3,energy,energy_err,constraint,ortho_defect,det_defect";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

const IDENTITY: [f64; 9] = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    pub inertia: [f64; 3],
    /// Two components, or three for the unadapted method.
    pub pi0: Vec<f64>,
    /// Initial attitude, row-major.
    pub r0: [f64; 9],
    pub dt: f64,
    pub duration: f64,
    /// `None` writes to standard output.
    pub output_path: Option<PathBuf>,
    pub newton_tol: Option<f64>,
    pub newton_max_iter: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Preset::Fig1.config()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Fig1,
    Fig1Exp,
    Fig1Cay,
    Fig2,
}

impl Preset {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Preset::Fig1),
            "fig1-exp" => Ok(Preset::Fig1Exp),
            "fig1-cay" => Ok(Preset::Fig1Cay),
            "fig2" => Ok(Preset::Fig2),
            other => Err(Error::Config(format!(
                "unknown preset '{other}' (expected fig1, fig1-exp, fig1-cay or fig2)"
            ))),
        }
    }

    /// 𝓘 = diag(1, 10, 100), Π₀ = (1, 1, 0), R₀ = I, dt = 0.01 for all presets.
    pub fn config(self) -> RunConfig {
        let (method, duration) = match self {
            Preset::Fig1 | Preset::Fig1Exp => (Method::LpsExp, 1800.0),
            Preset::Fig1Cay => (Method::LpsCayley, 1800.0),
            Preset::Fig2 => (Method::LpExp, 18.0),
        };
        RunConfig {
            method,
            inertia: [1.0, 10.0, 100.0],
            pi0: vec![1.0, 1.0, 0.0],
            r0: IDENTITY,
            dt: 0.01,
            duration,
            output_path: None,
            newton_tol: None,
            newton_max_iter: None,
        }
    }
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("{key}: '{}' is not a number", v.trim())))
        })
        .collect()
}

fn parse_scalar<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{}'", value.trim())))
}

fn fixed<const N: usize>(key: &str, v: Vec<f64>) -> Result<[f64; N]> {
    let len = v.len();
    v.try_into()
        .map_err(|_| Error::Config(format!("{key}: expected {N} values, got {len}")))
}

impl RunConfig {
    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "method" => {
                self.method = value
                    .parse()
                    .map_err(|e: Error| Error::Config(e.to_string()))?
            }
            "inertia" => self.inertia = fixed(key, parse_list(key, value)?)?,
            "pi0" => self.pi0 = parse_list(key, value)?,
            "r0" => self.r0 = fixed(key, parse_list(key, value)?)?,
            "dt" => self.dt = parse_scalar(key, value)?,
            "duration" => self.duration = parse_scalar(key, value)?,
            "output_path" => self.output_path = Some(PathBuf::from(value.trim())),
            "newton_tol" => self.newton_tol = Some(parse_scalar(key, value)?),
            "newton_max_iter" => self.newton_max_iter = Some(parse_scalar(key, value)?),
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Applies a `key = value` file; `#` starts a comment.
    pub fn apply_file_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", n + 1)))?;
            self.set(key.trim(), value)
                .map_err(|e| Error::Config(format!("line {}: {}", n + 1, e)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        self.apply_file_text(&text)
            .map_err(|e| Error::Config(format!("{}: {}", path.display(), e)))
    }

    pub fn system(&self) -> Result<SuslovSystem> {
        Ok(SuslovSystem::new(InertiaTensor::new(self.inertia)?))
    }

    pub fn stepper(&self) -> Result<StepperConfig> {
        StepperConfig::with_newton(
            self.method,
            self.dt,
            self.newton_tol.unwrap_or(DEFAULT_NEWTON_TOL),
            self.newton_max_iter.unwrap_or(DEFAULT_NEWTON_MAX_ITER),
        )
    }

    pub fn initial_state(&self) -> Result<FullState> {
        let rotation = GroupElement::from_row_slice(&self.r0)?;
        let momentum = match self.pi0.as_slice() {
            &[a, b] => Vector3::new(a, b, 0.0),
            &[a, b, c] => {
                if c != 0.0 && self.method.is_constraint_adapted() {
                    return Err(Error::Config(format!(
                        "pi0 third component must be 0 for {}, got {c}",
                        self.method
                    )));
                }
                Vector3::new(a, b, c)
            }
            other => return Err(Error::Config(format!("pi0: expected 2 or 3 values, got {}", other.len()))),
        };
        if !momentum.iter().all(|v| v.is_finite()) {
            return Err(Error::Config("pi0 must be finite".into()));
        }
        Ok(FullState { rotation, momentum })
    }

    /// Checks every invariant without running anything.
    pub fn validate(&self) -> Result<()> {
        self.system()?;
        self.stepper()?;
        self.initial_state()?;
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return Err(Error::invalid(format!("duration must be non-negative, got {}", self.duration)));
        }
        crate::integrators::step_count(self.dt, self.duration)?;
        Ok(())
    }
}

fn push_float(line: &mut String, v: f64) {
    // 17 significant digits round-trip every double
    let _ = write!(line, ",{v:.16e}");
}

pub fn format_record(line: &mut String, r: &Record) {
    line.clear();
    let _ = write!(line, "{}", r.step);
    push_float(line, r.time);
    for v in r.rotation.matrix().transpose().iter() {
        push_float(line, *v);
    }
    for v in r.momentum.iter().chain(r.omega.iter()) {
        push_float(line, *v);
    }
    let d = &r.diagnostics;
    for v in [d.energy, d.energy_error, d.constraint_violation, d.ortho_defect, d.det_defect] {
        push_float(line, v);
    }
    line.push('\n');
}

/// Streams the trajectory as CSV into `out`; returns the number of data rows.
pub fn write_trajectory(cfg: &RunConfig, out: &mut impl Write, sink_name: &Path) -> Result<usize> {
    cfg.validate()?;
    let sys = cfg.system()?;
    let stepper = cfg.stepper()?;
    let initial = cfg.initial_state()?;
    let io_err = |source| Error::Io { path: sink_name.to_path_buf(), source };
    writeln!(out, "{CSV_HEADER}").map_err(io_err)?;
    let mut rows = 0;
    let mut line = String::with_capacity(512);
    simulate_with(&sys, &stepper, &initial, cfg.duration, |r| {
        format_record(&mut line, r);
        rows += 1;
        out.write_all(line.as_bytes()).map_err(io_err)
    })?;
    out.flush().map_err(io_err)?;
    Ok(rows)
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<usize> {
    cfg.validate()?;
    match &cfg.output_path {
        Some(path) => {
            let file = File::create(path).map_err(|source| Error::Io { path: path.clone(), source })?;
            write_trajectory(cfg, &mut BufWriter::new(file), path)
        }
        None => write_trajectory(cfg, &mut BufWriter::new(io::stdout().lock()), Path::new("<stdout>")),
    }
}

/// Convergence study against the exact flow; writes `dt,error,order` rows.
pub fn cmd_convergence(cfg: &RunConfig, dts: &[f64], out: &mut impl Write) -> Result<OrderEstimate> {
    let sys = cfg.system()?;
    let full = cfg.initial_state()?;
    let initial = SuslovState::try_from(full).map_err(|e| Error::Config(e.to_string()))?;
    if !(cfg.duration.is_finite() && cfg.duration > 0.0) {
        return Err(Error::invalid(format!("duration must be positive, got {}", cfg.duration)));
    }
    let est = estimate_order(&sys, cfg.method, &initial, cfg.duration, dts)?;
    let io_err = |source| Error::Io { path: PathBuf::from("<stdout>"), source };
    writeln!(out, "dt,error,order").map_err(io_err)?;
    for (dt, e) in est.dts.iter().zip(&est.errors) {
        writeln!(out, "{dt:.16e},{e:.16e},{:.16e}", est.order).map_err(io_err)?;
    }
    Ok(est)
}

/// Runs the invariant suite, printing one line per group. True iff all pass.
pub fn cmd_check(suite: &CheckSuite, out: &mut impl Write) -> io::Result<bool> {
    let results: Vec<GroupResult> = suite.run();
    for r in &results {
        writeln!(out, "{r}")?;
    }
    let failed = results.iter().filter(|r| !r.passed()).count();
    if failed == 0 {
        writeln!(out, "all {} groups passed", results.len())?;
    } else {
        writeln!(out, "{failed} of {} groups failed", results.len())?;
    }
    Ok(failed == 0)
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    }
}

#[derive(Parser, Debug)]
#[command(name = "suslov", version, about = "Constraint-preserving integrators for the Suslov problem on SO(3)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Integrate one trajectory and write it as CSV.
    Simulate(RunArgs),
    /// Fit the observed order against the exact solution.
    Convergence {
        #[command(flatten)]
        run: RunArgs,
        /// Strictly decreasing step sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        dts: Vec<f64>,
    },
    /// Run the randomized invariant suite.
    Check {
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

/// Settings shared by `simulate` and `convergence`. Precedence is
/// preset < config file < flags.
#[derive(Args, Debug, Default)]
pub struct RunArgs {
    /// fig1, fig1-exp, fig1-cay or fig2.
    #[arg(long)]
    pub preset: Option<String>,
    /// `key = value` file with RunConfig field names.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// lps-exp, lps-cay or lp-exp.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_hyphen_values = true)]
    pub inertia: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_hyphen_values = true)]
    pub pi0: Option<Vec<f64>>,
    /// Initial attitude, 9 values row-major.
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_hyphen_values = true)]
    pub r0: Option<Vec<f64>>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub duration: Option<f64>,
    /// Output CSV path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub newton_tol: Option<f64>,
    #[arg(long)]
    pub newton_max_iter: Option<usize>,
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

impl RunArgs {
    /// Resolves the final configuration; `base` applies when no preset is given.
    pub fn resolve(&self, base: RunConfig) -> Result<RunConfig> {
        let mut cfg = match &self.preset {
            Some(p) => Preset::parse(p)?.config(),
            None => base,
        };
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let flags: [(&str, Option<String>); 9] = [
            ("method", self.method.clone()),
            ("inertia", self.inertia.as_deref().map(join)),
            ("pi0", self.pi0.as_deref().map(join)),
            ("r0", self.r0.as_deref().map(join)),
            ("dt", self.dt.map(|v| v.to_string())),
            ("duration", self.duration.map(|v| v.to_string())),
            ("output_path", self.out.as_ref().map(|p| p.to_string_lossy().into_owned())),
            ("newton_tol", self.newton_tol.map(|v| v.to_string())),
            ("newton_max_iter", self.newton_max_iter.map(|v| v.to_string())),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        Ok(cfg)
    }
}

fn report(e: &Error) -> i32 {
    eprintln!("error: {e}");
    exit_code(e)
}

/// Entry point shared by the binary and the tests; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Simulate(args) => match args.resolve(RunConfig::default()).and_then(|c| cmd_simulate(&c)) {
            Ok(_) => EXIT_OK,
            Err(e) => report(&e),
        },
        Command::Convergence { run, dts } => {
            let base = RunConfig { duration: 1.0, ..RunConfig::default() };
            let stdout = io::stdout();
            match run.resolve(base).and_then(|c| cmd_convergence(&c, &dts, &mut stdout.lock())) {
                Ok(_) => EXIT_OK,
                Err(e) => report(&e),
            }
        }
        Command::Check { samples, seed } => {
            let suite = CheckSuite { samples, seed, ..CheckSuite::default() };
            match cmd_check(&suite, &mut io::stdout().lock()) {
                Ok(true) => EXIT_OK,
                Ok(false) => EXIT_NUMERICAL,
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_USAGE
                }
            }
        }
    }
}
