//! Config-driven command line front end.
//!
//! A run is described by a flat `key = value` file (`#` starts a comment),
//! optionally overridden by `--set key=value`. Each subcommand produces a
//! [`Report`]: a table of rows plus named threshold checks, rendered as CSV
//! (header + rows) or JSON (`meta`, `rows`, `checks`).

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use serde_json::{Map, Value};

use crate::error::Error;
use crate::heff::{self, EigenSystem, LandauNumbers, StateLabel};
use crate::linalg::CVector;
use crate::oracle;
use crate::phases::{self, phase_distance, PhaseReport};
use crate::scenario::{
    derive_frame_a, resonance_orders, RotatingField, Scenario, ScenarioA, ScenarioB, ScenarioC, Sign,
    DEFAULT_RESONANCE_TOL,
};

pub const COLUMNS_HELP: &str = "\
Columns (CSV header row, JSON row keys):
  spectrum, scenario A/B:
    index,label,m,ms,energy_analytic,energy_numeric,abs_diff
    (analytic columns are empty for scenario B with l > 0)
  spectrum, scenario C (Landau grid n_rho <= n_rho_max, |m| <= m_max, |n_z| <= n_z_max):
    n_rho,m,n_z,ms,energy,energy_corrected,shift        shift = energy - energy_corrected
  phases:
    index,label,m,ms,n_rho,n_z,energy,jz,delta,beta,gamma,gamma_closed_form,
    closed_form_deviation,orbital_exact,identity_residual
  trace:
    t,lx,ly,lz,sx,sy,sz
  scan (every omega0/omega in scan_ratio by every theta_b in scan_theta_b):
    omega0_over_omega,theta_b,cos_theta_b,omega_l_over_omega,omega_s_over_omega,
    theta_l,theta_s,n_l,n_s,resonant
  verify (JSON rows; the CSV form lists the checks instead):
    index,label,delta,delta_oracle,delta_deviation,gamma,gamma_oracle,
    gamma_deviation,gamma_closed_form,closed_form_deviation,fidelity,norm_drift
  checks:
    name,value,lower,upper,pass

Phases are principal values in (-pi, pi]. Exit status: 0 when every check
passes, 1 when a check fails (output is still written), 2 on usage or config
errors.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Spectrum,
    Phases,
    Trace,
    Scan,
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Phases => "phases",
            Command::Trace => "trace",
            Command::Scan => "scan",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "rotomag", version, about = "Charged particles in a rotating magnetic field", after_long_help = COLUMNS_HELP)]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// flat `key = value` config file
    #[arg(long)]
    pub config: PathBuf,
    /// override a config entry; repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// omit the generation timestamp from JSON output
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },
    #[error("config line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error(transparent)]
    Model(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    fn key(key: &str, reason: impl Into<String>) -> Self {
        CliError::Config { key: key.to_string(), reason: reason.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    A,
    B,
    C,
}

pub const KEYS: &[&str] = &[
    "scenario",
    "omega",
    "theta_b",
    "omega0",
    "l",
    "epsilon_nl",
    "xi_nl",
    "two_s",
    "sign_q",
    "sign_mu",
    "omega1",
    "omega2",
    "box_d",
    "m",
    "ms",
    "n_rho",
    "n_z",
    "index",
    "n_rho_max",
    "m_max",
    "n_z_max",
    "steps",
    "samples",
    "t_end",
    "format",
    "out",
    "precision",
    "resonance_tol",
    "scan_ratio",
    "scan_theta_b",
    "mismatch_threshold",
    "phase_threshold",
    "drift_threshold",
];

/// Every setting of a run. Defaults reproduce the resonant example field:
/// `omega = 1`, `omega0 = sqrt(1.5)`, `cos theta_b = sqrt(3) / (2 sqrt(2))`, `l = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioKind,
    pub omega: f64,
    pub theta_b: f64,
    pub omega0: f64,
    pub l: u32,
    pub epsilon_nl: f64,
    pub xi_nl: f64,
    pub two_s: u32,
    pub sign_q: Sign,
    pub sign_mu: Sign,
    pub omega1: f64,
    pub omega2: f64,
    pub box_d: f64,
    pub m: Option<i32>,
    pub two_ms: Option<i32>,
    pub n_rho: u32,
    pub n_z: i32,
    pub index: Option<usize>,
    pub n_rho_max: u32,
    pub m_max: u32,
    pub n_z_max: u32,
    pub steps: usize,
    pub samples: usize,
    pub t_end: Option<f64>,
    pub format: Format,
    pub out: Option<PathBuf>,
    /// significant digits; `None` keeps the shortest round-trip form
    pub precision: Option<usize>,
    pub resonance_tol: f64,
    pub scan_ratio: Option<Vec<f64>>,
    pub scan_theta_b: Option<Vec<f64>>,
    pub mismatch_threshold: f64,
    pub phase_threshold: f64,
    pub drift_threshold: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: ScenarioKind::A,
            omega: 1.0,
            theta_b: (3f64.sqrt() / (2.0 * 2f64.sqrt())).acos(),
            omega0: 1.5f64.sqrt(),
            l: 1,
            epsilon_nl: 0.0,
            xi_nl: 0.0,
            two_s: 1,
            sign_q: Sign::Plus,
            sign_mu: Sign::Plus,
            omega1: 1.0,
            omega2: 1.0,
            box_d: 1.0,
            m: None,
            two_ms: None,
            n_rho: 0,
            n_z: 0,
            index: None,
            n_rho_max: 1,
            m_max: 1,
            n_z_max: 1,
            steps: 40000,
            samples: 65,
            t_end: None,
            format: Format::Csv,
            out: None,
            precision: None,
            resonance_tol: DEFAULT_RESONANCE_TOL,
            scan_ratio: None,
            scan_theta_b: None,
            mismatch_threshold: 1e-8,
            phase_threshold: 1e-6,
            drift_threshold: 1e-9,
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    let x: f64 = v.parse().map_err(|_| CliError::key(key, format!("`{v}` is not a number")))?;
    if !x.is_finite() {
        return Err(CliError::key(key, "must be finite"));
    }
    Ok(x)
}

fn parse_int<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::key(key, format!("`{v}` is not a valid integer here")))
}

/// `1/2`, `-3/2`, `1`, `0.5` -> twice the value.
fn parse_half_integer(key: &str, v: &str) -> Result<i32, CliError> {
    let bad = || CliError::key(key, format!("`{v}` is not an integer or half-integer"));
    if let Some((num, den)) = v.split_once('/') {
        let num: i32 = num.trim().parse().map_err(|_| bad())?;
        return match den.trim() {
            "1" => Ok(2 * num),
            "2" => Ok(num),
            _ => Err(bad()),
        };
    }
    let twice = 2.0 * parse_f64(key, v)?;
    if twice.fract() != 0.0 || twice.abs() > i32::MAX as f64 {
        return Err(bad());
    }
    Ok(twice as i32)
}

fn parse_sign(key: &str, v: &str) -> Result<Sign, CliError> {
    match v {
        "+" | "+1" | "1" => Ok(Sign::Plus),
        "-" | "-1" => Ok(Sign::Minus),
        _ => Err(CliError::key(key, format!("`{v}` is not +1 or -1"))),
    }
}

/// `a:b:n` (n evenly spaced points including both ends) or `x1,x2,...`.
pub fn parse_grid(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = v.split(':').map(str::trim).collect();
    let grid = match parts.as_slice() {
        [a, b, n] => {
            let (a, b) = (parse_f64(key, a)?, parse_f64(key, b)?);
            let n: usize = parse_int(key, n)?;
            match n {
                0 => return Err(CliError::key(key, "grid needs at least one point")),
                1 => vec![a],
                _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
            }
        }
        [_] => v.split(',').map(|x| parse_f64(key, x.trim())).collect::<Result<_, _>>()?,
        _ => return Err(CliError::key(key, format!("`{v}` is neither `a:b:n` nor a comma list"))),
    };
    Ok(grid)
}

fn fmt_grid(g: &[f64]) -> String {
    g.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), CliError> {
        let v = v.trim();
        match key {
            "scenario" => {
                self.scenario = match v {
                    "A" | "a" => ScenarioKind::A,
                    "B" | "b" => ScenarioKind::B,
                    "C" | "c" => ScenarioKind::C,
                    _ => return Err(CliError::key(key, format!("`{v}` is not one of A, B, C"))),
                }
            }
            "omega" => self.omega = parse_f64(key, v)?,
            "theta_b" => self.theta_b = parse_f64(key, v)?,
            "omega0" => self.omega0 = parse_f64(key, v)?,
            "l" => self.l = parse_int(key, v)?,
            "epsilon_nl" => self.epsilon_nl = parse_f64(key, v)?,
            "xi_nl" => self.xi_nl = parse_f64(key, v)?,
            "two_s" => self.two_s = parse_int(key, v)?,
            "sign_q" => self.sign_q = parse_sign(key, v)?,
            "sign_mu" => self.sign_mu = parse_sign(key, v)?,
            "omega1" => self.omega1 = parse_f64(key, v)?,
            "omega2" => self.omega2 = parse_f64(key, v)?,
            "box_d" => self.box_d = parse_f64(key, v)?,
            "m" => self.m = Some(parse_int(key, v)?),
            "ms" => self.two_ms = Some(parse_half_integer(key, v)?),
            "n_rho" => self.n_rho = parse_int(key, v)?,
            "n_z" => self.n_z = parse_int(key, v)?,
            "index" => self.index = Some(parse_int(key, v)?),
            "n_rho_max" => self.n_rho_max = parse_int(key, v)?,
            "m_max" => self.m_max = parse_int(key, v)?,
            "n_z_max" => self.n_z_max = parse_int(key, v)?,
            "steps" => self.steps = parse_int(key, v)?,
            "samples" => {
                self.samples = parse_int(key, v)?;
                if self.samples == 0 {
                    return Err(CliError::key(key, "need at least one sample"));
                }
            }
            "t_end" => {
                let t = parse_f64(key, v)?;
                if t < 0.0 {
                    return Err(CliError::key(key, "must be >= 0"));
                }
                self.t_end = Some(t);
            }
            "format" => {
                self.format =
                    Format::from_str(v, true).map_err(|_| CliError::key(key, format!("`{v}` is not csv or json")))?
            }
            "out" => self.out = (!v.is_empty()).then(|| PathBuf::from(v)),
            "precision" => {
                let p: usize = parse_int(key, v)?;
                if !(1..=17).contains(&p) {
                    return Err(CliError::key(key, "significant digits must lie in 1..=17"));
                }
                self.precision = Some(p);
            }
            "resonance_tol" => self.resonance_tol = parse_f64(key, v)?,
            "scan_ratio" => self.scan_ratio = Some(parse_grid(key, v)?),
            "scan_theta_b" => self.scan_theta_b = Some(parse_grid(key, v)?),
            "mismatch_threshold" => self.mismatch_threshold = parse_f64(key, v)?,
            "phase_threshold" => self.phase_threshold = parse_f64(key, v)?,
            "drift_threshold" => self.drift_threshold = parse_f64(key, v)?,
            _ => return Err(CliError::key(key, "unknown key")),
        }
        Ok(())
    }

    /// Parse a config file body on top of the defaults.
    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        let mut seen = BTreeSet::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| CliError::Syntax {
                line: k + 1,
                reason: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(CliError::key(key, "given more than once"));
            }
            cfg.set(key, value)?;
        }
        Ok(cfg)
    }

    /// Apply `key=value` overrides in order.
    pub fn apply_overrides(&mut self, pairs: &[String]) -> Result<(), CliError> {
        for pair in pairs {
            let (key, value) =
                pair.split_once('=').ok_or_else(|| CliError::key(pair, "override must look like key=value"))?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    /// Effective values of every key, in [`KEYS`] order.
    pub fn entries(&self) -> Vec<(&'static str, Cell)> {
        let opt_i = |x: Option<i32>| x.map_or(Cell::Empty, |v| Cell::Int(v as i64));
        let kind = match self.scenario {
            ScenarioKind::A => "A",
            ScenarioKind::B => "B",
            ScenarioKind::C => "C",
        };
        let ms = self.two_ms.map_or(Cell::Empty, |t| Cell::Float(t as f64 / 2.0));
        let format = match self.format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        vec![
            ("scenario", Cell::Text(kind.into())),
            ("omega", Cell::Float(self.omega)),
            ("theta_b", Cell::Float(self.theta_b)),
            ("omega0", Cell::Float(self.omega0)),
            ("l", Cell::Int(self.l as i64)),
            ("epsilon_nl", Cell::Float(self.epsilon_nl)),
            ("xi_nl", Cell::Float(self.xi_nl)),
            ("two_s", Cell::Int(self.two_s as i64)),
            ("sign_q", Cell::Int(self.sign_q.value() as i64)),
            ("sign_mu", Cell::Int(self.sign_mu.value() as i64)),
            ("omega1", Cell::Float(self.omega1)),
            ("omega2", Cell::Float(self.omega2)),
            ("box_d", Cell::Float(self.box_d)),
            ("m", opt_i(self.m)),
            ("ms", ms),
            ("n_rho", Cell::Int(self.n_rho as i64)),
            ("n_z", Cell::Int(self.n_z as i64)),
            ("index", self.index.map_or(Cell::Empty, |i| Cell::Int(i as i64))),
            ("n_rho_max", Cell::Int(self.n_rho_max as i64)),
            ("m_max", Cell::Int(self.m_max as i64)),
            ("n_z_max", Cell::Int(self.n_z_max as i64)),
            ("steps", Cell::Int(self.steps as i64)),
            ("samples", Cell::Int(self.samples as i64)),
            ("t_end", self.t_end.map_or(Cell::Empty, Cell::Float)),
            ("format", Cell::Text(format.into())),
            ("out", self.out.as_ref().map_or(Cell::Empty, |p| Cell::Text(p.display().to_string()))),
            ("precision", self.precision.map_or(Cell::Empty, |p| Cell::Int(p as i64))),
            ("resonance_tol", Cell::Float(self.resonance_tol)),
            ("scan_ratio", self.scan_ratio.as_deref().map_or(Cell::Empty, |g| Cell::Text(fmt_grid(g)))),
            ("scan_theta_b", self.scan_theta_b.as_deref().map_or(Cell::Empty, |g| Cell::Text(fmt_grid(g)))),
            ("mismatch_threshold", Cell::Float(self.mismatch_threshold)),
            ("phase_threshold", Cell::Float(self.phase_threshold)),
            ("drift_threshold", Cell::Float(self.drift_threshold)),
        ]
    }

    fn field(&self) -> Result<RotatingField, CliError> {
        RotatingField::new(self.omega, self.theta_b).map_err(keyed)
    }

    fn scenario_a(&self) -> Result<ScenarioA, CliError> {
        ScenarioA::new(self.field()?, self.omega0, self.l, self.epsilon_nl).map_err(keyed)
    }

    pub fn scenario_c(&self) -> Result<ScenarioC, CliError> {
        ScenarioC::new(self.field()?, self.two_s, self.sign_q, self.sign_mu, self.omega1, self.omega2, self.box_d)
            .map_err(keyed)
    }

    /// The matrix scenario; scenario C maps to its spin sector.
    pub fn scenario(&self) -> Result<Scenario, CliError> {
        Ok(match self.scenario {
            ScenarioKind::A => Scenario::A(self.scenario_a()?),
            ScenarioKind::B => Scenario::B(ScenarioB::new(self.scenario_a()?, self.xi_nl).map_err(keyed)?),
            ScenarioKind::C => Scenario::CSpin(self.scenario_c()?),
        })
    }

    fn selected_label(&self) -> Option<StateLabel> {
        Some(StateLabel::new(self.m?, self.two_ms?))
    }

    fn landau_numbers(&self) -> Result<LandauNumbers, CliError> {
        let m = self.m.ok_or_else(|| CliError::key("m", "required for a scenario C state"))?;
        let two_ms = self.two_ms.ok_or_else(|| CliError::key("ms", "required for a scenario C state"))?;
        Ok(LandauNumbers::new(self.n_rho, self.n_z, m, two_ms))
    }
}

/// Attach the offending key to parameter errors from the model.
fn keyed(e: Error) -> CliError {
    match e {
        Error::InvalidParameter { name, reason } => CliError::key(name, reason),
        other => CliError::Model(other),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Empty,
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Float)
    }
}

fn round_significant(x: f64, digits: Option<usize>) -> f64 {
    match digits {
        Some(p) if x.is_finite() && x != 0.0 => format!("{:.*e}", p - 1, x).parse().unwrap_or(x),
        _ => x,
    }
}

impl Cell {
    fn to_csv(&self, digits: Option<usize>) -> String {
        match self {
            Cell::Empty => String::new(),
            Cell::Int(v) => v.to_string(),
            Cell::Float(x) => format!("{:?}", round_significant(*x, digits)),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn to_json(&self, digits: Option<usize>) -> Value {
        match self {
            Cell::Empty => Value::Null,
            Cell::Int(v) => Value::from(*v),
            Cell::Float(x) => Value::from(round_significant(*x, digits)),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

/// A named bound on a computed quantity; passes when `lower <= value <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: f64,
}

impl Check {
    fn at_most(name: &str, value: f64, upper: f64) -> Self {
        Check { name: name.into(), value, lower: None, upper }
    }

    pub fn pass(&self) -> bool {
        self.value.is_finite() && self.value <= self.upper && self.lower.is_none_or(|lo| self.value >= lo)
    }

    fn row(&self) -> Vec<Cell> {
        vec![
            Cell::Text(self.name.clone()),
            Cell::Float(self.value),
            self.lower.into(),
            Cell::Float(self.upper),
            Cell::Bool(self.pass()),
        ]
    }
}

pub const CHECK_COLUMNS: &[&str] = &["name", "value", "lower", "upper", "pass"];

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: Command,
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
    pub checks: Vec<Check>,
    pub derived: Vec<(&'static str, Cell)>,
}

impl Report {
    fn new(command: Command, columns: &'static [&'static str]) -> Self {
        Report { command, columns, rows: Vec::new(), checks: Vec::new(), derived: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::pass)
    }

    pub fn to_csv(&self, digits: Option<usize>) -> String {
        let (columns, rows): (&[&str], Vec<Vec<Cell>>) = if self.command == Command::Verify {
            (CHECK_COLUMNS, self.checks.iter().map(Check::row).collect())
        } else {
            (self.columns, self.rows.clone())
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(columns).expect("writing to memory");
        for row in &rows {
            w.write_record(row.iter().map(|c| c.to_csv(digits))).expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is utf-8")
    }

    pub fn to_json(&self, cfg: &RunConfig, timestamp: Option<&str>) -> String {
        let digits = cfg.precision;
        let object = |pairs: &mut dyn Iterator<Item = (&str, &Cell)>| -> Value {
            Value::Object(pairs.map(|(k, c)| (k.to_string(), c.to_json(digits))).collect::<Map<_, _>>())
        };
        let mut meta = Map::new();
        meta.insert("tool".into(), "rotomag".into());
        meta.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        meta.insert("command".into(), self.command.name().into());
        if let Some(ts) = timestamp {
            meta.insert("generated_at".into(), ts.into());
        }
        let entries = cfg.entries();
        meta.insert("config".into(), object(&mut entries.iter().map(|(k, c)| (*k, c))));
        meta.insert("derived".into(), object(&mut self.derived.iter().map(|(k, c)| (*k, c))));
        let rows: Vec<Value> =
            self.rows.iter().map(|r| object(&mut self.columns.iter().copied().zip(r.iter()))).collect();
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| {
                let row = c.row();
                object(&mut CHECK_COLUMNS.iter().copied().zip(row.iter()))
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("meta".into(), Value::Object(meta));
        doc.insert("rows".into(), Value::Array(rows));
        doc.insert("checks".into(), Value::Array(checks));
        let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("json values are serializable");
        s.push('\n');
        s
    }
}

pub const SPECTRUM_COLUMNS: &[&str] = &["index", "label", "m", "ms", "energy_analytic", "energy_numeric", "abs_diff"];
pub const SPECTRUM_C_COLUMNS: &[&str] = &["n_rho", "m", "n_z", "ms", "energy", "energy_corrected", "shift"];
pub const PHASES_COLUMNS: &[&str] = &[
    "index",
    "label",
    "m",
    "ms",
    "n_rho",
    "n_z",
    "energy",
    "jz",
    "delta",
    "beta",
    "gamma",
    "gamma_closed_form",
    "closed_form_deviation",
    "orbital_exact",
    "identity_residual",
];
pub const TRACE_COLUMNS: &[&str] = &["t", "lx", "ly", "lz", "sx", "sy", "sz"];
pub const SCAN_COLUMNS: &[&str] = &[
    "omega0_over_omega",
    "theta_b",
    "cos_theta_b",
    "omega_l_over_omega",
    "omega_s_over_omega",
    "theta_l",
    "theta_s",
    "n_l",
    "n_s",
    "resonant",
];
pub const VERIFY_COLUMNS: &[&str] = &[
    "index",
    "label",
    "delta",
    "delta_oracle",
    "delta_deviation",
    "gamma",
    "gamma_oracle",
    "gamma_deviation",
    "gamma_closed_form",
    "closed_form_deviation",
    "fidelity",
    "norm_drift",
];

/// Bound on the `delta = beta + gamma` and closed-form columns of `phases`.
pub const PHASE_IDENTITY_TOL: f64 = 1e-10;
/// Bound on `|E_analytic - E_numeric|` in `spectrum`.
pub const SPECTRUM_TOL: f64 = 1e-10;
/// Accepted band for the measured order of the integrator.
pub const ORDER_BAND: (f64, f64) = (3.7, 4.3);

fn label_cells(label: Option<StateLabel>) -> [Cell; 3] {
    match label {
        Some(l) => [Cell::Text(l.to_string()), Cell::Int(l.m as i64), Cell::Float(l.ms())],
        None => [Cell::Empty, Cell::Empty, Cell::Empty],
    }
}

fn landau_grid(cfg: &RunConfig) -> Vec<LandauNumbers> {
    let (m_max, nz_max, ts) = (cfg.m_max as i32, cfg.n_z_max as i32, cfg.two_s as i32);
    let mut grid = Vec::new();
    for n_rho in 0..=cfg.n_rho_max {
        for m in -m_max..=m_max {
            for n_z in -nz_max..=nz_max {
                for two_ms in (-ts..=ts).rev().step_by(2) {
                    grid.push(LandauNumbers::new(n_rho, n_z, m, two_ms));
                }
            }
        }
    }
    grid
}

fn frame_meta(sc: &Scenario, report: &mut Report) {
    if let Ok(t) = sc.field().period() {
        report.derived.push(("period", Cell::Float(t)));
    }
    if let Ok(frame) = sc.frame() {
        report.derived.push(("omega_l", frame.omega_l().into()));
        report.derived.push(("theta_l", frame.theta_l().into()));
        report.derived.push(("omega_s", Cell::Float(frame.omega_s())));
        report.derived.push(("theta_s", Cell::Float(frame.theta_s())));
    }
}

/// Analytic eigensystem where one exists for the scenario.
fn analytic_eigensystem(sc: &Scenario) -> crate::Result<Option<EigenSystem>> {
    Ok(match sc {
        Scenario::A(a) => Some(heff::analytic_eigensystem_a(a)?),
        Scenario::B(b) if b.base.l == 0 => Some(heff::weakfield_l0_states(b)?),
        Scenario::B(_) => None,
        Scenario::CSpin(c) => Some(heff::spin_eigensystem_c(c)?),
    })
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Report, CliError> {
    if cfg.scenario == ScenarioKind::C {
        let sc = cfg.scenario_c()?;
        let mut report = Report::new(Command::Spectrum, SPECTRUM_C_COLUMNS);
        frame_meta(&Scenario::CSpin(sc), &mut report);
        report.derived.push(("alpha", Cell::Float(sc.alpha())));
        for qn in landau_grid(cfg) {
            let e0 = heff::landau_energies(&sc, qn)?;
            let e1 = heff::corrected_energies_c(&sc, qn)?;
            report.rows.push(vec![
                Cell::Int(qn.n_rho as i64),
                Cell::Int(qn.m as i64),
                Cell::Int(qn.n_z as i64),
                Cell::Float(qn.ms()),
                Cell::Float(e0),
                Cell::Float(e1),
                Cell::Float(e0 - e1),
            ]);
        }
        return Ok(report);
    }
    let sc = cfg.scenario()?;
    let mut report = Report::new(Command::Spectrum, SPECTRUM_COLUMNS);
    frame_meta(&sc, &mut report);
    let numeric = heff::eigensolve_hermitian(&heff::effective_hamiltonian(&sc).matrix)?;
    let analytic = analytic_eigensystem(&sc)?;
    let mut worst = 0.0_f64;
    for k in 0..numeric.len() {
        let e_num = numeric.energies[k];
        let (label, e_an) = match &analytic {
            Some(a) => (a.label(k), Some(a.energies[k])),
            None => (None, None),
        };
        let diff = e_an.map(|e| (e - e_num).abs());
        worst = worst.max(diff.unwrap_or(0.0));
        let [lab, m, ms] = label_cells(label);
        report.rows.push(vec![Cell::Int(k as i64), lab, m, ms, e_an.into(), Cell::Float(e_num), diff.into()]);
    }
    if analytic.is_some() {
        report.checks.push(Check::at_most("max_energy_difference", worst, SPECTRUM_TOL));
    }
    Ok(report)
}

fn phase_row(r: &PhaseReport) -> Vec<Cell> {
    let [lab, m, ms] = label_cells(r.label);
    let label = r.label;
    vec![
        r.index.map_or(Cell::Empty, |i| Cell::Int(i as i64)),
        lab,
        m,
        ms,
        label.and_then(|l| l.n_rho).map_or(Cell::Empty, |n| Cell::Int(n as i64)),
        label.and_then(|l| l.n_z).map_or(Cell::Empty, |n| Cell::Int(n as i64)),
        Cell::Float(r.energy),
        Cell::Float(r.jz_expect),
        Cell::Float(r.delta),
        Cell::Float(r.beta),
        Cell::Float(r.gamma),
        r.gamma_closed_form.map(|c| c.value).into(),
        r.closed_form_deviation().into(),
        r.gamma_closed_form.map_or(Cell::Empty, |c| Cell::Bool(c.orbital_exact)),
        Cell::Float(r.identity_residual()),
    ]
}

pub fn cmd_phases(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut report = Report::new(Command::Phases, PHASES_COLUMNS);
    let reports: Vec<PhaseReport> = if cfg.scenario == ScenarioKind::C {
        let sc = cfg.scenario_c()?;
        frame_meta(&Scenario::CSpin(sc), &mut report);
        landau_grid(cfg).into_iter().map(|qn| phases::landau_phase_report(&sc, qn)).collect::<Result<_, _>>()?
    } else {
        let sc = cfg.scenario()?;
        frame_meta(&sc, &mut report);
        let eig = heff::eigensystem(&sc)?;
        (0..eig.len()).map(|k| phases::cyclic_phase_report(&sc, &eig, k)).collect::<Result<_, _>>()?
    };
    let identity = reports.iter().map(PhaseReport::identity_residual).fold(0.0, f64::max);
    let exact_dev = reports
        .iter()
        .filter(|r| r.gamma_closed_form.is_some_and(|c| c.orbital_exact && c.spin_exact))
        .filter_map(PhaseReport::closed_form_deviation)
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.max(d))));
    report.rows = reports.iter().map(phase_row).collect();
    report.checks.push(Check::at_most("max_identity_residual", identity, PHASE_IDENTITY_TOL));
    if let Some(d) = exact_dev {
        report.checks.push(Check::at_most("max_closed_form_deviation", d, PHASE_IDENTITY_TOL));
    }
    Ok(report)
}

fn sample_times(cfg: &RunConfig, period: Option<f64>) -> Result<Vec<f64>, CliError> {
    let t_end = match (cfg.t_end, period) {
        (Some(t), _) | (None, Some(t)) => t,
        (None, None) => return Err(CliError::key("t_end", "required when omega = 0")),
    };
    let n = cfg.samples;
    Ok(if n == 1 { vec![0.0] } else { (0..n).map(|k| t_end * k as f64 / (n - 1) as f64).collect() })
}

pub fn cmd_trace(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut report = Report::new(Command::Trace, TRACE_COLUMNS);
    let points = if cfg.scenario == ScenarioKind::C {
        let sc = cfg.scenario_c()?;
        frame_meta(&Scenario::CSpin(sc), &mut report);
        let qn = cfg.landau_numbers()?;
        phases::landau_trace(&sc, qn, &sample_times(cfg, sc.field.period().ok())?)?
    } else {
        let sc = cfg.scenario()?;
        frame_meta(&sc, &mut report);
        let eig = heff::eigensystem(&sc)?;
        let index = match (cfg.selected_label(), cfg.index) {
            (Some(label), _) => eig.find(&label).ok_or_else(|| {
                let key = if eig.labels.is_some() { "m" } else { "index" };
                CliError::key(key, format!("no eigenstate labelled {label}"))
            })?,
            (None, Some(i)) if i < eig.len() => i,
            (None, Some(i)) => {
                return Err(CliError::key("index", format!("{i} is out of range ({} states)", eig.len())))
            }
            (None, None) => return Err(CliError::key("m", "select a state with `m` and `ms`, or with `index`")),
        };
        phases::angular_momentum_trace(&sc, &eig, index, &sample_times(cfg, sc.field().period().ok())?)?
    };
    report.rows = points
        .iter()
        .map(|p| [p.t, p.l.x, p.l.y, p.l.z, p.s.x, p.s.y, p.s.z].into_iter().map(Cell::Float).collect())
        .collect();
    Ok(report)
}

pub fn cmd_scan(cfg: &RunConfig) -> Result<Report, CliError> {
    if cfg.scenario == ScenarioKind::C {
        return Err(CliError::key("scenario", "scan sweeps the scenario A/B frame; use A or B"));
    }
    if cfg.omega <= 0.0 {
        return Err(CliError::key("omega", "scan needs omega > 0"));
    }
    if !(cfg.resonance_tol > 0.0 && cfg.resonance_tol < 0.5) {
        return Err(CliError::key("resonance_tol", "must lie in (0, 0.5)"));
    }
    let ratios = cfg.scan_ratio.clone().unwrap_or_else(|| vec![cfg.omega0 / cfg.omega]);
    let thetas = cfg.scan_theta_b.clone().unwrap_or_else(|| vec![cfg.theta_b]);
    let mut report = Report::new(Command::Scan, SCAN_COLUMNS);
    let mut resonant = 0;
    for &ratio in &ratios {
        for &theta in &thetas {
            let field = RotatingField::new(cfg.omega, theta).map_err(|e| rekey(e, "scan_theta_b"))?;
            let sc =
                ScenarioA::new(field, ratio * cfg.omega, cfg.l, cfg.epsilon_nl).map_err(|e| rekey(e, "scan_ratio"))?;
            let mut row = vec![Cell::Float(ratio), Cell::Float(theta), Cell::Float(theta.cos())];
            match derive_frame_a(&sc) {
                Ok(frame) => {
                    let orders = resonance_orders(&sc, cfg.resonance_tol)?;
                    resonant += orders.is_some() as usize;
                    let order = |n: Option<u32>| n.map_or(Cell::Empty, |n| Cell::Int(n as i64));
                    row.extend([
                        frame.omega_l().map(|w| w / cfg.omega).into(),
                        Cell::Float(frame.omega_s() / cfg.omega),
                        frame.theta_l().into(),
                        Cell::Float(frame.theta_s()),
                        order(orders.map(|o| o.0)),
                        order(orders.map(|o| o.1)),
                        Cell::Bool(orders.is_some()),
                    ]);
                }
                Err(Error::DegenerateFrame { .. }) => {
                    row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]);
                    row.push(Cell::Bool(false));
                }
                Err(e) => return Err(e.into()),
            }
            report.rows.push(row);
        }
    }
    report.derived.push(("cells", Cell::Int(report.rows.len() as i64)));
    report.derived.push(("resonant_cells", Cell::Int(resonant as i64)));
    Ok(report)
}

fn rekey(e: Error, key: &str) -> CliError {
    match e {
        Error::InvalidParameter { reason, .. } => CliError::key(key, reason),
        other => CliError::Model(other),
    }
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Report, CliError> {
    let sc = cfg.scenario()?;
    let period = sc.field().period().map_err(|_| CliError::key("omega", "verify needs omega > 0"))?;
    if !cfg.steps.is_multiple_of(2) {
        return Err(CliError::key("steps", "Simpson quadrature needs an even step count"));
    }
    let mut report = Report::new(Command::Verify, VERIFY_COLUMNS);
    frame_meta(&sc, &mut report);

    let mismatch = oracle::propagator_mismatch(&sc, period, cfg.steps)?;
    let eig = heff::eigensystem(&sc)?;
    let measured = oracle::oracle_cyclic_phases(&sc, &eig, cfg.steps)?;
    let (mut worst_gamma, mut worst_delta, mut worst_drift) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut worst_closed: Option<f64> = None;
    for (k, o) in measured.iter().enumerate() {
        let r = phases::cyclic_phase_report(&sc, &eig, k)?;
        let dg = phase_distance(r.gamma, o.gamma);
        let dd = phase_distance(r.delta, o.total);
        let closed = r.gamma_closed_form.map(|c| c.value);
        let dc = closed.map(|c| phase_distance(o.gamma, c));
        worst_gamma = worst_gamma.max(dg);
        worst_delta = worst_delta.max(dd);
        worst_drift = worst_drift.max(o.norm_drift);
        if let Some(d) = dc {
            worst_closed = Some(worst_closed.map_or(d, |w| w.max(d)));
        }
        let [lab, _, _] = label_cells(r.label);
        report.rows.push(vec![
            Cell::Int(k as i64),
            lab,
            Cell::Float(r.delta),
            Cell::Float(o.total),
            Cell::Float(dd),
            Cell::Float(r.gamma),
            Cell::Float(o.gamma),
            Cell::Float(dg),
            closed.into(),
            dc.into(),
            Cell::Float(o.fidelity),
            Cell::Float(o.norm_drift),
        ]);
    }

    let dim = eig.states.nrows();
    let psi0 = CVector::from_element(dim, Complex64::new(1.0 / (dim as f64).sqrt(), 0.0));
    let coarse = oracle::steps_for_norm_step(&sc, period, 0.05)?;
    let study = oracle::convergence_order(&sc, &psi0, period, coarse)?;
    report.derived.push(("convergence_steps", Cell::Int(coarse as i64)));

    report.checks.push(Check::at_most("propagator_mismatch", mismatch, cfg.mismatch_threshold));
    report.checks.push(Check::at_most("max_delta_deviation", worst_delta, cfg.phase_threshold));
    report.checks.push(Check::at_most("max_gamma_deviation", worst_gamma, cfg.phase_threshold));
    if let Some(d) = worst_closed {
        report.checks.push(Check::at_most("max_oracle_closed_form_deviation", d, cfg.phase_threshold));
    }
    report.checks.push(Check::at_most("max_norm_drift", worst_drift, cfg.drift_threshold));
    report.checks.push(Check {
        name: "convergence_order".into(),
        value: study.order,
        lower: Some(ORDER_BAND.0),
        upper: ORDER_BAND.1,
    });
    Ok(report)
}

pub fn run_command(command: Command, cfg: &RunConfig) -> Result<Report, CliError> {
    match command {
        Command::Spectrum => cmd_spectrum(cfg),
        Command::Phases => cmd_phases(cfg),
        Command::Trace => cmd_trace(cfg),
        Command::Scan => cmd_scan(cfg),
        Command::Verify => cmd_verify(cfg),
    }
}

/// Load the config named by `args` and apply its overrides and flags.
pub fn load_config(args: &Args) -> Result<RunConfig, CliError> {
    let path = args.config.display().to_string();
    let text = std::fs::read_to_string(&args.config).map_err(|source| CliError::Io { path, source })?;
    let mut cfg = RunConfig::from_text(&text)?;
    cfg.apply_overrides(&args.set)?;
    if let Some(f) = args.format {
        cfg.format = f;
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    Ok(cfg)
}

pub fn render(report: &Report, cfg: &RunConfig, timestamp: Option<&str>) -> String {
    match cfg.format {
        Format::Csv => report.to_csv(cfg.precision),
        Format::Json => report.to_json(cfg, timestamp),
    }
}

/// Run the tool; returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = load_config(&args).and_then(|cfg| {
        let report = run_command(args.command, &cfg)?;
        let stamp = (!args.no_timestamp).then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
        let text = render(&report, &cfg, stamp.as_deref());
        match &cfg.out {
            Some(path) => std::fs::write(path, &text)
                .map_err(|source| CliError::Io { path: path.display().to_string(), source })?,
            None => print!("{text}"),
        }
        Ok(report)
    });
    match outcome {
        Ok(report) if report.passed() => 0,
        Ok(report) => {
            let mut msg = String::from("rotomag: checks failed:");
            for c in report.checks.iter().filter(|c| !c.pass()) {
                let _ = write!(msg, " {}={:e}", c.name, c.value);
            }
            eprintln!("{msg}");
            1
        }
        Err(e) => {
            eprintln!("rotomag: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::from_text(text).unwrap()
    }

    fn float(c: &Cell) -> f64 {
        match c {
            Cell::Float(x) => *x,
            other => panic!("not a float: {other:?}"),
        }
    }

    #[test]
    fn config_parsing() {
        let c = cfg("# comment\nscenario = B\nxi_nl = 0.3 # trailing\n\nms = -1/2\nscan_ratio = 0:1:3\n");
        assert_eq!(c.scenario, ScenarioKind::B);
        assert_eq!(c.xi_nl, 0.3);
        assert_eq!(c.two_ms, Some(-1));
        assert_eq!(c.scan_ratio, Some(vec![0.0, 0.5, 1.0]));
        assert_eq!(parse_half_integer("ms", "1.5").unwrap(), 3);
        assert_eq!(parse_grid("g", "1, 2.5").unwrap(), vec![1.0, 2.5]);
    }

    #[test]
    fn config_errors_name_the_key() {
        let err = |text: &str| match RunConfig::from_text(text) {
            Err(CliError::Config { key, .. }) => key,
            other => panic!("expected config error, got {other:?}"),
        };
        assert_eq!(err("bogus = 1"), "bogus");
        assert_eq!(err("omega = fast"), "omega");
        assert_eq!(err("ms = 1/3"), "ms");
        assert_eq!(err("l = 1\nl = 2"), "l");
        assert!(matches!(RunConfig::from_text("omega 1"), Err(CliError::Syntax { line: 1, .. })));
        let c = RunConfig { omega: -1.0, ..RunConfig::default() };
        assert!(matches!(cmd_spectrum(&c), Err(CliError::Config { key, .. }) if key == "omega"));
    }

    #[test]
    fn every_key_round_trips_through_entries() {
        let keys: Vec<&str> = RunConfig::default().entries().iter().map(|(k, _)| *k).collect();
        assert_eq!(keys, KEYS);
    }

    #[test]
    fn spectrum_resonant_shell() {
        let r = cmd_spectrum(&RunConfig::default()).unwrap();
        let energies: Vec<f64> = r.rows.iter().map(|row| float(&row[4])).collect();
        for (e, want) in energies.iter().zip([-2.0, -1.0, 0.0, 0.0, 1.0, 2.0]) {
            assert!((e - want).abs() < 1e-12);
        }
        assert!(r.passed());
    }

    #[test]
    fn spectrum_weak_field_pair() {
        let c = cfg("scenario = B\nl = 0\nepsilon_nl = 0.7\nxi_nl = 0.4");
        let r = cmd_spectrum(&c).unwrap();
        assert_eq!(r.rows.len(), 2);
        let omega_s = derive_frame_a(&c.scenario_a().unwrap()).unwrap().omega_s();
        assert!((float(&r.rows[0][4]) - (0.7 - omega_s / 2.0)).abs() < 1e-12);
        assert!((float(&r.rows[1][4]) - (0.7 + omega_s / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn spectrum_landau_shift_column() {
        let c = cfg("scenario = C\nomega = 0.3\ntheta_b = 0.7");
        let r = cmd_spectrum(&c).unwrap();
        assert_eq!(r.rows.len(), 2 * 3 * 3 * 2);
        for row in &r.rows {
            let Cell::Int(m) = row[1] else { panic!() };
            assert!((float(&row[6]) - m as f64 * 0.3 * 0.7f64.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn phases_rows() {
        let r = cmd_phases(&RunConfig::default()).unwrap();
        let top = r.rows.iter().find(|row| row[1] == Cell::Text("m=1;ms=1/2".into())).unwrap();
        assert!((float(&top[10]) - 3.0 * PI / 4.0).abs() < 1e-10);
        assert!(r.passed());

        let r = cmd_phases(&cfg("scenario = B\nl = 0\nxi_nl = 0.5")).unwrap();
        let up = r.rows.iter().find(|row| row[3] == Cell::Float(0.5)).unwrap();
        assert!((float(&up[10]) + 3.0 * PI / 4.0).abs() < 1e-10);
    }

    #[test]
    fn trace_first_row() {
        let r = cmd_trace(&cfg("m = 1\nms = 1/2\nsamples = 3")).unwrap();
        let first: Vec<f64> = r.rows[0].iter().map(float).collect();
        assert_eq!(first[0], 0.0);
        assert!((first[1] - 0.9682458366).abs() < 1e-9);
        assert!(first[2].abs() < 1e-12);
        assert!((first[3] + 0.25).abs() < 1e-12);

        let r = cmd_trace(&cfg("scenario = C\ntwo_s = 2\nm = 0\nms = 0\nsamples = 4")).unwrap();
        for row in &r.rows {
            assert!(row[1..].iter().all(|c| float(c).abs() < 1e-8));
        }
        assert!(matches!(cmd_trace(&RunConfig::default()), Err(CliError::Config { key, .. }) if key == "m"));
    }

    #[test]
    fn scan_flags_resonant_cell() {
        let d = RunConfig::default();
        let grid = format!("1.0,{:?},1.5", d.omega0);
        let thetas = format!("0.5,{:?}", d.theta_b);
        let c = cfg(&format!("scan_ratio = {grid}\nscan_theta_b = {thetas}"));
        let r = cmd_scan(&c).unwrap();
        assert_eq!(r.rows.len(), 6);
        let flagged: Vec<&Vec<Cell>> = r.rows.iter().filter(|row| row[9] == Cell::Bool(true)).collect();
        assert_eq!(flagged.len(), 1);
        assert_eq!(flagged[0][7], Cell::Int(1));
        assert_eq!(flagged[0][8], Cell::Int(2));
        assert_eq!(flagged[0][0], Cell::Float(d.omega0));
    }

    #[test]
    fn rendering() {
        let mut r = Report::new(Command::Trace, &["a", "b"]);
        r.rows.push(vec![Cell::Float(0.1 + 0.2), Cell::Empty]);
        assert_eq!(r.to_csv(None), "a,b\n0.30000000000000004,\n");
        assert_eq!(r.to_csv(Some(3)), "a,b\n0.3,\n");
        let c = RunConfig::default();
        let json = r.to_json(&c, None);
        let v: Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["rows"][0]["a"], Value::from(0.30000000000000004));
        assert!(v["meta"].get("generated_at").is_none());
        assert_eq!(v["meta"]["config"]["scenario"], "A");
        assert!(r.to_json(&c, Some("2026-01-01T00:00:00Z")).contains("generated_at"));
    }

    #[test]
    fn check_bounds() {
        assert!(Check::at_most("x", 1e-9, 1e-8).pass());
        assert!(!Check::at_most("x", f64::NAN, 1e-8).pass());
        let band = Check { name: "o".into(), value: 3.5, lower: Some(3.7), upper: 4.3 };
        assert!(!band.pass());
    }
}
