//! Job configuration files.
//!
//! A config is TOML with a `[system]` table of physical parameters and a
//! `[job]` table describing what to compute. Rates are strings carrying a
//! unit: `"73 MHz"`, `"4.6e8 rad/s"` or `"1.1 x omega_m1"`. Hz-family
//! suffixes require `frequencies = "cyclic"` (value is ω/2π) or
//! `frequencies = "angular"` (value is ω) in `[system]`. Phases are numbers
//! in radians or expressions such as `"-2pi/3"`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use oms_core::model::{validate_params, AngularRate, Units};
use oms_core::presets;
use oms_core::sweep::{linspace, SweepAxis, SweepParam};
use oms_core::{BranchPolicy, Convention, SystemParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::{Table, Value};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown key '{key}' in {section}")]
    UnknownKey { section: String, key: String },
    #[error("{key} = {value}: dimensional value needs a unit suffix (Hz, kHz, MHz, GHz, THz, rad/s or x omega_m1)")]
    MissingUnit { key: String, value: String },
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
    #[error("missing required key '{key}'")]
    Missing { key: String },
    #[error("unknown preset '{0}' (run `oms presets` for the list)")]
    UnknownPreset(String),
    #[error("invalid parameters: {}", .0.join("; "))]
    Validation(Vec<String>),
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobKind {
    SteadyState,
    Spectrum,
    Sweep1d,
    Sweep2d,
    Verify,
}

impl JobKind {
    pub fn name(&self) -> &'static str {
        match self {
            JobKind::SteadyState => "steady_state",
            JobKind::Spectrum => "spectrum",
            JobKind::Sweep1d => "sweep1d",
            JobKind::Sweep2d => "sweep2d",
            JobKind::Verify => "verify",
        }
    }
}

impl fmt::Display for JobKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Requested job kind before the sweep dimension is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KindRequest {
    Exact(JobKind),
    /// `sweep`: one or two axes depending on whether `axis2` is given.
    AnySweep,
}

impl FromStr for KindRequest {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "steady_state" => KindRequest::Exact(JobKind::SteadyState),
            "spectrum" => KindRequest::Exact(JobKind::Spectrum),
            "sweep" => KindRequest::AnySweep,
            "sweep1d" => KindRequest::Exact(JobKind::Sweep1d),
            "sweep2d" => KindRequest::Exact(JobKind::Sweep2d),
            "verify" => KindRequest::Exact(JobKind::Verify),
            other => {
                return Err(format!(
                    "unknown job kind '{other}' (expected steady_state, spectrum, sweep, sweep1d, sweep2d or verify)"
                ))
            }
        })
    }
}

impl KindRequest {
    fn admits(&self, kind: JobKind) -> bool {
        match self {
            KindRequest::Exact(k) => *k == kind,
            KindRequest::AnySweep => matches!(kind, JobKind::Sweep1d | JobKind::Sweep2d),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

/// Probe-offset axis `x = Δ_p − ω_m1`, in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl XGrid {
    pub fn values(&self) -> Vec<f64> {
        linspace(self.start, self.stop, self.count)
    }
}

pub const DEFAULT_VERIFY_POINTS: usize = 5;
pub const DEFAULT_VERIFY_TOLERANCE: f64 = 5e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifySpec {
    pub points: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Convention the oracle comparison runs under.
    pub convention: Convention,
}

impl Default for VerifySpec {
    fn default() -> Self {
        VerifySpec {
            points: DEFAULT_VERIFY_POINTS,
            seed: 0,
            tolerance: DEFAULT_VERIFY_TOLERANCE,
            convention: Convention::Literal,
        }
    }
}

/// A fully resolved job. All rates are in rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct JobSpec {
    pub kind: JobKind,
    pub preset: Option<String>,
    pub params: SystemParams,
    pub x_grid: XGrid,
    pub axis1: Option<SweepAxis>,
    pub axis2: Option<SweepAxis>,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
    pub verify: VerifySpec,
}

impl JobSpec {
    pub fn omega_m1(&self) -> f64 {
        self.params.omega_m(0)
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub kind: Option<KindRequest>,
    pub preset: Option<String>,
    pub output_dir: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Frequencies {
    Cyclic,
    Angular,
}

/// A rate as written, before ω_m1 and the Hz convention are known.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Rate {
    Hz(f64),
    RadPerSec(f64),
    OmegaM1(f64),
}

const HZ_UNITS: [(&str, f64); 5] = [
    ("thz", 1e12),
    ("ghz", 1e9),
    ("mhz", 1e6),
    ("khz", 1e3),
    ("hz", 1.0),
];

fn parse_number(key: &str, s: &str) -> Result<f64, ConfigError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| invalid(key, format!("cannot read '{}' as a number", s.trim())))?;
    if !v.is_finite() {
        return Err(invalid(key, "value must be finite"));
    }
    Ok(v)
}

fn parse_rate(key: &str, v: &Value) -> Result<Rate, ConfigError> {
    let s = match v {
        Value::String(s) => s.trim(),
        Value::Integer(_) | Value::Float(_) => {
            return Err(ConfigError::MissingUnit {
                key: key.to_string(),
                value: v.to_string(),
            })
        }
        _ => return Err(invalid(key, format!("expected a rate string, got {}", v.type_str()))),
    };
    let lower = s.to_ascii_lowercase();
    if let Some(rest) = lower.strip_suffix("omega_m1") {
        let rest = rest.trim_end();
        let rest = rest
            .strip_suffix('x')
            .or_else(|| rest.strip_suffix('*'))
            .or_else(|| rest.strip_suffix('×'))
            .unwrap_or(rest)
            .trim();
        let k = if rest.is_empty() { 1.0 } else { parse_number(key, rest)? };
        return Ok(Rate::OmegaM1(k));
    }
    if let Some(rest) = lower.strip_suffix("rad/s") {
        return Ok(Rate::RadPerSec(parse_number(key, rest)?));
    }
    for (unit, mult) in HZ_UNITS {
        if let Some(rest) = lower.strip_suffix(unit) {
            return Ok(Rate::Hz(parse_number(key, rest)? * mult));
        }
    }
    if parse_number(key, s).is_ok() {
        return Err(ConfigError::MissingUnit {
            key: key.to_string(),
            value: v.to_string(),
        });
    }
    Err(invalid(
        key,
        format!("cannot read '{s}' as a rate (expected e.g. \"73 MHz\", \"1e9 rad/s\" or \"1.1 x omega_m1\")"),
    ))
}

/// Reads `[sign][coef][*]pi[/den]` or a plain number, in radians.
pub fn parse_phase_expr(s: &str) -> Result<f64, String> {
    let t: String = s
        .trim()
        .to_ascii_lowercase()
        .replace('π', "pi")
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect();
    let t = t.strip_suffix("rad").unwrap_or(&t);
    let bad = || format!("cannot read '{}' as a phase (expected e.g. 0.5, \"pi/2\" or \"-2pi/3\")", s.trim());
    let value = match t.split_once("pi") {
        None => t.parse::<f64>().map_err(|_| bad())?,
        Some((coef, den)) => {
            let coef = coef.strip_suffix('*').unwrap_or(coef);
            let c = match coef {
                "" | "+" => 1.0,
                "-" => -1.0,
                other => other.parse::<f64>().map_err(|_| bad())?,
            };
            let d = match den {
                "" => 1.0,
                other => {
                    let d = other.strip_prefix('/').ok_or_else(bad)?;
                    d.parse::<f64>().map_err(|_| bad())?
                }
            };
            if d == 0.0 {
                return Err(bad());
            }
            c * PI / d
        }
    };
    if !value.is_finite() {
        return Err(bad());
    }
    Ok(value)
}

fn parse_phase(key: &str, v: &Value) -> Result<f64, ConfigError> {
    match v {
        Value::Float(f) if f.is_finite() => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        Value::String(s) => parse_phase_expr(s).map_err(|m| invalid(key, m)),
        _ => Err(invalid(key, format!("expected a phase, got {v}"))),
    }
}

fn parse_count(key: &str, v: &Value) -> Result<usize, ConfigError> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        _ => Err(invalid(key, format!("expected a non-negative integer, got {v}"))),
    }
}

fn parse_str<'a>(key: &str, v: &'a Value) -> Result<&'a str, ConfigError> {
    v.as_str()
        .ok_or_else(|| invalid(key, format!("expected a string, got {}", v.type_str())))
}

fn syntax_error(text: &str, e: &toml::de::Error) -> ConfigError {
    let offset = e.span().map_or(0, |s| s.start).min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |k| k + 1) + 1;
    ConfigError::Syntax {
        line,
        column,
        message: e.message().to_string(),
    }
}

/// Resolves rates once ω_m1 and the Hz convention are known.
struct RateContext {
    frequencies: Option<Frequencies>,
    omega_m1: f64,
}

impl RateContext {
    fn resolve(&self, key: &str, r: Rate) -> Result<f64, ConfigError> {
        match r {
            Rate::RadPerSec(v) => Ok(v),
            Rate::Hz(v) => match self.frequencies {
                Some(Frequencies::Cyclic) => Ok(AngularRate::from_cyclic(v).get()),
                Some(Frequencies::Angular) => Ok(v),
                None => Err(invalid(
                    key,
                    "Hz-suffixed values need frequencies = \"cyclic\" or \"angular\" in [system]",
                )),
            },
            Rate::OmegaM1(k) => {
                if self.omega_m1.is_finite() {
                    Ok(k * self.omega_m1)
                } else {
                    Err(invalid(key, "omega_m1 multiples need omega_m1 to be set"))
                }
            }
        }
    }

    fn rate(&self, key: &str, v: &Value) -> Result<f64, ConfigError> {
        self.resolve(key, parse_rate(key, v)?)
    }
}

const SYSTEM_KEYS: [&str; 4] = ["preset", "frequencies", "convention", "branch"];
const JOB_KEYS: [&str; 13] = [
    "kind",
    "x_start",
    "x_stop",
    "x_count",
    "axis1",
    "axis2",
    "format",
    "output",
    "verify_points",
    "verify_seed",
    "verify_tolerance",
    "verify_convention",
    "threads",
];
const AXIS_KEYS: [&str; 4] = ["param", "start", "stop", "count"];

/// Parameter keys accepted in `[system]`.
fn system_param(key: &str) -> Option<SweepParam> {
    let p: SweepParam = key.parse().ok()?;
    // Canonical spelling only, and no relative-phase shortcuts.
    (p.to_string() == key && !matches!(p, SweepParam::PhiRel | SweepParam::PhiRelP1 | SweepParam::PhiRelP2))
        .then_some(p)
}

fn blank_params() -> SystemParams {
    let mut p = presets::preset("fig2a").expect("fig2a preset").params();
    let nan = AngularRate(f64::NAN);
    for m in &mut p.optical {
        m.kappa = nan;
        m.delta_a = nan;
    }
    for m in &mut p.mech {
        m.omega_m = nan;
        m.gamma = nan;
    }
    p.coupling.o_m1 = nan;
    p.coupling.o_m2 = nan;
    p.coupling.o_m31 = nan;
    p.coupling.o_m32 = nan;
    p.drive.omega_d1 = nan;
    p.drive.omega_d2 = nan;
    p.drive.phi_d1 = 0.0;
    p.drive.phi_d2 = 0.0;
    p.probe.omega_p1 = nan;
    p.probe.omega_p2 = nan;
    p.probe.phi_p1 = 0.0;
    p.probe.phi_p2 = 0.0;
    p.effective_targets = None;
    p.convention = Convention::default();
    p.branch = BranchPolicy::default();
    p
}

fn missing_params(p: &SystemParams) -> Vec<String> {
    let mut missing = Vec::new();
    let mut check = |name: String, v: f64| {
        if v.is_nan() {
            missing.push(name);
        }
    };
    for i in 0..3 {
        check(format!("kappa_{}", i + 1), p.kappa(i));
        if p.effective_targets.is_none() {
            check(format!("delta_a{}", i + 1), p.delta_a(i));
        }
    }
    for j in 0..2 {
        check(format!("omega_m{}", j + 1), p.omega_m(j));
        check(format!("gamma_{}", j + 1), p.gamma(j));
    }
    check("o_m1".into(), p.coupling.o_m1.get());
    check("o_m2".into(), p.coupling.o_m2.get());
    check("o_m31".into(), p.coupling.o_m31.get());
    check("o_m32".into(), p.coupling.o_m32.get());
    check("omega_d1".into(), p.drive.omega_d1.get());
    check("omega_d2".into(), p.drive.omega_d2.get());
    check("omega_p1".into(), p.probe.omega_p1.get());
    check("omega_p2".into(), p.probe.omega_p2.get());
    missing
}

fn parse_convention(key: &str, v: &Value) -> Result<Convention, ConfigError> {
    match parse_str(key, v)?.to_ascii_lowercase().as_str() {
        "rotated" => Ok(Convention::Rotated),
        "literal" => Ok(Convention::Literal),
        other => Err(invalid(key, format!("unknown convention '{other}' (expected rotated or literal)"))),
    }
}

fn parse_branch(key: &str, v: &Value) -> Result<BranchPolicy, ConfigError> {
    match parse_str(key, v)?.to_ascii_lowercase().replace('-', "_").as_str() {
        "smallest_intensity" => Ok(BranchPolicy::SmallestIntensity),
        "all_roots" => Ok(BranchPolicy::AllRoots),
        "fixed_point_attractor" => Ok(BranchPolicy::FixedPointAttractor),
        other => Err(invalid(
            key,
            format!("unknown branch policy '{other}' (expected smallest_intensity, all_roots or fixed_point_attractor)"),
        )),
    }
}

fn parse_axis(name: &str, v: &Value, ctx: &RateContext) -> Result<SweepAxis, ConfigError> {
    let t = v
        .as_table()
        .ok_or_else(|| invalid(name, "expected a table {param, start, stop, count}"))?;
    for k in t.keys() {
        if !AXIS_KEYS.contains(&k.as_str()) {
            return Err(ConfigError::UnknownKey {
                section: format!("[job.{name}]"),
                key: k.clone(),
            });
        }
    }
    let get = |k: &str| {
        t.get(k).ok_or_else(|| ConfigError::Missing {
            key: format!("{name}.{k}"),
        })
    };
    let pkey = format!("{name}.param");
    let param: SweepParam = parse_str(&pkey, get("param")?)?
        .parse()
        .map_err(|e: oms_core::sweep::SweepError| invalid(&pkey, e.to_string()))?;
    let end = |k: &str| -> Result<f64, ConfigError> {
        let key = format!("{name}.{k}");
        let v = get(k)?;
        if param.is_rate() {
            ctx.rate(&key, v)
        } else {
            parse_phase(&key, v)
        }
    };
    let (start, stop) = (end("start")?, end("stop")?);
    let count = parse_count(&format!("{name}.count"), get("count")?)?;
    SweepAxis::new(param, start, stop, count).map_err(|e| invalid(name, e.to_string()))
}

pub fn parse_config(text: &str) -> Result<JobSpec, ConfigError> {
    parse_config_with(text, &Overrides::default())
}

pub fn parse_config_with(text: &str, ov: &Overrides) -> Result<JobSpec, ConfigError> {
    let root: Table = text.parse().map_err(|e| syntax_error(text, &e))?;
    let empty = Table::new();
    let mut system = &empty;
    let mut job = &empty;
    for (k, v) in &root {
        let slot = match k.as_str() {
            "system" => &mut system,
            "job" => &mut job,
            _ => {
                return Err(ConfigError::UnknownKey {
                    section: "the top level".into(),
                    key: k.clone(),
                })
            }
        };
        *slot = v
            .as_table()
            .ok_or_else(|| invalid(k, "expected a table"))?;
    }

    // System table.
    let mut rates: BTreeMap<&str, (SweepParam, &Value)> = BTreeMap::new();
    for (k, v) in system {
        if SYSTEM_KEYS.contains(&k.as_str()) {
            continue;
        }
        let p = system_param(k).ok_or_else(|| ConfigError::UnknownKey {
            section: "[system]".into(),
            key: k.clone(),
        })?;
        rates.insert(k.as_str(), (p, v));
    }

    let preset_name = match (&ov.preset, system.get("preset")) {
        (Some(name), _) => Some(name.clone()),
        (None, Some(v)) => Some(parse_str("preset", v)?.to_string()),
        (None, None) => None,
    };
    let preset = match &preset_name {
        Some(name) => Some(presets::preset(name).ok_or_else(|| ConfigError::UnknownPreset(name.clone()))?),
        None => None,
    };
    let mut params = preset.map_or_else(blank_params, |p| p.params());
    params.units = Units::RadPerSec;

    let frequencies = match system.get("frequencies") {
        None => None,
        Some(v) => Some(match parse_str("frequencies", v)?.to_ascii_lowercase().as_str() {
            "cyclic" => Frequencies::Cyclic,
            "angular" => Frequencies::Angular,
            other => {
                return Err(invalid(
                    "frequencies",
                    format!("unknown value '{other}' (expected cyclic or angular)"),
                ))
            }
        }),
    };
    if let Some(v) = system.get("convention") {
        params.convention = parse_convention("convention", v)?;
    }
    if let Some(v) = system.get("branch") {
        params.branch = parse_branch("branch", v)?;
    }

    let mut ctx = RateContext {
        frequencies,
        omega_m1: params.omega_m(0),
    };
    if let Some((_, v)) = rates.get("omega_m1") {
        if let Rate::OmegaM1(_) = parse_rate("omega_m1", v)? {
            return Err(invalid("omega_m1", "cannot be given in units of itself"));
        }
        ctx.omega_m1 = ctx.rate("omega_m1", v)?;
    }

    let explicit_targets = rates.keys().any(|k| k.starts_with("delta_") && !k.starts_with("delta_a"));
    let explicit_bare = rates.keys().any(|k| k.starts_with("delta_a"));
    if explicit_bare && !explicit_targets {
        // Bare detunings given on their own replace any preset targets.
        params.effective_targets = None;
    }
    let mut targets = params.effective_targets.map(|t| t.map(|r| r.get()));
    for (&key, &(param, v)) in &rates {
        let value = if param.is_rate() {
            ctx.rate(key, v)?
        } else {
            parse_phase(key, v)?
        };
        match param {
            SweepParam::Delta(i) => {
                targets.get_or_insert([f64::NAN; 3])[i] = value;
            }
            _ => params = param.apply(&params, value),
        }
    }
    if let Some(t) = targets {
        if let Some(i) = t.iter().position(|v| v.is_nan()) {
            return Err(ConfigError::Missing {
                key: format!("delta_{} (effective detunings are set together)", i + 1),
            });
        }
        params.effective_targets = Some(t.map(AngularRate));
        for i in 0..3 {
            if params.optical[i].delta_a.get().is_nan() {
                // Placeholder; the bare value is recomputed from the target.
                params.optical[i].delta_a = AngularRate(t[i]);
            }
        }
    }
    let missing = missing_params(&params);
    if !missing.is_empty() {
        return Err(ConfigError::Missing {
            key: format!("{} (no preset given)", missing.join(", ")),
        });
    }
    let report = validate_params(&params);
    if !report.is_ok() {
        return Err(ConfigError::Validation(
            report.errors.iter().map(|e| e.to_string()).collect(),
        ));
    }
    ctx.omega_m1 = params.omega_m(0);

    // Job table.
    for k in job.keys() {
        if !JOB_KEYS.contains(&k.as_str()) {
            return Err(ConfigError::UnknownKey {
                section: "[job]".into(),
                key: k.clone(),
            });
        }
    }
    let file_kind = match job.get("kind") {
        Some(v) => Some(parse_str("kind", v)?.parse::<KindRequest>().map_err(|m| invalid("kind", m))?),
        None => None,
    };
    let request = match (ov.kind, file_kind) {
        (Some(a), Some(b)) => {
            let compatible = match (a, b) {
                (KindRequest::Exact(x), other) | (other, KindRequest::Exact(x)) => other.admits(x),
                _ => true,
            };
            if !compatible {
                return Err(invalid("kind", "job kind in the file does not match the subcommand"));
            }
            match b {
                KindRequest::Exact(_) => b,
                KindRequest::AnySweep => a,
            }
        }
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => return Err(ConfigError::Missing { key: "job.kind".into() }),
    };

    let w = params.omega_m(0);
    let x_start = job.get("x_start").map(|v| ctx.rate("x_start", v)).transpose()?;
    let x_stop = job.get("x_stop").map(|v| ctx.rate("x_stop", v)).transpose()?;
    let x_count = job.get("x_count").map(|v| parse_count("x_count", v)).transpose()?;
    let x_grid = XGrid {
        start: x_start.unwrap_or(-0.2 * w),
        stop: x_stop.unwrap_or(0.2 * w),
        count: x_count.unwrap_or(presets::DEFAULT_X_POINTS),
    };
    if !(x_grid.start.is_finite() && x_grid.stop.is_finite()) {
        return Err(invalid("x_start", "x grid endpoints must be finite"));
    }
    if x_grid.count == 0 || (x_grid.count > 1 && !(x_grid.start < x_grid.stop)) {
        return Err(invalid("x_count", "x grid needs count >= 1 and x_start < x_stop"));
    }

    let mut axis1 = job.get("axis1").map(|v| parse_axis("axis1", v, &ctx)).transpose()?;
    let axis2 = job.get("axis2").map(|v| parse_axis("axis2", v, &ctx)).transpose()?;
    if axis2.is_some() && axis1.is_none() {
        return Err(ConfigError::Missing { key: "job.axis1".into() });
    }
    let kind = match request {
        KindRequest::AnySweep if axis2.is_some() => JobKind::Sweep2d,
        KindRequest::AnySweep => JobKind::Sweep1d,
        KindRequest::Exact(k) => k,
    };
    match kind {
        JobKind::Sweep1d | JobKind::Sweep2d => {
            if axis1.is_none() {
                axis1 = preset.and_then(|p| p.default_axis());
            }
            if axis1.is_none() {
                return Err(ConfigError::Missing { key: "job.axis1".into() });
            }
            if kind == JobKind::Sweep2d && axis2.is_none() {
                return Err(ConfigError::Missing { key: "job.axis2".into() });
            }
            if kind == JobKind::Sweep1d && axis2.is_some() {
                return Err(invalid("axis2", "a sweep1d job takes a single axis"));
            }
        }
        _ => {
            if axis1.is_some() || axis2.is_some() {
                return Err(invalid("axis1", format!("a {kind} job takes no sweep axes")));
            }
        }
    }

    let format = match (ov.format, job.get("format")) {
        (Some(f), _) => f,
        (None, Some(v)) => parse_str("format", v)?.parse().map_err(|m| invalid("format", m))?,
        (None, None) => OutputFormat::default(),
    };
    let output_dir = match (&ov.output_dir, job.get("output")) {
        (Some(d), _) => d.clone(),
        (None, Some(v)) => PathBuf::from(parse_str("output", v)?),
        (None, None) => PathBuf::from("."),
    };

    let mut verify = VerifySpec::default();
    if let Some(v) = job.get("verify_points") {
        verify.points = parse_count("verify_points", v)?;
    }
    if let Some(v) = job.get("verify_seed") {
        verify.seed = match v {
            Value::Integer(i) if *i >= 0 => *i as u64,
            _ => return Err(invalid("verify_seed", "expected a non-negative integer")),
        };
    }
    if let Some(v) = job.get("verify_tolerance") {
        verify.tolerance = match v {
            Value::Float(f) if *f > 0.0 && f.is_finite() => *f,
            _ => return Err(invalid("verify_tolerance", "expected a positive number")),
        };
    }
    if let Some(v) = job.get("verify_convention") {
        verify.convention = parse_convention("verify_convention", v)?;
    }
    if job.contains_key("threads") {
        parse_count("threads", &job["threads"])?;
    }

    Ok(JobSpec {
        kind,
        preset: preset_name,
        params,
        x_grid,
        axis1,
        axis2,
        output_dir,
        format,
        verify,
    })
}

/// Worker cap requested in `[job]`, if any.
pub fn threads_from_config(text: &str) -> Option<usize> {
    let root: Table = text.parse().ok()?;
    let v = root.get("job")?.get("threads")?.as_integer()?;
    usize::try_from(v).ok()
}

fn rate_str(v: f64) -> Value {
    Value::String(format!("{v:e} rad/s"))
}

fn axis_table(a: &SweepAxis) -> Value {
    let end = |v: f64| if a.param.is_rate() { rate_str(v) } else { Value::Float(v) };
    let mut t = Table::new();
    t.insert("param".into(), Value::String(a.param.to_string()));
    t.insert("start".into(), end(a.start));
    t.insert("stop".into(), end(a.stop));
    t.insert("count".into(), Value::Integer(a.count as i64));
    Value::Table(t)
}

fn convention_name(c: Convention) -> &'static str {
    match c {
        Convention::Rotated => "rotated",
        Convention::Literal => "literal",
    }
}

fn branch_name(b: BranchPolicy) -> &'static str {
    match b {
        BranchPolicy::AllRoots => "all_roots",
        BranchPolicy::SmallestIntensity => "smallest_intensity",
        BranchPolicy::FixedPointAttractor => "fixed_point_attractor",
    }
}

/// Serializes a resolved job as a config that parses back to the same job.
/// Every parameter is written explicitly in rad/s.
pub fn to_toml(j: &JobSpec) -> String {
    let p = &j.params;
    let mut s = Table::new();
    if let Some(name) = &j.preset {
        s.insert("preset".into(), Value::String(name.clone()));
    }
    s.insert("convention".into(), Value::String(convention_name(p.convention).into()));
    s.insert("branch".into(), Value::String(branch_name(p.branch).into()));
    for i in 0..3 {
        s.insert(format!("kappa_{}", i + 1), rate_str(p.kappa(i)));
        s.insert(format!("delta_a{}", i + 1), rate_str(p.delta_a(i)));
    }
    if let Some(t) = p.effective_targets {
        for (i, r) in t.iter().enumerate() {
            s.insert(format!("delta_{}", i + 1), rate_str(r.get()));
        }
    }
    for jm in 0..2 {
        s.insert(format!("omega_m{}", jm + 1), rate_str(p.omega_m(jm)));
        s.insert(format!("gamma_{}", jm + 1), rate_str(p.gamma(jm)));
    }
    s.insert("o_m1".into(), rate_str(p.coupling.o_m1.get()));
    s.insert("o_m2".into(), rate_str(p.coupling.o_m2.get()));
    s.insert("o_m31".into(), rate_str(p.coupling.o_m31.get()));
    s.insert("o_m32".into(), rate_str(p.coupling.o_m32.get()));
    s.insert("omega_d1".into(), rate_str(p.drive.omega_d1.get()));
    s.insert("omega_d2".into(), rate_str(p.drive.omega_d2.get()));
    s.insert("phi_d1".into(), Value::Float(p.drive.phi_d1));
    s.insert("phi_d2".into(), Value::Float(p.drive.phi_d2));
    s.insert("omega_p1".into(), rate_str(p.probe.omega_p1.get()));
    s.insert("omega_p2".into(), rate_str(p.probe.omega_p2.get()));
    s.insert("phi_p1".into(), Value::Float(p.probe.phi_p1));
    s.insert("phi_p2".into(), Value::Float(p.probe.phi_p2));

    let mut job = Table::new();
    job.insert("kind".into(), Value::String(j.kind.name().into()));
    job.insert("x_start".into(), rate_str(j.x_grid.start));
    job.insert("x_stop".into(), rate_str(j.x_grid.stop));
    job.insert("x_count".into(), Value::Integer(j.x_grid.count as i64));
    if let Some(a) = &j.axis1 {
        job.insert("axis1".into(), axis_table(a));
    }
    if let Some(a) = &j.axis2 {
        job.insert("axis2".into(), axis_table(a));
    }
    job.insert("format".into(), Value::String(j.format.extension().into()));
    job.insert("output".into(), Value::String(j.output_dir.to_string_lossy().into_owned()));
    job.insert("verify_points".into(), Value::Integer(j.verify.points as i64));
    job.insert("verify_seed".into(), Value::Integer(j.verify.seed as i64));
    job.insert("verify_tolerance".into(), Value::Float(j.verify.tolerance));
    job.insert(
        "verify_convention".into(),
        Value::String(convention_name(j.verify.convention).into()),
    );

    let mut root = Table::new();
    root.insert("system".into(), Value::Table(s));
    root.insert("job".into(), Value::Table(job));
    toml::to_string(&root).expect("config tables serialize")
}
