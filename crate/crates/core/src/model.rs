//! Parameter space of the two-port cavity: three optical modes, two
//! mechanical modes, their couplings, and the drive/probe fields.
//!
//! Every rate is an angular frequency. Values quoted as `ν = ω/2π` must be
//! converted with [`AngularRate::from_cyclic`] before they enter a
//! [`SystemParams`].

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::steady_state::BranchPolicy;

/// Reduced Planck constant in J·s. Only [`coupling_from_geometry`] is
/// dimensional; the dynamics themselves are written with ħ = 1.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Angular frequency in rad/s (or in units of ω_m1 once normalized).
#[derive(Debug, Clone, Copy, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AngularRate(pub f64);

impl AngularRate {
    pub const ZERO: AngularRate = AngularRate(0.0);

    pub const fn new(value: f64) -> Self {
        AngularRate(value)
    }

    /// Build from a cyclic frequency in Hz, i.e. `ω = 2π·ν`.
    pub fn from_cyclic(hz: f64) -> Self {
        AngularRate(2.0 * PI * hz)
    }

    #[inline]
    pub const fn get(self) -> f64 {
        self.0
    }

    pub fn cyclic(self) -> f64 {
        self.0 / (2.0 * PI)
    }

    pub fn scaled(self, factor: f64) -> Self {
        AngularRate(self.0 * factor)
    }
}

impl fmt::Display for AngularRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} rad/s", self.0)
    }
}

/// Optical mode `a_i`: loss rate κ_i and bare cavity-drive detuning Δ_ai.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalMode {
    pub kappa: AngularRate,
    pub delta_a: AngularRate,
}

/// Mechanical mode `b_j`: resonance ω_mj and damping γ_j.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanicalMode {
    pub omega_m: AngularRate,
    pub gamma: AngularRate,
}

/// Optomechanical coupling strengths.
///
/// `o_m1`, `o_m2` couple `a_1`–`b_1` and `a_2`–`b_2`; `o_m31`, `o_m32` couple
/// the middle mode `a_3` to `b_1` and `b_2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub o_m1: AngularRate,
    pub o_m2: AngularRate,
    pub o_m31: AngularRate,
    pub o_m32: AngularRate,
}

/// Strong classical drives entering from ports 1 and 2. Phases are in
/// radians and kept unreduced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drives {
    pub omega_d1: AngularRate,
    pub omega_d2: AngularRate,
    pub phi_d1: f64,
    pub phi_d2: f64,
}

/// Weak probes entering from ports 1 and 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probes {
    pub omega_p1: AngularRate,
    pub omega_p2: AngularRate,
    pub phi_p1: f64,
    pub phi_p2: f64,
}

/// Which form of the fluctuation denominators to evaluate.
///
/// `Literal` uses the bare detunings and ω_mj as printed,
/// `U_i = i x − i Δ_ai − κ_i`, `V_j = i x − i ω_mj − γ_j`.
/// `Rotated` refers every mode to a frame turning at ω_m1 and uses the
/// effective detunings, `U_i = i x − i (Δ_i − ω_m1) − κ_i`,
/// `V_j = i x − i (ω_mj − ω_m1) − γ_j`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    Literal,
    #[default]
    Rotated,
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::Literal => "literal",
            Convention::Rotated => "rotated",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitMode {
    RadPerSec,
    OmegaM1Units,
}

/// Unit system a [`SystemParams`] is currently expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Units {
    RadPerSec,
    /// Every rate divided by ω_m1; `omega_m1` keeps its rad/s value so the
    /// conversion can be undone.
    OmegaM1Units { omega_m1: f64 },
}

impl Units {
    pub fn mode(&self) -> UnitMode {
        match self {
            Units::RadPerSec => UnitMode::RadPerSec,
            Units::OmegaM1Units { .. } => UnitMode::OmegaM1Units,
        }
    }

    /// rad/s represented by one internal unit.
    pub fn scale(&self) -> f64 {
        match self {
            Units::RadPerSec => 1.0,
            Units::OmegaM1Units { omega_m1 } => *omega_m1,
        }
    }
}

/// Full parameter record of the cavity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub optical: [OpticalMode; 3],
    pub mech: [MechanicalMode; 2],
    pub coupling: Couplings,
    pub drive: Drives,
    pub probe: Probes,
    /// Effective detunings Δ_1, Δ_2, Δ_3 the operating point must reach.
    /// When set, the bare detunings in `optical` are recomputed from them
    /// before every steady-state solve.
    pub effective_targets: Option<[AngularRate; 3]>,
    pub convention: Convention,
    pub branch: BranchPolicy,
    pub units: Units,
}

impl SystemParams {
    pub fn kappa(&self, i: usize) -> f64 {
        self.optical[i].kappa.get()
    }

    pub fn delta_a(&self, i: usize) -> f64 {
        self.optical[i].delta_a.get()
    }

    pub fn omega_m(&self, j: usize) -> f64 {
        self.mech[j].omega_m.get()
    }

    pub fn gamma(&self, j: usize) -> f64 {
        self.mech[j].gamma.get()
    }

    /// Coupling of each optical port mode to its own mirror: `[O_m1, O_m2]`.
    pub fn port_couplings(&self) -> [f64; 2] {
        [self.coupling.o_m1.get(), self.coupling.o_m2.get()]
    }

    /// Coupling of the middle mode to each mirror: `[O_m31, O_m32]`.
    pub fn middle_couplings(&self) -> [f64; 2] {
        [self.coupling.o_m31.get(), self.coupling.o_m32.get()]
    }

    pub fn probe_strengths(&self) -> [f64; 2] {
        [self.probe.omega_p1.get(), self.probe.omega_p2.get()]
    }

    pub fn drive_strengths(&self) -> [f64; 2] {
        [self.drive.omega_d1.get(), self.drive.omega_d2.get()]
    }

    /// Mirror image of the device: every port-1 quantity exchanged with its
    /// port-2 counterpart. Transmissions map as `t_12 ↔ t_21` when
    /// ω_m1 = ω_m2 (the x axis is measured from ω_m1).
    pub fn port_swapped(&self) -> SystemParams {
        let mut p = self.clone();
        p.optical.swap(0, 1);
        p.mech.swap(0, 1);
        let c = self.coupling;
        p.coupling = Couplings {
            o_m1: c.o_m2,
            o_m2: c.o_m1,
            o_m31: c.o_m32,
            o_m32: c.o_m31,
        };
        let d = self.drive;
        p.drive = Drives {
            omega_d1: d.omega_d2,
            omega_d2: d.omega_d1,
            phi_d1: d.phi_d2,
            phi_d2: d.phi_d1,
        };
        let pr = self.probe;
        p.probe = Probes {
            omega_p1: pr.omega_p2,
            omega_p2: pr.omega_p1,
            phi_p1: pr.phi_p2,
            phi_p2: pr.phi_p1,
        };
        if let Some(mut t) = p.effective_targets {
            t.swap(0, 1);
            p.effective_targets = Some(t);
        }
        p
    }

    /// Calls `f` on every field that carries a rate.
    fn for_each_rate(&mut self, mut f: impl FnMut(&mut AngularRate)) {
        for m in &mut self.optical {
            f(&mut m.kappa);
            f(&mut m.delta_a);
        }
        for m in &mut self.mech {
            f(&mut m.omega_m);
            f(&mut m.gamma);
        }
        let c = &mut self.coupling;
        for r in [&mut c.o_m1, &mut c.o_m2, &mut c.o_m31, &mut c.o_m32] {
            f(r);
        }
        f(&mut self.drive.omega_d1);
        f(&mut self.drive.omega_d2);
        f(&mut self.probe.omega_p1);
        f(&mut self.probe.omega_p2);
        if let Some(t) = &mut self.effective_targets {
            t.iter_mut().for_each(&mut f);
        }
    }

    /// Multiplies every rate by `factor` without touching `units`.
    pub(crate) fn rescale_rates(&mut self, factor: f64) {
        self.for_each_rate(|r| r.0 *= factor);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Outcome of [`validate_params`]. Hard failures go to `errors`; broken
/// regime assumptions go to `warnings`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    fn error(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.errors.push(Issue {
            field: field.into(),
            message: message.into(),
        });
    }

    fn warn(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.warnings.push(Issue {
            field: field.into(),
            message: message.into(),
        });
    }
}

/// Ratio used to read "≫" in the regime advisories.
pub const ADVISORY_RATIO: f64 = 5.0;

pub fn validate_params(p: &SystemParams) -> ValidationReport {
    let mut report = ValidationReport::default();

    let finite = |report: &mut ValidationReport, name: String, v: f64| {
        if !v.is_finite() {
            report.error(name, format!("must be finite, got {v}"));
            false
        } else {
            true
        }
    };

    for (i, m) in p.optical.iter().enumerate() {
        let n = i + 1;
        if finite(&mut report, format!("kappa_{n}"), m.kappa.get()) && m.kappa.get() <= 0.0 {
            report.error(format!("kappa_{n}"), "photon loss rate must be > 0");
        }
        finite(&mut report, format!("delta_a{n}"), m.delta_a.get());
    }
    for (j, m) in p.mech.iter().enumerate() {
        let n = j + 1;
        if finite(&mut report, format!("omega_m{n}"), m.omega_m.get()) && m.omega_m.get() <= 0.0 {
            report.error(format!("omega_m{n}"), "mechanical frequency must be > 0");
        }
        if finite(&mut report, format!("gamma_{n}"), m.gamma.get()) && m.gamma.get() <= 0.0 {
            report.error(format!("gamma_{n}"), "mechanical damping must be > 0");
        }
    }
    let c = p.coupling;
    for (name, v) in [
        ("o_m1", c.o_m1),
        ("o_m2", c.o_m2),
        ("o_m31", c.o_m31),
        ("o_m32", c.o_m32),
        ("omega_d1", p.drive.omega_d1),
        ("omega_d2", p.drive.omega_d2),
        ("omega_p1", p.probe.omega_p1),
        ("omega_p2", p.probe.omega_p2),
    ] {
        if finite(&mut report, name.to_string(), v.get()) && v.get() < 0.0 {
            report.error(name, "must be >= 0");
        }
    }
    for (name, v) in [
        ("phi_d1", p.drive.phi_d1),
        ("phi_d2", p.drive.phi_d2),
        ("phi_p1", p.probe.phi_p1),
        ("phi_p2", p.probe.phi_p2),
    ] {
        finite(&mut report, name.to_string(), v);
    }
    if let Some(t) = p.effective_targets {
        for (i, d) in t.iter().enumerate() {
            finite(&mut report, format!("delta_{}", i + 1), d.get());
        }
    }
    if let Units::OmegaM1Units { omega_m1 } = p.units {
        if !(omega_m1.is_finite() && omega_m1 > 0.0) {
            report.error("units", "omega_m1 scale must be finite and > 0");
        }
    }

    if !report.is_ok() {
        return report;
    }

    // Resolved sideband regime: every mechanical frequency well above every
    // cavity linewidth.
    for (j, m) in p.mech.iter().enumerate() {
        for (i, o) in p.optical.iter().enumerate() {
            if m.omega_m.get() < ADVISORY_RATIO * o.kappa.get() {
                report.warn(
                    format!("omega_m{}", j + 1),
                    format!(
                        "resolved-sideband regime broken: omega_m{} = {} is not >> kappa_{} = {}",
                        j + 1,
                        m.omega_m,
                        i + 1,
                        o.kappa
                    ),
                );
            }
        }
    }
    // Weak probe: each probe well below the drive on the same port.
    for (k, (probe, drive)) in p
        .probe_strengths()
        .into_iter()
        .zip(p.drive_strengths())
        .enumerate()
    {
        if probe > 0.0 && probe * ADVISORY_RATIO > drive {
            report.warn(
                format!("omega_p{}", k + 1),
                format!(
                    "weak-probe assumption broken: omega_p{} = {probe} is not << omega_d{} = {drive}",
                    k + 1,
                    k + 1
                ),
            );
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{field} must be > 0, got {value}")]
    NonPositive { field: &'static str, value: f64 },
}

/// Geometry of one cavity/mirror pair, in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryParams {
    /// Optical mode frequency ω_a (rad/s).
    pub omega_a: AngularRate,
    /// Cavity length in metres.
    pub length: f64,
    /// Effective mirror mass in kilograms.
    pub m_eff: f64,
    /// Mirror resonance ω_m (rad/s).
    pub omega_m: AngularRate,
}

/// Single-photon optomechanical coupling `(ω_a / L)·√(ħ / (m_eff ω_m))`.
pub fn coupling_from_geometry(g: &GeometryParams) -> Result<AngularRate, ModelError> {
    for (field, value) in [
        ("length", g.length),
        ("m_eff", g.m_eff),
        ("omega_m", g.omega_m.get()),
    ] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(ModelError::NonPositive { field, value });
        }
    }
    let zpf = (HBAR / (g.m_eff * g.omega_m.get())).sqrt();
    Ok(AngularRate(g.omega_a.get() / g.length * zpf))
}

/// Re-expresses `p` in the requested unit system. Amplitudes are
/// invariant under a common rescaling of all rates, so only the rate fields
/// change.
pub fn normalize_units(p: &SystemParams, target: UnitMode) -> SystemParams {
    let mut out = p.clone();
    match (p.units, target) {
        (Units::RadPerSec, UnitMode::OmegaM1Units) => {
            let omega_m1 = p.omega_m(0);
            out.rescale_rates(1.0 / omega_m1);
            // Exact 1 rather than ω/ω rounding.
            out.mech[0].omega_m = AngularRate(1.0);
            out.units = Units::OmegaM1Units { omega_m1 };
        }
        (Units::OmegaM1Units { omega_m1 }, UnitMode::RadPerSec) => {
            out.rescale_rates(omega_m1);
            out.units = Units::RadPerSec;
        }
        _ => {}
    }
    out
}
