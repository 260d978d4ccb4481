//! Time-domain check of the linear response.
//!
//! Integrates the nonlinear mean-value equations with the probe switched
//! on, then reads off the e^{−iνt} component of the late-time trajectory by
//! a discrete projection. Fixed-step RK4 keeps runs reproducible.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{self, State};
use crate::model::{AngularRate, Convention, SystemParams};
use crate::response::{self, ResponseError};
use crate::steady_state::{drive_superposition, pin_effective_targets};

/// Largest `t_end/dt` accepted by [`TimeGrid::validate`].
pub const MAX_STEPS: f64 = 1e8;
/// Samples stored per beat period by [`TimeGrid::for_sideband`].
pub const SAMPLES_PER_BEAT: usize = 64;
/// Beat periods in the analysis window.
pub const WINDOW_BEATS: usize = 50;
/// Relative tolerance for the weak-probe comparison.
pub const DEFAULT_TOLERANCE: f64 = 5e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TimeDomainError {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("trajectory diverged at t = {t:e} (|{mode}| = {magnitude:e} exceeds {limit:e})")]
    Diverged {
        t: f64,
        mode: &'static str,
        magnitude: f64,
        limit: f64,
    },
    #[error("analysis window covers {available:.3} beat periods, need {required}; use t_end >= {required_t_end:e}")]
    WindowTooShort {
        available: f64,
        required: usize,
        required_t_end: f64,
    },
    #[error(transparent)]
    Response(#[from] ResponseError),
}

/// Fixed-step integration grid. Times are in the same units as the rates
/// of the [`SystemParams`] being integrated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_end: f64,
    pub dt: f64,
    /// Leading fraction of the run discarded before demodulation.
    pub transient_fraction: f64,
    /// Store every `sample_stride`-th step.
    pub sample_stride: usize,
}

impl TimeGrid {
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    /// Largest step allowed for `p`: `0.05 / max(ω_m, |Δ_a|, κ)`.
    pub fn max_dt(p: &SystemParams) -> f64 {
        let fastest = (0..3)
            .flat_map(|i| [p.delta_a(i).abs(), p.kappa(i)])
            .chain((0..2).map(|j| p.omega_m(j)))
            .fold(0.0, f64::max);
        0.05 / fastest
    }

    pub fn validate(&self, p: &SystemParams) -> Result<(), TimeDomainError> {
        let bad = |m: String| Err(TimeDomainError::InvalidGrid(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be > 0, got {}", self.t_end));
        }
        if !(self.transient_fraction > 0.0 && self.transient_fraction < 1.0) {
            return bad(format!(
                "transient_fraction must lie in (0, 1), got {}",
                self.transient_fraction
            ));
        }
        if self.sample_stride == 0 {
            return bad("sample_stride must be >= 1".into());
        }
        if self.t_end / self.dt > MAX_STEPS {
            return bad(format!("t_end/dt = {:e} exceeds {MAX_STEPS:e}", self.t_end / self.dt));
        }
        let limit = Self::max_dt(p) * (1.0 + 1e-12);
        if self.dt > limit {
            return bad(format!("dt = {:e} does not resolve the fastest rate (need <= {limit:e})", self.dt));
        }
        Ok(())
    }

    /// Grid for demodulating at `nu`: [`SAMPLES_PER_BEAT`] stored samples per
    /// beat, a window of [`WINDOW_BEATS`] beats (longer if needed for the
    /// optical transient to die out), preceded by an 80% transient.
    ///
    /// A zero frequency uses the beat period of `0.02·ω_m1`.
    pub fn for_sideband(p: &SystemParams, nu: f64) -> TimeGrid {
        let transient_fraction = 0.8;
        let reference = if nu == 0.0 { 0.02 * p.omega_m(0) } else { nu.abs() };
        let beat = 2.0 * PI / reference;
        let stride = (beat / (SAMPLES_PER_BEAT as f64 * Self::max_dt(p))).ceil() as usize;
        let stride = stride.max(1);
        let dt = beat / (SAMPLES_PER_BEAT * stride) as f64;
        let slowest_optical = (0..3).map(|i| p.kappa(i)).fold(f64::INFINITY, f64::min);
        // The transient must cover 30 optical lifetimes.
        let min_transient = 30.0 / slowest_optical;
        let min_window = min_transient * (1.0 - transient_fraction) / transient_fraction;
        let beats = WINDOW_BEATS.max((min_window / beat).ceil() as usize);
        let window_steps = beats * SAMPLES_PER_BEAT * stride;
        let total_steps = (window_steps as f64 / (1.0 - transient_fraction)).round() as usize;
        TimeGrid {
            t_end: total_steps as f64 * dt,
            dt,
            transient_fraction,
            sample_stride: stride,
        }
    }

    /// Index of the first step inside the analysis window.
    fn window_start_step(&self) -> usize {
        (self.transient_fraction * self.steps() as f64).round() as usize
    }
}

/// Integration frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Frame {
    /// Integrate the drive-frame amplitudes directly.
    Drive,
    /// Integrate `zₖ = yₖ·e^{iRₖt}`; the rotation is folded into the
    /// equations analytically and results are mapped back to the drive frame.
    CoRotating([f64; 5]),
}

impl Frame {
    /// Rotation at each mode's own free frequency `(Δ_a1, Δ_a2, Δ_a3, ω_m1, ω_m2)`.
    pub fn pre_rotated(p: &SystemParams) -> Frame {
        Frame::CoRotating([p.delta_a(0), p.delta_a(1), p.delta_a(2), p.omega_m(0), p.omega_m(1)])
    }
}

/// Drive-frame mean values sampled on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `modes[k][n]` is mode `k` (a₁, a₂, a₃, b₁, b₂) at `times[n]`.
    pub modes: [Vec<Complex64>; 5],
}

pub const MODE_NAMES: [&str; 5] = ["a1", "a2", "a3", "b1", "b2"];

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Debug dump: `t` then real and imaginary part of every mode.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "t")?;
        for m in MODE_NAMES {
            write!(w, ",re_{m},im_{m}")?;
        }
        writeln!(w)?;
        for n in 0..self.len() {
            write!(w, "{:.16e}", self.times[n])?;
            for m in &self.modes {
                write!(w, ",{:.16e},{:.16e}", m[n].re, m[n].im)?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

struct System<'a> {
    p: &'a SystemParams,
    drive: Complex64,
    probe: Complex64,
    nu: f64,
    rates: [Complex64; 5],
    frame: Frame,
}

impl System<'_> {
    fn rhs(&self, t: f64, z: &State) -> State {
        let forcing = self.drive + self.probe * Complex64::from_polar(1.0, -self.nu * t);
        match self.frame {
            Frame::Drive => {
                let mut f = dynamics::nonlinear_and_forcing(self.p, z, forcing);
                for k in 0..5 {
                    f[k] -= self.rates[k] * z[k];
                }
                f
            }
            Frame::CoRotating(r) => {
                let phase: [Complex64; 5] = std::array::from_fn(|k| Complex64::from_polar(1.0, r[k] * t));
                let y: State = std::array::from_fn(|k| z[k] / phase[k]);
                let n = dynamics::nonlinear_and_forcing(self.p, &y, forcing);
                std::array::from_fn(|k| {
                    phase[k] * n[k] - (self.rates[k] - Complex64::new(0.0, r[k])) * z[k]
                })
            }
        }
    }

    fn to_frame(&self, t: f64, y: &State) -> State {
        match self.frame {
            Frame::Drive => *y,
            Frame::CoRotating(r) => std::array::from_fn(|k| y[k] * Complex64::from_polar(1.0, r[k] * t)),
        }
    }

    fn from_frame(&self, t: f64, z: &State) -> State {
        match self.frame {
            Frame::Drive => *z,
            Frame::CoRotating(r) => std::array::from_fn(|k| z[k] * Complex64::from_polar(1.0, -r[k] * t)),
        }
    }

    fn rk4(&self, t: f64, z: &State, h: f64) -> State {
        let add = |a: &State, b: &State, s: f64| -> State { std::array::from_fn(|k| a[k] + b[k] * s) };
        let k1 = self.rhs(t, z);
        let k2 = self.rhs(t + 0.5 * h, &add(z, &k1, 0.5 * h));
        let k3 = self.rhs(t + 0.5 * h, &add(z, &k2, 0.5 * h));
        let k4 = self.rhs(t + h, &add(z, &k3, h));
        std::array::from_fn(|k| z[k] + (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]) * (h / 6.0))
    }
}

/// Integrates from `init` at t = 0 with the probe term
/// `Σ Ω_pj·e^{−i(νt − Φ_pj)}`, `ν = probe_detuning`.
pub fn integrate_mean_field(
    p: &SystemParams,
    grid: &TimeGrid,
    init: State,
    probe_detuning: f64,
    frame: Frame,
) -> Result<Trajectory, TimeDomainError> {
    let p = &pin_effective_targets(p);
    grid.validate(p)?;
    let sys = System {
        p,
        drive: drive_superposition(&p.drive),
        probe: response::probe_superposition(&p.probe),
        nu: probe_detuning,
        rates: dynamics::linear_rates(p),
        frame,
    };
    let min_kappa = (0..3).map(|i| p.kappa(i)).fold(f64::INFINITY, f64::min);
    let scale = (sys.drive.norm() + sys.probe.norm()) / min_kappa
        + init.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let limit = 1e6 * scale.max(f64::MIN_POSITIVE);

    let steps = grid.steps();
    let stride = grid.sample_stride;
    let capacity = steps / stride + 1;
    let mut times = Vec::with_capacity(capacity);
    let mut modes: [Vec<Complex64>; 5] = std::array::from_fn(|_| Vec::with_capacity(capacity));
    let mut z = sys.to_frame(0.0, &init);
    for n in 0..=steps {
        let t = n as f64 * grid.dt;
        if n % stride == 0 {
            let y = sys.from_frame(t, &z);
            for k in 0..5 {
                let m = y[k].norm();
                if !(m <= limit) {
                    return Err(TimeDomainError::Diverged {
                        t,
                        mode: MODE_NAMES[k],
                        magnitude: m,
                        limit,
                    });
                }
                modes[k].push(y[k]);
            }
            times.push(t);
        }
        if n < steps {
            z = sys.rk4(t, &z, grid.dt);
        }
    }
    Ok(Trajectory { times, modes })
}

/// Estimates the e^{−iνt} coefficient of every mode over the
/// post-transient window as a Hann-weighted mean
/// `Σ wₙ·(y(tₙ) − y_s)·e^{iνtₙ} / Σ wₙ`.
///
/// The taper suppresses free mechanical ringing, which decays only at γ and
/// would otherwise leak into the estimate. Tones at whole multiples of the
/// beat other than ν itself, such as the counter-rotating sideband, cancel
/// exactly.
///
/// For `ν = 0` this is the mean shift of the tail relative to `baseline`.
/// For `ν ≠ 0` the window must hold at least [`WINDOW_BEATS`] beats.
pub fn demodulate_sideband(
    tr: &Trajectory,
    nu: f64,
    grid: &TimeGrid,
    baseline: &State,
) -> Result<[Complex64; 5], TimeDomainError> {
    let t0 = grid.window_start_step() as f64 * grid.dt;
    let start = tr.times.partition_point(|&t| t < t0 - 0.5 * grid.dt);
    let mut n = tr.len().saturating_sub(start);
    let sample_dt = grid.dt * grid.sample_stride as f64;
    if nu != 0.0 {
        let beat = 2.0 * PI / nu.abs();
        // Trim to whole beats when the sampling is commensurate with them.
        let per_beat = beat / sample_dt;
        if (per_beat - per_beat.round()).abs() < 1e-9 * per_beat && per_beat.round() >= 1.0 {
            let per_beat = per_beat.round() as usize;
            n -= n % per_beat;
        }
        let available = n as f64 * sample_dt / beat;
        if available + 1e-9 < WINDOW_BEATS as f64 {
            return Err(TimeDomainError::WindowTooShort {
                available,
                required: WINDOW_BEATS,
                required_t_end: WINDOW_BEATS as f64 * beat / (1.0 - grid.transient_fraction),
            });
        }
    }
    if n == 0 {
        return Err(TimeDomainError::WindowTooShort {
            available: 0.0,
            required: WINDOW_BEATS,
            required_t_end: grid.t_end,
        });
    }
    let mut acc = [Complex64::new(0.0, 0.0); 5];
    let mut weight = 0.0;
    for (k, idx) in (start..start + n).enumerate() {
        let hann = 1.0 - (2.0 * PI * k as f64 / n as f64).cos();
        let w = Complex64::from_polar(hann, nu * tr.times[idx]);
        weight += hann;
        for m in 0..5 {
            acc[m] += (tr.modes[m][idx] - baseline[m]) * w;
        }
    }
    Ok(acc.map(|a| a / weight))
}

/// Per-mode comparison of the demodulated and analytic sideband amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub x: f64,
    /// Probe detuning ν the trajectory was driven and demodulated at.
    pub probe_detuning: f64,
    pub convention: Convention,
    /// Factor applied to both probe strengths for the run.
    pub probe_scale: f64,
    pub analytic: [Complex64; 5],
    pub demodulated: [Complex64; 5],
    /// `|demod − analytic|/|analytic|`; `None` where the analytic amplitude
    /// is below 1e-9 of the largest one.
    pub relative_deviation: [Option<f64>; 5],
    pub tolerance: f64,
    pub passed: bool,
    pub steps: usize,
}

impl ComparisonReport {
    /// Largest deviation over the two port modes.
    pub fn port_deviation(&self) -> f64 {
        self.relative_deviation[..2]
            .iter()
            .flatten()
            .copied()
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossCheckOptions {
    /// Probe strength relative to the larger drive.
    pub probe_ratio: f64,
    pub tolerance: f64,
    pub frame: Frame,
    /// Grid override; defaults to [`TimeGrid::for_sideband`].
    pub grid: Option<TimeGrid>,
}

impl CrossCheckOptions {
    pub fn new(p: &SystemParams) -> Self {
        CrossCheckOptions {
            probe_ratio: 1e-3,
            tolerance: DEFAULT_TOLERANCE,
            frame: Frame::pre_rotated(p),
            grid: None,
        }
    }
}

/// Probe detuning at which the time-domain run reproduces the frequency-
/// domain offset `x` under `p.convention`.
///
/// The printed denominators `κ + iΔ_a − ix` are the response of the drive-
/// frame equations to a probe at ν = x. The rotated ones correspond to a
/// probe at ν = ω_m1 + x.
pub fn probe_detuning_for(p: &SystemParams, x: f64) -> f64 {
    match p.convention {
        Convention::Literal => x,
        Convention::Rotated => p.omega_m(0) + x,
    }
}

pub fn cross_check_response(p: &SystemParams, x: AngularRate) -> Result<ComparisonReport, TimeDomainError> {
    let (pinned, _) = response::operating_point(p)?;
    cross_check_with(p, x, &CrossCheckOptions::new(&pinned))
}

pub fn cross_check_with(
    p: &SystemParams,
    x: AngularRate,
    opts: &CrossCheckOptions,
) -> Result<ComparisonReport, TimeDomainError> {
    let (mut p, s) = response::operating_point(p)?;
    let max_probe = p.probe.omega_p1.get().max(p.probe.omega_p2.get());
    let max_drive = p.drive.omega_d1.get().max(p.drive.omega_d2.get());
    let probe_scale = if max_probe > 0.0 {
        opts.probe_ratio * max_drive / max_probe
    } else {
        1.0
    };
    p.probe.omega_p1 = p.probe.omega_p1.scaled(probe_scale);
    p.probe.omega_p2 = p.probe.omega_p2.scaled(probe_scale);

    let analytic = response::solve_fluctuation_system(&p, &s, x)?.as_array();
    let nu = probe_detuning_for(&p, x.get());
    let grid = opts.grid.unwrap_or_else(|| TimeGrid::for_sideband(&p, nu));
    let init: State = [s.a[0], s.a[1], s.a[2], s.b[0], s.b[1]];
    let tr = integrate_mean_field(&p, &grid, init, nu, opts.frame)?;
    let demodulated = demodulate_sideband(&tr, nu, &grid, &init)?;

    let largest = analytic.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let relative_deviation: [Option<f64>; 5] = std::array::from_fn(|k| {
        let a = analytic[k].norm();
        (a > 1e-9 * largest).then(|| (demodulated[k] - analytic[k]).norm() / a)
    });
    let passed = relative_deviation
        .iter()
        .flatten()
        .all(|&d| d <= opts.tolerance);
    Ok(ComparisonReport {
        x: x.get(),
        probe_detuning: nu,
        convention: p.convention,
        probe_scale,
        analytic,
        demodulated,
        relative_deviation,
        tolerance: opts.tolerance,
        passed,
        steps: grid.steps(),
    })
}
