//! Parameter sweeps and peak extraction.
//!
//! A sweep evaluates full spectra over one or two parameter axes. Each axis
//! value gets its own steady state; failures stay in their cell.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AngularRate, SystemParams};
use crate::response::{self, ResponseError, TransmissionPoint};
use crate::steady_state::{self, SteadyStateSolution};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("invalid axis: {0}")]
    InvalidAxis(String),
    #[error("unknown sweep parameter '{0}'")]
    UnknownParameter(String),
    #[error("x grid must be non-empty and strictly increasing")]
    BadGrid,
}

/// A sweepable quantity. Indices are zero-based; names are one-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum SweepParam {
    Kappa(usize),
    Gamma(usize),
    OmegaM(usize),
    /// Bare detuning; clears the effective targets.
    DeltaA(usize),
    /// Effective detuning target.
    Delta(usize),
    OM1,
    OM2,
    OM31,
    OM32,
    /// Sets `o_m31 = o_m32`.
    OM3,
    OmegaD(usize),
    PhiD(usize),
    OmegaP(usize),
    PhiP(usize),
    /// Relative phase applied as `Φ_p1 = Φ_p2 = φ/2` with drive phases zero.
    PhiRel,
    /// Relative phase added to `Φ_p1` only.
    PhiRelP1,
    /// Relative phase added to `Φ_p2` only.
    PhiRelP2,
}

impl SweepParam {
    /// Whether values are rates (as opposed to phases in radians).
    pub fn is_rate(&self) -> bool {
        !matches!(
            self,
            SweepParam::PhiD(_)
                | SweepParam::PhiP(_)
                | SweepParam::PhiRel
                | SweepParam::PhiRelP1
                | SweepParam::PhiRelP2
        )
    }

    /// Returns `p` with this parameter set to `v`.
    pub fn apply(&self, p: &SystemParams, v: f64) -> SystemParams {
        use SweepParam::*;
        let mut q = p.clone();
        let r = AngularRate(v);
        match *self {
            Kappa(i) => q.optical[i].kappa = r,
            Gamma(j) => q.mech[j].gamma = r,
            OmegaM(j) => q.mech[j].omega_m = r,
            DeltaA(i) => {
                q = steady_state::pin_effective_targets(&q);
                q.effective_targets = None;
                q.optical[i].delta_a = r;
            }
            Delta(i) => {
                let mut t = match q.effective_targets {
                    Some(t) => t,
                    None => match steady_state::operating_point(&q) {
                        Ok(s) => s.delta,
                        Err(_) => [0, 1, 2].map(|k| q.optical[k].delta_a),
                    },
                };
                t[i] = r;
                q.effective_targets = Some(t);
            }
            OM1 => q.coupling.o_m1 = r,
            OM2 => q.coupling.o_m2 = r,
            OM31 => q.coupling.o_m31 = r,
            OM32 => q.coupling.o_m32 = r,
            OM3 => {
                q.coupling.o_m31 = r;
                q.coupling.o_m32 = r;
            }
            OmegaD(0) => q.drive.omega_d1 = r,
            OmegaD(_) => q.drive.omega_d2 = r,
            PhiD(0) => q.drive.phi_d1 = v,
            PhiD(_) => q.drive.phi_d2 = v,
            OmegaP(0) => q.probe.omega_p1 = r,
            OmegaP(_) => q.probe.omega_p2 = r,
            PhiP(0) => q.probe.phi_p1 = v,
            PhiP(_) => q.probe.phi_p2 = v,
            PhiRel => {
                q.probe.phi_p1 = v / 2.0;
                q.probe.phi_p2 = v / 2.0;
                q.drive.phi_d1 = 0.0;
                q.drive.phi_d2 = 0.0;
            }
            PhiRelP1 => q.probe.phi_p1 += v,
            PhiRelP2 => q.probe.phi_p2 += v,
        }
        q
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use SweepParam::*;
        match self {
            Kappa(i) => write!(f, "kappa_{}", i + 1),
            Gamma(j) => write!(f, "gamma_{}", j + 1),
            OmegaM(j) => write!(f, "omega_m{}", j + 1),
            DeltaA(i) => write!(f, "delta_a{}", i + 1),
            Delta(i) => write!(f, "delta_{}", i + 1),
            OM1 => f.write_str("o_m1"),
            OM2 => f.write_str("o_m2"),
            OM31 => f.write_str("o_m31"),
            OM32 => f.write_str("o_m32"),
            OM3 => f.write_str("o_m3"),
            OmegaD(j) => write!(f, "omega_d{}", j + 1),
            PhiD(j) => write!(f, "phi_d{}", j + 1),
            OmegaP(j) => write!(f, "omega_p{}", j + 1),
            PhiP(j) => write!(f, "phi_p{}", j + 1),
            PhiRel => f.write_str("phi_rel"),
            PhiRelP1 => f.write_str("phi_rel_p1"),
            PhiRelP2 => f.write_str("phi_rel_p2"),
        }
    }
}

impl FromStr for SweepParam {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        use SweepParam::*;
        let lower = s.trim().to_ascii_lowercase();
        let indexed = |prefix: &str, n: usize| -> Option<usize> {
            let rest = lower.strip_prefix(prefix)?;
            let k: usize = rest.parse().ok()?;
            (1..=n).contains(&k).then_some(k - 1)
        };
        let p = match lower.as_str() {
            "o_m1" => OM1,
            "o_m2" => OM2,
            "o_m31" => OM31,
            "o_m32" => OM32,
            "o_m3" => OM3,
            "phi_rel" => PhiRel,
            "phi_rel_p1" => PhiRelP1,
            "phi_rel_p2" => PhiRelP2,
            _ => {
                if let Some(i) = indexed("kappa_", 3) {
                    Kappa(i)
                } else if let Some(j) = indexed("gamma_", 2) {
                    Gamma(j)
                } else if let Some(j) = indexed("omega_m", 2) {
                    OmegaM(j)
                } else if let Some(i) = indexed("delta_a", 3) {
                    DeltaA(i)
                } else if let Some(i) = indexed("delta_", 3) {
                    Delta(i)
                } else if let Some(j) = indexed("omega_d", 2) {
                    OmegaD(j)
                } else if let Some(j) = indexed("phi_d", 2) {
                    PhiD(j)
                } else if let Some(j) = indexed("omega_p", 2) {
                    OmegaP(j)
                } else if let Some(j) = indexed("phi_p", 2) {
                    PhiP(j)
                } else {
                    return Err(SweepError::UnknownParameter(s.to_string()));
                }
            }
        };
        Ok(p)
    }
}

impl From<SweepParam> for String {
    fn from(p: SweepParam) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for SweepParam {
    type Error = SweepError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisScale {
    #[default]
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub scale: AxisScale,
}

impl SweepAxis {
    pub fn new(param: SweepParam, start: f64, stop: f64, count: usize) -> Result<Self, SweepError> {
        let axis = SweepAxis {
            param,
            start,
            stop,
            count,
            scale: AxisScale::Linear,
        };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(SweepError::InvalidAxis(format!("{}: endpoints must be finite", self.param)));
        }
        if !(self.start < self.stop) {
            return Err(SweepError::InvalidAxis(format!(
                "{}: start {} must be < stop {}",
                self.param, self.start, self.stop
            )));
        }
        if self.count < 2 {
            return Err(SweepError::InvalidAxis(format!("{}: count must be >= 2", self.param)));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        linspace(self.start, self.stop, self.count)
    }
}

/// `n` evenly spaced points from `a` to `b` inclusive; the last is exactly `b`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n)
            .map(|k| {
                if k == n - 1 {
                    b
                } else {
                    a + (b - a) * (k as f64 / (n - 1) as f64)
                }
            })
            .collect(),
    }
}

/// Dense grid of `count` points centred on `center`; used to resolve narrow
/// features such as the γ-limited dip near x = 0.
pub fn zoom_grid(center: f64, half_width: f64, count: usize) -> Vec<f64> {
    linspace(center - half_width, center + half_width, count)
}

/// Steady-state summary of one sweep cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSteadyState {
    pub branch_index: usize,
    pub root_count: usize,
    pub intensity: f64,
    pub delta: [f64; 3],
    pub delta_a: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub axis1_value: f64,
    pub axis2_value: Option<f64>,
    pub steady: Result<CellSteadyState, String>,
    /// Branch differs from the previous cell along the innermost axis.
    pub branch_switch: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub axis1: SweepAxis,
    pub axis2: Option<SweepAxis>,
    pub x_grid: Vec<f64>,
    /// Cells in row-major order, axis 1 outermost.
    pub cells: Vec<SweepCell>,
    /// `data[cell·|x_grid| + ix]`.
    pub data: Vec<Result<TransmissionPoint, String>>,
}

impl SweepGrid {
    pub fn n_x(&self) -> usize {
        self.x_grid.len()
    }

    /// Spectrum of one cell.
    pub fn row(&self, cell: usize) -> &[Result<TransmissionPoint, String>] {
        let n = self.n_x();
        &self.data[cell * n..(cell + 1) * n]
    }

    pub fn cell_index(&self, i1: usize, i2: usize) -> usize {
        let n2 = self.axis2.map_or(1, |a| a.count);
        i1 * n2 + i2
    }

    pub fn any_branch_switch(&self) -> bool {
        self.cells.iter().any(|c| c.branch_switch)
    }
}

fn check_grid(x_grid: &[f64]) -> Result<(), SweepError> {
    if x_grid.is_empty() || x_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(SweepError::BadGrid);
    }
    Ok(())
}

type Solved = Result<(SystemParams, SteadyStateSolution), ResponseError>;

fn run(
    p: &SystemParams,
    axis1: SweepAxis,
    axis2: Option<SweepAxis>,
    x_grid: &[f64],
) -> Result<SweepGrid, SweepError> {
    axis1.validate()?;
    if let Some(a) = axis2 {
        a.validate()?;
    }
    check_grid(x_grid)?;

    let v1 = axis1.values();
    let v2: Vec<Option<f64>> = match axis2 {
        Some(a) => a.values().into_iter().map(Some).collect(),
        None => vec![None],
    };
    let coords: Vec<(f64, Option<f64>)> = v1
        .iter()
        .flat_map(|&a| v2.iter().map(move |&b| (a, b)))
        .collect();

    let solve = |&(a, b): &(f64, Option<f64>)| -> Solved {
        let mut q = axis1.param.apply(p, a);
        if let (Some(ax), Some(b)) = (axis2, b) {
            q = ax.param.apply(&q, b);
        }
        response::operating_point(&q)
    };
    let nx = x_grid.len();
    let point = |solved: &[Solved], idx: usize| -> Result<TransmissionPoint, String> {
        let (q, s) = solved[idx / nx].as_ref().map_err(|e| e.to_string())?;
        response::transmission_with(q, s, AngularRate(x_grid[idx % nx])).map_err(|e| e.to_string())
    };

    #[cfg(feature = "parallel")]
    let (solved, data) = {
        use rayon::prelude::*;
        let solved: Vec<Solved> = coords.par_iter().map(solve).collect();
        let data: Vec<_> = (0..coords.len() * nx)
            .into_par_iter()
            .map(|idx| point(&solved, idx))
            .collect();
        (solved, data)
    };
    #[cfg(not(feature = "parallel"))]
    let (solved, data) = {
        let solved: Vec<Solved> = coords.iter().map(solve).collect();
        let data: Vec<_> = (0..coords.len() * nx).map(|idx| point(&solved, idx)).collect();
        (solved, data)
    };

    let inner = v2.len();
    let mut cells: Vec<SweepCell> = Vec::with_capacity(coords.len());
    for (k, (&(a, b), s)) in coords.iter().zip(&solved).enumerate() {
        let steady = s
            .as_ref()
            .map(|(_, s)| CellSteadyState {
                branch_index: s.branch_index,
                root_count: s.root_count,
                intensity: s.intensity,
                delta: s.delta.map(|d| d.get()),
                delta_a: s.delta_a.map(|d| d.get()),
            })
            .map_err(|e| e.to_string());
        // Compare with the previous cell along the innermost axis.
        let prev = if inner > 1 {
            (k % inner > 0).then(|| k - 1)
        } else {
            (k > 0).then(|| k - 1)
        };
        let branch_switch = match (prev.map(|j| &cells[j].steady), &steady) {
            (Some(Ok(a)), Ok(b)) => (a.branch_index, a.root_count) != (b.branch_index, b.root_count),
            _ => false,
        };
        cells.push(SweepCell {
            axis1_value: a,
            axis2_value: b,
            steady,
            branch_switch,
        });
    }

    Ok(SweepGrid {
        axis1,
        axis2,
        x_grid: x_grid.to_vec(),
        cells,
        data,
    })
}

/// Spectra over `x_grid` for every value of `axis`.
pub fn sweep_1d(p: &SystemParams, axis: SweepAxis, x_grid: &[f64]) -> Result<SweepGrid, SweepError> {
    run(p, axis, None, x_grid)
}

/// Spectra over `x_grid` for every pair of values of `axis1` × `axis2`.
pub fn sweep_2d(
    p: &SystemParams,
    axis1: SweepAxis,
    axis2: SweepAxis,
    x_grid: &[f64],
) -> Result<SweepGrid, SweepError> {
    run(p, axis1, Some(axis2), x_grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    T12,
    T21,
}

impl Channel {
    pub fn of(&self, t: &TransmissionPoint) -> f64 {
        match self {
            Channel::T12 => t.t_12,
            Channel::T21 => t.t_21,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub position: AngularRate,
    pub height: f64,
    pub fwhm: AngularRate,
}

/// Local maxima of one channel of a spectrum.
pub fn find_peaks(spectrum: &[TransmissionPoint], channel: Channel, min_height: f64) -> Vec<Peak> {
    let xs: Vec<f64> = spectrum.iter().map(|t| t.x.get()).collect();
    let ys: Vec<f64> = spectrum.iter().map(|t| channel.of(t)).collect();
    find_peaks_xy(&xs, &ys, min_height)
}

/// Local maxima of `ys` above `min_height`, refined by a parabola through
/// the three points around each maximum. Width is measured at half the
/// peak height by linear interpolation of the crossings; if only one side
/// crosses, twice that half-width is used.
pub fn find_peaks_xy(xs: &[f64], ys: &[f64], min_height: f64) -> Vec<Peak> {
    let n = xs.len().min(ys.len());
    let mut peaks = Vec::new();
    if n < 3 {
        return peaks;
    }
    for i in 1..n - 1 {
        let (l, c, r) = (ys[i - 1], ys[i], ys[i + 1]);
        if !(c >= l && c > r && c > min_height) {
            continue;
        }
        let (x0, x1, x2) = (xs[i - 1], xs[i], xs[i + 1]);
        let denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
        let (mut pos, mut height) = (x1, c);
        if denom != 0.0 {
            let a = (x2 * (c - l) + x1 * (l - r) + x0 * (r - c)) / denom;
            let b = (x2 * x2 * (l - c) + x1 * x1 * (r - l) + x0 * x0 * (c - r)) / denom;
            if a < 0.0 {
                let v = -b / (2.0 * a);
                if v > x0 && v < x2 {
                    pos = v;
                    let cc = l - a * x0 * x0 - b * x0;
                    height = (a * v * v + b * v + cc).max(c);
                }
            }
        }
        let half = height / 2.0;
        let cross = |j: usize, k: usize| xs[j] + (half - ys[j]) * (xs[k] - xs[j]) / (ys[k] - ys[j]);
        let left = (1..=i).rev().find(|&j| ys[j - 1] < half).map(|j| cross(j - 1, j));
        let right = (i..n - 1).find(|&j| ys[j + 1] < half).map(|j| cross(j, j + 1));
        let fwhm = match (left, right) {
            (Some(a), Some(b)) => b - a,
            (Some(a), None) => 2.0 * (pos - a),
            (None, Some(b)) => 2.0 * (b - pos),
            (None, None) => xs[n - 1] - xs[0],
        };
        peaks.push(Peak {
            position: AngularRate(pos),
            height,
            fwhm: AngularRate(fwhm.max(f64::MIN_POSITIVE)),
        });
    }
    peaks
}

/// Highest peak, if any.
pub fn dominant_peak(peaks: &[Peak]) -> Option<Peak> {
    peaks.iter().copied().max_by(|a, b| a.height.total_cmp(&b.height))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{normalize_units, UnitMode};
    use crate::presets;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn fig2() -> SystemParams {
        normalize_units(&presets::preset("fig2a").unwrap().params(), UnitMode::OmegaM1Units)
    }

    fn grid(n: usize) -> Vec<f64> {
        linspace(-0.2, 0.2, n)
    }

    fn ok(r: &Result<TransmissionPoint, String>) -> TransmissionPoint {
        *r.as_ref().unwrap()
    }

    #[test]
    fn param_names_round_trip() {
        for name in [
            "kappa_1", "kappa_3", "gamma_2", "omega_m1", "delta_a2", "delta_3", "o_m1", "o_m2",
            "o_m31", "o_m32", "o_m3", "omega_d1", "phi_d2", "omega_p2", "phi_p1", "phi_rel",
            "phi_rel_p1", "phi_rel_p2",
        ] {
            let p: SweepParam = name.parse().unwrap();
            assert_eq!(p.to_string(), name);
        }
        assert_eq!("O_m3".parse::<SweepParam>().unwrap(), SweepParam::OM3);
        assert!("kappa_4".parse::<SweepParam>().is_err());
        assert!("kappa".parse::<SweepParam>().is_err());
    }

    #[test]
    fn axis_preconditions() {
        assert!(SweepAxis::new(SweepParam::PhiRel, 1.0, 1.0, 2).is_err());
        assert!(SweepAxis::new(SweepParam::PhiRel, 0.0, 1.0, 1).is_err());
        assert!(SweepAxis::new(SweepParam::PhiRel, 0.0, f64::NAN, 3).is_err());
        let a = SweepAxis::new(SweepParam::PhiRel, -PI, PI, 201).unwrap();
        let v = a.values();
        assert_eq!(v.len(), 201);
        assert_eq!((v[0], v[200]), (-PI, PI));
    }

    #[test]
    fn symmetric_crossing_in_kappa() {
        let p = fig2();
        let k = p.kappa(1);
        let axis = SweepAxis::new(SweepParam::Kappa(0), 0.5 * k, 1.5 * k, 3).unwrap();
        let g = sweep_1d(&p, axis, &grid(101)).unwrap();
        for r in g.row(1) {
            let t = ok(r);
            assert!((t.t_12 - t.t_21).abs() <= 1e-12 * (1.0 + t.t_12));
        }
        assert!(g.row(0).iter().any(|r| {
            let t = ok(r);
            (t.t_12 - t.t_21).abs() > 1e-3
        }));
    }

    #[test]
    fn failures_stay_in_their_cell() {
        let p = fig2();
        // Ω_p2 = 0 leaves T undefined for that cell only.
        let axis = SweepAxis::new(SweepParam::OmegaP(1), 0.0, 0.2, 2).unwrap();
        let g = sweep_1d(&p, axis, &grid(5)).unwrap();
        assert!(g.row(0).iter().all(|r| r.is_err()));
        assert!(g.row(1).iter().all(|r| r.is_ok()));
    }

    #[test]
    fn two_axis_layout() {
        let p = fig2();
        let a1 = SweepAxis::new(SweepParam::PhiP(0), 0.0, 1.0, 3).unwrap();
        let a2 = SweepAxis::new(SweepParam::PhiP(1), 0.0, 1.0, 2).unwrap();
        let xs = grid(7);
        let g = sweep_2d(&p, a1, a2, &xs).unwrap();
        assert_eq!(g.data.len(), 3 * 2 * 7);
        let c = &g.cells[g.cell_index(2, 1)];
        assert_eq!((c.axis1_value, c.axis2_value), (1.0, Some(1.0)));
        let mut q = p.clone();
        q.probe.phi_p1 = 1.0;
        q.probe.phi_p2 = 1.0;
        let direct = response::transmission_point(&q, AngularRate(xs[4])).unwrap();
        assert_eq!(ok(&g.row(g.cell_index(2, 1))[4]), direct);
    }

    #[test]
    fn phi_rel_attribution_symmetric_case() {
        // Equal probes and zero base phases: adding φ to either probe phase
        // gives the same T.
        let p = fig2();
        let xs = grid(41);
        let a = SweepAxis::new(SweepParam::PhiRelP1, -PI, PI, 9).unwrap();
        let b = SweepAxis::new(SweepParam::PhiRelP2, -PI, PI, 9).unwrap();
        let ga = sweep_1d(&p, a, &xs).unwrap();
        let gb = sweep_1d(&p, b, &xs).unwrap();
        for (ra, rb) in ga.data.iter().zip(&gb.data) {
            let (ta, tb) = (ok(ra), ok(rb));
            assert_relative_eq!(ta.t_12, tb.t_12, max_relative = 1e-12);
            assert_relative_eq!(ta.t_21, tb.t_21, max_relative = 1e-12);
        }
    }

    #[test]
    fn continuity_in_o_m3() {
        let p = fig2();
        let xs = grid(201);
        let k = p.kappa(2);
        let dev = |eps: f64| {
            let axis = SweepAxis::new(SweepParam::OM3, 0.0, eps * k, 2).unwrap();
            let g = sweep_1d(&p, axis, &xs).unwrap();
            g.row(0)
                .iter()
                .zip(g.row(1))
                .map(|(a, b)| {
                    let (a, b) = (ok(a), ok(b));
                    (a.t_12 - b.t_12).abs().max((a.t_21 - b.t_21).abs())
                })
                .fold(0.0, f64::max)
        };
        let devs: Vec<f64> = [1e-3, 1e-4, 1e-5, 1e-6].iter().map(|&e| dev(e)).collect();
        for w in devs.windows(2) {
            assert!(w[1] < 0.2 * w[0], "{devs:?}");
        }
        assert!(devs[3] < 1e-2, "{devs:?}");
    }

    #[test]
    fn branch_switch_is_flagged() {
        // Drive sweep into the bistable window of a narrow middle cavity.
        let mut p = fig2();
        p.effective_targets = None;
        for m in &mut p.optical {
            m.kappa = AngularRate(0.01);
            m.delta_a = AngularRate(1.0);
        }
        for m in &mut p.mech {
            m.gamma = AngularRate(1e-3);
        }
        p.coupling.o_m31 = AngularRate(0.01);
        p.coupling.o_m32 = AngularRate(0.01);
        p.drive.omega_d2 = AngularRate::ZERO;
        let axis = SweepAxis::new(SweepParam::OmegaD(0), 0.1, 3.0, 30).unwrap();
        let g = sweep_1d(&p, axis, &grid(3)).unwrap();
        assert!(g.any_branch_switch());
        assert!(!g.cells[0].branch_switch);
    }

    #[test]
    fn lorentzian_peak() {
        let (x0, k) = (0.0123, 0.02);
        let xs = linspace(-0.2, 0.2, 2001);
        let ys: Vec<f64> = xs.iter().map(|x| k / ((x - x0).powi(2) + k * k)).collect();
        let peaks = find_peaks_xy(&xs, &ys, 0.0);
        assert_eq!(peaks.len(), 1);
        let step = xs[1] - xs[0];
        assert!((peaks[0].position.get() - x0).abs() <= 0.1 * step);
        assert_relative_eq!(peaks[0].fwhm.get(), 2.0 * k, max_relative = 0.02);
    }

    #[test]
    fn monotone_has_no_peaks() {
        let xs = linspace(0.0, 1.0, 50);
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert!(find_peaks_xy(&xs, &ys, 0.0).is_empty());
    }

    #[test]
    fn min_height_filters() {
        let xs = linspace(0.0, 1.0, 5);
        let ys = [0.0, 1.0, 0.0, 3.0, 0.0];
        let p = find_peaks_xy(&xs, &ys, 2.0);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].position.get(), 0.75);
    }
}
