//! Self-consistent steady state of the driven cavity.
//!
//! Eliminating the mirror displacements leaves a cubic in the middle-mode
//! intensity `I = |a₃ₛ|²`:
//!
//! ```text
//! I·(κ₃² + (Δ_a3 − β·I)²) = |D_d|²
//! β = 2·[O_m31²·ω_m1/(γ₁² + ω_m1²) + O_m32²·ω_m2/(γ₂² + ω_m2²)]
//! ```
//!
//! Every other amplitude follows from the chosen root.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics;
use crate::model::{AngularRate, Drives, SystemParams};

/// How to pick one operating point when the cubic has several roots.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchPolicy {
    AllRoots,
    #[default]
    SmallestIntensity,
    FixedPointAttractor,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SteadyStateError {
    #[error("cubic root polishing did not converge (defect {defect:e} > {tolerance:e})")]
    RootNotConverged { defect: f64, tolerance: f64 },
    #[error("fixed-point iteration did not converge within {iterations} iterations")]
    FixedPointNotConverged { iterations: usize },
    #[error("intensity cubic produced no admissible root")]
    NoRoot,
}

/// One real root of the intensity cubic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityRoot {
    pub intensity: f64,
    /// `|I·(κ₃² + (Δ_a3 − βI)²) − |D_d|²|` at the polished root.
    pub defect: f64,
    /// Middle root of a bistable triple.
    pub middle_branch: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateSolution {
    /// `a₁ₛ, a₂ₛ, a₃ₛ`.
    pub a: [Complex64; 3],
    /// `b₁ₛ, b₂ₛ`.
    pub b: [Complex64; 2],
    /// Effective detunings Δ₁, Δ₂, Δ₃.
    pub delta: [AngularRate; 3],
    /// Bare detunings the solution was computed from.
    pub delta_a: [AngularRate; 3],
    pub intensity: f64,
    /// Position of the selected root in the ascending root list.
    pub branch_index: usize,
    pub root_count: usize,
    pub middle_branch: bool,
    pub residual: f64,
}

/// Relative tolerance on the cubic defect, in units of `|D_d|²`.
pub const CUBIC_DEFECT_TOL: f64 = 1e-9;
/// Relative tolerance on the full solution residual, in units of `|D_d|`.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Roots closer than this (relative) are reported once.
const ROOT_MERGE_TOL: f64 = 1e-9;
const FIXED_POINT_MAX_ITER: usize = 10_000;
const FIXED_POINT_DAMPING: f64 = 0.5;

/// `D_d = Ω_d1·e^{iΦ_d1} + Ω_d2·e^{iΦ_d2}`.
pub fn drive_superposition(d: &Drives) -> Complex64 {
    Complex64::from_polar(d.omega_d1.get(), d.phi_d1) + Complex64::from_polar(d.omega_d2.get(), d.phi_d2)
}

/// Back-action coefficient β of the intensity cubic.
pub fn backaction_coefficient(p: &SystemParams) -> f64 {
    let [o31, o32] = p.middle_couplings();
    let term = |o: f64, j: usize| {
        let (w, g) = (p.omega_m(j), p.gamma(j));
        o * o * w / (g * g + w * w)
    };
    2.0 * (term(o31, 0) + term(o32, 1))
}

/// Mirror amplitude `b_j = i·O_m3j·I/(γ_j + iω_mj)` for middle-mode intensity `I`.
fn mirror_amplitudes(p: &SystemParams, intensity: f64) -> [Complex64; 2] {
    let o = p.middle_couplings();
    [0, 1].map(|j| {
        Complex64::i() * o[j] * intensity / Complex64::new(p.gamma(j), p.omega_m(j))
    })
}

fn cubic_defect(kappa: f64, delta: f64, beta: f64, d2: f64, i: f64) -> f64 {
    let shift = delta - beta * i;
    i * (kappa * kappa + shift * shift) - d2
}

/// Real roots of `σ³ − 2δσ² + σ − π = 0`, unpolished.
fn normalized_cubic_roots(delta: f64, pi_: f64) -> Vec<f64> {
    let shift = 2.0 * delta / 3.0;
    let p = 1.0 - 4.0 * delta * delta / 3.0;
    let q = -16.0 * delta.powi(3) / 27.0 + 2.0 * delta / 3.0 - pi_;
    let disc = q * q / 4.0 + p * p * p / 27.0;
    if disc < 0.0 {
        // three real roots; p < 0 here
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3)
            .map(|k| r * (phi - 2.0 * PI * k as f64 / 3.0).cos() + shift)
            .collect()
    } else {
        let a = -q.signum() * (q.abs() / 2.0 + disc.sqrt()).cbrt();
        let b = if a != 0.0 { -p / (3.0 * a) } else { 0.0 };
        vec![a + b + shift]
    }
}

/// All non-negative real roots of the intensity cubic for the bare
/// detunings currently stored in `p`, ascending.
pub fn solve_intensity_cubic(p: &SystemParams) -> Result<Vec<IntensityRoot>, SteadyStateError> {
    let d2 = drive_superposition(&p.drive).norm_sqr();
    let kappa = p.kappa(2);
    let delta = p.delta_a(2);
    let beta = backaction_coefficient(p);
    let l2 = kappa * kappa + delta * delta;

    if d2 == 0.0 {
        return Ok(vec![IntensityRoot {
            intensity: 0.0,
            defect: 0.0,
            middle_branch: false,
        }]);
    }
    if beta == 0.0 {
        let i = d2 / l2;
        return Ok(vec![IntensityRoot {
            intensity: i,
            defect: cubic_defect(kappa, delta, beta, d2, i).abs(),
            middle_branch: false,
        }]);
    }

    // Solve in s = β·I, normalized by L = √(κ² + Δ²).
    let l = l2.sqrt();
    let guesses = normalized_cubic_roots(delta / l, beta * d2 / (l2 * l));

    let tol = CUBIC_DEFECT_TOL * d2;
    let mut roots: Vec<f64> = Vec::with_capacity(3);
    for sigma in guesses {
        let i = polish(kappa, delta, beta, d2, sigma * l / beta);
        if !(i.is_finite() && i >= 0.0) {
            continue;
        }
        let defect = cubic_defect(kappa, delta, beta, d2, i).abs();
        if defect > tol {
            return Err(SteadyStateError::RootNotConverged {
                defect,
                tolerance: tol,
            });
        }
        roots.push(i);
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|b, a| (*b - *a).abs() <= ROOT_MERGE_TOL * a.abs().max(b.abs()));
    if roots.is_empty() {
        return Err(SteadyStateError::NoRoot);
    }
    let three = roots.len() == 3;
    Ok(roots
        .iter()
        .enumerate()
        .map(|(k, &i)| IntensityRoot {
            intensity: i,
            defect: cubic_defect(kappa, delta, beta, d2, i).abs(),
            middle_branch: three && k == 1,
        })
        .collect())
}

/// Newton iterations on the defect in I; keeps the best iterate.
fn polish(kappa: f64, delta: f64, beta: f64, d2: f64, mut i: f64) -> f64 {
    let mut best = (cubic_defect(kappa, delta, beta, d2, i).abs(), i);
    for _ in 0..50 {
        let shift = delta - beta * i;
        let f = i * (kappa * kappa + shift * shift) - d2;
        let df = kappa * kappa + shift * shift - 2.0 * beta * i * shift;
        if df == 0.0 {
            break;
        }
        let step = f / df;
        i -= step;
        let defect = cubic_defect(kappa, delta, beta, d2, i).abs();
        if defect < best.0 {
            best = (defect, i);
        }
        if step.abs() <= 4.0 * f64::EPSILON * i.abs() {
            break;
        }
    }
    best.1
}

/// Bare detunings that make the effective detunings equal `targets`.
///
/// With Δ₃ fixed, the intensity is explicit: `I = |D_d|²/(κ₃² + Δ₃²)`.
pub fn bare_from_effective(p: &SystemParams, targets: [AngularRate; 3]) -> [AngularRate; 3] {
    let d2 = drive_superposition(&p.drive).norm_sqr();
    let k3 = p.kappa(2);
    let d3 = targets[2].get();
    let intensity = d2 / (k3 * k3 + d3 * d3);
    let b = mirror_amplitudes(p, intensity);
    let [o1, o2] = p.port_couplings();
    [
        AngularRate(targets[0].get() + o1 * 2.0 * b[0].re),
        AngularRate(targets[1].get() + o2 * 2.0 * b[1].re),
        AngularRate(d3 + backaction_coefficient(p) * intensity),
    ]
}

/// Copy of `p` whose bare detunings realize its effective targets, if any.
pub fn pin_effective_targets(p: &SystemParams) -> SystemParams {
    let mut out = p.clone();
    if let Some(targets) = p.effective_targets {
        let bare = bare_from_effective(p, targets);
        for (mode, d) in out.optical.iter_mut().zip(bare) {
            mode.delta_a = d;
        }
    }
    out
}

fn solution_from_intensity(p: &SystemParams, intensity: f64) -> SteadyStateSolution {
    let dd = drive_superposition(&p.drive);
    let b = mirror_amplitudes(p, intensity);
    let [o1, o2] = p.port_couplings();
    let delta = [
        p.delta_a(0) - o1 * 2.0 * b[0].re,
        p.delta_a(1) - o2 * 2.0 * b[1].re,
        p.delta_a(2) - backaction_coefficient(p) * intensity,
    ];
    let a = [0, 1, 2].map(|i| dd / Complex64::new(p.kappa(i), delta[i]));
    let mut s = SteadyStateSolution {
        a,
        b,
        delta: delta.map(AngularRate),
        delta_a: [0, 1, 2].map(|i| p.optical[i].delta_a),
        intensity,
        branch_index: 0,
        root_count: 1,
        middle_branch: false,
        residual: 0.0,
    };
    s.residual = steady_state_residual(p, &s);
    s
}

/// Steady states of `p` under `policy`. Returns every root for
/// [`BranchPolicy::AllRoots`] and a single solution otherwise.
///
/// When `p` carries effective targets the bare detunings are recomputed
/// first and the root closest to the target intensity is selected.
pub fn steady_state(
    p: &SystemParams,
    policy: BranchPolicy,
) -> Result<Vec<SteadyStateSolution>, SteadyStateError> {
    let p = pin_effective_targets(p);
    let roots = solve_intensity_cubic(&p)?;
    let count = roots.len();
    let build = |k: usize| {
        let mut s = solution_from_intensity(&p, roots[k].intensity);
        s.branch_index = k;
        s.root_count = count;
        s.middle_branch = roots[k].middle_branch;
        s
    };
    if policy == BranchPolicy::AllRoots {
        return Ok((0..count).map(build).collect());
    }
    let nearest = |target: f64| {
        (0..count)
            .min_by(|&a, &b| {
                let da = (roots[a].intensity - target).abs();
                let db = (roots[b].intensity - target).abs();
                da.total_cmp(&db)
            })
            .unwrap_or(0)
    };
    let k = if let Some(t) = p.effective_targets {
        let d2 = drive_superposition(&p.drive).norm_sqr();
        let (k3, d3) = (p.kappa(2), t[2].get());
        nearest(d2 / (k3 * k3 + d3 * d3))
    } else {
        match policy {
            BranchPolicy::FixedPointAttractor => nearest(fixed_point_intensity(&p)?),
            _ => 0,
        }
    };
    Ok(vec![build(k)])
}

/// Convenience wrapper returning the single solution selected by `p.branch`
/// (the lowest root when `p.branch` is `AllRoots`).
pub fn operating_point(p: &SystemParams) -> Result<SteadyStateSolution, SteadyStateError> {
    let policy = match p.branch {
        BranchPolicy::AllRoots => BranchPolicy::SmallestIntensity,
        other => other,
    };
    steady_state(p, policy)?
        .into_iter()
        .next()
        .ok_or(SteadyStateError::NoRoot)
}

/// Damped iteration `I ← (1−λ)I + λ|D_d|²/(κ₃² + (Δ_a3 − βI)²)` from `I = 0`.
fn fixed_point_intensity(p: &SystemParams) -> Result<f64, SteadyStateError> {
    let d2 = drive_superposition(&p.drive).norm_sqr();
    let (k3, da3) = (p.kappa(2), p.delta_a(2));
    let beta = backaction_coefficient(p);
    let mut i = 0.0_f64;
    for _ in 0..FIXED_POINT_MAX_ITER {
        let shift = da3 - beta * i;
        let next = (1.0 - FIXED_POINT_DAMPING) * i + FIXED_POINT_DAMPING * d2 / (k3 * k3 + shift * shift);
        if (next - i).abs() <= 1e-14 * next.abs().max(f64::MIN_POSITIVE) {
            return Ok(next);
        }
        i = next;
    }
    Err(SteadyStateError::FixedPointNotConverged {
        iterations: FIXED_POINT_MAX_ITER,
    })
}

/// Largest defect of the five mean-value equations (probe off) with the
/// amplitudes of `s` substituted.
pub fn steady_state_residual(p: &SystemParams, s: &SteadyStateSolution) -> f64 {
    let p = pin_effective_targets(p);
    let y = [s.a[0], s.a[1], s.a[2], s.b[0], s.b[1]];
    let rhs = dynamics::mean_field_rhs(&p, &y, Complex64::new(0.0, 0.0));
    rhs.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
