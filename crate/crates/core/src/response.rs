//! Linear response to the weak probes.
//!
//! The e^{−ixt} sideband coefficients solve a 5×5 system; for the two port
//! modes there is also a closed form. Both are implemented so that each
//! can check the other. Outputs follow from the input–output relation
//! `ε_out,i = 2κᵢ·δã_i₊ − Ω_pi`.

use nalgebra::{Matrix5, Vector5};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AngularRate, Convention, Probes, SystemParams};
use crate::steady_state::{self, SteadyStateError, SteadyStateSolution};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResponseError {
    #[error("denominator {magnitude:e} is below 1e-12 of its scale {scale:e} at x = {x} (pole from vanishing damping)")]
    NearPole { x: f64, magnitude: f64, scale: f64 },
    #[error("fluctuation system is singular at x = {x}")]
    Singular { x: f64 },
    #[error("fluctuation system defect {defect:e} exceeds 1e-10 at x = {x}")]
    Inaccurate { x: f64, defect: f64 },
    #[error("probe strength omega_p{port} must be > 0 to define a transmission")]
    ZeroProbe { port: u8 },
    #[error("frequency grid must be non-empty and strictly increasing")]
    BadGrid,
    #[error("at x = {x}: {source}")]
    AtPoint { x: f64, source: Box<ResponseError> },
    #[error(transparent)]
    SteadyState(#[from] SteadyStateError),
}

/// The symbols U₁, U₂, U₃, V₁, V₂, ζ, ζ′ and D at one offset x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseCoefficients {
    pub u: [Complex64; 3],
    pub v: [Complex64; 2],
    pub zeta: Complex64,
    pub zeta_prime: Complex64,
    pub d_probe: Complex64,
}

/// Sideband coefficients `δã₁₊, δã₂₊, δã₃₊, δb̃₁₊, δb̃₂₊` at offset `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluctuationAmplitudes {
    pub da: [Complex64; 3],
    pub db: [Complex64; 2],
    pub x: AngularRate,
}

impl FluctuationAmplitudes {
    pub fn as_array(&self) -> [Complex64; 5] {
        [self.da[0], self.da[1], self.da[2], self.db[0], self.db[1]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionPoint {
    pub x: AngularRate,
    /// Probe–drive detuning `Δ_p = x + ω_m1`.
    pub delta_p: AngularRate,
    pub eps_out: [Complex64; 2],
    /// T₁→₂ = |ε_out,2/Ω_p1|².
    pub t_12: f64,
    /// T₂→₁ = |ε_out,1/Ω_p2|².
    pub t_21: f64,
}

/// `D = Ω_p1·e^{iΦ_p1} + Ω_p2·e^{iΦ_p2}`.
pub fn probe_superposition(pr: &Probes) -> Complex64 {
    Complex64::from_polar(pr.omega_p1.get(), pr.phi_p1)
        + Complex64::from_polar(pr.omega_p2.get(), pr.phi_p2)
}

/// Detuning that enters Uᵢ under the active convention.
fn optical_offset(p: &SystemParams, s: &SteadyStateSolution, i: usize) -> f64 {
    match p.convention {
        Convention::Literal => s.delta_a[i].get(),
        Convention::Rotated => s.delta[i].get() - p.omega_m(0),
    }
}

fn mech_offset(p: &SystemParams, j: usize) -> f64 {
    match p.convention {
        Convention::Literal => p.omega_m(j),
        Convention::Rotated => p.omega_m(j) - p.omega_m(0),
    }
}

pub fn response_coefficients(
    p: &SystemParams,
    s: &SteadyStateSolution,
    x: AngularRate,
) -> ResponseCoefficients {
    let x = x.get();
    let u = [0, 1, 2].map(|i| Complex64::new(-p.kappa(i), x - optical_offset(p, s, i)));
    let v = [0, 1].map(|j| Complex64::new(-p.gamma(j), x - mech_offset(p, j)));
    let [o1, o2] = p.port_couplings();
    let [o31, o32] = p.middle_couplings();
    let a3c = s.a[2].conj();
    ResponseCoefficients {
        u,
        v,
        zeta: u[2] * v[0] - o1 * o31 * s.a[0] * a3c,
        zeta_prime: u[2] * v[1] - o2 * o32 * s.a[1] * a3c,
        d_probe: probe_superposition(&p.probe),
    }
}

fn check_pole(x: f64, value: Complex64, scale: f64) -> Result<(), ResponseError> {
    if !(value.norm() > 1e-12 * scale) {
        return Err(ResponseError::NearPole {
            x,
            magnitude: value.norm(),
            scale,
        });
    }
    Ok(())
}

/// Closed-form `(δã₁₊, δã₂₊)`.
///
/// ```text
/// S    = U₃V₁V₂ + |a₃ₛ|²(O_m31²V₂ + O_m32²V₁)
/// δã₁₊ = −D·[V₂ζ  + |a₃ₛ|²(O_m31²V₂ + O_m32²V₁)] / (U₁·S)
/// δã₂₊ = −D·[V₁ζ′ + |a₃ₛ|²(O_m31²V₂ + O_m32²V₁)] / (U₂·S)
/// ```
pub fn closed_form_delta_a(
    p: &SystemParams,
    s: &SteadyStateSolution,
    x: AngularRate,
) -> Result<(Complex64, Complex64), ResponseError> {
    let c = response_coefficients(p, s, x);
    closed_form_from(p, s, &c, x.get())
}

fn closed_form_from(
    p: &SystemParams,
    s: &SteadyStateSolution,
    c: &ResponseCoefficients,
    x: f64,
) -> Result<(Complex64, Complex64), ResponseError> {
    let [o31, o32] = p.middle_couplings();
    let i3 = s.a[2].norm_sqr();
    let [u1, u2, u3] = c.u;
    let [v1, v2] = c.v;
    let cross = i3 * (o31 * o31 * v2 + o32 * o32 * v1);
    let big_s = u3 * v1 * v2 + cross;
    let u_scale = |i: usize| x.abs() + optical_offset(p, s, i).abs() + p.kappa(i);
    let v_scale = |j: usize| x.abs() + mech_offset(p, j).abs() + p.gamma(j);
    let (v1s, v2s) = (v_scale(0), v_scale(1));
    let s_scale = u_scale(2) * v1s * v2s + i3 * (o31 * o31 * v2s + o32 * o32 * v1s);
    let den1 = u1 * big_s;
    let den2 = u2 * big_s;
    check_pole(x, den1, u_scale(0) * s_scale)?;
    check_pole(x, den2, u_scale(1) * s_scale)?;
    let d = c.d_probe;
    Ok((
        -d * (v2 * c.zeta + cross) / den1,
        -d * (v1 * c.zeta_prime + cross) / den2,
    ))
}

/// Builds the 5×5 sideband system `M·y = r` in the order
/// `(δã₁₊, δã₂₊, δã₃₊, δb̃₁₊, δb̃₂₊)`.
pub fn fluctuation_matrix(
    p: &SystemParams,
    s: &SteadyStateSolution,
    x: AngularRate,
) -> (Matrix5<Complex64>, Vector5<Complex64>) {
    let x = x.get();
    let i = Complex64::i();
    let zero = Complex64::new(0.0, 0.0);
    // Diagonals written out directly rather than reusing U, V so the two
    // solution paths share as little as possible.
    let opt = |k: usize| Complex64::new(p.kappa(k), optical_offset(p, s, k) - x);
    let mech = |j: usize| Complex64::new(p.gamma(j), mech_offset(p, j) - x);
    let [o1, o2] = p.port_couplings();
    let [o31, o32] = p.middle_couplings();
    let (a1, a2, a3) = (s.a[0], s.a[1], s.a[2]);
    let a3c = a3.conj();
    #[rustfmt::skip]
    let m = Matrix5::new(
        opt(0), zero,   zero,            -i * o1 * a1,  zero,
        zero,   opt(1), zero,            zero,          -i * o2 * a2,
        zero,   zero,   opt(2),          -i * o31 * a3, -i * o32 * a3,
        zero,   zero,   -i * o31 * a3c,  mech(0),       zero,
        zero,   zero,   -i * o32 * a3c,  zero,          mech(1),
    );
    let d = probe_superposition(&p.probe);
    (m, Vector5::new(d, d, d, zero, zero))
}

/// Direct LU solve of the sideband system with a backward-error check.
pub fn solve_fluctuation_system(
    p: &SystemParams,
    s: &SteadyStateSolution,
    x: AngularRate,
) -> Result<FluctuationAmplitudes, ResponseError> {
    let (m, r) = fluctuation_matrix(p, s, x);
    let y = m
        .lu()
        .solve(&r)
        .ok_or(ResponseError::Singular { x: x.get() })?;
    if y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(ResponseError::Singular { x: x.get() });
    }
    let defect = (m * y - r).norm() / (m.norm() * y.norm() + r.norm()).max(f64::MIN_POSITIVE);
    if defect > 1e-10 {
        return Err(ResponseError::Inaccurate { x: x.get(), defect });
    }
    Ok(FluctuationAmplitudes {
        da: [y[0], y[1], y[2]],
        db: [y[3], y[4]],
        x,
    })
}

/// `ε_out,1 = 2κ₁δã₁₊ − Ω_p1`, `ε_out,2 = 2κ₂δã₂₊ − Ω_p2`.
pub fn output_fields(p: &SystemParams, da1p: Complex64, da2p: Complex64) -> (Complex64, Complex64) {
    (
        2.0 * p.kappa(0) * da1p - p.probe.omega_p1.get(),
        2.0 * p.kappa(1) * da2p - p.probe.omega_p2.get(),
    )
}

fn check_probes(p: &SystemParams) -> Result<(), ResponseError> {
    if !(p.probe.omega_p1.get() > 0.0) {
        return Err(ResponseError::ZeroProbe { port: 1 });
    }
    if !(p.probe.omega_p2.get() > 0.0) {
        return Err(ResponseError::ZeroProbe { port: 2 });
    }
    Ok(())
}

/// Transmission at `x` for a steady state that has already been solved.
pub fn transmission_with(
    p: &SystemParams,
    s: &SteadyStateSolution,
    x: AngularRate,
) -> Result<TransmissionPoint, ResponseError> {
    check_probes(p)?;
    let c = response_coefficients(p, s, x);
    let (da1, da2) = closed_form_from(p, s, &c, x.get())?;
    let (e1, e2) = output_fields(p, da1, da2);
    Ok(TransmissionPoint {
        x,
        delta_p: AngularRate(x.get() + p.omega_m(0)),
        eps_out: [e1, e2],
        t_12: (e2 / p.probe.omega_p1.get()).norm_sqr(),
        t_21: (e1 / p.probe.omega_p2.get()).norm_sqr(),
    })
}

/// Full pipeline at one offset: steady state, response, outputs.
pub fn transmission_point(p: &SystemParams, x: AngularRate) -> Result<TransmissionPoint, ResponseError> {
    check_probes(p)?;
    let (p, s) = operating_point(p)?;
    transmission_with(&p, &s, x)
}

/// Steady state of `p` together with the pinned parameters it belongs to.
pub fn operating_point(p: &SystemParams) -> Result<(SystemParams, SteadyStateSolution), ResponseError> {
    let pinned = steady_state::pin_effective_targets(p);
    let s = steady_state::operating_point(&pinned)?;
    Ok((pinned, s))
}

/// Transmission over a strictly increasing grid of offsets. The steady
/// state does not depend on x and is solved once.
pub fn spectrum(p: &SystemParams, grid: &[f64]) -> Result<Vec<TransmissionPoint>, ResponseError> {
    if grid.is_empty() || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(ResponseError::BadGrid);
    }
    check_probes(p)?;
    let (p, s) = operating_point(p)?;
    spectrum_with(&p, &s, grid)
}

pub(crate) fn spectrum_with(
    p: &SystemParams,
    s: &SteadyStateSolution,
    grid: &[f64],
) -> Result<Vec<TransmissionPoint>, ResponseError> {
    let eval = |&x: &f64| {
        transmission_with(p, s, AngularRate(x)).map_err(|e| ResponseError::AtPoint {
            x,
            source: Box::new(e),
        })
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        grid.par_iter().map(eval).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        grid.iter().map(eval).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{normalize_units, Couplings, UnitMode};
    use crate::presets;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn fig2() -> SystemParams {
        normalize_units(&presets::preset("fig2a").unwrap().params(), UnitMode::OmegaM1Units)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn probe_superposition_cases() {
        let p = fig2();
        assert_relative_eq!(probe_superposition(&p.probe).re, 0.4, max_relative = 1e-15);
        let mut pr = p.probe;
        pr.phi_p2 = PI;
        assert!(probe_superposition(&pr).norm() < 1e-15);
        pr.phi_p1 = -2.0 * PI / 3.0;
        pr.phi_p2 = 2.0 * PI / 3.0;
        let d = probe_superposition(&pr);
        assert_relative_eq!(d.re, -0.2, max_relative = 1e-14);
        assert!(d.im.abs() < 1e-15);
    }

    #[test]
    fn fig2_coefficients_golden() {
        // Reference: tests/oracles/golden.py (40-digit arithmetic).
        let p = fig2();
        let (p, s) = operating_point(&p).unwrap();
        let r = response_coefficients(&p, &s, AngularRate(0.05));
        assert!(rel(r.u[0], c(-0.005_793_650_793_650_793_7, 0.05)) < 1e-10);
        assert!(rel(r.v[0], c(-6.984_126_984_126_984e-6, 0.05)) < 1e-12);
        let zeta = c(-0.002_500_186_286_165_599_3, -0.000_290_031_746_031_746_03);
        assert!(rel(r.zeta, zeta) < 1e-9);
        assert!(rel(r.zeta_prime, zeta) < 1e-9);
        let (d1, d2) = closed_form_delta_a(&p, &s, AngularRate(0.05)).unwrap();
        let expected = c(0.914_866_688_312_276_1, 7.894_707_738_553_969);
        assert!(rel(d1, expected) < 1e-8);
        assert!(rel(d2, expected) < 1e-8);
        let t = transmission_with(&p, &s, AngularRate(0.05)).unwrap();
        assert_relative_eq!(t.t_12, 1.106_008_337_389_760_2, max_relative = 1e-8);
        assert_relative_eq!(t.t_21, t.t_12, max_relative = 1e-14);
    }

    #[test]
    fn on_resonance_coefficients_are_real() {
        let p = fig2();
        let (p, s) = operating_point(&p).unwrap();
        let r = response_coefficients(&p, &s, AngularRate(0.0));
        for i in 0..3 {
            assert_relative_eq!(r.u[i].re, -p.kappa(i));
            assert!(r.u[i].im.abs() < 1e-9);
        }
        for j in 0..2 {
            assert_eq!(r.v[j], c(-p.gamma(j), 0.0));
        }
    }

    #[test]
    fn uncoupled_collapse() {
        let mut p = fig2();
        p.coupling = Couplings {
            o_m1: AngularRate::ZERO,
            o_m2: AngularRate::ZERO,
            o_m31: AngularRate::ZERO,
            o_m32: AngularRate::ZERO,
        };
        let (p, s) = operating_point(&p).unwrap();
        let x = AngularRate(0.03);
        let r = response_coefficients(&p, &s, x);
        assert_eq!(r.zeta, r.u[2] * r.v[0]);
        assert_eq!(r.zeta_prime, r.u[2] * r.v[1]);
        let (d1, d2) = closed_form_delta_a(&p, &s, x).unwrap();
        assert!(rel(d1, -r.d_probe / r.u[0]) < 1e-14);
        assert!(rel(d2, -r.d_probe / r.u[1]) < 1e-14);
        let f = solve_fluctuation_system(&p, &s, x).unwrap();
        assert_eq!(f.db, [c(0.0, 0.0); 2]);
        for i in 0..3 {
            let expect = r.d_probe / c(p.kappa(i), optical_offset(&p, &s, i) - x.get());
            assert!(rel(f.da[i], expect) < 1e-14);
        }
    }

    #[test]
    fn antiphase_probes_give_unit_transmission() {
        let mut p = fig2();
        p.probe.phi_p2 = PI;
        let (p, s) = operating_point(&p).unwrap();
        let (d1, d2) = closed_form_delta_a(&p, &s, AngularRate(0.02)).unwrap();
        assert!(d1.norm() < 1e-14 && d2.norm() < 1e-14);
        let t = transmission_with(&p, &s, AngularRate(0.02)).unwrap();
        assert!((t.t_12 - 1.0).abs() < 1e-14 && (t.t_21 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn output_field_arithmetic() {
        let p = fig2();
        let (e1, _) = output_fields(&p, c(0.0, 0.0), c(0.0, 0.0));
        assert_eq!(e1, c(-p.probe.omega_p1.get(), 0.0));
        let (e1, _) = output_fields(&p, c(0.2 / p.kappa(0), 0.0), c(0.0, 0.0));
        assert_relative_eq!(e1.re, 0.2, max_relative = 1e-15);
    }

    #[test]
    fn back_substitution_of_mirror_rows() {
        let (p, s) = operating_point(&fig2()).unwrap();
        let x = AngularRate(0.1);
        let f = solve_fluctuation_system(&p, &s, x).unwrap();
        let i = Complex64::i();
        let db1 = i * p.coupling.o_m31.get() * s.a[2].conj() * f.da[2]
            / c(p.gamma(0), mech_offset(&p, 0) - 0.1);
        assert!(rel(f.db[0], db1) < 1e-12);
    }

    #[test]
    fn fig3a_paths_agree_at_origin() {
        let p = normalize_units(&presets::preset("fig3a").unwrap().params(), UnitMode::OmegaM1Units);
        let (p, s) = operating_point(&p).unwrap();
        let (d1, d2) = closed_form_delta_a(&p, &s, AngularRate(0.0)).unwrap();
        let f = solve_fluctuation_system(&p, &s, AngularRate(0.0)).unwrap();
        assert!(rel(d1, f.da[0]) < 1e-10);
        assert!(rel(d2, f.da[1]) < 1e-10);
    }

    #[test]
    fn zero_probe_rejected() {
        let mut p = fig2();
        p.probe.omega_p2 = AngularRate::ZERO;
        assert_eq!(
            transmission_point(&p, AngularRate(0.0)),
            Err(ResponseError::ZeroProbe { port: 2 })
        );
    }

    #[test]
    fn zero_damping_pole_is_flagged() {
        let mut p = fig2();
        for m in &mut p.mech {
            m.gamma = AngularRate(0.0);
        }
        p.coupling.o_m31 = AngularRate::ZERO;
        p.coupling.o_m32 = AngularRate::ZERO;
        let (p, s) = operating_point(&p).unwrap();
        assert!(matches!(
            closed_form_delta_a(&p, &s, AngularRate(0.0)),
            Err(ResponseError::NearPole { .. })
        ));
    }

    #[test]
    fn spectrum_rejects_bad_grids() {
        let p = fig2();
        assert_eq!(spectrum(&p, &[]), Err(ResponseError::BadGrid));
        assert_eq!(spectrum(&p, &[0.1, 0.1]), Err(ResponseError::BadGrid));
        assert_eq!(spectrum(&p, &[0.1, f64::NAN]), Err(ResponseError::BadGrid));
    }

    #[test]
    fn spectrum_matches_pointwise_pipeline() {
        let p = fig2();
        let grid: Vec<f64> = (0..11).map(|k| -0.1 + 0.02 * k as f64).collect();
        let spec = spectrum(&p, &grid).unwrap();
        for (pt, &x) in spec.iter().zip(&grid) {
            assert_eq!(*pt, transmission_point(&p, AngularRate(x)).unwrap());
            assert_eq!(pt.delta_p.get(), x + 1.0);
        }
    }
}
