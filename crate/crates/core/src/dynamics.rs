//! Right-hand side of the mean-value equations of motion in the drive frame.
//!
//! ```text
//! ȧ₁ = −(κ₁ + iΔ_a1)a₁ + iO_m1(b₁ + b₁*)a₁ + D_d + P(t)
//! ȧ₂ = −(κ₂ + iΔ_a2)a₂ + iO_m2(b₂ + b₂*)a₂ + D_d + P(t)
//! ȧ₃ = −(κ₃ + iΔ_a3)a₃ + i[O_m31(b₁ + b₁*) + O_m32(b₂ + b₂*)]a₃ + D_d + P(t)
//! ḃⱼ = −(γⱼ + iω_mj)bⱼ + iO_m3j|a₃|²
//! ```
//!
//! `P(t) = Σ Ω_pj·e^{−i(νt − Φ_pj)}` is passed in already evaluated.

use num_complex::Complex64;

use crate::model::SystemParams;
use crate::steady_state::drive_superposition;

/// State vector order: `a₁, a₂, a₃, b₁, b₂`.
pub type State = [Complex64; 5];

/// Linear decay/rotation rates `κᵢ + iΔ_aᵢ`, `γⱼ + iω_mj` of each mode.
pub fn linear_rates(p: &SystemParams) -> [Complex64; 5] {
    [
        Complex64::new(p.kappa(0), p.delta_a(0)),
        Complex64::new(p.kappa(1), p.delta_a(1)),
        Complex64::new(p.kappa(2), p.delta_a(2)),
        Complex64::new(p.gamma(0), p.omega_m(0)),
        Complex64::new(p.gamma(1), p.omega_m(1)),
    ]
}

/// Everything except the linear term: radiation pressure, drive and probe.
#[inline]
pub fn nonlinear_and_forcing(p: &SystemParams, y: &State, forcing: Complex64) -> State {
    let i = Complex64::i();
    let [o1, o2] = p.port_couplings();
    let [o31, o32] = p.middle_couplings();
    let x1 = 2.0 * y[3].re;
    let x2 = 2.0 * y[4].re;
    let n3 = y[2].norm_sqr();
    [
        i * (o1 * x1) * y[0] + forcing,
        i * (o2 * x2) * y[1] + forcing,
        i * (o31 * x1 + o32 * x2) * y[2] + forcing,
        i * (o31 * n3),
        i * (o32 * n3),
    ]
}

/// Full drive-frame right-hand side with the probe term `probe` added to
/// each optical equation.
pub fn mean_field_rhs(p: &SystemParams, y: &State, probe: Complex64) -> State {
    let rates = linear_rates(p);
    let forcing = drive_superposition(&p.drive) + probe;
    let mut out = nonlinear_and_forcing(p, y, forcing);
    for k in 0..5 {
        out[k] -= rates[k] * y[k];
    }
    out
}
