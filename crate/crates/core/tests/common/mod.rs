//! Helpers shared by the integration and acceptance targets.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use oms_core::model::{normalize_units, AngularRate, Couplings, UnitMode};
use oms_core::{presets, Convention, SystemParams};
use rand::Rng;

/// Preset `name` in units of ω_m1.
pub fn preset(name: &str) -> SystemParams {
    normalize_units(&presets::preset(name).unwrap().params(), UnitMode::OmegaM1Units)
}

/// Random valid parameter set in units of ω_m1. With `bare` the detunings
/// are drawn as bare values and no targets are set; otherwise they are
/// drawn as effective targets.
pub fn random_params<R: Rng>(rng: &mut R, bare: bool) -> SystemParams {
    let mut p = preset("fig2a");
    for m in &mut p.optical {
        m.kappa = AngularRate(rng.gen_range(1e-3..0.1));
    }
    for m in &mut p.mech {
        m.omega_m = AngularRate(rng.gen_range(0.8..1.2));
        m.gamma = AngularRate(rng.gen_range(1e-6..1e-3));
    }
    let mut o = || AngularRate(rng.gen_range(0.0..0.01));
    p.coupling = Couplings {
        o_m1: o(),
        o_m2: o(),
        o_m31: o(),
        o_m32: o(),
    };
    p.drive.omega_d1 = AngularRate(rng.gen_range(0.1..3.0));
    p.drive.omega_d2 = AngularRate(rng.gen_range(0.1..3.0));
    p.drive.phi_d1 = rng.gen_range(-PI..PI);
    p.drive.phi_d2 = rng.gen_range(-PI..PI);
    p.probe.omega_p1 = AngularRate(rng.gen_range(0.01..0.3));
    p.probe.omega_p2 = AngularRate(rng.gen_range(0.01..0.3));
    p.probe.phi_p1 = rng.gen_range(-PI..PI);
    p.probe.phi_p2 = rng.gen_range(-PI..PI);
    let delta: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.5..1.5));
    if bare {
        for (m, d) in p.optical.iter_mut().zip(delta) {
            m.delta_a = AngularRate(d);
        }
        p.effective_targets = None;
    } else {
        p.effective_targets = Some(delta.map(AngularRate));
    }
    p.convention = if rng.gen_bool(0.5) {
        Convention::Literal
    } else {
        Convention::Rotated
    };
    p
}

/// Independent damped iteration of the five steady-state equations,
/// sharing no code with the cubic solver. Uses the bare detunings of `p`.
/// Returns `None` if no damping factor converges.
pub fn fixed_point_oracle(p: &SystemParams) -> Option<[Complex64; 5]> {
    let i = Complex64::i();
    let dd = Complex64::from_polar(p.drive.omega_d1.get(), p.drive.phi_d1)
        + Complex64::from_polar(p.drive.omega_d2.get(), p.drive.phi_d2);
    let (o1, o2) = (p.coupling.o_m1.get(), p.coupling.o_m2.get());
    let (o31, o32) = (p.coupling.o_m31.get(), p.coupling.o_m32.get());
    let mech = |a3: Complex64| {
        let n = a3.norm_sqr();
        (
            i * o31 * n / Complex64::new(p.gamma(0), p.omega_m(0)),
            i * o32 * n / Complex64::new(p.gamma(1), p.omega_m(1)),
        )
    };
    for lambda in [0.5, 0.1, 0.02, 0.005] {
        let mut a3 = Complex64::new(0.0, 0.0);
        let mut converged = false;
        for _ in 0..400_000 {
            let (b1, b2) = mech(a3);
            let d3 = p.delta_a(2) - o31 * 2.0 * b1.re - o32 * 2.0 * b2.re;
            let next = (1.0 - lambda) * a3 + lambda * dd / Complex64::new(p.kappa(2), d3);
            let done = (next - a3).norm() <= 1e-15 * next.norm();
            a3 = next;
            if done {
                converged = true;
                break;
            }
        }
        if converged {
            let (b1, b2) = mech(a3);
            let a1 = dd / Complex64::new(p.kappa(0), p.delta_a(0) - o1 * 2.0 * b1.re);
            let a2 = dd / Complex64::new(p.kappa(1), p.delta_a(1) - o2 * 2.0 * b2.re);
            return Some([a1, a2, a3, b1, b2]);
        }
    }
    None
}

pub fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}
