//! Named parameter sets for the reference scenarios.
//!
//! Values are in rad/s. Every preset keeps its nominal bare detunings in
//! `optical[i].delta_a` and the effective detunings as targets; the targets
//! take precedence when the steady state is solved.

use std::f64::consts::PI;

use crate::model::{
    AngularRate, Convention, Couplings, Drives, MechanicalMode, OpticalMode, Probes, SystemParams,
    Units,
};
use crate::steady_state::BranchPolicy;
use crate::sweep::{SweepAxis, SweepParam};

pub const OMEGA_M1_HZ: f64 = 12.6e9;

fn hz(v: f64) -> AngularRate {
    AngularRate::from_cyclic(v)
}

fn omega_m1() -> f64 {
    hz(OMEGA_M1_HZ).get()
}

const FIG2_BARE_GHZ: [f64; 3] = [79.96, 78.38, 84.71];
const FIG3_BARE_GHZ: [f64; 3] = [79.168, 79.160, 79.96];

/// Shared baseline parameter set with effective detunings `targets`·ω_m1.
fn base(targets: [f64; 3], bare_ghz: [f64; 3]) -> SystemParams {
    let w = omega_m1();
    let kappa = hz(73e6);
    let o = hz(1.5e6);
    SystemParams {
        optical: bare_ghz.map(|g| OpticalMode {
            kappa,
            delta_a: hz(g * 1e9),
        }),
        mech: [MechanicalMode {
            omega_m: hz(OMEGA_M1_HZ),
            gamma: hz(88e3),
        }; 2],
        coupling: Couplings {
            o_m1: o,
            o_m2: o,
            o_m31: o,
            o_m32: o,
        },
        drive: Drives {
            omega_d1: AngularRate(2.0 * w),
            omega_d2: AngularRate(2.0 * w),
            phi_d1: 0.0,
            phi_d2: 0.0,
        },
        probe: Probes {
            omega_p1: AngularRate(0.2 * w),
            omega_p2: AngularRate(0.2 * w),
            phi_p1: 0.0,
            phi_p2: 0.0,
        },
        effective_targets: Some(targets.map(|t| AngularRate(t * w))),
        convention: Convention::Rotated,
        branch: BranchPolicy::SmallestIntensity,
        units: Units::RadPerSec,
    }
}

fn fig2a() -> SystemParams {
    base([1.0, 1.0, 1.0], FIG2_BARE_GHZ)
}

fn fig2c() -> SystemParams {
    base([1.1, 0.9, 1.0], FIG2_BARE_GHZ)
}

fn fig2d() -> SystemParams {
    base([0.9, 1.1, 1.0], FIG2_BARE_GHZ)
}

fn fig3(o1_mhz: f64, o2_mhz: f64) -> SystemParams {
    let mut p = base([1.0, 1.0, 1.0], FIG3_BARE_GHZ);
    p.coupling = Couplings {
        o_m1: hz(o1_mhz * 1e6),
        o_m2: hz(o2_mhz * 1e6),
        o_m31: hz(48.5e6),
        o_m32: hz(48.5e6),
    };
    p
}

fn fig3a() -> SystemParams {
    fig3(1.0, 60.0)
}

fn fig3b() -> SystemParams {
    fig3(60.0, 1.0)
}

fn fig4(k1_mhz: f64, k2_mhz: f64) -> SystemParams {
    let mut p = fig2a();
    p.optical[0].kappa = hz(k1_mhz * 1e6);
    p.optical[1].kappa = hz(k2_mhz * 1e6);
    p
}

fn fig4a() -> SystemParams {
    fig4(83.0, 3.0)
}

fn fig4b() -> SystemParams {
    fig4(3.0, 83.0)
}

fn fig5(phi_p1: f64, phi_p2: f64) -> SystemParams {
    let mut p = fig2a();
    p.probe.phi_p1 = phi_p1;
    p.probe.phi_p2 = phi_p2;
    p
}

fn fig5a() -> SystemParams {
    fig5(0.0, 0.0)
}

fn fig5b() -> SystemParams {
    fig5(2.0 * PI / 3.0, 2.0 * PI / 3.0)
}

fn fig5c() -> SystemParams {
    fig5(-2.0 * PI / 3.0, 2.0 * PI / 3.0)
}

fn no_axis() -> Option<SweepAxis> {
    None
}

fn o_m3_axis() -> Option<SweepAxis> {
    SweepAxis::new(SweepParam::OM3, 0.0, hz(48.5e6).get(), 6).ok()
}

fn phi_rel_axis() -> Option<SweepAxis> {
    SweepAxis::new(SweepParam::PhiRel, -PI, PI, 201).ok()
}

#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    /// Nominal bare detunings Δ_ai/2π in GHz.
    pub nominal_bare_ghz: [f64; 3],
    build: fn() -> SystemParams,
    axis: fn() -> Option<SweepAxis>,
}

impl Preset {
    pub fn params(&self) -> SystemParams {
        (self.build)()
    }

    /// Secondary sweep axis for waterfall and density presets.
    pub fn default_axis(&self) -> Option<SweepAxis> {
        (self.axis)()
    }
}

/// Default probe-offset axis: `count` points over `[−0.2, 0.2]·ω_m1`, in rad/s.
pub fn default_x_grid(count: usize) -> Vec<f64> {
    let w = omega_m1();
    crate::sweep::linspace(-0.2 * w, 0.2 * w, count)
}

pub const DEFAULT_X_POINTS: usize = 2001;

static PRESETS: [Preset; 12] = [
    Preset {
        name: "fig2a",
        description: "baseline spectrum, all effective detunings at omega_m1",
        nominal_bare_ghz: FIG2_BARE_GHZ,
        build: fig2a,
        axis: no_axis,
    },
    Preset {
        name: "fig2c",
        description: "effective detunings 1.1, 0.9, 1.0 x omega_m1",
        nominal_bare_ghz: FIG2_BARE_GHZ,
        build: fig2c,
        axis: no_axis,
    },
    Preset {
        name: "fig2d",
        description: "effective detunings 0.9, 1.1, 1.0 x omega_m1",
        nominal_bare_ghz: FIG2_BARE_GHZ,
        build: fig2d,
        axis: no_axis,
    },
    Preset {
        name: "fig3a",
        description: "O_m1 = 1 MHz, O_m2 = 60 MHz, O_m3 = 48.5 MHz",
        nominal_bare_ghz: FIG3_BARE_GHZ,
        build: fig3a,
        axis: no_axis,
    },
    Preset {
        name: "fig3b",
        description: "O_m1 = 60 MHz, O_m2 = 1 MHz, O_m3 = 48.5 MHz",
        nominal_bare_ghz: FIG3_BARE_GHZ,
        build: fig3b,
        axis: no_axis,
    },
    Preset {
        name: "fig3cd",
        description: "waterfall over O_m3 from 0 to 48.5 MHz",
        nominal_bare_ghz: FIG3_BARE_GHZ,
        build: fig3a,
        axis: o_m3_axis,
    },
    Preset {
        name: "fig4a",
        description: "kappa_1 = 83 MHz, kappa_2 = 3 MHz",
        nominal_bare_ghz: FIG2_BARE_GHZ,
        build: fig4a,
        axis: no_axis,
    },
    Preset {
        name: "fig4b",
        description: "kappa_1 = 3 MHz, kappa_2 = 83 MHz",
        nominal_bare_ghz: FIG2_BARE_GHZ,
        build: fig4b,
        axis: no_axis,
    },
    Preset {
        name: "fig5a",
        description: "probe phases 0, 0",
        nominal_bare_ghz: FIG2_BARE_GHZ,
        build: fig5a,
        axis: no_axis,
    },
    Preset {
        name: "fig5b",
        description: "probe phases 2pi/3, 2pi/3",
        nominal_bare_ghz: FIG2_BARE_GHZ,
        build: fig5b,
        axis: no_axis,
    },
    Preset {
        name: "fig5c",
        description: "probe phases -2pi/3, 2pi/3",
        nominal_bare_ghz: FIG2_BARE_GHZ,
        build: fig5c,
        axis: no_axis,
    },
    Preset {
        name: "fig6",
        description: "density map over relative phase phi_rel in [-pi, pi]",
        nominal_bare_ghz: FIG2_BARE_GHZ,
        build: fig2a,
        axis: phi_rel_axis,
    },
];

/// All presets in a fixed order.
pub fn list_presets() -> &'static [Preset] {
    &PRESETS
}

pub fn preset(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_params;

    #[test]
    fn twelve_presets_with_unique_names() {
        let names: Vec<_> = list_presets().iter().map(|p| p.name).collect();
        assert_eq!(names.len(), 12);
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 12);
    }

    #[test]
    fn every_preset_validates() {
        for p in list_presets() {
            let report = validate_params(&p.params());
            assert!(report.is_ok(), "{}: {:?}", p.name, report.errors);
        }
    }

    #[test]
    fn preset_values() {
        let p = preset("fig4a").unwrap().params();
        assert_eq!(p.optical[0].kappa, AngularRate::from_cyclic(83e6));
        assert_eq!(p.optical[1].kappa, AngularRate::from_cyclic(3e6));
        let p = preset("fig3b").unwrap().params();
        assert_eq!(p.coupling.o_m1, AngularRate::from_cyclic(60e6));
        assert_eq!(p.optical[2].delta_a, AngularRate::from_cyclic(79.96e9));
        assert_eq!(preset("fig6").unwrap().default_axis().unwrap().count, 201);
    }
}
