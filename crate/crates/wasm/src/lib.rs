//! Browser bindings for the interactive demo page in `www/`.
//!
//! Every exported function takes a preset name plus a handful of slider
//! values and returns a flat `Float64Array`. The computation lives in
//! plain Rust functions so it can be tested natively.

use oms_core::model::{normalize_units, AngularRate, UnitMode};
use oms_core::presets;
use oms_core::response;
use oms_core::steady_state::{self, pin_effective_targets, BranchPolicy};
use oms_core::sweep::{linspace, sweep_1d, SweepAxis, SweepParam};
use oms_core::SystemParams;
use wasm_bindgen::prelude::*;

/// Slider values applied on top of a preset. Rates are in units of ω_m1,
/// phases in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controls {
    pub delta_1: f64,
    pub delta_2: f64,
    pub o_m3: f64,
    pub phi_p1: f64,
    pub phi_p2: f64,
}

/// Preset in units of ω_m1 with the controls applied.
pub fn configured(preset: &str, c: Controls) -> Result<SystemParams, String> {
    let pr = presets::preset(preset).ok_or_else(|| format!("unknown preset '{preset}'"))?;
    let mut p = normalize_units(&pr.params(), UnitMode::OmegaM1Units);
    let mut t = pin_effective_targets(&p);
    let mut targets = match p.effective_targets {
        Some(t) => t,
        None => steady_state::operating_point(&t).map_err(|e| e.to_string())?.delta,
    };
    targets[0] = AngularRate(c.delta_1);
    targets[1] = AngularRate(c.delta_2);
    t.effective_targets = Some(targets);
    p = t;
    p.coupling.o_m31 = AngularRate(c.o_m3);
    p.coupling.o_m32 = AngularRate(c.o_m3);
    p.probe.phi_p1 = c.phi_p1;
    p.probe.phi_p2 = c.phi_p2;
    let report = oms_core::model::validate_params(&p);
    if !report.is_ok() {
        let msgs: Vec<String> = report.errors.iter().map(|e| e.to_string()).collect();
        return Err(msgs.join("; "));
    }
    Ok(p)
}

/// Controls that reproduce the preset unchanged.
pub fn defaults(preset: &str) -> Result<Controls, String> {
    let pr = presets::preset(preset).ok_or_else(|| format!("unknown preset '{preset}'"))?;
    let p = pin_effective_targets(&normalize_units(&pr.params(), UnitMode::OmegaM1Units));
    let delta = match p.effective_targets {
        Some(t) => t,
        None => steady_state::operating_point(&p).map_err(|e| e.to_string())?.delta,
    };
    Ok(Controls {
        delta_1: delta[0].get(),
        delta_2: delta[1].get(),
        o_m3: p.coupling.o_m31.get(),
        phi_p1: p.probe.phi_p1,
        phi_p2: p.probe.phi_p2,
    })
}

/// `[x, T_12, T_21]` per point over `count` offsets in `[−half, half]`.
pub fn spectrum_rows(preset: &str, c: Controls, half: f64, count: usize) -> Result<Vec<f64>, String> {
    if !(half > 0.0) || count < 2 {
        return Err("need half > 0 and at least 2 points".into());
    }
    let p = configured(preset, c)?;
    let grid = linspace(-half, half, count);
    let pts = response::spectrum(&p, &grid).map_err(|e| e.to_string())?;
    Ok(pts.iter().flat_map(|t| [t.x.get(), t.t_12, t.t_21]).collect())
}

/// Per root: `[intensity, Δ₁, Δ₂, Δ₃, Δ_a1, Δ_a2, Δ_a3, selected]`.
pub fn steady_rows(preset: &str, c: Controls) -> Result<Vec<f64>, String> {
    let p = pin_effective_targets(&configured(preset, c)?);
    let roots = steady_state::steady_state(&p, BranchPolicy::AllRoots).map_err(|e| e.to_string())?;
    let selected = steady_state::operating_point(&p).map_err(|e| e.to_string())?;
    Ok(roots
        .iter()
        .flat_map(|r| {
            let mut row = vec![r.intensity];
            row.extend(r.delta.iter().map(|d| d.get()));
            row.extend(r.delta_a.iter().map(|d| d.get()));
            row.push(if r.branch_index == selected.branch_index { 1.0 } else { 0.0 });
            row
        })
        .collect())
}

/// `T_12` map followed by the `T_21` map, each `n_phi` rows of `n_x`
/// values. Rows run over φ_rel in `[−π, π]` applied as
/// `Φ_p1 = Φ_p2 = φ_rel/2`; failed points are NaN.
pub fn phase_map_rows(preset: &str, c: Controls, half: f64, n_x: usize, n_phi: usize) -> Result<Vec<f64>, String> {
    let p = configured(preset, c)?;
    let axis = SweepAxis::new(SweepParam::PhiRel, -std::f64::consts::PI, std::f64::consts::PI, n_phi)
        .map_err(|e| e.to_string())?;
    let grid = sweep_1d(&p, axis, &linspace(-half, half, n_x)).map_err(|e| e.to_string())?;
    let t12 = grid.data.iter().map(|d| d.as_ref().map_or(f64::NAN, |t| t.t_12));
    let t21 = grid.data.iter().map(|d| d.as_ref().map_or(f64::NAN, |t| t.t_21));
    Ok(t12.chain(t21).collect())
}

fn js(r: Result<Vec<f64>, String>) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e))
}

/// Preset names, one per line, as `name: description`.
#[wasm_bindgen]
pub fn preset_list() -> String {
    presets::list_presets()
        .iter()
        .map(|p| format!("{}: {}", p.name, p.description))
        .collect::<Vec<_>>()
        .join("\n")
}

/// `[Δ₁, Δ₂, O_m3, Φ_p1, Φ_p2]` of the unmodified preset.
#[wasm_bindgen]
pub fn preset_defaults(preset: &str) -> Result<Vec<f64>, JsError> {
    js(defaults(preset).map(|c| vec![c.delta_1, c.delta_2, c.o_m3, c.phi_p1, c.phi_p2]))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn spectrum(
    preset: &str,
    delta_1: f64,
    delta_2: f64,
    o_m3: f64,
    phi_p1: f64,
    phi_p2: f64,
    half: f64,
    count: usize,
) -> Result<Vec<f64>, JsError> {
    let c = Controls {
        delta_1,
        delta_2,
        o_m3,
        phi_p1,
        phi_p2,
    };
    js(spectrum_rows(preset, c, half, count))
}

#[wasm_bindgen]
pub fn steady_state(
    preset: &str,
    delta_1: f64,
    delta_2: f64,
    o_m3: f64,
    phi_p1: f64,
    phi_p2: f64,
) -> Result<Vec<f64>, JsError> {
    let c = Controls {
        delta_1,
        delta_2,
        o_m3,
        phi_p1,
        phi_p2,
    };
    js(steady_rows(preset, c))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn phase_map(
    preset: &str,
    delta_1: f64,
    delta_2: f64,
    o_m3: f64,
    half: f64,
    n_x: usize,
    n_phi: usize,
) -> Result<Vec<f64>, JsError> {
    let c = Controls {
        delta_1,
        delta_2,
        o_m3,
        phi_p1: 0.0,
        phi_p2: 0.0,
    };
    js(phase_map_rows(preset, c, half, n_x, n_phi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2a_controls() -> Controls {
        defaults("fig2a").unwrap()
    }

    #[test]
    fn defaults_match_preset() {
        let c = fig2a_controls();
        assert!((c.delta_1 - 1.0).abs() < 1e-12 && (c.delta_2 - 1.0).abs() < 1e-12);
        assert!(c.o_m3 > 0.0);
        for pr in presets::list_presets() {
            let c = defaults(pr.name).unwrap();
            assert!(configured(pr.name, c).is_ok(), "{}", pr.name);
        }
    }

    #[test]
    fn defaults_reproduce_preset_spectrum() {
        let rows = spectrum_rows("fig2a", fig2a_controls(), 0.2, 11).unwrap();
        assert_eq!(rows.len(), 33);
        let p = normalize_units(&presets::preset("fig2a").unwrap().params(), UnitMode::OmegaM1Units);
        let direct = response::spectrum(&p, &linspace(-0.2, 0.2, 11)).unwrap();
        for (k, t) in direct.iter().enumerate() {
            assert_eq!(rows[3 * k + 1], t.t_12);
            assert_eq!(rows[3 * k + 2], t.t_21);
        }
    }

    #[test]
    fn steady_rows_mark_one_selected_root() {
        let rows = steady_rows("fig2c", Controls { delta_1: 1.1, delta_2: 0.9, ..fig2a_controls() }).unwrap();
        assert_eq!(rows.len() % 8, 0);
        let selected: Vec<_> = rows.chunks(8).filter(|r| r[7] == 1.0).collect();
        assert_eq!(selected.len(), 1);
        assert!((selected[0][1] - 1.1).abs() < 1e-9);
    }

    #[test]
    fn phase_map_layout() {
        let v = phase_map_rows("fig6", fig2a_controls(), 0.2, 7, 5).unwrap();
        assert_eq!(v.len(), 2 * 7 * 5);
        assert!(v.iter().all(|t| t.is_finite()));
    }

    #[test]
    fn bad_input_is_an_error() {
        assert!(spectrum_rows("nope", fig2a_controls(), 0.2, 11).is_err());
        assert!(spectrum_rows("fig2a", fig2a_controls(), 0.0, 11).is_err());
        assert!(configured("fig2a", Controls { o_m3: -1.0, ..fig2a_controls() }).is_err());
        assert_eq!(preset_list().lines().count(), 12);
    }
}
