//! Browser bindings for the comb entangler.
//!
//! The plain functions return `Result<_, String>` so they can be exercised
//! natively; the `#[wasm_bindgen]` wrappers convert errors into JS exceptions.

use comb_entangler::disorder::{ensemble_variance, DisorderSpec};
use comb_entangler::entanglement::duan_variance_at;
use comb_entangler::numeric::linspace;
use comb_entangler::presets::PresetName;
use comb_entangler::spectra::SpectralPoint;
use comb_entangler::{parse_config, SystemConfig};
use wasm_bindgen::prelude::*;

fn load(config_json: &str) -> Result<SystemConfig, String> {
    parse_config(config_json).map_err(|e| e.to_string())
}

fn grid(cfg: &SystemConfig, lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, String> {
    if points < 2 || !(lo < hi) || lo <= 0.0 {
        return Err(format!("bad frequency range [{lo}, {hi}] with {points} points"));
    }
    let omega_m = cfg.mech().omega_m;
    Ok(linspace(lo * omega_m, hi * omega_m, points))
}

fn check_pair(cfg: &SystemConfig, j: usize, l: usize) -> Result<(), String> {
    let m = cfg.mode_count();
    if j == l || j >= m || l >= m {
        return Err(format!("pair ({j}, {l}) is not a pair of distinct modes out of {m}"));
    }
    Ok(())
}

/// JSON of a named preset configuration.
pub fn preset_json(name: &str) -> Result<String, String> {
    let preset: PresetName = name.parse()?;
    Ok(preset.config().to_json())
}

/// `V_jl(ω)` at the configured angle over `[lo, hi] Ω_m`.
pub fn curve(config_json: &str, j: usize, l: usize, lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, String> {
    let cfg = load(config_json)?;
    check_pair(&cfg, j, l)?;
    let theta = cfg.theta();
    grid(&cfg, lo, hi, points)?
        .into_iter()
        .map(|w| {
            let point = SpectralPoint::new(&cfg, w);
            duan_variance_at(&point.at_angle(theta), j, l, w).map_err(|e| e.to_string())
        })
        .collect()
}

/// `V_jl(ω, θ)` with θ over `[-π, π)`, row-major with one row per angle.
pub fn heatmap(
    config_json: &str,
    j: usize,
    l: usize,
    lo: f64,
    hi: f64,
    omega_points: usize,
    theta_points: usize,
) -> Result<Vec<f64>, String> {
    let cfg = load(config_json)?;
    check_pair(&cfg, j, l)?;
    if theta_points == 0 {
        return Err("theta_points must be positive".into());
    }
    let omegas = grid(&cfg, lo, hi, omega_points)?;
    let points: Vec<SpectralPoint<'_>> = omegas.iter().map(|&w| SpectralPoint::new(&cfg, w)).collect();
    let step = 2.0 * std::f64::consts::PI / theta_points as f64;
    let mut out = Vec::with_capacity(omega_points * theta_points);
    for t in 0..theta_points {
        let theta = -std::f64::consts::PI + t as f64 * step;
        for (point, &w) in points.iter().zip(&omegas) {
            out.push(duan_variance_at(&point.at_angle(theta), j, l, w).map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

/// Min, mean and max of `V_jl(ω)` over a disorder ensemble, concatenated.
#[allow(clippy::too_many_arguments)]
pub fn envelope(
    config_json: &str,
    j: usize,
    l: usize,
    sigma: f64,
    samples: usize,
    seed: u64,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    let cfg = load(config_json)?;
    check_pair(&cfg, j, l)?;
    let (j, l) = (j.min(l), j.max(l));
    let omegas = grid(&cfg, lo, hi, points)?;
    let spec = DisorderSpec::new(sigma, seed, samples);
    let stats = ensemble_variance(&cfg, &spec, &omegas, cfg.theta()).map_err(|e| e.to_string())?;
    let pair = stats.pairs.iter().position(|&p| p == (j, l)).ok_or("pair not in ensemble")?;
    let mut out = Vec::with_capacity(3 * points);
    for series in [&stats.min, &stats.mean, &stats.max] {
        out.extend((0..points).map(|g| series[stats.index(g, pair)]));
    }
    Ok(out)
}

fn js(e: String) -> JsError {
    JsError::new(&e)
}

#[wasm_bindgen(js_name = presetConfig)]
pub fn preset_config(name: &str) -> Result<String, JsError> {
    preset_json(name).map_err(js)
}

#[wasm_bindgen(js_name = varianceCurve)]
pub fn variance_curve(
    config_json: &str,
    j: usize,
    l: usize,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    curve(config_json, j, l, lo, hi, points).map_err(js)
}

#[wasm_bindgen(js_name = varianceHeatmap)]
pub fn variance_heatmap(
    config_json: &str,
    j: usize,
    l: usize,
    lo: f64,
    hi: f64,
    omega_points: usize,
    theta_points: usize,
) -> Result<Vec<f64>, JsError> {
    heatmap(config_json, j, l, lo, hi, omega_points, theta_points).map_err(js)
}

#[wasm_bindgen(js_name = ensembleEnvelope)]
#[allow(clippy::too_many_arguments)]
pub fn ensemble_envelope(
    config_json: &str,
    j: usize,
    l: usize,
    sigma: f64,
    samples: usize,
    seed: u64,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    envelope(config_json, j, l, sigma, samples, seed, lo, hi, points).map_err(js)
}
