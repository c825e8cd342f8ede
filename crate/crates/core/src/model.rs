//! Domain types, unit handling and config ingestion.
//!
//! Every rate inside a [`SystemConfig`] is an angular frequency. A config
//! declared in [`FrequencyUnit::Hz`] is multiplied by `2π` on ingestion and
//! divided back on serialization; a dimensionless config is taken verbatim
//! (the usual choice is `kappa = 1` for the first mode).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::response;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrequencyUnit {
    /// Rates are already angular frequencies in an arbitrary common scale.
    Dimensionless,
    /// Rates are ordinary frequencies in Hz; multiplied by 2π on ingestion.
    Hz,
}

impl FrequencyUnit {
    /// Factor taking a value written in this unit to an angular frequency.
    pub fn to_angular(self) -> f64 {
        match self {
            FrequencyUnit::Dimensionless => 1.0,
            FrequencyUnit::Hz => 2.0 * PI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanicalParams {
    pub omega_m: f64,
    pub gamma_m: f64,
    pub n_th: f64,
}

impl MechanicalParams {
    pub fn new(omega_m: f64, gamma_m: f64, n_th: f64) -> Result<Self> {
        let mech = MechanicalParams {
            omega_m,
            gamma_m,
            n_th,
        };
        mech.validate()?;
        Ok(mech)
    }

    pub fn from_quality(omega_m: f64, q_m: f64, n_th: f64) -> Result<Self> {
        if !(q_m.is_finite() && q_m > 0.0) {
            return Err(Error::validation("mechanical.q_m", "must be finite and > 0"));
        }
        Self::new(omega_m, omega_m / q_m, n_th)
    }

    pub fn q_m(&self) -> f64 {
        self.omega_m / self.gamma_m
    }

    fn validate(&self) -> Result<()> {
        if !(self.omega_m.is_finite() && self.omega_m > 0.0) {
            return Err(Error::validation("mechanical.omega_m", "must be finite and > 0"));
        }
        if !(self.gamma_m.is_finite() && self.gamma_m > 0.0) {
            return Err(Error::validation("mechanical.gamma_m", "must be finite and > 0"));
        }
        if !(self.n_th.is_finite() && self.n_th >= 0.0) {
            return Err(Error::validation("mechanical.n_th", "must be finite and >= 0"));
        }
        Ok(())
    }
}

/// One cavity mode after linearization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeParams {
    /// Effective detuning.
    pub delta: f64,
    pub kappa_e: f64,
    pub kappa_i: f64,
    /// Linearized (drive-enhanced) coupling, real.
    pub g_coupling: f64,
    /// Thermal photon occupancy of both optical baths of this mode.
    pub n_o: f64,
}

impl ModeParams {
    pub fn new(delta: f64, kappa_e: f64, kappa_i: f64, g_coupling: f64) -> Self {
        ModeParams {
            delta,
            kappa_e,
            kappa_i,
            g_coupling,
            n_o: 0.0,
        }
    }

    pub fn with_n_o(mut self, n_o: f64) -> Self {
        self.n_o = n_o;
        self
    }

    /// Total amplitude decay rate `kappa_e + kappa_i`.
    pub fn kappa(&self) -> f64 {
        self.kappa_e + self.kappa_i
    }

    /// Overcoupling ratio `kappa_e / kappa`.
    pub fn eta(&self) -> f64 {
        self.kappa_e / self.kappa()
    }

    fn validate(&self, index: usize) -> Result<()> {
        let field = |name: &str| format!("modes[{index}].{name}");
        let finite = [
            ("delta", self.delta),
            ("kappa_e", self.kappa_e),
            ("kappa_i", self.kappa_i),
            ("g", self.g_coupling),
            ("n_o", self.n_o),
        ];
        for (name, value) in finite {
            if !value.is_finite() {
                return Err(Error::validation(field(name), "must be finite"));
            }
        }
        if self.kappa_e < 0.0 {
            return Err(Error::validation(field("kappa_e"), "must be >= 0"));
        }
        if self.kappa_i < 0.0 {
            return Err(Error::validation(field("kappa_i"), "must be >= 0"));
        }
        if self.kappa() <= 0.0 {
            return Err(Error::validation(
                field("kappa_e"),
                "kappa_e + kappa_i must be > 0",
            ));
        }
        if self.n_o < 0.0 {
            return Err(Error::validation(field("n_o"), "must be >= 0"));
        }
        Ok(())
    }
}

/// Coherent drive of one comb line, in SI units except `g_om` and
/// `bare_detuning`, which are angular frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    pub power_w: f64,
    pub wavelength_m: f64,
    pub g_om: f64,
    pub bare_detuning: f64,
}

impl DriveParams {
    pub fn carrier_frequency(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.wavelength_m
    }

    /// Drive amplitude `epsilon = sqrt(P / (hbar * omega_L))`, in sqrt(photons/s).
    pub fn amplitude(&self) -> f64 {
        (self.power_w / (HBAR * self.carrier_frequency())).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.power_w.is_finite() && self.power_w >= 0.0) {
            return Err(Error::validation("drive.power_w", "must be finite and >= 0"));
        }
        if !(self.wavelength_m.is_finite() && self.wavelength_m > 0.0) {
            return Err(Error::validation("drive.wavelength_m", "must be finite and > 0"));
        }
        if !self.g_om.is_finite() {
            return Err(Error::validation("drive.g_om", "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    modes: Vec<ModeParams>,
    mech: MechanicalParams,
    theta: f64,
    unit: FrequencyUnit,
}

impl SystemConfig {
    pub fn new(
        modes: Vec<ModeParams>,
        mech: MechanicalParams,
        theta: f64,
        unit: FrequencyUnit,
    ) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::validation("modes", "at least one mode is required"));
        }
        if !theta.is_finite() {
            return Err(Error::validation("theta", "must be finite"));
        }
        mech.validate()?;
        for (i, mode) in modes.iter().enumerate() {
            mode.validate(i)?;
        }
        Ok(SystemConfig {
            modes,
            mech,
            theta,
            unit,
        })
    }

    /// `m` copies of one mode.
    pub fn identical(
        m: usize,
        mode: ModeParams,
        mech: MechanicalParams,
        theta: f64,
        unit: FrequencyUnit,
    ) -> Result<Self> {
        Self::new(vec![mode; m], mech, theta, unit)
    }

    pub fn modes(&self) -> &[ModeParams] {
        &self.modes
    }

    pub fn mode(&self, j: usize) -> Result<&ModeParams> {
        self.modes.get(j).ok_or(Error::ModeIndex {
            index: j,
            modes: self.modes.len(),
        })
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn mech(&self) -> &MechanicalParams {
        &self.mech
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn unit(&self) -> FrequencyUnit {
        self.unit
    }

    pub fn with_theta(&self, theta: f64) -> Self {
        let mut cfg = self.clone();
        cfg.theta = theta;
        cfg
    }

    pub fn with_modes(&self, modes: Vec<ModeParams>) -> Result<Self> {
        Self::new(modes, self.mech, self.theta, self.unit)
    }

    /// True when every mode carries the same parameters as the first.
    pub fn has_identical_modes(&self) -> bool {
        let first = self.modes[0];
        self.modes.iter().all(|m| *m == first)
    }

    /// Convert an angular frequency in this config to the unit the config was
    /// written in.
    pub fn to_config_unit(&self, omega: f64) -> f64 {
        omega / self.unit.to_angular()
    }

    pub fn to_document(&self) -> ConfigDocument {
        let scale = 1.0 / self.unit.to_angular();
        ConfigDocument {
            unit: self.unit,
            theta: self.theta,
            mechanical: MechanicalDoc {
                omega_m: self.mech.omega_m * scale,
                q_m: None,
                gamma_m: Some(self.mech.gamma_m * scale),
                n_th: self.mech.n_th,
            },
            modes: self
                .modes
                .iter()
                .map(|m| ModeDoc {
                    delta: m.delta * scale,
                    kappa_e: m.kappa_e * scale,
                    kappa_i: m.kappa_i * scale,
                    g: Some(m.g_coupling * scale),
                    drive: None,
                    n_o: Some(m.n_o),
                })
                .collect(),
            optical_n_o: 0.0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("config document serializes")
    }

    /// SHA-256 of the canonical (compact) serialization.
    pub fn config_hash(&self) -> String {
        let canonical =
            serde_json::to_string(&self.to_document()).expect("config document serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub unit: FrequencyUnit,
    pub theta: f64,
    pub mechanical: MechanicalDoc,
    pub modes: Vec<ModeDoc>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub optical_n_o: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanicalDoc {
    pub omega_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_m: Option<f64>,
    pub n_th: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeDoc {
    /// Effective detuning, or the bare detuning when `drive` is given.
    #[serde(default)]
    pub delta: f64,
    pub kappa_e: f64,
    #[serde(default)]
    pub kappa_i: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_o: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveDoc {
    pub power_w: f64,
    pub wavelength_m: f64,
    /// Single-photon coupling, in the document's unit.
    pub g_om: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl ConfigDocument {
    /// Validate and convert to angular units, resolving drives through the
    /// self-consistent steady state.
    pub fn resolve(&self) -> Result<SystemConfig> {
        let scale = self.unit.to_angular();
        let mech_doc = &self.mechanical;
        let omega_m = mech_doc.omega_m * scale;
        let mech = match (mech_doc.q_m, mech_doc.gamma_m) {
            (Some(q), None) => MechanicalParams::from_quality(omega_m, q, mech_doc.n_th)?,
            (None, Some(g)) => MechanicalParams::new(omega_m, g * scale, mech_doc.n_th)?,
            (Some(_), Some(_)) => {
                return Err(Error::validation(
                    "mechanical",
                    "give exactly one of q_m or gamma_m, not both",
                ))
            }
            (None, None) => {
                return Err(Error::validation("mechanical", "one of q_m or gamma_m is required"))
            }
        };

        if !(self.optical_n_o.is_finite() && self.optical_n_o >= 0.0) {
            return Err(Error::validation("optical_n_o", "must be finite and >= 0"));
        }

        let mut modes = Vec::with_capacity(self.modes.len());
        let mut driven = Vec::new();
        for (i, doc) in self.modes.iter().enumerate() {
            let n_o = doc.n_o.unwrap_or(self.optical_n_o);
            let mut mode = ModeParams::new(
                doc.delta * scale,
                doc.kappa_e * scale,
                doc.kappa_i * scale,
                0.0,
            )
            .with_n_o(n_o);
            match (doc.g, &doc.drive) {
                (Some(g), None) => mode.g_coupling = g * scale,
                (None, Some(drive)) => {
                    if self.unit != FrequencyUnit::Hz {
                        return Err(Error::validation(
                            format!("modes[{i}].drive"),
                            "drives need physical units (unit = \"hz\")",
                        ));
                    }
                    let drive = DriveParams {
                        power_w: drive.power_w,
                        wavelength_m: drive.wavelength_m,
                        g_om: drive.g_om * scale,
                        bare_detuning: doc.delta * scale,
                    };
                    drive.validate().map_err(|e| match e {
                        Error::Validation { field, reason } => {
                            Error::validation(format!("modes[{i}].{field}"), reason)
                        }
                        other => other,
                    })?;
                    driven.push((i, drive));
                }
                (Some(_), Some(_)) => {
                    return Err(Error::validation(
                        format!("modes[{i}]"),
                        "give exactly one of g or drive, not both",
                    ))
                }
                (None, None) => {
                    return Err(Error::validation(
                        format!("modes[{i}]"),
                        "one of g or drive is required",
                    ))
                }
            }
            mode.validate(i)?;
            modes.push(mode);
        }

        if !driven.is_empty() {
            let drives: Vec<DriveParams> = driven.iter().map(|(_, d)| *d).collect();
            let rates: Vec<(f64, f64)> = driven
                .iter()
                .map(|(i, _)| (modes[*i].kappa_e, modes[*i].kappa_i))
                .collect();
            let ss = response::steady_state(&drives, &rates, &mech)?;
            for (k, (i, _)) in driven.iter().enumerate() {
                modes[*i].delta = ss.delta_eff[k];
                modes[*i].g_coupling = ss.g_linearized[k];
            }
        }

        SystemConfig::new(modes, mech, self.theta, self.unit)
    }
}

/// Parse and validate a JSON config document.
pub fn parse_config(text: &str) -> Result<SystemConfig> {
    let doc: ConfigDocument = serde_json::from_str(text)?;
    doc.resolve()
}

/// Total amplitude decay rate of a mode.
pub fn effective_kappa(mode: &ModeParams) -> f64 {
    mode.kappa()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Full,
    Simplified,
    Oracle,
}

impl std::fmt::Display for Route {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Route::Full => "full",
            Route::Simplified => "simplified",
            Route::Oracle => "oracle",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumMetadata {
    pub config_hash: String,
    pub theta: f64,
    pub route: Route,
}

/// One `(omega, j, l)` entry of a correlation sweep. `valid` is false when the
/// simplified route is outside its validity region; the values are then NaN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationEntry {
    pub xx: Complex64,
    pub yy: Complex64,
    pub valid: bool,
}

#[derive(Debug, Clone, Serialize)]
pub enum SpectrumValues {
    Correlations(Vec<CorrelationEntry>),
    Variances(Vec<f64>),
}

impl SpectrumValues {
    pub fn len(&self) -> usize {
        match self {
            SpectrumValues::Correlations(v) => v.len(),
            SpectrumValues::Variances(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Values laid out grid-major: entry `(i, p)` sits at `i * pairs.len() + p`.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumResult {
    omega_grid: Vec<f64>,
    pairs: Vec<(usize, usize)>,
    values: SpectrumValues,
    pub metadata: SpectrumMetadata,
}

impl SpectrumResult {
    pub fn new(
        omega_grid: Vec<f64>,
        pairs: Vec<(usize, usize)>,
        values: SpectrumValues,
        metadata: SpectrumMetadata,
    ) -> Result<Self> {
        if omega_grid.is_empty() {
            return Err(Error::EmptyGrid("omega"));
        }
        if omega_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation("omega_grid", "must be strictly increasing"));
        }
        if values.len() != omega_grid.len() * pairs.len() {
            return Err(Error::validation(
                "values",
                format!(
                    "expected {} entries, got {}",
                    omega_grid.len() * pairs.len(),
                    values.len()
                ),
            ));
        }
        Ok(SpectrumResult {
            omega_grid,
            pairs,
            values,
            metadata,
        })
    }

    pub fn omega_grid(&self) -> &[f64] {
        &self.omega_grid
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn values(&self) -> &SpectrumValues {
        &self.values
    }

    pub fn index(&self, grid_index: usize, pair_index: usize) -> usize {
        grid_index * self.pairs.len() + pair_index
    }
}
