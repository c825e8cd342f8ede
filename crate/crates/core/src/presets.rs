//! Named parameter sets: identical-mode combs and two experimental proposals.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use crate::disorder::DisorderSpec;
use crate::model::{DriveParams, FrequencyUnit, MechanicalParams, ModeParams, SystemConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PresetName {
    TwoMode,
    FourMode,
    TenMode,
    ExperimentOptical,
    ExperimentMicrowave,
}

impl PresetName {
    pub const ALL: [PresetName; 5] = [
        PresetName::TwoMode,
        PresetName::FourMode,
        PresetName::TenMode,
        PresetName::ExperimentOptical,
        PresetName::ExperimentMicrowave,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::TwoMode => "two-mode",
            PresetName::FourMode => "four-mode",
            PresetName::TenMode => "ten-mode",
            PresetName::ExperimentOptical => "experiment-optical",
            PresetName::ExperimentMicrowave => "experiment-microwave",
        }
    }

    /// Base configuration at the preset's default angle.
    pub fn config(self) -> SystemConfig {
        match self {
            PresetName::TwoMode => two_mode(FRAC_PI_4),
            PresetName::FourMode => four_mode(),
            PresetName::TenMode => ten_mode(0.1),
            PresetName::ExperimentOptical => experiment_optical(),
            PresetName::ExperimentMicrowave => experiment_microwave(-FRAC_PI_4),
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PresetName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = PresetName::ALL.iter().map(|p| p.as_str()).collect();
                format!("unknown preset `{s}` (expected one of {})", names.join(", "))
            })
    }
}

fn resonant_identical(
    m: usize,
    kappa: f64,
    g: f64,
    mech: MechanicalParams,
    theta: f64,
    unit: FrequencyUnit,
) -> SystemConfig {
    SystemConfig::identical(m, ModeParams::new(0.0, kappa, 0.0, g), mech, theta, unit)
        .expect("preset parameters are valid")
}

/// Two modes, `Ω = 0.1κ`, `Q = 10⁶`, `n̄_th = 10³`, `G = 0.3Ω`, in units of `κ`.
pub fn two_mode(theta: f64) -> SystemConfig {
    let omega_m = 0.1;
    let mech = MechanicalParams::from_quality(omega_m, 1e6, 1e3).expect("valid");
    resonant_identical(2, 1.0, 0.3 * omega_m, mech, theta, FrequencyUnit::Dimensionless)
}

/// Four modes, `G = 0.5Ω`, `θ = π/4`, otherwise as [`two_mode`].
pub fn four_mode() -> SystemConfig {
    let omega_m = 0.1;
    let mech = MechanicalParams::from_quality(omega_m, 1e6, 1e3).expect("valid");
    resonant_identical(4, 1.0, 0.5 * omega_m, mech, FRAC_PI_4, FrequencyUnit::Dimensionless)
}

pub fn four_mode_disorder(seed: u64) -> DisorderSpec {
    DisorderSpec::new(0.10, seed, 10)
}

/// Ten modes at `θ = -π/4` with coupling `g_over_omega · Ω`.
pub fn ten_mode(g_over_omega: f64) -> SystemConfig {
    let omega_m = 0.1;
    let mech = MechanicalParams::from_quality(omega_m, 1e6, 1e3).expect("valid");
    resonant_identical(
        10,
        1.0,
        g_over_omega * omega_m,
        mech,
        -FRAC_PI_4,
        FrequencyUnit::Dimensionless,
    )
}

pub fn ten_mode_disorder(seed: u64) -> DisorderSpec {
    DisorderSpec::new(0.05, seed, 100)
}

/// Couplings of the ten-mode sweep, in units of `Ω`.
pub const TEN_MODE_COUPLING_SWEEP: [f64; 7] = [0.02, 0.05, 0.08, 0.1, 0.2, 0.3, 0.4];

/// Frequency of the ten-mode variance matrix, in units of `Ω`.
pub const TEN_MODE_MATRIX_OMEGA: f64 = 1.04;

/// Optical ring resonator: `κ/2π = 1 MHz`, `Ω/2π = 134 kHz`, `Q = 4×10⁶`,
/// `n̄_th = 8×10³`, ten modes at `G = 0.1Ω`.
pub fn experiment_optical() -> SystemConfig {
    let two_pi = 2.0 * PI;
    let omega_m = two_pi * 134e3;
    let mech = MechanicalParams::from_quality(omega_m, 4e6, 8e3).expect("valid");
    resonant_identical(10, two_pi * 1e6, 0.1 * omega_m, mech, -FRAC_PI_4, FrequencyUnit::Hz)
}

/// The 80 μW, 1064 nm pump of the optical proposal, resonant with the cavity.
pub fn experiment_optical_drive() -> DriveParams {
    DriveParams {
        power_w: 80e-6,
        wavelength_m: 1064e-9,
        g_om: 0.0,
        bare_detuning: 0.0,
    }
}

/// Microwave circuit: `Ω/2π = 380 kHz`, `Q = 10⁷`, `Ω/κ = 0.25`,
/// `n̄_th = 2.2×10³`, two modes at `G = 0.1Ω`.
pub fn experiment_microwave(theta: f64) -> SystemConfig {
    let omega_m = 2.0 * PI * 380e3;
    let mech = MechanicalParams::from_quality(omega_m, 1e7, 2.2e3).expect("valid");
    resonant_identical(2, omega_m / 0.25, 0.1 * omega_m, mech, theta, FrequencyUnit::Hz)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in PresetName::ALL {
            assert_eq!(p.as_str().parse::<PresetName>().unwrap(), p);
            assert!(p.config().has_identical_modes());
        }
        assert!("nine-mode".parse::<PresetName>().is_err());
    }

    #[test]
    fn physical_scales() {
        let opt = experiment_optical();
        assert!((opt.mech().omega_m / opt.modes()[0].kappa() - 0.134).abs() < 1e-12);
        assert!((opt.to_config_unit(opt.modes()[0].kappa()) - 1e6).abs() < 1e-6);
        let mw = experiment_microwave(0.0);
        assert!((mw.mech().omega_m / mw.modes()[0].kappa() - 0.25).abs() < 1e-12);
        assert_eq!(ten_mode(0.4).modes()[3].g_coupling, 0.4 * 0.1);
    }
}
