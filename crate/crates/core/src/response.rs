//! Susceptibilities, steady state and the helper combinations every
//! correlation formula is built from.
//!
//! Fourier convention: `A(t) = ∫ e^{-iωt} A(ω) dω / √(2π)`, and the
//! transform of `A†(t)` is `A†(ω) = [A(-ω)]†`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{DriveParams, MechanicalParams, ModeParams, SystemConfig};
use crate::numeric::NeumaierSum;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Cavity susceptibility `1 / (i(Δ - ω) + κ)`.
pub fn chi_cavity(delta: f64, kappa: f64, omega: f64) -> Complex64 {
    Complex64::new(kappa, delta - omega).inv()
}

/// `χ*_R(-ω) = 1 / (κ - i(Δ + ω))`, the response of `a†` at `ω`.
pub fn chi_cavity_conj_reflected(delta: f64, kappa: f64, omega: f64) -> Complex64 {
    Complex64::new(kappa, -(delta + omega)).inv()
}

/// Bare mechanical susceptibility `1 / (i(Ω - ω) + γ)`.
pub fn chi_mech_bare(mech: &MechanicalParams, omega: f64) -> Complex64 {
    Complex64::new(mech.gamma_m, mech.omega_m - omega).inv()
}

/// Optomechanical self-energy `Σ_j G_j² [χ_R,j(ω) - χ*_R,j(-ω)]`.
pub fn self_energy(cfg: &SystemConfig, omega: f64) -> Complex64 {
    let mut re = NeumaierSum::default();
    let mut im = NeumaierSum::default();
    for mode in cfg.modes() {
        let k = mode.kappa();
        let term = mode.g_coupling.powi(2)
            * (chi_cavity(mode.delta, k, omega) - chi_cavity_conj_reflected(mode.delta, k, omega));
        re.add(term.re);
        im.add(term.im);
    }
    Complex64::new(re.total(), im.total())
}

/// Dressed susceptibility with the self-energy added to the `b` equation
/// only, `χ_m⁻¹ = i(Ω - ω) + γ + Σ`. This drops the `b†` admixture the
/// self-energy carries and is exact only when `Σ = 0` (e.g. all `Δ_j = 0`).
pub fn chi_mech_rotating(cfg: &SystemConfig, omega: f64) -> Complex64 {
    (chi_mech_bare(cfg.mech(), omega).inv() + self_energy(cfg, omega)).inv()
}

/// Dressed mechanical susceptibility.
///
/// The back-action couples `b` and `b†` through the position `b + b†`, so the
/// response of `b` to its own bath is `χ₀(ω) / D(ω)` with
/// `D(ω) = 1 + Σ(ω)[χ₀(ω) - χ₀*(-ω)]`. This reduces to `1/(i(Ω-ω)+γ+Σ)` to
/// first order in `Σ` and equals it when `Σ = 0`, and it keeps the
/// structural identities `F_m = χ*_m(-ω) - χ_m(ω)`, `F*_m(-ω) = -F_m(ω)`
/// exact.
pub fn chi_mech(cfg: &SystemConfig, omega: f64) -> Complex64 {
    let chi0 = chi_mech_bare(cfg.mech(), omega);
    let chi0_conj_reflected = chi_mech_bare(cfg.mech(), -omega).conj();
    let sigma = self_energy(cfg, omega);
    chi0 / (1.0 + sigma * (chi0 - chi0_conj_reflected))
}

/// `F_m(ω) = χ*_m(-ω) - χ_m(ω)`.
pub fn f_mech(cfg: &SystemConfig, omega: f64) -> Complex64 {
    chi_mech(cfg, -omega).conj() - chi_mech(cfg, omega)
}

/// `ζ_j(ω) = e^{iθ} χ*_R,j(-ω) - e^{-iθ} χ_R,j(ω)`.
pub fn zeta(mode: &ModeParams, omega: f64, theta: f64) -> Complex64 {
    let k = mode.kappa();
    let phase = Complex64::from_polar(1.0, theta);
    phase * chi_cavity_conj_reflected(mode.delta, k, omega)
        - phase.conj() * chi_cavity(mode.delta, k, omega)
}

/// `Ξ_j(ω) = e^{iθ} χ*_R,j(-ω) + e^{-iθ} χ_R,j(ω)`.
pub fn xi(mode: &ModeParams, omega: f64, theta: f64) -> Complex64 {
    let k = mode.kappa();
    let phase = Complex64::from_polar(1.0, theta);
    phase * chi_cavity_conj_reflected(mode.delta, k, omega)
        + phase.conj() * chi_cavity(mode.delta, k, omega)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    /// Intracavity amplitudes `ā_j`, drive phase taken real.
    pub abar: Vec<Complex64>,
    /// Exact mechanical shift `-i Σ g_j |ā_j|² / (iΩ + γ)`.
    pub beta: Complex64,
    /// The `γ ≪ Ω` approximation `-Σ g_j |ā_j|² / Ω`.
    pub beta_approx: f64,
    /// `G_j = g_om,j |ā_j|`, real by choice of drive phase.
    pub g_linearized: Vec<f64>,
    /// `Δ_j = Δ'_j + 2 g_om,j Re β`.
    pub delta_eff: Vec<f64>,
    pub iterations: usize,
}

impl SteadyState {
    pub fn photon_number(&self, j: usize) -> f64 {
        self.abar[j].norm_sqr()
    }
}

pub const STEADY_STATE_TOLERANCE: f64 = 1e-12;
pub const STEADY_STATE_MAX_ITERATIONS: usize = 200;
const STEADY_STATE_DAMPING: f64 = 0.5;

fn check_drive_inputs(drives: &[DriveParams], rates: &[(f64, f64)]) -> Result<()> {
    if drives.len() != rates.len() {
        return Err(Error::validation(
            "drives",
            format!("{} drives for {} modes", drives.len(), rates.len()),
        ));
    }
    for d in drives {
        d.validate()?;
    }
    Ok(())
}

/// Steady state at prescribed effective detunings (no self-consistency).
/// `rates` holds `(kappa_e, kappa_i)` per driven mode.
pub fn steady_state_at_detuning(
    drives: &[DriveParams],
    rates: &[(f64, f64)],
    mech: &MechanicalParams,
    delta_eff: &[f64],
) -> Result<SteadyState> {
    check_drive_inputs(drives, rates)?;
    if delta_eff.len() != drives.len() {
        return Err(Error::validation("delta_eff", "one detuning per drive is required"));
    }
    Ok(evaluate(drives, rates, mech, delta_eff, 0))
}

fn evaluate(
    drives: &[DriveParams],
    rates: &[(f64, f64)],
    mech: &MechanicalParams,
    delta_eff: &[f64],
    iterations: usize,
) -> SteadyState {
    let abar: Vec<Complex64> = drives
        .iter()
        .zip(rates)
        .zip(delta_eff)
        .map(|((d, (ke, ki)), delta)| {
            (2.0 * ke).sqrt() * d.amplitude() / Complex64::new(ke + ki, *delta)
        })
        .collect();
    let mut weighted = NeumaierSum::default();
    for (d, a) in drives.iter().zip(&abar) {
        weighted.add(d.g_om * a.norm_sqr());
    }
    let weighted = weighted.total();
    let beta = -I * weighted / Complex64::new(mech.gamma_m, mech.omega_m);
    SteadyState {
        g_linearized: drives.iter().zip(&abar).map(|(d, a)| d.g_om * a.norm()).collect(),
        delta_eff: delta_eff.to_vec(),
        abar,
        beta,
        beta_approx: -weighted / mech.omega_m,
        iterations,
    }
}

/// Self-consistent steady state from bare detunings, by damped Picard
/// iteration on the effective detunings.
pub fn steady_state(
    drives: &[DriveParams],
    rates: &[(f64, f64)],
    mech: &MechanicalParams,
) -> Result<SteadyState> {
    check_drive_inputs(drives, rates)?;
    let scale = rates
        .iter()
        .map(|(ke, ki)| ke + ki)
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut delta: Vec<f64> = drives.iter().map(|d| d.bare_detuning).collect();
    let mut residual = f64::INFINITY;
    for iteration in 1..=STEADY_STATE_MAX_ITERATIONS {
        let state = evaluate(drives, rates, mech, &delta, iteration);
        residual = 0.0;
        for (j, d) in drives.iter().enumerate() {
            let target = d.bare_detuning + 2.0 * d.g_om * state.beta.re;
            let step = STEADY_STATE_DAMPING * (target - delta[j]);
            delta[j] += step;
            residual = residual.max(step.abs());
        }
        if !residual.is_finite() {
            break;
        }
        if residual < STEADY_STATE_TOLERANCE * scale {
            return Ok(evaluate(drives, rates, mech, &delta, iteration));
        }
    }
    Err(Error::SteadyStateDiverged {
        iterations: STEADY_STATE_MAX_ITERATIONS,
        residual,
    })
}

/// Scales of the identical-mode closed forms at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplifiedScales {
    pub omega: f64,
    /// `Ω - ω`
    pub delta_minus: f64,
    /// `Ω + ω`
    pub delta_plus: f64,
    /// `δ` with `1/δ = 1/δ₋ + 1/δ₊`, i.e. `(Ω² - ω²) / 2Ω`.
    pub delta: f64,
    /// `(4G²/κ) κ² / (ω² + κ²)`
    pub gamma_meas: f64,
    pub eta: f64,
}

/// Closed forms are flagged when `|δ₋|` or `|δ|` falls below this many `γ_m`.
pub const SIMPLIFIED_VALIDITY_FACTOR: f64 = 10.0;

impl SimplifiedScales {
    pub fn is_valid(&self, gamma_m: f64) -> bool {
        let floor = SIMPLIFIED_VALIDITY_FACTOR * gamma_m;
        self.delta_minus.abs() >= floor && self.delta.abs() >= floor
    }
}

pub fn simplified_scales(cfg: &SystemConfig, omega: f64) -> Result<SimplifiedScales> {
    if !cfg.has_identical_modes() {
        return Err(Error::NotIdentical(
            "modes differ in detuning, decay, coupling or occupancy".into(),
        ));
    }
    let mode = cfg.modes()[0];
    let kappa = mode.kappa();
    let omega_m = cfg.mech().omega_m;
    let delta_minus = omega_m - omega;
    let delta_plus = omega_m + omega;
    Ok(SimplifiedScales {
        omega,
        delta_minus,
        delta_plus,
        delta: delta_minus * delta_plus / (delta_minus + delta_plus),
        gamma_meas: 4.0 * mode.g_coupling.powi(2) / kappa * kappa.powi(2)
            / (omega.powi(2) + kappa.powi(2)),
        eta: mode.eta(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FrequencyUnit, ModeParams};
    use proptest::prelude::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1e-300)
    }

    fn two_mode(g: f64, delta: [f64; 2]) -> SystemConfig {
        let mech = MechanicalParams::from_quality(0.1, 1e6, 1e3).unwrap();
        SystemConfig::new(
            vec![
                ModeParams::new(delta[0], 1.0, 0.0, g),
                ModeParams::new(delta[1], 0.8, 0.1, g * 0.7),
            ],
            mech,
            0.0,
            FrequencyUnit::Dimensionless,
        )
        .unwrap()
    }

    #[test]
    fn cavity_susceptibility_values() {
        assert_eq!(chi_cavity(0.0, 1.0, 0.0), Complex64::new(1.0, 0.0));
        assert!(close(chi_cavity(0.0, 1.0, 1.0), Complex64::new(0.5, 0.5), 1e-15));
        assert!(close(chi_cavity(0.5, 1.0, 0.0), Complex64::new(0.8, -0.4), 1e-15));
    }

    #[test]
    fn uncoupled_mechanics_is_bare() {
        let cfg = two_mode(0.0, [0.3, -0.2]);
        for w in [-0.3, 0.0, 0.05, 0.1, 0.7] {
            let bare = Complex64::new(cfg.mech().gamma_m, 0.1 - w).inv();
            assert!(close(chi_mech(&cfg, w), bare, 1e-15));
        }
    }

    #[test]
    fn resonant_modes_cancel_self_energy_at_dc() {
        let cfg = two_mode(0.03, [0.0, 0.0]);
        let expected = Complex64::new(cfg.mech().gamma_m, 0.1).inv();
        assert!(close(chi_mech(&cfg, 0.0), expected, 1e-15));
        // With every Δ_j = 0 the self-energy vanishes at all ω and the
        // rotating form coincides with the dressed one.
        for w in [0.02, 0.1, 0.3] {
            assert!(self_energy(&cfg, w).norm() < 1e-18);
            assert!(close(chi_mech(&cfg, w), chi_mech_rotating(&cfg, w), 1e-15));
        }
    }

    #[test]
    fn f_mech_in_far_detuned_limit() {
        // G = 0, Δ = 0, |δ| ≫ γ: F_m ≈ i/δ.
        let cfg = two_mode(0.0, [0.0, 0.0]);
        let w = 0.05;
        let scales = simplified_scales(
            &SystemConfig::identical(
                1,
                ModeParams::new(0.0, 1.0, 0.0, 0.0),
                *cfg.mech(),
                0.0,
                FrequencyUnit::Dimensionless,
            )
            .unwrap(),
            w,
        )
        .unwrap();
        let f = f_mech(&cfg, w);
        assert!(close(f, Complex64::new(0.0, 1.0 / scales.delta), 1e-5));
        let g = cfg.mech().gamma_m;
        let exact = Complex64::new(g, -(0.1 + w)).inv() - Complex64::new(g, 0.1 - w).inv();
        assert!(close(f, exact, 1e-14));
    }

    #[test]
    fn resonant_combinations_at_dc() {
        let mode = ModeParams::new(0.0, 0.7, 0.3, 0.1);
        assert!(zeta(&mode, 0.0, 0.0).norm() < 1e-16);
        assert!(close(xi(&mode, 0.0, 0.0), Complex64::new(2.0, 0.0), 1e-15));
    }

    // Frozen values from a 50-digit re-evaluation of the defining formulas
    // (mpmath), inputs given as exact binary doubles.
    #[test]
    fn combinations_match_high_precision() {
        let cases: [(f64, f64, f64, f64, f64, [f64; 4]); 3] = [
            (
                0.37, 0.81, 0.12, -0.52, 0.9,
                [0.85571377505787023, 1.4893807290011466, 0.71200384255727606, -0.057664410062765139],
            ),
            (
                -0.9, 0.2, 0.05, 1.7, -2.3,
                [0.92068969104336071, -0.79753678790690456, 0.30349583044110968, -1.2507112407565528],
            ),
            (
                0.0, 1.0, 0.0, 0.3, 0.785,
                [-0.38907808134240326, 1.2969269378080109, 1.2979601269122931, 0.38938803807368792],
            ),
        ];
        for (delta, ke, ki, w, theta, expected) in cases {
            let mode = ModeParams::new(delta, ke, ki, 0.0);
            let z = zeta(&mode, w, theta);
            let x = xi(&mode, w, theta);
            for (got, want) in [z.re, z.im, x.re, x.im].into_iter().zip(expected) {
                assert!((got - want).abs() <= 1e-14 * want.abs().max(1.0), "{got} vs {want}");
            }
        }
    }

    #[test]
    fn dressed_susceptibility_matches_high_precision() {
        let cfg = two_mode(0.04, [0.35, -0.6]);
        let want = [
            (0.1, Complex64::new(1445.3937074009727, 5042.4731639785071)),
            (0.0731, Complex64::new(0.063235303482058896, -37.477327692993821)),
        ];
        for (w, expected) in want {
            assert!(close(chi_mech(&cfg, w), expected, 1e-12), "{:?}", chi_mech(&cfg, w));
        }
    }

    #[test]
    fn steady_state_undriven() {
        let mech = MechanicalParams::from_quality(2.0 * std::f64::consts::PI * 134e3, 4e6, 8e3)
            .unwrap();
        let drive = DriveParams {
            power_w: 0.0,
            wavelength_m: 1.064e-6,
            g_om: 10.0,
            bare_detuning: 0.0,
        };
        let ss = steady_state(&[drive], &[(1e6, 0.0)], &mech).unwrap();
        assert_eq!(ss.abar[0], Complex64::new(0.0, 0.0));
        assert_eq!(ss.beta, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn optical_photon_number() {
        let two_pi = 2.0 * std::f64::consts::PI;
        let mech = MechanicalParams::from_quality(two_pi * 134e3, 4e6, 8e3).unwrap();
        let drive = DriveParams {
            power_w: 80e-6,
            wavelength_m: 1064e-9,
            g_om: 0.0,
            bare_detuning: 0.0,
        };
        let ss = steady_state_at_detuning(&[drive], &[(two_pi * 1e6, 0.0)], &mech, &[0.0]).unwrap();
        let n = ss.photon_number(0);
        assert!((n / 1.4e8 - 1.0).abs() < 0.1, "n = {n:e}");
    }

    #[test]
    fn opposite_couplings_cancel_shift() {
        let mech = MechanicalParams::from_quality(1e5, 1e4, 10.0).unwrap();
        let make = |g_om: f64| DriveParams {
            power_w: 1e-6,
            wavelength_m: 1.55e-6,
            g_om,
            bare_detuning: 0.0,
        };
        let ss = steady_state(&[make(5.0), make(-5.0)], &[(1e6, 0.0), (1e6, 0.0)], &mech).unwrap();
        assert_eq!(ss.beta, Complex64::new(0.0, 0.0));
        assert_eq!(ss.delta_eff, vec![0.0, 0.0]);
    }

    #[test]
    fn self_consistent_fixed_point() {
        let mech = MechanicalParams::from_quality(1e6, 1e3, 10.0).unwrap();
        let drives = [
            DriveParams { power_w: 1e-5, wavelength_m: 1.55e-6, g_om: 50.0, bare_detuning: 2e5 },
            DriveParams { power_w: 3e-5, wavelength_m: 1.50e-6, g_om: 30.0, bare_detuning: -1e5 },
        ];
        let rates = [(4e6, 1e6), (5e6, 0.0)];
        let ss = steady_state(&drives, &rates, &mech).unwrap();
        assert!(ss.iterations > 1);
        for (j, d) in drives.iter().enumerate() {
            let (ke, ki) = rates[j];
            let k = ke + ki;
            let n_closed = 2.0 * ke * d.amplitude().powi(2) / (ss.delta_eff[j].powi(2) + k * k);
            assert!((ss.photon_number(j) / n_closed - 1.0).abs() < 1e-10);
            let shift = d.bare_detuning + 2.0 * d.g_om * ss.beta.re;
            assert!((ss.delta_eff[j] - shift).abs() < 1e-9 * k);
        }
        // The γ ≪ Ω approximation is within γ/Ω of the exact real part.
        assert!((ss.beta.re / ss.beta_approx - 1.0).abs() < 2e-6);
    }

    #[test]
    fn divergent_drive_reports_residual() {
        // Blue-detuned drive in the bistable region: the damped iteration cycles.
        let mech = MechanicalParams::from_quality(1e4, 10.0, 0.0).unwrap();
        let drive = DriveParams { power_w: 1e-3, wavelength_m: 1.0e-6, g_om: 1.0, bare_detuning: 9e5 };
        match steady_state(&[drive], &[(1e5, 0.0)], &mech) {
            Err(Error::SteadyStateDiverged { iterations, residual }) => {
                assert_eq!(iterations, STEADY_STATE_MAX_ITERATIONS);
                assert!(residual > 0.0);
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn simplified_scale_values() {
        let omega_m = 0.1;
        let g = 0.3 * omega_m;
        let mech = MechanicalParams::from_quality(omega_m, 1e6, 1e3).unwrap();
        let cfg = SystemConfig::identical(
            2,
            ModeParams::new(0.0, 1.0, 0.0, g),
            mech,
            0.0,
            FrequencyUnit::Dimensionless,
        )
        .unwrap();
        let s0 = simplified_scales(&cfg, 0.0).unwrap();
        assert!((s0.delta - omega_m / 2.0).abs() < 1e-17);
        assert!((s0.gamma_meas - 4.0 * g * g).abs() < 1e-17);
        let s1 = simplified_scales(&cfg, omega_m).unwrap();
        assert_eq!(s1.delta_minus, 0.0);
        assert_eq!(s1.delta, 0.0);
        assert!(!s1.is_valid(mech.gamma_m));
        // 4G²/κ · 1/(1 + Ω²/κ²) with Ω = 0.1κ.
        assert!((s1.gamma_meas - 4.0 * g * g / 1.01).abs() < 1e-16);
        assert_eq!(s1.eta, 1.0);

        let mixed = cfg
            .with_modes(vec![ModeParams::new(0.0, 1.0, 0.0, g), ModeParams::new(0.0, 1.0, 0.0, g * 1.1)])
            .unwrap();
        assert!(matches!(simplified_scales(&mixed, 0.0), Err(Error::NotIdentical(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn reflected_susceptibility_two_ways(delta in -3.0..3.0f64, kappa in 0.01..3.0f64, w in -3.0..3.0f64) {
            let direct = chi_cavity_conj_reflected(delta, kappa, w);
            let via_conj = chi_cavity(delta, kappa, -w).conj();
            prop_assert!((direct - via_conj).norm() <= 1e-14 * direct.norm());
        }

        #[test]
        fn combination_reflections(delta in -3.0..3.0f64, ke in 0.01..2.0f64, ki in 0.0..1.0f64,
                                   w in -3.0..3.0f64, theta in -7.0..7.0f64) {
            let mode = ModeParams::new(delta, ke, ki, 0.0);
            let z = zeta(&mode, w, theta);
            let zr = zeta(&mode, -w, theta);
            prop_assert!((zr + z.conj()).norm() <= 1e-14 * z.norm().max(1e-300) + 1e-15);
            let x = xi(&mode, w, theta);
            let xr = xi(&mode, -w, theta);
            prop_assert!((xr.conj() - x).norm() <= 1e-14 * x.norm().max(1e-300) + 1e-15);
        }

        #[test]
        fn f_mech_antisymmetry(
            d1 in -1.0..1.0f64, d2 in -1.0..1.0f64, g1 in 0.0..0.05f64, g2 in 0.0..0.05f64,
            ki in 0.0..0.3f64, q in 10.0..1e6f64, w in -0.3..0.3f64,
        ) {
            let mech = MechanicalParams::from_quality(0.1, q, 1.0).unwrap();
            let cfg = SystemConfig::new(
                vec![ModeParams::new(d1, 1.0, ki, g1), ModeParams::new(d2, 0.9, 0.0, g2)],
                mech, 0.0, FrequencyUnit::Dimensionless,
            ).unwrap();
            let f = f_mech(&cfg, w);
            let fr = f_mech(&cfg, -w);
            prop_assert!((fr.conj() + f).norm() <= 1e-12 * f.norm());
        }
    }
}
