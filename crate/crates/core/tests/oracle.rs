use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use comb_entangler::model::{FrequencyUnit, MechanicalParams, ModeParams, SystemConfig};
use comb_entangler::oracle::{build_system, oracle_correlation, solve_output, OraclePoint};
use comb_entangler::presets;
use comb_entangler::spectra::{xx_correlation_full, yy_correlation_full, Quadrature};

fn config(modes: Vec<ModeParams>, omega_m: f64, q: f64, n_th: f64, theta: f64) -> SystemConfig {
    SystemConfig::new(
        modes,
        MechanicalParams::from_quality(omega_m, q, n_th).unwrap(),
        theta,
        FrequencyUnit::Dimensionless,
    )
    .unwrap()
}

fn arb_config() -> impl Strategy<Value = SystemConfig> {
    let mode = (-1.0..1.0f64, 0.3..1.0f64, 0.0..0.3f64, 0.0..0.5f64, 0.0..1.5f64);
    (prop::collection::vec(mode, 1..5), 0.05..0.4f64, 2.0..6.0f64, 0.0..1e3f64, -3.2..3.2f64).prop_map(
        |(modes, omega_m, log_q, n_th, theta)| {
            let modes = modes
                .into_iter()
                .map(|(d, ke, ki, g, n)| ModeParams::new(d, ke, ki, g * omega_m).with_n_o(n))
                .collect();
            config(modes, omega_m, 10f64.powf(log_q), n_th, theta)
        },
    )
}

#[test]
fn decoupled_system_is_block_diagonal() {
    let cfg = config(vec![ModeParams::new(0.2, 1.0, 0.0, 0.0)], 0.1, 1e3, 0.0, 0.0);
    let (a, b) = build_system(&cfg, 0.05);
    assert_eq!(a.shape(), (4, 4));
    assert_eq!(b.shape(), (4, 6));
    for (r, c) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
        assert_eq!(a[(r, c)], Complex64::new(0.0, 0.0));
        assert_eq!(a[(c, r)], Complex64::new(0.0, 0.0));
    }
}

#[test]
fn empty_cavity_reflection() {
    let cfg = config(vec![ModeParams::new(0.0, 1.0, 0.0, 0.0)], 0.1, 1e3, 0.0, 0.0);
    let sol = solve_output(&cfg, 0.0).unwrap();
    assert!((sol.response[(0, 0)] - 1.0).norm() < 1e-15);
    let far = solve_output(&cfg, 1e9).unwrap();
    assert!((far.response[(0, 0)] + 1.0).norm() < 1e-8);
}

#[test]
fn resonance_point_is_well_conditioned() {
    let cfg = presets::two_mode(0.5);
    let sol = solve_output(&cfg, cfg.mech().omega_m).unwrap();
    assert!(sol.condition.is_finite() && sol.condition > 1.0);
    assert!(sol.residual < 1e-10);
}

#[test]
fn vacuum_and_pair_examples() {
    let cfg = config(vec![ModeParams::new(0.3, 0.8, 0.2, 0.0); 2], 0.1, 1e3, 5.0, 0.4);
    assert!((oracle_correlation(&cfg, 0, 0, 0.07, Quadrature::X).unwrap() - 0.5).norm() < 1e-14);
    assert!(oracle_correlation(&cfg, 0, 1, 0.07, Quadrature::Y).unwrap().norm() < 1e-14);

    let fig = presets::two_mode(-std::f64::consts::FRAC_PI_4);
    let w = 0.5 * fig.mech().omega_m;
    let a = xx_correlation_full(&fig, 0, 1, w).unwrap();
    let b = oracle_correlation(&fig, 0, 1, w, Quadrature::X).unwrap();
    assert!((a - b).norm() <= 1e-8 * b.norm());
    let fig = fig.with_theta(std::f64::consts::FRAC_PI_4);
    let w = 1.3 * fig.mech().omega_m;
    let a = yy_correlation_full(&fig, 0, 1, w).unwrap();
    let b = oracle_correlation(&fig, 0, 1, w, Quadrature::Y).unwrap();
    assert!((a - b).norm() <= 1e-8 * b.norm());
}

#[test]
fn cold_single_mode_back_action_is_positive() {
    let cfg = config(vec![ModeParams::new(0.0, 1.0, 0.0, 0.03)], 0.1, 1e9, 0.0, 0.9);
    for w in [0.02, 0.08, 0.12, 0.3] {
        let xx = oracle_correlation(&cfg, 0, 0, w, Quadrature::X).unwrap();
        assert!(xx.re > 0.0 && xx.im.abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conjugate_rows_mirror(cfg in arb_config(), w in -0.8..0.8f64) {
        let m = cfg.mode_count();
        let (a_plus, _) = build_system(&cfg, w);
        let (a_minus, _) = build_system(&cfg, -w);
        // Row for a†_j at ω is the conjugated row for a_j at -ω, with the
        // a ↔ a† and b ↔ b† columns exchanged.
        let n = 2 * m + 2;
        let swap = |c: usize| if c < m { c + m } else if c < 2 * m { c - m } else if c == 2 * m { c + 1 } else { c - 1 };
        for j in 0..m {
            for c in 0..n {
                prop_assert!((a_plus[(m + j, swap(c))] - a_minus[(j, c)].conj()).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn conjugation_consistency(cfg in arb_config(), w in -0.8..0.8f64) {
        let point = OraclePoint::new(&cfg, w).unwrap();
        let theta = cfg.theta();
        let m = cfg.mode_count();
        for j in 0..m {
            for l in 0..m {
                for quad in [Quadrature::X, Quadrature::Y] {
                    let a = point.correlation(j, l, quad, theta).unwrap();
                    let b = point.correlation(l, j, quad, theta).unwrap();
                    prop_assert!((a - b.conj()).norm() <= 1e-9 * a.norm().max(1.0));
                }
            }
        }
    }

    #[test]
    fn zero_temperature_diagonals_nonnegative(cfg in arb_config(), w in -0.8..0.8f64) {
        let modes: Vec<ModeParams> = cfg.modes().iter().map(|m| m.with_n_o(0.0)).collect();
        let mech = MechanicalParams::new(cfg.mech().omega_m, cfg.mech().gamma_m, 0.0).unwrap();
        let cold = SystemConfig::new(modes, mech, cfg.theta(), FrequencyUnit::Dimensionless).unwrap();
        let point = OraclePoint::new(&cold, w).unwrap();
        for j in 0..cold.mode_count() {
            for quad in [Quadrature::X, Quadrature::Y] {
                prop_assert!(point.correlation(j, j, quad, cold.theta()).unwrap().re >= -1e-12);
            }
        }
    }

    #[test]
    fn solve_residual_small(cfg in arb_config(), w in -0.8..0.8f64) {
        let sol = solve_output(&cfg, w).unwrap();
        prop_assert!(sol.residual < 1e-10);
        let (a, b) = build_system(&cfg, w);
        let r: DMatrix<Complex64> = &a * &sol.internal - &b;
        prop_assert!(r.iter().all(|z| z.norm() < 1e-9));
    }
}
