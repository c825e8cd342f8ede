//! Independent cross-check: solves the linearized Langevin equations in the
//! Fourier domain as a dense linear system, with no closed-form
//! susceptibilities.
//!
//! Unknowns are ordered `[a_1..a_M, a†_1..a†_M, b, b†]`, inputs
//! `[a_e (M), a†_e (M), a_i (M), a†_i (M), b_in, b†_in]`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::SystemConfig;
use crate::spectra::Quadrature;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative residual above which a solve is rejected.
pub const RESIDUAL_LIMIT: f64 = 1e-10;

/// Coefficient matrix `A(ω)` and input matrix `B` with `A x = B u`.
pub fn build_system(cfg: &SystemConfig, omega: f64) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let m = cfg.mode_count();
    let n = 2 * m + 2;
    let (ib, ibd) = (2 * m, 2 * m + 1);
    let mech = cfg.mech();
    let mut a = DMatrix::<Complex64>::zeros(n, n);
    let mut b = DMatrix::<Complex64>::zeros(n, 4 * m + 2);
    for (j, mode) in cfg.modes().iter().enumerate() {
        let g = mode.g_coupling;
        let kappa = mode.kappa();
        let ext = (2.0 * mode.kappa_e).sqrt();
        let int = (2.0 * mode.kappa_i).sqrt();

        a[(j, j)] = I * (mode.delta - omega) + kappa;
        a[(j, ib)] = I * g;
        a[(j, ibd)] = I * g;
        b[(j, j)] = ext.into();
        b[(j, 2 * m + j)] = int.into();

        let r = m + j;
        a[(r, r)] = kappa - I * (mode.delta + omega);
        a[(r, ib)] = -I * g;
        a[(r, ibd)] = -I * g;
        b[(r, m + j)] = ext.into();
        b[(r, 3 * m + j)] = int.into();

        a[(ib, j)] = I * g;
        a[(ib, r)] = I * g;
        a[(ibd, j)] = -I * g;
        a[(ibd, r)] = -I * g;
    }
    a[(ib, ib)] = I * (mech.omega_m - omega) + mech.gamma_m;
    a[(ibd, ibd)] = mech.gamma_m - I * (mech.omega_m + omega);
    let damp = (2.0 * mech.gamma_m).sqrt();
    b[(ib, 4 * m)] = damp.into();
    b[(ibd, 4 * m + 1)] = damp.into();
    (a, b)
}

#[derive(Debug, Clone)]
pub struct ScatteringSolution {
    pub omega: f64,
    /// Rows `[a_out (M), a†_out (M)]`, columns in input order.
    pub response: DMatrix<Complex64>,
    /// Internal-field response `A⁻¹ B`.
    pub internal: DMatrix<Complex64>,
    pub residual: f64,
    pub condition: f64,
}

fn frobenius(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn solve_output(cfg: &SystemConfig, omega: f64) -> Result<ScatteringSolution> {
    let m = cfg.mode_count();
    let (a, b) = build_system(cfg, omega);
    let x = a
        .clone()
        .lu()
        .solve(&b)
        .ok_or(Error::Singular { omega })?;
    let residual = frobenius(&(&a * &x - &b)) / frobenius(&b);
    if !residual.is_finite() || residual > RESIDUAL_LIMIT {
        return Err(Error::Singular { omega });
    }
    let sv = a.singular_values();
    let condition = sv.max() / sv.min();

    let mut response = DMatrix::<Complex64>::zeros(2 * m, 4 * m + 2);
    for (j, mode) in cfg.modes().iter().enumerate() {
        let ext = (2.0 * mode.kappa_e).sqrt();
        for row in [j, m + j] {
            for col in 0..4 * m + 2 {
                response[(row, col)] = ext * x[(row, col)];
            }
            response[(row, row)] -= 1.0;
        }
    }
    Ok(ScatteringSolution {
        omega,
        response,
        internal: x,
        residual,
        condition,
    })
}

/// Both frequency solves needed for `⟨Q_j(ω) Q_l(-ω)⟩`.
#[derive(Debug, Clone)]
pub struct OraclePoint {
    pub plus: ScatteringSolution,
    pub minus: ScatteringSolution,
    /// Input occupancies: `(n̄+1)` for `(c, c†)` and `n̄` for `(c†, c)` pairs.
    noise: DMatrix<f64>,
    modes: usize,
}

impl OraclePoint {
    pub fn new(cfg: &SystemConfig, omega: f64) -> Result<Self> {
        let m = cfg.mode_count();
        let mut noise = DMatrix::<f64>::zeros(4 * m + 2, 4 * m + 2);
        for (j, mode) in cfg.modes().iter().enumerate() {
            for base in [0, 2 * m] {
                noise[(base + j, base + m + j)] = mode.n_o + 1.0;
                noise[(base + m + j, base + j)] = mode.n_o;
            }
        }
        let n_th = cfg.mech().n_th;
        noise[(4 * m, 4 * m + 1)] = n_th + 1.0;
        noise[(4 * m + 1, 4 * m)] = n_th;
        Ok(OraclePoint {
            plus: solve_output(cfg, omega)?,
            minus: solve_output(cfg, -omega)?,
            noise,
            modes: m,
        })
    }

    fn quadrature_row(sol: &ScatteringSolution, j: usize, m: usize, p: Complex64) -> Vec<Complex64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        (0..sol.response.ncols())
            .map(|c| s * (p * sol.response[(j, c)] + p.conj() * sol.response[(m + j, c)]))
            .collect()
    }

    /// `⟨ΔQ_j(ω) ΔQ_l(-ω)⟩` at quadrature angle `theta`.
    pub fn correlation(&self, j: usize, l: usize, quad: Quadrature, theta: f64) -> Result<Complex64> {
        let m = self.modes;
        for index in [j, l] {
            if index >= m {
                return Err(Error::ModeIndex { index, modes: m });
            }
        }
        let p = quad.phase(theta);
        let rj = Self::quadrature_row(&self.plus, j, m, p);
        let rl = Self::quadrature_row(&self.minus, l, m, p);
        let mut total = Complex64::new(0.0, 0.0);
        for (a, b, w) in self
            .noise
            .iter()
            .enumerate()
            .filter(|(_, w)| **w != 0.0)
            .map(|(k, w)| (k % self.noise.nrows(), k / self.noise.nrows(), *w))
        {
            total += rj[a] * rl[b] * w;
        }
        Ok(total)
    }
}

/// One-shot oracle correlation.
pub fn oracle_correlation(
    cfg: &SystemConfig,
    j: usize,
    l: usize,
    omega: f64,
    quad: Quadrature,
) -> Result<Complex64> {
    OraclePoint::new(cfg, omega)?.correlation(j, l, quad, cfg.theta())
}

/// Response of `b + b†` to a unit force on the `b` equation.
pub fn mechanical_response(cfg: &SystemConfig, omega: f64) -> Result<Complex64> {
    let m = cfg.mode_count();
    let (a, _) = build_system(cfg, omega);
    let mut rhs = DMatrix::<Complex64>::zeros(2 * m + 2, 1);
    rhs[(2 * m, 0)] = 1.0.into();
    let x = a.lu().solve(&rhs).ok_or(Error::Singular { omega })?;
    Ok(x[(2 * m, 0)] + x[(2 * m + 1, 0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FrequencyUnit, MechanicalParams, ModeParams};
    use crate::response::{chi_mech, chi_mech_rotating};
    use crate::spectra::SpectralPoint;

    fn detuned(g: f64) -> SystemConfig {
        SystemConfig::new(
            vec![
                ModeParams::new(0.35, 1.0, 0.0, g).with_n_o(0.2),
                ModeParams::new(-0.6, 0.8, 0.1, 0.7 * g),
                ModeParams::new(0.1, 0.6, 0.3, 0.4 * g).with_n_o(1.5),
            ],
            MechanicalParams::from_quality(0.1, 1e3, 50.0).unwrap(),
            0.6,
            FrequencyUnit::Dimensionless,
        )
        .unwrap()
    }

    #[test]
    fn uncoupled_reflection() {
        let cfg = detuned(0.0);
        let sol = solve_output(&cfg, 0.2).unwrap();
        let mode = cfg.modes()[1];
        let want = 2.0 * mode.kappa_e * crate::response::chi_cavity(mode.delta, mode.kappa(), 0.2) - 1.0;
        assert!((sol.response[(1, 1)] - want).norm() < 1e-14);
        assert!(sol.residual < 1e-14);
        assert!(sol.condition.is_finite());
    }

    #[test]
    fn dressed_susceptibility_is_exact() {
        let cfg = detuned(0.04);
        for w in [0.02, 0.0731, 0.1, -0.13] {
            let exact = mechanical_response(&cfg, w).unwrap();
            let dressed = chi_mech(&cfg, w);
            let rotating = chi_mech_rotating(&cfg, w);
            assert!((exact - dressed).norm() <= 1e-10 * exact.norm());
            assert!((exact - rotating).norm() > 1e-6 * exact.norm());
        }
    }

    #[test]
    fn matches_closed_form_detuned() {
        let cfg = detuned(0.04);
        for w in [0.01, 0.05, 0.0931, 0.1, 0.11, 0.25] {
            let oracle = OraclePoint::new(&cfg, w).unwrap();
            let point = SpectralPoint::new(&cfg, w);
            for theta in [-2.0, 0.0, 0.6, 1.3] {
                let view = point.at_angle(theta);
                for j in 0..3 {
                    for l in 0..3 {
                        for quad in [Quadrature::X, Quadrature::Y] {
                            let a = view.correlation(j, l, quad).unwrap();
                            let b = oracle.correlation(j, l, quad, theta).unwrap();
                            assert!(
                                (a - b).norm() <= 1e-8 * b.norm().max(1.0),
                                "w {w} theta {theta} ({j},{l}) {quad:?}: {a} vs {b}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn bad_index() {
        let cfg = detuned(0.04);
        assert!(matches!(
            oracle_correlation(&cfg, 3, 0, 0.1, Quadrature::X),
            Err(Error::ModeIndex { index: 3, .. })
        ));
    }
}
