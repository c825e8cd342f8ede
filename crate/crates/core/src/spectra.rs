//! Output-quadrature noise correlations `⟨ΔQ_j(ω) ΔQ_l(-ω)⟩`.
//!
//! The full route evaluates the merged closed form including optical thermal
//! occupancies; the `n̄_o = 0` case is the same code path. Both quadratures
//! share one implementation: writing `Q_j = (p a_out,j + p* a†_out,j)/√2`
//! with `p = e^{-iθ}` for X and `p = -i e^{-iθ}` for Y, the kernel
//! `K_j = p* χ*_R,j(-ω) - p χ_R,j(ω)` is `ζ_j` for X and `iΞ_j` for Y, which
//! flips the sign of the interference terms for Y and turns `ζ_jζ*_l` into
//! `Ξ_jΞ*_l`.
//!
//! The simplified route is the identical-mode, zero-detuning closed form,
//! valid away from `|δ₋| ≲ γ_m` and `|δ| ≲ γ_m`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    CorrelationEntry, Route, SpectrumMetadata, SpectrumResult, SpectrumValues, SystemConfig,
};
use crate::numeric::{par_map, NeumaierSum};
use crate::oracle;
use crate::response::{
    chi_cavity, chi_cavity_conj_reflected, chi_mech, simplified_scales, xi, zeta,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Quadrature {
    X,
    Y,
}

impl Quadrature {
    /// Coefficient `p` of `a_out` in `Q = (p a_out + p* a†_out)/√2`.
    pub fn phase(self, theta: f64) -> Complex64 {
        let p = Complex64::from_polar(1.0, -theta);
        match self {
            Quadrature::X => p,
            Quadrature::Y => -I * p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairCorrelation {
    pub j: usize,
    pub l: usize,
    pub omega: f64,
    pub xx: Complex64,
    pub yy: Complex64,
    pub route: Route,
}

/// Angle-independent quantities at one frequency, shared by every pair and
/// quadrature angle.
#[derive(Debug, Clone)]
pub struct SpectralPoint<'a> {
    cfg: &'a SystemConfig,
    omega: f64,
    /// `χ_R,n(ω)`
    chi: Vec<Complex64>,
    /// `χ*_R,n(-ω)`
    chi_conj_reflected: Vec<Complex64>,
    f_m: Complex64,
    /// `|χ_m(ω)|² (n̄_th + 1) + |χ_m(-ω)|² n̄_th`
    thermal: f64,
    /// `Σ_n κ_n G_n² |χ_R,n(ω)|² (n̄_o,n + 1)`
    backaction_vacuum: f64,
    /// `Σ_n κ_n G_n² |χ_R,n(-ω)|² n̄_o,n`
    backaction_thermal: f64,
}

impl<'a> SpectralPoint<'a> {
    pub fn new(cfg: &'a SystemConfig, omega: f64) -> Self {
        let chi: Vec<Complex64> = cfg
            .modes()
            .iter()
            .map(|m| chi_cavity(m.delta, m.kappa(), omega))
            .collect();
        let chi_conj_reflected: Vec<Complex64> = cfg
            .modes()
            .iter()
            .map(|m| chi_cavity_conj_reflected(m.delta, m.kappa(), omega))
            .collect();
        let chi_m = chi_mech(cfg, omega);
        let chi_m_reflected = chi_mech(cfg, -omega);
        let n_th = cfg.mech().n_th;

        let mut vacuum = NeumaierSum::default();
        let mut thermal_optical = NeumaierSum::default();
        for (n, mode) in cfg.modes().iter().enumerate() {
            let weight = mode.kappa() * mode.g_coupling.powi(2);
            vacuum.add(weight * chi[n].norm_sqr() * (mode.n_o + 1.0));
            thermal_optical.add(weight * chi_conj_reflected[n].norm_sqr() * mode.n_o);
        }

        SpectralPoint {
            cfg,
            omega,
            chi,
            chi_conj_reflected,
            f_m: chi_m_reflected.conj() - chi_m,
            thermal: chi_m.norm_sqr() * (n_th + 1.0) + chi_m_reflected.norm_sqr() * n_th,
            backaction_vacuum: vacuum.total(),
            backaction_thermal: thermal_optical.total(),
        }
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn config(&self) -> &SystemConfig {
        self.cfg
    }

    pub fn f_m(&self) -> Complex64 {
        self.f_m
    }

    /// Fix the quadrature angle, precomputing `ζ_j` and `Ξ_j` for all modes.
    pub fn at_angle(&self, theta: f64) -> AngleView<'_, 'a> {
        let e = Complex64::from_polar(1.0, theta);
        let zeta: Vec<Complex64> = self
            .chi
            .iter()
            .zip(&self.chi_conj_reflected)
            .map(|(c, cr)| e * cr - e.conj() * c)
            .collect();
        let xi: Vec<Complex64> = self
            .chi
            .iter()
            .zip(&self.chi_conj_reflected)
            .map(|(c, cr)| e * cr + e.conj() * c)
            .collect();
        AngleView {
            point: self,
            theta,
            zeta,
            xi,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AngleView<'p, 'a> {
    point: &'p SpectralPoint<'a>,
    theta: f64,
    zeta: Vec<Complex64>,
    xi: Vec<Complex64>,
}

impl AngleView<'_, '_> {
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn zeta(&self, j: usize) -> Complex64 {
        self.zeta[j]
    }

    pub fn xi(&self, j: usize) -> Complex64 {
        self.xi[j]
    }

    fn kernel(&self, j: usize, quad: Quadrature) -> Complex64 {
        match quad {
            Quadrature::X => self.zeta[j],
            Quadrature::Y => I * self.xi[j],
        }
    }

    /// `⟨ΔQ_j(ω) ΔQ_l(-ω)⟩` on the full route. Indices are 0-based.
    pub fn correlation(&self, j: usize, l: usize, quad: Quadrature) -> Result<Complex64> {
        let pt = self.point;
        let modes = pt.cfg.modes();
        let count = modes.len();
        for index in [j, l] {
            if index >= count {
                return Err(Error::ModeIndex {
                    index,
                    modes: count,
                });
            }
        }
        let (mj, ml) = (&modes[j], &modes[l]);
        let p = quad.phase(self.theta);
        let kj = self.kernel(j, quad);
        let kl = self.kernel(l, quad);
        let chi_j = pt.chi[j];
        let chi_l = pt.chi[l];
        let chi_j_reflected = pt.chi_conj_reflected[j].conj();
        let chi_l_conj_reflected = pt.chi_conj_reflected[l];
        let f = pt.f_m;
        let pref = (mj.kappa_e * ml.kappa_e).sqrt() * mj.g_coupling * ml.g_coupling;
        let kk = kj * kl.conj();

        let shot = if j == l { 0.5 * (2.0 * mj.n_o + 1.0) } else { 0.0 };
        let mechanical = 2.0 * pt.cfg.mech().gamma_m * pref * kk * pt.thermal;
        let interference_vacuum = -pref
            * (p * (2.0 * mj.kappa() * chi_j - 1.0) * f.conj() * kl.conj() * chi_j.conj()
                * (mj.n_o + 1.0)
                + p.conj() * (2.0 * ml.kappa() * chi_l.conj() - 1.0) * f * kj * chi_l
                    * (ml.n_o + 1.0));
        let backaction_vacuum = 2.0 * pref * f.norm_sqr() * kk * pt.backaction_vacuum;
        let interference_thermal = -pref
            * (p.conj()
                * (2.0 * mj.kappa() * chi_j_reflected.conj() - 1.0)
                * f.conj()
                * kl.conj()
                * chi_j_reflected
                * mj.n_o
                + p * (2.0 * ml.kappa() * chi_l_conj_reflected.conj() - 1.0)
                    * f
                    * kj
                    * chi_l_conj_reflected
                    * ml.n_o);
        let backaction_thermal = 2.0 * pref * f.norm_sqr() * kk * pt.backaction_thermal;

        Ok(shot
            + mechanical
            + interference_vacuum
            + backaction_vacuum
            + interference_thermal
            + backaction_thermal)
    }
}

pub fn xx_correlation_full(cfg: &SystemConfig, j: usize, l: usize, omega: f64) -> Result<Complex64> {
    SpectralPoint::new(cfg, omega)
        .at_angle(cfg.theta())
        .correlation(j, l, Quadrature::X)
}

pub fn yy_correlation_full(cfg: &SystemConfig, j: usize, l: usize, omega: f64) -> Result<Complex64> {
    SpectralPoint::new(cfg, omega)
        .at_angle(cfg.theta())
        .correlation(j, l, Quadrature::Y)
}

/// `ζ_j` for mode `j` of `cfg`, as used by the full route.
pub fn mode_zeta(cfg: &SystemConfig, j: usize, omega: f64) -> Result<Complex64> {
    Ok(zeta(cfg.mode(j)?, omega, cfg.theta()))
}

/// `Ξ_j` for mode `j` of `cfg`, as used by the full route.
pub fn mode_xi(cfg: &SystemConfig, j: usize, omega: f64) -> Result<Complex64> {
    Ok(xi(cfg.mode(j)?, omega, cfg.theta()))
}

fn check_simplified_preconditions(cfg: &SystemConfig) -> Result<()> {
    if !cfg.has_identical_modes() {
        return Err(Error::NotIdentical(
            "modes differ in detuning, decay, coupling or occupancy".into(),
        ));
    }
    if cfg.modes()[0].delta != 0.0 {
        return Err(Error::validation(
            "modes.delta",
            "simplified closed forms assume zero detuning",
        ));
    }
    Ok(())
}

/// Identical-mode closed form. `None` marks a frequency outside the validity
/// region (`|δ₋|` or `|δ|` below `10 γ_m`).
fn simplified(
    cfg: &SystemConfig,
    omega: f64,
    theta: f64,
    same_mode: bool,
    quad: Quadrature,
) -> Result<Option<f64>> {
    check_simplified_preconditions(cfg)?;
    let scales = simplified_scales(cfg, omega)?;
    let mech = cfg.mech();
    if !scales.is_valid(mech.gamma_m) {
        return Ok(None);
    }
    let m = cfg.mode_count() as f64;
    let occupancy = 2.0 * cfg.modes()[0].n_o + 1.0;
    let sign = match quad {
        Quadrature::X => 1.0,
        Quadrature::Y => -1.0,
    };
    let cos_factor = 1.0 - sign * (2.0 * theta).cos();
    let ratio = scales.gamma_meas / scales.delta;
    let thermal = mech.omega_m * scales.delta * mech.n_th / mech.q_m()
        * (scales.delta_minus.powi(-2) + scales.delta_plus.powi(-2));
    let shot = if same_mode { 0.5 * occupancy } else { 0.0 };
    let value = shot
        + scales.eta * m * (0.5 * ratio).powi(2) * cos_factor * occupancy
        + scales.eta * ratio * (thermal * cos_factor + sign * (2.0 * theta).sin() / 2.0) * occupancy;
    Ok(Some(value))
}

pub fn xx_correlation_simplified(
    cfg: &SystemConfig,
    omega: f64,
    same_mode: bool,
) -> Result<Option<f64>> {
    simplified(cfg, omega, cfg.theta(), same_mode, Quadrature::X)
}

pub fn yy_correlation_simplified(
    cfg: &SystemConfig,
    omega: f64,
    same_mode: bool,
) -> Result<Option<f64>> {
    simplified(cfg, omega, cfg.theta(), same_mode, Quadrature::Y)
}

/// Simplified correlation at an explicit angle.
pub fn correlation_simplified_at(
    cfg: &SystemConfig,
    omega: f64,
    theta: f64,
    same_mode: bool,
    quad: Quadrature,
) -> Result<Option<f64>> {
    simplified(cfg, omega, theta, same_mode, quad)
}

/// All `M × M` pairs on the full route, row-major in `(j, l)`.
pub fn correlation_matrix(cfg: &SystemConfig, omega: f64) -> Vec<PairCorrelation> {
    let point = SpectralPoint::new(cfg, omega);
    let view = point.at_angle(cfg.theta());
    let m = cfg.mode_count();
    let mut out = Vec::with_capacity(m * m);
    for j in 0..m {
        for l in 0..m {
            out.push(PairCorrelation {
                j,
                l,
                omega,
                xx: view.correlation(j, l, Quadrature::X).expect("indices in range"),
                yy: view.correlation(j, l, Quadrature::Y).expect("indices in range"),
                route: Route::Full,
            });
        }
    }
    out
}

/// Every `(j, l)` with `j <= l`, 0-based.
pub fn upper_pairs(m: usize) -> Vec<(usize, usize)> {
    (0..m).flat_map(|j| (j..m).map(move |l| (j, l))).collect()
}

/// Correlations on a frequency grid for the requested pairs, on one route.
pub fn sweep(
    cfg: &SystemConfig,
    omega_grid: &[f64],
    pairs: &[(usize, usize)],
    route: Route,
) -> Result<SpectrumResult> {
    for &(j, l) in pairs {
        cfg.mode(j)?;
        cfg.mode(l)?;
    }
    if matches!(route, Route::Simplified) {
        check_simplified_preconditions(cfg)?;
    }
    let theta = cfg.theta();
    let rows: Vec<Result<Vec<CorrelationEntry>>> = par_map(omega_grid, |&omega| {
        match route {
            Route::Full => {
                let point = SpectralPoint::new(cfg, omega);
                let view = point.at_angle(theta);
                pairs
                    .iter()
                    .map(|&(j, l)| {
                        Ok(CorrelationEntry {
                            xx: view.correlation(j, l, Quadrature::X)?,
                            yy: view.correlation(j, l, Quadrature::Y)?,
                            valid: true,
                        })
                    })
                    .collect()
            }
            Route::Oracle => {
                let point = oracle::OraclePoint::new(cfg, omega)?;
                pairs
                    .iter()
                    .map(|&(j, l)| {
                        Ok(CorrelationEntry {
                            xx: point.correlation(j, l, Quadrature::X, theta)?,
                            yy: point.correlation(j, l, Quadrature::Y, theta)?,
                            valid: true,
                        })
                    })
                    .collect()
            }
            Route::Simplified => pairs
                .iter()
                .map(|&(j, l)| {
                    let xx = simplified(cfg, omega, theta, j == l, Quadrature::X)?;
                    let yy = simplified(cfg, omega, theta, j == l, Quadrature::Y)?;
                    Ok(match (xx, yy) {
                        (Some(xx), Some(yy)) => CorrelationEntry {
                            xx: xx.into(),
                            yy: yy.into(),
                            valid: true,
                        },
                        _ => CorrelationEntry {
                            xx: Complex64::new(f64::NAN, f64::NAN),
                            yy: Complex64::new(f64::NAN, f64::NAN),
                            valid: false,
                        },
                    })
                })
                .collect(),
        }
    });
    let mut entries = Vec::with_capacity(omega_grid.len() * pairs.len());
    for row in rows {
        entries.extend(row?);
    }
    SpectrumResult::new(
        omega_grid.to_vec(),
        pairs.to_vec(),
        SpectrumValues::Correlations(entries),
        SpectrumMetadata {
            config_hash: cfg.config_hash(),
            theta,
            route,
        },
    )
}
