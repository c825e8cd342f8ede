//! Duan variance sums, variance matrices, grid searches and the closed-form
//! extremum analytics of the identical-mode model.

use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{MechanicalParams, SystemConfig};
use crate::numeric::{half_open, linspace, par_map};
use crate::response::{simplified_scales, SimplifiedScales};
use crate::spectra::{correlation_simplified_at, AngleView, Quadrature, SpectralPoint};

/// Imaginary residue, relative to `max(1, |Re V|)`, above which a variance is
/// rejected as a transcription bug rather than dropped.
pub const IMAG_ABORT: f64 = 1e-8;

pub const DEFAULT_OMEGA_POINTS: usize = 2001;
pub const DEFAULT_OMEGA_RANGE: (f64, f64) = (0.01, 2.5);
pub const DEFAULT_THETA_POINTS: usize = 181;

/// `2001` points over `[0.01, 2.5] Ω_m`.
pub fn default_omega_grid(omega_m: f64) -> Vec<f64> {
    linspace(
        DEFAULT_OMEGA_RANGE.0 * omega_m,
        DEFAULT_OMEGA_RANGE.1 * omega_m,
        DEFAULT_OMEGA_POINTS,
    )
}

/// `181` points over `[-π, π)`.
pub fn default_theta_grid() -> Vec<f64> {
    half_open(-PI, PI, DEFAULT_THETA_POINTS)
}

fn check_pair(cfg: &SystemConfig, j: usize, l: usize) -> Result<()> {
    cfg.mode(j)?;
    cfg.mode(l)?;
    if j == l {
        return Err(Error::SamePair(j));
    }
    Ok(())
}

/// `V_jl` from an angle view; the off-diagonal terms enter as
/// `XX_jl + XX_lj` so hermiticity errors surface as imaginary residue.
pub fn duan_variance_at(view: &AngleView<'_, '_>, j: usize, l: usize, omega: f64) -> Result<f64> {
    let x = |a, b| view.correlation(a, b, Quadrature::X);
    let y = |a, b| view.correlation(a, b, Quadrature::Y);
    let v = x(j, j)? + x(l, l)? - x(j, l)? - x(l, j)? + y(j, j)? + y(l, l)? + y(j, l)? + y(l, j)?;
    checked_real(v.re, v.im, omega)
}

fn checked_real(re: f64, im: f64, omega: f64) -> Result<f64> {
    if !re.is_finite() || im.abs() > IMAG_ABORT * re.abs().max(1.0) {
        return Err(Error::ImaginaryResidue {
            real: re,
            imag: im,
            omega,
        });
    }
    Ok(re)
}

/// Duan variance `V_jl(ω)` on the full route at the config angle.
pub fn duan_variance(cfg: &SystemConfig, j: usize, l: usize, omega: f64) -> Result<f64> {
    check_pair(cfg, j, l)?;
    let point = SpectralPoint::new(cfg, omega);
    duan_variance_at(&point.at_angle(cfg.theta()), j, l, omega)
}

/// `V_jl` on a frequency grid at the config angle.
pub fn variance_curve(cfg: &SystemConfig, omega_grid: &[f64], j: usize, l: usize) -> Result<Vec<f64>> {
    check_pair(cfg, j, l)?;
    par_map(omega_grid, |&w| duan_variance(cfg, j, l, w))
        .into_iter()
        .collect()
}

/// Variance of identical modes from the simplified closed forms; `None`
/// outside the validity region.
pub fn simplified_variance(cfg: &SystemConfig, omega: f64, theta: f64) -> Result<Option<f64>> {
    let part = |same, quad| correlation_simplified_at(cfg, omega, theta, same, quad);
    let terms = (
        part(true, Quadrature::X)?,
        part(false, Quadrature::X)?,
        part(true, Quadrature::Y)?,
        part(false, Quadrature::Y)?,
    );
    Ok(match terms {
        (Some(xd), Some(xo), Some(yd), Some(yo)) => Some(2.0 * xd - 2.0 * xo + 2.0 * yd + 2.0 * yo),
        _ => None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceMatrix {
    pub omega: f64,
    pub theta: f64,
    pub m: usize,
    /// Row-major `M × M`, diagonal `NaN`.
    v: Vec<f64>,
}

impl VarianceMatrix {
    /// `None` on the diagonal or out of range.
    pub fn get(&self, j: usize, l: usize) -> Option<f64> {
        (j < self.m && l < self.m && j != l).then(|| self.v[j * self.m + l])
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.v.chunks(self.m)
    }

    /// `(j, l, V_jl)` for `j < l`.
    pub fn upper(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.m).flat_map(move |j| (j + 1..self.m).map(move |l| (j, l, self.v[j * self.m + l])))
    }

    pub fn from_upper(omega: f64, theta: f64, m: usize, values: &[(usize, usize, f64)]) -> Self {
        let mut v = vec![f64::NAN; m * m];
        for &(j, l, x) in values {
            v[j * m + l] = x;
            v[l * m + j] = x;
        }
        VarianceMatrix { omega, theta, m, v }
    }
}

pub fn variance_matrix_at(point: &SpectralPoint<'_>, theta: f64) -> Result<VarianceMatrix> {
    let m = point.config().mode_count();
    if m < 2 {
        return Err(Error::TooFewModes { needed: 2, actual: m });
    }
    let view = point.at_angle(theta);
    let omega = point.omega();
    let mut upper = Vec::with_capacity(m * (m - 1) / 2);
    for j in 0..m {
        for l in j + 1..m {
            upper.push((j, l, duan_variance_at(&view, j, l, omega)?));
        }
    }
    Ok(VarianceMatrix::from_upper(omega, theta, m, &upper))
}

/// All pairwise variances at the config angle.
pub fn variance_matrix(cfg: &SystemConfig, omega: f64) -> Result<VarianceMatrix> {
    variance_matrix_at(&SpectralPoint::new(cfg, omega), cfg.theta())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntanglementVerdict {
    pub entangled: bool,
    pub worst_pair: (usize, usize),
    pub worst_value: f64,
}

/// Entangled iff every pair sits below the shot-noise bound 2.
pub fn multipartite_verdict(vm: &VarianceMatrix) -> EntanglementVerdict {
    let mut worst = ((0, 1), f64::NEG_INFINITY);
    for (j, l, v) in vm.upper() {
        if v > worst.1 {
            worst = ((j, l), v);
        }
    }
    EntanglementVerdict {
        entangled: worst.1 < 2.0,
        worst_pair: worst.0,
        worst_value: worst.1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridOptimum {
    pub v_min: f64,
    pub omega_opt: f64,
    pub theta_opt: f64,
}

impl GridOptimum {
    fn better_than(&self, other: &GridOptimum) -> bool {
        (self.v_min, self.omega_opt, self.theta_opt) < (other.v_min, other.omega_opt, other.theta_opt)
    }

    fn offer(slot: &mut Option<GridOptimum>, candidate: GridOptimum) {
        if slot.as_ref().is_none_or(|cur| candidate.better_than(cur)) {
            *slot = Some(candidate);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairMinimum {
    pub j: usize,
    pub l: usize,
    pub optimum: GridOptimum,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    /// Minimum over the grid of the worst pair's variance.
    pub multipartite: GridOptimum,
    /// Worst pair at the multipartite optimum.
    pub pair: (usize, usize),
    pub per_pair: Vec<PairMinimum>,
}

/// Grid search over `(ω, θ)`. Ties go to the lowest ω, then the lowest θ.
pub fn scan_minimum(cfg: &SystemConfig, omega_grid: &[f64], theta_grid: &[f64]) -> Result<ScanResult> {
    if omega_grid.is_empty() {
        return Err(Error::EmptyGrid("omega"));
    }
    if theta_grid.is_empty() {
        return Err(Error::EmptyGrid("theta"));
    }
    let m = cfg.mode_count();
    if m < 2 {
        return Err(Error::TooFewModes { needed: 2, actual: m });
    }
    let pairs = m * (m - 1) / 2;

    type Partial = (Option<(GridOptimum, (usize, usize))>, Vec<Option<GridOptimum>>);
    let partials: Vec<Result<Partial>> = par_map(omega_grid, |&omega| {
        let point = SpectralPoint::new(cfg, omega);
        let mut best: Option<(GridOptimum, (usize, usize))> = None;
        let mut per_pair = vec![None; pairs];
        for &theta in theta_grid {
            let vm = variance_matrix_at(&point, theta)?;
            for (k, (_, _, v)) in vm.upper().enumerate() {
                GridOptimum::offer(&mut per_pair[k], GridOptimum { v_min: v, omega_opt: omega, theta_opt: theta });
            }
            let verdict = multipartite_verdict(&vm);
            let candidate = GridOptimum {
                v_min: verdict.worst_value,
                omega_opt: omega,
                theta_opt: theta,
            };
            if best.as_ref().is_none_or(|(cur, _)| candidate.better_than(cur)) {
                best = Some((candidate, verdict.worst_pair));
            }
        }
        Ok((best, per_pair))
    });

    let mut best: Option<(GridOptimum, (usize, usize))> = None;
    let mut per_pair: Vec<Option<GridOptimum>> = vec![None; pairs];
    for partial in partials {
        let (b, pp) = partial?;
        if let Some((candidate, pair)) = b {
            if best.as_ref().is_none_or(|(cur, _)| candidate.better_than(cur)) {
                best = Some((candidate, pair));
            }
        }
        for (slot, candidate) in per_pair.iter_mut().zip(pp) {
            if let Some(c) = candidate {
                GridOptimum::offer(slot, c);
            }
        }
    }
    let (multipartite, pair) = best.expect("grids are non-empty");
    let labels = (0..m).flat_map(|j| (j + 1..m).map(move |l| (j, l)));
    Ok(ScanResult {
        multipartite,
        pair,
        per_pair: labels
            .zip(per_pair)
            .map(|((j, l), o)| PairMinimum {
                j,
                l,
                optimum: o.expect("grids are non-empty"),
            })
            .collect(),
    })
}

/// Zooming grid search for the minimum of `V_jl(ω)` at angle `theta` on
/// `[lo, hi]`: each round re-grids the two cells around the current best.
/// Returns `(ω, V)`.
pub fn refine_minimum(
    cfg: &SystemConfig,
    j: usize,
    l: usize,
    theta: f64,
    (mut lo, mut hi): (f64, f64),
    points: usize,
    rounds: usize,
) -> Result<(f64, f64)> {
    check_pair(cfg, j, l)?;
    if points < 3 || !(lo < hi) {
        return Err(Error::EmptyGrid("omega"));
    }
    let mut best = (f64::NAN, f64::INFINITY);
    for _ in 0..rounds.max(1) {
        let grid = linspace(lo, hi, points);
        let values: Vec<Result<f64>> = par_map(&grid, |&w| {
            let point = SpectralPoint::new(cfg, w);
            duan_variance_at(&point.at_angle(theta), j, l, w)
        });
        let mut k_best = 0;
        for (k, v) in values.into_iter().enumerate() {
            let v = v?;
            if v < best.1 {
                best = (grid[k], v);
                k_best = k;
            } else if grid[k] == best.0 {
                k_best = k;
            }
        }
        lo = grid[k_best.saturating_sub(1)];
        hi = grid[(k_best + 1).min(points - 1)];
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticOptimum {
    pub v_min: f64,
    /// Signed `δ` at the minimum; the sign follows `cot θ`.
    pub delta_opt: f64,
}

fn thermal_rate(mech: &MechanicalParams) -> f64 {
    mech.omega_m * mech.n_th / mech.q_m()
}

/// Minimum of the simplified variance over `δ` with `Γ̃` held at its value in
/// `scales`: `V_min = (2n̄_o+1)[2 - 2ηΓ̃ sin²θ / (MΓ̃ + 4Ω n̄/Q)]` at
/// `δ_opt = (MΓ̃ + 4Ω n̄/Q) cot θ`.
pub fn analytic_vmin(
    scales: &SimplifiedScales,
    m: usize,
    theta: f64,
    mech: &MechanicalParams,
    n_o: f64,
) -> Result<AnalyticOptimum> {
    let (s, c) = theta.sin_cos();
    if s.abs() < 1e-12 {
        return Err(Error::DegenerateAngle);
    }
    let m = m as f64;
    let gamma = scales.gamma_meas;
    let denom = m * gamma + 4.0 * thermal_rate(mech);
    Ok(AnalyticOptimum {
        v_min: (2.0 * n_o + 1.0) * (2.0 - 2.0 * scales.eta * gamma * s * s / denom),
        delta_opt: denom * c / s,
    })
}

/// `2 - (2η/M) sin²θ`, the limit `MΓ̃ ≫ 4Ω n̄/Q`.
pub fn strong_coupling_vmin(eta: f64, m: usize, theta: f64) -> f64 {
    2.0 - 2.0 * eta / m as f64 * theta.sin().powi(2)
}

/// `2 - (η Q Γ̃ / 2Ω n̄) sin²θ`, the limit `MΓ̃ ≪ 4Ω n̄/Q`.
pub fn weak_coupling_vmin(eta: f64, gamma_meas: f64, theta: f64, mech: &MechanicalParams) -> f64 {
    2.0 - eta * gamma_meas / (2.0 * thermal_rate(mech)) * theta.sin().powi(2)
}

/// Smallest `|δ|` beyond which the simplified variance drops below 2.
/// At `n̄_o = 0` this is `(MΓ̃/2 + 2Ω n̄/Q)|cot θ|`. With optical occupancy the
/// shot-noise floor rises to `2(2n̄_o+1)` and the band may close, in which case
/// the result is infinite.
pub fn entanglement_threshold_delta(
    scales: &SimplifiedScales,
    m: usize,
    theta: f64,
    mech: &MechanicalParams,
    n_o: f64,
) -> Result<f64> {
    let (s, c) = theta.sin_cos();
    if s.abs() < 1e-12 {
        return Err(Error::DegenerateAngle);
    }
    let gamma = scales.gamma_meas;
    if gamma == 0.0 || scales.eta == 0.0 {
        return Ok(f64::INFINITY);
    }
    // V/(2n̄_o+1) - 2 = 4η(a x² - b x) with x = Γ̃/δ.
    let a = 2.0 * c * c * (m as f64 / 4.0 + thermal_rate(mech) / gamma);
    let b = (s * c).abs();
    let r = (1.0 - 1.0 / (2.0 * n_o + 1.0)) / (2.0 * scales.eta);
    let disc = b * b - 4.0 * a * r;
    if disc < 0.0 {
        return Ok(f64::INFINITY);
    }
    let x_max = if r == 0.0 { b / a } else { (b + disc.sqrt()) / (2.0 * a) };
    if x_max <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(gamma / x_max)
}

/// `ω ≥ 0` with `(Ω² - ω²)/2Ω = δ`, when it exists.
pub fn frequency_for_delta(omega_m: f64, delta: f64) -> Option<f64> {
    let w2 = omega_m * omega_m - 2.0 * omega_m * delta;
    (w2 >= 0.0).then(|| w2.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticExtremum {
    pub v_min: f64,
    pub delta_opt: f64,
    pub omega_opt: f64,
}

/// Analytic optimum with `Γ̃` evaluated self-consistently at `ω_opt`.
pub fn analytic_optimum(cfg: &SystemConfig, theta: f64) -> Result<AnalyticExtremum> {
    let mech = cfg.mech();
    let n_o = cfg.modes()[0].n_o;
    let mut omega = mech.omega_m;
    let mut opt = analytic_vmin(&simplified_scales(cfg, omega)?, cfg.mode_count(), theta, mech, n_o)?;
    for _ in 0..100 {
        let next = frequency_for_delta(mech.omega_m, opt.delta_opt).ok_or_else(|| {
            Error::validation("theta", "optimal detuning lies below zero frequency")
        })?;
        opt = analytic_vmin(&simplified_scales(cfg, next)?, cfg.mode_count(), theta, mech, n_o)?;
        if (next - omega).abs() <= 1e-14 * mech.omega_m {
            omega = next;
            break;
        }
        omega = next;
    }
    Ok(AnalyticExtremum {
        v_min: opt.v_min,
        delta_opt: opt.delta_opt,
        omega_opt: omega,
    })
}

/// Threshold `|δ|` with `Γ̃` evaluated self-consistently at the band edge.
pub fn analytic_threshold(cfg: &SystemConfig, theta: f64) -> Result<f64> {
    let mech = cfg.mech();
    let n_o = cfg.modes()[0].n_o;
    let m = cfg.mode_count();
    let sign = (theta.cos() / theta.sin()).signum();
    let mut omega = mech.omega_m;
    let mut delta = entanglement_threshold_delta(&simplified_scales(cfg, omega)?, m, theta, mech, n_o)?;
    for _ in 0..100 {
        if !delta.is_finite() {
            return Ok(delta);
        }
        let Some(next) = frequency_for_delta(mech.omega_m, sign * delta) else {
            return Ok(delta);
        };
        delta = entanglement_threshold_delta(&simplified_scales(cfg, next)?, m, theta, mech, n_o)?;
        if (next - omega).abs() <= 1e-14 * mech.omega_m {
            break;
        }
        omega = next;
    }
    Ok(delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FrequencyUnit, ModeParams};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn identical(m: usize, g_over_omega: f64, theta: f64) -> SystemConfig {
        let omega_m = 0.1;
        SystemConfig::identical(
            m,
            ModeParams::new(0.0, 1.0, 0.0, g_over_omega * omega_m),
            MechanicalParams::from_quality(omega_m, 1e6, 1e3).unwrap(),
            theta,
            FrequencyUnit::Dimensionless,
        )
        .unwrap()
    }

    #[test]
    fn same_pair_rejected() {
        let cfg = identical(2, 0.3, FRAC_PI_4);
        assert!(matches!(duan_variance(&cfg, 1, 1, 0.05), Err(Error::SamePair(1))));
        assert!(matches!(duan_variance(&cfg, 0, 2, 0.05), Err(Error::ModeIndex { .. })));
    }

    #[test]
    fn uncoupled_is_shot_noise() {
        let cfg = identical(3, 0.0, 0.4);
        for w in [0.01, 0.1, 0.2] {
            assert!((duan_variance(&cfg, 0, 2, w).unwrap() - 2.0).abs() < 1e-12);
        }
        let scan = scan_minimum(&cfg, &linspace(0.01, 0.2, 7), &[-1.0, 0.5]).unwrap();
        assert!((scan.multipartite.v_min - 2.0).abs() < 1e-12);
    }

    #[test]
    fn right_angle_is_exactly_shot_noise_for_resonant_identical_modes() {
        let cfg = identical(2, 0.3, FRAC_PI_2);
        for w in [0.03, 0.09, 0.12] {
            assert!((duan_variance(&cfg, 0, 1, w).unwrap() - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn verdict_reports_worst_pair() {
        let vm = VarianceMatrix::from_upper(0.1, 0.0, 3, &[(0, 1, 1.9), (0, 2, 1.9), (1, 2, 1.9)]);
        let v = multipartite_verdict(&vm);
        assert!(v.entangled);
        assert_eq!(v.worst_value, 1.9);
        let vm = VarianceMatrix::from_upper(0.1, 0.0, 3, &[(0, 1, 1.9), (0, 2, 2.05), (1, 2, 1.8)]);
        let v = multipartite_verdict(&vm);
        assert!(!v.entangled);
        assert_eq!(v.worst_pair, (0, 2));
        assert_eq!(vm.get(2, 0), Some(2.05));
        assert_eq!(vm.get(1, 1), None);
    }

    #[test]
    fn identical_modes_pair_invariant() {
        let cfg = identical(4, 0.5, FRAC_PI_4);
        let vm = variance_matrix(&cfg, 0.044).unwrap();
        let reference = vm.get(0, 1).unwrap();
        for (_, _, v) in vm.upper() {
            assert!((v - reference).abs() < 1e-10);
        }
    }

    #[test]
    fn scan_errors_and_tie_break() {
        let cfg = identical(2, 0.0, 0.0);
        assert!(matches!(scan_minimum(&cfg, &[], &[0.0]), Err(Error::EmptyGrid("omega"))));
        assert!(matches!(scan_minimum(&cfg, &[0.1], &[]), Err(Error::EmptyGrid("theta"))));
        let scan = scan_minimum(&cfg, &[0.2, 0.05, 0.1], &[0.5, -0.5]).unwrap();
        assert_eq!(scan.multipartite.omega_opt, 0.05);
        assert_eq!(scan.multipartite.theta_opt, -0.5);
        assert!(matches!(scan_minimum(&identical(1, 0.1, 0.0), &[0.1], &[0.0]), Err(Error::TooFewModes { .. })));
    }

    #[test]
    fn analytic_limits() {
        let cfg = identical(10, 0.1, FRAC_PI_4);
        let mut mech = *cfg.mech();
        mech.n_th = 0.0;
        let scales = simplified_scales(&cfg, 0.05).unwrap();
        let opt = analytic_vmin(&scales, 10, FRAC_PI_4, &mech, 0.0).unwrap();
        assert!((opt.v_min - 1.9).abs() < 1e-12);
        assert!((strong_coupling_vmin(1.0, 10, FRAC_PI_4) - 1.9).abs() < 1e-12);
        let opt = analytic_vmin(&scales, 10, FRAC_PI_2, &mech, 0.0).unwrap();
        assert!((opt.v_min - 1.8).abs() < 1e-12);
        assert!(opt.delta_opt.abs() < 1e-15);
        assert!(matches!(analytic_vmin(&scales, 10, 0.0, &mech, 0.0), Err(Error::DegenerateAngle)));

        // Weak coupling: thermal rate dominates.
        let hot = MechanicalParams::from_quality(0.1, 1e2, 1e4).unwrap();
        let full = analytic_vmin(&scales, 10, 0.7, &hot, 0.0).unwrap().v_min;
        let weak = weak_coupling_vmin(1.0, scales.gamma_meas, 0.7, &hot);
        assert!((full - weak).abs() < 1e-3 * (2.0 - weak));
    }

    #[test]
    fn threshold_values() {
        let cfg = identical(1, 0.3, FRAC_PI_4);
        let mut mech = *cfg.mech();
        mech.n_th = 0.0;
        let scales = simplified_scales(&cfg, 0.05).unwrap();
        let t = entanglement_threshold_delta(&scales, 1, FRAC_PI_4, &mech, 0.0).unwrap();
        assert!((t - scales.gamma_meas / 2.0).abs() < 1e-15);
        let t = entanglement_threshold_delta(&scales, 1, FRAC_PI_2, &mech, 0.0).unwrap();
        assert!(t < 1e-15);
        assert!(entanglement_threshold_delta(&scales, 1, PI, &mech, 0.0).is_err());
        // A large optical occupancy closes the band.
        let t = entanglement_threshold_delta(&scales, 1, FRAC_PI_4, &mech, 50.0).unwrap();
        assert!(t.is_infinite());
    }

    #[test]
    fn threshold_matches_simplified_sign_change() {
        let cfg = identical(2, 0.3, FRAC_PI_4).with_modes(vec![ModeParams::new(0.0, 1.0, 0.0, 0.03).with_n_o(0.05); 2]).unwrap();
        let scales = simplified_scales(&cfg, 0.09).unwrap();
        let t = entanglement_threshold_delta(&scales, 2, FRAC_PI_4, cfg.mech(), 0.05).unwrap();
        // Freeze Γ̃ by evaluating the closed form directly in δ.
        let v = |delta: f64| {
            let x = scales.gamma_meas / delta;
            let mech = cfg.mech();
            let a = 2.0 * 0.5 * (2.0 / 4.0 + mech.omega_m * mech.n_th / mech.q_m() / scales.gamma_meas);
            1.1 * (2.0 + 4.0 * (a * x * x - 0.5 * x))
        };
        assert!((v(t) - 2.0).abs() < 1e-9);
        assert!(v(t * 1.01) < 2.0 && v(t * 0.99) > 2.0);
    }

    #[test]
    fn simplified_variance_matches_full_away_from_resonance() {
        let cfg = identical(2, 0.3, FRAC_PI_4);
        for w in [0.03, 0.08, 0.15] {
            let full = duan_variance(&cfg, 0, 1, w).unwrap();
            let simple = simplified_variance(&cfg, w, FRAC_PI_4).unwrap().unwrap();
            assert!(((full - simple) / full).abs() < 0.05, "{w}: {full} {simple}");
        }
        assert_eq!(simplified_variance(&cfg, 0.1, FRAC_PI_4).unwrap(), None);
    }

    #[test]
    fn frequency_inversion() {
        let w = frequency_for_delta(0.1, 0.004).unwrap();
        assert!(((0.01 - w * w) / 0.2 - 0.004).abs() < 1e-15);
        assert_eq!(frequency_for_delta(0.1, 0.06), None);
    }
}
