//! Seeded Monte Carlo sampling of fabrication disorder in `G_j` and
//! `κ_e,j`, and ensemble statistics of the pair variances.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::entanglement::variance_matrix_at;
use crate::error::{Error, Result};
use crate::model::SystemConfig;
use crate::numeric::par_map;
use crate::spectra::SpectralPoint;

/// Draws rejected in a row before giving up on one parameter.
const MAX_REJECTIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisorderTargets {
    pub coupling: bool,
    pub kappa_e: bool,
}

impl Default for DisorderTargets {
    fn default() -> Self {
        DisorderTargets {
            coupling: true,
            kappa_e: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    /// Standard deviation relative to the mean.
    pub sigma_rel: f64,
    pub seed: u64,
    pub samples: usize,
    #[serde(default)]
    pub targets: DisorderTargets,
}

impl DisorderSpec {
    pub fn new(sigma_rel: f64, seed: u64, samples: usize) -> Self {
        DisorderSpec {
            sigma_rel,
            seed,
            samples,
            targets: DisorderTargets::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_rel.is_finite() && self.sigma_rel >= 0.0) {
            return Err(Error::Disorder("sigma_rel must be finite and >= 0".into()));
        }
        if self.sigma_rel >= 0.5 {
            return Err(Error::Disorder(format!(
                "sigma_rel = {} is too wide for rejection sampling (must be < 0.5)",
                self.sigma_rel
            )));
        }
        if self.samples == 0 {
            return Err(Error::Disorder("samples must be >= 1".into()));
        }
        Ok(())
    }
}

/// Normal draw around `mean` keeping the sign of `mean`; zero means are kept.
fn draw(rng: &mut ChaCha8Rng, mean: f64, sigma_rel: f64) -> Result<f64> {
    if mean == 0.0 || sigma_rel == 0.0 {
        return Ok(mean);
    }
    let normal = Normal::new(mean, sigma_rel * mean.abs())
        .map_err(|e| Error::Disorder(e.to_string()))?;
    for _ in 0..MAX_REJECTIONS {
        let x = normal.sample(rng);
        if x != 0.0 && x.signum() == mean.signum() {
            return Ok(x);
        }
    }
    Err(Error::Disorder(format!(
        "no draw with the sign of {mean} after {MAX_REJECTIONS} attempts"
    )))
}

/// Generator for sample `index`: one ChaCha stream per sample.
fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// One disordered copy of `base`, independent of every other sample index.
pub fn sample_config(base: &SystemConfig, spec: &DisorderSpec, index: usize) -> Result<SystemConfig> {
    let mut rng = sample_rng(spec.seed, index);
    let mut modes = base.modes().to_vec();
    for mode in &mut modes {
        if spec.targets.coupling {
            mode.g_coupling = draw(&mut rng, mode.g_coupling, spec.sigma_rel)?;
        }
        if spec.targets.kappa_e {
            mode.kappa_e = draw(&mut rng, mode.kappa_e, spec.sigma_rel)?;
        }
    }
    base.with_modes(modes)
}

pub fn sample_configs(base: &SystemConfig, spec: &DisorderSpec) -> Result<Vec<SystemConfig>> {
    spec.validate()?;
    (0..spec.samples).map(|s| sample_config(base, spec, s)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub omega_grid: Vec<f64>,
    pub theta: f64,
    /// `(j, l)` with `j < l`.
    pub pairs: Vec<(usize, usize)>,
    /// Indexed `[grid_index * pairs.len() + pair_index]`.
    pub min: Vec<f64>,
    pub mean: Vec<f64>,
    pub max: Vec<f64>,
    /// One trace per sample, same layout as `min`.
    pub traces: Vec<Vec<f64>>,
}

impl EnsembleStats {
    pub fn index(&self, grid_index: usize, pair_index: usize) -> usize {
        grid_index * self.pairs.len() + pair_index
    }

    pub fn samples(&self) -> usize {
        self.traces.len()
    }
}

fn sample_trace(cfg: &SystemConfig, omega_grid: &[f64], theta: f64) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for &w in omega_grid {
        let vm = variance_matrix_at(&SpectralPoint::new(cfg, w), theta)?;
        out.extend(vm.upper().map(|(_, _, v)| v));
    }
    Ok(out)
}

/// Pair variances of every disorder sample on the full route.
pub fn ensemble_variance(
    base: &SystemConfig,
    spec: &DisorderSpec,
    omega_grid: &[f64],
    theta: f64,
) -> Result<EnsembleStats> {
    if omega_grid.is_empty() {
        return Err(Error::EmptyGrid("omega"));
    }
    let m = base.mode_count();
    if m < 2 {
        return Err(Error::TooFewModes { needed: 2, actual: m });
    }
    let configs = sample_configs(base, spec)?;
    let traces: Vec<Vec<f64>> = par_map(&configs, |cfg| sample_trace(cfg, omega_grid, theta))
        .into_iter()
        .collect::<Result<_>>()?;

    let len = traces[0].len();
    let mut min = vec![f64::INFINITY; len];
    let mut max = vec![f64::NEG_INFINITY; len];
    let mut sum = vec![0.0; len];
    for trace in &traces {
        for k in 0..len {
            min[k] = min[k].min(trace[k]);
            max[k] = max[k].max(trace[k]);
            sum[k] += trace[k];
        }
    }
    let n = traces.len() as f64;
    let mean = sum
        .iter()
        .zip(min.iter().zip(&max))
        .map(|(s, (lo, hi))| (s / n).clamp(*lo, *hi))
        .collect();
    Ok(EnsembleStats {
        omega_grid: omega_grid.to_vec(),
        theta,
        pairs: (0..m).flat_map(|j| (j + 1..m).map(move |l| (j, l))).collect(),
        min,
        mean,
        max,
        traces,
    })
}
