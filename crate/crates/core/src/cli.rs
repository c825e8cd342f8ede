//! Command-line front end. Frequencies on the command line are in units of
//! `Ω_m`; files report both config units and `ω/Ω_m`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::disorder::{ensemble_variance, DisorderSpec};
use crate::entanglement::{
    analytic_optimum, analytic_threshold, default_theta_grid, duan_variance, duan_variance_at,
    refine_minimum, scan_minimum, simplified_variance, variance_matrix, DEFAULT_OMEGA_POINTS,
    DEFAULT_OMEGA_RANGE,
};
use crate::error::{Error, Result};
use crate::model::{parse_config, ConfigDocument, Route, SpectrumValues, SystemConfig};
use crate::numeric::{linspace, par_map};
use crate::oracle::OraclePoint;
use crate::presets::{self, PresetName};
use crate::response::steady_state_at_detuning;
use crate::spectra::{sweep, upper_pairs, Quadrature, SpectralPoint};

pub const THREADS_ENV: &str = "COMB_ENTANGLER_THREADS";

#[derive(Debug, Parser)]
#[command(name = "comb-entangler", version, about = "Output-noise spectra and multicolor entanglement of comb-driven optomechanical cavities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quadrature correlations XX and YY on a frequency grid.
    Spectrum(SpectrumArgs),
    /// Pair variances on a frequency (and optionally angle) grid.
    Variance(VarianceArgs),
    /// Disorder ensemble envelope of the pair variances.
    Ensemble(EnsembleArgs),
    /// Regenerate the data of a named preset.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    Full,
    Simplified,
    Oracle,
}

impl From<RouteArg> for Route {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::Full => Route::Full,
            RouteArg::Simplified => Route::Simplified,
            RouteArg::Oracle => Route::Oracle,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GridArgs {
    /// Lowest frequency, in units of Ω_m.
    #[arg(long, default_value_t = DEFAULT_OMEGA_RANGE.0)]
    pub omega_min: f64,
    /// Highest frequency, in units of Ω_m.
    #[arg(long, default_value_t = DEFAULT_OMEGA_RANGE.1)]
    pub omega_max: f64,
    #[arg(long, default_value_t = DEFAULT_OMEGA_POINTS)]
    pub omega_points: usize,
}

impl GridArgs {
    fn grid(&self, omega_m: f64) -> Result<Vec<f64>> {
        if self.omega_points == 0 {
            return Err(Error::EmptyGrid("omega"));
        }
        if !(self.omega_min < self.omega_max) && self.omega_points > 1 {
            return Err(Error::validation("omega-min", "must be below omega-max"));
        }
        Ok(linspace(self.omega_min * omega_m, self.omega_max * omega_m, self.omega_points))
    }
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    pub config: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Override the config's quadrature angle (radians).
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Comma-separated 1-based pairs such as `1-1,1-2`; default all `j <= l`.
    #[arg(long)]
    pub pairs: Option<String>,
    #[arg(long, value_enum, default_value_t = RouteArg::Full)]
    pub route: RouteArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct VarianceArgs {
    pub config: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Sweep θ on `[theta-min, theta-max]` instead of a single angle.
    #[arg(long, allow_hyphen_values = true, requires = "theta_max")]
    pub theta_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "theta_min")]
    pub theta_max: Option<f64>,
    #[arg(long, default_value_t = 181)]
    pub theta_points: usize,
    /// Comma-separated 1-based pairs with `j != l`; default all `j < l`.
    #[arg(long)]
    pub pairs: Option<String>,
    #[arg(long, value_enum, default_value_t = RouteArg::Full)]
    pub route: RouteArg,
    /// Also write the M×M variance matrix at this frequency (units of Ω_m).
    #[arg(long)]
    pub matrix_at: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EnsembleArgs {
    pub config: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Relative standard deviation of G and κ_e.
    #[arg(long)]
    pub sigma: f64,
    #[arg(long)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write every sample's trace.
    #[arg(long)]
    pub traces: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReproduceArgs {
    #[arg(value_parser = |s: &str| s.parse::<PresetName>())]
    pub preset: PresetName,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Seed of the disorder ensembles.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

/// Record of one run, written next to every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub config: Option<ConfigDocument>,
    pub config_hash: Option<String>,
    pub omega_grid: Option<GridRecord>,
    pub theta_grid: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    pub version: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridRecord {
    pub omega_min_over_omega_m: f64,
    pub omega_max_over_omega_m: f64,
    pub points: usize,
}

impl From<&GridArgs> for GridRecord {
    fn from(g: &GridArgs) -> Self {
        GridRecord {
            omega_min_over_omega_m: g.omega_min,
            omega_max_over_omega_m: g.omega_max,
            points: g.omega_points,
        }
    }
}

impl RunManifest {
    fn new(command: &str, cfg: Option<&SystemConfig>) -> Self {
        RunManifest {
            command: command.to_string(),
            args: std::env::args().skip(1).collect(),
            config: cfg.map(|c| c.to_document()),
            config_hash: cfg.map(|c| c.config_hash()),
            omega_grid: None,
            theta_grid: None,
            seed: None,
            outputs: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Full double precision, locale independent.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    write_file(path, &text)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_stem().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

fn finish(mut manifest: RunManifest, outputs: &[&Path], manifest_path: &Path) -> Result<()> {
    manifest.outputs = outputs.iter().map(|p| p.display().to_string()).collect();
    manifest.outputs.push(manifest_path.display().to_string());
    write_json(manifest_path, &manifest)
}

fn load_config(path: &Path, theta: Option<f64>) -> Result<SystemConfig> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let cfg = parse_config(&text)?;
    Ok(match theta {
        Some(t) => cfg.with_theta(t),
        None => cfg,
    })
}

/// Parse `1-2,3-3` into 0-based index pairs.
pub fn parse_pairs(text: &str, modes: usize) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (a, b) = item
            .split_once('-')
            .ok_or_else(|| Error::validation("pairs", format!("`{item}` is not of the form j-l")))?;
        let idx = |s: &str| -> Result<usize> {
            let v: usize = s
                .trim()
                .parse()
                .map_err(|_| Error::validation("pairs", format!("`{s}` is not a mode number")))?;
            if v == 0 || v > modes {
                return Err(Error::ModeIndex { index: v, modes });
            }
            Ok(v - 1)
        };
        out.push((idx(a)?, idx(b)?));
    }
    if out.is_empty() {
        return Err(Error::validation("pairs", "no pairs given"));
    }
    Ok(out)
}

pub fn cmd_spectrum(args: &SpectrumArgs) -> Result<()> {
    let cfg = load_config(&args.config, args.theta)?;
    let omega_m = cfg.mech().omega_m;
    let grid = args.grid.grid(omega_m)?;
    let pairs = match &args.pairs {
        Some(p) => parse_pairs(p, cfg.mode_count())?,
        None => upper_pairs(cfg.mode_count()),
    };
    let result = sweep(&cfg, &grid, &pairs, args.route.into())?;
    let SpectrumValues::Correlations(entries) = result.values() else {
        unreachable!("sweep returns correlations")
    };
    let mut csv = String::from("omega,omega_over_omega_m,j,l,xx_re,xx_im,yy_re,yy_im,validity\n");
    for (i, &w) in grid.iter().enumerate() {
        for (p, &(j, l)) in pairs.iter().enumerate() {
            let e = &entries[result.index(i, p)];
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{}",
                num(cfg.to_config_unit(w)),
                num(w / omega_m),
                j + 1,
                l + 1,
                num(e.xx.re),
                num(e.xx.im),
                num(e.yy.re),
                num(e.yy.im),
                u8::from(e.valid)
            );
        }
    }
    write_file(&args.out, &csv)?;
    let mut manifest = RunManifest::new("spectrum", Some(&cfg));
    manifest.omega_grid = Some((&args.grid).into());
    finish(manifest, &[&args.out], &sibling(&args.out, ".manifest.json"))
}

fn variance_on_route(cfg: &SystemConfig, omega: f64, theta: f64, pairs: &[(usize, usize)], route: Route) -> Result<Vec<Option<f64>>> {
    match route {
        Route::Full => {
            let point = SpectralPoint::new(cfg, omega);
            let view = point.at_angle(theta);
            pairs
                .iter()
                .map(|&(j, l)| duan_variance_at(&view, j, l, omega).map(Some))
                .collect()
        }
        Route::Simplified => {
            let v = simplified_variance(cfg, omega, theta)?;
            Ok(vec![v; pairs.len()])
        }
        Route::Oracle => {
            let point = OraclePoint::new(cfg, omega)?;
            pairs
                .iter()
                .map(|&(j, l)| {
                    let x = |a, b| point.correlation(a, b, Quadrature::X, theta);
                    let y = |a, b| point.correlation(a, b, Quadrature::Y, theta);
                    let v = x(j, j)? + x(l, l)? - x(j, l)? - x(l, j)? + y(j, j)? + y(l, l)? + y(j, l)? + y(l, j)?;
                    Ok(Some(v.re))
                })
                .collect()
        }
    }
}

pub fn cmd_variance(args: &VarianceArgs) -> Result<()> {
    let cfg = load_config(&args.config, args.theta)?;
    let omega_m = cfg.mech().omega_m;
    let m = cfg.mode_count();
    if m < 2 {
        return Err(Error::TooFewModes { needed: 2, actual: m });
    }
    let grid = args.grid.grid(omega_m)?;
    let pairs = match &args.pairs {
        Some(p) => parse_pairs(p, m)?,
        None => (0..m).flat_map(|j| (j + 1..m).map(move |l| (j, l))).collect(),
    };
    if let Some(&(j, _)) = pairs.iter().find(|(j, l)| j == l) {
        return Err(Error::SamePair(j));
    }
    let thetas = match (args.theta_min, args.theta_max) {
        (Some(lo), Some(hi)) => {
            if args.theta_points == 0 {
                return Err(Error::EmptyGrid("theta"));
            }
            linspace(lo, hi, args.theta_points)
        }
        _ => vec![cfg.theta()],
    };
    let route: Route = args.route.into();
    let rows: Vec<Result<Vec<Vec<Option<f64>>>>> = par_map(&grid, |&w| {
        thetas
            .iter()
            .map(|&t| variance_on_route(&cfg, w, t, &pairs, route))
            .collect()
    });
    let mut csv = String::from("omega,omega_over_omega_m,theta,j,l,v,validity\n");
    for (i, row) in rows.into_iter().enumerate() {
        let w = grid[i];
        for (t, values) in thetas.iter().zip(row?) {
            for (&(j, l), v) in pairs.iter().zip(values) {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{}",
                    num(cfg.to_config_unit(w)),
                    num(w / omega_m),
                    num(*t),
                    j + 1,
                    l + 1,
                    num(v.unwrap_or(f64::NAN)),
                    u8::from(v.is_some())
                );
            }
        }
    }
    write_file(&args.out, &csv)?;
    let mut outputs = vec![args.out.clone()];
    if let Some(at) = args.matrix_at {
        let vm = variance_matrix(&cfg, at * omega_m)?;
        let path = sibling(&args.out, ".matrix.csv");
        write_file(&path, &matrix_csv(&vm))?;
        outputs.push(path);
    }
    let mut manifest = RunManifest::new("variance", Some(&cfg));
    manifest.omega_grid = Some((&args.grid).into());
    manifest.theta_grid = Some(thetas);
    let refs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    finish(manifest, &refs, &sibling(&args.out, ".manifest.json"))
}

fn matrix_csv(vm: &crate::entanglement::VarianceMatrix) -> String {
    let mut csv = String::from("j");
    for l in 1..=vm.m {
        let _ = write!(csv, ",{l}");
    }
    csv.push('\n');
    for (j, row) in vm.rows().enumerate() {
        let _ = write!(csv, "{}", j + 1);
        for v in row {
            csv.push(',');
            if !v.is_nan() {
                csv.push_str(&num(*v));
            }
        }
        csv.push('\n');
    }
    csv
}

fn ensemble_csv(cfg: &SystemConfig, stats: &crate::disorder::EnsembleStats) -> String {
    let omega_m = cfg.mech().omega_m;
    let mut csv = String::from("omega,omega_over_omega_m,j,l,min,mean,max\n");
    for (i, &w) in stats.omega_grid.iter().enumerate() {
        for (p, &(j, l)) in stats.pairs.iter().enumerate() {
            let k = stats.index(i, p);
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{}",
                num(cfg.to_config_unit(w)),
                num(w / omega_m),
                j + 1,
                l + 1,
                num(stats.min[k]),
                num(stats.mean[k]),
                num(stats.max[k])
            );
        }
    }
    csv
}

fn traces_csv(cfg: &SystemConfig, stats: &crate::disorder::EnsembleStats) -> String {
    let omega_m = cfg.mech().omega_m;
    let mut csv = String::from("sample,omega_over_omega_m,j,l,v\n");
    for (s, trace) in stats.traces.iter().enumerate() {
        for (i, &w) in stats.omega_grid.iter().enumerate() {
            for (p, &(j, l)) in stats.pairs.iter().enumerate() {
                let _ = writeln!(csv, "{s},{},{},{},{}", num(w / omega_m), j + 1, l + 1, num(trace[stats.index(i, p)]));
            }
        }
    }
    csv
}

pub fn cmd_ensemble(args: &EnsembleArgs) -> Result<()> {
    let cfg = load_config(&args.config, args.theta)?;
    let grid = args.grid.grid(cfg.mech().omega_m)?;
    let spec = DisorderSpec::new(args.sigma, args.seed, args.samples);
    let stats = ensemble_variance(&cfg, &spec, &grid, cfg.theta())?;
    write_file(&args.out, &ensemble_csv(&cfg, &stats))?;
    let mut outputs = vec![args.out.clone()];
    if args.traces {
        let path = sibling(&args.out, ".traces.csv");
        write_file(&path, &traces_csv(&cfg, &stats))?;
        outputs.push(path);
    }
    let mut manifest = RunManifest::new("ensemble", Some(&cfg));
    manifest.omega_grid = Some((&args.grid).into());
    manifest.seed = Some(args.seed);
    let refs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    finish(manifest, &refs, &sibling(&args.out, ".manifest.json"))
}

/// One row of a reproduction summary.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, value: f64, expected: f64, tolerance: f64) -> Self {
        Check {
            name: name.to_string(),
            value,
            expected,
            tolerance,
            pass: (value - expected).abs() <= tolerance,
        }
    }
}

struct Reproduction {
    files: Vec<(String, String)>,
    checks: Vec<Check>,
    details: Value,
    configs: Vec<SystemConfig>,
    seed: Option<u64>,
}

fn curve_csv(omega_m: f64, cfg: &SystemConfig, columns: &[(&str, Vec<f64>)], grid: &[f64]) -> String {
    let mut csv = String::from("omega,omega_over_omega_m");
    for (name, _) in columns {
        let _ = write!(csv, ",{name}");
    }
    csv.push('\n');
    for (i, &w) in grid.iter().enumerate() {
        let _ = write!(csv, "{},{}", num(cfg.to_config_unit(w)), num(w / omega_m));
        for (_, values) in columns {
            let _ = write!(csv, ",{}", num(values[i]));
        }
        csv.push('\n');
    }
    csv
}

fn curve(cfg: &SystemConfig, grid: &[f64]) -> Result<Vec<f64>> {
    par_map(grid, |&w| duan_variance(cfg, 0, 1, w)).into_iter().collect()
}

/// Edge of the contiguous `V < 2` region that contains `start`, walking by
/// `step` (sign gives the direction) and bisecting the crossing.
pub fn band_edge(cfg: &SystemConfig, start: f64, step: f64, limit: f64) -> Result<Option<f64>> {
    let inside = |w: f64| duan_variance(cfg, 0, 1, w).map(|v| v < 2.0);
    if !inside(start)? {
        return Ok(None);
    }
    let mut a = start;
    loop {
        let b = a + step;
        if (step > 0.0 && b > limit) || (step < 0.0 && b < limit) {
            return Ok(None);
        }
        if !inside(b)? {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if inside(mid)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(Some(0.5 * (lo + hi)));
        }
        a = b;
    }
}

fn reproduce_two_mode() -> Result<Reproduction> {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
    let base = presets::two_mode(FRAC_PI_4);
    let omega_m = base.mech().omega_m;
    let grid = linspace(0.01 * omega_m, 2.5 * omega_m, DEFAULT_OMEGA_POINTS);
    let thetas = default_theta_grid();

    let rows: Vec<Result<Vec<f64>>> = par_map(&thetas, |&t| curve(&base.with_theta(t), &grid));
    let mut heat = String::from("theta,omega_over_omega_m,v\n");
    for (t, row) in thetas.iter().zip(rows) {
        for (w, v) in grid.iter().zip(row?) {
            let _ = writeln!(heat, "{},{},{}", num(*t), num(w / omega_m), num(v));
        }
    }

    let near_right = FRAC_PI_2 - 1e-2;
    let plus = base.with_theta(FRAC_PI_4);
    let minus = base.with_theta(-FRAC_PI_4);
    let right = base.with_theta(near_right);
    let curves = curve_csv(
        omega_m,
        &base,
        &[
            ("v_theta_plus_pi_4", curve(&plus, &grid)?),
            ("v_theta_minus_pi_4", curve(&minus, &grid)?),
            ("v_theta_near_pi_2", curve(&right, &grid)?),
        ],
        &grid,
    );

    let (w_right, v_right) = refine_minimum(&right, 0, 1, near_right, (0.9 * omega_m, omega_m * (1.0 - 1e-9)), 2001, 6)?;
    let inner = band_edge(&plus, 0.5 * omega_m, 1e-3 * omega_m, 2.5 * omega_m)?.map(|w| w / omega_m);
    let outer = band_edge(&minus, 1.5 * omega_m, -1e-3 * omega_m, 0.01 * omega_m)?.map(|w| w / omega_m);
    let threshold = analytic_threshold(&plus, FRAC_PI_4)?;
    let edge_delta = inner.map(|b| omega_m * (1.0 - b * b) / 2.0);

    let checks = vec![
        Check::new("v_min_theta_to_pi_2", v_right, 1.05, 0.05),
        Check::new("inner_band_edge_over_omega_m", inner.unwrap_or(f64::NAN), 0.95, 0.07),
        Check::new("outer_band_edge_over_omega_m", outer.unwrap_or(f64::NAN), 1.03, 0.07),
    ];
    Ok(Reproduction {
        files: vec![("heatmap.csv".into(), heat), ("curves.csv".into(), curves)],
        checks,
        details: json!({
            "theta_near_pi_2": near_right,
            "omega_opt_near_pi_2_over_omega_m": w_right / omega_m,
            "analytic_threshold_delta_over_omega_m": threshold / omega_m,
            "full_edge_delta_over_omega_m": edge_delta.map(|d| d / omega_m),
            "analytic_optimum_theta_pi_4": analytic_optimum(&plus, FRAC_PI_4)?,
        }),
        configs: vec![base],
        seed: None,
    })
}

fn reproduce_four_mode(seed: u64) -> Result<Reproduction> {
    let cfg = presets::four_mode();
    let omega_m = cfg.mech().omega_m;
    let grid = linspace(0.01 * omega_m, 2.5 * omega_m, DEFAULT_OMEGA_POINTS);
    let identical = curve(&cfg, &grid)?;
    let v_min = identical.iter().cloned().fold(f64::INFINITY, f64::min);
    let stats = ensemble_variance(&cfg, &presets::four_mode_disorder(seed), &grid, cfg.theta())?;
    let pairs = stats.pairs.len();
    let below: usize = stats
        .traces
        .iter()
        .filter(|trace| {
            (0..pairs).all(|p| (0..grid.len()).any(|i| trace[stats.index(i, p)] < 1.85))
        })
        .count();
    Ok(Reproduction {
        files: vec![
            ("identical.csv".into(), curve_csv(omega_m, &cfg, &[("v", identical)], &grid)),
            ("ensemble.csv".into(), ensemble_csv(&cfg, &stats)),
            ("traces.csv".into(), traces_csv(&cfg, &stats)),
        ],
        checks: vec![
            Check::new("identical_v_min", v_min, 1.75, 0.05),
            Check::new("samples_all_pairs_below_1_85", below as f64, 10.0, 1.0),
        ],
        details: json!({ "analytic_optimum": analytic_optimum(&cfg, cfg.theta())? }),
        configs: vec![cfg],
        seed: Some(seed),
    })
}

fn reproduce_ten_mode(seed: u64) -> Result<Reproduction> {
    let cfg = presets::ten_mode(0.1);
    let omega_m = cfg.mech().omega_m;
    let grid = linspace(0.01 * omega_m, 2.5 * omega_m, DEFAULT_OMEGA_POINTS);
    let at = presets::TEN_MODE_MATRIX_OMEGA * omega_m;

    let sweep_cfgs: Vec<SystemConfig> = presets::TEN_MODE_COUPLING_SWEEP.iter().map(|&g| presets::ten_mode(g)).collect();
    let curves: Vec<Vec<f64>> = sweep_cfgs.iter().map(|c| curve(c, &grid)).collect::<Result<_>>()?;
    let mut minima = Vec::new();
    for c in &sweep_cfgs {
        let coarse = curve(c, &grid)?;
        let k = coarse
            .iter()
            .enumerate()
            .fold(0, |b, (i, v)| if *v < coarse[b] { i } else { b });
        let lo = grid[k.saturating_sub(1)];
        let hi = grid[(k + 1).min(grid.len() - 1)];
        minima.push(refine_minimum(c, 0, 1, c.theta(), (lo, hi), 201, 4)?);
    }
    let columns: Vec<(String, Vec<f64>)> = presets::TEN_MODE_COUPLING_SWEEP
        .iter()
        .zip(curves)
        .map(|(g, v)| (format!("v_g_{g}"), v))
        .collect();
    let column_refs: Vec<(&str, Vec<f64>)> = columns.iter().map(|(n, v)| (n.as_str(), v.clone())).collect();

    let vm = variance_matrix(&cfg, at)?;
    let stats = ensemble_variance(&cfg, &presets::ten_mode_disorder(seed), &[at], cfg.theta())?;
    let worst_max = stats.max.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let v_at = duan_variance(&cfg, 0, 1, at)?;
    let g04 = minima[presets::TEN_MODE_COUPLING_SWEEP.len() - 1].1;

    let mut sweep_summary = Vec::new();
    for (g, (w, v)) in presets::TEN_MODE_COUPLING_SWEEP.iter().zip(&minima) {
        sweep_summary.push(json!({ "g_over_omega_m": g, "v_min": v, "omega_opt_over_omega_m": w / omega_m }));
    }
    Ok(Reproduction {
        files: vec![
            ("coupling_sweep.csv".into(), curve_csv(omega_m, &cfg, &column_refs, &grid)),
            ("matrix.csv".into(), matrix_csv(&vm)),
            ("ensemble.csv".into(), ensemble_csv(&cfg, &stats)),
        ],
        checks: vec![
            Check::new("v_at_1_04_g_0_1", v_at, 1.9, 0.05),
            Check::new("v_min_g_0_4", g04, 1.915, 0.015),
            Check::new("ensemble_max_below_2", f64::from(u8::from(worst_max < 2.0)), 1.0, 0.0),
        ],
        details: json!({
            "coupling_sweep": sweep_summary,
            "ensemble_worst_max": worst_max,
            "matrix_verdict": crate::entanglement::multipartite_verdict(&vm),
        }),
        configs: vec![cfg],
        seed: Some(seed),
    })
}

fn reproduce_optical() -> Result<Reproduction> {
    let cfg = presets::experiment_optical();
    let omega_m = cfg.mech().omega_m;
    let grid = linspace(0.01 * omega_m, 2.5 * omega_m, DEFAULT_OMEGA_POINTS);
    let values = curve(&cfg, &grid)?;
    let k = values.iter().enumerate().fold(0, |b, (i, v)| if *v < values[b] { i } else { b });
    let (w, v) = refine_minimum(&cfg, 0, 1, cfg.theta(), (grid[k.saturating_sub(1)], grid[(k + 1).min(grid.len() - 1)]), 201, 4)?;
    let mode = cfg.modes()[0];
    let ss = steady_state_at_detuning(
        &[presets::experiment_optical_drive()],
        &[(mode.kappa_e, mode.kappa_i)],
        cfg.mech(),
        &[0.0],
    )?;
    let n_cav = ss.photon_number(0);
    let mirrored = cfg.with_theta(-cfg.theta());
    let km = {
        let vm = curve(&mirrored, &grid)?;
        let k = vm.iter().enumerate().fold(0, |b, (i, v)| if *v < vm[b] { i } else { b });
        refine_minimum(&mirrored, 0, 1, mirrored.theta(), (grid[k.saturating_sub(1)], grid[(k + 1).min(grid.len() - 1)]), 201, 4)?
    };
    Ok(Reproduction {
        files: vec![("curve.csv".into(), curve_csv(omega_m, &cfg, &[("v", values)], &grid))],
        checks: vec![
            Check::new("v_min", v, 1.89, 0.03),
            Check::new("omega_opt_over_omega_m", w / omega_m, 1.052, 0.02),
            Check::new("photon_number_over_1e8", n_cav / 1e8, 1.4, 0.14),
        ],
        details: json!({
            "analytic_optimum": analytic_optimum(&cfg, cfg.theta())?,
            "mirrored_theta_v_min": km.1,
            "mirrored_theta_omega_opt_over_omega_m": km.0 / omega_m,
        }),
        configs: vec![cfg],
        seed: None,
    })
}

fn reproduce_microwave() -> Result<Reproduction> {
    let cfg = presets::experiment_microwave(-std::f64::consts::FRAC_PI_4);
    let omega_m = cfg.mech().omega_m;
    let grid = linspace(0.01 * omega_m, 2.5 * omega_m, DEFAULT_OMEGA_POINTS);
    let values = curve(&cfg, &grid)?;
    let k = values.iter().enumerate().fold(0, |b, (i, v)| if *v < values[b] { i } else { b });
    let (w, v) = refine_minimum(&cfg, 0, 1, cfg.theta(), (grid[k.saturating_sub(1)], grid[(k + 1).min(grid.len() - 1)]), 201, 4)?;
    let scan = scan_minimum(&cfg, &grid, &default_theta_grid())?;
    Ok(Reproduction {
        files: vec![("curve.csv".into(), curve_csv(omega_m, &cfg, &[("v", values)], &grid))],
        checks: vec![Check::new("v_min", v, 1.3, 0.1)],
        details: json!({
            "omega_opt_over_omega_m": w / omega_m,
            "analytic_optimum": analytic_optimum(&cfg, cfg.theta())?,
            "theta_scan": {
                "v_min": scan.multipartite.v_min,
                "omega_opt_over_omega_m": scan.multipartite.omega_opt / omega_m,
                "theta_opt": scan.multipartite.theta_opt,
            },
        }),
        configs: vec![cfg],
        seed: None,
    })
}

pub fn cmd_reproduce(args: &ReproduceArgs) -> Result<()> {
    let rep = match args.preset {
        PresetName::TwoMode => reproduce_two_mode()?,
        PresetName::FourMode => reproduce_four_mode(args.seed)?,
        PresetName::TenMode => reproduce_ten_mode(args.seed)?,
        PresetName::ExperimentOptical => reproduce_optical()?,
        PresetName::ExperimentMicrowave => reproduce_microwave()?,
    };
    let dir = &args.out_dir;
    let mut outputs = Vec::new();
    for (name, contents) in &rep.files {
        let path = dir.join(name);
        write_file(&path, contents)?;
        outputs.push(path);
    }
    let summary_path = dir.join("summary.json");
    write_json(
        &summary_path,
        &json!({
            "preset": args.preset.as_str(),
            "checks": rep.checks,
            "details": rep.details,
        }),
    )?;
    outputs.push(summary_path);
    let mut manifest = RunManifest::new("reproduce", rep.configs.first());
    manifest.seed = rep.seed;
    let refs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    finish(manifest, &refs, &dir.join("manifest.json"))
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::validation(THREADS_ENV, "must be a positive integer"))?;
    #[cfg(feature = "parallel")]
    {
        // A pool that is already built (e.g. in tests) keeps its size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match &cli.command {
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Variance(a) => cmd_variance(a),
        Command::Ensemble(a) => cmd_ensemble(a),
        Command::Reproduce(a) => cmd_reproduce(a),
    }
}
