//! Subcommand drivers. Each returns an [`Outcome`]; the binary exits with 0
//! exactly when `Outcome::pass` holds.

use std::path::{Path, PathBuf};

use affwalk_core::building::{
    building_exact_table, compare_building, default_grid, heat_estimate_th4, heat_estimate_th5,
    plancherel_calibrate, HeatMode,
};
use affwalk_core::comb::lemma5_suite;
use affwalk_core::green::{green_estimate, green_series, regime, s_u_solve, GreenOptions, Regime};
use affwalk_core::lattice::{compare_lattice, exact_pn_convolution, llt_detail, Region, DEFAULT_AXIS_GUARD};
use affwalk_core::rate::{boundary_exponent_fit, hull_grid, saddle};
use affwalk_core::report::EstimateReport;
use affwalk_core::sphfun::macdonald_at_zero;
use affwalk_core::walk::{Flavor, Kernel};
use affwalk_core::LatticePoint;
use serde::Serialize;

use crate::acceptance;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{fmt_coords, fmt_f, fmt_vec, write_csv, write_estimate_csv, write_json};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Estimator {
    /// Uniform building estimate with the `sinh` product.
    Uniform,
    /// Interior building estimate with `P_w(0)`.
    Interior,
    /// Lattice local limit estimate.
    Llt,
    /// Green function estimate.
    Green,
}

impl std::str::FromStr for Estimator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "uniform" => Ok(Estimator::Uniform),
            "interior" => Ok(Estimator::Interior),
            "llt" => Ok(Estimator::Llt),
            "green" => Ok(Estimator::Green),
            _ => Err(format!("unknown estimator {s:?}; use uniform, interior, llt or green")),
        }
    }
}

/// Flags shared by the subcommands; `None` keeps the config value.
#[derive(Clone, Debug, PartialEq)]
pub struct Options {
    pub grid: Option<usize>,
    pub n_list: Option<Vec<u64>>,
    pub epsilon: Option<f64>,
    pub big_k: Option<f64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub cap: Option<u64>,
    pub estimator: Option<Estimator>,
    pub omega: Option<Vec<i64>>,
    pub zeta_frac: f64,
    pub omega_max: u64,
    pub count: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            grid: None,
            n_list: None,
            epsilon: None,
            big_k: None,
            seed: 0,
            out: None,
            cap: None,
            estimator: None,
            omega: None,
            zeta_frac: 0.9,
            omega_max: 40,
            count: 500,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub files: Vec<PathBuf>,
    pub lines: Vec<String>,
}

/// Config with command-line overrides applied and re-validated.
pub fn effective(cfg: &RunConfig, opts: &Options) -> CliResult<RunConfig> {
    let mut c = cfg.clone();
    if let Some(n) = opts.grid {
        c.grid.n = n;
    }
    if let Some(l) = &opts.n_list {
        c.sweep.n_list = l.clone();
    }
    if let Some(e) = opts.epsilon {
        c.sweep.epsilon = e;
    }
    if let Some(k) = opts.big_k {
        c.sweep.k = k;
    }
    c.validate()?;
    Ok(c)
}

fn out_dir(cfg: &RunConfig, opts: &Options) -> PathBuf {
    opts.out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| Path::new("out").join(cfg.label()))
}

fn eta_for(cfg: &RunConfig, k: &Kernel) -> CliResult<f64> {
    match cfg.sweep.eta {
        Some(e) => Ok(e),
        None => Ok(boundary_exponent_fit(k)?.eta),
    }
}

/// Exact `p_n` on the support: sphere types for buildings, lattice points
/// otherwise.
pub fn exact_table(cfg: &RunConfig, k: &Kernel, n: u64) -> CliResult<Vec<(LatticePoint, f64)>> {
    match k.flavor() {
        Flavor::Building => {
            let grid = default_grid(k, cfg.grid.n)?;
            let calib = plancherel_calibrate(k.require_building()?, &grid)?;
            Ok(building_exact_table(k, n, &grid, &calib)?)
        }
        Flavor::Lattice => Ok(exact_pn_convolution(k, n, DEFAULT_AXIS_GUARD)?.support()),
    }
}

/// Exact versus estimate for one `n`; buildings get both regimes.
pub fn compare_at(cfg: &RunConfig, k: &Kernel, n: u64, eta: f64) -> CliResult<EstimateReport> {
    match k.flavor() {
        Flavor::Building => {
            let table = exact_table(cfg, k, n)?;
            let mut rep = compare_building(k, n, &table, HeatMode::Uniform { big_k: cfg.sweep.k, eta })?;
            rep.extend(compare_building(k, n, &table, HeatMode::Interior { eps: cfg.sweep.epsilon })?);
            Ok(rep)
        }
        Flavor::Lattice => {
            let table = exact_pn_convolution(k, n, DEFAULT_AXIS_GUARD)?;
            Ok(compare_lattice(k, &table, &Region::All, cfg.sweep.k, eta)?)
        }
    }
}

pub fn run_exact(cfg: &RunConfig, opts: &Options) -> CliResult<Outcome> {
    let cfg = effective(cfg, opts)?;
    let k = cfg.kernel()?;
    let mut rows = Vec::new();
    let mut negative = 0usize;
    for &n in &cfg.sweep.n_list {
        for (w, p) in exact_table(&cfg, &k, n)? {
            if p < -1e-10 {
                negative += 1;
            }
            rows.push(vec![n.to_string(), fmt_coords(&w.0), fmt_f(p)]);
        }
    }
    let count = rows.len();
    let path = write_csv(&out_dir(&cfg, opts).join("exact.csv"), &["step_n", "omega_coords", "exact"], rows)?;
    Ok(Outcome {
        pass: negative == 0,
        files: vec![path],
        lines: vec![format!("{count} exact values, {negative} below -1e-10")],
    })
}

pub fn run_estimate(cfg: &RunConfig, opts: &Options) -> CliResult<Outcome> {
    let cfg = effective(cfg, opts)?;
    let k = cfg.kernel()?;
    let omega = LatticePoint(
        opts.omega
            .clone()
            .ok_or_else(|| CliError::Usage("estimate needs --omega".into()))?,
    );
    if omega.dim() != k.rank() {
        return Err(CliError::Usage(format!("--omega needs {} coordinates", k.rank())));
    }
    let est = opts.estimator.unwrap_or(match k.flavor() {
        Flavor::Building => Estimator::Interior,
        Flavor::Lattice => Estimator::Llt,
    });
    let header = ["step_n", "omega_coords", "estimate", "regime", "dist_boundary", "det_nB", "phi"];
    let mut rows = Vec::new();
    if est == Estimator::Green {
        let zeta = opts.zeta_frac / k.rho();
        let v = green_estimate(&k, zeta, &omega)?;
        let reg = match regime(&k, zeta)? {
            Regime::Subcritical => "green-subcritical",
            Regime::Critical => "green-critical",
        };
        rows.push(vec![
            String::new(),
            fmt_coords(&omega.0),
            fmt_f(v),
            reg.into(),
            String::new(),
            String::new(),
            String::new(),
        ]);
    } else {
        for &n in &cfg.sweep.n_list {
            let (value, regime, dist, det, phi) = match est {
                Estimator::Uniform => {
                    let e = heat_estimate_th4(&k, n, &omega)?;
                    (e.value, "uniform", e.dist, e.det_nb, e.phi)
                }
                Estimator::Interior => {
                    let e = heat_estimate_th5(&k, n, &omega, cfg.sweep.epsilon)?;
                    (e.value, "interior", e.dist, e.det_nb, e.phi)
                }
                Estimator::Llt => {
                    let e = llt_detail(&k, n, &omega)?;
                    (e.value, "llt", e.dist, e.det_nb, e.phi)
                }
                Estimator::Green => unreachable!(),
            };
            rows.push(vec![
                n.to_string(),
                fmt_coords(&omega.0),
                fmt_f(value),
                regime.into(),
                fmt_f(dist),
                fmt_f(det),
                fmt_f(phi),
            ]);
        }
    }
    let lines = rows.iter().map(|r| r.join(",")).collect();
    let path = write_csv(&out_dir(&cfg, opts).join("estimate.csv"), &header, rows)?;
    Ok(Outcome {
        pass: true,
        files: vec![path],
        lines,
    })
}

#[derive(Debug, Serialize)]
pub struct RegimeSummary {
    pub regime: String,
    pub n: u64,
    pub rows: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub spread: f64,
}

#[derive(Debug, Serialize)]
pub struct CompareSummary {
    pub config: String,
    pub eta: f64,
    #[serde(rename = "K")]
    pub big_k: f64,
    pub epsilon: f64,
    pub groups: Vec<RegimeSummary>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub warnings: Vec<String>,
}

pub fn summarize(cfg: &RunConfig, eta: f64, rep: &EstimateReport) -> CompareSummary {
    let mut groups: Vec<RegimeSummary> = Vec::new();
    for r in &rep.rows {
        match groups.iter_mut().find(|g| g.regime == r.regime && g.n == r.n) {
            Some(g) => {
                g.rows += 1;
                g.min_ratio = g.min_ratio.min(r.ratio);
                g.max_ratio = g.max_ratio.max(r.ratio);
            }
            None => groups.push(RegimeSummary {
                regime: r.regime.clone(),
                n: r.n,
                rows: 1,
                min_ratio: r.ratio,
                max_ratio: r.ratio,
                spread: 1.0,
            }),
        }
    }
    for g in &mut groups {
        g.spread = g.max_ratio / g.min_ratio;
    }
    CompareSummary {
        config: cfg.label(),
        eta,
        big_k: cfg.sweep.k,
        epsilon: cfg.sweep.epsilon,
        groups,
        min_ratio: rep.min_ratio(),
        max_ratio: rep.max_ratio(),
        warnings: rep.warnings.clone(),
    }
}

pub fn run_compare(cfg: &RunConfig, opts: &Options) -> CliResult<Outcome> {
    let cfg = effective(cfg, opts)?;
    let k = cfg.kernel()?;
    let eta = eta_for(&cfg, &k)?;
    let mut rep = EstimateReport::default();
    for &n in &cfg.sweep.n_list {
        rep.extend(compare_at(&cfg, &k, n, eta)?);
    }
    let dir = out_dir(&cfg, opts);
    let csv = write_estimate_csv(&dir.join("compare.csv"), &rep.rows)?;
    let summary = summarize(&cfg, eta, &rep);
    let json = write_json(&dir.join("compare_summary.json"), &summary)?;
    let mut lines: Vec<String> = summary
        .groups
        .iter()
        .map(|g| {
            format!(
                "n={} {}: {} rows, ratio in [{:.6}, {:.6}], spread {:.6}",
                g.n, g.regime, g.rows, g.min_ratio, g.max_ratio, g.spread
            )
        })
        .collect();
    lines.extend(rep.warnings.iter().cloned());
    Ok(Outcome {
        pass: !rep.rows.is_empty(),
        files: vec![csv, json],
        lines,
    })
}

#[derive(Debug, Serialize)]
pub struct GreenSummary {
    pub config: String,
    pub zeta: f64,
    pub regime: String,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub spread: f64,
    /// Subcritical: slope of `-log(G |w|^a / P_w(0))` against `|w|`, with `a`
    /// the power in the estimate; critical: slope of `log(G / P_w(0))`
    /// against `log |w|`.
    pub fitted_slope: f64,
    /// The value the slope should approach.
    pub predicted_slope: f64,
    pub max_cap_sensitivity: Option<f64>,
}

/// Least-squares slope.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn run_green(cfg: &RunConfig, opts: &Options) -> CliResult<Outcome> {
    let cfg = effective(cfg, opts)?;
    let k = cfg.kernel()?;
    let zeta = opts.zeta_frac / k.rho();
    let reg = regime(&k, zeta)?;
    let dir: Vec<i64> = match &opts.omega {
        Some(d) => d.clone(),
        None => {
            let mut d = vec![0; k.rank()];
            d[0] = 1;
            d
        }
    };
    if dir.len() != k.rank() || dir.iter().all(|&x| x == 0) {
        return Err(CliError::Usage("--omega must be a nonzero direction of the right rank".into()));
    }
    let omegas: Vec<LatticePoint> = (1..=opts.omega_max as i64)
        .map(|m| LatticePoint(dir.iter().map(|x| x * m).collect()))
        .collect();
    let gopts = GreenOptions {
        cap: opts.cap,
        grid_n: cfg.grid.n,
        ..GreenOptions::default()
    };
    let series = green_series(&k, zeta, &omegas, &gopts)?;
    let n_pos = k
        .context()
        .map(|c| c.root_system().positive_roots().len())
        .unwrap_or(0) as f64;
    let sub_power = (k.rank() as f64 - 1.0) / 2.0 + n_pos;
    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for g in &series {
        let est = green_estimate(&k, zeta, &g.omega)?;
        let ratio = g.value / est;
        ratios.push(ratio);
        let norm = k.position(&g.omega).norm();
        let p0 = match k.context() {
            Some(ctx) => macdonald_at_zero(ctx, &g.omega)?,
            None => 1.0,
        };
        match reg {
            Regime::Subcritical => {
                xs.push(norm);
                ys.push(-(g.value / p0).ln() - sub_power * norm.ln());
            }
            Regime::Critical => {
                xs.push(norm.ln());
                ys.push((g.value / p0).ln());
            }
        }
        rows.push(vec![
            fmt_coords(&g.omega.0),
            fmt_f(g.value),
            fmt_f(est),
            fmt_f(ratio),
            match reg {
                Regime::Subcritical => "subcritical".into(),
                Regime::Critical => "critical".into(),
            },
            g.terms.to_string(),
            g.certified.to_string(),
            g.cap_sensitivity.map(fmt_f).unwrap_or_default(),
        ]);
    }
    let predicted = match reg {
        Regime::Subcritical => {
            let u = k.position(&LatticePoint(dir.clone()));
            let su = s_u_solve(&k, zeta, &u)?;
            su.s_u.dot(&(u.clone() / u.norm()))
        }
        Regime::Critical => 2.0 - k.rank() as f64 - 2.0 * n_pos,
    };
    let mn = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let mx = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let summary = GreenSummary {
        config: cfg.label(),
        zeta,
        regime: format!("{reg:?}").to_lowercase(),
        min_ratio: mn,
        max_ratio: mx,
        spread: mx / mn,
        fitted_slope: ls_slope(&xs, &ys),
        predicted_slope: predicted,
        max_cap_sensitivity: series
            .iter()
            .filter_map(|g| g.cap_sensitivity)
            .reduce(f64::max),
    };
    let out = out_dir(&cfg, opts);
    let csv = write_csv(
        &out.join("green.csv"),
        &["omega_coords", "series", "estimate", "ratio", "regime", "terms", "certified", "cap_sensitivity"],
        rows,
    )?;
    let json = write_json(&out.join("green_summary.json"), &summary)?;
    Ok(Outcome {
        pass: true,
        files: vec![csv, json],
        lines: vec![format!(
            "ratio in [{:.6}, {:.6}], spread {:.4}; slope {:.6} (predicted {:.6})",
            mn, mx, summary.spread, summary.fitted_slope, predicted
        )],
    })
}

pub fn run_rate(cfg: &RunConfig, opts: &Options) -> CliResult<Outcome> {
    let cfg = effective(cfg, opts)?;
    let k = cfg.kernel()?;
    let diam = k.hull().diameter();
    let mut rows = Vec::new();
    for d in hull_grid(&k, 0.05 * diam, 0.5, 1e-3 * diam) {
        let s = saddle(&k, &d)?;
        rows.push(vec![
            fmt_vec(d.as_slice()),
            fmt_vec(s.s.as_slice()),
            fmt_f(s.phi),
            fmt_f(s.det_b),
            fmt_f(k.dist_to_boundary(&d)),
        ]);
    }
    let count = rows.len();
    let path = write_csv(
        &out_dir(&cfg, opts).join("rate.csv"),
        &["delta_coords", "s_coords", "phi", "det_B", "dist_boundary"],
        rows,
    )?;
    Ok(Outcome {
        pass: true,
        files: vec![path],
        lines: vec![format!("{count} grid points")],
    })
}

pub fn run_lemma5(out: Option<&Path>, opts: &Options) -> CliResult<Outcome> {
    let rep = lemma5_suite(opts.seed, opts.count, 6, 4)?;
    #[derive(Serialize)]
    struct Report {
        seed: u64,
        systems: usize,
        gammas: usize,
        admissible: usize,
        realizations: usize,
        failures: usize,
        flow_mismatches: usize,
        monotonicity_failures: usize,
        passed: bool,
    }
    let r = Report {
        seed: opts.seed,
        systems: rep.systems,
        gammas: rep.gammas,
        admissible: rep.admissible,
        realizations: rep.realizations,
        failures: rep.failures,
        flow_mismatches: rep.flow_mismatches,
        monotonicity_failures: rep.monotonicity_failures,
        passed: rep.passed(),
    };
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("out"));
    let path = write_json(&dir.join("lemma5.json"), &r)?;
    Ok(Outcome {
        pass: rep.passed(),
        files: vec![path],
        lines: vec![format!(
            "{} systems, {} admissible multi-indices, {} realizations: {} failures, {} flow mismatches",
            rep.systems, rep.admissible, rep.realizations, rep.failures, rep.flow_mismatches
        )],
    })
}

/// The full acceptance suite, or the checks that apply to one config.
pub fn run_selftest(cfg: Option<&RunConfig>, opts: &Options) -> CliResult<Outcome> {
    let results = match cfg {
        None => acceptance::run_all(opts.seed),
        Some(c) => acceptance::config_suite(&effective(c, opts)?, opts.seed),
    };
    let pass = results.iter().all(|r| r.pass);
    let lines = results.iter().map(|r| r.to_string()).collect();
    let mut files = Vec::new();
    if let Some(dir) = &opts.out {
        files.push(write_json(&dir.join("selftest.json"), &results)?);
    }
    Ok(Outcome { pass, files, lines })
}
