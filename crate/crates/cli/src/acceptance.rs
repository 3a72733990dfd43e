//! The acceptance suite: nine criteria, each reported on one line.

use std::fmt;
use std::time::Instant;

use affwalk_core::building::{
    building_exact_table, compare_building, default_grid, exact_pn_quadrature, macdonald_expansion,
    plancherel_calibrate, HeatMode, MacdonaldCache,
};
use affwalk_core::comb::lemma5_suite;
use affwalk_core::green::{green_estimate, green_series, s_u_solve, GreenOptions};
use affwalk_core::lattice::{compare_lattice, exact_pn_convolution, llt_estimate, Region, DEFAULT_AXIS_GUARD};
use affwalk_core::rate::{
    boundary_exponent_fit, fd_gradient, grad_phi, hessian_b, hull_grid, phi_var, rate_phi, saddle,
};
use affwalk_core::report::EstimateReport;
use affwalk_core::sphfun::{macdonald_at_zero, macdonald_eval, vertex_count, EvalMode};
use affwalk_core::tree::{tree_exact_table, TreeWalk};
use affwalk_core::walk::{Flavor, Kernel};
use affwalk_core::{Complex64, LatticePoint};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{shipped, shipped_config, RunConfig};
use crate::error::{CliError, CliResult};
use crate::run::{compare_at, exact_table, ls_slope};

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: String,
    pub title: String,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
    /// Runtime budget in seconds.
    pub limit: f64,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {} {} ({:.1} s, limit {} s): {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.seconds,
            self.limit,
            self.detail
        )
    }
}

fn timed(id: &str, title: &str, limit: f64, body: impl FnOnce() -> CliResult<(bool, String)>) -> CriterionResult {
    let start = Instant::now();
    let (ok, detail) = match body() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    let seconds = start.elapsed().as_secs_f64();
    let slow = seconds >= limit;
    CriterionResult {
        id: id.into(),
        title: title.into(),
        pass: ok && !slow,
        detail: if slow { format!("{detail}; over the runtime limit") } else { detail },
        seconds,
        limit,
    }
}

fn kernel(name: &str) -> CliResult<(RunConfig, Kernel)> {
    let cfg = shipped_config(name).ok_or_else(|| CliError::Usage(format!("no shipped config {name}")))?;
    let k = cfg.kernel()?;
    Ok((cfg, k))
}

/// `C(n, j) 2^{-n}` by a product of ratios.
fn binomial_half(n: u64, j: u64) -> f64 {
    let j = j.min(n - j);
    let mut log = -(n as f64) * std::f64::consts::LN_2;
    for i in 0..j {
        log += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    log.exp()
}

fn rel_diff(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    if m == 0.0 {
        0.0
    } else {
        (a - b).abs() / m
    }
}

pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    vec![
        criterion1(),
        criterion2(),
        criterion3(),
        criterion4(),
        criterion5(),
        criterion6(seed),
        criterion7(),
        criterion8(seed),
        criterion9(seed),
    ]
}

pub fn criterion1() -> CriterionResult {
    timed("1", "lattice local limit, Z^1 simple walk", 1.0, || {
        let (_, k) = kernel("z1_simple")?;
        let origin = LatticePoint(vec![0]);
        let r0 = llt_estimate(&k, 100, &origin)? / binomial_half(100, 50);
        let eta = boundary_exponent_fit(&k)?.eta;
        let table = exact_pn_convolution(&k, 200, DEFAULT_AXIS_GUARD)?;
        let rep = compare_lattice(&k, &table, &Region::All, 1.0, eta)?;
        let spread = rep.spread();
        let ok = (1.0..=1.01).contains(&r0) && !rep.rows.is_empty() && spread <= 1.1;
        Ok((
            ok,
            format!(
                "estimate/exact at origin, n=100: {r0:.6}; n=200 sweep: {} points, spread {spread:.6}",
                rep.rows.len()
            ),
        ))
    })
}

pub fn criterion2() -> CriterionResult {
    timed("2", "lattice local limit, Z^2 simple walk", 10.0, || {
        let (_, k) = kernel("z2_simple")?;
        let eta = boundary_exponent_fit(&k)?.eta;
        let t100 = exact_pn_convolution(&k, 100, DEFAULT_AXIS_GUARD)?;
        let t200 = exact_pn_convolution(&k, 200, DEFAULT_AXIS_GUARD)?;
        let t400 = exact_pn_convolution(&k, 400, DEFAULT_AXIS_GUARD)?;
        let base = compare_lattice(&k, &t100, &Region::All, 1.0, eta)?;
        let pts2: Vec<LatticePoint> = base.rows.iter().map(|r| r.omega.scale(2)).collect();
        let pts4: Vec<LatticePoint> = base.rows.iter().map(|r| r.omega.scale(4)).collect();
        let r200 = compare_lattice(&k, &t200, &Region::Points(pts2.clone()), 1.0, eta)?;
        let r400 = compare_lattice(&k, &t400, &Region::Points(pts4.clone()), 1.0, eta)?;
        let find = |rep: &EstimateReport, w: &LatticePoint| rep.rows.iter().find(|r| &r.omega == w).map(|r| r.ratio);
        let mut worst: f64 = 0.0;
        let mut missing = 0usize;
        for (i, row) in base.rows.iter().enumerate() {
            match (find(&r200, &pts2[i]), find(&r400, &pts4[i])) {
                (Some(a), Some(b)) => {
                    let d1 = (a - row.ratio).abs();
                    let d2 = (b - a).abs();
                    if d1 > 0.0 {
                        worst = worst.max(d2 / d1);
                    } else if d2 > 0.0 {
                        worst = f64::INFINITY;
                    }
                }
                _ => missing += 1,
            }
        }
        let full = compare_lattice(&k, &t400, &Region::All, 1.0, eta)?;
        let spread = full.spread();
        let ok = !base.rows.is_empty() && missing == 0 && worst <= 0.5 && spread <= 1.2;
        Ok((
            ok,
            format!(
                "{} points tracked along w, 2w, 4w; worst change ratio {worst:.4} (needs <= 0.5); n=400 spread {spread:.6}",
                base.rows.len()
            ),
        ))
    })
}

pub fn criterion3() -> CriterionResult {
    timed("3", "tree oracles agree: quadrature, distance chain, Macdonald expansion", 30.0, || {
        let mut worst = 0.0f64;
        let mut worst_mass = 0.0f64;
        for name in ["tree_q2", "tree_q3"] {
            let (cfg, k) = kernel(name)?;
            let (w, d) = tree_agreement(&cfg, &k, 60)?;
            worst = worst.max(w);
            worst_mass = worst_mass.max(d);
        }
        Ok((
            worst <= 1e-7 && worst_mass <= 1e-7,
            format!("q = 2, 3, n <= 60: worst pairwise relative gap {worst:.3e}, worst mass error {worst_mass:.3e}"),
        ))
    })
}

/// Worst relative disagreement among the three tree oracles for `n <= n_max`
/// and the worst deviation of the total mass from 1.
fn tree_agreement(cfg: &RunConfig, k: &Kernel, n_max: u64) -> CliResult<(f64, f64)> {
    let ctx = k.require_building()?;
    let grid = default_grid(k, cfg.grid.n)?;
    let calib = plancherel_calibrate(ctx, &grid)?;
    let walk = TreeWalk::from_kernel(k)?;
    let mut cache = MacdonaldCache::new();
    let mut worst = 0.0f64;
    let mut worst_mass = 0.0f64;
    for n in 0..=n_max {
        let dp = tree_exact_table(&walk, n);
        let exp = macdonald_expansion(k, n, &mut cache)?;
        let mut mass = 0.0;
        for (m, &p_dp) in dp.iter().enumerate() {
            let w = LatticePoint(vec![m as i64]);
            let p_q = exact_pn_quadrature(k, n, &w, &grid, &calib)?.value;
            let p_x = exp.pn.get(&w).copied().unwrap_or(0.0);
            worst = worst.max(rel_diff(p_q, p_dp)).max(rel_diff(p_q, p_x)).max(rel_diff(p_dp, p_x));
            mass += cache.vertex_count(ctx, &w)? * p_q;
        }
        worst_mass = worst_mass.max((mass - 1.0).abs());
    }
    Ok((worst, worst_mass))
}

/// exact/estimate bounds of one estimator on one walk at n = 40, 80, 160.
struct Drift {
    label: String,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Drift {
    fn c40(&self) -> f64 {
        self.hi[0].max(1.0 / self.lo[0])
    }

    fn range(&self, i: usize) -> f64 {
        self.hi[i] / self.lo[i]
    }

    fn pass(&self) -> bool {
        let c = self.c40();
        let inside = (1..self.lo.len()).all(|i| self.lo[i] >= 1.0 / (2.0 * c) && self.hi[i] <= 2.0 * c);
        let finite = self.lo.iter().chain(&self.hi).all(|x| x.is_finite() && *x > 0.0);
        finite && inside && self.range(self.lo.len() - 1) <= 2.0 * self.range(0)
    }

    fn describe(&self) -> String {
        let spans: Vec<String> = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| format!("[{l:.4}, {h:.4}]"))
            .collect();
        format!(
            "{} {} C40={:.3} range {:.2}->{:.2}{}",
            self.label,
            spans.join(" "),
            self.c40(),
            self.range(0),
            self.range(self.lo.len() - 1),
            if self.pass() { "" } else { " (fails)" }
        )
    }
}

pub fn criterion4() -> CriterionResult {
    timed("4", "building heat kernel ratios stay bounded without drift", 600.0, || {
        let ns = [40u64, 80, 160];
        let mut drifts = Vec::new();
        for name in ["tree_q2", "a2_q2"] {
            let (cfg, k) = kernel(name)?;
            let eta = boundary_exponent_fit(&k)?.eta;
            let mut uni = Drift { label: format!("{name} uniform (eta={eta})"), lo: vec![], hi: vec![] };
            let mut int = Drift { label: format!("{name} interior"), lo: vec![], hi: vec![] };
            for &n in &ns {
                let table = exact_table(&cfg, &k, n)?;
                for (d, mode) in [
                    (&mut uni, HeatMode::Uniform { big_k: 1.0, eta }),
                    (&mut int, HeatMode::Interior { eps: 0.05 }),
                ] {
                    let rep = compare_building(&k, n, &table, mode)?;
                    // The criterion is phrased for exact/estimate.
                    d.lo.push(1.0 / rep.max_ratio());
                    d.hi.push(1.0 / rep.min_ratio());
                }
            }
            drifts.push(uni);
            drifts.push(int);
        }
        let ok = drifts.iter().all(Drift::pass);
        let detail: Vec<String> = drifts.iter().map(Drift::describe).collect();
        Ok((ok, detail.join("; ")))
    })
}

pub fn criterion5() -> CriterionResult {
    timed("5", "Green function decay", 120.0, || {
        let (_, tree) = kernel("tree_q2")?;
        let zeta = 0.9 / tree.rho();
        let ws: Vec<LatticePoint> = (1..=40).map(|m| LatticePoint(vec![m])).collect();
        let series = green_series(&tree, zeta, &ws, &GreenOptions::default())?;
        let mut ratios = Vec::new();
        for g in &series {
            ratios.push(g.value / green_estimate(&tree, zeta, &g.omega)?);
        }
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let spread = hi / lo;
        let ok_sub = lo > 0.0 && spread <= 10.0;

        let (_, z1) = kernel("z1_simple")?;
        let zl = 0.9;
        let ws: Vec<LatticePoint> = (20..=60).map(|m| LatticePoint(vec![m])).collect();
        let series = green_series(&z1, zl, &ws, &GreenOptions::default())?;
        let xs: Vec<f64> = ws.iter().map(|w| w.0[0] as f64).collect();
        let ys: Vec<f64> = series.iter().map(|g| -g.value.ln()).collect();
        let slope = ls_slope(&xs, &ys);
        let s_u = s_u_solve(&z1, zl, &DVector::from_vec(vec![1.0]))?.s_u[0];
        let ok_lat = (slope - s_u).abs() <= 1e-3;

        let ctx = tree.require_building()?;
        let crit = 1.0 / tree.rho();
        let ws: Vec<LatticePoint> = (30..=60).map(|m| LatticePoint(vec![m])).collect();
        let opts = GreenOptions { cap: Some(40_000), ..GreenOptions::default() };
        let series = green_series(&tree, crit, &ws, &opts)?;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for g in &series {
            xs.push(tree.position(&g.omega).norm().ln());
            ys.push((g.value / macdonald_at_zero(ctx, &g.omega)?).ln());
        }
        let cslope = ls_slope(&xs, &ys);
        let np = ctx.root_system().positive_roots().len() as f64;
        let target = 2.0 - tree.rank() as f64 - 2.0 * np;
        let ok_crit = (cslope - target).abs() <= 0.1;
        Ok((
            ok_sub && ok_lat && ok_crit,
            format!(
                "tree subcritical spread {spread:.3} over m=1..40; Z^1 slope {slope:.6} vs s_u {s_u:.6}; \
                 critical log-log slope {cslope:.4} vs {target}"
            ),
        ))
    })
}

/// Uniform random point of the hull at boundary distance at least `margin`.
fn random_interior(rng: &mut ChaCha8Rng, k: &Kernel, margin: f64) -> DVector<f64> {
    let (lo, hi) = k.hull().bounding_box();
    loop {
        let p = DVector::from_iterator(k.rank(), (0..k.rank()).map(|j| lo[j] + (hi[j] - lo[j]) * rng.random::<f64>()));
        if k.dist_to_boundary(&p) >= margin {
            return p;
        }
    }
}

fn rate_properties(k: &Kernel, rng: &mut ChaCha8Rng) -> CliResult<(bool, String)> {
    let diam = k.hull().diameter();
    let r = k.rank();

    let mut slack = f64::INFINITY;
    for _ in 0..200 {
        let a = random_interior(rng, k, 1e-3 * diam);
        let b = random_interior(rng, k, 1e-3 * diam);
        let m = (&a + &b) * 0.5;
        let s = 0.5 * (rate_phi(k, &a)? + rate_phi(k, &b)?) - rate_phi(k, &m)?;
        slack = slack.min(s);
    }

    let mut grad_err = 0.0f64;
    let mut jac_err = 0.0f64;
    let h = 1e-5 * diam;
    for _ in 0..20 {
        let d = random_interior(rng, k, 0.1 * diam);
        let sd = saddle(k, &d)?;
        let g = fd_gradient(|x| rate_phi(k, x), &d, h)?;
        grad_err = grad_err.max((g - &sd.s).amax() / (1.0 + sd.s.amax()));
        let inv = sd.b.clone().try_inverse().ok_or_else(|| CliError::Usage("singular B".into()))?;
        let mut jac = DMatrix::zeros(r, r);
        for j in 0..r {
            let mut a = d.clone();
            let mut b = d.clone();
            a[j] += h;
            b[j] -= h;
            let col = (grad_phi(k, &a)? - grad_phi(k, &b)?) / (2.0 * h);
            jac.set_column(j, &col);
        }
        jac_err = jac_err.max((jac - &inv).amax() / (1.0 + inv.amax()));
    }

    // phi(delta) against |delta - drift|^2, on two grids.
    let d0 = k.drift();
    let spread_on = |h: f64, shift: f64| -> CliResult<f64> {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for d in hull_grid(k, h, shift, 1e-4 * diam) {
            let q = (&d - &d0).norm_squared();
            if q < 1e-6 * diam * diam {
                continue;
            }
            let ratio = rate_phi(k, &d)? / q;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        Ok(if lo > 0.0 { hi / lo } else { f64::INFINITY })
    };
    let c_coarse = spread_on(0.02 * diam, 0.5)?;
    let c_fine = spread_on(0.01 * diam, 0.25)?;
    let quad_ok = c_coarse.is_finite() && c_fine <= 2.0 * c_coarse;

    let mut equi = 0.0f64;
    if let Some(ctx) = k.context() {
        let weyl = ctx.weyl();
        for _ in 0..20 {
            let d = random_interior(rng, k, 0.02 * diam);
            let s = saddle(k, &d)?.s;
            for w in 0..weyl.order() {
                let m = weyl.orthogonal(w);
                let sw = saddle(k, &(m * &d))?.s;
                equi = equi.max((sw - m * &s).amax());
            }
        }
    }

    let vmax = k.support().iter().map(|s| s.pos.norm()).fold(0.0, f64::max);
    let strip = 1.0 / (4.0 * vmax);
    let mut worst_strip = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let x = DVector::from_iterator(r, (0..r).map(|_| 2.0 * rng.random::<f64>() - 1.0));
        let dir = DVector::from_iterator(r, (0..r).map(|_| 2.0 * rng.random::<f64>() - 1.0));
        let theta = dir.normalize() * (0.999 * strip * rng.random::<f64>());
        let bq = (hessian_b(k, &x) * &theta).dot(&theta);
        let lhs = 4.0 * phi_var(k, &x, &theta)?.re;
        worst_strip = worst_strip.max((lhs + bq) / bq.max(1e-300));
    }

    let ok = slack >= -1e-10
        && grad_err <= 1e-5
        && jac_err <= 1e-5
        && quad_ok
        && equi <= 1e-9
        && worst_strip <= 1e-12;
    Ok((
        ok,
        format!(
            "convexity slack {slack:.2e}, grad err {grad_err:.2e}, jacobian err {jac_err:.2e}, \
             quadratic comparison C {c_coarse:.3} (finer grid {c_fine:.3}), equivariance {equi:.2e}, \
             strip bound excess {worst_strip:.2e}"
        ),
    ))
}

pub fn criterion6(seed: u64) -> CriterionResult {
    timed("6", "rate function properties", 30.0, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ok = true;
        let mut details = Vec::new();
        for name in ["a2_q2", "z2_simple"] {
            let (_, k) = kernel(name)?;
            let (o, d) = rate_properties(&k, &mut rng)?;
            ok &= o;
            details.push(format!("{name}: {d}"));
        }
        Ok((ok, details.join("; ")))
    })
}

pub fn criterion7() -> CriterionResult {
    timed("7", "boundary decay exponent fit and hold-out", 30.0, || {
        let mut ok = true;
        let mut items = Vec::new();
        for (name, cfg) in shipped() {
            let fit = boundary_exponent_fit(&cfg.kernel()?)?;
            ok &= fit.holdout_margin >= 0.0;
            items.push(format!("{name} eta={} C={:.3e} margin {:.3}", fit.eta, fit.c, fit.holdout_margin));
        }
        Ok((ok, items.join("; ")))
    })
}

pub fn criterion8(seed: u64) -> CriterionResult {
    timed("8", "set-system union identity", 10.0, || {
        let rep = lemma5_suite(seed, 500, 6, 4)?;
        Ok((
            rep.passed(),
            format!(
                "{} systems, {} admissible multi-indices, {} realizations, {} failures, {} flow/brute mismatches",
                rep.systems, rep.admissible, rep.realizations, rep.failures, rep.flow_mismatches
            ),
        ))
    })
}

pub fn criterion9(seed: u64) -> CriterionResult {
    timed("9", "calibration fixed points", 60.0, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
        let mut p0_err = 0.0f64;
        let mut n0_err = 0.0f64;
        let mut poly_err = 0.0f64;
        let mut min_p = f64::INFINITY;
        for name in ["tree_q2", "tree_q3", "a2_q2"] {
            let (cfg, k) = kernel(name)?;
            let ctx = k.require_building()?;
            let r = k.rank();
            let zero = LatticePoint::zero(r);
            let grid = default_grid(&k, cfg.grid.n)?;
            let calib = plancherel_calibrate(ctx, &grid)?;
            p0_err = p0_err.max((exact_pn_quadrature(&k, 0, &zero, &grid, &calib)?.value - 1.0).abs());
            n0_err = n0_err.max((vertex_count(ctx, &zero)? - 1.0).abs());
            for _ in 0..100 {
                let z: Vec<Complex64> = (0..r)
                    .map(|_| Complex64::new(4.0 * rng.random::<f64>() - 2.0, 8.0 * rng.random::<f64>() - 4.0))
                    .collect();
                poly_err = poly_err.max((macdonald_eval(ctx, &zero, &z, EvalMode::Auto)? - 1.0).norm());
            }
            for n in [1u64, 2, 5, 20, 40] {
                for (_, p) in building_exact_table(&k, n, &grid, &calib)? {
                    min_p = min_p.min(p);
                }
            }
        }
        for name in ["z1_simple", "z1_lazy", "z2_simple"] {
            let (_, k) = kernel(name)?;
            for (_, p) in exact_pn_convolution(&k, 100, DEFAULT_AXIS_GUARD)?.support() {
                min_p = min_p.min(p);
            }
        }
        let ok = p0_err <= 1e-12 && n0_err <= 1e-12 && poly_err <= 1e-10 && min_p >= -1e-10;
        Ok((
            ok,
            format!("|p_0(O,O) - 1| {p0_err:.2e}, |N_0 - 1| {n0_err:.2e}, |P_0(z) - 1| {poly_err:.2e}, min p_n {min_p:.2e}"),
        ))
    })
}

/// The checks that apply to a single config.
pub fn config_suite(cfg: &RunConfig, seed: u64) -> Vec<CriterionResult> {
    let label = cfg.label();
    let mut out = Vec::new();
    let kernel = match cfg.kernel() {
        Ok(k) => k,
        Err(e) => {
            out.push(CriterionResult {
                id: label,
                title: "kernel construction".into(),
                pass: false,
                detail: e.to_string(),
                seconds: 0.0,
                limit: 0.0,
            });
            return out;
        }
    };
    let k = &kernel;
    let id = |s: &str| format!("{label}/{s}");

    out.push(timed(&id("calibration"), "p_0 = 1 and p_n >= 0", 600.0, || {
        let zero = LatticePoint::zero(k.rank());
        let p0 = exact_table(cfg, k, 0)?
            .into_iter()
            .find(|(w, _)| *w == zero)
            .map(|(_, p)| p)
            .unwrap_or(0.0);
        let mut min_p = f64::INFINITY;
        for &n in &cfg.sweep.n_list {
            for (_, p) in exact_table(cfg, k, n)? {
                min_p = min_p.min(p);
            }
        }
        Ok((
            (p0 - 1.0).abs() <= 1e-12 && min_p >= -1e-10,
            format!("|p_0(O,O) - 1| {:.2e}, min p_n {min_p:.2e}", (p0 - 1.0).abs()),
        ))
    }));

    out.push(timed(&id("boundary-fit"), "boundary exponent fit and hold-out", 30.0, || {
        let fit = boundary_exponent_fit(k)?;
        Ok((
            fit.holdout_margin >= 0.0,
            format!("eta={} C={:.3e} margin {:.3}", fit.eta, fit.c, fit.holdout_margin),
        ))
    }));

    if k.flavor() == Flavor::Building && k.rank() == 1 {
        let n_max = cfg.sweep.n_list.iter().copied().max().unwrap_or(0).min(60);
        out.push(timed(&id("tree-oracles"), "quadrature, distance chain and expansion agree", 60.0, || {
            let (w, m) = tree_agreement(cfg, k, n_max)?;
            Ok((w <= 1e-7 && m <= 1e-7, format!("n <= {n_max}: worst gap {w:.3e}, mass error {m:.3e}")))
        }));
    }

    out.push(timed(&id("compare"), "estimates are positive and finite on the admissible set", 600.0, || {
        let eta = match cfg.sweep.eta {
            Some(e) => e,
            None => boundary_exponent_fit(k)?.eta,
        };
        let mut rows = 0usize;
        let mut bad = 0usize;
        for &n in &cfg.sweep.n_list {
            let rep = compare_at(cfg, k, n, eta)?;
            rows += rep.rows.len();
            bad += rep.rows.iter().filter(|r| !(r.ratio.is_finite() && r.ratio > 0.0)).count();
        }
        Ok((rows > 0 && bad == 0, format!("{rows} rows, {bad} with a non-positive or non-finite ratio")))
    }));

    if k.context().is_some() {
        out.push(timed(&id("rate"), "rate function properties", 30.0, || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rate_properties(k, &mut rng)
        }));
    }
    out
}
