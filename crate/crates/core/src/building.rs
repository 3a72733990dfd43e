//! Exact transition probabilities of isotropic walks on affine buildings and
//! the heat-kernel estimators.
//!
//! The exact values come from the spherical inversion formula in the form
//! `p_n(w) = C prod q_alpha^{-<alpha/2, w>} mean_t[A_hat(x+it)^n e^{-<x+it, w>} / c(x+it)]`,
//! integrated over the torus in coweight pairing coordinates. The real part
//! `x` of the contour is shifted to the saddle point of `w/n` (pulled back
//! from the boundary), which keeps the integrand of unit size for tiny
//! `p_n`. A second, independent route expands `A_hat^n` in Macdonald
//! polynomials.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DVector;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::exppoly::{ExpPoly, LatticePoint};
use crate::numeric::{pairwise_sum, pairwise_sum_c};
use crate::rate::{rate_phi_closure, saddle};
use crate::report::{EstimateReport, EstimateRow};
use crate::rootsys::RootSystem;
use crate::sphfun::{
    macdonald_at_zero, macdonald_exp_poly, torus_calibration, vertex_count_from, SphericalContext,
};
use crate::torus::TorusGrid;
use crate::walk::Kernel;

/// Tolerance on the relative change between nested grids.
pub const REFINE_TOL: f64 = 1e-8;
/// Tolerance on the relative imaginary part of a quadrature result.
pub const IMAG_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq)]
pub struct Calibration {
    pub c_norm: f64,
    /// Relative change of `c_norm` under one grid doubling.
    pub change: f64,
}

/// Normalisation of the torus measure from the `|c|^{-2}` form with the
/// trivial weight; refinement must leave it unchanged to `1e-9`.
pub fn plancherel_calibrate(ctx: &SphericalContext, grid: &TorusGrid) -> Result<Calibration> {
    let a = torus_calibration(ctx, grid);
    let b = torus_calibration(ctx, &grid.refined());
    let change = ((a - b) / b).abs();
    if !(change < 1e-9) {
        return Err(Error::QuadratureNonConvergence { change, tol: 1e-9 });
    }
    Ok(Calibration { c_norm: b, change })
}

/// Default grid for a kernel: generic offset avoiding the walls.
pub fn default_grid(k: &Kernel, n: usize) -> Result<TorusGrid> {
    let ctx = k.require_building()?;
    TorusGrid::generic(ctx.rank(), n, &ctx.coroot_walls())
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// `|Im| / |mean|` of the torus mean.
    pub imag_residue: f64,
    /// Relative change against the half-resolution sub-grid.
    pub refine_change: f64,
    /// Points per axis actually used.
    pub grid_n: usize,
    /// Real part of the integration contour.
    pub shift: DVector<f64>,
}

struct Engine<'a> {
    k: &'a Kernel,
    grid: TorusGrid,
    /// Per axis, per node index: `e^{i m t}` for `m` in `-span..=span`.
    powers: Vec<Vec<Vec<Complex64>>>,
    span: i64,
    walls: Vec<(Vec<i64>, f64)>,
}

impl<'a> Engine<'a> {
    fn new(k: &'a Kernel, grid: TorusGrid) -> Result<Engine<'a>> {
        let ctx = k.require_building()?;
        let walls: Vec<(Vec<i64>, f64)> = ctx
            .root_system()
            .positive_roots()
            .iter()
            .map(|a| (a.coroot_coweight.clone(), ctx.q().of_root(a)))
            .collect();
        let mut span = 0i64;
        for s in k.support() {
            span = span.max(s.key.0.iter().map(|x| x.abs()).max().unwrap_or(0));
        }
        for w in &walls {
            span = span.max(w.0.iter().map(|x| x.abs()).max().unwrap_or(0));
        }
        let powers = (0..grid.rank())
            .map(|j| {
                grid.axis(j)
                    .iter()
                    .map(|&t| {
                        (-span..=span)
                            .map(|m| Complex64::from_polar(1.0, m as f64 * t))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(Engine {
            k,
            grid,
            powers,
            span,
            walls,
        })
    }

    fn mono(&self, idx: &[usize], key: &[i64]) -> Complex64 {
        let mut z = Complex64::new(1.0, 0.0);
        for j in 0..idx.len() {
            z *= self.powers[j][idx[j]][(key[j] + self.span) as usize];
        }
        z
    }

    /// Means of the normalised integrand over the grid and over its
    /// even-index sub-grid.
    fn means(&self, n: u64, omega: &LatticePoint, xp: &[f64]) -> (Complex64, Complex64, f64) {
        let r = self.grid.rank();
        let nn = self.grid.n();
        let fam_w: Vec<f64> = {
            let e: Vec<f64> = self
                .k
                .support()
                .iter()
                .map(|s| s.coeff.ln() + s.key.dot_f(xp))
                .collect();
            let m = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let w: Vec<f64> = e.iter().map(|a| (a - m).exp()).collect();
            let t: f64 = w.iter().sum();
            w.into_iter().map(|a| a / t).collect()
        };
        let wall_damp: Vec<f64> = self
            .walls
            .iter()
            .map(|(a, _)| (-a.iter().zip(xp).map(|(&ai, x)| ai as f64 * x).sum::<f64>()).exp())
            .collect();
        let phase: Vec<Vec<Complex64>> = (0..r)
            .map(|j| {
                self.grid
                    .axis(j)
                    .iter()
                    .map(|&t| Complex64::from_polar(1.0, -(omega.0[j] as f64) * t))
                    .collect()
            })
            .collect();
        let total = self.grid.node_count();
        let mut all = Vec::with_capacity(total);
        let mut even = Vec::with_capacity(total >> r);
        let mut abs = Vec::with_capacity(total);
        let mut idx = vec![0usize; r];
        for _ in 0..total {
            let mut kap = Complex64::new(0.0, 0.0);
            for (s, w) in self.k.support().iter().zip(&fam_w) {
                kap += self.mono(&idx, &s.key.0) * *w;
            }
            let mut val = kap.powu(n as u32);
            for ((a, q), d) in self.walls.iter().zip(&wall_damp) {
                let e = self.mono(&idx, a).conj() * *d;
                val *= (Complex64::new(1.0, 0.0) - e) / (Complex64::new(1.0, 0.0) - e / *q);
            }
            for j in 0..r {
                val *= phase[j][idx[j]];
            }
            all.push(val);
            abs.push(val.norm());
            if idx.iter().all(|i| i % 2 == 0) {
                even.push(val);
            }
            for j in (0..r).rev() {
                idx[j] += 1;
                if idx[j] < nn {
                    break;
                }
                idx[j] = 0;
            }
        }
        (
            pairwise_sum_c(&all) / all.len() as f64,
            pairwise_sum_c(&even) / even.len() as f64,
            pairwise_sum(&abs) / abs.len() as f64,
        )
    }
}

/// Contour shift: the saddle point of `w/n`, moved towards the drift if
/// `w/n` is within `dist(drift)/n` of the boundary.
fn contour_shift(k: &Kernel, n: u64, omega: &LatticePoint) -> Result<DVector<f64>> {
    let r = k.rank();
    if n == 0 {
        return Ok(DVector::zeros(r));
    }
    let d0 = k.drift();
    let target = k.position(omega) / n as f64;
    let inner = k.dist_to_boundary(&d0);
    let d_min = inner / n as f64;
    let mut delta = target.clone();
    if k.dist_to_boundary(&target) < d_min {
        let dir = &target - &d0;
        let mut tau: f64 = 1.0;
        for f in k.hull().facets() {
            let slope = f.normal.dot(&dir);
            if slope > 0.0 {
                tau = tau.min((f.offset - f.normal.dot(&d0) - d_min) / slope);
            }
        }
        delta = &d0 + dir * tau.max(0.0);
    }
    Ok(saddle(k, &delta)?.s)
}

fn check_omega(ctx: &SphericalContext, omega: &LatticePoint) -> Result<()> {
    if omega.dim() != ctx.rank() || !RootSystem::is_dominant_int(&omega.0) {
        return Err(Error::InvalidArgument(format!(
            "{:?} is not a dominant coweight of rank {}",
            omega.0,
            ctx.rank()
        )));
    }
    Ok(())
}

/// `p_n(O, x)` for `x` in the sphere of dominant type `omega`.
pub fn exact_pn_quadrature(
    k: &Kernel,
    n: u64,
    omega: &LatticePoint,
    grid: &TorusGrid,
    calib: &Calibration,
) -> Result<QuadResult> {
    let ctx = k.require_building()?;
    check_omega(ctx, omega)?;
    let x = contour_shift(k, n, omega)?;
    if !k.periodicity().in_class(n, omega) {
        return Ok(QuadResult {
            value: 0.0,
            imag_residue: 0.0,
            refine_change: 0.0,
            grid_n: grid.n(),
            shift: x,
        });
    }
    let xp = k.pairing(&x);
    let mut g = grid.clone();
    let mut last_change = f64::NAN;
    for _ in 0..3 {
        let eng = Engine::new(k, g.clone())?;
        let (fine, coarse, abs_mean) = eng.means(n, omega, &xp);
        if fine.norm() <= 1e-11 * abs_mean && coarse.norm() <= 1e-11 * abs_mean {
            // Cancellation to rounding level: a zero outside the reachable set.
            return Ok(QuadResult {
                value: 0.0,
                imag_residue: 0.0,
                refine_change: (fine - coarse).norm() / abs_mean,
                grid_n: g.n(),
                shift: x,
            });
        }
        let change = (fine - coarse).norm() / fine.norm();
        last_change = change;
        if change < REFINE_TOL {
            let imag = fine.im.abs() / fine.norm();
            if imag > IMAG_TOL {
                return Err(Error::ImaginaryResidue {
                    residue: imag,
                    tol: IMAG_TOL,
                });
            }
            let fam = k.family();
            let xw: f64 = omega.dot_f(&xp);
            let log_scale = n as f64 * (k.rho().ln() + fam.log_kappa(&x)) - xw;
            let value = calib.c_norm * ctx.rho_factor(omega) * log_scale.exp() * fine.re;
            return Ok(QuadResult {
                value,
                imag_residue: imag,
                refine_change: change,
                grid_n: g.n(),
                shift: x,
            });
        }
        g = g.refined();
    }
    Err(Error::QuadratureNonConvergence {
        change: last_change,
        tol: REFINE_TOL,
    })
}

/// Dominant coweights `w` with `w/n` in the closed hull and in the residue
/// class of `n`: the sphere types that can carry mass at time `n`.
pub fn building_support(k: &Kernel, n: u64) -> Result<Vec<LatticePoint>> {
    k.require_building()?;
    let r = k.rank();
    if n == 0 {
        return Ok(vec![LatticePoint::zero(r)]);
    }
    let hi: Vec<i64> = (0..r)
        .map(|j| n as i64 * k.support().iter().map(|s| s.key.0[j]).max().unwrap_or(0))
        .collect();
    let tol = 1e-9 * k.hull().diameter();
    let mut out = Vec::new();
    let mut idx = vec![0i64; r];
    loop {
        let w = LatticePoint(idx.clone());
        let delta = k.position(&w) / n as f64;
        if k.dist_to_boundary(&delta) >= -tol && k.periodicity().in_class(n, &w) {
            out.push(w);
        }
        let mut j = r;
        loop {
            if j == 0 {
                return Ok(out);
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] <= hi[j] {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// Macdonald polynomials, leading coefficients and vertex counts, cached.
#[derive(Clone, Debug, Default)]
pub struct MacdonaldCache {
    entries: BTreeMap<LatticePoint, (ExpPoly, f64)>,
}

impl MacdonaldCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn get(&mut self, ctx: &SphericalContext, w: &LatticePoint) -> Result<&(ExpPoly, f64)> {
        if !self.entries.contains_key(w) {
            let p = macdonald_exp_poly(ctx, w)?;
            let nv = vertex_count_from(ctx, w, &p)?;
            self.entries.insert(w.clone(), (p, nv));
        }
        Ok(&self.entries[w])
    }

    /// `N_w = |S_w(O)|`.
    pub fn vertex_count(&mut self, ctx: &SphericalContext, w: &LatticePoint) -> Result<f64> {
        Ok(self.get(ctx, w)?.1)
    }
}

#[derive(Clone, Debug)]
pub struct MacdonaldExpansion {
    pub n: u64,
    /// `b_w` with `A_hat^n = sum_w b_w P_w`.
    pub coeffs: BTreeMap<LatticePoint, f64>,
    /// `p_n(w) = b_w / N_w`.
    pub pn: BTreeMap<LatticePoint, f64>,
}

/// Expands `A_hat^n` in the Macdonald basis by triangular elimination in
/// decreasing `<w, rho>` order.
pub fn macdonald_expansion(k: &Kernel, n: u64, cache: &mut MacdonaldCache) -> Result<MacdonaldExpansion> {
    let ctx = k.require_building()?;
    let power = k.a_hat().pow(n as u32, 0.0);
    let rho_coords: Vec<f64> = {
        let r = ctx.rank();
        let mut v = vec![0.0; r];
        for a in ctx.root_system().positive_roots() {
            for j in 0..r {
                v[j] += 0.5 * a.coords[j] as f64;
            }
        }
        v
    };
    let height = |w: &LatticePoint| w.dot_f(&rho_coords);
    let mut rem: BTreeMap<LatticePoint, (Complex64, f64)> = power
        .iter()
        .map(|(kk, c)| (kk.clone(), (*c, c.norm())))
        .collect();
    let mut coeffs = BTreeMap::new();
    let mut pn = BTreeMap::new();
    loop {
        let next = rem
            .iter()
            .filter(|(kk, _)| RootSystem::is_dominant_int(&kk.0) && !coeffs.contains_key(*kk))
            .max_by(|a, b| height(a.0).partial_cmp(&height(b.0)).unwrap())
            .map(|(kk, v)| (kk.clone(), *v));
        let Some((w, (c, mass))) = next else { break };
        if c.norm() <= 1e-11 * mass {
            coeffs.insert(w.clone(), 0.0);
            pn.insert(w, 0.0);
            continue;
        }
        let (p, nv) = cache.get(ctx, &w)?.clone();
        let lead = p.get(&w);
        if lead.norm() < 1e-12 * p.max_abs() || lead.norm() == 0.0 {
            return Err(Error::PivotTooSmall {
                pivot: lead.norm(),
                at: format!("{:?}", w.0),
            });
        }
        let b = c / lead;
        for (kk, pc) in p.iter() {
            let d = b * pc;
            let e = rem.entry(kk.clone()).or_insert((Complex64::new(0.0, 0.0), 0.0));
            e.0 -= d;
            e.1 += d.norm();
        }
        coeffs.insert(w.clone(), b.re);
        pn.insert(w, b.re / nv);
    }
    Ok(MacdonaldExpansion { n, coeffs, pn })
}

/// `p_n(w)` from the Macdonald expansion.
pub fn exact_pn_crosscheck(k: &Kernel, n: u64, omega: &LatticePoint, cache: &mut MacdonaldCache) -> Result<f64> {
    let e = macdonald_expansion(k, n, cache)?;
    Ok(e.pn.get(omega).copied().unwrap_or(0.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeatEstimate {
    pub value: f64,
    /// Point at which the saddle is taken.
    pub delta: DVector<f64>,
    pub s: DVector<f64>,
    /// Boundary distance used by the admissibility test.
    pub dist: f64,
    pub det_nb: f64,
    /// `phi(w/n)`.
    pub phi: f64,
}

fn rho_vector(ctx: &SphericalContext) -> DVector<f64> {
    ctx.root_system()
        .coweights()
        .iter()
        .fold(DVector::zeros(ctx.rank()), |a, l| a + l)
}

/// The estimate with saddle at `(w + rho)/(n + r)` and the product of
/// `sinh <s, coroot/2>`, unit leading constant.
pub fn heat_estimate_th4(k: &Kernel, n: u64, omega: &LatticePoint) -> Result<HeatEstimate> {
    let ctx = k.require_building()?;
    check_omega(ctx, omega)?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let r = ctx.rank();
    let delta = (k.position(omega) + rho_vector(ctx)) / (n as f64 + r as f64);
    let sd = saddle(k, &delta)?;
    let phi = rate_phi_closure(k, &(k.position(omega) / n as f64))?;
    let det_nb = sd.det_b * (n as f64).powi(r as i32);
    let mut log_v = ctx.rho_factor(omega).ln() - 0.5 * det_nb.ln() + n as f64 * (k.rho().ln() - phi);
    for a in ctx.root_system().positive_roots() {
        log_v += (0.5 * sd.s.dot(&a.coroot)).sinh().ln();
    }
    Ok(HeatEstimate {
        value: log_v.exp(),
        dist: k.dist_to_boundary(&delta),
        delta,
        s: sd.s,
        det_nb,
        phi,
    })
}

/// `n^{-r/2 - |Phi+|} rho^n e^{-n phi(w/n)} P_w(0)` on `dist(w/n) >= eps`.
pub fn heat_estimate_th5(k: &Kernel, n: u64, omega: &LatticePoint, eps: f64) -> Result<HeatEstimate> {
    let ctx = k.require_building()?;
    check_omega(ctx, omega)?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let r = ctx.rank();
    let delta = k.position(omega) / n as f64;
    let dist = k.dist_to_boundary(&delta);
    if dist < eps {
        return Err(Error::Hypothesis(format!(
            "interior estimate needs dist(w/n, boundary) >= {eps}, got {dist:.4}"
        )));
    }
    let sd = saddle(k, &delta)?;
    let nf = n as f64;
    let np = ctx.root_system().positive_roots().len() as f64;
    let p0 = macdonald_at_zero(ctx, omega)?;
    let log_v = -(r as f64 / 2.0 + np) * nf.ln() + nf * (k.rho().ln() - sd.phi) + p0.ln();
    Ok(HeatEstimate {
        value: log_v.exp(),
        delta,
        s: sd.s,
        dist,
        det_nb: sd.det_b * nf.powi(r as i32),
        phi: sd.phi,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HeatMode {
    /// Admissible when `n dist((w+rho)/(n+r))^{2 eta} >= K`.
    Uniform { big_k: f64, eta: f64 },
    /// Admissible when `dist(w/n) >= eps`.
    Interior { eps: f64 },
}

impl HeatMode {
    pub fn label(&self) -> &'static str {
        match self {
            HeatMode::Uniform { .. } => "uniform",
            HeatMode::Interior { .. } => "interior",
        }
    }
}

/// Rows for the admissible part of an exact table.
pub fn compare_building(k: &Kernel, n: u64, exact: &[(LatticePoint, f64)], mode: HeatMode) -> Result<EstimateReport> {
    let ctx = k.require_building()?;
    let r = ctx.rank();
    let mut rep = EstimateReport::default();
    for (w, ex) in exact {
        let est = match mode {
            HeatMode::Uniform { big_k, eta } => {
                let delta = (k.position(w) + rho_vector(ctx)) / (n as f64 + r as f64);
                let d = k.dist_to_boundary(&delta);
                if !(d > 0.0) || (n as f64) * d.powf(2.0 * eta) < big_k {
                    continue;
                }
                heat_estimate_th4(k, n, w)?
            }
            HeatMode::Interior { eps } => {
                let d = k.dist_to_boundary(&(k.position(w) / n as f64));
                if d < eps {
                    continue;
                }
                heat_estimate_th5(k, n, w, eps)?
            }
        };
        rep.rows.push(EstimateRow {
            n,
            omega: w.clone(),
            exact: *ex,
            estimate: est.value,
            ratio: est.value / ex,
            regime: String::from(mode.label()),
            dist_boundary: est.dist,
            det_nb: est.det_nb,
            phi: est.phi,
        });
    }
    if rep.rows.is_empty() {
        rep.warnings.push(format!("n={n}: admissible region is empty"));
    }
    Ok(rep)
}

/// Exact `p_n` on every sphere type of the support.
pub fn building_exact_table(
    k: &Kernel,
    n: u64,
    grid: &TorusGrid,
    calib: &Calibration,
) -> Result<Vec<(LatticePoint, f64)>> {
    building_support(k, n)?
        .into_iter()
        .map(|w| exact_pn_quadrature(k, n, &w, grid, calib).map(|q| (w, q.value)))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpperBoundCheck {
    pub pass: bool,
    /// Smallest `log(bound / p_n)`; negative means violated.
    pub worst_margin: f64,
    pub worst_omega: Option<LatticePoint>,
}

/// `p_n / (rho^n e^{-n phi(w/n)} P_w(0))`.
pub fn rem1_ratio(k: &Kernel, n: u64, omega: &LatticePoint, exact: f64) -> Result<f64> {
    let ctx = k.require_building()?;
    let phi = rate_phi_closure(k, &(k.position(omega) / n as f64))?;
    let p0 = macdonald_at_zero(ctx, omega)?;
    Ok(exact / (n as f64 * (k.rho().ln() - phi)).exp() / p0)
}

/// Checks `p_n <= C n^N rho^n e^{-n phi(w/n)} P_w(0)` on the given table.
pub fn upper_bound_rem1(
    k: &Kernel,
    n: u64,
    exact: &[(LatticePoint, f64)],
    n_exp: f64,
    c_const: f64,
) -> Result<UpperBoundCheck> {
    let mut worst = f64::INFINITY;
    let mut at = None;
    for (w, ex) in exact {
        if *ex <= 0.0 {
            continue;
        }
        let ratio = rem1_ratio(k, n, w, *ex)?;
        let margin = (c_const * (n as f64).powf(n_exp)).ln() - ratio.ln();
        if margin < worst {
            worst = margin;
            at = Some(w.clone());
        }
    }
    Ok(UpperBoundCheck {
        pass: worst >= -1e-9,
        worst_margin: worst,
        worst_omega: at,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpperBoundFit {
    pub n_exp: f64,
    pub c_const: f64,
    pub verify: UpperBoundCheck,
}

/// Smallest `N` in `{0, 0.5, ..., 4}` whose constant fitted at `n_train`
/// also bounds the table at `n_verify`.
pub fn fit_upper_bound(
    k: &Kernel,
    n_train: u64,
    train: &[(LatticePoint, f64)],
    n_verify: u64,
    verify: &[(LatticePoint, f64)],
) -> Result<UpperBoundFit> {
    let ratios: Vec<f64> = train
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|(w, e)| rem1_ratio(k, n_train, w, *e))
        .collect::<Result<_>>()?;
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let mut last = None;
    for step in 0..=8 {
        let n_exp = 0.5 * step as f64;
        let c_const = max_ratio / (n_train as f64).powf(n_exp);
        let chk = upper_bound_rem1(k, n_verify, verify, n_exp, c_const)?;
        if chk.pass {
            return Ok(UpperBoundFit { n_exp, c_const, verify: chk });
        }
        last = Some(UpperBoundFit { n_exp, c_const, verify: chk });
    }
    Ok(last.expect("at least one candidate"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::{build_root_system, QParams, RootKind};
    use crate::tree::{tree_exact_pn, TreeWalk};
    use crate::walk::{build_kernel, Step, WalkSpec};

    fn lp(v: &[i64]) -> LatticePoint {
        LatticePoint(v.to_vec())
    }

    fn kernel(kind: RootKind, r: usize, q: f64, steps: &[(&[i64], f64)]) -> Kernel {
        let rs = build_root_system(kind, r).unwrap();
        let qp = QParams::uniform(&rs, q).unwrap();
        let ctx = SphericalContext::new(rs, qp).unwrap();
        let spec = WalkSpec::building(
            ctx,
            steps
                .iter()
                .map(|(m, a)| Step { mu: lp(m), weight: *a })
                .collect(),
        )
        .unwrap();
        build_kernel(&spec).unwrap()
    }

    #[test]
    fn tree_small_values() {
        let k = kernel(RootKind::A, 1, 2.0, &[(&[1], 1.0)]);
        let g = default_grid(&k, 64).unwrap();
        let c = plancherel_calibrate(k.context().unwrap(), &g).unwrap();
        assert!((c.c_norm - 1.0).abs() < 1e-12);
        let v = exact_pn_quadrature(&k, 0, &lp(&[0]), &g, &c).unwrap().value;
        assert!((v - 1.0).abs() < 1e-12);
        let v = exact_pn_quadrature(&k, 2, &lp(&[0]), &g, &c).unwrap().value;
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
        let v = exact_pn_quadrature(&k, 1, &lp(&[1]), &g, &c).unwrap().value;
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(exact_pn_quadrature(&k, 3, &lp(&[2]), &g, &c).unwrap().value, 0.0);
    }

    #[test]
    fn zero_steps_put_no_mass_off_the_origin() {
        let k = kernel(RootKind::A, 2, 2.0, &[(&[1, 0], 0.5), (&[0, 1], 0.5)]);
        let g = default_grid(&k, 32).unwrap();
        let c = plancherel_calibrate(k.context().unwrap(), &g).unwrap();
        for w in [[1, 1], [3, 0], [2, 5], [4, 4]] {
            let v = exact_pn_quadrature(&k, 0, &lp(&w), &g, &c).unwrap().value;
            assert!(v.abs() < 1e-12, "{w:?} {v}");
        }
    }

    #[test]
    fn tree_quadrature_matches_dp_including_edge() {
        let k = kernel(RootKind::A, 1, 3.0, &[(&[1], 1.0)]);
        let g = default_grid(&k, 64).unwrap();
        let c = plancherel_calibrate(k.context().unwrap(), &g).unwrap();
        let w = TreeWalk::nearest_neighbour(3.0);
        for m in [0usize, 2, 10, 18, 20, 30, 40] {
            let dp = tree_exact_pn(&w, 40, m);
            let qd = exact_pn_quadrature(&k, 40, &lp(&[m as i64]), &g, &c).unwrap().value;
            assert!(((qd - dp) / dp).abs() < 1e-9, "m={m} {qd} {dp}");
        }
    }

    #[test]
    fn crosscheck_matches_quadrature_on_a2() {
        let k = kernel(RootKind::A, 2, 2.0, &[(&[1, 0], 0.5), (&[0, 1], 0.5)]);
        let g = default_grid(&k, 32).unwrap();
        let c = plancherel_calibrate(k.context().unwrap(), &g).unwrap();
        let mut cache = MacdonaldCache::new();
        for n in [1u64, 2, 5] {
            let ex = macdonald_expansion(&k, n, &mut cache).unwrap();
            let mut mass = 0.0;
            for w in building_support(&k, n).unwrap() {
                let q = match exact_pn_quadrature(&k, n, &w, &g, &c) { Ok(q) => q.value, Err(e) => panic!("n={n} w={:?} {e:?} x={:?}", w.0, contour_shift(&k, n, &w).unwrap()) };
                let x = ex.pn.get(&w).copied().unwrap_or(0.0);
                assert!((q - x).abs() <= 1e-9 * q.abs() + 1e-14, "n={n} w={:?} {q} {x}", w.0);
                mass += ex.coeffs.get(&w).copied().unwrap_or(0.0);
            }
            assert!((mass - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn interior_estimate_needs_eps() {
        let k = kernel(RootKind::A, 1, 2.0, &[(&[1], 1.0)]);
        assert!(matches!(
            heat_estimate_th5(&k, 10, &lp(&[10]), 0.05),
            Err(Error::Hypothesis(_))
        ));
        let e = heat_estimate_th4(&k, 10, &lp(&[0])).unwrap();
        assert!(e.value.is_finite() && e.value > 0.0);
    }
}
