//! Green function `G_zeta(O, x) = sum_n zeta^n p_n(O, x)`: series oracles and
//! the two-regime estimators.
//!
//! Subcritical series stop once the tail, bounded through `p_n <= rho^n`,
//! falls below the tolerance. The critical series has no geometric tail; it
//! is summed to an explicit cap and the remainder is modelled by
//! `A n^{-p}(1 + b/n)` with `p = r/2 + |Phi+|`, fitted on the last terms.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DVector;
#[allow(unused_imports)]
use num_traits::Float;

use crate::building::{default_grid, exact_pn_quadrature, plancherel_calibrate};
use crate::error::{Error, Result};
use crate::exppoly::LatticePoint;
use crate::lattice::{convolution_series, DEFAULT_AXIS_GUARD};
use crate::rate::saddle;
use crate::rootsys::{RootKind, RootSystem};
use crate::sphfun::macdonald_at_zero;
use crate::tree::{TreeChain, TreeWalk};
use crate::walk::{Flavor, Kernel};

/// Hard limit on the number of subcritical terms.
const MAX_TERMS: u64 = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Subcritical,
    Critical,
}

pub fn regime(k: &Kernel, zeta: f64) -> Result<Regime> {
    let zr = zeta * k.rho();
    if !(zeta > 0.0) || zr > 1.0 + 1e-15 {
        return Err(Error::InvalidArgument(format!(
            "zeta must lie in (0, 1/rho] = (0, {}], got {zeta}",
            1.0 / k.rho()
        )));
    }
    Ok(if zr < 1.0 - 1e-15 {
        Regime::Subcritical
    } else {
        Regime::Critical
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GreenOptions {
    /// Relative tolerance on the certified subcritical tail.
    pub tol: f64,
    /// Number of terms in the critical regime.
    pub cap: Option<u64>,
    /// Torus resolution when the quadrature oracle is used.
    pub grid_n: usize,
}

impl Default for GreenOptions {
    fn default() -> Self {
        GreenOptions {
            tol: 1e-12,
            cap: None,
            grid_n: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GreenValue {
    pub omega: LatticePoint,
    pub value: f64,
    /// Terms summed, `n = 0..terms`.
    pub terms: u64,
    /// Tail bound (subcritical) or modelled tail (critical).
    pub tail: f64,
    /// True when the tail is a proven bound.
    pub certified: bool,
    /// Relative change between the cap and half the cap (critical only).
    pub cap_sensitivity: Option<f64>,
}

/// Collects `zeta^n p_n(w_i)` as the oracle produces them.
struct Accum {
    zr: f64,
    tol: f64,
    cap: Option<u64>,
    sums: Vec<f64>,
    terms: Vec<Vec<f64>>,
    n: u64,
    log_zr: f64,
}

impl Accum {
    fn new(k: &Kernel, zeta: f64, count: usize, opts: &GreenOptions) -> Result<Accum> {
        let reg = regime(k, zeta)?;
        let cap = match reg {
            Regime::Subcritical => None,
            Regime::Critical => Some(opts.cap.ok_or_else(|| {
                Error::Hypothesis(
                    "critical Green series has no geometric tail; an n-cap is required".into(),
                )
            })?),
        };
        Ok(Accum {
            zr: zeta * k.rho(),
            tol: opts.tol,
            cap,
            sums: vec![0.0; count],
            terms: vec![Vec::new(); count],
            n: 0,
            log_zr: (zeta * k.rho()).ln(),
        })
    }

    fn fresh(&self) -> Accum {
        Accum {
            sums: vec![0.0; self.sums.len()],
            terms: vec![Vec::new(); self.terms.len()],
            n: 0,
            ..*self
        }
    }

    /// Adds the terms for the current `n` from `rho^{-n} p_n`; returns
    /// whether more are needed.
    fn push(&mut self, scaled: &[f64]) -> bool {
        let scale = (self.n as f64 * self.log_zr).exp();
        for (i, p) in scaled.iter().enumerate() {
            let t = scale * p;
            self.sums[i] += t;
            if self.cap.is_some() {
                self.terms[i].push(t);
            }
        }
        self.n += 1;
        match self.cap {
            Some(c) => self.n <= c,
            None => {
                let tail = self.tail_bound();
                let min = self.sums.iter().copied().fold(f64::INFINITY, f64::min);
                !(min > 0.0 && tail <= self.tol * min) && self.n < MAX_TERMS
            }
        }
    }

    fn tail_bound(&self) -> f64 {
        self.zr.powf(self.n as f64) / (1.0 - self.zr)
    }

    fn finish(self, k: &Kernel, omegas: &[LatticePoint]) -> Result<Vec<GreenValue>> {
        let mut out = Vec::with_capacity(omegas.len());
        match self.cap {
            None => {
                let tail = self.tail_bound();
                for (w, s) in omegas.iter().zip(&self.sums) {
                    if !(tail <= self.tol * s) {
                        return Err(Error::ConvergenceFailure(format!(
                            "Green series at {:?} not converged after {} terms",
                            w.0, self.n
                        )));
                    }
                    out.push(GreenValue {
                        omega: w.clone(),
                        value: *s,
                        terms: self.n,
                        tail,
                        certified: true,
                        cap_sensitivity: None,
                    });
                }
            }
            Some(cap) => {
                let p = critical_power(k)?;
                for (w, terms) in omegas.iter().zip(&self.terms) {
                    let full = capped_with_tail(k, w, terms, cap, p)?;
                    let half = capped_with_tail(k, w, terms, cap / 2, p)?;
                    out.push(GreenValue {
                        omega: w.clone(),
                        value: full.0,
                        terms: cap + 1,
                        tail: full.1,
                        certified: false,
                        cap_sensitivity: Some(((full.0 - half.0) / full.0).abs()),
                    });
                }
            }
        }
        Ok(out)
    }
}

/// Decay exponent of `rho^{-n} p_n(w)` at fixed `w`.
fn critical_power(k: &Kernel) -> Result<f64> {
    let r = k.rank() as f64;
    let np = match k.context() {
        Some(ctx) => ctx.root_system().positive_roots().len() as f64,
        None => 0.0,
    };
    let p = r / 2.0 + np;
    if !(p > 1.0) {
        return Err(Error::Hypothesis(format!(
            "critical Green function is finite only for transient walks (r/2 + |Phi+| = {p} must exceed 1)"
        )));
    }
    Ok(p)
}

/// Partial sum to `cap` plus the fitted tail; returns `(value, tail)`.
fn capped_with_tail(k: &Kernel, w: &LatticePoint, terms: &[f64], cap: u64, p: f64) -> Result<(f64, f64)> {
    let per = k.periodicity();
    let last_in = |upto: u64| (0..=upto).rev().find(|&n| per.in_class(n, w));
    let n1 = last_in(cap).ok_or_else(|| Error::ConvergenceFailure("no admissible term below cap".into()))?;
    let n2 = last_in(cap / 2).filter(|&n| n > 0 && n < n1).ok_or_else(|| {
        Error::ConvergenceFailure(format!("cap {cap} too small for the tail fit"))
    })?;
    let gap = (1..=per.order().max(1) as u64)
        .find(|&g| n1 >= g && per.in_class(n1 - g, w))
        .unwrap_or(1) as f64;
    let partial: f64 = terms[..=cap as usize].iter().sum();
    let (f1, f2) = (n1 as f64, n2 as f64);
    let y1 = terms[n1 as usize] * f1.powf(p);
    let y2 = terms[n2 as usize] * f2.powf(p);
    let ab = (y1 - y2) / (1.0 / f1 - 1.0 / f2);
    let a = y1 - ab / f1;
    let x0 = f1 + gap / 2.0;
    let tail = (a * x0.powf(1.0 - p) / (p - 1.0) + ab * x0.powf(-p) / p) / gap;
    Ok((partial + tail, tail))
}

/// `G_zeta(O, x)` for `x` in each sphere `V_w(O)` (or each lattice point).
pub fn green_series(k: &Kernel, zeta: f64, omegas: &[LatticePoint], opts: &GreenOptions) -> Result<Vec<GreenValue>> {
    for w in omegas {
        if w.dim() != k.rank() {
            return Err(Error::InvalidArgument(format!("{:?} has the wrong rank", w.0)));
        }
    }
    let mut acc = Accum::new(k, zeta, omegas.len(), opts)?;
    match k.flavor() {
        Flavor::Lattice => {
            let extent = k
                .support()
                .iter()
                .map(|s| s.key.0.iter().map(|x| x.abs()).max().unwrap_or(0))
                .max()
                .unwrap_or(1)
                .max(1) as u64;
            let n_max = opts.cap.unwrap_or((DEFAULT_AXIS_GUARD as u64 - 1) / (2 * extent));
            let mut buf = vec![0.0; omegas.len()];
            convolution_series(k, n_max, DEFAULT_AXIS_GUARD, |t| {
                for (b, w) in buf.iter_mut().zip(omegas) {
                    *b = t.get(w);
                }
                acc.push(&buf)
            })?;
        }
        Flavor::Building => {
            let ctx = k.require_building()?;
            if ctx.rank() == 1 && ctx.root_system().kind() == RootKind::A {
                tree_terms(k, omegas, &mut acc)?;
            } else {
                for w in omegas {
                    if !RootSystem::is_dominant_int(&w.0) {
                        return Err(Error::InvalidArgument(format!("{:?} is not dominant", w.0)));
                    }
                }
                let grid = default_grid(k, opts.grid_n)?;
                let calib = plancherel_calibrate(ctx, &grid)?;
                let mut buf = vec![0.0; omegas.len()];
                loop {
                    let scale = (-(acc.n as f64) * k.rho().ln()).exp();
                    for (b, w) in buf.iter_mut().zip(omegas) {
                        *b = exact_pn_quadrature(k, acc.n, w, &grid, &calib)?.value * scale;
                    }
                    if !acc.push(&buf) {
                        break;
                    }
                }
            }
        }
    }
    acc.finish(k, omegas)
}

/// Drives the distance chain. Truncation at `m + 64 sqrt(n) kmax` is far
/// beyond the diffusive spread of the scaled chain.
fn tree_terms(k: &Kernel, omegas: &[LatticePoint], acc: &mut Accum) -> Result<()> {
    let walk = TreeWalk::from_kernel(k)?;
    let kmax = walk.max_step().max(1);
    let ms: Vec<usize> = omegas.iter().map(|w| w.0[0].max(0) as usize).collect();
    let m_max = ms.iter().copied().max().unwrap_or(0);
    let mut budget: u64 = acc.cap.map(|c| c + 1).unwrap_or(1024);
    loop {
        let exact = (budget as usize * kmax + m_max) / 2 + 1;
        let diffusive = m_max + 64 * ((budget as f64).sqrt() as usize + 1) * kmax;
        let mut chain = TreeChain::new(&walk, exact.min(diffusive).max(m_max));
        let mut a = acc.fresh();
        let mut buf = vec![0.0; ms.len()];
        let mut more = true;
        while more && chain.n() < budget {
            for (b, &m) in buf.iter_mut().zip(&ms) {
                *b = chain.scaled(m);
            }
            more = a.push(&buf);
            if more {
                chain.step();
            }
        }
        if !more || acc.cap.is_some() {
            *acc = a;
            return Ok(());
        }
        if budget >= MAX_TERMS {
            return Err(Error::ConvergenceFailure("Green series needs too many terms".into()));
        }
        budget *= 4;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuSolution {
    pub t0: f64,
    pub t_u: f64,
    pub s_u: DVector<f64>,
    /// `|log kappa(s_u) + log(zeta rho)|`.
    pub kappa_residual: f64,
    /// Angle between `grad kappa(s_u)` and `u`.
    pub angle: f64,
}

/// The point `s_u` on `kappa = (zeta rho)^{-1}` where `grad kappa` points
/// along `u`, found by bisection in `t` on `log kappa(s(u/t)) = -log(zeta rho)`.
pub fn s_u_solve(k: &Kernel, zeta: f64, u: &DVector<f64>) -> Result<SuSolution> {
    if regime(k, zeta)? != Regime::Subcritical {
        return Err(Error::Hypothesis("the level set kappa = 1/(zeta rho) needs zeta rho < 1".into()));
    }
    let nu = u.norm();
    if !(nu > 0.0) || u.len() != k.rank() {
        return Err(Error::InvalidArgument("direction must be a nonzero vector of the right rank".into()));
    }
    let u = u / nu;
    let origin = DVector::zeros(k.rank());
    if !(k.dist_to_boundary(&origin) > 0.0) {
        return Err(Error::OutsideDomain("the origin must lie inside the support hull".into()));
    }
    let mut tau = f64::INFINITY;
    for f in k.hull().facets() {
        let d = f.normal.dot(&u);
        if d > 0.0 {
            tau = tau.min(f.offset / d);
        }
    }
    let t0 = 1.0 / tau;
    let target = -(zeta * k.rho()).ln();
    let fam = k.family();
    let diam = k.hull().diameter();
    let h = |t: f64| -> Result<f64> {
        let delta = &u / t;
        match saddle(k, &delta) {
            Ok(s) => Ok(fam.log_kappa(&s.s) - target),
            Err(_) if k.dist_to_boundary(&delta) < 1e-6 * diam => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };
    let mut lo = t0;
    let mut hi = 2.0 * t0;
    let mut seen = (f64::INFINITY, f64::NEG_INFINITY);
    let mut tries = 0;
    loop {
        let v = h(hi)?;
        seen = (seen.0.min(v + target), seen.1.max(v + target));
        if v < 0.0 {
            break;
        }
        lo = hi;
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::ConvergenceFailure(format!(
                "no sign change: log kappa(s_t) ranged over [{:.3e}, {:.3e}], target {target:.3e}",
                seen.0, seen.1
            )));
        }
    }
    for _ in 0..200 {
        if hi - lo <= 1e-15 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if h(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t_u = 0.5 * (lo + hi);
    let sd = saddle(k, &(&u / t_u))?;
    let kappa_residual = (fam.log_kappa(&sd.s) - target).abs();
    let g = fam.grad(&sd.s);
    let along = g.dot(&u);
    let angle = (&g - &u * along).norm().atan2(along);
    if !(kappa_residual <= 1e-10) || !(angle <= 1e-8) {
        return Err(Error::ConvergenceFailure(format!(
            "s_u check failed: kappa residual {kappa_residual:.3e}, angle {angle:.3e}"
        )));
    }
    Ok(SuSolution {
        t0,
        t_u,
        s_u: sd.s,
        kappa_residual,
        angle,
    })
}

/// The two-regime estimate with unit constant.
pub fn green_estimate(k: &Kernel, zeta: f64, omega: &LatticePoint) -> Result<f64> {
    if omega.dim() != k.rank() {
        return Err(Error::InvalidArgument(format!("{:?} has the wrong rank", omega.0)));
    }
    if omega.0.iter().all(|&x| x == 0) {
        return Err(Error::Hypothesis(
            "Green function estimates hold for all x ≠ O; got the origin".into(),
        ));
    }
    let reg = regime(k, zeta)?;
    let (p0, np) = match k.context() {
        Some(ctx) => {
            if !RootSystem::is_dominant_int(&omega.0) {
                return Err(Error::InvalidArgument(format!("{:?} is not dominant", omega.0)));
            }
            (
                macdonald_at_zero(ctx, omega)?,
                ctx.root_system().positive_roots().len() as f64,
            )
        }
        None => (1.0, 0.0),
    };
    let r = k.rank() as f64;
    let pos = k.position(omega);
    let norm = pos.norm();
    match reg {
        Regime::Subcritical => {
            let su = s_u_solve(k, zeta, &pos)?;
            Ok(p0 * norm.powf(-(r - 1.0) / 2.0 - np) * (-su.s_u.dot(&pos)).exp())
        }
        Regime::Critical => {
            critical_power(k)?;
            Ok(p0 * norm.powf(2.0 - r - 2.0 * np))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::{build_root_system, QParams};
    use crate::sphfun::SphericalContext;
    use crate::tree::tree_nn_green;
    use crate::walk::{build_kernel, Step, WalkSpec};

    fn tree(q: f64) -> Kernel {
        let rs = build_root_system(RootKind::A, 1).unwrap();
        let qp = QParams::uniform(&rs, q).unwrap();
        let ctx = SphericalContext::new(rs, qp).unwrap();
        let spec = WalkSpec::building(ctx, vec![Step { mu: LatticePoint(vec![1]), weight: 1.0 }]).unwrap();
        build_kernel(&spec).unwrap()
    }

    fn z1() -> Kernel {
        let spec = WalkSpec::lattice(
            1,
            vec![
                Step { mu: LatticePoint(vec![1]), weight: 0.5 },
                Step { mu: LatticePoint(vec![-1]), weight: 0.5 },
            ],
        )
        .unwrap();
        build_kernel(&spec).unwrap()
    }

    #[test]
    fn tree_series_matches_closed_form() {
        let k = tree(2.0);
        let zeta = 0.9 / k.rho();
        let ws: Vec<LatticePoint> = [1, 5, 20].iter().map(|&m| LatticePoint(vec![m])).collect();
        let g = green_series(&k, zeta, &ws, &GreenOptions::default()).unwrap();
        for (v, m) in g.iter().zip([1usize, 5, 20]) {
            let c = tree_nn_green(2.0, zeta, m);
            assert!(((v.value - c) / c).abs() < 1e-8, "m={m} {} {c}", v.value);
            assert!(v.certified);
        }
    }

    #[test]
    fn small_zeta_first_term_and_monotone() {
        let k = tree(2.0);
        let w = [LatticePoint(vec![1])];
        let g = green_series(&k, 1e-4, &w, &GreenOptions::default()).unwrap()[0].value;
        assert!(((g - 1e-4 / 3.0) / g).abs() < 1e-3);
        let mut last = 0.0;
        for f in [0.2, 0.5, 0.8, 0.95] {
            let v = green_series(&k, f / k.rho(), &w, &GreenOptions::default()).unwrap()[0].value;
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn critical_needs_cap_and_fits_tail() {
        let k = tree(2.0);
        let zeta = 1.0 / k.rho();
        let w = [LatticePoint(vec![3])];
        assert!(matches!(
            green_series(&k, zeta, &w, &GreenOptions::default()),
            Err(Error::Hypothesis(_))
        ));
        let opts = GreenOptions { cap: Some(4000), ..Default::default() };
        let g = &green_series(&k, zeta, &w, &opts).unwrap()[0];
        let c = tree_nn_green(2.0, zeta, 3);
        assert!(((g.value - c) / c).abs() < 1e-5, "{} {c}", g.value);
        assert!(g.cap_sensitivity.unwrap() < 1e-3);
    }

    #[test]
    fn s_u_inverts_cosh() {
        let k = z1();
        let zeta = 1.0 / 1f64.cosh();
        let s = s_u_solve(&k, zeta, &DVector::from_vec(vec![1.0])).unwrap();
        assert!((s.s_u[0] - 1.0).abs() < 1e-9);
        let s = s_u_solve(&k, zeta, &DVector::from_vec(vec![-2.0])).unwrap();
        assert!((s.s_u[0] + 1.0).abs() < 1e-9);
        let near = s_u_solve(&k, 1.0 - 1e-6, &DVector::from_vec(vec![1.0])).unwrap();
        assert!(near.s_u.norm() < 1e-2);
    }

    #[test]
    fn s_u_equivariant_on_a2() {
        let rs = build_root_system(RootKind::A, 2).unwrap();
        let qp = QParams::uniform(&rs, 2.0).unwrap();
        let ctx = SphericalContext::new(rs, qp).unwrap();
        let spec = WalkSpec::building(
            ctx,
            vec![
                Step { mu: LatticePoint(vec![1, 0]), weight: 0.5 },
                Step { mu: LatticePoint(vec![0, 1]), weight: 0.5 },
            ],
        )
        .unwrap();
        let k = build_kernel(&spec).unwrap();
        let zeta = 0.7 / k.rho();
        let u = DVector::from_vec(vec![0.3, 0.8]);
        let base = s_u_solve(&k, zeta, &u).unwrap().s_u;
        let weyl = k.context().unwrap().weyl();
        for w in 0..weyl.order() {
            let m = weyl.orthogonal(w);
            let s = s_u_solve(&k, zeta, &(m * &u)).unwrap().s_u;
            assert!((s - m * &base).norm() < 1e-9);
        }
    }

    #[test]
    fn origin_is_refused() {
        let k = tree(2.0);
        let e = green_estimate(&k, 0.5 / k.rho(), &LatticePoint(vec![0])).unwrap_err();
        assert!(format!("{e}").contains("x ≠ O"));
    }

    #[test]
    fn lattice_decay_rate() {
        let k = z1();
        let zeta = 0.9;
        let ws: Vec<LatticePoint> = (20..=60).map(|m| LatticePoint(vec![m])).collect();
        let g = green_series(&k, zeta, &ws, &GreenOptions::default()).unwrap();
        let s = s_u_solve(&k, zeta, &DVector::from_vec(vec![1.0])).unwrap().s_u[0];
        let slope = -(g[40].value.ln() - g[0].value.ln()) / 40.0;
        assert!((slope - s).abs() < 1e-3, "{slope} {s}");
    }
}
