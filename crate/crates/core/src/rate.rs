//! Saddle points, the rate function `phi` (Legendre transform of
//! `log kappa`) and the boundary-exponent fit.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::numeric::{gauss_legendre, log_sum_exp};
use crate::walk::Kernel;

/// A finite family `x -> log sum_v exp(log w_v + <x, v>)`.
#[derive(Clone, Debug)]
pub struct ExpFamily {
    dim: usize,
    points: Vec<DVector<f64>>,
    log_weights: Vec<f64>,
}

impl ExpFamily {
    pub fn new(points: Vec<DVector<f64>>, log_weights: Vec<f64>) -> ExpFamily {
        let dim = points.first().map_or(0, |p| p.len());
        ExpFamily {
            dim,
            points,
            log_weights,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    fn exponents(&self, x: &DVector<f64>) -> Vec<f64> {
        self.points
            .iter()
            .zip(&self.log_weights)
            .map(|(v, lw)| lw + v.dot(x))
            .collect()
    }

    pub fn log_kappa(&self, x: &DVector<f64>) -> f64 {
        log_sum_exp(&self.exponents(x))
    }

    /// Tilted probabilities `w_v e^{<x,v>} / kappa(x)`.
    pub fn tilted(&self, x: &DVector<f64>) -> Vec<f64> {
        let e = self.exponents(x);
        let m = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = e.iter().map(|a| (a - m).exp()).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|a| a / s).collect()
    }

    pub fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        let w = self.tilted(x);
        self.points
            .iter()
            .zip(&w)
            .fold(DVector::zeros(self.dim), |a, (v, wi)| a + v * *wi)
    }

    /// Covariance of the tilted law, `B_x`.
    pub fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let w = self.tilted(x);
        let m = self
            .points
            .iter()
            .zip(&w)
            .fold(DVector::zeros(self.dim), |a, (v, wi)| a + v * *wi);
        let mut b = DMatrix::zeros(self.dim, self.dim);
        for (v, wi) in self.points.iter().zip(&w) {
            let d = v - &m;
            b += &d * d.transpose() * *wi;
        }
        b
    }

    /// Solves `grad log kappa(s) = delta` by damped Newton from `start`.
    pub fn solve_saddle(&self, delta: &DVector<f64>, start: &DVector<f64>) -> Result<(DVector<f64>, usize, f64)> {
        let f = |s: &DVector<f64>| self.log_kappa(s) - s.dot(delta);
        let mut s = start.clone();
        let mut g = self.grad(&s) - delta;
        let mut fs = f(&s);
        let scale = 1.0 + delta.norm();
        for it in 0..200 {
            let gn = g.norm();
            if gn == 0.0 {
                return Ok((s, it, gn));
            }
            let b = self.hessian(&s);
            let d = match b.clone().cholesky() {
                Some(c) => c.solve(&(-&g)),
                None => {
                    let reg = b + DMatrix::identity(self.dim, self.dim) * (1e-12 + 1e-8 * gn);
                    match reg.cholesky() {
                        Some(c) => c.solve(&(-&g)),
                        None => -&g,
                    }
                }
            };
            // Converged once the residual is tiny and the Newton correction
            // is negligible; near the boundary B is small and the residual
            // alone does not pin down s.
            if gn <= 1e-12 * scale && d.norm() <= 1e-11 * (1.0 + s.norm()) {
                return Ok((s + d, it + 1, gn));
            }
            let slope = g.dot(&d);
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let sn = &s + &d * t;
                let fn_ = f(&sn);
                let gn_new = self.grad(&sn) - delta;
                let armijo = fn_ <= fs + 1e-4 * t * slope;
                let flat = fn_ <= fs + 1e-12 * (1.0 + fs.abs()) && gn_new.norm() < gn;
                if fn_.is_finite() && (armijo || flat) {
                    s = sn;
                    g = gn_new;
                    fs = fn_;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        let gn = g.norm();
        if gn <= 1e-10 * scale {
            return Ok((s, 200, gn));
        }
        Err(Error::ConvergenceFailure(format!(
            "saddle residual {gn:.3e} at delta {:?}",
            delta.as_slice()
        )))
    }
}

#[derive(Clone, Debug)]
pub struct Saddle {
    pub delta: DVector<f64>,
    /// `s(delta)`, with `grad log kappa(s) = delta`.
    pub s: DVector<f64>,
    /// `phi(delta) = <s, delta> - log kappa(s)`.
    pub phi: f64,
    pub b: DMatrix<f64>,
    pub det_b: f64,
    /// `||B_s^{-1}||` in the operator norm.
    pub inv_norm_b: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Saddle point for `delta` in the interior of the support hull.
pub fn saddle(k: &Kernel, delta: &DVector<f64>) -> Result<Saddle> {
    let d = k.dist_to_boundary(delta);
    if !(d > 0.0) {
        return Err(Error::OutsideDomain(format!(
            "delta {:?} has boundary distance {d:.3e}",
            delta.as_slice()
        )));
    }
    let fam = k.family();
    let (s, iterations, residual) = fam.solve_saddle(delta, &DVector::zeros(k.rank()))?;
    let b = fam.hessian(&s);
    Ok(finish_saddle(&fam, delta, s, b, iterations, residual))
}

fn finish_saddle(
    fam: &ExpFamily,
    delta: &DVector<f64>,
    s: DVector<f64>,
    b: DMatrix<f64>,
    iterations: usize,
    residual: f64,
) -> Saddle {
    let phi = s.dot(delta) - fam.log_kappa(&s);
    let eig = b.clone().symmetric_eigen();
    let lmin = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let det_b = eig.eigenvalues.iter().product();
    Saddle {
        delta: delta.clone(),
        s,
        phi,
        b,
        det_b,
        inv_norm_b: 1.0 / lmin,
        residual,
        iterations,
    }
}

/// `B_s`: Hessian of `log kappa` at `s`.
pub fn hessian_b(k: &Kernel, s: &DVector<f64>) -> DMatrix<f64> {
    k.family().hessian(s)
}

pub fn rate_phi(k: &Kernel, delta: &DVector<f64>) -> Result<f64> {
    Ok(saddle(k, delta)?.phi)
}

pub fn grad_phi(k: &Kernel, delta: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(saddle(k, delta)?.s)
}

/// `phi` on the closed hull. On the boundary the supremum is attained at
/// infinity and equals the rate function of the face containing `delta`.
pub fn rate_phi_closure(k: &Kernel, delta: &DVector<f64>) -> Result<f64> {
    let hull = k.hull();
    let tol = 1e-9 * hull.diameter();
    let d = hull.distance(delta);
    if d < -tol {
        return Err(Error::OutsideDomain(format!(
            "delta {:?} lies outside the support hull",
            delta.as_slice()
        )));
    }
    if d > tol {
        return rate_phi(k, delta);
    }
    let active = hull.active_facets(delta, tol);
    let on = hull.points_on(&active);
    let pts_all = hull.points();
    // Map hull point indices back to kernel support coefficients.
    let mut pts = Vec::new();
    let mut logw = Vec::new();
    for &i in &on {
        let p = &pts_all[i];
        let c: f64 = k
            .support()
            .iter()
            .filter(|s| (&s.pos - p).norm() < 1e-12 * (1.0 + p.norm()))
            .map(|s| s.coeff)
            .sum();
        pts.push(p.clone());
        logw.push(c.ln());
    }
    if pts.len() == 1 {
        return Ok(-logw[0]);
    }
    let v0 = pts[0].clone();
    // Orthonormal basis of the face directions.
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for p in &pts[1..] {
        let mut u = p - &v0;
        for b in &basis {
            u -= b * b.dot(&u);
        }
        let n = u.norm();
        if n > 1e-9 * hull.diameter() {
            basis.push(u / n);
        }
    }
    let proj = |x: &DVector<f64>| -> DVector<f64> {
        let y = x - &v0;
        DVector::from_iterator(basis.len(), basis.iter().map(|b| b.dot(&y)))
    };
    let fam = ExpFamily::new(pts.iter().map(&proj).collect(), logw);
    let target = proj(delta);
    let (s, _, _) = fam.solve_saddle(&target, &DVector::zeros(basis.len()))?;
    Ok(s.dot(&target) - fam.log_kappa(&s))
}

/// Tilted weights and pairings `y_v = <theta, v>` for the complex point
/// `x + i t theta`, with `m`, `D^2` and `D^3` of `log kappa` along `theta`.
fn directional_cumulants(
    base: &[f64],
    y: &[f64],
    t: f64,
) -> (Complex64, Complex64, Complex64) {
    let w: Vec<Complex64> = base
        .iter()
        .zip(y)
        .map(|(b, yv)| Complex64::from_polar(*b, t * yv))
        .collect();
    let s: Complex64 = w.iter().sum();
    let m: Complex64 = w.iter().zip(y).map(|(wi, yv)| wi * *yv).sum::<Complex64>() / s;
    let mut d2 = Complex64::new(0.0, 0.0);
    let mut d3 = Complex64::new(0.0, 0.0);
    for (wi, yv) in w.iter().zip(y) {
        let c = Complex64::new(*yv, 0.0) - m;
        d2 += wi * c * c;
        d3 += wi * c * c * c;
    }
    (m, d2 / s, d3 / s)
}

fn check_strip(k: &Kernel, theta: &DVector<f64>) -> Result<()> {
    let vmax = k
        .support()
        .iter()
        .map(|s| s.pos.norm())
        .fold(0.0, f64::max);
    if theta.norm() * 4.0 * vmax >= 1.0 {
        return Err(Error::OutsideDomain(format!(
            "|theta| = {} outside the strip |theta| < {}",
            theta.norm(),
            1.0 / (4.0 * vmax)
        )));
    }
    Ok(())
}

fn gl_integral(f: impl Fn(f64) -> Complex64, nodes: usize) -> Complex64 {
    let (x, w) = gauss_legendre(nodes);
    x.iter().zip(&w).map(|(t, wi)| f(*t) * *wi).sum()
}

fn strip_integral(
    k: &Kernel,
    x: &DVector<f64>,
    theta: &DVector<f64>,
    f: impl Fn(f64, Complex64, Complex64) -> Complex64,
) -> Result<Complex64> {
    check_strip(k, theta)?;
    let fam = k.family();
    let base = fam.tilted(x);
    let y: Vec<f64> = fam.points().iter().map(|v| v.dot(theta)).collect();
    let g = |t: f64| {
        let (_, d2, d3) = directional_cumulants(&base, &y, t);
        f(t, d2, d3)
    };
    let a = gl_integral(g, 32);
    let b = gl_integral(g, 64);
    let change = (a - b).norm();
    if change > 1e-10 * (1.0 + b.norm()) {
        return Err(Error::QuadratureNonConvergence { change, tol: 1e-10 });
    }
    Ok(b)
}

/// `-int_0^1 (1-t) D_theta^2 log kappa(x + i t theta) dt`.
pub fn phi_var(k: &Kernel, x: &DVector<f64>, theta: &DVector<f64>) -> Result<Complex64> {
    strip_integral(k, x, theta, |t, d2, _| -d2 * (1.0 - t))
}

/// `-3i int_0^1 (1-t)^2 D_theta^3 log kappa(x + i t theta) dt`, so that
/// `phi_var = -B_x(theta, theta)/2 + psi_var/6`.
pub fn psi_var(k: &Kernel, x: &DVector<f64>, theta: &DVector<f64>) -> Result<Complex64> {
    strip_integral(k, x, theta, |t, _, d3| {
        Complex64::new(0.0, -3.0) * d3 * (1.0 - t) * (1.0 - t)
    })
}

/// Points of a regular grid of spacing `h` (shifted by `shift * h`) lying
/// in the hull at distance at least `min_dist` from the boundary.
pub fn hull_grid(k: &Kernel, h: f64, shift: f64, min_dist: f64) -> Vec<DVector<f64>> {
    let (lo, hi) = k.hull().bounding_box();
    let r = k.rank();
    let counts: Vec<usize> = (0..r)
        .map(|j| ((hi[j] - lo[j]) / h).floor() as usize + 2)
        .collect();
    let total: usize = counts.iter().product();
    let mut out = Vec::new();
    for mut idx in 0..total {
        let mut p = DVector::zeros(r);
        for j in (0..r).rev() {
            p[j] = lo[j] + (((idx % counts[j]) as f64) + shift) * h;
            idx /= counts[j];
        }
        if k.dist_to_boundary(&p) >= min_dist {
            out.push(p);
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct BoundaryFit {
    pub eta: f64,
    pub c: f64,
    pub train_points: usize,
    pub holdout_points: usize,
    /// Smallest `log` slack of the inequality with constant `c` on the
    /// hold-out set; nonnegative.
    pub holdout_margin: f64,
}

/// `log(min_v e^{<s,v>} / (kappa(s) dist^eta))` without the `eta` term.
fn boundary_log_ratio(k: &Kernel, delta: &DVector<f64>) -> Result<(f64, f64)> {
    let sd = saddle(k, delta)?;
    let fam = k.family();
    let lk = fam.log_kappa(&sd.s);
    let mn = k
        .support()
        .iter()
        .map(|v| v.pos.dot(&sd.s))
        .fold(f64::INFINITY, f64::min);
    Ok((mn - lk, k.dist_to_boundary(delta).ln()))
}

/// Hold-out points approaching the boundary: from the drift towards every
/// support vertex and every facet centre, at relative depths `10^{-j}`.
fn radial_holdout(k: &Kernel, floor: f64) -> Vec<DVector<f64>> {
    let hull = k.hull();
    let d0 = k.drift();
    let mut targets: Vec<DVector<f64>> = hull.points().to_vec();
    for f in 0..hull.facets().len() {
        let on = hull.points_on(&[f]);
        let c = on
            .iter()
            .fold(DVector::zeros(k.rank()), |a, &i| a + &hull.points()[i])
            / on.len() as f64;
        targets.push(c);
    }
    let mut out = Vec::new();
    for t in &targets {
        for j in 1..=5 {
            let tau = 1.0 - 10f64.powi(-j);
            let p = &d0 + (t - &d0) * tau;
            if k.dist_to_boundary(&p) >= floor {
                out.push(p);
            }
        }
    }
    out
}

/// Fits the smallest `eta` in `{1, ..., 8}` for which
/// `e^{<s,v>} >= C kappa(s) dist(delta)^eta` holds on a finer shifted grid
/// and on radial sequences running into the boundary, with `C` half the
/// smallest ratio on the training grid.
pub fn boundary_exponent_fit(k: &Kernel) -> Result<BoundaryFit> {
    let diam = k.hull().diameter();
    let h = 0.02 * diam;
    let floor = 1e-6 * diam;
    let train = hull_grid(k, h, 0.5, floor);
    let mut hold = hull_grid(k, h * 0.618_033_988_75, 0.25, floor);
    hold.extend(radial_holdout(k, floor));
    if train.is_empty() {
        return Err(Error::PropertyFailure("empty fitting grid".into()));
    }
    let tr: Vec<(f64, f64)> = train
        .iter()
        .map(|d| boundary_log_ratio(k, d))
        .collect::<Result<_>>()?;
    let ho: Vec<(f64, f64)> = hold
        .iter()
        .map(|d| boundary_log_ratio(k, d))
        .collect::<Result<_>>()?;
    for step in 1..=8 {
        let eta = step as f64;
        let log_c = tr.iter().map(|(a, ld)| a - eta * ld).fold(f64::INFINITY, f64::min)
            - core::f64::consts::LN_2;
        let margin = ho
            .iter()
            .map(|(a, ld)| a - eta * ld - log_c)
            .fold(f64::INFINITY, f64::min);
        if margin >= 0.0 {
            return Ok(BoundaryFit {
                eta,
                c: log_c.exp(),
                train_points: tr.len(),
                holdout_points: ho.len(),
                holdout_margin: margin,
            });
        }
    }
    Err(Error::PropertyFailure(
        "no boundary exponent in {1, ..., 8} verifies on the hold-out set".into(),
    ))
}

/// Numerical gradient helper used by property checks.
pub fn fd_gradient(f: impl Fn(&DVector<f64>) -> Result<f64>, x: &DVector<f64>, h: f64) -> Result<DVector<f64>> {
    let mut g = DVector::zeros(x.len());
    for j in 0..x.len() {
        let mut a = x.clone();
        let mut b = x.clone();
        a[j] += h;
        b[j] -= h;
        g[j] = (f(&a)? - f(&b)?) / (2.0 * h);
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::exppoly::LatticePoint;
    use crate::walk::{build_kernel, Step, WalkSpec};

    fn z1(steps: &[(i64, f64)]) -> Kernel {
        let spec = WalkSpec::lattice(
            1,
            steps
                .iter()
                .map(|&(v, w)| Step { mu: LatticePoint(vec![v]), weight: w })
                .collect(),
        )
        .unwrap();
        build_kernel(&spec).unwrap()
    }

    #[test]
    fn simple_walk_saddle() {
        let k = z1(&[(1, 0.5), (-1, 0.5)]);
        let sd = saddle(&k, &DVector::from_vec(vec![0.5])).unwrap();
        // s = artanh(1/2), phi = s/2 - log cosh s
        let s = 0.5f64.atanh();
        assert!((sd.s[0] - s).abs() < 1e-12);
        assert!((sd.s[0] - 0.549_306_144_334_054_8).abs() < 1e-12);
        assert!((sd.phi - (0.5 * s - s.cosh().ln())).abs() < 1e-12);
        assert!((sd.phi - 0.130_812_035_941_137_1).abs() < 1e-12);
        assert!((sd.det_b - 0.75).abs() < 1e-12);
        assert!(saddle(&k, &DVector::from_vec(vec![1.0])).is_err());
    }

    #[test]
    fn saddle_near_boundary() {
        let k = z1(&[(1, 0.5), (-1, 0.5)]);
        let d = 1.0 - 1e-9;
        let sd = saddle(&k, &DVector::from_vec(vec![d])).unwrap();
        assert!((sd.s[0] - d.atanh()).abs() < 1e-6);
        assert!(sd.residual < 1e-10);
    }

    #[test]
    fn closure_at_vertex_and_edge() {
        let k = z1(&[(1, 0.25), (0, 0.25), (-1, 0.5)]);
        let v = rate_phi_closure(&k, &DVector::from_vec(vec![1.0])).unwrap();
        assert!((v - 4f64.ln()).abs() < 1e-12);
        let near = rate_phi(&k, &DVector::from_vec(vec![1.0 - 1e-7])).unwrap();
        assert!((near - v).abs() < 1e-5);
    }

    #[test]
    fn phi_var_taylor_identity() {
        let k = z1(&[(1, 0.3), (0, 0.2), (-1, 0.5)]);
        let x = DVector::from_vec(vec![0.4]);
        let th = DVector::from_vec(vec![0.2]);
        let pv = phi_var(&k, &x, &th).unwrap();
        let fam = k.family();
        let kx = fam.log_kappa(&x);
        let m = fam.grad(&x)[0];
        let zc = |t: f64| {
            k.support()
                .iter()
                .map(|s| Complex64::new(s.coeff, 0.0) * Complex64::new(s.pos[0] * x[0], s.pos[0] * t).exp())
                .sum::<Complex64>()
        };
        let lhs = zc(th[0]).ln() - kx - Complex64::new(0.0, m * th[0]);
        assert!((lhs - pv).norm() < 1e-12);
        let ps = psi_var(&k, &x, &th).unwrap();
        let b = fam.hessian(&x)[(0, 0)] * th[0] * th[0];
        assert!((pv - (Complex64::new(-0.5 * b, 0.0) + ps / 6.0)).norm() < 1e-12);
        assert!(4.0 * pv.re <= -b + 1e-12);
        assert!(phi_var(&k, &x, &DVector::from_vec(vec![0.3])).is_err());
    }

    #[test]
    fn boundary_exponents() {
        let k = z1(&[(1, 0.5), (-1, 0.5)]);
        let f = boundary_exponent_fit(&k).unwrap();
        assert_eq!(f.eta, 1.0);
        let k = z1(&[(1, 1.0 / 3.0), (0, 1.0 / 3.0), (-1, 1.0 / 3.0)]);
        let f = boundary_exponent_fit(&k).unwrap();
        assert_eq!(f.eta, 2.0);
    }
}
