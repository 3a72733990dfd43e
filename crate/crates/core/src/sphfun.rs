//! Harish-Chandra c-function, Macdonald spherical functions and vertex
//! counts of spheres.
//!
//! Points of `a_C` are handled through their pairings `p_j = <z, lambda_j>`
//! with the fundamental coweights; the public entry points also accept
//! orthonormal coordinates. Lattice points are coweight coordinates.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::DVector;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::exppoly::{ExpPoly, LatticePoint};
use crate::numeric::{next_pow2_at_least, pairwise_sum, pairwise_sum_c};
use crate::rootsys::{weyl_group, QParams, RootSystem, WeylGroup};
use crate::torus::{dft_nd, eval_on_grid, TorusGrid};

/// Distance to `2 pi i Z` below which a wall is considered hit.
pub const WALL_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
struct RootTerm {
    /// Coroot in coweight coordinates.
    a: Vec<i64>,
    /// Root in simple-root coordinates.
    b: Vec<i64>,
    q: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMode {
    /// The Weyl-sum formula; fails on walls.
    Direct,
    /// Cauchy mean of the Weyl sum over a small circle around `z`.
    Limit,
    /// Direct, falling back to the limit on walls.
    Auto,
}

#[derive(Clone, Debug)]
pub struct SphericalContext {
    rs: RootSystem,
    weyl: WeylGroup,
    q: QParams,
    poincare_inv: f64,
    roots: Vec<RootTerm>,
    /// Transposed integer matrices of `w^{-1}`, mapping pairings of `z` to
    /// pairings of `w z`.
    pairing_maps: Vec<Vec<i64>>,
}

impl SphericalContext {
    pub fn new(rs: RootSystem, q: QParams) -> Result<SphericalContext> {
        if q.simple().len() != rs.rank() {
            return Err(Error::InvalidQ("rank mismatch".into()));
        }
        let weyl = weyl_group(&rs)?;
        let poincare_inv = weyl.poincare_inv(&q);
        let roots = rs
            .positive_roots()
            .iter()
            .map(|a| RootTerm {
                a: a.coroot_coweight.clone(),
                b: a.coords.clone(),
                q: q.of_root(a),
            })
            .collect();
        let r = rs.rank();
        let pairing_maps = (0..weyl.order())
            .map(|w| {
                let m = &weyl.elements()[weyl.inverse(w)].matrix;
                let mut t = vec![0i64; r * r];
                for i in 0..r {
                    for j in 0..r {
                        t[i * r + j] = m[j * r + i];
                    }
                }
                t
            })
            .collect();
        Ok(SphericalContext {
            rs,
            weyl,
            q,
            poincare_inv,
            roots,
            pairing_maps,
        })
    }

    pub fn root_system(&self) -> &RootSystem {
        &self.rs
    }

    pub fn weyl(&self) -> &WeylGroup {
        &self.weyl
    }

    pub fn q(&self) -> &QParams {
        &self.q
    }

    pub fn rank(&self) -> usize {
        self.rs.rank()
    }

    /// `W_0(q^{-1})`.
    pub fn poincare_inv(&self) -> f64 {
        self.poincare_inv
    }

    /// Coroots of the positive roots in coweight coordinates.
    pub fn coroot_walls(&self) -> Vec<Vec<i64>> {
        self.roots.iter().map(|t| t.a.clone()).collect()
    }

    /// Pairings `<z, lambda_j>` from orthonormal coordinates.
    pub fn pairing_of(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.rs
            .coweights()
            .iter()
            .map(|l| {
                l.iter()
                    .zip(z)
                    .fold(Complex64::new(0.0, 0.0), |s, (a, b)| s + b * *a)
            })
            .collect()
    }

    pub fn pairing_of_real(&self, x: &DVector<f64>) -> Vec<f64> {
        self.rs.root_coords(x)
    }

    /// Pairings of `w z` given those of `z`.
    pub fn act_pairing(&self, w: usize, p: &[Complex64]) -> Vec<Complex64> {
        let r = self.rank();
        let m = &self.pairing_maps[w];
        (0..r)
            .map(|i| {
                (0..r).fold(Complex64::new(0.0, 0.0), |s, j| s + p[j] * m[i * r + j] as f64)
            })
            .collect()
    }

    /// `prod_{alpha > 0} q_alpha^{-<alpha, lambda>/2}`.
    pub fn rho_factor(&self, lambda: &LatticePoint) -> f64 {
        let e: f64 = self
            .roots
            .iter()
            .map(|t| {
                let pair: i64 = t.b.iter().zip(&lambda.0).map(|(b, k)| b * k).sum();
                t.q.ln() * pair as f64
            })
            .sum();
        (-0.5 * e).exp()
    }

    /// Returns `c(z)` from pairings, or `None` on a wall.
    pub fn c_pairing(&self, p: &[Complex64]) -> Option<Complex64> {
        let mut c = Complex64::new(1.0, 0.0);
        for t in &self.roots {
            let y = dot_ic(&t.a, p);
            let e = (-y).exp();
            let den = Complex64::new(1.0, 0.0) - e;
            if wall_distance(y) < WALL_TOL {
                return None;
            }
            c *= (Complex64::new(1.0, 0.0) - e / t.q) / den;
        }
        Some(c)
    }

    /// `1 / c(z)` from pairings; defined on walls.
    pub fn inv_c_pairing(&self, p: &[Complex64]) -> Complex64 {
        let mut c = Complex64::new(1.0, 0.0);
        for t in &self.roots {
            let e = (-dot_ic(&t.a, p)).exp();
            c *= (Complex64::new(1.0, 0.0) - e) / (Complex64::new(1.0, 0.0) - e / t.q);
        }
        c
    }

    /// `1 / |c(i t)|^2` at real torus coordinates `t`.
    pub fn inv_c_abs2_torus(&self, t: &[f64]) -> f64 {
        let mut v = 1.0;
        for rt in &self.roots {
            let y: f64 = rt.a.iter().zip(t).map(|(&a, x)| a as f64 * x).sum();
            let c = y.cos();
            let num = 2.0 - 2.0 * c;
            let qi = 1.0 / rt.q;
            let den = 1.0 - 2.0 * qi * c + qi * qi;
            v *= num / den;
        }
        v
    }

    /// Un-normalised Weyl sum `sum_w c(wz) e^{<wz, lambda>}`.
    fn weyl_sum_pairing(&self, lambda: &LatticePoint, p: &[Complex64]) -> Result<Complex64> {
        let mut terms = Vec::with_capacity(self.weyl.order());
        for w in 0..self.weyl.order() {
            let wp = self.act_pairing(w, p);
            let c = self
                .c_pairing(&wp)
                .ok_or_else(|| Error::Singular("c-function pole".into()))?;
            terms.push(c * lambda.dot_c(&wp).exp());
        }
        Ok(pairwise_sum_c(&terms))
    }

    fn check_lambda(&self, lambda: &LatticePoint) -> Result<()> {
        if lambda.dim() != self.rank() {
            return Err(Error::InvalidArgument(format!(
                "weight has dimension {}, rank is {}",
                lambda.dim(),
                self.rank()
            )));
        }
        if !RootSystem::is_dominant_int(&lambda.0) {
            return Err(Error::InvalidArgument(format!(
                "weight {:?} is not dominant",
                lambda.0
            )));
        }
        Ok(())
    }

    /// `P_lambda` at pairings `p`.
    pub fn macdonald_pairing(
        &self,
        lambda: &LatticePoint,
        p: &[Complex64],
        mode: EvalMode,
    ) -> Result<Complex64> {
        self.check_lambda(lambda)?;
        let norm = self.rho_factor(lambda) / self.poincare_inv;
        match mode {
            EvalMode::Direct => Ok(self.weyl_sum_pairing(lambda, p)? * norm),
            EvalMode::Limit => Ok(self.limit_sum(lambda, p)? * norm),
            EvalMode::Auto => match self.weyl_sum_pairing(lambda, p) {
                Ok(v) => Ok(v * norm),
                Err(Error::Singular(_)) => Ok(self.limit_sum(lambda, p)? * norm),
                Err(e) => Err(e),
            },
        }
    }

    /// Mean of the Weyl sum over `z + R e^{i phi} u`; exact for the entire
    /// function up to the circle aliasing, which is negligible for the
    /// chosen radius.
    fn limit_sum(&self, lambda: &LatticePoint, p: &[Complex64]) -> Result<Complex64> {
        let r = self.rank();
        let u: Vec<Complex64> = generic_direction(r)
            .into_iter()
            .map(|x| Complex64::new(x, 0.0))
            .collect();
        let mut reach: f64 = 0.0;
        let mut radius = f64::INFINITY;
        for w in 0..self.weyl.order() {
            let wp = self.act_pairing(w, p);
            let wu = self.act_pairing(w, &u);
            reach = reach.max(lambda.dot_c(&wu).norm());
            for t in &self.roots {
                let y = dot_ic(&t.a, &wp);
                let dy = dot_ic(&t.a, &wu).norm();
                let d = wall_distance(y);
                if d < 1e-6 {
                    radius = radius.min(0.5 * PI / dy);
                } else {
                    radius = radius.min(0.5 * d / dy);
                }
            }
        }
        radius = radius.min(2.0 / (1.0 + reach));
        let mean = |m: usize| -> Result<Complex64> {
            let mut vals = Vec::with_capacity(m);
            for j in 0..m {
                let eps = Complex64::from_polar(radius, 2.0 * PI * (j as f64 + 0.5) / m as f64);
                let pz: Vec<Complex64> = p.iter().zip(&u).map(|(a, b)| a + b * eps).collect();
                vals.push(self.weyl_sum_pairing(lambda, &pz)?);
            }
            Ok(pairwise_sum_c(&vals) / m as f64)
        };
        let m1 = mean(32)?;
        let m2 = mean(64)?;
        let residual = (m1 - m2).norm() / (1.0 + m2.norm());
        if !(residual < 1e-9) {
            return Err(Error::LimitFailure { residual });
        }
        Ok(m2)
    }

    /// Torus sizes large enough to resolve `P_lambda` without aliasing.
    pub fn support_diameter(&self, lambda: &LatticePoint) -> usize {
        let orbit = self.weyl.orbit_int(&lambda.0);
        (0..self.rank())
            .map(|j| {
                let lo = orbit.iter().map(|k| k[j]).min().unwrap_or(0);
                let hi = orbit.iter().map(|k| k[j]).max().unwrap_or(0);
                (hi - lo) as usize
            })
            .max()
            .unwrap_or(0)
    }
}

fn dot_ic(a: &[i64], p: &[Complex64]) -> Complex64 {
    a.iter()
        .zip(p)
        .fold(Complex64::new(0.0, 0.0), |s, (&k, x)| s + x * k as f64)
}

/// Distance from `y` to the nearest point of `2 pi i Z`.
fn wall_distance(y: Complex64) -> f64 {
    let m = (y.im / (2.0 * PI)).round();
    Complex64::new(y.re, y.im - 2.0 * PI * m).norm()
}

/// A fixed direction with no rational relations among small integer
/// combinations of its coordinates.
fn generic_direction(r: usize) -> Vec<f64> {
    let primes = [2.0f64, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0];
    let v: Vec<f64> = (0..r).map(|i| primes[i % 8].sqrt().fract() + 0.31 * i as f64 + 0.5).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// `c(z)` at a point given in orthonormal coordinates.
pub fn c_function(ctx: &SphericalContext, z: &[Complex64]) -> Result<Complex64> {
    let p = ctx.pairing_of(z);
    ctx.c_pairing(&p)
        .ok_or_else(|| Error::Singular("z lies on a wall".into()))
}

/// `P_lambda(z)` at a point given in orthonormal coordinates.
pub fn macdonald_eval(
    ctx: &SphericalContext,
    lambda: &LatticePoint,
    z: &[Complex64],
    mode: EvalMode,
) -> Result<Complex64> {
    let p = ctx.pairing_of(z);
    ctx.macdonald_pairing(lambda, &p, mode)
}

/// `P_lambda(0)`.
pub fn macdonald_at_zero(ctx: &SphericalContext, lambda: &LatticePoint) -> Result<f64> {
    let p = vec![Complex64::new(0.0, 0.0); ctx.rank()];
    Ok(ctx.macdonald_pairing(lambda, &p, EvalMode::Limit)?.re)
}

/// Exponential-polynomial expansion of `P_lambda` in coweight coordinates,
/// extracted by a DFT on a grid chosen from the support diameter.
pub fn macdonald_exp_poly(ctx: &SphericalContext, lambda: &LatticePoint) -> Result<ExpPoly> {
    let d = ctx.support_diameter(lambda);
    let n = next_pow2_at_least(d + 2).max(8);
    let grid = TorusGrid::generic(ctx.rank(), n, &ctx.coroot_walls())?;
    macdonald_exp_poly_on(ctx, lambda, &grid)
}

/// As [`macdonald_exp_poly`] on a caller-supplied grid, which must resolve
/// the support.
pub fn macdonald_exp_poly_on(
    ctx: &SphericalContext,
    lambda: &LatticePoint,
    grid: &TorusGrid,
) -> Result<ExpPoly> {
    ctx.check_lambda(lambda)?;
    let r = ctx.rank();
    let d = ctx.support_diameter(lambda);
    if grid.n() < d + 1 {
        return Err(Error::GridTooCoarse {
            needed: d + 1,
            got: grid.n(),
        });
    }
    let n = grid.n();
    let mut vals = Vec::with_capacity(grid.node_count());
    for idx in 0..grid.node_count() {
        let t = grid.node(idx);
        let p: Vec<Complex64> = t.iter().map(|&x| Complex64::new(0.0, x)).collect();
        vals.push(ctx.macdonald_pairing(lambda, &p, EvalMode::Direct)?);
    }
    dft_nd(&mut vals, n, r);
    let orbit = ctx.weyl().orbit_int(&lambda.0);
    let lo: Vec<i64> = (0..r)
        .map(|j| orbit.iter().map(|k| k[j]).min().unwrap_or(0))
        .collect();
    let hi: Vec<i64> = (0..r)
        .map(|j| orbit.iter().map(|k| k[j]).max().unwrap_or(0))
        .collect();
    let mut out = ExpPoly::zero(r);
    for (idx, v) in vals.iter().enumerate() {
        let mi = grid.multi_index(idx);
        let k: Vec<i64> = (0..r)
            .map(|j| lo[j] + (mi[j] as i64 - lo[j]).rem_euclid(n as i64))
            .collect();
        if (0..r).any(|j| k[j] > hi[j]) {
            continue;
        }
        let phase: f64 = k.iter().zip(grid.offset()).map(|(&a, o)| a as f64 * o).sum();
        out.add_term(LatticePoint(k), v * Complex64::from_polar(1.0, -phase));
    }
    out.prune(1e-12);
    Ok(out)
}

/// Calibration constant `1 / ((W_0(q^{-1}) / |W_0|) mean |c(i t)|^{-2})`
/// of the torus measure; equals one up to quadrature error.
pub fn torus_calibration(ctx: &SphericalContext, grid: &TorusGrid) -> f64 {
    let vals: Vec<f64> = (0..grid.node_count())
        .map(|i| ctx.inv_c_abs2_torus(&grid.node(i)))
        .collect();
    let mean = pairwise_sum(&vals) / vals.len() as f64;
    1.0 / (ctx.poincare_inv() / ctx.weyl().order() as f64 * mean)
}

/// `N_lambda = |S_lambda(o)|` from the Plancherel norm of `P_lambda`.
pub fn vertex_count(ctx: &SphericalContext, lambda: &LatticePoint) -> Result<f64> {
    let p = macdonald_exp_poly(ctx, lambda)?;
    vertex_count_from(ctx, lambda, &p)
}

pub fn vertex_count_from(ctx: &SphericalContext, lambda: &LatticePoint, p: &ExpPoly) -> Result<f64> {
    let d = ctx.support_diameter(lambda);
    let mut n = next_pow2_at_least(2 * d + 48);
    let mut prev: Option<f64> = None;
    for _ in 0..4 {
        let grid = TorusGrid::generic(ctx.rank(), n, &ctx.coroot_walls())?;
        let pv = eval_on_grid(p, &grid);
        let mut vals = Vec::with_capacity(grid.node_count());
        let mut base = Vec::with_capacity(grid.node_count());
        for (i, pz) in pv.iter().enumerate() {
            let w = ctx.inv_c_abs2_torus(&grid.node(i));
            vals.push(pz.norm_sqr() * w);
            base.push(w);
        }
        let ratio = pairwise_sum(&vals) / pairwise_sum(&base);
        let inv_n = ratio;
        if let Some(pv) = prev {
            if ((inv_n - pv) / inv_n).abs() < 1e-10 {
                return Ok(1.0 / inv_n);
            }
        }
        prev = Some(inv_n);
        n *= 2;
    }
    Err(Error::QuadratureNonConvergence {
        change: f64::NAN,
        tol: 1e-10,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::{build_root_system, RootKind};

    fn ctx(kind: RootKind, r: usize, q: &[f64]) -> SphericalContext {
        let rs = build_root_system(kind, r).unwrap();
        let qp = QParams::new(&rs, q).unwrap();
        SphericalContext::new(rs, qp).unwrap()
    }

    fn lp(v: &[i64]) -> LatticePoint {
        LatticePoint(v.to_vec())
    }

    #[test]
    fn a1_closed_forms() {
        for q in [2.0, 3.0, 5.0] {
            let c = ctx(RootKind::A, 1, &[q]);
            let p1 = macdonald_exp_poly(&c, &lp(&[1])).unwrap();
            let s = q.sqrt() / (q + 1.0);
            assert!((p1.get(&lp(&[1])).re - s).abs() < 1e-13);
            assert!((p1.get(&lp(&[-1])).re - s).abs() < 1e-13);
            assert_eq!(p1.len(), 2);
            for m in 0..8i64 {
                let v = macdonald_at_zero(&c, &lp(&[m])).unwrap();
                let expect = q.powf(-(m as f64) / 2.0) * (1.0 + m as f64 * (q - 1.0) / (q + 1.0));
                assert!((v - expect).abs() < 1e-10 * expect, "q={q} m={m} {v} {expect}");
            }
            let p2 = macdonald_exp_poly(&c, &lp(&[2])).unwrap();
            let lead = p2.get(&lp(&[2])).re;
            assert!((p2.get(&lp(&[0])).re / lead - (1.0 - 1.0 / q)).abs() < 1e-12);
        }
    }

    #[test]
    fn trivial_weight_is_one() {
        let c = ctx(RootKind::B, 2, &[2.0, 3.0]);
        let z = [Complex64::new(0.3, 0.7), Complex64::new(-0.2, 1.1)];
        let v = macdonald_eval(&c, &lp(&[0, 0]), &z, EvalMode::Direct).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn exp_poly_matches_direct_sum() {
        let c = ctx(RootKind::A, 2, &[2.0, 2.0]);
        for lam in [[1i64, 0], [2, 1], [3, 3]] {
            let p = macdonald_exp_poly(&c, &lp(&lam)).unwrap();
            assert!(p.max_imag() < 1e-12);
            let z = [Complex64::new(0.4, 0.3), Complex64::new(-0.1, 0.9)];
            let direct = macdonald_eval(&c, &lp(&lam), &z, EvalMode::Direct).unwrap();
            let viaexp = p.eval(&c.pairing_of(&z));
            assert!((direct - viaexp).norm() < 1e-12 * (1.0 + direct.norm()));
            // Symmetric under the Weyl group.
            for w in 0..c.weyl().order() {
                let m = &c.weyl().elements()[w].matrix;
                assert!(p.act(m).max_diff(&p) < 1e-12);
            }
        }
    }

    #[test]
    fn grid_too_coarse_rejected() {
        let c = ctx(RootKind::A, 1, &[2.0]);
        let g = TorusGrid::generic(1, 8, &c.coroot_walls()).unwrap();
        assert!(matches!(
            macdonald_exp_poly_on(&c, &lp(&[10]), &g),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn vertex_counts_match_product_formula() {
        let c = ctx(RootKind::A, 1, &[3.0]);
        for m in 1..6i64 {
            let n = vertex_count(&c, &lp(&[m])).unwrap();
            let expect = 4.0 * 3f64.powi(m as i32 - 1);
            assert!((n - expect).abs() < 1e-8 * expect);
        }
        let c = ctx(RootKind::A, 2, &[2.0, 2.0]);
        let n = vertex_count(&c, &lp(&[1, 0])).unwrap();
        assert!((n - 7.0).abs() < 1e-8);
        let n = vertex_count(&c, &lp(&[1, 1])).unwrap();
        assert!((n - 42.0).abs() < 1e-8, "{n}");
    }

    #[test]
    fn calibration_is_one() {
        let c = ctx(RootKind::A, 2, &[3.0, 3.0]);
        let g = TorusGrid::generic(2, 64, &c.coroot_walls()).unwrap();
        assert!((torus_calibration(&c, &g) - 1.0).abs() < 1e-12);
    }
}
