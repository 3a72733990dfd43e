//! Walk specifications and the derived kernel data: the exponential
//! polynomial `A_hat`, spectral radius, normalised kernel `kappa`, support
//! hull and periodicity group.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::exppoly::{ExpPoly, LatticePoint};
use crate::hull::Hull;
use crate::rate::ExpFamily;
use crate::rootsys::RootSystem;
use crate::snf::{smith_normal_form, Snf};
use crate::sphfun::{macdonald_at_zero, macdonald_exp_poly, SphericalContext};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flavor {
    /// Isotropic walk on the vertices of an affine building.
    Building,
    /// Random walk on `Z^r`.
    Lattice,
}

impl Flavor {
    pub fn name(self) -> &'static str {
        match self {
            Flavor::Building => "building",
            Flavor::Lattice => "lattice",
        }
    }
}

/// One term `a * A_mu` of a building walk, or a step `v` with probability
/// `a` for a lattice walk.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub mu: LatticePoint,
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct WalkSpec {
    flavor: Flavor,
    rank: usize,
    steps: Vec<Step>,
    ctx: Option<SphericalContext>,
}

fn check_steps(rank: usize, steps: &[Step]) -> Result<()> {
    if steps.is_empty() {
        return Err(Error::InvalidWalk("no steps given".into()));
    }
    for (i, s) in steps.iter().enumerate() {
        if s.mu.dim() != rank {
            return Err(Error::InvalidWalk(format!(
                "step {i} has dimension {} but the rank is {rank}",
                s.mu.dim()
            )));
        }
        if !(s.weight.is_finite() && s.weight > 0.0) {
            return Err(Error::InvalidWalk(format!(
                "step {i} has non-positive probability {}",
                s.weight
            )));
        }
        if steps[..i].iter().any(|t| t.mu == s.mu) {
            return Err(Error::InvalidWalk(format!("step {i} repeats {:?}", s.mu.0)));
        }
    }
    let total: f64 = steps.iter().map(|s| s.weight).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidWalk(format!(
            "walk.steps probabilities must sum to 1 (sum is {total})"
        )));
    }
    Ok(())
}

impl WalkSpec {
    pub fn building(ctx: SphericalContext, steps: Vec<Step>) -> Result<WalkSpec> {
        check_steps(ctx.rank(), &steps)?;
        for (i, s) in steps.iter().enumerate() {
            if !RootSystem::is_dominant_int(&s.mu.0) {
                return Err(Error::InvalidWalk(format!(
                    "step {i}: {:?} is not dominant",
                    s.mu.0
                )));
            }
        }
        Ok(WalkSpec {
            flavor: Flavor::Building,
            rank: ctx.rank(),
            steps,
            ctx: Some(ctx),
        })
    }

    pub fn lattice(rank: usize, steps: Vec<Step>) -> Result<WalkSpec> {
        if rank == 0 {
            return Err(Error::InvalidWalk("rank must be positive".into()));
        }
        check_steps(rank, &steps)?;
        Ok(WalkSpec {
            flavor: Flavor::Lattice,
            rank,
            steps,
            ctx: None,
        })
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }
}

#[derive(Clone, Debug)]
pub struct SupportPoint {
    pub key: LatticePoint,
    /// Coefficient of `kappa` at this point.
    pub coeff: f64,
    pub pos: DVector<f64>,
}

#[derive(Clone, Debug)]
pub struct Periodicity {
    pub snf: Snf,
    /// Base point `v_0`; `p_n(w) != 0` forces `w - n v_0` into the lattice.
    pub base: LatticePoint,
    /// Points of the dual group in torus coordinates.
    pub dual: Vec<Vec<f64>>,
}

impl Periodicity {
    pub fn order(&self) -> usize {
        self.dual.len()
    }

    pub fn in_class(&self, n: u64, w: &LatticePoint) -> bool {
        let d = w.sub(&self.base.scale(n as i64));
        self.snf.contains(&d.0)
    }
}

#[derive(Clone, Debug)]
pub struct Kernel {
    flavor: Flavor,
    rank: usize,
    steps: Vec<Step>,
    ctx: Option<SphericalContext>,
    basis: DMatrix<f64>,
    a_hat: ExpPoly,
    rho: f64,
    support: Vec<SupportPoint>,
    hull: Hull,
    periodicity: Periodicity,
}

/// Builds the kernel data and checks the standing hypotheses: positive
/// coefficients, affinely spanning support, full-rank difference lattice.
pub fn build_kernel(spec: &WalkSpec) -> Result<Kernel> {
    let r = spec.rank;
    let (a_hat, rho, basis) = match spec.flavor {
        Flavor::Building => {
            let ctx = spec.ctx.as_ref().expect("building spec carries a context");
            let mut a = ExpPoly::zero(r);
            let mut rho_limit = 0.0;
            for s in &spec.steps {
                let p = macdonald_exp_poly(ctx, &s.mu)?;
                a.add_scaled(&p, Complex64::new(s.weight, 0.0));
                rho_limit += s.weight * macdonald_at_zero(ctx, &s.mu)?;
            }
            a.prune(1e-12);
            if a.max_imag() > 1e-10 * a.max_abs() {
                return Err(Error::PropertyFailure("A_hat has complex coefficients".into()));
            }
            let rho = a.sum_coefficients().re;
            if (rho - rho_limit).abs() > 1e-9 * rho {
                return Err(Error::PropertyFailure(format!(
                    "spectral radius from coefficients {rho} disagrees with P(0) {rho_limit}"
                )));
            }
            (a, rho, ctx.root_system().coweight_matrix())
        }
        Flavor::Lattice => {
            let mut a = ExpPoly::zero(r);
            for s in &spec.steps {
                a.add_term(s.mu.clone(), Complex64::new(s.weight, 0.0));
            }
            (a, 1.0, DMatrix::identity(r, r))
        }
    };
    let mut support = Vec::new();
    for (k, c) in a_hat.iter() {
        let coeff = c.re / rho;
        if !(coeff > 0.0) {
            return Err(Error::NonPositiveCoefficient {
                at: format!("{:?}", k.0),
                value: coeff,
            });
        }
        let kf: Vec<f64> = k.0.iter().map(|&x| x as f64).collect();
        let pos = &basis * DVector::from_vec(kf);
        support.push(SupportPoint {
            key: k.clone(),
            coeff,
            pos,
        });
    }
    let pts: Vec<DVector<f64>> = support.iter().map(|s| s.pos.clone()).collect();
    let hull = Hull::from_points(&pts).map_err(|e| match e {
        Error::DegenerateHull(m) => Error::Reducible(format!("support does not span: {m}")),
        other => other,
    })?;
    let base = support[0].key.clone();
    let diffs: Vec<Vec<i64>> = support.iter().skip(1).map(|s| s.key.sub(&base).0).collect();
    let snf = smith_normal_form(&diffs, r);
    if snf.index().is_none() {
        return Err(Error::Reducible("difference lattice is not of full rank".into()));
    }
    let dual = snf.dual_points();
    Ok(Kernel {
        flavor: spec.flavor,
        rank: r,
        steps: spec.steps.clone(),
        ctx: spec.ctx.clone(),
        basis,
        a_hat,
        rho,
        support,
        hull,
        periodicity: Periodicity { snf, base, dual },
    })
}

impl Kernel {
    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn context(&self) -> Option<&SphericalContext> {
        self.ctx.as_ref()
    }

    pub fn require_building(&self) -> Result<&SphericalContext> {
        self.ctx.as_ref().ok_or(Error::FlavorMismatch { expected: "building" })
    }

    pub fn require_lattice(&self) -> Result<()> {
        match self.flavor {
            Flavor::Lattice => Ok(()),
            Flavor::Building => Err(Error::FlavorMismatch { expected: "lattice" }),
        }
    }

    /// Columns map lattice keys to vectors of `a`.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn a_hat(&self) -> &ExpPoly {
        &self.a_hat
    }

    /// Spectral radius `rho = A_hat(0)`.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn support(&self) -> &[SupportPoint] {
        &self.support
    }

    pub fn hull(&self) -> &Hull {
        &self.hull
    }

    pub fn periodicity(&self) -> &Periodicity {
        &self.periodicity
    }

    pub fn position(&self, key: &LatticePoint) -> DVector<f64> {
        let kf: Vec<f64> = key.0.iter().map(|&x| x as f64).collect();
        &self.basis * DVector::from_vec(kf)
    }

    /// Pairings of a real vector with the lattice basis.
    pub fn pairing(&self, x: &DVector<f64>) -> Vec<f64> {
        (self.basis.transpose() * x).iter().copied().collect()
    }

    /// Signed distance of `delta` to the boundary of the support hull.
    pub fn dist_to_boundary(&self, delta: &DVector<f64>) -> f64 {
        self.hull.distance(delta)
    }

    /// Drift `delta_0 = grad log kappa(0)`.
    pub fn drift(&self) -> DVector<f64> {
        self.support
            .iter()
            .fold(DVector::zeros(self.rank), |a, s| a + &s.pos * s.coeff)
    }

    /// The normalised kernel as an exponential family on `a`.
    pub fn family(&self) -> ExpFamily {
        ExpFamily::new(
            self.support.iter().map(|s| s.pos.clone()).collect(),
            self.support.iter().map(|s| s.coeff.ln()).collect(),
        )
    }

    /// `kappa(z)` at complex pairings `p_j = <z, basis_j>`.
    pub fn kappa_pairing(&self, p: &[Complex64]) -> Complex64 {
        let terms: Vec<Complex64> = self
            .support
            .iter()
            .map(|s| s.key.dot_c(p).exp() * s.coeff)
            .collect();
        crate::numeric::pairwise_sum_c(&terms)
    }

    pub fn describe(&self) -> String {
        match &self.ctx {
            Some(c) => format!(
                "building {} q={:?}, {} steps",
                c.root_system().label(),
                c.q().simple(),
                self.steps.len()
            ),
            None => format!("lattice Z^{}, {} steps", self.rank, self.steps.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::{build_root_system, QParams, RootKind};
    use alloc::vec;

    fn lp(v: &[i64]) -> LatticePoint {
        LatticePoint(v.to_vec())
    }

    pub(crate) fn tree(q: f64) -> Kernel {
        let rs = build_root_system(RootKind::A, 1).unwrap();
        let qp = QParams::uniform(&rs, q).unwrap();
        let ctx = SphericalContext::new(rs, qp).unwrap();
        let spec = WalkSpec::building(ctx, vec![Step { mu: lp(&[1]), weight: 1.0 }]).unwrap();
        build_kernel(&spec).unwrap()
    }

    #[test]
    fn tree_kernel_data() {
        let k = tree(2.0);
        let rho = 2.0 * 2f64.sqrt() / 3.0;
        assert!((k.rho() - rho).abs() < 1e-14);
        assert_eq!(k.support().len(), 2);
        for s in k.support() {
            assert!((s.coeff - 0.5).abs() < 1e-14);
        }
        assert_eq!(k.periodicity().order(), 2);
        assert!(k.periodicity().in_class(3, &lp(&[1])));
        assert!(!k.periodicity().in_class(3, &lp(&[2])));
    }

    #[test]
    fn a2_hexagon_and_triangle() {
        let rs = build_root_system(RootKind::A, 2).unwrap();
        let qp = QParams::uniform(&rs, 2.0).unwrap();
        let ctx = SphericalContext::new(rs, qp).unwrap();
        let spec = WalkSpec::building(
            ctx.clone(),
            vec![
                Step { mu: lp(&[1, 0]), weight: 0.5 },
                Step { mu: lp(&[0, 1]), weight: 0.5 },
            ],
        )
        .unwrap();
        let k = build_kernel(&spec).unwrap();
        assert_eq!(k.support().len(), 6);
        assert_eq!(k.periodicity().order(), 1);
        let spec = WalkSpec::building(ctx, vec![Step { mu: lp(&[1, 0]), weight: 1.0 }]).unwrap();
        let k = build_kernel(&spec).unwrap();
        assert_eq!(k.periodicity().order(), 3);
    }

    #[test]
    fn probabilities_must_sum_to_one() {
        let e = WalkSpec::lattice(
            1,
            vec![Step { mu: lp(&[1]), weight: 0.5 }, Step { mu: lp(&[-1]), weight: 0.4 }],
        )
        .unwrap_err();
        assert!(format!("{e}").contains("walk.steps probabilities must sum to 1"));
    }

    #[test]
    fn degenerate_support_is_reducible() {
        let spec = WalkSpec::lattice(
            2,
            vec![Step { mu: lp(&[1, 0]), weight: 0.5 }, Step { mu: lp(&[-1, 0]), weight: 0.5 }],
        )
        .unwrap();
        assert!(matches!(build_kernel(&spec), Err(Error::Reducible(_))));
    }
}
