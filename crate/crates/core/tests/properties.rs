use affwalk_core::comb::SetSystem;
use affwalk_core::lattice::{exact_pn_convolution, DEFAULT_AXIS_GUARD};
use affwalk_core::rootsys::{build_root_system, QParams, RootKind};
use affwalk_core::sphfun::{EvalMode, SphericalContext};
use affwalk_core::tree::{tree_exact_table, TreeWalk};
use affwalk_core::walk::{build_kernel, Step, WalkSpec};
use affwalk_core::{Complex64, ExpPoly, LatticePoint};
use proptest::prelude::*;

fn poly(terms: &[(i64, i64, f64)]) -> ExpPoly {
    let mut p = ExpPoly::zero(2);
    for &(a, b, c) in terms {
        p.add_term(LatticePoint(vec![a, b]), Complex64::new(c, 0.0));
    }
    p
}

fn terms() -> impl Strategy<Value = Vec<(i64, i64, f64)>> {
    proptest::collection::vec((-3i64..=3, -3i64..=3, -2.0f64..2.0), 1..6)
}

fn a2_context(q: f64) -> SphericalContext {
    let rs = build_root_system(RootKind::A, 2).unwrap();
    let qp = QParams::uniform(&rs, q).unwrap();
    SphericalContext::new(rs, qp).unwrap()
}

proptest! {
    #[test]
    fn exppoly_product_commutes_and_evaluates(a in terms(), b in terms(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let (p, q) = (poly(&a), poly(&b));
        prop_assert!(p.mul(&q).max_diff(&q.mul(&p)) < 1e-12);
        let z = [Complex64::new(x, 0.3), Complex64::new(y, -0.2)];
        let lhs = p.mul(&q).eval(&z);
        let rhs = p.eval(&z) * q.eval(&z);
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
    }

    #[test]
    fn exppoly_power_matches_repeated_product(a in terms(), n in 0u32..4) {
        let p = poly(&a);
        let mut q = ExpPoly::constant(2, Complex64::new(1.0, 0.0));
        for _ in 0..n {
            q = q.mul(&p);
        }
        prop_assert!(p.pow(n, 0.0).max_diff(&q) <= 1e-10 * (1.0 + q.max_abs()));
    }

    #[test]
    fn flow_decision_matches_enumeration(
        ground in 1usize..=6,
        raw in proptest::collection::vec(1u16..64, 1..=4),
        gamma in proptest::collection::vec(0usize..3, 4),
    ) {
        let mask = (1u16 << ground) - 1;
        let sets: Vec<u16> = raw.iter().map(|s| s & mask).collect();
        let sys = SetSystem::new(ground, sets).unwrap();
        let g = &gamma[..sys.len()];
        prop_assert_eq!(sys.is_admissible(g).unwrap(), sys.is_admissible_brute(g).unwrap());
    }

    #[test]
    fn macdonald_is_weyl_invariant(l1 in 0i64..3, l2 in 0i64..3, re in proptest::collection::vec(-1.0f64..1.0, 2), im in proptest::collection::vec(-3.0f64..3.0, 2)) {
        let ctx = a2_context(2.0);
        let lambda = LatticePoint(vec![l1, l2]);
        let p: Vec<Complex64> = re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)).collect();
        let base = ctx.macdonald_pairing(&lambda, &p, EvalMode::Auto).unwrap();
        for w in 0..ctx.weyl().order() {
            let v = ctx.macdonald_pairing(&lambda, &ctx.act_pairing(w, &p), EvalMode::Auto).unwrap();
            prop_assert!((v - base).norm() <= 1e-8 * (1.0 + base.norm()));
        }
    }

    #[test]
    fn lattice_mass_is_conserved(w in proptest::collection::vec(1u32..10, 3), n in 1u64..40) {
        let total: u32 = w.iter().sum();
        let steps = [-1i64, 0, 2]
            .iter()
            .zip(&w)
            .map(|(m, x)| Step { mu: LatticePoint(vec![*m]), weight: *x as f64 / total as f64 })
            .collect();
        let k = build_kernel(&WalkSpec::lattice(1, steps).unwrap()).unwrap();
        let t = exact_pn_convolution(&k, n, DEFAULT_AXIS_GUARD).unwrap();
        prop_assert!((t.total() - 1.0).abs() < 1e-12);
        prop_assert!(t.support().iter().all(|(_, p)| *p >= 0.0));
    }

    #[test]
    fn tree_mass_is_conserved(q in 1.5f64..6.0, a in 0.05f64..0.9, n in 0u64..30) {
        let walk = TreeWalk::new(q, vec![(1, a), (2, 1.0 - a)]).unwrap();
        let t = tree_exact_table(&walk, n);
        let mass: f64 = t.iter().enumerate().map(|(m, p)| p * walk.sphere_size(m)).sum();
        prop_assert!((mass - 1.0).abs() < 1e-10);
    }
}
