//! Exact transition densities of random walks on `Z^r` and the local limit
//! estimate `|U| (2 pi)^{-r/2} (det n B_s)^{-1/2} e^{-n phi(v/n)}`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::DVector;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::exppoly::LatticePoint;
use crate::rate::saddle;
use crate::report::{EstimateReport, EstimateRow};
use crate::walk::Kernel;

/// Default per-axis extent guard for dense convolution tables.
pub const DEFAULT_AXIS_GUARD: usize = 4096;

/// `v -> p_n(v)` on a dense box of `Z^r` (last axis fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityTable {
    pub n: u64,
    lower: Vec<i64>,
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl DensityTable {
    fn delta(rank: usize) -> DensityTable {
        DensityTable {
            n: 0,
            lower: vec![0; rank],
            shape: vec![1; rank],
            values: vec![1.0],
        }
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    fn offset_of(&self, v: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for j in 0..self.rank() {
            let d = v[j] - self.lower[j];
            if d < 0 || d as usize >= self.shape[j] {
                return None;
            }
            idx = idx * self.shape[j] + d as usize;
        }
        Some(idx)
    }

    fn point_of(&self, mut idx: usize) -> LatticePoint {
        let r = self.rank();
        let mut v = vec![0i64; r];
        for j in (0..r).rev() {
            v[j] = self.lower[j] + (idx % self.shape[j]) as i64;
            idx /= self.shape[j];
        }
        LatticePoint(v)
    }

    pub fn get(&self, v: &LatticePoint) -> f64 {
        self.offset_of(&v.0).map_or(0.0, |i| self.values[i])
    }

    /// Points with non-zero probability, in lexicographic order.
    pub fn support(&self) -> Vec<(LatticePoint, f64)> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &x)| x > 0.0)
            .map(|(i, &x)| (self.point_of(i), x))
            .collect()
    }

    pub fn total(&self) -> f64 {
        crate::numeric::pairwise_sum(&self.values)
    }

    /// One convolution step with the given `(step, probability)` list.
    fn step(&self, steps: &[(Vec<i64>, f64)], slo: &[i64], shi: &[i64]) -> DensityTable {
        let r = self.rank();
        let lower: Vec<i64> = (0..r).map(|j| self.lower[j] + slo[j]).collect();
        let shape: Vec<usize> = (0..r)
            .map(|j| self.shape[j] + (shi[j] - slo[j]) as usize)
            .collect();
        let mut out = DensityTable {
            n: self.n + 1,
            lower,
            shape,
            values: vec![0.0; 0],
        };
        out.values = vec![0.0; out.shape.iter().product()];
        for (i, &x) in self.values.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            let p = self.point_of(i);
            for (s, w) in steps {
                let q: Vec<i64> = p.0.iter().zip(s).map(|(a, b)| a + b).collect();
                let o = out.offset_of(&q).expect("target inside grown box");
                out.values[o] += x * w;
            }
        }
        out
    }
}

struct Stepper {
    steps: Vec<(Vec<i64>, f64)>,
    slo: Vec<i64>,
    shi: Vec<i64>,
}

impl Stepper {
    /// Checks up front that `n` steps stay within `axis_guard` per axis.
    fn new(k: &Kernel, n: u64, axis_guard: usize) -> Result<Stepper> {
        k.require_lattice()?;
        let r = k.rank();
        let steps: Vec<(Vec<i64>, f64)> = k
            .support()
            .iter()
            .map(|s| (s.key.0.clone(), s.coeff))
            .collect();
        let slo: Vec<i64> = (0..r).map(|j| steps.iter().map(|s| s.0[j]).min().unwrap()).collect();
        let shi: Vec<i64> = (0..r).map(|j| steps.iter().map(|s| s.0[j]).max().unwrap()).collect();
        for j in 0..r {
            let extent = n as i128 * (shi[j] - slo[j]) as i128 + 1;
            if extent > axis_guard as i128 {
                return Err(Error::SupportGuard(format!(
                    "table needs {extent} points along axis {j}, guard is {axis_guard}; \
                     use the Fourier route for larger n"
                )));
            }
        }
        Ok(Stepper { steps, slo, shi })
    }

    fn step(&self, t: &DensityTable) -> DensityTable {
        t.step(&self.steps, &self.slo, &self.shi)
    }
}

/// Iterated sparse convolution; the table box grows by the step box each
/// step and may not exceed `axis_guard` points along any axis.
pub fn exact_pn_convolution(k: &Kernel, n: u64, axis_guard: usize) -> Result<DensityTable> {
    let st = Stepper::new(k, n, axis_guard)?;
    let mut t = DensityTable::delta(k.rank());
    for _ in 0..n {
        t = st.step(&t);
    }
    Ok(t)
}

/// Tables for every `n` in `0..=n_max`, sharing the convolution work. The
/// visitor returns `false` to stop early.
pub fn convolution_series(
    k: &Kernel,
    n_max: u64,
    axis_guard: usize,
    mut visit: impl FnMut(&DensityTable) -> bool,
) -> Result<()> {
    let st = Stepper::new(k, n_max, axis_guard)?;
    let mut t = DensityTable::delta(k.rank());
    if !visit(&t) {
        return Ok(());
    }
    for _ in 0..n_max {
        t = st.step(&t);
        if !visit(&t) {
            break;
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct LltDetail {
    pub value: f64,
    pub dist: f64,
    pub det_nb: f64,
    pub phi: f64,
}

/// The local limit estimate at `v`; zero outside the residue class of `n`.
pub fn llt_estimate(k: &Kernel, n: u64, v: &LatticePoint) -> Result<f64> {
    Ok(llt_detail(k, n, v)?.value)
}

pub fn llt_detail(k: &Kernel, n: u64, v: &LatticePoint) -> Result<LltDetail> {
    k.require_lattice()?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let r = k.rank();
    let delta = k.position(v) / n as f64;
    let dist = k.dist_to_boundary(&delta);
    let sd = saddle(k, &delta)?;
    let det_nb = sd.det_b * (n as f64).powi(r as i32);
    let value = if k.periodicity().in_class(n, v) {
        k.periodicity().order() as f64
            * (2.0 * PI).powf(-(r as f64) / 2.0)
            * det_nb.powf(-0.5)
            * (-(n as f64) * sd.phi).exp()
    } else {
        0.0
    };
    Ok(LltDetail {
        value,
        dist,
        det_nb,
        phi: sd.phi,
    })
}

/// Which support points of `p_n` to report.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    All,
    Points(Vec<LatticePoint>),
}

impl Region {
    fn contains(&self, v: &LatticePoint) -> bool {
        match self {
            Region::All => true,
            Region::Points(p) => p.contains(v),
        }
    }
}

/// Exact versus estimate on the admissible set `n dist(v/n)^{2 eta} >= K`.
pub fn compare_lattice(
    k: &Kernel,
    table: &DensityTable,
    region: &Region,
    big_k: f64,
    eta: f64,
) -> Result<EstimateReport> {
    let n = table.n;
    let mut rep = EstimateReport::default();
    for (v, exact) in table.support() {
        if !region.contains(&v) {
            continue;
        }
        let delta = k.position(&v) / n as f64;
        let dist = k.dist_to_boundary(&delta);
        if !(dist > 0.0) || (n as f64) * dist.powf(2.0 * eta) < big_k {
            continue;
        }
        let d = llt_detail(k, n, &v)?;
        rep.rows.push(EstimateRow {
            n,
            omega: v,
            exact,
            estimate: d.value,
            ratio: d.value / exact,
            regime: String::from("llt"),
            dist_boundary: dist,
            det_nb: d.det_nb,
            phi: d.phi,
        });
    }
    if rep.rows.is_empty() {
        rep.warnings
            .push(format!("n={n}: admissible region is empty for K={big_k}, eta={eta}"));
    }
    Ok(rep)
}

/// `-log p_n(v) / n` for the point closest to `n delta` in the class of `n`.
pub fn empirical_rate(table: &DensityTable, k: &Kernel, delta: &DVector<f64>) -> Option<f64> {
    let n = table.n as f64;
    table
        .support()
        .into_iter()
        .min_by(|a, b| {
            let da = (k.position(&a.0) / n - delta).norm();
            let db = (k.position(&b.0) / n - delta).norm();
            da.partial_cmp(&db).unwrap()
        })
        .map(|(_, p)| -p.ln() / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::{build_kernel, Step, WalkSpec};

    fn walk(rank: usize, steps: &[(&[i64], f64)]) -> Kernel {
        let spec = WalkSpec::lattice(
            rank,
            steps
                .iter()
                .map(|(v, w)| Step { mu: LatticePoint(v.to_vec()), weight: *w })
                .collect(),
        )
        .unwrap();
        build_kernel(&spec).unwrap()
    }

    /// `C(n, k) 2^{-n}` by a product of ratios.
    fn binom_half(n: u64, k: u64) -> f64 {
        let k = k.min(n - k);
        let mut lg = 0.0f64;
        for i in 0..k {
            lg += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
        }
        (lg - n as f64 * 2f64.ln()).exp()
    }

    #[test]
    fn binomial_values() {
        let k = walk(1, &[(&[1], 0.5), (&[-1], 0.5)]);
        let t = exact_pn_convolution(&k, 4, 4096).unwrap();
        assert!((t.get(&LatticePoint(vec![0])) - 0.375).abs() < 1e-15);
        let t = exact_pn_convolution(&k, 3, 4096).unwrap();
        assert!((t.get(&LatticePoint(vec![1])) - 0.375).abs() < 1e-15);
        let t = exact_pn_convolution(&k, 100, 4096).unwrap();
        assert!((t.total() - 1.0).abs() < 1e-12);
        let e = t.get(&LatticePoint(vec![0]));
        assert!((e - binom_half(100, 50)).abs() < 1e-14 * e);
        assert!((e - 0.079_589_237_387_178_7).abs() < 1e-12);
        let est = llt_estimate(&k, 100, &LatticePoint(vec![0])).unwrap();
        assert!((est - 2.0 / (2.0 * PI * 100.0).sqrt()).abs() < 1e-12);
        let r = est / e;
        assert!((1.0..1.01).contains(&r), "{r}");
        let est50 = llt_estimate(&k, 100, &LatticePoint(vec![50])).unwrap();
        let ex50 = binom_half(100, 75);
        assert!((est50 / ex50 - 1.0).abs() < 0.1);
        assert_eq!(llt_estimate(&k, 100, &LatticePoint(vec![1])).unwrap(), 0.0);
    }

    #[test]
    fn one_step_is_step_distribution() {
        let k = walk(2, &[(&[1, 0], 0.2), (&[0, 1], 0.3), (&[-1, -1], 0.5)]);
        let t = exact_pn_convolution(&k, 1, 4096).unwrap();
        assert_eq!(t.support().len(), 3);
        assert!((t.get(&LatticePoint(vec![-1, -1])) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn guard_rejects_large_tables() {
        let k = walk(1, &[(&[1], 0.5), (&[-1], 0.5)]);
        assert!(matches!(
            exact_pn_convolution(&k, 3000, 4096),
            Err(Error::SupportGuard(_))
        ));
    }

    #[test]
    fn symmetric_table() {
        let k = walk(2, &[(&[1, 0], 0.25), (&[-1, 0], 0.25), (&[0, 1], 0.25), (&[0, -1], 0.25)]);
        let t = exact_pn_convolution(&k, 20, 4096).unwrap();
        for (v, p) in t.support() {
            let sw = LatticePoint(vec![v.0[1], -v.0[0]]);
            assert!((t.get(&sw) - p).abs() < 1e-15);
        }
    }
}
