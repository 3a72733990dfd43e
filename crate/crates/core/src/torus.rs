//! Tensor grids on the torus `[0, 2pi)^r` and a direct multidimensional DFT.
//!
//! Nodes are `t = 2 pi j / N + offset`. Refinement doubles `N` and keeps the
//! offset, so the coarse nodes are the even-index nodes of the fine grid.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::exppoly::ExpPoly;
use crate::numeric::dist_to_int;

#[derive(Clone, Debug, PartialEq)]
pub struct TorusGrid {
    rank: usize,
    n: usize,
    offset: Vec<f64>,
}

impl TorusGrid {
    pub fn new(rank: usize, n: usize, offset: Vec<f64>) -> Result<TorusGrid> {
        if n < 2 {
            return Err(Error::InvalidArgument("grid needs at least 2 points per axis".into()));
        }
        if offset.len() != rank {
            return Err(Error::InvalidArgument("offset dimension mismatch".into()));
        }
        Ok(TorusGrid { rank, n, offset })
    }

    /// Grid whose offset keeps every node, on this grid and on two further
    /// refinements, away from the hyperplanes `<t, a> in 2 pi Z`.
    pub fn generic(rank: usize, n: usize, walls: &[Vec<i64>]) -> Result<TorusGrid> {
        let mut best = (f64::NEG_INFINITY, vec![0.0; rank]);
        // Additive recurrence on the generalised golden ratio.
        let mut phi = 2.0f64;
        for _ in 0..64 {
            phi = (1.0 + phi).powf(1.0 / (rank as f64 + 1.0));
        }
        let alpha: Vec<f64> = (1..=rank).map(|k| (1.0 / phi.powi(k as i32)).fract()).collect();
        for c in 1..=96 {
            let xi: Vec<f64> = alpha
                .iter()
                .map(|a| (0.5 + a * c as f64).fract())
                .collect();
            let off: Vec<f64> = xi.iter().map(|x| 2.0 * PI * x / n as f64).collect();
            let g = TorusGrid { rank, n, offset: off };
            let mut score = f64::INFINITY;
            for level in 0..3 {
                let gl = TorusGrid {
                    n: n << level,
                    ..g.clone()
                };
                for a in walls {
                    score = score.min(gl.min_wall_distance(a) * (n << level) as f64);
                }
            }
            if score > best.0 {
                best = (score, g.offset);
            }
        }
        TorusGrid::new(rank, n, best.1)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn node_count(&self) -> usize {
        self.n.pow(self.rank as u32)
    }

    pub fn refined(&self) -> TorusGrid {
        TorusGrid {
            n: 2 * self.n,
            ..self.clone()
        }
    }

    /// Node coordinates along axis `j`.
    pub fn axis(&self, j: usize) -> Vec<f64> {
        (0..self.n)
            .map(|i| 2.0 * PI * i as f64 / self.n as f64 + self.offset[j])
            .collect()
    }

    /// Multi-index of linear node index `idx` (last axis fastest).
    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut m = vec![0; self.rank];
        for j in (0..self.rank).rev() {
            m[j] = idx % self.n;
            idx /= self.n;
        }
        m
    }

    pub fn node(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .iter()
            .zip(&self.offset)
            .map(|(&i, o)| 2.0 * PI * i as f64 / self.n as f64 + o)
            .collect()
    }

    /// Smallest distance of `<t, a>` to `2 pi Z` over all nodes.
    pub fn min_wall_distance(&self, a: &[i64]) -> f64 {
        let n = self.n as i64;
        let g = a.iter().fold(n, |g, &x| gcd(g, x.abs()));
        let c: f64 = a
            .iter()
            .zip(&self.offset)
            .map(|(&k, o)| k as f64 * o)
            .sum::<f64>()
            / (2.0 * PI);
        let step = g as f64 / self.n as f64;
        2.0 * PI * step * dist_to_int(c / step)
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// In-place DFT of an `n^rank` array (last axis fastest):
/// `F_k = (1/n^rank) sum_j f_j e^{-2 pi i k.j / n}`.
pub fn dft_nd(values: &mut [Complex64], n: usize, rank: usize) {
    let tw: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
        .collect();
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..rank {
        let stride = n.pow((rank - 1 - axis) as u32);
        let total = values.len();
        for base in 0..total {
            if !(base / stride).is_multiple_of(n) {
                continue;
            }
            for i in 0..n {
                line[i] = values[base + i * stride];
            }
            for (k, o) in out.iter_mut().enumerate() {
                let mut s = Complex64::new(0.0, 0.0);
                for (j, v) in line.iter().enumerate() {
                    s += v * tw[(j * k) % n];
                }
                *o = s / n as f64;
            }
            for i in 0..n {
                values[base + i * stride] = out[i];
            }
        }
    }
}

/// Values `p(i t)` at every node (last axis fastest), one axis at a time
/// over the dense coefficient box.
pub fn eval_on_grid(p: &ExpPoly, grid: &TorusGrid) -> Vec<Complex64> {
    let r = grid.rank();
    let n = grid.n();
    let Some((lo, hi)) = p.support_box() else {
        return vec![Complex64::new(0.0, 0.0); grid.node_count()];
    };
    let mut dims: Vec<usize> = (0..r).map(|j| (hi[j] - lo[j] + 1) as usize).collect();
    let mut a = vec![Complex64::new(0.0, 0.0); dims.iter().product()];
    for (k, c) in p.iter() {
        let mut o = 0;
        for j in 0..r {
            o = o * dims[j] + (k.0[j] - lo[j]) as usize;
        }
        a[o] = *c;
    }
    for axis in 0..r {
        let outer: usize = dims[..axis].iter().product();
        let inner: usize = dims[axis + 1..].iter().product();
        let kk = dims[axis];
        let ts = grid.axis(axis);
        let l0 = lo[axis];
        let tab: Vec<Complex64> = ts
            .iter()
            .flat_map(|&t| (0..kk).map(move |m| Complex64::from_polar(1.0, (l0 + m as i64) as f64 * t)))
            .collect();
        let mut b = vec![Complex64::new(0.0, 0.0); outer * n * inner];
        for o in 0..outer {
            for m in 0..kk {
                let src = (o * kk + m) * inner;
                for i in 0..n {
                    let w = tab[i * kk + m];
                    let dst = (o * n + i) * inner;
                    for s in 0..inner {
                        b[dst + s] += a[src + s] * w;
                    }
                }
            }
        }
        a = b;
        dims[axis] = n;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exppoly::LatticePoint;

    #[test]
    fn grid_evaluation_matches_pointwise() {
        let mut p = ExpPoly::zero(2);
        p.add_term(LatticePoint(vec![2, -1]), Complex64::new(0.5, 0.25));
        p.add_term(LatticePoint(vec![-3, 0]), Complex64::new(-1.0, 0.0));
        p.add_term(LatticePoint(vec![0, 4]), Complex64::new(0.0, 2.0));
        let g = TorusGrid::new(2, 8, vec![0.1, 0.37]).unwrap();
        let v = eval_on_grid(&p, &g);
        for i in 0..g.node_count() {
            let z: Vec<Complex64> = g.node(i).iter().map(|&t| Complex64::new(0.0, t)).collect();
            assert!((v[i] - p.eval(&z)).norm() < 1e-13);
        }
    }

    #[test]
    fn refinement_nests() {
        let g = TorusGrid::generic(2, 8, &[vec![2, -1], vec![-1, 2], vec![1, 1]]).unwrap();
        let f = g.refined();
        for i in 0..g.n() {
            for j in 0..g.n() {
                let a = g.node(i * g.n() + j);
                let b = f.node(2 * i * f.n() + 2 * j);
                assert!((a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn generic_offset_avoids_walls() {
        let walls = [vec![2, -1], vec![-1, 2], vec![1, 1]];
        for n in [8usize, 64, 256] {
            let g = TorusGrid::generic(2, n, &walls).unwrap();
            for lvl in 0..3 {
                let gl = TorusGrid::new(2, n << lvl, g.offset().to_vec()).unwrap();
                for a in &walls {
                    let d = gl.min_wall_distance(a);
                    assert!(d * (n << lvl) as f64 > 0.05, "n={n} lvl={lvl} d={d}");
                }
            }
        }
    }

    #[test]
    fn wall_distance_matches_brute_force() {
        let g = TorusGrid::new(2, 6, vec![0.1, 0.37]).unwrap();
        let a = [2i64, -1];
        let brute = (0..g.node_count())
            .map(|i| {
                let t = g.node(i);
                let x = (2.0 * t[0] - t[1]) / (2.0 * PI);
                2.0 * PI * dist_to_int(x)
            })
            .fold(f64::INFINITY, f64::min);
        assert!((brute - g.min_wall_distance(&a)).abs() < 1e-12);
    }

    #[test]
    fn dft_recovers_coefficients() {
        let n = 8;
        let mut v: Vec<Complex64> = (0..n * n)
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                let t0 = 2.0 * PI * i as f64 / n as f64;
                let t1 = 2.0 * PI * j as f64 / n as f64;
                Complex64::from_polar(1.0, 2.0 * t0 - t1) * 3.0
            })
            .collect();
        dft_nd(&mut v, n, 2);
        assert!((v[2 * n + (n - 1)] - Complex64::new(3.0, 0.0)).norm() < 1e-12);
    }
}
