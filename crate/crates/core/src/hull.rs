//! Facet description of the convex hull of a finite point set, and the
//! distance of a point to the hull boundary.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    /// Outward unit normal.
    pub normal: DVector<f64>,
    /// `max_v <normal, v>` over the hull.
    pub offset: f64,
}

#[derive(Clone, Debug)]
pub struct Hull {
    dim: usize,
    points: Vec<DVector<f64>>,
    facets: Vec<Facet>,
    diameter: f64,
}

/// Calls `f` with every increasing `k`-subset of `0..n`.
pub fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Vector orthogonal to the rows of a `(d-1) x d` matrix (generalised cross
/// product).
fn cross(rows: &DMatrix<f64>) -> DVector<f64> {
    let d = rows.ncols();
    let mut n = DVector::zeros(d);
    for k in 0..d {
        let minor = rows.clone().remove_column(k);
        let det = if minor.nrows() == 0 { 1.0 } else { minor.determinant() };
        n[k] = if k % 2 == 0 { det } else { -det };
    }
    n
}

impl Hull {
    pub fn from_points(points: &[DVector<f64>]) -> Result<Hull> {
        let first = points
            .first()
            .ok_or_else(|| Error::DegenerateHull("no points".into()))?;
        let dim = first.len();
        let mut pts: Vec<DVector<f64>> = Vec::new();
        for p in points {
            if !pts.iter().any(|q| (q - p).norm() < 1e-12 * (1.0 + p.norm())) {
                pts.push(p.clone());
            }
        }
        let mut diameter: f64 = 0.0;
        for a in &pts {
            for b in &pts {
                diameter = diameter.max((a - b).norm());
            }
        }
        if pts.len() < dim + 1 || diameter == 0.0 {
            return Err(Error::DegenerateHull("too few distinct points".into()));
        }
        let diffs = DMatrix::from_fn(pts.len() - 1, dim, |i, j| pts[i + 1][j] - pts[0][j]);
        let sv = diffs.clone().svd(false, false).singular_values;
        let rank = sv.iter().filter(|&&s| s > 1e-10 * diameter).count();
        if rank < dim {
            return Err(Error::DegenerateHull(alloc::format!(
                "points span an affine subspace of dimension {rank} < {dim}"
            )));
        }
        let eps = 1e-9 * diameter;
        let mut facets: Vec<Facet> = Vec::new();
        for_each_combination(pts.len(), dim, |idx| {
            let rows = DMatrix::from_fn(dim - 1, dim, |i, j| pts[idx[i + 1]][j] - pts[idx[0]][j]);
            let mut n = cross(&rows);
            let nn = n.norm();
            if nn < 1e-10 * diameter.powi(dim as i32 - 1).max(1e-300) {
                return;
            }
            n /= nn;
            let b = n.dot(&pts[idx[0]]);
            let mut above = false;
            let mut below = false;
            for p in &pts {
                let s = n.dot(p) - b;
                if s > eps {
                    above = true;
                }
                if s < -eps {
                    below = true;
                }
            }
            if above && below {
                return;
            }
            let (n, b) = if above { (-n, -b) } else { (n, b) };
            if !facets
                .iter()
                .any(|f| (&f.normal - &n).norm() < 1e-9 && (f.offset - b).abs() < eps)
            {
                facets.push(Facet { normal: n, offset: b });
            }
        });
        Ok(Hull {
            dim,
            points: pts,
            facets,
            diameter,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Signed distance to the boundary: positive inside, negative outside
    /// (for points outside it is a lower bound on the true distance).
    pub fn distance(&self, x: &DVector<f64>) -> f64 {
        self.facets
            .iter()
            .map(|f| f.offset - f.normal.dot(x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Facets within `tol` of `x`.
    pub fn active_facets(&self, x: &DVector<f64>, tol: f64) -> Vec<usize> {
        (0..self.facets.len())
            .filter(|&i| (self.facets[i].offset - self.facets[i].normal.dot(x)).abs() <= tol)
            .collect()
    }

    /// Indices of the hull points lying on every listed facet.
    pub fn points_on(&self, facets: &[usize]) -> Vec<usize> {
        let eps = 1e-9 * self.diameter;
        (0..self.points.len())
            .filter(|&i| {
                facets.iter().all(|&f| {
                    let fa = &self.facets[f];
                    (fa.offset - fa.normal.dot(&self.points[i])).abs() <= eps
                })
            })
            .collect()
    }

    /// Coordinate-wise bounding box.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in &self.points {
            for j in 0..self.dim {
                lo[j] = lo[j].min(p[j]);
                hi[j] = hi[j].max(p[j]);
            }
        }
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_vec(x.to_vec())
    }

    #[test]
    fn combinations_count() {
        let mut c = 0;
        for_each_combination(6, 3, |_| c += 1);
        assert_eq!(c, 20);
        let mut c = 0;
        for_each_combination(4, 1, |_| c += 1);
        assert_eq!(c, 4);
    }

    #[test]
    fn square_distance() {
        let h = Hull::from_points(&[
            v(&[1.0, 0.0]),
            v(&[-1.0, 0.0]),
            v(&[0.0, 1.0]),
            v(&[0.0, -1.0]),
            v(&[0.0, 0.0]),
        ])
        .unwrap();
        assert_eq!(h.facets().len(), 4);
        let d = h.distance(&v(&[0.0, 0.0]));
        assert!((d - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(h.distance(&v(&[0.5, 0.5])).abs() < 1e-12);
        assert!(h.distance(&v(&[1.0, 1.0])) < 0.0);
    }

    #[test]
    fn segment_and_degenerate() {
        let h = Hull::from_points(&[v(&[-1.0]), v(&[1.0]), v(&[0.0])]).unwrap();
        assert!((h.distance(&v(&[0.25])) - 0.75).abs() < 1e-12);
        assert!(Hull::from_points(&[v(&[0.0, 0.0]), v(&[1.0, 1.0]), v(&[2.0, 2.0])]).is_err());
    }

    #[test]
    fn cube_has_six_facets() {
        let mut pts = Vec::new();
        for a in [-1.0, 1.0] {
            for b in [-1.0, 1.0] {
                for c in [-1.0, 1.0] {
                    pts.push(v(&[a, b, c]));
                }
            }
        }
        let h = Hull::from_points(&pts).unwrap();
        assert_eq!(h.facets().len(), 6);
        assert!((h.distance(&v(&[0.0, 0.0, 0.0])) - 1.0).abs() < 1e-12);
    }
}
