//! Finite exponential polynomials `sum_k c_k e^{<z, k>}` with keys in an
//! integer lattice.
//!
//! Keys are integer coordinates with respect to a lattice basis chosen by the
//! caller (fundamental coweights for buildings, the standard basis for
//! `Z^r`). Evaluation takes the pairings `p_j = <z, basis_j>`, so the type
//! does not depend on the frame.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use num_complex::Complex64;

/// Integer coordinates of a lattice point.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticePoint(pub Vec<i64>);

impl LatticePoint {
    pub fn zero(rank: usize) -> Self {
        LatticePoint(alloc::vec![0; rank])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn add(&self, o: &LatticePoint) -> LatticePoint {
        LatticePoint(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &LatticePoint) -> LatticePoint {
        LatticePoint(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> LatticePoint {
        LatticePoint(self.0.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, n: i64) -> LatticePoint {
        LatticePoint(self.0.iter().map(|a| a * n).collect())
    }

    pub fn dot_f(&self, p: &[f64]) -> f64 {
        self.0.iter().zip(p).map(|(&k, &x)| k as f64 * x).sum()
    }

    pub fn dot_c(&self, p: &[Complex64]) -> Complex64 {
        self.0
            .iter()
            .zip(p)
            .fold(Complex64::new(0.0, 0.0), |a, (&k, x)| a + x * k as f64)
    }
}

impl From<Vec<i64>> for LatticePoint {
    fn from(v: Vec<i64>) -> Self {
        LatticePoint(v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpPoly {
    rank: usize,
    terms: BTreeMap<LatticePoint, Complex64>,
}

impl ExpPoly {
    pub fn zero(rank: usize) -> Self {
        ExpPoly {
            rank,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(rank: usize, c: Complex64) -> Self {
        let mut p = Self::zero(rank);
        p.add_term(LatticePoint::zero(rank), c);
        p
    }

    pub fn monomial(k: LatticePoint, c: Complex64) -> Self {
        let mut p = Self::zero(k.dim());
        p.add_term(k, c);
        p
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LatticePoint, &Complex64)> {
        self.terms.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &LatticePoint> {
        self.terms.keys()
    }

    pub fn get(&self, k: &LatticePoint) -> Complex64 {
        self.terms.get(k).copied().unwrap_or_default()
    }

    pub fn add_term(&mut self, k: LatticePoint, c: Complex64) {
        debug_assert_eq!(k.dim(), self.rank);
        *self.terms.entry(k).or_default() += c;
    }

    /// Removes the term at `k`, returning its coefficient.
    pub fn remove(&mut self, k: &LatticePoint) -> Complex64 {
        self.terms.remove(k).unwrap_or_default()
    }

    /// `sum_k c_k exp(sum_j k_j p_j)`.
    pub fn eval(&self, pairing: &[Complex64]) -> Complex64 {
        let terms: Vec<Complex64> = self
            .terms
            .iter()
            .map(|(k, c)| c * k.dot_c(pairing).exp())
            .collect();
        crate::numeric::pairwise_sum_c(&terms)
    }

    pub fn eval_real(&self, pairing: &[f64]) -> Complex64 {
        let p: Vec<Complex64> = pairing.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.eval(&p)
    }

    pub fn sum_coefficients(&self) -> Complex64 {
        let v: Vec<Complex64> = self.terms.values().copied().collect();
        crate::numeric::pairwise_sum_c(&v)
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.terms.values().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    /// Drops terms with `|c| < rel * max |c|`.
    pub fn prune(&mut self, rel: f64) {
        let m = self.max_abs();
        let cut = rel * m;
        self.terms.retain(|_, c| c.norm() >= cut && c.norm() > 0.0);
    }

    pub fn scale(&self, s: Complex64) -> ExpPoly {
        ExpPoly {
            rank: self.rank,
            terms: self.terms.iter().map(|(k, c)| (k.clone(), c * s)).collect(),
        }
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, other: &ExpPoly, s: Complex64) {
        for (k, c) in other.iter() {
            self.add_term(k.clone(), c * s);
        }
    }

    pub fn mul(&self, other: &ExpPoly) -> ExpPoly {
        let mut out = ExpPoly::zero(self.rank);
        for (k1, c1) in self.iter() {
            for (k2, c2) in other.iter() {
                out.add_term(k1.add(k2), c1 * c2);
            }
        }
        out
    }

    /// `self^n`, pruning relative to the largest coefficient after each
    /// product (`rel = 0` keeps everything).
    pub fn pow(&self, n: u32, rel: f64) -> ExpPoly {
        let mut result = ExpPoly::constant(self.rank, Complex64::new(1.0, 0.0));
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
                if rel > 0.0 {
                    result.prune(rel);
                }
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
                if rel > 0.0 {
                    base.prune(rel);
                }
            }
        }
        result
    }

    /// Image of the keys under a row-major integer matrix.
    pub fn act(&self, matrix: &[i64]) -> ExpPoly {
        let r = self.rank;
        let mut out = ExpPoly::zero(r);
        for (k, c) in self.iter() {
            let nk: Vec<i64> = (0..r)
                .map(|i| (0..r).map(|j| matrix[i * r + j] * k.0[j]).sum())
                .collect();
            out.add_term(LatticePoint(nk), *c);
        }
        out
    }

    /// Average over a finite group of integer matrices.
    pub fn symmetrize<'a>(&self, group: impl IntoIterator<Item = &'a [i64]>) -> ExpPoly {
        let mut out = ExpPoly::zero(self.rank);
        let mut count = 0usize;
        for m in group {
            out.add_scaled(&self.act(m), Complex64::new(1.0, 0.0));
            count += 1;
        }
        out.scale(Complex64::new(1.0 / count as f64, 0.0))
    }

    /// Coordinate-wise bounding box of the support.
    pub fn support_box(&self) -> Option<(Vec<i64>, Vec<i64>)> {
        let mut it = self.terms.keys();
        let first = it.next()?;
        let mut lo = first.0.clone();
        let mut hi = first.0.clone();
        for k in it {
            for j in 0..self.rank {
                lo[j] = lo[j].min(k.0[j]);
                hi[j] = hi[j].max(k.0[j]);
            }
        }
        Some((lo, hi))
    }

    /// Largest `|a_k - b_k|` over the union of supports.
    pub fn max_diff(&self, other: &ExpPoly) -> f64 {
        let mut m: f64 = 0.0;
        for (k, c) in self.iter() {
            m = m.max((c - other.get(k)).norm());
        }
        for (k, c) in other.iter() {
            if !self.terms.contains_key(k) {
                m = m.max(c.norm());
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn binomial_power() {
        let walk = {
            let mut p = ExpPoly::zero(1);
            p.add_term(LatticePoint(vec![1]), c(0.5));
            p.add_term(LatticePoint(vec![-1]), c(0.5));
            p
        };
        let p4 = walk.pow(4, 0.0);
        assert!((p4.get(&LatticePoint(vec![0])).re - 0.375).abs() < 1e-15);
        assert!((p4.get(&LatticePoint(vec![2])).re - 0.25).abs() < 1e-15);
        assert!((p4.sum_coefficients().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eval_multiplicative() {
        let mut a = ExpPoly::zero(2);
        a.add_term(LatticePoint(vec![1, 0]), c(0.3));
        a.add_term(LatticePoint(vec![-1, 2]), Complex64::new(0.1, 0.2));
        let mut b = ExpPoly::zero(2);
        b.add_term(LatticePoint(vec![0, -1]), c(0.7));
        b.add_term(LatticePoint(vec![1, 1]), c(-0.4));
        let z = [Complex64::new(0.2, 0.5), Complex64::new(-0.1, 1.3)];
        let lhs = a.mul(&b).eval(&z);
        let rhs = a.eval(&z) * b.eval(&z);
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn prune_is_relative() {
        let mut a = ExpPoly::zero(1);
        a.add_term(LatticePoint(vec![0]), c(1e-30));
        a.add_term(LatticePoint(vec![1]), c(1e-45));
        a.prune(1e-12);
        assert_eq!(a.len(), 1);
    }
}
