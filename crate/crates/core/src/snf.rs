//! Smith normal form over the integers, used for lattice membership and for
//! the finite dual group of a full-rank sublattice of `Z^r`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snf {
    /// Invariant factors `d_1 | d_2 | ...`, padded with zeros to `ncols`.
    pub diag: Vec<i64>,
    /// Unimodular column transform: `U A V = D`.
    pub v: Vec<Vec<i64>>,
    pub v_inv: Vec<Vec<i64>>,
}

/// Smith normal form of the matrix whose rows are `rows` (each of length
/// `ncols`). The row lattice of the input equals `{y V^{-1} : y_i in d_i Z}`.
pub fn smith_normal_form(rows: &[Vec<i64>], ncols: usize) -> Snf {
    let m = rows.len();
    let n = ncols;
    let mut a: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut v: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| (i == j) as i128).collect())
        .collect();
    let mut vi = v.clone();
    let mut diag = vec![0i64; n];
    for t in 0..m.min(n) {
        loop {
            let mut piv: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    if a[i][j] != 0
                        && piv.is_none_or(|(pi, pj)| a[i][j].abs() < a[pi][pj].abs())
                    {
                        piv = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = piv else {
                return finish(diag, v, vi);
            };
            a.swap(t, pi);
            if pj != t {
                for row in a.iter_mut() {
                    row.swap(t, pj);
                }
                for row in v.iter_mut() {
                    row.swap(t, pj);
                }
                vi.swap(t, pj);
            }
            let p = a[t][t];
            let mut clean = true;
            for i in t + 1..m {
                let q = a[i][t] / p;
                if q != 0 {
                    for j in t..n {
                        a[i][j] -= q * a[t][j];
                    }
                }
                if a[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..n {
                let q = a[t][j] / p;
                if q != 0 {
                    for row in a.iter_mut() {
                        row[j] -= q * row[t];
                    }
                    for row in v.iter_mut() {
                        row[j] -= q * row[t];
                    }
                    for k in 0..n {
                        vi[t][k] += q * vi[j][k];
                    }
                }
                if a[t][j] != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            let bad = (t + 1..m).find(|&i| (t + 1..n).any(|j| a[i][j] % p != 0));
            match bad {
                Some(i) => {
                    for j in t..n {
                        a[t][j] += a[i][j];
                    }
                }
                None => break,
            }
        }
        diag[t] = a[t][t].unsigned_abs() as i64;
    }
    finish(diag, v, vi)
}

fn finish(diag: Vec<i64>, v: Vec<Vec<i128>>, vi: Vec<Vec<i128>>) -> Snf {
    let conv = |m: Vec<Vec<i128>>| -> Vec<Vec<i64>> {
        m.into_iter()
            .map(|r| r.into_iter().map(|x| x as i64).collect())
            .collect()
    };
    Snf {
        diag,
        v: conv(v),
        v_inv: conv(vi),
    }
}

impl Snf {
    pub fn rank(&self) -> usize {
        self.diag.iter().filter(|&&d| d != 0).count()
    }

    /// Index of the lattice in `Z^r`, `None` if it is not of full rank.
    pub fn index(&self) -> Option<u64> {
        if self.rank() < self.diag.len() {
            return None;
        }
        Some(self.diag.iter().map(|&d| d as u64).product())
    }

    pub fn contains(&self, w: &[i64]) -> bool {
        let n = self.diag.len();
        (0..n).all(|i| {
            let y: i128 = (0..n).map(|k| w[k] as i128 * self.v[k][i] as i128).sum();
            if self.diag[i] == 0 {
                y == 0
            } else {
                y % self.diag[i] as i128 == 0
            }
        })
    }

    /// Points `t` of the dual group `{t : <w, t> in 2 pi Z for all w}`,
    /// reduced to `[0, 2 pi)`. Requires full rank.
    pub fn dual_points(&self) -> Vec<Vec<f64>> {
        let n = self.diag.len();
        let mut out = Vec::new();
        let total: usize = self.diag.iter().map(|&d| d.max(1) as usize).product();
        for mut idx in 0..total {
            let mut s = vec![0.0; n];
            for i in (0..n).rev() {
                let d = self.diag[i].max(1) as usize;
                s[i] = 2.0 * PI * (idx % d) as f64 / d as f64;
                idx /= d;
            }
            let t: Vec<f64> = (0..n)
                .map(|k| {
                    let x: f64 = (0..n).map(|i| self.v[k][i] as f64 * s[i]).sum();
                    x - 2.0 * PI * (x / (2.0 * PI)).floor()
                })
                .collect();
            out.push(t);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn even_sublattice() {
        let s = smith_normal_form(&[vec![2], vec![-2]], 1);
        assert_eq!(s.index(), Some(2));
        assert!(s.contains(&[4]) && !s.contains(&[3]));
        let pts = s.dual_points();
        assert_eq!(pts.len(), 2);
        assert!(pts.iter().any(|t| (t[0] - PI).abs() < 1e-12));
    }

    #[test]
    fn a2_root_lattice_in_coweights() {
        // Differences of the orbit of lambda_1 span the coroot lattice, index 3.
        let rows = vec![vec![2, -1], vec![-1, 2], vec![1, 1]];
        let s = smith_normal_form(&rows, 2);
        assert_eq!(s.diag, vec![1, 3]);
        assert!(s.contains(&[1, 1]) && !s.contains(&[1, 0]));
    }

    proptest! {
        #[test]
        fn membership_matches_adjugate(
            a in proptest::collection::vec(proptest::collection::vec(-6i64..7, 2), 2),
            w in proptest::collection::vec(-10i64..11, 2),
        ) {
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            prop_assume!(det != 0);
            let s = smith_normal_form(&a, 2);
            // w = x A has the integer solution x = w adj(A) / det iff w is in the lattice.
            let x0 = w[0] * a[1][1] - w[1] * a[1][0];
            let x1 = -w[0] * a[0][1] + w[1] * a[0][0];
            let member = x0 % det == 0 && x1 % det == 0;
            prop_assert_eq!(s.contains(&w), member);
            prop_assert_eq!(s.index(), Some(det.unsigned_abs()));
            prop_assert_eq!(s.diag[1] % s.diag[0], 0);
            for i in 0..2 {
                for j in 0..2 {
                    let x: i64 = (0..2).map(|k| s.v[i][k] * s.v_inv[k][j]).sum();
                    prop_assert_eq!(x, (i == j) as i64);
                }
            }
        }

        #[test]
        fn generators_are_members(
            a in proptest::collection::vec(proptest::collection::vec(-6i64..7, 3), 1..5),
        ) {
            let s = smith_normal_form(&a, 3);
            for row in &a {
                prop_assert!(s.contains(row));
            }
            let sum: Vec<i64> = (0..3).map(|j| a.iter().map(|r| r[j]).sum()).collect();
            prop_assert!(s.contains(&sum));
        }
    }
}
