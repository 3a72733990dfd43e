//! Exact transition probabilities on the `(q+1)`-regular tree (the building
//! of type `A_1`) via the distance chain; an oracle independent of the
//! spectral machinery.
//!
//! A walk is `sum_k a_k A_k`, where `A_k` moves to a uniform vertex at
//! distance `k`. The chain is run in the scaled form
//! `g_n(d) = rho^{-n} q^{d/2} p_n(d)` so long runs neither underflow nor
//! overflow.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::walk::Kernel;

#[derive(Clone, Debug, PartialEq)]
pub struct TreeWalk {
    q: f64,
    /// `(k, a_k)` pairs.
    steps: Vec<(usize, f64)>,
}

impl TreeWalk {
    pub fn new(q: f64, steps: Vec<(usize, f64)>) -> Result<TreeWalk> {
        if !(q > 1.0) {
            return Err(Error::InvalidQ(format!("q = {q} must exceed 1")));
        }
        let total: f64 = steps.iter().map(|s| s.1).sum();
        if steps.is_empty() || steps.iter().any(|s| !(s.1 > 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidWalk("tree walk weights must be positive and sum to 1".into()));
        }
        Ok(TreeWalk { q, steps })
    }

    pub fn nearest_neighbour(q: f64) -> TreeWalk {
        TreeWalk {
            q,
            steps: vec![(1, 1.0)],
        }
    }

    /// The tree walk of an `A_1` building kernel.
    pub fn from_kernel(k: &Kernel) -> Result<TreeWalk> {
        let ctx = k.require_building()?;
        if ctx.rank() != 1 {
            return Err(Error::InvalidArgument("tree oracle needs rank 1".into()));
        }
        let steps = k.steps().iter().map(|s| (s.mu.0[0] as usize, s.weight)).collect();
        TreeWalk::new(ctx.q().simple()[0], steps)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn max_step(&self) -> usize {
        self.steps.iter().map(|s| s.0).max().unwrap_or(0)
    }

    /// Spectral radius `sum_k a_k q^{-k/2} (1 + k (q-1)/(q+1))`.
    pub fn rho(&self) -> f64 {
        let q = self.q;
        self.steps
            .iter()
            .map(|&(k, a)| a * q.powf(-(k as f64) / 2.0) * (1.0 + k as f64 * (q - 1.0) / (q + 1.0)))
            .sum()
    }

    pub fn ln_sphere_size(&self, m: usize) -> f64 {
        if m == 0 {
            0.0
        } else {
            (self.q + 1.0).ln() + (m as f64 - 1.0) * self.q.ln()
        }
    }

    pub fn sphere_size(&self, m: usize) -> f64 {
        self.ln_sphere_size(m).exp()
    }

    /// Distribution of the distance after one uniform jump of length `k`
    /// from a vertex at distance `d`, as `(target, probability)`.
    fn jump(&self, d: usize, k: usize) -> Vec<(usize, f64)> {
        if k == 0 {
            return vec![(d, 1.0)];
        }
        let q = self.q;
        // Non-backtracking path: state (distance, moving towards the origin).
        let mut states: Vec<(usize, bool, f64)> = if d == 0 {
            vec![(1, false, 1.0)]
        } else {
            vec![(d - 1, true, 1.0 / (q + 1.0)), (d + 1, false, q / (q + 1.0))]
        };
        for _ in 1..k {
            let mut next = Vec::new();
            for &(e, inward, p) in &states {
                if !inward {
                    next.push((e + 1, false, p));
                } else if e == 0 {
                    next.push((1, false, p));
                } else {
                    next.push((e - 1, true, p / q));
                    next.push((e + 1, false, p * (q - 1.0) / q));
                }
            }
            states = next;
        }
        let mut out: Vec<(usize, f64)> = Vec::new();
        for (e, _, p) in states {
            match out.iter_mut().find(|x| x.0 == e) {
                Some(x) => x.1 += p,
                None => out.push((e, p)),
            }
        }
        out
    }

    /// Scaled transitions `T(d -> j) = rho^{-1} q^{(j-d)/2} (N_d/N_j) M(d -> j)`.
    fn scaled_row(&self, d: usize, rho: f64) -> Vec<(usize, f64)> {
        let mut row: Vec<(usize, f64)> = Vec::new();
        for &(k, a) in &self.steps {
            for (j, p) in self.jump(d, k) {
                let lw = 0.5 * (j as f64 - d as f64) * self.q.ln() + self.ln_sphere_size(d)
                    - self.ln_sphere_size(j);
                let t = a * p * lw.exp() / rho;
                match row.iter_mut().find(|x| x.0 == j) {
                    Some(x) => x.1 += t,
                    None => row.push((j, t)),
                }
            }
        }
        row
    }
}

/// The scaled distance chain truncated at `d_max`.
#[derive(Clone, Debug)]
pub struct TreeChain {
    walk: TreeWalk,
    rho: f64,
    rows: Vec<Vec<(usize, f64)>>,
    g: Vec<f64>,
    n: u64,
}

impl TreeChain {
    pub fn new(walk: &TreeWalk, d_max: usize) -> TreeChain {
        let rho = walk.rho();
        let kmax = walk.max_step();
        // Rows are translation invariant beyond kmax; reuse the pattern.
        let generic = walk.scaled_row(kmax + 1, rho);
        let rows = (0..=d_max)
            .map(|d| {
                if d <= kmax {
                    walk.scaled_row(d, rho)
                } else {
                    generic
                        .iter()
                        .map(|&(j, t)| (j + d - (kmax + 1), t))
                        .collect()
                }
                .into_iter()
                .filter(|&(j, _)| j <= d_max)
                .collect()
            })
            .collect();
        let mut g = vec![0.0; d_max + 1];
        g[0] = 1.0;
        TreeChain {
            walk: walk.clone(),
            rho,
            rows,
            g,
            n: 0,
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn step(&mut self) {
        let mut next = vec![0.0; self.g.len()];
        for (d, row) in self.rows.iter().enumerate() {
            let x = self.g[d];
            if x == 0.0 {
                continue;
            }
            for &(j, t) in row {
                next[j] += x * t;
            }
        }
        self.g = next;
        self.n += 1;
    }

    /// `rho^{-n} p_n(m)`.
    pub fn scaled(&self, m: usize) -> f64 {
        self.g.get(m).copied().unwrap_or(0.0) * self.walk.q.powf(-(m as f64) / 2.0)
    }

    /// `p_n(m)` per vertex.
    pub fn value(&self, m: usize) -> f64 {
        self.scaled(m) * self.rho.powi(self.n as i32)
    }
}

/// `p_n(O, x)` for `|x| = m`.
pub fn tree_exact_pn(walk: &TreeWalk, n: u64, m: usize) -> f64 {
    let mut c = TreeChain::new(walk, n as usize * walk.max_step().max(1));
    for _ in 0..n {
        c.step();
    }
    c.value(m)
}

/// `p_n(m)` for every `m` in `0..=n kmax`.
pub fn tree_exact_table(walk: &TreeWalk, n: u64) -> Vec<f64> {
    let d = n as usize * walk.max_step().max(1);
    let mut c = TreeChain::new(walk, d);
    for _ in 0..n {
        c.step();
    }
    (0..=d).map(|m| c.value(m)).collect()
}

/// Green function of the nearest-neighbour walk, `G_0 F^m`, where `F`
/// solves `F = zeta/(q+1) + zeta q/(q+1) F^2` and `G_0 = 1/(1 - zeta F)`.
pub fn tree_nn_green(q: f64, zeta: f64, m: usize) -> f64 {
    let a = zeta * q / (q + 1.0);
    let disc = (1.0 - 4.0 * a * zeta / (q + 1.0)).max(0.0);
    let f = (1.0 - disc.sqrt()) / (2.0 * a);
    f.powi(m as i32) / (1.0 - zeta * f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases_by_enumeration() {
        let w = TreeWalk::nearest_neighbour(2.0);
        assert!((tree_exact_pn(&w, 2, 0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((tree_exact_pn(&w, 1, 1) - 1.0 / 3.0).abs() < 1e-15);
        // Two steps to distance 2: 3 * 2 paths out of 9, over 6 vertices.
        assert!((tree_exact_pn(&w, 2, 2) - 1.0 / 9.0).abs() < 1e-15);
        // Ballistic edge: every non-backtracking path has probability
        // (q+1)^{-n} and ends at a distinct vertex.
        let n = 7;
        let expect = 3f64.powi(-n);
        assert!((tree_exact_pn(&w, n as u64, n as usize) - expect).abs() < 1e-14 * expect);
    }

    #[test]
    fn mass_conservation_and_rho() {
        let w = TreeWalk::new(3.0, vec![(1, 0.5), (2, 0.3), (0, 0.2)]).unwrap();
        let t = tree_exact_table(&w, 12);
        let mass: f64 = t.iter().enumerate().map(|(m, p)| p * w.sphere_size(m)).sum();
        assert!((mass - 1.0).abs() < 1e-12);
        let nn = TreeWalk::nearest_neighbour(2.0);
        assert!((nn.rho() - 2.0 * 2f64.sqrt() / 3.0).abs() < 1e-15);
    }

    #[test]
    fn green_closed_form_matches_series() {
        let q = 2.0;
        let w = TreeWalk::nearest_neighbour(q);
        let zeta = 0.5;
        let mut c = TreeChain::new(&w, 200);
        let mut sum = [0.0; 6];
        for n in 0..200 {
            for (m, s) in sum.iter_mut().enumerate() {
                *s += zeta.powi(n) * c.value(m);
            }
            c.step();
        }
        for (m, s) in sum.iter().enumerate() {
            let g = tree_nn_green(q, zeta, m);
            assert!((s - g).abs() < 1e-12 * g, "m={m} {s} {g}");
        }
    }
}
