//! Admissible multi-indices of a set system, the blocked set and the union
//! identity over every realizing partial partition.
//!
//! Sets are bitmasks over a ground set of at most 16 elements. Admissibility
//! is decided by max flow; exhaustive enumeration is kept as the oracle.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const MAX_GROUND: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetSystem {
    ground: usize,
    sets: Vec<u16>,
}

impl SetSystem {
    pub fn new(ground: usize, sets: Vec<u16>) -> Result<SetSystem> {
        if ground > MAX_GROUND {
            return Err(Error::InvalidArgument(format!(
                "ground set has {ground} elements, at most {MAX_GROUND} supported"
            )));
        }
        if sets.is_empty() {
            return Err(Error::InvalidArgument("a set system needs at least one subset".into()));
        }
        let full = full_mask(ground);
        if let Some(j) = sets.iter().position(|&c| c & !full != 0) {
            return Err(Error::InvalidArgument(format!("subset {j} is not contained in the ground set")));
        }
        Ok(SetSystem { ground, sets })
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn sets(&self) -> &[u16] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    fn check_gamma(&self, gamma: &[usize]) -> Result<()> {
        if gamma.len() != self.sets.len() {
            return Err(Error::InvalidArgument(format!(
                "multi-index has {} entries, the system has {} subsets",
                gamma.len(),
                self.sets.len()
            )));
        }
        Ok(())
    }

    /// Element-block max flow equals `|gamma|`.
    pub fn is_admissible(&self, gamma: &[usize]) -> Result<bool> {
        self.check_gamma(gamma)?;
        let total: usize = gamma.iter().sum();
        if total > self.ground {
            return Ok(false);
        }
        Ok(max_flow(self, gamma) == total)
    }

    /// Decision by enumerating realizations.
    pub fn is_admissible_brute(&self, gamma: &[usize]) -> Result<bool> {
        self.check_gamma(gamma)?;
        let mut found = false;
        self.for_each_realization(gamma, &mut |_| {
            found = true;
            false
        });
        Ok(found)
    }

    /// `J = { j : gamma + e_j is not admissible }`.
    pub fn blocked_set(&self, gamma: &[usize]) -> Result<Vec<usize>> {
        if !self.is_admissible(gamma)? {
            return Err(Error::OutsideDomain(format!(
                "blocked set needs an admissible multi-index, {gamma:?} is not"
            )));
        }
        let mut out = Vec::new();
        let mut g = gamma.to_vec();
        for j in 0..g.len() {
            g[j] += 1;
            if !self.is_admissible(&g)? {
                out.push(j);
            }
            g[j] -= 1;
        }
        Ok(out)
    }

    /// Calls `visit` with the blocks `X_j` of every partial partition with
    /// `X_j ⊆ C_j` and `|X_j| = gamma_j`; stops when `visit` returns false.
    pub fn for_each_realization(&self, gamma: &[usize], visit: &mut dyn FnMut(&[u16]) -> bool) {
        let mut blocks = vec![0u16; self.sets.len()];
        self.realize(gamma, 0, 0, &mut blocks, visit);
    }

    fn realize(&self, gamma: &[usize], j: usize, used: u16, blocks: &mut [u16], visit: &mut dyn FnMut(&[u16]) -> bool) -> bool {
        if j == gamma.len() {
            return visit(blocks);
        }
        let avail = self.sets[j] & !used;
        if (avail.count_ones() as usize) < gamma[j] {
            return true;
        }
        // Submasks of `avail` with the right size.
        let mut sub = avail;
        loop {
            if sub.count_ones() as usize == gamma[j] {
                blocks[j] = sub;
                if !self.realize(gamma, j + 1, used | sub, blocks, visit) {
                    return false;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & avail;
        }
        blocks[j] = 0;
        true
    }

    /// The union identity over `J_gamma` for every realization; the number of
    /// realizations checked is returned alongside.
    pub fn lemma5_check(&self, gamma: &[usize]) -> Result<(bool, usize)> {
        let blocked = self.blocked_set(gamma)?;
        let target = blocked.iter().fold(0u16, |a, &j| a | self.sets[j]);
        let mut ok = true;
        let mut count = 0;
        self.for_each_realization(gamma, &mut |x| {
            count += 1;
            let got = blocked.iter().fold(0u16, |a, &j| a | x[j]);
            ok &= got == target;
            true
        });
        Ok((ok, count))
    }
}

fn full_mask(n: usize) -> u16 {
    if n >= 16 {
        u16::MAX
    } else {
        (1u16 << n) - 1
    }
}

/// Edmonds-Karp on source -> block (gamma_j) -> element (1) -> sink (1).
fn max_flow(sys: &SetSystem, gamma: &[usize]) -> usize {
    let r = sys.sets.len();
    let n = sys.ground;
    let size = r + n + 2;
    let (src, sink) = (r + n, r + n + 1);
    let mut cap = vec![vec![0i64; size]; size];
    for j in 0..r {
        cap[src][j] = gamma[j] as i64;
        for e in 0..n {
            if sys.sets[j] >> e & 1 == 1 {
                cap[j][r + e] = 1;
            }
        }
    }
    for e in 0..n {
        cap[r + e][sink] = 1;
    }
    let mut flow = 0usize;
    loop {
        let mut prev = vec![usize::MAX; size];
        prev[src] = src;
        let mut queue = VecDeque::from([src]);
        while let Some(v) = queue.pop_front() {
            for w in 0..size {
                if prev[w] == usize::MAX && cap[v][w] > 0 {
                    prev[w] = v;
                    queue.push_back(w);
                }
            }
        }
        if prev[sink] == usize::MAX {
            return flow;
        }
        let mut w = sink;
        while w != src {
            let v = prev[w];
            cap[v][w] -= 1;
            cap[w][v] += 1;
            w = v;
        }
        flow += 1;
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SuiteReport {
    pub systems: usize,
    pub gammas: usize,
    pub admissible: usize,
    pub realizations: usize,
    /// Admissible gammas where the union identity failed.
    pub failures: usize,
    /// Gammas where flow and enumeration disagree.
    pub flow_mismatches: usize,
    /// Admissible gammas with an inadmissible predecessor.
    pub monotonicity_failures: usize,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.flow_mismatches == 0 && self.monotonicity_failures == 0
    }
}

/// A random system with `|X| <= max_ground` and `r <= max_sets`, each
/// element in each subset with probability 1/2.
pub fn random_system(rng: &mut ChaCha8Rng, max_ground: usize, max_sets: usize) -> SetSystem {
    let ground = rng.random_range(1..=max_ground);
    let r = rng.random_range(1..=max_sets);
    let sets = (0..r)
        .map(|_| rng.random_range(0..=u32::from(full_mask(ground))) as u16)
        .collect();
    SetSystem::new(ground, sets).expect("generated within bounds")
}

/// Checks every multi-index with `|gamma| <= |X|` of `count` random systems.
pub fn lemma5_suite(seed: u64, count: usize, max_ground: usize, max_sets: usize) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport::default();
    for _ in 0..count {
        let sys = random_system(&mut rng, max_ground, max_sets);
        check_system(&sys, &mut rep)?;
    }
    Ok(rep)
}

fn check_system(sys: &SetSystem, rep: &mut SuiteReport) -> Result<()> {
    rep.systems += 1;
    let r = sys.len();
    let mut gamma = vec![0usize; r];
    loop {
        if gamma.iter().sum::<usize>() <= sys.ground() {
            rep.gammas += 1;
            let flow = sys.is_admissible(&gamma)?;
            if flow != sys.is_admissible_brute(&gamma)? {
                rep.flow_mismatches += 1;
            }
            if flow {
                rep.admissible += 1;
                let (ok, count) = sys.lemma5_check(&gamma)?;
                rep.realizations += count;
                if !ok {
                    rep.failures += 1;
                }
                for j in 0..r {
                    if gamma[j] > 0 {
                        gamma[j] -= 1;
                        let pred = sys.is_admissible(&gamma)?;
                        gamma[j] += 1;
                        if !pred {
                            rep.monotonicity_failures += 1;
                        }
                    }
                }
            }
        }
        let mut j = 0;
        loop {
            if j == r {
                return Ok(());
            }
            gamma[j] += 1;
            if gamma[j] <= sys.ground() {
                break;
            }
            gamma[j] = 0;
            j += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> SetSystem {
        // X = {a, b}, C1 = {a}, C2 = {a, b}.
        SetSystem::new(2, vec![0b01, 0b11]).unwrap()
    }

    #[test]
    fn small_example() {
        let s = example();
        assert!(s.is_admissible(&[1, 1]).unwrap());
        assert!(!s.is_admissible(&[2, 0]).unwrap());
        assert!(s.is_admissible(&[0, 0]).unwrap());
        assert_eq!(s.blocked_set(&[1, 1]).unwrap(), vec![0, 1]);
        let (ok, count) = s.lemma5_check(&[1, 1]).unwrap();
        assert!(ok);
        assert_eq!(count, 1);
        let (ok, count) = s.lemma5_check(&[0, 1]).unwrap();
        assert!(ok && count == 2);
        assert!(matches!(s.blocked_set(&[2, 0]), Err(Error::OutsideDomain(_))));
    }

    #[test]
    fn empty_subset_is_always_blocked() {
        let s = SetSystem::new(3, vec![0, 0b101, 0b011]).unwrap();
        for g in [[0, 0, 0], [0, 1, 1], [0, 2, 1]] {
            assert!(s.blocked_set(&g).unwrap().contains(&0));
        }
        let t = SetSystem::new(3, vec![0b001, 0b110]).unwrap();
        assert!(t.blocked_set(&[0, 0]).unwrap().is_empty());
    }

    #[test]
    fn rejects_bad_systems() {
        assert!(SetSystem::new(2, vec![0b100]).is_err());
        assert!(SetSystem::new(17, vec![1]).is_err());
        assert!(SetSystem::new(2, vec![]).is_err());
        assert!(example().is_admissible(&[1]).is_err());
    }

    #[test]
    fn seeded_suite() {
        let rep = lemma5_suite(7, 60, 6, 4).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.admissible > 0 && rep.realizations >= rep.admissible);
    }
}
