//! Reduced irreducible root systems, their Weyl groups and Poincare series.
//!
//! Simple roots are realised from the Gram matrix of the Dynkin diagram by a
//! Cholesky factorisation, so vectors of `a` live in an orthonormal frame of
//! dimension equal to the rank. Simply laced systems have `|alpha|^2 = 2`.
//! Weyl group elements are stored as exact integer matrices acting on
//! coordinates with respect to the fundamental coweights.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Largest Weyl group that is enumerated explicitly.
pub const WEYL_ORDER_CAP: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum RootKind {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl RootKind {
    /// Parses `A`..`G`, also accepting `E6`, `E7`, `E8`, `F4`, `G2`.
    /// Returns the kind and, for the suffixed forms, the implied rank.
    pub fn parse(s: &str) -> Result<(RootKind, Option<usize>)> {
        let t = s.trim();
        let up: String = t.chars().map(|c| c.to_ascii_uppercase()).collect();
        if up.starts_with("BC") {
            return Err(Error::InvalidRootSystem(
                "non-reduced system BC is not supported".into(),
            ));
        }
        let (head, tail) = up.split_at(up.len().min(1));
        let kind = match head {
            "A" => RootKind::A,
            "B" => RootKind::B,
            "C" => RootKind::C,
            "D" => RootKind::D,
            "E" => RootKind::E,
            "F" => RootKind::F,
            "G" => RootKind::G,
            _ => return Err(Error::InvalidRootSystem(format!("unknown kind {t:?}"))),
        };
        let rank = if tail.is_empty() {
            None
        } else {
            Some(
                tail.parse::<usize>()
                    .map_err(|_| Error::InvalidRootSystem(format!("unknown kind {t:?}")))?,
            )
        };
        Ok((kind, rank))
    }

    pub fn name(self) -> &'static str {
        match self {
            RootKind::A => "A",
            RootKind::B => "B",
            RootKind::C => "C",
            RootKind::D => "D",
            RootKind::E => "E",
            RootKind::F => "F",
            RootKind::G => "G",
        }
    }
}

#[derive(Clone, Debug)]
pub struct PositiveRoot {
    /// Coordinates in the basis of simple roots.
    pub coords: Vec<i64>,
    pub vector: DVector<f64>,
    pub norm2: f64,
    /// `2 alpha / |alpha|^2`.
    pub coroot: DVector<f64>,
    /// Coordinates of the coroot in the coweight basis, `<coroot, alpha_j>`.
    pub coroot_coweight: Vec<i64>,
    /// Index of a simple root of the same length (the `q` class).
    pub class: usize,
    pub height: i64,
}

#[derive(Clone, Debug)]
pub struct RootSystem {
    kind: RootKind,
    rank: usize,
    gram: DMatrix<f64>,
    simple: Vec<DVector<f64>>,
    coweights: Vec<DVector<f64>>,
    cartan: Vec<Vec<i64>>,
    positive: Vec<PositiveRoot>,
    highest: usize,
    simple_class: Vec<usize>,
}

fn expected_positive_count(kind: RootKind, r: usize) -> usize {
    match kind {
        RootKind::A => r * (r + 1) / 2,
        RootKind::B | RootKind::C => r * r,
        RootKind::D => r * (r - 1),
        RootKind::E => match r {
            6 => 36,
            7 => 63,
            _ => 120,
        },
        RootKind::F => 24,
        RootKind::G => 6,
    }
}

fn gram_matrix(kind: RootKind, r: usize) -> Result<DMatrix<f64>> {
    let bad = |msg: &str| Err(Error::InvalidRootSystem(format!("{}{r}: {msg}", kind.name())));
    match kind {
        RootKind::A if r < 1 => return bad("rank must be at least 1"),
        RootKind::B | RootKind::C if r < 2 => return bad("rank must be at least 2"),
        RootKind::D if r < 4 => return bad("rank must be at least 4"),
        RootKind::E if !(6..=8).contains(&r) => return bad("rank must be 6, 7 or 8"),
        RootKind::F if r != 4 => return bad("rank must be 4"),
        RootKind::G if r != 2 => return bad("rank must be 2"),
        _ => {}
    }
    let mut g = DMatrix::<f64>::zeros(r, r);
    let link = |g: &mut DMatrix<f64>, i: usize, j: usize, v: f64| {
        g[(i, j)] = v;
        g[(j, i)] = v;
    };
    match kind {
        RootKind::A => {
            for i in 0..r {
                g[(i, i)] = 2.0;
            }
            for i in 0..r.saturating_sub(1) {
                link(&mut g, i, i + 1, -1.0);
            }
        }
        RootKind::B => {
            for i in 0..r {
                g[(i, i)] = 2.0;
            }
            g[(r - 1, r - 1)] = 1.0;
            for i in 0..r - 1 {
                link(&mut g, i, i + 1, -1.0);
            }
        }
        RootKind::C => {
            for i in 0..r {
                g[(i, i)] = 2.0;
            }
            g[(r - 1, r - 1)] = 4.0;
            for i in 0..r - 2 {
                link(&mut g, i, i + 1, -1.0);
            }
            link(&mut g, r - 2, r - 1, -2.0);
        }
        RootKind::D => {
            for i in 0..r {
                g[(i, i)] = 2.0;
            }
            for i in 0..r - 2 {
                link(&mut g, i, i + 1, -1.0);
            }
            link(&mut g, r - 3, r - 1, -1.0);
        }
        RootKind::E => {
            for i in 0..r {
                g[(i, i)] = 2.0;
            }
            link(&mut g, 0, 2, -1.0);
            link(&mut g, 1, 3, -1.0);
            for i in 2..r - 1 {
                link(&mut g, i, i + 1, -1.0);
            }
        }
        RootKind::F => {
            g[(0, 0)] = 2.0;
            g[(1, 1)] = 2.0;
            g[(2, 2)] = 1.0;
            g[(3, 3)] = 1.0;
            link(&mut g, 0, 1, -1.0);
            link(&mut g, 1, 2, -1.0);
            link(&mut g, 2, 3, -0.5);
        }
        RootKind::G => {
            g[(0, 0)] = 2.0;
            g[(1, 1)] = 6.0;
            link(&mut g, 0, 1, -3.0);
        }
    }
    Ok(g)
}

/// Builds the root system of the given kind and rank.
pub fn build_root_system(kind: RootKind, rank: usize) -> Result<RootSystem> {
    let r = rank;
    let gram = gram_matrix(kind, r)?;
    let chol = gram
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidRootSystem("Gram matrix is not positive definite".into()))?;
    // Rows of L are the simple roots: L L^T = G.
    let l = chol.l();
    let simple: Vec<DVector<f64>> = (0..r).map(|i| l.row(i).transpose()).collect();
    let s = l.clone();
    let lam = s
        .try_inverse()
        .ok_or_else(|| Error::InvalidRootSystem("simple roots are dependent".into()))?;
    let coweights: Vec<DVector<f64>> = (0..r).map(|j| lam.column(j).into_owned()).collect();

    let mut cartan = vec![vec![0i64; r]; r];
    for i in 0..r {
        for j in 0..r {
            let v = 2.0 * gram[(i, j)] / gram[(j, j)];
            let k = v.round();
            if (v - k).abs() > 1e-9 {
                return Err(Error::InvalidRootSystem("non-integral Cartan entry".into()));
            }
            cartan[i][j] = k as i64;
        }
    }

    let mut simple_class = vec![0usize; r];
    for i in 0..r {
        simple_class[i] = (0..=i)
            .find(|&j| (gram[(j, j)] - gram[(i, i)]).abs() < 1e-9)
            .unwrap_or(i);
    }

    // Integer closure of the simple roots under simple reflections.
    let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut queue: VecDeque<Vec<i64>> = VecDeque::new();
    for i in 0..r {
        let mut e = vec![0i64; r];
        e[i] = 1;
        seen.insert(e.clone());
        queue.push_back(e);
    }
    while let Some(b) = queue.pop_front() {
        for i in 0..r {
            let c: i64 = (0..r).map(|k| b[k] * cartan[k][i]).sum();
            let mut nb = b.clone();
            nb[i] -= c;
            if seen.insert(nb.clone()) {
                queue.push_back(nb);
            }
        }
    }
    let mut positive = Vec::new();
    for b in seen.iter().filter(|b| b.iter().all(|&x| x >= 0)) {
        let mut v = DVector::<f64>::zeros(r);
        for k in 0..r {
            v += &simple[k] * b[k] as f64;
        }
        let norm2 = v.dot(&v);
        let coroot = &v * (2.0 / norm2);
        let coroot_coweight: Vec<i64> = (0..r)
            .map(|j| {
                let x = coroot.dot(&simple[j]);
                x.round() as i64
            })
            .collect();
        let class = (0..r)
            .find(|&j| (gram[(j, j)] - norm2).abs() < 1e-9 * norm2)
            .map(|j| simple_class[j])
            .ok_or_else(|| Error::InvalidRootSystem("root length matches no simple root".into()))?;
        positive.push(PositiveRoot {
            height: b.iter().sum(),
            coords: b.clone(),
            vector: v,
            norm2,
            coroot,
            coroot_coweight,
            class,
        });
    }
    positive.sort_by(|a, b| a.height.cmp(&b.height).then(a.coords.cmp(&b.coords)));
    let expect = expected_positive_count(kind, r);
    if positive.len() != expect || seen.len() != 2 * expect {
        return Err(Error::InvalidRootSystem(format!(
            "closure produced {} positive roots, expected {expect}",
            positive.len()
        )));
    }
    let highest = positive.len() - 1;
    Ok(RootSystem {
        kind,
        rank: r,
        gram,
        simple,
        coweights,
        cartan,
        positive,
        highest,
        simple_class,
    })
}

impl RootSystem {
    pub fn kind(&self) -> RootKind {
        self.kind
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn label(&self) -> String {
        format!("{}{}", self.kind.name(), self.rank)
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn simple_roots(&self) -> &[DVector<f64>] {
        &self.simple
    }

    pub fn coweights(&self) -> &[DVector<f64>] {
        &self.coweights
    }

    /// `cartan()[i][j] = <alpha_i, coroot_j>`.
    pub fn cartan(&self) -> &[Vec<i64>] {
        &self.cartan
    }

    pub fn positive_roots(&self) -> &[PositiveRoot] {
        &self.positive
    }

    pub fn highest_root(&self) -> &PositiveRoot {
        &self.positive[self.highest]
    }

    /// Coefficients of the highest root in the basis of simple roots.
    pub fn marks(&self) -> &[i64] {
        &self.positive[self.highest].coords
    }

    /// Class (for the `q` parameters) of simple root `i`.
    pub fn simple_class(&self, i: usize) -> usize {
        self.simple_class[i]
    }

    /// Matrix whose columns are the fundamental coweights.
    pub fn coweight_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_columns(&self.coweights)
    }

    /// Vector with the given coordinates in the coweight basis.
    pub fn from_coweight_coords(&self, k: &[f64]) -> DVector<f64> {
        let mut v = DVector::zeros(self.rank);
        for j in 0..self.rank {
            v += &self.coweights[j] * k[j];
        }
        v
    }

    pub fn from_coweight_int(&self, k: &[i64]) -> DVector<f64> {
        let kf: Vec<f64> = k.iter().map(|&x| x as f64).collect();
        self.from_coweight_coords(&kf)
    }

    /// Coordinates `<x, alpha_j>` of `x` in the coweight basis.
    pub fn coweight_coords(&self, x: &DVector<f64>) -> Vec<f64> {
        self.simple.iter().map(|a| a.dot(x)).collect()
    }

    /// Coordinates `<x, lambda_j>`, i.e. `x` in the basis of simple roots.
    pub fn root_coords(&self, x: &DVector<f64>) -> Vec<f64> {
        self.coweights.iter().map(|l| l.dot(x)).collect()
    }

    pub fn is_dominant_int(k: &[i64]) -> bool {
        k.iter().all(|&x| x >= 0)
    }

    /// Order of the Weyl group from the classical formulas.
    pub fn weyl_order(&self) -> u64 {
        let r = self.rank as u64;
        let fact = |n: u64| (1..=n).product::<u64>();
        match self.kind {
            RootKind::A => fact(r + 1),
            RootKind::B | RootKind::C => (1u64 << r) * fact(r),
            RootKind::D => (1u64 << (r - 1)) * fact(r),
            RootKind::E => match r {
                6 => 51_840,
                7 => 2_903_040,
                _ => 696_729_600,
            },
            RootKind::F => 1_152,
            RootKind::G => 12,
        }
    }
}

/// Parameters `q_alpha > 1`, constant on roots of the same length.
#[derive(Clone, Debug, PartialEq)]
pub struct QParams {
    simple: Vec<f64>,
}

impl QParams {
    /// One value per simple root; values on same-length simple roots must agree.
    pub fn new(rs: &RootSystem, q: &[f64]) -> Result<QParams> {
        if q.len() != rs.rank() {
            return Err(Error::InvalidQ(format!(
                "expected {} values, got {}",
                rs.rank(),
                q.len()
            )));
        }
        for (i, &qi) in q.iter().enumerate() {
            if !(qi.is_finite() && qi > 1.0) {
                return Err(Error::InvalidQ(format!("q[{i}] = {qi} must exceed 1")));
            }
            let c = rs.simple_class(i);
            if (q[c] - qi).abs() > 1e-12 * qi {
                return Err(Error::InvalidQ(format!(
                    "q[{i}] = {qi} differs from q[{c}] = {} on a root of the same length",
                    q[c]
                )));
            }
        }
        Ok(QParams { simple: q.to_vec() })
    }

    pub fn uniform(rs: &RootSystem, q: f64) -> Result<QParams> {
        QParams::new(rs, &vec![q; rs.rank()])
    }

    pub fn simple(&self) -> &[f64] {
        &self.simple
    }

    pub fn of_root(&self, root: &PositiveRoot) -> f64 {
        self.simple[root.class]
    }
}

#[derive(Clone, Debug)]
pub struct WeylElement {
    /// Row-major integer matrix acting on coweight coordinates.
    pub matrix: Vec<i64>,
    pub length: usize,
    /// A reduced word `w = s_{i_1} ... s_{i_l}`.
    pub word: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct WeylGroup {
    rank: usize,
    elements: Vec<WeylElement>,
    index: BTreeMap<Vec<i64>, usize>,
    orth: Vec<DMatrix<f64>>,
    inverse: Vec<usize>,
    generators: Vec<Vec<i64>>,
}

fn mat_mul(a: &[i64], b: &[i64], r: usize) -> Vec<i64> {
    let mut c = vec![0i64; r * r];
    for i in 0..r {
        for k in 0..r {
            let aik = a[i * r + k];
            if aik == 0 {
                continue;
            }
            for j in 0..r {
                c[i * r + j] += aik * b[k * r + j];
            }
        }
    }
    c
}

fn identity(r: usize) -> Vec<i64> {
    let mut m = vec![0i64; r * r];
    for i in 0..r {
        m[i * r + i] = 1;
    }
    m
}

/// Enumerates the Weyl group by breadth-first search over right
/// multiplication by simple reflections.
pub fn weyl_group(rs: &RootSystem) -> Result<WeylGroup> {
    let order = rs.weyl_order();
    if order > WEYL_ORDER_CAP as u64 {
        return Err(Error::WeylGroupTooLarge {
            order,
            cap: WEYL_ORDER_CAP,
        });
    }
    let r = rs.rank();
    let cartan = rs.cartan();
    let generators: Vec<Vec<i64>> = (0..r)
        .map(|k| {
            let mut m = identity(r);
            for i in 0..r {
                m[i * r + k] -= cartan[i][k];
            }
            m
        })
        .collect();
    let mut elements = vec![WeylElement {
        matrix: identity(r),
        length: 0,
        word: Vec::new(),
    }];
    let mut index = BTreeMap::new();
    index.insert(identity(r), 0usize);
    let mut frontier = 0usize;
    while frontier < elements.len() {
        let cur = elements[frontier].clone();
        for (k, g) in generators.iter().enumerate() {
            let m = mat_mul(&cur.matrix, g, r);
            if !index.contains_key(&m) {
                let mut word = cur.word.clone();
                word.push(k);
                index.insert(m.clone(), elements.len());
                elements.push(WeylElement {
                    matrix: m,
                    length: cur.length + 1,
                    word,
                });
            }
        }
        frontier += 1;
    }
    if elements.len() as u64 != order {
        return Err(Error::InvalidRootSystem(format!(
            "Weyl group closure has {} elements, expected {order}",
            elements.len()
        )));
    }
    let lam = rs.coweight_matrix();
    let s = DMatrix::from_rows(
        &rs.simple_roots()
            .iter()
            .map(|a| a.transpose())
            .collect::<Vec<_>>(),
    );
    let orth = elements
        .iter()
        .map(|e| {
            let m = DMatrix::from_fn(r, r, |i, j| e.matrix[i * r + j] as f64);
            &lam * m * &s
        })
        .collect();
    let inverse = elements
        .iter()
        .map(|e| {
            let mut m = identity(r);
            for &k in e.word.iter().rev() {
                m = mat_mul(&m, &generators[k], r);
            }
            index[&m]
        })
        .collect();
    Ok(WeylGroup {
        rank: r,
        elements,
        index,
        orth,
        inverse,
        generators,
    })
}

impl WeylGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn elements(&self) -> &[WeylElement] {
        &self.elements
    }

    pub fn inverse(&self, w: usize) -> usize {
        self.inverse[w]
    }

    /// Orthogonal matrix of `w` in the frame of `a`.
    pub fn orthogonal(&self, w: usize) -> &DMatrix<f64> {
        &self.orth[w]
    }

    pub fn index_of(&self, matrix: &[i64]) -> Option<usize> {
        self.index.get(matrix).copied()
    }

    /// `w` applied to integer coweight coordinates.
    pub fn act_int(&self, w: usize, k: &[i64]) -> Vec<i64> {
        let r = self.rank;
        let m = &self.elements[w].matrix;
        (0..r)
            .map(|i| (0..r).map(|j| m[i * r + j] * k[j]).sum())
            .collect()
    }

    pub fn act(&self, w: usize, x: &DVector<f64>) -> DVector<f64> {
        &self.orth[w] * x
    }

    /// Distinct points of the orbit of `k` (coweight coordinates).
    pub fn orbit_int(&self, k: &[i64]) -> Vec<Vec<i64>> {
        let set: BTreeSet<Vec<i64>> = (0..self.order()).map(|w| self.act_int(w, k)).collect();
        set.into_iter().collect()
    }

    /// `sum_w prod_{i in word(w)} t_i` for one value per simple root.
    pub fn poincare(&self, t: &[f64]) -> f64 {
        let terms: Vec<f64> = self
            .elements
            .iter()
            .map(|e| e.word.iter().map(|&i| t[i]).product())
            .collect();
        crate::numeric::pairwise_sum(&terms)
    }

    /// `W_0(q^{-1}) = sum_w q_w^{-1}`.
    pub fn poincare_inv(&self, q: &QParams) -> f64 {
        let t: Vec<f64> = q.simple().iter().map(|x| 1.0 / x).collect();
        self.poincare(&t)
    }

    /// A reduced word obtained by peeling right descents with the largest
    /// index first; generally differs from the stored BFS word.
    pub fn alternative_word(&self, w: usize) -> Vec<usize> {
        let r = self.rank;
        let mut word = Vec::new();
        let mut cur = w;
        while self.elements[cur].length > 0 {
            let l = self.elements[cur].length;
            let mut next = None;
            for k in (0..r).rev() {
                let m = mat_mul(&self.elements[cur].matrix, &self.generators[k], r);
                let j = self.index[&m];
                if self.elements[j].length < l {
                    next = Some((k, j));
                    break;
                }
            }
            let (k, j) = next.expect("every non-identity element has a right descent");
            word.push(k);
            cur = j;
        }
        word.reverse();
        word
    }

    /// Number of positive roots sent to negative roots by `w`.
    pub fn inversion_count(&self, rs: &RootSystem, w: usize) -> usize {
        let rho_check: DVector<f64> = rs
            .coweights()
            .iter()
            .fold(DVector::zeros(self.rank), |a, l| a + l);
        rs.positive_roots()
            .iter()
            .filter(|a| (self.act(w, &a.vector)).dot(&rho_check) < 0.0)
            .count()
    }

    /// Moves `x` into the closed fundamental chamber; returns the dominant
    /// representative and the index of `w` with `w x = x_dom`.
    pub fn to_dominant(&self, rs: &RootSystem, x: &DVector<f64>) -> (DVector<f64>, usize) {
        let r = self.rank;
        let scale = 1.0 + x.norm();
        let mut y = x.clone();
        let mut m = identity(r);
        for _ in 0..10_000 {
            let neg = (0..r).find(|&i| rs.simple_roots()[i].dot(&y) < -1e-12 * scale);
            match neg {
                None => break,
                Some(i) => {
                    let a = &rs.simple_roots()[i];
                    let c = 2.0 * a.dot(&y) / a.dot(a);
                    y -= a * c;
                    m = mat_mul(&self.generators[i], &m, r);
                }
            }
        }
        (y, self.index[&m])
    }

    /// Integer version of [`WeylGroup::to_dominant`] on coweight coordinates.
    pub fn to_dominant_int(&self, k: &[i64]) -> (Vec<i64>, usize) {
        let r = self.rank;
        let mut y = k.to_vec();
        let mut m = identity(r);
        while let Some(i) = (0..r).find(|&i| y[i] < 0) {
            y = {
                let g = &self.generators[i];
                (0..r).map(|a| (0..r).map(|b| g[a * r + b] * y[b]).sum()).collect()
            };
            m = mat_mul(&self.generators[i], &m, r);
        }
        (y, self.index[&m])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_small() -> Vec<(RootKind, usize)> {
        vec![
            (RootKind::A, 1),
            (RootKind::A, 2),
            (RootKind::A, 3),
            (RootKind::B, 2),
            (RootKind::B, 3),
            (RootKind::C, 2),
            (RootKind::C, 3),
            (RootKind::D, 4),
            (RootKind::F, 4),
            (RootKind::G, 2),
        ]
    }

    #[test]
    fn weyl_orders_and_lengths() {
        for (k, r) in all_small() {
            let rs = build_root_system(k, r).unwrap();
            let w = weyl_group(&rs).unwrap();
            assert_eq!(w.order() as u64, rs.weyl_order());
            for i in 0..w.order() {
                assert_eq!(w.elements()[i].length, w.inversion_count(&rs, i));
            }
        }
    }

    #[test]
    fn orthogonal_matrices() {
        for (k, r) in all_small() {
            let rs = build_root_system(k, r).unwrap();
            let w = weyl_group(&rs).unwrap();
            for i in 0..w.order() {
                let o = w.orthogonal(i);
                let e = o.transpose() * o - DMatrix::<f64>::identity(r, r);
                assert!(e.abs().max() < 1e-12);
            }
        }
    }

    #[test]
    fn highest_root_marks() {
        let cases: Vec<(RootKind, usize, Vec<i64>)> = vec![
            (RootKind::A, 3, vec![1, 1, 1]),
            (RootKind::B, 3, vec![1, 2, 2]),
            (RootKind::C, 3, vec![2, 2, 1]),
            (RootKind::D, 4, vec![1, 2, 1, 1]),
            (RootKind::E, 6, vec![1, 2, 2, 3, 2, 1]),
            (RootKind::F, 4, vec![2, 3, 4, 2]),
            (RootKind::G, 2, vec![3, 2]),
        ];
        for (k, r, m) in cases {
            let rs = build_root_system(k, r).unwrap();
            assert_eq!(rs.marks(), &m[..], "{k:?}{r}");
        }
    }

    #[test]
    fn e7_e8_rejected_by_cap() {
        let rs = build_root_system(RootKind::E, 8).unwrap();
        assert_eq!(rs.positive_roots().len(), 120);
        assert!(matches!(weyl_group(&rs), Err(Error::WeylGroupTooLarge { .. })));
    }

    #[test]
    fn bc_rejected() {
        assert!(RootKind::parse("BC").is_err());
        assert_eq!(RootKind::parse("e6").unwrap(), (RootKind::E, Some(6)));
    }

    #[test]
    fn poincare_values() {
        let rs = build_root_system(RootKind::A, 1).unwrap();
        let w = weyl_group(&rs).unwrap();
        let q = QParams::uniform(&rs, 3.0).unwrap();
        assert!((w.poincare_inv(&q) - 4.0 / 3.0).abs() < 1e-15);
        let rs = build_root_system(RootKind::A, 2).unwrap();
        let w = weyl_group(&rs).unwrap();
        let q = QParams::uniform(&rs, 2.0).unwrap();
        // (1 + t)(1 + t + t^2) at t = 1/2
        assert!((w.poincare_inv(&q) - 2.625).abs() < 1e-15);
    }

    #[test]
    fn poincare_independent_of_reduced_word() {
        let rs = build_root_system(RootKind::B, 3).unwrap();
        let w = weyl_group(&rs).unwrap();
        let t = [0.5, 0.5, 1.0 / 3.0];
        let alt: f64 = (0..w.order())
            .map(|i| w.alternative_word(i).iter().map(|&k| t[k]).product::<f64>())
            .sum();
        assert!((alt - w.poincare(&t)).abs() < 1e-13);
        let differs = (0..w.order()).any(|i| w.alternative_word(i) != w.elements()[i].word);
        assert!(differs);
    }

    #[test]
    fn q_must_match_on_root_length() {
        let rs = build_root_system(RootKind::B, 2).unwrap();
        assert!(QParams::new(&rs, &[2.0, 3.0]).is_ok());
        let rs = build_root_system(RootKind::A, 2).unwrap();
        assert!(QParams::new(&rs, &[2.0, 3.0]).is_err());
        assert!(QParams::new(&rs, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn to_dominant_lands_in_chamber() {
        let rs = build_root_system(RootKind::G, 2).unwrap();
        let w = weyl_group(&rs).unwrap();
        let x = DVector::from_vec(vec![-0.3, 1.7]);
        let (y, wi) = w.to_dominant(&rs, &x);
        assert!(rs.coweight_coords(&y).iter().all(|&c| c >= -1e-12));
        assert!((w.act(wi, &x) - &y).norm() < 1e-12);
    }
}
