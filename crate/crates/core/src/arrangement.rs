//! Central hyperplane arrangements, their intersection lattice, density and localization.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{fmt_rational, int, RationalMatrix, Rational};

/// Hyperplanes `f_i = 0` in `C^n` with multiplicities `b_i`.
#[derive(Clone, PartialEq, Eq)]
pub struct Arrangement {
    n: usize,
    forms: Vec<Vec<Rational>>,
    multiplicities: Vec<u32>,
}

/// An intersection of hyperplanes, identified by the saturated set of hyperplanes containing it.
#[derive(Clone, Serialize)]
pub struct Edge {
    pub hyperplanes: Vec<usize>,
    pub codim: usize,
    /// Reduced row-echelon basis of the span of the normals in `hyperplanes`.
    #[serde(skip)]
    pub basis: Vec<Vec<Rational>>,
}

impl PartialEq for Edge {
    fn eq(&self, other: &Self) -> bool {
        self.hyperplanes == other.hyperplanes
    }
}

impl Eq for Edge {}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Edge{:?}(codim {})", self.hyperplanes, self.codim)
    }
}

impl Edge {
    pub fn contains_hyperplanes_of(&self, other: &Edge) -> bool {
        other.hyperplanes.iter().all(|i| self.hyperplanes.contains(i))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub central: bool,
    pub essential: bool,
    pub decomposable: bool,
}

/// All edges, sorted by codimension and then by hyperplane set.
#[derive(Clone, Debug)]
pub struct EdgePoset {
    edges: Vec<Edge>,
    index: HashMap<Vec<usize>, usize>,
    ambient_dim: usize,
}

impl Arrangement {
    pub fn new(n: usize, forms: Vec<Vec<Rational>>, multiplicities: Vec<u32>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArrangement("dimension must be positive".into()));
        }
        if forms.is_empty() {
            return Err(Error::InvalidArrangement("no hyperplanes".into()));
        }
        if forms.len() != multiplicities.len() {
            return Err(Error::InvalidArrangement(format!(
                "{} forms but {} multiplicities",
                forms.len(),
                multiplicities.len()
            )));
        }
        for (i, f) in forms.iter().enumerate() {
            if f.len() != n {
                return Err(Error::InvalidArrangement(format!(
                    "form {} has {} coefficients, expected {n}",
                    i + 1,
                    f.len()
                )));
            }
            if f.iter().all(Zero::is_zero) {
                return Err(Error::InvalidArrangement(format!("form {} is zero", i + 1)));
            }
            if multiplicities[i] == 0 {
                return Err(Error::InvalidArrangement(format!(
                    "multiplicity of form {} must be positive",
                    i + 1
                )));
            }
        }
        for i in 0..forms.len() {
            for j in i + 1..forms.len() {
                if proportional(&forms[i], &forms[j]) {
                    return Err(Error::InvalidArrangement(format!(
                        "forms {} and {} define the same hyperplane",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self { n, forms, multiplicities })
    }

    /// Like [`Arrangement::new`] but merges proportional forms by adding multiplicities.
    /// Returns the merged arrangement and one warning per merge.
    pub fn merging(
        n: usize,
        forms: Vec<Vec<Rational>>,
        multiplicities: Vec<u32>,
    ) -> Result<(Self, Vec<String>)> {
        let mut kept: Vec<Vec<Rational>> = Vec::new();
        let mut mults: Vec<u32> = Vec::new();
        let mut warnings = Vec::new();
        for (k, (f, m)) in forms.into_iter().zip(multiplicities).enumerate() {
            if let Some(j) = kept.iter().position(|g| f.len() == g.len() && proportional(g, &f)) {
                warnings.push(format!(
                    "hyperplane {} is proportional to hyperplane {}; multiplicities merged",
                    k + 1,
                    j + 1
                ));
                mults[j] += m;
            } else {
                kept.push(f);
                mults.push(m);
            }
        }
        Ok((Self::new(n, kept, mults)?, warnings))
    }

    pub fn from_i64(n: usize, forms: &[&[i64]], multiplicities: &[u32]) -> Result<Self> {
        let forms = forms
            .iter()
            .map(|f| f.iter().map(|&x| int(x)).collect())
            .collect();
        Self::new(n, forms, multiplicities.to_vec())
    }

    /// Same hyperplanes with every multiplicity 1.
    pub fn from_i64_reduced(n: usize, forms: &[&[i64]]) -> Result<Self> {
        Self::from_i64(n, forms, &vec![1; forms.len()])
    }

    pub fn with_multiplicities(&self, multiplicities: Vec<u32>) -> Result<Self> {
        Self::new(self.n, self.forms.clone(), multiplicities)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    pub fn forms(&self) -> &[Vec<Rational>] {
        &self.forms
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.multiplicities
    }

    /// `d = sum b_i`.
    pub fn degree(&self) -> u64 {
        self.multiplicities.iter().map(|&b| b as u64).sum()
    }

    pub fn rank(&self) -> usize {
        self.rank_of(&(0..self.len()).collect::<Vec<_>>())
    }

    pub fn rank_of(&self, indices: &[usize]) -> usize {
        if indices.is_empty() {
            return 0;
        }
        self.normals_matrix(indices).rank()
    }

    fn normals_matrix(&self, indices: &[usize]) -> RationalMatrix {
        let rows: Vec<Vec<Rational>> = indices.iter().map(|&i| self.forms[i].clone()).collect();
        RationalMatrix::from_rows(&rows).expect("nonempty nonzero forms")
    }

    /// Saturation: every hyperplane whose normal lies in the span of the given normals.
    pub fn closure(&self, indices: &[usize]) -> Vec<usize> {
        if indices.is_empty() {
            return Vec::new();
        }
        let rref = self.normals_matrix(indices).rref();
        let basis: Vec<&[Rational]> = (0..rref.rank).map(|r| rref.reduced.row(r)).collect();
        (0..self.len())
            .filter(|&i| in_span(&basis, &rref.pivots, &self.forms[i]))
            .collect()
    }

    fn edge_from_closed(&self, hyperplanes: Vec<usize>) -> Edge {
        let rref = self.normals_matrix(&hyperplanes).rref();
        let basis = (0..rref.rank).map(|r| rref.reduced.row(r).to_vec()).collect();
        Edge { hyperplanes, codim: rref.rank, basis }
    }

    /// The edge cut out by the given hyperplanes (their saturation).
    pub fn edge_of(&self, indices: &[usize]) -> Result<Edge> {
        if indices.is_empty() || indices.iter().any(|&i| i >= self.len()) {
            return Err(Error::InvalidInput(format!("bad hyperplane indices {indices:?}")));
        }
        Ok(self.edge_from_closed(self.closure(indices)))
    }

    pub fn classify(&self) -> Classification {
        Classification {
            central: true,
            essential: self.rank() == self.n,
            decomposable: self.matroid_components().len() > 1,
        }
    }

    /// Connected components of the matroid of normals. Two hyperplanes are in the same
    /// component iff they lie on a common circuit; computed from fundamental circuits of
    /// a greedy basis.
    pub fn matroid_components(&self) -> Vec<Vec<usize>> {
        let r = self.len();
        let mut basis: Vec<usize> = Vec::new();
        for i in 0..r {
            let mut trial = basis.clone();
            trial.push(i);
            if self.rank_of(&trial) == trial.len() {
                basis = trial;
            }
        }
        let others: Vec<usize> = (0..r).filter(|i| !basis.contains(i)).collect();
        let mut parent: Vec<usize> = (0..r).collect();
        if !others.is_empty() {
            // Columns ordered basis first, so the reduced columns of the other elements are
            // their coordinates in the basis.
            let order: Vec<usize> = basis.iter().chain(&others).copied().collect();
            let cols: Vec<Vec<Rational>> = (0..self.n)
                .map(|k| order.iter().map(|&i| self.forms[i][k].clone()).collect())
                .collect();
            let rref = RationalMatrix::from_rows(&cols).expect("nonempty").rref();
            for (c, &e) in others.iter().enumerate() {
                let col = basis.len() + c;
                for (row, &b) in basis.iter().enumerate() {
                    if !rref.reduced.get(row, col).is_zero() {
                        union(&mut parent, e, b);
                    }
                }
            }
        }
        let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
        for i in 0..r {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push(i);
        }
        let mut comps: Vec<Vec<usize>> = groups.into_values().collect();
        comps.sort();
        comps
    }

    /// Dimension `codim(w)` arrangement of the hyperplanes through `w`, in coordinates on the
    /// quotient by `w`.
    pub fn localize(&self, w: &Edge) -> Result<Arrangement> {
        if w.hyperplanes.is_empty() || w.hyperplanes.iter().any(|&i| i >= self.len()) {
            return Err(Error::NotAnEdge(format!("{:?}", w.hyperplanes)));
        }
        if self.closure(&w.hyperplanes) != w.hyperplanes {
            return Err(Error::NotAnEdge(format!(
                "hyperplane set {:?} is not saturated",
                w.hyperplanes
            )));
        }
        let rref = self.normals_matrix(&w.hyperplanes).rref();
        let forms = w
            .hyperplanes
            .iter()
            .map(|&i| rref.pivots.iter().map(|&p| self.forms[i][p].clone()).collect())
            .collect();
        let mults = w.hyperplanes.iter().map(|&i| self.multiplicities[i]).collect();
        Arrangement::new(rref.rank, forms, mults)
    }

    pub fn dense_edges(&self, poset: &EdgePoset) -> Vec<Edge> {
        poset
            .edges()
            .iter()
            .filter(|w| self.is_dense(w))
            .cloned()
            .collect()
    }

    pub fn is_dense(&self, w: &Edge) -> bool {
        self.localize(w)
            .map(|loc| !loc.classify().decomposable)
            .unwrap_or(false)
    }

    pub fn to_f64_forms(&self) -> Vec<Vec<f64>> {
        self.forms
            .iter()
            .map(|f| f.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect())
            .collect()
    }
}

impl fmt::Debug for Arrangement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Arrangement(n={}", self.n)?;
        for (form, m) in self.forms.iter().zip(&self.multiplicities) {
            let text: Vec<String> = form.iter().map(fmt_rational).collect();
            write!(f, "; [{}]^{m}", text.join(" "))?;
        }
        write!(f, ")")
    }
}

/// Exhaustive bipartition test for decomposability, exponential in the number of hyperplanes.
pub fn decomposable_by_bipartition(a: &Arrangement) -> bool {
    let r = a.len();
    assert!(r <= 24, "bipartition search limited to 24 hyperplanes");
    let total = a.rank();
    // Fix hyperplane 0 in the first block to visit each bipartition once.
    (0u32..(1 << (r - 1))).any(|mask| {
        let first: Vec<usize> = std::iter::once(0)
            .chain((1..r).filter(|&i| mask & (1 << (i - 1)) != 0))
            .collect();
        let second: Vec<usize> = (1..r).filter(|&i| mask & (1 << (i - 1)) == 0).collect();
        !second.is_empty() && a.rank_of(&first) + a.rank_of(&second) == total
    })
}

fn proportional(f: &[Rational], g: &[Rational]) -> bool {
    let Some(k) = f.iter().position(|x| !x.is_zero()) else {
        return false;
    };
    if g[k].is_zero() {
        return false;
    }
    let ratio = &g[k] / &f[k];
    f.iter().zip(g).all(|(a, b)| &(a * &ratio) == b)
}

fn in_span(basis: &[&[Rational]], pivots: &[usize], v: &[Rational]) -> bool {
    let mut rest = v.to_vec();
    for (row, &p) in basis.iter().zip(pivots) {
        if rest[p].is_zero() {
            continue;
        }
        let c = rest[p].clone();
        for (x, y) in rest.iter_mut().zip(row.iter()) {
            *x = &*x - &c * y;
        }
    }
    rest.iter().all(Zero::is_zero)
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut root = i;
    while parent[root] != root {
        root = parent[root];
    }
    let mut j = i;
    while parent[j] != root {
        let next = parent[j];
        parent[j] = root;
        j = next;
    }
    root
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        parent[ra.max(rb)] = ra.min(rb);
    }
}

impl EdgePoset {
    pub fn build(a: &Arrangement) -> Self {
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut level: Vec<Vec<usize>> = Vec::new();
        for i in 0..a.len() {
            let c = a.closure(&[i]);
            if seen.insert(c.clone()) {
                level.push(c);
            }
        }
        let mut all: Vec<Vec<usize>> = level.clone();
        while !level.is_empty() {
            let mut next = Vec::new();
            for flat in &level {
                for i in 0..a.len() {
                    if flat.contains(&i) {
                        continue;
                    }
                    let mut s = flat.clone();
                    s.push(i);
                    let c = a.closure(&s);
                    if seen.insert(c.clone()) {
                        next.push(c);
                    }
                }
            }
            all.extend(next.iter().cloned());
            level = next;
        }
        let mut edges: Vec<Edge> = all.into_iter().map(|h| a.edge_from_closed(h)).collect();
        edges.sort_by(|x, y| (x.codim, &x.hyperplanes).cmp(&(y.codim, &y.hyperplanes)));
        let index = edges
            .iter()
            .enumerate()
            .map(|(k, e)| (e.hyperplanes.clone(), k))
            .collect();
        Self { edges, index, ambient_dim: a.dim() }
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn position(&self, hyperplanes: &[usize]) -> Option<usize> {
        self.index.get(hyperplanes).copied()
    }

    /// The smallest edge (intersection of all hyperplanes).
    pub fn top(&self) -> &Edge {
        self.edges.last().expect("at least one hyperplane")
    }

    /// The edge `{0}`, present iff the arrangement is essential.
    pub fn origin(&self) -> Option<&Edge> {
        let top = self.top();
        (top.codim == self.ambient_dim).then_some(top)
    }

    /// `mu(V, W)` for every edge, with the ambient space `V` as bottom element.
    pub fn mobius(&self) -> Vec<i64> {
        let mut mu: Vec<i64> = Vec::with_capacity(self.edges.len());
        for (k, w) in self.edges.iter().enumerate() {
            let below: i64 = (0..k)
                .filter(|&j| {
                    let u = &self.edges[j];
                    u.hyperplanes.len() < w.hyperplanes.len() && w.contains_hyperplanes_of(u)
                })
                .map(|j| mu[j])
                .sum();
            mu.push(-1 - below);
        }
        mu
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hyperplane_sets(p: &EdgePoset) -> Vec<Vec<usize>> {
        p.edges().iter().map(|e| e.hyperplanes.clone()).collect()
    }

    #[test]
    fn coordinate_lines() {
        let a = Arrangement::from_i64_reduced(2, &[&[1, 0], &[0, 1]]).unwrap();
        let p = EdgePoset::build(&a);
        assert_eq!(hyperplane_sets(&p), vec![vec![0], vec![1], vec![0, 1]]);
        assert_eq!(p.origin().unwrap().codim, 2);
        let c = a.classify();
        assert!(c.essential && c.decomposable);
        let dense: Vec<_> = a.dense_edges(&p).into_iter().map(|e| e.hyperplanes).collect();
        assert_eq!(dense, vec![vec![0], vec![1]]);
    }

    #[test]
    fn three_lines() {
        let a = Arrangement::from_i64_reduced(2, &[&[1, 0], &[1, 1], &[1, -1]]).unwrap();
        let p = EdgePoset::build(&a);
        assert_eq!(p.len(), 4);
        assert_eq!(p.top().hyperplanes, vec![0, 1, 2]);
        let c = a.classify();
        assert!(c.essential && !c.decomposable);
        assert_eq!(a.dense_edges(&p).len(), 4);
    }

    #[test]
    fn two_lines_are_decomposable() {
        let a = Arrangement::from_i64_reduced(2, &[&[1, 0], &[1, 1]]).unwrap();
        assert!(a.classify().decomposable);
    }

    #[test]
    fn four_planes_edge_count() {
        let a =
            Arrangement::from_i64_reduced(3, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[1, 1, 1]])
                .unwrap();
        let p = EdgePoset::build(&a);
        assert_eq!(p.len(), 11);
        assert_eq!(p.edges().iter().filter(|e| e.codim == 2).count(), 6);
        let dense = a.dense_edges(&p);
        // planes and the origin; every line lies on exactly two planes
        assert_eq!(dense.len(), 5);
        assert!(dense.iter().all(|e| e.codim != 2));
    }

    #[test]
    fn coordinate_planes_density() {
        let a = Arrangement::from_i64_reduced(3, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]).unwrap();
        let p = EdgePoset::build(&a);
        let dense: Vec<_> = a.dense_edges(&p).into_iter().map(|e| e.hyperplanes).collect();
        assert_eq!(dense, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn localize_line_in_three_space() {
        let a = Arrangement::from_i64_reduced(
            3,
            &[&[1, 0, 0], &[0, 1, 0], &[1, 1, 0], &[0, 0, 1]],
        )
        .unwrap();
        let w = a.edge_of(&[0, 1]).unwrap();
        assert_eq!(w.hyperplanes, vec![0, 1, 2]);
        let loc = a.localize(&w).unwrap();
        assert_eq!(loc.dim(), 2);
        assert_eq!(loc.len(), 3);
        assert!(!loc.classify().decomposable);
    }

    #[test]
    fn localize_at_hyperplane_and_origin() {
        let a = Arrangement::from_i64_reduced(2, &[&[1, 0], &[0, 1]]).unwrap();
        let p = EdgePoset::build(&a);
        let loc = a.localize(&p.edges()[0]).unwrap();
        assert_eq!((loc.dim(), loc.len()), (1, 1));
        assert_eq!(a.localize(p.origin().unwrap()).unwrap(), a);
    }

    #[test]
    fn localize_rejects_unsaturated_sets() {
        let a = Arrangement::from_i64_reduced(2, &[&[1, 0], &[1, 1], &[1, -1]]).unwrap();
        let fake = Edge { hyperplanes: vec![0, 1], codim: 2, basis: Vec::new() };
        assert!(matches!(a.localize(&fake), Err(Error::NotAnEdge(_))));
    }

    #[test]
    fn invalid_arrangements() {
        assert!(Arrangement::from_i64_reduced(2, &[&[1, 0], &[2, 0]]).is_err());
        assert!(Arrangement::from_i64_reduced(2, &[&[0, 0]]).is_err());
        assert!(Arrangement::from_i64(2, &[&[1, 0]], &[0]).is_err());
        let (merged, warnings) = Arrangement::merging(
            2,
            vec![vec![int(1), int(0)], vec![int(-2), int(0)]],
            vec![1, 2],
        )
        .unwrap();
        assert_eq!(merged.multiplicities(), &[3]);
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn mobius_of_three_lines() {
        let a = Arrangement::from_i64_reduced(2, &[&[1, 0], &[1, 1], &[1, -1]]).unwrap();
        assert_eq!(EdgePoset::build(&a).mobius(), vec![-1, -1, -1, 2]);
    }
}
