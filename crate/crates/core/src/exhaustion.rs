//! Følner sets in ℤᵈ, the finite subgraphs they induce, and boundary diagnostics.

use std::collections::{HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::graph::{GammaGraph, GroupElement, OrientedEdge, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExhaustionError {
    #[error("the sequence is empty")]
    Empty,
    #[error("radii or side lengths must be strictly increasing")]
    NotIncreasing,
    #[error("set {0} is not contained in set {1}")]
    NotNested(usize, usize),
    #[error("group element {0:?} has the wrong dimension")]
    Dimension(Vec<i64>),
    #[error("a set in the sequence is empty")]
    EmptySet,
}

#[derive(Clone, Debug)]
pub struct FolnerSequence {
    d: usize,
    sets: Vec<Vec<GroupElement>>,
    labels: Vec<String>,
    description: String,
}

fn lattice_box(lo: &[i64], hi: &[i64]) -> Vec<GroupElement> {
    let d = lo.len();
    let mut out = vec![GroupElement(Vec::with_capacity(d))];
    for k in 0..d {
        let mut next = Vec::with_capacity(out.len() * (hi[k] - lo[k] + 1) as usize);
        for p in &out {
            for x in lo[k]..=hi[k] {
                let mut c = p.0.clone();
                c.push(x);
                next.push(GroupElement(c));
            }
        }
        out = next;
    }
    out.sort();
    out
}

/// Λ_m = [−m, m]ᵈ.
pub fn boxes_zd(d: usize, radii: &[u64]) -> Result<FolnerSequence, ExhaustionError> {
    if radii.is_empty() {
        return Err(ExhaustionError::Empty);
    }
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ExhaustionError::NotIncreasing);
    }
    let sets = radii.iter().map(|&m| lattice_box(&vec![-(m as i64); d], &vec![m as i64; d])).collect();
    Ok(FolnerSequence { d, sets, labels: radii.iter().map(|m| m.to_string()).collect(), description: format!("boxes [-m,m]^{d}") })
}

/// Λ_L = [0, L)ᵈ, side lengths L.
pub fn cubes_zd(d: usize, sides: &[u64]) -> Result<FolnerSequence, ExhaustionError> {
    if sides.is_empty() {
        return Err(ExhaustionError::Empty);
    }
    if sides[0] == 0 || sides.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ExhaustionError::NotIncreasing);
    }
    let sets = sides.iter().map(|&l| lattice_box(&vec![0; d], &vec![l as i64 - 1; d])).collect();
    Ok(FolnerSequence { d, sets, labels: sides.iter().map(|l| l.to_string()).collect(), description: format!("cubes [0,L)^{d}") })
}

/// Arbitrary nested sets.
pub fn explicit_sets(d: usize, sets: Vec<Vec<Vec<i64>>>) -> Result<FolnerSequence, ExhaustionError> {
    if sets.is_empty() {
        return Err(ExhaustionError::Empty);
    }
    let mut out: Vec<Vec<GroupElement>> = Vec::with_capacity(sets.len());
    for set in sets {
        if set.is_empty() {
            return Err(ExhaustionError::EmptySet);
        }
        let mut s: Vec<GroupElement> = Vec::with_capacity(set.len());
        for c in set {
            if c.len() != d {
                return Err(ExhaustionError::Dimension(c));
            }
            s.push(GroupElement(c));
        }
        s.sort();
        s.dedup();
        out.push(s);
    }
    for k in 1..out.len() {
        let next: HashSet<&GroupElement> = out[k].iter().collect();
        if !out[k - 1].iter().all(|x| next.contains(x)) {
            return Err(ExhaustionError::NotNested(k - 1, k));
        }
    }
    let labels = (0..out.len()).map(|k| k.to_string()).collect();
    Ok(FolnerSequence { d, sets: out, labels, description: "explicit sets".into() })
}

/// Which inequality defines the group δ-boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoundaryConvention {
    /// d₁(γ, Λ) < δ and d₁(γ, Γ∖Λ) < δ, read literally on integer distances.
    Strict,
    /// d₁ ≤ δ to both sides.
    Closed,
}

impl FolnerSequence {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn set(&self, k: usize) -> &[GroupElement] {
        &self.sets[k]
    }

    pub fn label(&self, k: usize) -> &str {
        &self.labels[k]
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Keeps only the listed indices (in order).
    pub fn select(&self, idx: &[usize]) -> FolnerSequence {
        FolnerSequence {
            d: self.d,
            sets: idx.iter().map(|&i| self.sets[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i].clone()).collect(),
            description: self.description.clone(),
        }
    }
}

fn group_neighbors(x: &GroupElement) -> impl Iterator<Item = GroupElement> + '_ {
    let d = x.dim();
    (0..d).flat_map(move |k| {
        [1i64, -1].into_iter().map(move |s| {
            let mut c = x.0.clone();
            c[k] += s;
            GroupElement(c)
        })
    })
}

/// The δ-boundary of Λ_k in the word metric.
pub fn group_delta_boundary(seq: &FolnerSequence, k: usize, delta: u64, convention: BoundaryConvention) -> Vec<GroupElement> {
    assert!(delta >= 1, "δ must be positive");
    let r = match convention {
        BoundaryConvention::Strict => delta - 1,
        BoundaryConvention::Closed => delta,
    } as usize;
    if r == 0 {
        return Vec::new();
    }
    let inside: HashSet<&GroupElement> = seq.sets[k].iter().collect();
    // Elements of Λ adjacent to the complement, and complement elements adjacent to Λ.
    let mut in_ring = Vec::new();
    let mut out_ring = HashSet::new();
    for x in &seq.sets[k] {
        let mut edge = false;
        for y in group_neighbors(x) {
            if !inside.contains(&y) {
                edge = true;
                out_ring.insert(y);
            }
        }
        if edge {
            in_ring.push(x.clone());
        }
    }
    let mut result: HashSet<GroupElement> = HashSet::new();
    // Inner part: d(x, Λᶜ) = d(x, out_ring) ≤ r; outer part: d(y, Λ) = d(y, in_ring) ≤ r.
    for (sources, want_inside) in [(out_ring.iter().cloned().collect::<Vec<_>>(), true), (in_ring.clone(), false)] {
        let mut seen: HashSet<GroupElement> = sources.iter().cloned().collect();
        let mut frontier = sources;
        for _ in 0..r {
            let mut next = Vec::new();
            for x in &frontier {
                for y in group_neighbors(x) {
                    if seen.insert(y.clone()) {
                        next.push(y);
                    }
                }
            }
            frontier = next;
        }
        for x in seen {
            if inside.contains(&x) == want_inside {
                result.insert(x);
            }
        }
    }
    let mut out: Vec<GroupElement> = result.into_iter().collect();
    out.sort();
    out
}

/// The largest subgraph over the translates of the fundamental domain by Λ.
#[derive(Clone, Debug)]
pub struct FiniteRestriction {
    vertices: Vec<VertexId>,
    index: HashMap<VertexId, usize>,
    edges: Vec<(usize, usize, OrientedEdge)>,
    n_cells: usize,
    label: String,
}

pub fn induce_subgraph(g: &GammaGraph, lambda: &[GroupElement]) -> FiniteRestriction {
    induce_labeled(g, lambda, String::new())
}

pub fn induce_labeled(g: &GammaGraph, lambda: &[GroupElement], label: String) -> FiniteRestriction {
    assert!(!lambda.is_empty(), "Λ must be nonempty");
    let mut cells: Vec<GroupElement> = lambda.to_vec();
    cells.sort();
    cells.dedup();
    let a = g.domain_size();
    let mut vertices = Vec::with_capacity(cells.len() * a);
    for c in &cells {
        for i in 0..a {
            vertices.push(VertexId::new(c.clone(), i));
        }
    }
    let index: HashMap<VertexId, usize> = vertices.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
    let mut edges = Vec::new();
    for (i, v) in vertices.iter().enumerate() {
        for e in g.edges_from(v).into_iter().filter(|e| e.forward) {
            if let Some(&j) = index.get(&e.terminus) {
                edges.push((i, j, e));
            }
        }
    }
    FiniteRestriction { vertices, index, edges, n_cells: cells.len(), label }
}

/// The subgraph induced by the k-th set of a sequence.
pub fn restriction(g: &GammaGraph, seq: &FolnerSequence, k: usize) -> FiniteRestriction {
    induce_labeled(g, seq.set(k), seq.label(k).to_string())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundaryStrata {
    pub inner: Vec<VertexId>,
    pub outer: Vec<VertexId>,
}

impl BoundaryStrata {
    pub fn total(&self) -> usize {
        self.inner.len() + self.outer.len()
    }
}

impl FiniteRestriction {
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// N_m, the number of group elements.
    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn index_of(&self, v: &VertexId) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn contains(&self, v: &VertexId) -> bool {
        self.index.contains_key(v)
    }

    /// Internal edges, positively oriented, as (origin index, terminus index, edge).
    pub fn edges(&self) -> &[(usize, usize, OrientedEdge)] {
        &self.edges
    }

    /// Valence inside the subgraph.
    pub fn internal_valence(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertices.len()];
        for (i, j, _) in &self.edges {
            deg[*i] += 1;
            deg[*j] += 1;
        }
        deg
    }

    /// Vertices within distance ≤ δ of both X_m and its complement.
    pub fn delta_boundary(&self, g: &GammaGraph, delta: usize) -> BoundaryStrata {
        assert!(delta >= 1, "δ must be positive");
        let mut in_ring: Vec<VertexId> = Vec::new();
        let mut out_ring: HashSet<VertexId> = HashSet::new();
        for v in &self.vertices {
            let mut edge = false;
            for w in g.neighbors(v) {
                if !self.contains(&w) {
                    edge = true;
                    out_ring.insert(w);
                }
            }
            if edge {
                in_ring.push(v.clone());
            }
        }
        let spread = |sources: Vec<VertexId>, depth: usize| -> HashSet<VertexId> {
            let mut seen: HashSet<VertexId> = sources.iter().cloned().collect();
            let mut frontier = sources;
            for _ in 0..depth {
                let mut next = Vec::new();
                for x in &frontier {
                    for y in g.neighbors(x) {
                        if seen.insert(y.clone()) {
                            next.push(y);
                        }
                    }
                }
                frontier = next;
            }
            seen
        };
        // d(u, Xᶜ) = d(u, out_ring) and d(w, X) = d(w, in_ring).
        let mut inner: Vec<VertexId> = spread(out_ring.into_iter().collect(), delta).into_iter().filter(|x| self.contains(x)).collect();
        let mut outer: Vec<VertexId> = spread(in_ring, delta).into_iter().filter(|x| !self.contains(x)).collect();
        inner.sort();
        outer.sort();
        BoundaryStrata { inner, outer }
    }
}

pub fn graph_delta_boundary(g: &GammaGraph, x: &FiniteRestriction, delta: usize) -> BoundaryStrata {
    x.delta_boundary(g, delta)
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularityRow {
    pub label: String,
    pub n_cells: usize,
    pub vertices: usize,
    pub delta: usize,
    pub inner: usize,
    pub outer: usize,
    pub ratio_inner: f64,
    pub ratio_outer: f64,
    pub ratio_total: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularityReport {
    pub rows: Vec<RegularityRow>,
    /// Per δ: (δ, nonincreasing and strictly smaller at the end than at the start).
    pub regular: Vec<(usize, bool)>,
}

impl RegularityReport {
    pub fn is_regular(&self) -> bool {
        self.regular.iter().all(|(_, r)| *r)
    }

    pub fn rows_for(&self, delta: usize) -> impl Iterator<Item = &RegularityRow> {
        self.rows.iter().filter(move |r| r.delta == delta)
    }
}

pub fn regularity_report(g: &GammaGraph, seq: &FolnerSequence, deltas: &[usize]) -> RegularityReport {
    let mut rows = Vec::new();
    let restrictions: Vec<FiniteRestriction> = (0..seq.len()).map(|k| restriction(g, seq, k)).collect();
    let mut regular = Vec::new();
    for &delta in deltas {
        let mut ratios = Vec::new();
        for x in &restrictions {
            let b = x.delta_boundary(g, delta);
            let nv = x.len() as f64;
            let row = RegularityRow {
                label: x.label().to_string(),
                n_cells: x.n_cells(),
                vertices: x.len(),
                delta,
                inner: b.inner.len(),
                outer: b.outer.len(),
                ratio_inner: b.inner.len() as f64 / nv,
                ratio_outer: b.outer.len() as f64 / nv,
                ratio_total: b.total() as f64 / nv,
            };
            ratios.push(row.ratio_total);
            rows.push(row);
        }
        let monotone = ratios.windows(2).all(|w| w[1] <= w[0] + 1e-15);
        let decays = ratios.len() >= 2 && ratios[ratios.len() - 1] < ratios[0];
        regular.push((delta, monotone && decays));
    }
    RegularityReport { rows, regular }
}
