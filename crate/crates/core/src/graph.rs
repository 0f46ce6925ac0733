//! Periodic graphs with a free ℤᵈ action and a finite fundamental domain.
//!
//! Vertices are pairs (group element, domain index); the infinite graph is never
//! enumerated, every query is answered locally from the edge templates.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("template {0} is a loop with zero offset, the action would not be free")]
    FreenessViolation(usize),
    #[error("templates {0} and {1} describe the same unoriented edge")]
    DuplicateEdge(usize, usize),
    #[error("template {index}: {reason}")]
    InvalidTemplate { index: usize, reason: String },
    #[error("graph must have a ≥ 1 and d ≥ 1")]
    EmptyDomain,
    #[error("graph is not connected")]
    NotConnected,
    #[error("bad graph description: {0}")]
    Descriptor(String),
}

/// Element of ℤᵈ with the standard generators.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement(pub Vec<i64>);

impl GroupElement {
    pub fn identity(d: usize) -> Self {
        GroupElement(vec![0; d])
    }

    pub fn new(coords: &[i64]) -> Self {
        GroupElement(coords.to_vec())
    }

    /// The k-th standard generator, or its inverse when `sign` is negative.
    pub fn generator(d: usize, k: usize, sign: i64) -> Self {
        let mut c = vec![0; d];
        c[k] = sign.signum();
        GroupElement(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        debug_assert_eq!(self.dim(), other.dim());
        GroupElement(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement(self.0.iter().map(|a| -a).collect())
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// Word length with respect to the standard generators (the L¹ norm).
    pub fn word_length(&self) -> u64 {
        self.0.iter().map(|a| a.unsigned_abs()).sum()
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId {
    pub group: GroupElement,
    pub index: usize,
}

impl VertexId {
    pub fn new(group: GroupElement, index: usize) -> Self {
        VertexId { group, index }
    }

    pub fn at(coords: &[i64], index: usize) -> Self {
        VertexId { group: GroupElement::new(coords), index }
    }
}

impl fmt::Debug for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?},{})", self.group, self.index)
    }
}

/// An oriented edge. `forward` is true when the orientation agrees with the template.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct OrientedEdge {
    pub origin: VertexId,
    pub terminus: VertexId,
    pub template: usize,
    pub forward: bool,
}

impl OrientedEdge {
    pub fn reverse(&self) -> OrientedEdge {
        OrientedEdge {
            origin: self.terminus.clone(),
            terminus: self.origin.clone(),
            template: self.template,
            forward: !self.forward,
        }
    }

    /// The same edge with template orientation.
    pub fn positive(&self) -> OrientedEdge {
        if self.forward {
            self.clone()
        } else {
            self.reverse()
        }
    }

    /// Group part of the origin of the positively oriented copy.
    pub fn anchor(&self) -> &GroupElement {
        if self.forward {
            &self.origin.group
        } else {
            &self.terminus.group
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeTemplate {
    pub from: usize,
    pub offset: GroupElement,
    pub to: usize,
}

/// Anything the group acts on.
pub trait Translate: Sized {
    fn translate(&self, gamma: &GroupElement) -> Self;
}

impl Translate for GroupElement {
    fn translate(&self, gamma: &GroupElement) -> Self {
        gamma.compose(self)
    }
}

impl Translate for VertexId {
    fn translate(&self, gamma: &GroupElement) -> Self {
        VertexId { group: gamma.compose(&self.group), index: self.index }
    }
}

impl Translate for OrientedEdge {
    fn translate(&self, gamma: &GroupElement) -> Self {
        OrientedEdge {
            origin: self.origin.translate(gamma),
            terminus: self.terminus.translate(gamma),
            template: self.template,
            forward: self.forward,
        }
    }
}

/// Shortest-path certificates from the base vertex (0, 0): to every (0, j) and
/// to every (±e_k, 0). Any vertex is reached by walking generator paths first.
#[derive(Clone, Debug)]
struct PathAtlas {
    domain: Vec<Vec<OrientedEdge>>,
    plus: Vec<Vec<OrientedEdge>>,
    minus: Vec<Vec<OrientedEdge>>,
}

#[derive(Clone, Debug)]
pub struct GammaGraph {
    a: usize,
    d: usize,
    templates: Vec<EdgeTemplate>,
    valence: Vec<usize>,
    b: usize,
    cayley: bool,
    atlas: Option<PathAtlas>,
}

pub fn build_cayley_zd(d: usize) -> GammaGraph {
    assert!(d >= 1, "dimension must be positive");
    let templates = (0..d)
        .map(|k| EdgeTemplate { from: 0, offset: GroupElement::generator(d, k, 1), to: 0 })
        .collect();
    let mut g = GammaGraph::assemble(1, d, templates).expect("standard generators are valid");
    g.cayley = true;
    g
}

pub fn build_from_templates(
    a: usize,
    d: usize,
    templates: Vec<(usize, Vec<i64>, usize)>,
) -> Result<GammaGraph, GraphError> {
    if a == 0 || d == 0 {
        return Err(GraphError::EmptyDomain);
    }
    let mut out = Vec::with_capacity(templates.len());
    for (idx, (i, off, j)) in templates.into_iter().enumerate() {
        if i >= a || j >= a {
            return Err(GraphError::InvalidTemplate {
                index: idx,
                reason: format!("domain index out of range 0..{a}"),
            });
        }
        if off.len() != d {
            return Err(GraphError::InvalidTemplate {
                index: idx,
                reason: format!("offset has length {}, expected {d}", off.len()),
            });
        }
        if i == j && off.iter().all(|&x| x == 0) {
            return Err(GraphError::FreenessViolation(idx));
        }
        out.push(EdgeTemplate { from: i, offset: GroupElement(off), to: j });
    }
    let mut seen: HashMap<(usize, Vec<i64>, usize), usize> = HashMap::new();
    for (idx, t) in out.iter().enumerate() {
        let key = (t.from, t.offset.0.clone(), t.to);
        let rev = (t.to, t.offset.inverse().0, t.from);
        if let Some(&other) = seen.get(&key).or_else(|| seen.get(&rev)) {
            return Err(GraphError::DuplicateEdge(other, idx));
        }
        seen.insert(key, idx);
    }
    GammaGraph::assemble(a, d, out)
}

impl GammaGraph {
    fn assemble(a: usize, d: usize, templates: Vec<EdgeTemplate>) -> Result<Self, GraphError> {
        let mut valence = vec![0usize; a];
        for t in &templates {
            valence[t.from] += 1;
            valence[t.to] += 1;
        }
        let b = valence.iter().copied().max().unwrap_or(0).max(1);
        let mut g = GammaGraph { a, d, templates, valence, b, cayley: false, atlas: None };
        if g.is_connected() {
            g.atlas = g.build_atlas();
        }
        Ok(g)
    }

    pub fn domain_size(&self) -> usize {
        self.a
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn templates(&self) -> &[EdgeTemplate] {
        &self.templates
    }

    pub fn valence_bound(&self) -> usize {
        self.b
    }

    pub fn valence(&self, v: &VertexId) -> usize {
        self.valence[v.index]
    }

    /// True for the graph built by [`build_cayley_zd`] or anything isomorphic by labels.
    pub fn is_standard_cayley(&self) -> bool {
        if self.cayley {
            return true;
        }
        if self.a != 1 || self.templates.len() != self.d {
            return false;
        }
        let mut hit = vec![false; self.d];
        for t in &self.templates {
            let nz: Vec<usize> = (0..self.d).filter(|&k| t.offset.0[k] != 0).collect();
            if nz.len() != 1 || t.offset.0[nz[0]].abs() != 1 {
                return false;
            }
            hit[nz[0]] = true;
        }
        hit.into_iter().all(|h| h)
    }

    pub fn base_vertex(&self) -> VertexId {
        VertexId::new(GroupElement::identity(self.d), 0)
    }

    /// Edge of template `t` whose positively oriented copy starts over `anchor`.
    pub fn template_edge(&self, t: usize, anchor: &GroupElement) -> OrientedEdge {
        let tpl = &self.templates[t];
        OrientedEdge {
            origin: VertexId::new(anchor.clone(), tpl.from),
            terminus: VertexId::new(anchor.compose(&tpl.offset), tpl.to),
            template: t,
            forward: true,
        }
    }

    /// All oriented edges with origin `v`, in template order, forward copies first.
    pub fn edges_from(&self, v: &VertexId) -> Vec<OrientedEdge> {
        let mut out = Vec::with_capacity(self.valence[v.index]);
        for (t, tpl) in self.templates.iter().enumerate() {
            if tpl.from == v.index {
                out.push(self.template_edge(t, &v.group));
            }
        }
        for (t, tpl) in self.templates.iter().enumerate() {
            if tpl.to == v.index {
                let anchor = v.group.compose(&tpl.offset.inverse());
                out.push(self.template_edge(t, &anchor).reverse());
            }
        }
        out
    }

    pub fn neighbors(&self, v: &VertexId) -> Vec<VertexId> {
        self.edges_from(v).into_iter().map(|e| e.terminus).collect()
    }

    pub fn act<T: Translate>(&self, gamma: &GroupElement, x: &T) -> T {
        x.translate(gamma)
    }

    /// Breadth-first distance; `None` stands for "farther than `cutoff`".
    pub fn simplicial_distance(&self, v1: &VertexId, v2: &VertexId, cutoff: usize) -> Option<usize> {
        if v1 == v2 {
            return Some(0);
        }
        let mut seen = HashSet::new();
        seen.insert(v1.clone());
        let mut frontier = vec![v1.clone()];
        for r in 1..=cutoff {
            let mut next = Vec::new();
            for v in &frontier {
                for w in self.neighbors(v) {
                    if &w == v2 {
                        return Some(r);
                    }
                    if seen.insert(w.clone()) {
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        None
    }

    /// Vertices at distance ≤ r, sorted.
    pub fn ball(&self, v: &VertexId, r: usize) -> Vec<VertexId> {
        let mut seen: HashSet<VertexId> = HashSet::new();
        seen.insert(v.clone());
        let mut frontier = vec![v.clone()];
        for _ in 0..r {
            let mut next = Vec::new();
            for u in &frontier {
                for w in self.neighbors(u) {
                    if seen.insert(w.clone()) {
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        let mut out: Vec<VertexId> = seen.into_iter().collect();
        out.sort();
        out
    }

    /// Connectivity: the quotient graph must be connected and the cycle voltages
    /// must generate all of ℤᵈ.
    pub fn is_connected(&self) -> bool {
        let mut pot: Vec<Option<Vec<i64>>> = vec![None; self.a];
        pot[0] = Some(vec![0; self.d]);
        let mut queue = VecDeque::from([0usize]);
        let mut tree = vec![false; self.templates.len()];
        while let Some(i) = queue.pop_front() {
            let pi = pot[i].clone().unwrap();
            for (t, tpl) in self.templates.iter().enumerate() {
                let (j, p) = if tpl.from == i {
                    (tpl.to, add(&pi, &tpl.offset.0))
                } else if tpl.to == i {
                    (tpl.from, sub(&pi, &tpl.offset.0))
                } else {
                    continue;
                };
                if pot[j].is_none() {
                    pot[j] = Some(p);
                    tree[t] = true;
                    queue.push_back(j);
                }
            }
        }
        if pot.iter().any(|p| p.is_none()) {
            return false;
        }
        let mut voltages: Vec<Vec<i64>> = Vec::new();
        for (t, tpl) in self.templates.iter().enumerate() {
            if tree[t] {
                continue;
            }
            let v = sub(&add(pot[tpl.from].as_ref().unwrap(), &tpl.offset.0), pot[tpl.to].as_ref().unwrap());
            voltages.push(v);
        }
        spans_full_lattice(voltages, self.d)
    }

    fn build_atlas(&self) -> Option<PathAtlas> {
        let base = self.base_vertex();
        let mut targets: HashSet<VertexId> = HashSet::new();
        for j in 0..self.a {
            targets.insert(VertexId::new(GroupElement::identity(self.d), j));
        }
        for k in 0..self.d {
            targets.insert(VertexId::new(GroupElement::generator(self.d, k, 1), 0));
            targets.insert(VertexId::new(GroupElement::generator(self.d, k, -1), 0));
        }
        let mut parent: HashMap<VertexId, OrientedEdge> = HashMap::new();
        let mut seen: HashSet<VertexId> = HashSet::from([base.clone()]);
        let mut queue = VecDeque::from([base.clone()]);
        let mut remaining = targets.len() - 1;
        const LIMIT: usize = 2_000_000;
        while let Some(v) = queue.pop_front() {
            if remaining == 0 || seen.len() > LIMIT {
                break;
            }
            for e in self.edges_from(&v) {
                if seen.insert(e.terminus.clone()) {
                    if targets.contains(&e.terminus) {
                        remaining -= 1;
                    }
                    parent.insert(e.terminus.clone(), e.clone());
                    queue.push_back(e.terminus);
                }
            }
        }
        if remaining > 0 {
            return None;
        }
        let path_to = |t: &VertexId| -> Vec<OrientedEdge> {
            let mut path = Vec::new();
            let mut cur = t.clone();
            while cur != base {
                let e = parent[&cur].clone();
                cur = e.origin.clone();
                path.push(e);
            }
            path.reverse();
            path
        };
        let domain = (0..self.a)
            .map(|j| path_to(&VertexId::new(GroupElement::identity(self.d), j)))
            .collect();
        let plus = (0..self.d)
            .map(|k| path_to(&VertexId::new(GroupElement::generator(self.d, k, 1), 0)))
            .collect();
        let minus = (0..self.d)
            .map(|k| path_to(&VertexId::new(GroupElement::generator(self.d, k, -1), 0)))
            .collect();
        Some(PathAtlas { domain, plus, minus })
    }

    /// A fixed edge path from the base vertex to `v`, or `None` for disconnected graphs.
    pub fn canonical_path(&self, v: &VertexId) -> Option<Vec<OrientedEdge>> {
        let atlas = self.atlas.as_ref()?;
        let mut path = Vec::new();
        let mut pos = GroupElement::identity(self.d);
        for k in 0..self.d {
            let steps = v.group.0[k];
            let (gen, sign) = if steps >= 0 { (&atlas.plus[k], 1) } else { (&atlas.minus[k], -1) };
            for _ in 0..steps.unsigned_abs() {
                path.extend(gen.iter().map(|e| e.translate(&pos)));
                pos = pos.compose(&GroupElement::generator(self.d, k, sign));
            }
        }
        path.extend(atlas.domain[v.index].iter().map(|e| e.translate(&pos)));
        Some(path)
    }
}

fn add(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Does the integer row span of `rows` equal ℤᵈ? Echelon form by Euclid's algorithm.
fn spans_full_lattice(mut rows: Vec<Vec<i64>>, d: usize) -> bool {
    let mut rank_row = 0;
    for col in 0..d {
        loop {
            let nz: Vec<usize> = (rank_row..rows.len()).filter(|&r| rows[r][col] != 0).collect();
            if nz.len() <= 1 {
                break;
            }
            let pivot = *nz.iter().min_by_key(|&&r| rows[r][col].abs()).unwrap();
            for &r in &nz {
                if r != pivot {
                    let q = rows[r][col] / rows[pivot][col];
                    for c in 0..d {
                        rows[r][c] -= q * rows[pivot][c];
                    }
                }
            }
        }
        let Some(p) = (rank_row..rows.len()).find(|&r| rows[r][col] != 0) else {
            return false;
        };
        if rows[p][col].abs() != 1 {
            return false;
        }
        rows.swap(rank_row, p);
        rank_row += 1;
    }
    true
}

/// JSON graph description: `{"kind":"zd","d":2}` or
/// `{"kind":"templates","a":2,"d":1,"templates":[[0,[0],1],[1,[1],0]]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GraphDescriptor {
    Zd { d: usize },
    Templates { a: usize, d: usize, templates: Vec<(usize, Vec<i64>, usize)> },
}

impl GraphDescriptor {
    /// Accepts JSON or the shorthand `zd:<d>`.
    pub fn parse(s: &str) -> Result<Self, GraphError> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("zd:") {
            let d: usize = rest.parse().map_err(|_| GraphError::Descriptor(format!("bad dimension in {s:?}")))?;
            if d == 0 {
                return Err(GraphError::EmptyDomain);
            }
            return Ok(GraphDescriptor::Zd { d });
        }
        serde_json::from_str(s).map_err(|e| GraphError::Descriptor(e.to_string()))
    }

    pub fn build(&self) -> Result<GammaGraph, GraphError> {
        match self {
            GraphDescriptor::Zd { d } if *d >= 1 => Ok(build_cayley_zd(*d)),
            GraphDescriptor::Zd { .. } => Err(GraphError::EmptyDomain),
            GraphDescriptor::Templates { a, d, templates } => build_from_templates(*a, *d, templates.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v2(x: i64, y: i64) -> VertexId {
        VertexId::at(&[x, y], 0)
    }

    #[test]
    fn cayley_constructors() {
        for d in 1..=3 {
            let g = build_cayley_zd(d);
            assert_eq!(g.domain_size(), 1);
            assert_eq!(g.valence_bound(), 2 * d);
            assert!(g.is_connected());
        }
        let g = build_cayley_zd(1);
        assert_eq!(g.templates()[0], EdgeTemplate { from: 0, offset: GroupElement::new(&[1]), to: 0 });
    }

    #[test]
    fn subdivided_line() {
        let g = build_from_templates(2, 1, vec![(0, vec![0], 1), (1, vec![1], 0)]).unwrap();
        assert!(g.is_connected());
        assert_eq!(g.valence_bound(), 2);
        let v = VertexId::at(&[0], 0);
        let w = VertexId::at(&[3], 0);
        assert_eq!(g.simplicial_distance(&v, &w, 10), Some(6));
    }

    #[test]
    fn template_from_generators_matches_cayley() {
        let g = build_from_templates(1, 2, vec![(0, vec![1, 0], 0), (0, vec![0, 1], 0)]).unwrap();
        let h = build_cayley_zd(2);
        assert!(g.is_standard_cayley());
        assert_eq!(g.valence_bound(), h.valence_bound());
        assert_eq!(g.ball(&v2(0, 0), 3), h.ball(&v2(0, 0), 3));
    }

    #[test]
    fn template_errors() {
        assert_eq!(build_from_templates(1, 1, vec![(0, vec![0], 0)]).unwrap_err(), GraphError::FreenessViolation(0));
        assert_eq!(
            build_from_templates(2, 1, vec![(0, vec![1], 1), (1, vec![-1], 0)]).unwrap_err(),
            GraphError::DuplicateEdge(0, 1)
        );
        assert!(matches!(
            build_from_templates(1, 1, vec![(0, vec![1, 0], 0)]),
            Err(GraphError::InvalidTemplate { .. })
        ));
    }

    #[test]
    fn disconnected_graphs_are_detected() {
        // Only even translates are joined.
        let g = build_from_templates(1, 1, vec![(0, vec![2], 0)]).unwrap();
        assert!(!g.is_connected());
        assert!(g.canonical_path(&VertexId::at(&[1], 0)).is_none());
        // Domain index 1 is isolated.
        let g = build_from_templates(2, 1, vec![(0, vec![1], 0)]).unwrap();
        assert!(!g.is_connected());
        // Steps 2 and 3 generate ℤ.
        let g = build_from_templates(1, 1, vec![(0, vec![2], 0), (0, vec![3], 0)]).unwrap();
        assert!(g.is_connected());
    }

    #[test]
    fn translation_examples() {
        let g = build_cayley_zd(2);
        let gamma = GroupElement::new(&[1, 0]);
        assert_eq!(g.act(&gamma, &v2(2, 3)), v2(3, 3));
        let e = g.edges_from(&v2(0, 0))[1].clone();
        assert_eq!(g.act(&GroupElement::identity(2), &e), e);
        assert_eq!(g.act(&gamma, &e.reverse()), g.act(&gamma, &e).reverse());
    }

    #[test]
    fn distance_and_balls() {
        let g = build_cayley_zd(2);
        assert_eq!(g.simplicial_distance(&v2(0, 0), &v2(2, 3), 10), Some(5));
        assert_eq!(g.simplicial_distance(&v2(1, 1), &v2(1, 1), 0), Some(0));
        let l = build_cayley_zd(1);
        assert_eq!(l.simplicial_distance(&VertexId::at(&[0], 0), &VertexId::at(&[7], 0), 3), None);
        assert_eq!(g.ball(&v2(0, 0), 0).len(), 1);
        assert_eq!(g.ball(&v2(0, 0), 1).len(), 5);
        // Independent count: lattice points with |x|+|y| ≤ 2.
        let brute = (-2i64..=2).flat_map(|x| (-2i64..=2).map(move |y| (x, y))).filter(|(x, y)| x.abs() + y.abs() <= 2).count();
        assert_eq!(g.ball(&v2(0, 0), 2).len(), brute);
        assert_eq!(brute, 13);
    }

    #[test]
    fn canonical_paths_are_walks() {
        let g = build_from_templates(2, 2, vec![(0, vec![0, 0], 1), (1, vec![1, 0], 0), (1, vec![0, 1], 0)]).unwrap();
        let target = VertexId::at(&[-2, 3], 1);
        let p = g.canonical_path(&target).unwrap();
        let mut cur = g.base_vertex();
        for e in &p {
            assert_eq!(e.origin, cur);
            assert!(g.edges_from(&cur).contains(e));
            cur = e.terminus.clone();
        }
        assert_eq!(cur, target);
    }

    #[test]
    fn descriptor_roundtrip() {
        let d = GraphDescriptor::parse(r#"{"kind":"templates","a":2,"d":1,"templates":[[0,[0],1],[1,[1],0]]}"#).unwrap();
        let g = d.build().unwrap();
        assert_eq!(g.domain_size(), 2);
        assert_eq!(GraphDescriptor::parse("zd:2").unwrap(), GraphDescriptor::Zd { d: 2 });
        assert_eq!(GraphDescriptor::parse(r#"{"kind":"zd","d":2}"#).unwrap(), GraphDescriptor::Zd { d: 2 });
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(GraphDescriptor::parse(&json).unwrap(), d);
        assert!(GraphDescriptor::parse("zd:x").is_err());
    }
}
