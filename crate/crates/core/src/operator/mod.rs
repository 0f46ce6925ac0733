//! Discrete magnetic Laplacian, Harper operator and twisted coboundary, on the
//! whole graph (as kernels) and on finite restrictions (as matrices).

pub mod matrix;

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebraic::{format_cosine_form, phase_to_cyclotomic, CyclotomicNumber, ExactMatrix};
use crate::exhaustion::FiniteRestriction;
use crate::graph::{GammaGraph, GroupElement, VertexId};
use crate::magnetic::{PhaseCochain, UnitPhase, WeightFunction};
use crate::par::{self, Execution};

pub use matrix::{export_matrix, HermitianMatrix, MatrixHeader, DENSE_LIMIT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("exact assembly needs a weight with rational phases")]
    NotRational,
    #[error("unknown {what} {value:?}")]
    Parse { what: &'static str, value: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

impl FromStr for BoundaryCondition {
    type Err = OperatorError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" | "d" => Ok(BoundaryCondition::Dirichlet),
            "neumann" | "n" => Ok(BoundaryCondition::Neumann),
            _ => Err(OperatorError::Parse { what: "boundary condition", value: s.into() }),
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryCondition::Dirichlet => "dirichlet",
            BoundaryCondition::Neumann => "neumann",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Dml,
    Harper,
}

impl FromStr for OperatorKind {
    type Err = OperatorError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dml" | "laplacian" => Ok(OperatorKind::Dml),
            "harper" => Ok(OperatorKind::Harper),
            _ => Err(OperatorError::Parse { what: "operator", value: s.into() }),
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OperatorKind::Dml => "dml",
            OperatorKind::Harper => "harper",
        })
    }
}

/// C bounds every entry, b every valence, K² = C·b every operator norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OperatorBounds {
    pub entry_bound: f64,
    pub valence_bound: usize,
    pub norm_bound_sq: f64,
}

impl OperatorBounds {
    pub fn for_graph(g: &GammaGraph) -> Self {
        let b = g.valence_bound();
        let c = b.max(1) as f64;
        OperatorBounds { entry_bound: c, valence_bound: b, norm_bound_sq: c * b as f64 }
    }

    pub fn k(&self) -> f64 {
        self.norm_bound_sq.sqrt()
    }
}

/// D(v1, v2): the valence on the diagonal, −σ(e) for each edge e from v2 to v1.
pub fn dml_kernel(g: &GammaGraph, sigma: &WeightFunction, v1: &VertexId, v2: &VertexId) -> Complex64 {
    let mut acc = if v1 == v2 { Complex64::new(g.valence(v1) as f64, 0.0) } else { Complex64::new(0.0, 0.0) };
    for e in g.edges_from(v2) {
        if &e.terminus == v1 {
            acc -= sigma.value(&e);
        }
    }
    acc
}

/// H(v1, v2) = Σ σ(e) over edges e from v2 to v1.
pub fn harper_kernel(g: &GammaGraph, sigma: &WeightFunction, v1: &VertexId, v2: &VertexId) -> Complex64 {
    g.edges_from(v2).iter().filter(|e| &e.terminus == v1).map(|e| sigma.value(e)).sum()
}

fn phase_value(p: &UnitPhase) -> Complex64 {
    p.to_complex()
}

fn triplets(g: &GammaGraph, sigma: &WeightFunction, x: &FiniteRestriction, bc: BoundaryCondition, kind: OperatorKind) -> Vec<(usize, usize, Complex64)> {
    let mut t = Vec::with_capacity(x.len() + 2 * x.edges().len());
    let sign = match kind {
        OperatorKind::Dml => -1.0,
        OperatorKind::Harper => 1.0,
    };
    if kind == OperatorKind::Dml {
        let internal = x.internal_valence();
        for (i, v) in x.vertices().iter().enumerate() {
            let d = match bc {
                BoundaryCondition::Dirichlet => g.valence(v),
                BoundaryCondition::Neumann => internal[i],
            };
            t.push((i, i, Complex64::new(d as f64, 0.0)));
        }
    }
    for (i, j, e) in x.edges() {
        // e runs i → j, so it feeds entry (j, i).
        let s = phase_value(&sigma.phase(e)) * sign;
        t.push((*j, *i, s));
        t.push((*i, *j, s.conj()));
    }
    t
}

/// Δ^{(m)}: Dirichlet keeps the ambient valence, Neumann is the DML of the subgraph.
pub fn restrict_dml(g: &GammaGraph, sigma: &WeightFunction, x: &FiniteRestriction, bc: BoundaryCondition) -> HermitianMatrix {
    HermitianMatrix::from_triplets(x.len(), &triplets(g, sigma, x, bc, OperatorKind::Dml))
}

/// The off-diagonal part of the DML with its sign flipped. Identical for both conditions.
pub fn restrict_harper(g: &GammaGraph, sigma: &WeightFunction, x: &FiniteRestriction, bc: BoundaryCondition) -> HermitianMatrix {
    HermitianMatrix::from_triplets(x.len(), &triplets(g, sigma, x, bc, OperatorKind::Harper))
}

pub fn restrict_operator(g: &GammaGraph, sigma: &WeightFunction, x: &FiniteRestriction, bc: BoundaryCondition, kind: OperatorKind) -> HermitianMatrix {
    HermitianMatrix::from_triplets(x.len(), &triplets(g, sigma, x, bc, kind))
}

fn exact_triplets(
    g: &GammaGraph,
    sigma: &WeightFunction,
    x: &FiniteRestriction,
    bc: BoundaryCondition,
    kind: OperatorKind,
) -> Result<(u64, Vec<(usize, usize, CyclotomicNumber)>), OperatorError> {
    let n = sigma.rational_order().ok_or(OperatorError::NotRational)? as u64;
    let mut t = Vec::new();
    if kind == OperatorKind::Dml {
        let internal = x.internal_valence();
        for (i, v) in x.vertices().iter().enumerate() {
            let d = match bc {
                BoundaryCondition::Dirichlet => g.valence(v),
                BoundaryCondition::Neumann => internal[i],
            };
            t.push((i, i, CyclotomicNumber::from_integer(n, d as i64)));
        }
    }
    for (i, j, e) in x.edges() {
        let mut s = phase_to_cyclotomic(&sigma.phase(e), n).ok_or(OperatorError::NotRational)?;
        if kind == OperatorKind::Dml {
            s = s.neg();
        }
        t.push((*i, *j, s.conj()));
        t.push((*j, *i, s));
    }
    Ok((n, t))
}

/// Exact Δ^{(m)} over ℤ[ζ_n], n the order of σ.
pub fn restrict_dml_exact(g: &GammaGraph, sigma: &WeightFunction, x: &FiniteRestriction, bc: BoundaryCondition) -> Result<ExactMatrix, OperatorError> {
    restrict_operator_exact(g, sigma, x, bc, OperatorKind::Dml)
}

pub fn restrict_operator_exact(
    g: &GammaGraph,
    sigma: &WeightFunction,
    x: &FiniteRestriction,
    bc: BoundaryCondition,
    kind: OperatorKind,
) -> Result<ExactMatrix, OperatorError> {
    let (n, t) = exact_triplets(g, sigma, x, bc, kind)?;
    Ok(ExactMatrix::from_triplets(x.len(), n, t))
}

/// d_τ on a finite restriction: one row per internal edge, columns are vertices.
#[derive(Clone, Debug)]
pub struct CoboundaryMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, Complex64)>,
}

impl CoboundaryMatrix {
    /// d*d.
    pub fn gram(&self) -> HermitianMatrix {
        let mut by_row: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); self.rows];
        for &(r, c, v) in &self.entries {
            by_row[r].push((c, v));
        }
        let mut t = Vec::new();
        for row in &by_row {
            for &(c1, v1) in row {
                for &(c2, v2) in row {
                    t.push((c1, c2, v1.conj() * v2));
                }
            }
        }
        HermitianMatrix::from_triplets(self.cols, &t)
    }
}

/// (d_τ f)(e) = τ(e) f(𝔱e) − conj τ(e) f(𝔬e), with edge r used against its template
/// orientation when `flip(r)`.
pub fn twisted_coboundary_matrix_oriented(g: &GammaGraph, tau: &WeightFunction, x: &FiniteRestriction, flip: impl Fn(usize) -> bool) -> CoboundaryMatrix {
    let _ = g;
    let mut entries = Vec::with_capacity(2 * x.edges().len());
    for (r, (i, j, e)) in x.edges().iter().enumerate() {
        let (o, t, e) = if flip(r) { (*j, *i, e.reverse()) } else { (*i, *j, e.clone()) };
        let tv = tau.value(&e);
        entries.push((r, t, tv));
        entries.push((r, o, -tv.conj()));
    }
    CoboundaryMatrix { rows: x.edges().len(), cols: x.len(), entries }
}

pub fn twisted_coboundary_matrix(g: &GammaGraph, tau: &WeightFunction, x: &FiniteRestriction) -> CoboundaryMatrix {
    twisted_coboundary_matrix_oriented(g, tau, x, |_| false)
}

/// Tr_{Γ,σ}(A^k) summed over the fundamental domain.
#[derive(Clone, Debug, Serialize)]
pub struct ExactMoment {
    pub k: usize,
    /// Cosine form of the exact value, when σ is rational.
    pub exact: Option<String>,
    pub value: f64,
    pub imag: f64,
    #[serde(skip)]
    pub cyclotomic: Option<CyclotomicNumber>,
}

trait WalkScalar: Clone + Send + Sync {
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn is_zero(&self) -> bool;
}

impl WalkScalar for Complex64 {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn is_zero(&self) -> bool {
        *self == Complex64::new(0.0, 0.0)
    }
}

impl WalkScalar for CyclotomicNumber {
    fn add(&self, o: &Self) -> Self {
        CyclotomicNumber::add(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        CyclotomicNumber::mul(self, o)
    }
    fn is_zero(&self) -> bool {
        CyclotomicNumber::is_zero(self)
    }
}

/// Local action of the kernel: entries A(u, w) for fixed w.
struct Stencil<'a, S> {
    g: &'a GammaGraph,
    kind: OperatorKind,
    phase: &'a (dyn Fn(&crate::graph::OrientedEdge) -> S + Sync),
    int: &'a (dyn Fn(i64) -> S + Sync),
}

impl<S: WalkScalar> Stencil<'_, S> {
    fn column(&self, w: &VertexId) -> Vec<(VertexId, S)> {
        let mut out = Vec::new();
        if self.kind == OperatorKind::Dml {
            out.push((w.clone(), (self.int)(self.g.valence(w) as i64)));
        }
        let minus = (self.int)(-1);
        for e in self.g.edges_from(w) {
            let p = (self.phase)(&e);
            let v = if self.kind == OperatorKind::Dml { p.mul(&minus) } else { p };
            out.push((e.terminus, v));
        }
        out
    }

    /// Columns A^s δ_w for s = 0..=k, restricted to vertices that can still return to
    /// `target` (within distance k − s of it).
    fn powers_at(&self, w: &VertexId, target: &VertexId, k: usize) -> Vec<S> {
        let dist = distances(self.g, target, k);
        let mut f: BTreeMap<VertexId, S> = BTreeMap::new();
        f.insert(w.clone(), (self.int)(1));
        let mut out = Vec::with_capacity(k + 1);
        let zero = (self.int)(0);
        out.push(f.get(target).cloned().unwrap_or_else(|| zero.clone()));
        for s in 1..=k {
            let mut next: BTreeMap<VertexId, S> = BTreeMap::new();
            for (u, fu) in &f {
                for (v, a) in self.column(u) {
                    match dist.get(&v) {
                        Some(&d) if d <= k - s => {}
                        _ => continue,
                    }
                    let c = a.mul(fu);
                    match next.get_mut(&v) {
                        Some(x) => *x = x.add(&c),
                        None => {
                            next.insert(v, c);
                        }
                    }
                }
            }
            next.retain(|_, v| !v.is_zero());
            out.push(next.get(target).cloned().unwrap_or_else(|| zero.clone()));
            f = next;
        }
        out
    }
}

fn distances(g: &GammaGraph, v: &VertexId, r: usize) -> HashMap<VertexId, usize> {
    let mut dist = HashMap::new();
    dist.insert(v.clone(), 0);
    let mut queue = VecDeque::from([v.clone()]);
    while let Some(u) = queue.pop_front() {
        let du = dist[&u];
        if du == r {
            continue;
        }
        for w in g.neighbors(&u) {
            if !dist.contains_key(&w) {
                dist.insert(w.clone(), du + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

fn domain(g: &GammaGraph) -> Vec<VertexId> {
    (0..g.domain_size()).map(|i| VertexId::new(GroupElement::identity(g.dim()), i)).collect()
}

/// Tr_{Γ,σ}(A^k) for k = 0..=kmax by closed walks from each fundamental-domain vertex.
/// Exact over ℚ(ζ_n) when σ is rational.
pub fn exact_moments(g: &GammaGraph, sigma: &WeightFunction, kind: OperatorKind, kmax: usize, exec: Execution) -> Vec<ExactMoment> {
    let fd = domain(g);
    if let Some(n) = sigma.rational_order() {
        let n = n as u64;
        let phase = move |e: &crate::graph::OrientedEdge| phase_to_cyclotomic(&sigma.phase(e), n).expect("rational phase");
        let int = move |k: i64| CyclotomicNumber::from_integer(n, k);
        let st = Stencil { g, kind, phase: &phase, int: &int };
        let per_vertex = par::map(exec, &fd, |v| st.powers_at(v, v, kmax));
        (0..=kmax)
            .map(|k| {
                let total = per_vertex.iter().fold(CyclotomicNumber::zero(n), |acc, p| acc.add(&p[k]));
                let z = total.identity_embedding();
                ExactMoment { k, exact: Some(format_cosine_form(&total)), value: z.re.to_f64(), imag: z.im.to_f64(), cyclotomic: Some(total) }
            })
            .collect()
    } else {
        let phase = move |e: &crate::graph::OrientedEdge| sigma.value(e);
        let int = |k: i64| Complex64::new(k as f64, 0.0);
        let st = Stencil { g, kind, phase: &phase, int: &int };
        let per_vertex = par::map(exec, &fd, |v| st.powers_at(v, v, kmax));
        (0..=kmax)
            .map(|k| {
                let total: Complex64 = per_vertex.iter().map(|p| p[k]).sum();
                ExactMoment { k, exact: None, value: total.re, imag: total.im, cyclotomic: None }
            })
            .collect()
    }
}

pub fn exact_moment(g: &GammaGraph, sigma: &WeightFunction, kind: OperatorKind, k: usize) -> ExactMoment {
    exact_moments(g, sigma, kind, k, Execution::Sequential).pop().expect("k + 1 moments")
}

/// A^k(v1, v2) on the whole graph, by walks from v2.
pub fn power_kernel(g: &GammaGraph, sigma: &WeightFunction, kind: OperatorKind, k: usize, v1: &VertexId, v2: &VertexId) -> Complex64 {
    let phase = move |e: &crate::graph::OrientedEdge| sigma.value(e);
    let int = |k: i64| Complex64::new(k as f64, 0.0);
    let st = Stencil { g, kind, phase: &phase, int: &int };
    st.powers_at(v2, v1, k)[k]
}

/// 2·(#∂_δX_m / N_m)·Σ|a_r| K^{2r} with δ = max(deg p, 1), a bound for
/// |Tr_{Γ,σ} p(Δ) − Tr p(Δ^{(m)}) / N_m|.
pub fn trace_error_bound(g: &GammaGraph, coeffs: &[f64], x: &FiniteRestriction) -> f64 {
    let deg = coeffs.len().saturating_sub(1);
    let delta = deg.max(1);
    let boundary = x.delta_boundary(g, delta).total() as f64;
    let k_sq = OperatorBounds::for_graph(g).norm_bound_sq;
    let weighted: f64 = coeffs.iter().enumerate().map(|(r, a)| a.abs() * k_sq.powi(r as i32)).sum();
    2.0 * boundary / x.n_cells() as f64 * weighted
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivarianceResult {
    pub max_violation: f64,
    pub pairs: usize,
    pub holds: bool,
}

/// Checks s_γ(v1)·k(γv1, γv2)·conj s_γ(v2) = k(v1, v2) over pairs in the radius-3 ball
/// of the base vertex. With D(v1, v2) = −σ(e: v2 → v1) the kernel in this identity
/// is k(v1, v2) = D(v2, v1); see [`dml_transpose_kernel`].
pub fn equivariance_check(g: &GammaGraph, s: &PhaseCochain, kernel: impl Fn(&VertexId, &VertexId) -> Complex64) -> EquivarianceResult {
    let ball = g.ball(&g.base_vertex(), 3);
    let gamma = s.gamma();
    let svals: HashMap<&VertexId, Complex64> = ball.iter().map(|v| (v, s.value(v))).collect();
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for v1 in &ball {
        for v2 in &ball {
            let lhs = svals[v1] * kernel(&v1.translate(gamma), &v2.translate(gamma)) * svals[v2].conj();
            let rhs = kernel(v1, v2);
            worst = worst.max((lhs - rhs).norm());
            pairs += 1;
        }
    }
    EquivarianceResult { max_violation: worst, pairs, holds: worst < 1e-10 }
}

/// k(v1, v2) = D(v2, v1).
pub fn dml_transpose_kernel<'a>(g: &'a GammaGraph, sigma: &'a WeightFunction) -> impl Fn(&VertexId, &VertexId) -> Complex64 + 'a {
    move |v1, v2| dml_kernel(g, sigma, v2, v1)
}

use crate::graph::Translate;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exhaustion::{boxes_zd, cubes_zd, induce_subgraph, restriction};
    use crate::graph::build_cayley_zd;
    use crate::magnetic::{landau_weight, normalized_cochain, sqrt_weight, trivial_weight};
    use num_rational::Ratio;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn eig_sym_2(m: &HermitianMatrix) -> (f64, f64) {
        let (a, b, d) = (m.get(0, 0).re, m.get(0, 1).norm(), m.get(1, 1).re);
        let mid = (a + d) / 2.0;
        let r = (((a - d) / 2.0).powi(2) + b * b).sqrt();
        (mid - r, mid + r)
    }

    #[test]
    fn kernel_examples() {
        let g = build_cayley_zd(2);
        let sigma = landau_weight(&g, Ratio::new(1, 2)).unwrap();
        let v = VertexId::at(&[3, -2], 0);
        assert_eq!(dml_kernel(&g, &sigma, &v, &v), c(4.0, 0.0));
        let a = VertexId::at(&[1, 0], 0);
        let b = VertexId::at(&[1, 1], 0);
        assert!((dml_kernel(&g, &sigma, &a, &b) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((dml_kernel(&g, &sigma, &a, &b) - dml_kernel(&g, &sigma, &b, &a).conj()).norm() < 1e-15);
        let line = build_cayley_zd(1);
        assert_eq!(dml_kernel(&line, &trivial_weight(&line), &VertexId::at(&[0], 0), &VertexId::at(&[1], 0)), c(-1.0, 0.0));
        assert_eq!(dml_kernel(&g, &sigma, &VertexId::at(&[0, 0], 0), &VertexId::at(&[2, 0], 0)), c(0.0, 0.0));
    }

    #[test]
    fn path_restrictions() {
        let line = build_cayley_zd(1);
        let s = trivial_weight(&line);
        let x = induce_subgraph(&line, &[GroupElement::new(&[0]), GroupElement::new(&[1])]);
        let d = restrict_dml(&line, &s, &x, BoundaryCondition::Dirichlet);
        assert_eq!(eig_sym_2(&d), (1.0, 3.0));
        let n = restrict_dml(&line, &s, &x, BoundaryCondition::Neumann);
        assert_eq!(eig_sym_2(&n), (0.0, 2.0));
        let h = restrict_harper(&line, &s, &x, BoundaryCondition::Neumann);
        assert_eq!(h.to_dense(), vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let one = induce_subgraph(&line, &[GroupElement::new(&[0])]);
        assert_eq!(restrict_harper(&line, &s, &one, BoundaryCondition::Dirichlet).to_dense(), vec![c(0.0, 0.0)]);
        let d = twisted_coboundary_matrix(&line, &sqrt_weight(&s), &x);
        assert_eq!(d.entries.len(), 2);
        assert_eq!(d.gram().to_dense(), n.to_dense());
    }

    #[test]
    fn coboundary_gram_is_neumann() {
        let g = build_cayley_zd(2);
        for theta in [Ratio::new(0, 1), Ratio::new(1, 2), Ratio::new(1, 3), Ratio::new(2, 7)] {
            let sigma = landau_weight(&g, theta).unwrap();
            let tau = sqrt_weight(&sigma);
            let x = restriction(&g, &boxes_zd(2, &[2]).unwrap(), 0);
            let n = restrict_dml(&g, &sigma, &x, BoundaryCondition::Neumann).to_dense();
            let d = twisted_coboundary_matrix(&g, &tau, &x);
            let flipped = twisted_coboundary_matrix_oriented(&g, &tau, &x, |r| r % 3 == 1);
            for (a, b) in [(d.gram().to_dense(), &n), (flipped.gram().to_dense(), &n)] {
                let err = a.iter().zip(b.iter()).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
                assert!(err < 1e-12, "θ={theta} err={err}");
            }
        }
    }

    #[test]
    fn dirichlet_minus_neumann_is_boundary_deficiency() {
        let g = build_cayley_zd(2);
        let sigma = landau_weight(&g, Ratio::new(1, 3)).unwrap();
        let x = restriction(&g, &cubes_zd(2, &[4]).unwrap(), 0);
        let d = restrict_dml(&g, &sigma, &x, BoundaryCondition::Dirichlet).to_dense();
        let n = restrict_dml(&g, &sigma, &x, BoundaryCondition::Neumann).to_dense();
        let inner = x.delta_boundary(&g, 1).inner;
        for i in 0..x.len() {
            for j in 0..x.len() {
                let diff = d[i * x.len() + j] - n[i * x.len() + j];
                if i != j {
                    assert_eq!(diff, c(0.0, 0.0));
                } else {
                    assert!(diff.re >= 0.0 && diff.im == 0.0);
                    if diff.re > 0.0 {
                        assert!(inner.contains(&x.vertices()[i]));
                    }
                }
            }
        }
    }

    #[test]
    fn exact_assembly_matches_float() {
        let g = build_cayley_zd(2);
        let sigma = landau_weight(&g, Ratio::new(1, 3)).unwrap();
        let x = restriction(&g, &cubes_zd(2, &[3]).unwrap(), 0);
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
            let e = restrict_dml_exact(&g, &sigma, &x, bc).unwrap();
            assert!(e.is_hermitian());
            let f = restrict_dml(&g, &sigma, &x, bc);
            let a = e.to_complex().to_dense();
            let b = f.to_dense();
            assert!(a.iter().zip(&b).all(|(p, q)| (p - q).norm() < 1e-15));
        }
    }

    #[test]
    fn moments() {
        let g = build_cayley_zd(2);
        for theta in [Ratio::new(0, 1), Ratio::new(1, 3), Ratio::new(1, 5), Ratio::new(1, 2)] {
            let sigma = landau_weight(&g, theta).unwrap();
            let dml = exact_moments(&g, &sigma, OperatorKind::Dml, 2, Execution::Sequential);
            assert_eq!(dml[1].exact.as_deref(), Some("4"));
            assert_eq!(dml[2].exact.as_deref(), Some("20"));
            let h = exact_moments(&g, &sigma, OperatorKind::Harper, 4, Execution::Parallel);
            assert_eq!(h[2].exact.as_deref(), Some("4"));
            let t = *theta.numer() as f64 / *theta.denom() as f64;
            assert!((h[4].value - (28.0 + 8.0 * (2.0 * std::f64::consts::PI * t).cos())).abs() < 1e-12);
            assert!(h[4].imag.abs() < 1e-14);
        }
        let sigma = landau_weight(&g, Ratio::new(0, 1)).unwrap();
        assert_eq!(exact_moment(&g, &sigma, OperatorKind::Harper, 4).exact.as_deref(), Some("36"));
        let sigma = landau_weight(&g, Ratio::new(1, 5)).unwrap();
        assert_eq!(exact_moment(&g, &sigma, OperatorKind::Harper, 4).exact.as_deref(), Some("28 + 8cos(2π·1/5)"));
    }

    #[test]
    fn trace_bound_examples() {
        let g = build_cayley_zd(2);
        let sigma = trivial_weight(&g);
        let x = restriction(&g, &boxes_zd(2, &[2]).unwrap(), 0);
        let n = restrict_dml(&g, &sigma, &x, BoundaryCondition::Neumann);
        let actual = (4.0 - n.trace() / x.n_cells() as f64).abs();
        let deficiency: f64 = x.internal_valence().iter().map(|d| (4 - d) as f64).sum::<f64>() / x.n_cells() as f64;
        assert!((actual - deficiency).abs() < 1e-12);
        assert!(actual <= trace_error_bound(&g, &[0.0, 1.0], &x));
        let b1 = trace_error_bound(&g, &[1.0, 1.0, 1.0], &restriction(&g, &boxes_zd(2, &[10]).unwrap(), 0));
        let b2 = trace_error_bound(&g, &[1.0, 1.0, 1.0], &restriction(&g, &boxes_zd(2, &[40]).unwrap(), 0));
        assert!(b2 < b1 / 3.0);
    }

    #[test]
    fn equivariance_examples() {
        let line = build_cayley_zd(1);
        let t = trivial_weight(&line);
        let s = normalized_cochain(&line, &t, &GroupElement::new(&[1])).unwrap();
        assert!(equivariance_check(&line, &s, dml_transpose_kernel(&line, &t)).holds);

        let g = build_cayley_zd(2);
        let sigma = landau_weight(&g, Ratio::new(1, 3)).unwrap();
        let gamma = GroupElement::new(&[1, 0]);
        let s = normalized_cochain(&g, &sigma, &gamma).unwrap();
        assert!(equivariance_check(&g, &s, dml_transpose_kernel(&g, &sigma)).holds);
        let k2 = |a: &VertexId, b: &VertexId| power_kernel(&g, &sigma, OperatorKind::Dml, 2, b, a);
        assert!(equivariance_check(&g, &s, k2).holds);
        // The trivial cochain belongs to the trivial weight, not to σ.
        let wrong = normalized_cochain(&g, &trivial_weight(&g), &gamma).unwrap();
        assert!(!equivariance_check(&g, &wrong, dml_transpose_kernel(&g, &sigma)).holds);
    }

    #[test]
    fn norm_bound_holds() {
        let g = build_cayley_zd(2);
        let b = OperatorBounds::for_graph(&g);
        assert_eq!((b.entry_bound, b.valence_bound, b.norm_bound_sq), (4.0, 4, 16.0));
        let sigma = landau_weight(&g, Ratio::new(1, 3)).unwrap();
        let x = restriction(&g, &cubes_zd(2, &[5]).unwrap(), 0);
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
            let m = restrict_dml(&g, &sigma, &x, bc);
            assert!(m.row_sum_norm() <= b.norm_bound_sq);
            assert!(m.max_entry() <= b.entry_bound);
        }
    }
}
