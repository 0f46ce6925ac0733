//! U(1) edge weights, the phase corrections s_γ that witness weak invariance,
//! magnetic translations and their 2-cocycle.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GammaGraph, GroupElement, OrientedEdge, Translate, VertexId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MagneticError {
    #[error("the Landau gauge needs the Cayley graph of ℤ² (or d ≥ 2 for the periodic variant)")]
    WrongGraph,
    #[error("weight is not weakly invariant under {gamma:?}: relation fails on edge {edge}")]
    NotWeaklyInvariant { gamma: Vec<i64>, edge: String },
    #[error("cocycle value differs between test vertices")]
    InconsistentCocycle,
    #[error("graph is not connected")]
    NotConnected,
    #[error("weight has {got} template phases, graph has {expected} templates")]
    TemplateCount { expected: usize, got: usize },
    #[error("bad weight description: {0}")]
    Descriptor(String),
}

/// A point of the unit circle, exact when given as a fraction of a turn.
#[derive(Clone, Copy, PartialEq)]
pub enum UnitPhase {
    /// e^{2πi t}, with t reduced into [0, 1).
    Turns(Ratio<i64>),
    /// e^{iφ}, with φ normalized into (−π, π].
    Angle(f64),
}

fn reduce_turns(t: Ratio<i64>) -> Ratio<i64> {
    let fl = t.floor();
    t - fl
}

fn normalize_angle(phi: f64) -> f64 {
    let mut x = phi.rem_euclid(2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    }
    x
}

impl UnitPhase {
    pub fn one() -> Self {
        UnitPhase::Turns(Ratio::zero())
    }

    pub fn turns(p: i64, q: i64) -> Self {
        UnitPhase::Turns(reduce_turns(Ratio::new(p, q)))
    }

    pub fn from_ratio(t: Ratio<i64>) -> Self {
        UnitPhase::Turns(reduce_turns(t))
    }

    pub fn radians(phi: f64) -> Self {
        UnitPhase::Angle(normalize_angle(phi))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, UnitPhase::Turns(_))
    }

    /// Order of the root of unity; `None` for numeric phases.
    pub fn denominator(&self) -> Option<i64> {
        match self {
            UnitPhase::Turns(t) => Some(*t.denom()),
            UnitPhase::Angle(_) => None,
        }
    }

    /// Argument in turns, taken in (−1/2, 1/2].
    pub fn signed_turns(&self) -> f64 {
        match self {
            UnitPhase::Turns(t) => {
                let x = t.to_f64().unwrap();
                if x > 0.5 {
                    x - 1.0
                } else {
                    x
                }
            }
            UnitPhase::Angle(phi) => phi / (2.0 * PI),
        }
    }

    pub fn mul(&self, other: &UnitPhase) -> UnitPhase {
        match (self, other) {
            (UnitPhase::Turns(a), UnitPhase::Turns(b)) => UnitPhase::from_ratio(a + b),
            _ => UnitPhase::radians(self.angle() + other.angle()),
        }
    }

    pub fn inv(&self) -> UnitPhase {
        match self {
            UnitPhase::Turns(t) => UnitPhase::from_ratio(-t),
            UnitPhase::Angle(phi) => UnitPhase::radians(-phi),
        }
    }

    pub fn div(&self, other: &UnitPhase) -> UnitPhase {
        self.mul(&other.inv())
    }

    pub fn pow(&self, k: i64) -> UnitPhase {
        match self {
            UnitPhase::Turns(t) => UnitPhase::from_ratio(t * Ratio::from_integer(k)),
            UnitPhase::Angle(phi) => UnitPhase::radians(phi * k as f64),
        }
    }

    /// Argument in radians, (−π, π].
    pub fn angle(&self) -> f64 {
        match self {
            UnitPhase::Turns(_) => 2.0 * PI * self.signed_turns(),
            UnitPhase::Angle(phi) => *phi,
        }
    }

    /// Principal square root: half of the argument taken in (−π, π].
    pub fn principal_sqrt(&self) -> UnitPhase {
        match self {
            UnitPhase::Turns(t) => {
                let s = if *t > Ratio::new(1, 2) { t - Ratio::one() } else { *t };
                UnitPhase::from_ratio(s / 2)
            }
            UnitPhase::Angle(phi) => UnitPhase::radians(phi / 2.0),
        }
    }

    /// Square root with argument in [0, π).
    pub fn upper_sqrt(&self) -> UnitPhase {
        match self {
            UnitPhase::Turns(t) => UnitPhase::from_ratio(t / 2),
            UnitPhase::Angle(phi) => {
                let x = phi.rem_euclid(2.0 * PI);
                UnitPhase::radians(x / 2.0)
            }
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            UnitPhase::Turns(t) => {
                let (p, q) = (*t.numer(), *t.denom());
                match (p, q) {
                    (0, _) => Complex64::new(1.0, 0.0),
                    (1, 2) => Complex64::new(-1.0, 0.0),
                    (1, 4) => Complex64::new(0.0, 1.0),
                    (3, 4) => Complex64::new(0.0, -1.0),
                    _ => {
                        let (s, c) = (2.0 * PI * self.signed_turns()).sin_cos();
                        Complex64::new(c, s)
                    }
                }
            }
            UnitPhase::Angle(phi) => {
                let (s, c) = phi.sin_cos();
                Complex64::new(c, s)
            }
        }
    }

    /// Exact comparison for two exact phases, tolerance-based otherwise.
    pub fn approx_eq(&self, other: &UnitPhase) -> bool {
        match (self, other) {
            (UnitPhase::Turns(a), UnitPhase::Turns(b)) => a == b,
            _ => (self.to_complex() - other.to_complex()).norm() < 1e-9,
        }
    }

    pub fn is_one(&self) -> bool {
        self.approx_eq(&UnitPhase::one())
    }
}

impl fmt::Debug for UnitPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnitPhase::Turns(t) => write!(f, "e^(2πi·{t})"),
            UnitPhase::Angle(phi) => write!(f, "e^(i·{phi})"),
        }
    }
}

/// Position-dependent factor multiplied onto the template phases.
#[derive(Clone, Debug, PartialEq)]
pub enum Gauge {
    None,
    /// e^{2πiθ·x·Δy} on a positively oriented edge anchored at column x with
    /// vertical displacement Δy.
    Landau(Ratio<i64>),
    /// e^{i·Δy·Σ c_k x^k}, numeric.
    ColumnPolynomial(Vec<f64>),
}

/// Weight σ on oriented edges, σ(ē) = σ(e)⁻¹.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightFunction {
    base: Vec<UnitPhase>,
    gauge: Gauge,
    /// (x-displacement, y-displacement) of each template; zero when d = 1.
    shifts: Vec<(i64, i64)>,
}

fn template_shifts(g: &GammaGraph) -> Vec<(i64, i64)> {
    g.templates()
        .iter()
        .map(|t| {
            let c = t.offset.coords();
            (c[0], if c.len() > 1 { c[1] } else { 0 })
        })
        .collect()
}

pub fn trivial_weight(g: &GammaGraph) -> WeightFunction {
    WeightFunction { base: vec![UnitPhase::one(); g.templates().len()], gauge: Gauge::None, shifts: template_shifts(g) }
}

/// Γ-invariant weight: one phase per edge template.
pub fn template_weight(g: &GammaGraph, phases: Vec<UnitPhase>) -> Result<WeightFunction, MagneticError> {
    if phases.len() != g.templates().len() {
        return Err(MagneticError::TemplateCount { expected: g.templates().len(), got: phases.len() });
    }
    Ok(WeightFunction { base: phases, gauge: Gauge::None, shifts: template_shifts(g) })
}

/// Landau gauge on the ℤ² Cayley graph: horizontal phases 1, the vertical edge
/// with origin (x, y) gets e^{2πiθx}.
pub fn landau_weight(g: &GammaGraph, theta: Ratio<i64>) -> Result<WeightFunction, MagneticError> {
    if g.dim() != 2 || !g.is_standard_cayley() {
        return Err(MagneticError::WrongGraph);
    }
    landau_periodic_weight(g, theta)
}

/// The same gauge rule on any periodic graph over ℤᵈ, d ≥ 2, using the first two coordinates.
pub fn landau_periodic_weight(g: &GammaGraph, theta: Ratio<i64>) -> Result<WeightFunction, MagneticError> {
    if g.dim() < 2 {
        return Err(MagneticError::WrongGraph);
    }
    Ok(WeightFunction {
        base: vec![UnitPhase::one(); g.templates().len()],
        gauge: Gauge::Landau(reduce_turns(theta)),
        shifts: template_shifts(g),
    })
}

/// Numeric column gauge e^{i·Δy·Σ c_k x^k}; weakly invariant only for polynomials of degree ≤ 1.
pub fn column_polynomial_weight(g: &GammaGraph, coeffs: Vec<f64>) -> Result<WeightFunction, MagneticError> {
    if g.dim() < 2 {
        return Err(MagneticError::WrongGraph);
    }
    Ok(WeightFunction {
        base: vec![UnitPhase::one(); g.templates().len()],
        gauge: Gauge::ColumnPolynomial(coeffs),
        shifts: template_shifts(g),
    })
}

impl WeightFunction {
    pub fn gauge(&self) -> &Gauge {
        &self.gauge
    }

    pub fn template_phases(&self) -> &[UnitPhase] {
        &self.base
    }

    /// σ on the positively oriented edge of template `t` anchored at `anchor`.
    pub fn positive_phase(&self, t: usize, anchor: &GroupElement) -> UnitPhase {
        let base = self.base[t];
        let (_, dy) = self.shifts[t];
        let x = anchor.coords()[0];
        match &self.gauge {
            Gauge::None => base,
            Gauge::Landau(theta) => base.mul(&UnitPhase::from_ratio(theta * Ratio::from_integer(x * dy))),
            Gauge::ColumnPolynomial(c) => {
                let xf = x as f64;
                let poly: f64 = c.iter().rev().fold(0.0, |acc, ck| acc * xf + ck);
                base.mul(&UnitPhase::radians(dy as f64 * poly))
            }
        }
    }

    pub fn phase(&self, e: &OrientedEdge) -> UnitPhase {
        let p = self.positive_phase(e.template, e.anchor());
        if e.forward {
            p
        } else {
            p.inv()
        }
    }

    pub fn value(&self, e: &OrientedEdge) -> Complex64 {
        self.phase(e).to_complex()
    }

    /// Common denominator n with σⁿ = 1, when every value is a root of unity.
    pub fn rational_order(&self) -> Option<i64> {
        let mut n = 1i64;
        for p in &self.base {
            n = n.lcm(&p.denominator()?);
        }
        match &self.gauge {
            Gauge::None => {}
            Gauge::Landau(theta) => n = n.lcm(theta.denom()),
            Gauge::ColumnPolynomial(c) => {
                if c.iter().any(|x| *x != 0.0) {
                    return None;
                }
            }
        }
        Some(n)
    }

    pub fn is_rational(&self) -> bool {
        self.rational_order().is_some()
    }

    /// Landau flux per plaquette, when the weight is a Landau gauge.
    pub fn flux(&self) -> Option<Ratio<i64>> {
        match &self.gauge {
            Gauge::Landau(t) => Some(*t),
            Gauge::None if self.base.iter().all(|p| p.is_one()) => Some(Ratio::zero()),
            _ => None,
        }
    }
}

/// τ with τ² = conj σ: conjugate of the principal root on template phases; gauge
/// rules are halved so that τ stays weakly invariant.
pub fn sqrt_weight(sigma: &WeightFunction) -> WeightFunction {
    let base = sigma.base.iter().map(|p| p.principal_sqrt().inv()).collect();
    let gauge = match &sigma.gauge {
        Gauge::None => Gauge::None,
        Gauge::Landau(theta) => Gauge::Landau(-theta / 2),
        Gauge::ColumnPolynomial(c) => Gauge::ColumnPolynomial(c.iter().map(|x| -x / 2.0).collect()),
    };
    WeightFunction { base, gauge, shifts: sigma.shifts.clone() }
}

/// A vertex phase function, evaluated lazily by propagating its defining relation
/// along canonical paths from the base vertex.
#[derive(Clone, Debug)]
pub struct PhaseCochain {
    gamma: GroupElement,
    scale: UnitPhase,
    graph: GammaGraph,
    weight: WeightFunction,
}

impl PhaseCochain {
    pub fn gamma(&self) -> &GroupElement {
        &self.gamma
    }

    /// The value at the base vertex.
    pub fn scale(&self) -> UnitPhase {
        self.scale
    }

    pub fn eval(&self, v: &VertexId) -> UnitPhase {
        let path = self.graph.canonical_path(v).expect("cochains exist only on connected graphs");
        let mut acc = self.scale;
        for e in &path {
            acc = acc.mul(&edge_ratio(&self.weight, &self.gamma, e));
        }
        acc
    }

    pub fn value(&self, v: &VertexId) -> Complex64 {
        self.eval(v).to_complex()
    }

    fn rescaled(&self, c: UnitPhase) -> PhaseCochain {
        PhaseCochain { scale: self.scale.mul(&c), ..self.clone() }
    }
}

/// σ(γe)/σ(e), the increment of s_γ along e.
fn edge_ratio(w: &WeightFunction, gamma: &GroupElement, e: &OrientedEdge) -> UnitPhase {
    w.phase(&e.translate(gamma)).div(&w.phase(e))
}

/// s_γ with s_γ(base) = 1 and σ(γe) = σ(e)·s_γ(𝔱e)·conj s_γ(𝔬e), checked on a ball.
pub fn solve_phase_system(g: &GammaGraph, sigma: &WeightFunction, gamma: &GroupElement) -> Result<PhaseCochain, MagneticError> {
    if g.canonical_path(&g.base_vertex()).is_none() {
        return Err(MagneticError::NotConnected);
    }
    let s = PhaseCochain { gamma: gamma.clone(), scale: UnitPhase::one(), graph: g.clone(), weight: sigma.clone() };
    let radius = 3 + gamma.word_length() as usize;
    check_relation(g, sigma, &s, radius)?;
    Ok(s)
}

fn check_relation(g: &GammaGraph, w: &WeightFunction, s: &PhaseCochain, radius: usize) -> Result<(), MagneticError> {
    let ball = g.ball(&g.base_vertex(), radius);
    let mut cache: BTreeMap<VertexId, UnitPhase> = BTreeMap::new();
    let mut val = |v: &VertexId| *cache.entry(v.clone()).or_insert_with(|| s.eval(v));
    for v in &ball {
        for e in g.edges_from(v).into_iter().filter(|e| e.forward) {
            let lhs = w.phase(&e.translate(&s.gamma));
            let rhs = w.phase(&e).mul(&val(&e.terminus)).mul(&val(&e.origin).inv());
            if !lhs.approx_eq(&rhs) {
                return Err(MagneticError::NotWeaklyInvariant { gamma: s.gamma.0.clone(), edge: format!("{e:?}") });
            }
        }
    }
    Ok(())
}

/// Rescales s_γ by k_γ with k_γ² = conj(s_γ(x)·s_{γ⁻¹}(γx)), arg k_γ ∈ [0, π),
/// so that s′_γ(x)⁻¹ = s′_{γ⁻¹}(γx).
pub fn normalize_phase_cochain(g: &GammaGraph, sigma: &WeightFunction, s: &PhaseCochain) -> Result<PhaseCochain, MagneticError> {
    let inv = solve_phase_system(g, sigma, &s.gamma.inverse())?;
    let base = g.base_vertex();
    let c = s.eval(&base).mul(&inv.eval(&base.translate(&s.gamma)));
    let k = c.inv().upper_sqrt();
    Ok(s.rescaled(k))
}

/// Solved and normalized s_γ for any γ.
pub fn normalized_cochain(g: &GammaGraph, sigma: &WeightFunction, gamma: &GroupElement) -> Result<PhaseCochain, MagneticError> {
    let s = solve_phase_system(g, sigma, gamma)?;
    normalize_phase_cochain(g, sigma, &s)
}

/// The vertex part t_γ of the edge translation: t_γ² = conj s′_γ and
/// τ(γe) = τ(e)·t_γ(𝔱e)·conj t_γ(𝔬e).
pub fn tau_cochain(g: &GammaGraph, tau: &WeightFunction, s_normalized: &PhaseCochain) -> Result<PhaseCochain, MagneticError> {
    let t = solve_phase_system(g, tau, &s_normalized.gamma)?;
    let root = s_normalized.eval(&g.base_vertex()).inv().upper_sqrt();
    Ok(t.rescaled(root))
}

/// Finitely supported function on vertices.
pub type VertexFunction = BTreeMap<VertexId, Complex64>;
/// Finitely supported alternating function on edges, stored on positive orientations.
pub type EdgeFunction = BTreeMap<OrientedEdge, Complex64>;

/// (T_γ f)(x) = s_γ(γ⁻¹x) f(γ⁻¹x).
pub fn translate_vertex_function(s: &PhaseCochain, f: &VertexFunction) -> VertexFunction {
    f.iter()
        .filter(|(_, c)| **c != Complex64::new(0.0, 0.0))
        .map(|(v, c)| (v.translate(&s.gamma), s.value(v) * c))
        .collect()
}

/// (T_γ g)(e) = t_γ(γ⁻¹e) g(γ⁻¹e) with t_γ(e) = conj(t_γ(𝔱e)·t_γ(𝔬e)).
pub fn translate_edge_function(t: &PhaseCochain, f: &EdgeFunction) -> EdgeFunction {
    f.iter()
        .filter(|(_, c)| **c != Complex64::new(0.0, 0.0))
        .map(|(e, c)| {
            let factor = t.eval(&e.terminus).mul(&t.eval(&e.origin)).inv();
            (e.translate(&t.gamma), factor.to_complex() * c)
        })
        .collect()
}

/// (d_τ f)(e) = τ(e) f(𝔱e) − conj τ(e) f(𝔬e) on every positive edge meeting the support.
pub fn twisted_coboundary(g: &GammaGraph, tau: &WeightFunction, f: &VertexFunction) -> EdgeFunction {
    let mut out = EdgeFunction::new();
    let zero = Complex64::new(0.0, 0.0);
    for v in f.keys() {
        for e in g.edges_from(v) {
            let p = e.positive();
            if out.contains_key(&p) {
                continue;
            }
            let tv = tau.value(&p);
            let val = tv * f.get(&p.terminus).copied().unwrap_or(zero) - tv.conj() * f.get(&p.origin).copied().unwrap_or(zero);
            out.insert(p, val);
        }
    }
    out
}

/// Θ(γ, γ′) from T_γ T_γ′ δ_v = Θ T_{γγ′} δ_v, checked on the radius-2 ball.
pub fn cocycle(g: &GammaGraph, sigma: &WeightFunction, gamma: &GroupElement, gamma2: &GroupElement) -> Result<UnitPhase, MagneticError> {
    let s1 = normalized_cochain(g, sigma, gamma)?;
    let s2 = normalized_cochain(g, sigma, gamma2)?;
    let s12 = normalized_cochain(g, sigma, &gamma.compose(gamma2))?;
    let mut value: Option<UnitPhase> = None;
    for v in g.ball(&g.base_vertex(), 2) {
        let theta = s2.eval(&v).mul(&s1.eval(&v.translate(gamma2))).div(&s12.eval(&v));
        match &value {
            None => value = Some(theta),
            Some(prev) if prev.approx_eq(&theta) => {}
            Some(_) => return Err(MagneticError::InconsistentCocycle),
        }
    }
    Ok(value.unwrap())
}

/// JSON weight description: `{"kind":"landau","theta":"1/3"}` or
/// `{"kind":"templates","n":4,"phases":{"0":"0/4","1":"1/4"}}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightDescriptor {
    Landau { theta: String },
    Templates { n: i64, phases: BTreeMap<String, String> },
}

/// Parses "p/q" or an integer; decimal notation is rejected on purpose.
pub fn parse_fraction(s: &str) -> Result<Ratio<i64>, MagneticError> {
    let s = s.trim();
    let bad = || MagneticError::Descriptor(format!("{s:?} is not a fraction p/q"));
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim().parse::<i64>().map_err(|_| bad())?, q.trim().parse::<i64>().map_err(|_| bad())?),
        None => (s.parse::<i64>().map_err(|_| bad())?, 1),
    };
    if q == 0 {
        return Err(bad());
    }
    Ok(Ratio::new(p, q))
}

impl WeightDescriptor {
    pub fn parse(s: &str) -> Result<Self, MagneticError> {
        serde_json::from_str(s).map_err(|e| MagneticError::Descriptor(e.to_string()))
    }

    pub fn build(&self, g: &GammaGraph) -> Result<WeightFunction, MagneticError> {
        match self {
            WeightDescriptor::Landau { theta } => {
                let th = parse_fraction(theta)?;
                if g.is_standard_cayley() {
                    landau_weight(g, th)
                } else {
                    landau_periodic_weight(g, th)
                }
            }
            WeightDescriptor::Templates { n, phases } => {
                let mut out = vec![UnitPhase::one(); g.templates().len()];
                for (k, v) in phases {
                    let idx: usize = k.parse().map_err(|_| MagneticError::Descriptor(format!("bad template id {k:?}")))?;
                    if idx >= out.len() {
                        return Err(MagneticError::Descriptor(format!("template id {idx} out of range")));
                    }
                    let t = parse_fraction(v)?;
                    if (Ratio::from_integer(*n) * t).denom() != &1 {
                        return Err(MagneticError::Descriptor(format!("phase {v} is not an {n}-th root of unity")));
                    }
                    out[idx] = UnitPhase::from_ratio(t);
                }
                template_weight(g, out)
            }
        }
    }
}
