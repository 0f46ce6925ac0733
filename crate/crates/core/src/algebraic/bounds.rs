use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::charpoly::{lowest_nonzero_coefficient, shift_polynomial, unshifted_charpoly};
use super::{big_abs_f64, field_norm, format_cosine_form, AlgebraicError, CyclotomicNumber, ExactScalar};
use crate::exhaustion::{restriction, FolnerSequence};
use crate::graph::GammaGraph;
use crate::magnetic::WeightFunction;
use crate::operator::{restrict_dml_exact, BoundaryCondition, OperatorBounds};
use crate::par::{self, Execution};

/// true iff min |e_i(x)| ≥ R^{1−h} − 10⁻¹⁵, for nonzero x ∈ ℤ[ζ_n] with all |e_i(x)| ≤ R.
pub fn conjugate_bound_check(x: &CyclotomicNumber, r: f64) -> Result<bool, AlgebraicError> {
    if x.is_zero() || !x.is_integral() {
        return Err(AlgebraicError::PreconditionViolated("element must be a nonzero algebraic integer".into()));
    }
    let emb = x.embeddings_with_error();
    let mut min = f64::INFINITY;
    for (z, err) in &emb {
        let a = z.abs().to_f64();
        if a - err > r {
            return Err(AlgebraicError::PreconditionViolated(format!("|e_i(x)| = {a} exceeds R = {r}")));
        }
        min = min.min(a + err);
    }
    let h = x.degree() as i32;
    Ok(min >= r.powi(1 - h) - 1e-15)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LambdaCase {
    Rational,
    Cyclotomic,
}

/// Constants entering the lower bound for |q(0)|.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlgebraicBoundParams {
    /// Modulus of the field holding matrix entries and λ.
    pub n: u64,
    /// Degree φ(n).
    pub h: usize,
    /// Embedding bound R = max(1, |e_j(η)|).
    pub r: f64,
    /// L² = K², a bound for every conjugate matrix.
    pub l_sq: f64,
    pub k_sq: f64,
    /// Fundamental domain size.
    pub a: usize,
    /// Number of group elements N_m.
    pub n_m: usize,
    /// λ = η/b.
    #[serde(serialize_with = "ser_big")]
    pub b: BigInt,
    /// max(|p|, q) for rational λ = p/q.
    #[serde(serialize_with = "ser_big_opt")]
    pub big_b: Option<BigInt>,
    pub case: LambdaCase,
}

fn ser_big<S: serde::Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

fn ser_big_opt<S: serde::Serializer>(x: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_str(&v.to_string()),
        None => s.serialize_none(),
    }
}

impl AlgebraicBoundParams {
    /// `sigma_order` is the common denominator of the weight phases.
    pub fn new(sigma_order: u64, lambda: &ExactScalar, bounds: &OperatorBounds, a: usize, n_m: usize) -> Self {
        let n = sigma_order.lcm(&lambda.modulus());
        let h = super::euler_phi(n) as usize;
        let b = lambda.denominator();
        let eta = lambda.to_cyclotomic(n).scale(&BigRational::from_integer(b.clone()));
        let r = eta.embeddings_with_error().iter().map(|(z, e)| z.abs().to_f64() + e).fold(1.0, f64::max);
        let (case, big_b) = match lambda.as_rational() {
            Some(q) => (LambdaCase::Rational, Some(q.numer().abs().max(q.denom().clone()))),
            None => (LambdaCase::Cyclotomic, None),
        };
        AlgebraicBoundParams { n, h, r, l_sq: bounds.norm_bound_sq, k_sq: bounds.norm_bound_sq, a, n_m, b, big_b, case }
    }

    pub fn an(&self) -> usize {
        self.a * self.n_m
    }
}

/// (aN)^{−h} Q^{−h·aN} for one choice of Q, kept in log10 form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundTerm {
    pub q: f64,
    pub log10_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QzeroBound {
    /// Q = 8Rb²L², valid for every λ = η/b.
    pub general: BoundTerm,
    /// Q = 8B²K², rational λ only.
    pub rational: Option<BoundTerm>,
    pub h: usize,
    pub an: usize,
}

impl QzeroBound {
    /// The stronger of the valid bounds.
    pub fn log10_bound(&self) -> f64 {
        self.rational.as_ref().map_or(self.general.log10_bound, |r| r.log10_bound.max(self.general.log10_bound))
    }

    pub fn value(&self) -> f64 {
        10f64.powf(self.log10_bound())
    }
}

fn term(q: f64, h: usize, an: usize) -> BoundTerm {
    let (h, an) = (h as f64, an as f64);
    BoundTerm { q, log10_bound: -h * an.log10() - h * an * q.log10() }
}

pub fn qzero_lower_bound(p: &AlgebraicBoundParams) -> QzeroBound {
    let b = big_abs_f64(&p.b);
    let general = term(8.0 * p.r * b * b * p.l_sq, p.h, p.an());
    let rational = p.big_b.as_ref().map(|bb| {
        let bb = big_abs_f64(bb);
        term(8.0 * bb * bb * p.k_sq, p.h, p.an())
    });
    QzeroBound { general, rational, h: p.h, an: p.an() }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationRow {
    pub label: String,
    /// aN_m, the matrix dimension.
    #[serde(rename = "N")]
    pub dim: usize,
    pub n_cells: usize,
    pub k: usize,
    pub q0: String,
    pub q0_abs: f64,
    pub log10_q0: f64,
    pub bound: f64,
    pub log10_bound: f64,
    /// log10|q(0)| − log10(bound); nonnegative when the bound holds.
    pub margin: f64,
    pub constants: RowConstants,
    /// |e_j(c_i)| < (4L²)^{aN} for the unshifted characteristic polynomial.
    pub coefficient_check: bool,
    /// b^{N−k} q(0) is a nonzero algebraic integer with |N(·)| ≥ 1 and passes the conjugate bound.
    pub integrality_check: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RowConstants {
    pub h: usize,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "B")]
    pub big_b: Option<String>,
    pub b: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub lambda: String,
    pub field_modulus: u64,
    pub rows: Vec<VerificationRow>,
}

impl VerificationReport {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.margin >= 0.0 && r.coefficient_check && r.integrality_check)
    }
}

/// Exact charpoly of Δ^{(m)} − λ for each selected box, compared with the lower bound.
pub fn verify_lemma_qmzero(
    g: &GammaGraph,
    sigma: &WeightFunction,
    seq: &FolnerSequence,
    bc: BoundaryCondition,
    lambda: &ExactScalar,
    indices: &[usize],
    exec: Execution,
) -> Result<VerificationReport, AlgebraicError> {
    let order = sigma.rational_order().ok_or(AlgebraicError::NotRational)? as u64;
    let bounds = OperatorBounds::for_graph(g);
    let n = order.lcm(&lambda.modulus());
    let rows = par::map(exec, indices, |&m| -> Result<VerificationRow, AlgebraicError> {
        let x = restriction(g, seq, m);
        let a_mat = restrict_dml_exact(g, sigma, &x, bc).map_err(|e| AlgebraicError::PreconditionViolated(e.to_string()))?.lift(n);
        let params = AlgebraicBoundParams::new(order, lambda, &bounds, g.domain_size(), x.n_cells());
        let unshifted = unshifted_charpoly(&a_mat, Execution::Sequential);
        let an = x.len() as f64;
        let coeff_limit = an * (4.0 * params.l_sq).log10();
        let coefficient_check = unshifted.iter().all(|c| {
            c.embeddings_with_error().iter().all(|(z, e)| {
                let v = z.abs().to_f64() + e;
                v == 0.0 || v.log10() < coeff_limit
            })
        });
        let lam = lambda.to_cyclotomic(n);
        let p = if lam.is_zero() { unshifted } else { shift_polynomial(&unshifted, &lam) };
        if lambda.is_real() {
            if let Some(i) = p.iter().position(|c| c.conj() != *c) {
                return Err(AlgebraicError::NotSelfConjugate(i));
            }
        }
        let (k, q0) = lowest_nonzero_coefficient(&p)?;
        let q0_abs = q0.identity_embedding().abs().to_f64();
        let log10_q0 = q0_abs.log10();
        let bound = qzero_lower_bound(&params);
        let log10_bound = bound.log10_bound();
        let integrality_check = integrality(&q0, &params.b, x.len() - k);
        let q_used = match &bound.rational {
            Some(r) if r.log10_bound >= bound.general.log10_bound => r.q,
            _ => bound.general.q,
        };
        Ok(VerificationRow {
            label: x.label().to_string(),
            dim: x.len(),
            n_cells: x.n_cells(),
            k,
            q0: if q0.conj() == q0 { format_cosine_form(&q0) } else { q0.to_string() },
            q0_abs,
            log10_q0,
            bound: bound.value(),
            log10_bound,
            margin: log10_q0 - log10_bound,
            constants: RowConstants {
                h: params.h,
                q: q_used,
                r: params.r,
                l: params.l_sq.sqrt(),
                big_b: params.big_b.as_ref().map(|x| x.to_string()),
                b: params.b.to_string(),
            },
            coefficient_check,
            integrality_check,
        })
    });
    Ok(VerificationReport { lambda: lambda.to_string(), field_modulus: n, rows: rows.into_iter().collect::<Result<_, _>>()? })
}

fn integrality(q0: &CyclotomicNumber, b: &BigInt, power: usize) -> bool {
    let mut scale = BigInt::one();
    for _ in 0..power {
        scale *= b;
    }
    let x = q0.scale(&BigRational::from_integer(scale));
    if !x.is_integral() || x.is_zero() {
        return false;
    }
    let norm = field_norm(&x);
    if !norm.is_integer() || norm.is_zero() {
        return false;
    }
    let r = x.embeddings_with_error().iter().map(|(z, e)| z.abs().to_f64() + e).fold(1.0, f64::max);
    conjugate_bound_check(&x, r).unwrap_or(false)
}
