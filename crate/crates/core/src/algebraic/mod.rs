//! Exact arithmetic over cyclotomic fields and the q(0) lower bounds.

pub mod bounds;
pub mod charpoly;
pub mod cyclotomic;
pub mod dd;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::magnetic::UnitPhase;
use crate::operator::matrix::HermitianMatrix;

pub use bounds::{
    conjugate_bound_check, qzero_lower_bound, verify_lemma_qmzero, AlgebraicBoundParams, LambdaCase, QzeroBound,
    VerificationReport, VerificationRow,
};
pub use charpoly::{exact_charpoly, lowest_nonzero_coefficient, shift_polynomial, unshifted_charpoly};
pub use cyclotomic::{cyclotomic_polynomial, cyclotomic_reduce, euler_phi, field_norm, format_cosine_form, CyclotomicNumber};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraicError {
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("weight has a non-rational phase; exact arithmetic needs roots of unity")]
    NotRational,
    #[error("coefficient {0} of a Hermitian characteristic polynomial is not real")]
    NotSelfConjugate(usize),
    #[error("cannot parse exact scalar {0:?}")]
    Parse(String),
}

/// ζ_n^k for a rational phase, with n a multiple of its denominator.
pub fn phase_to_cyclotomic(p: &UnitPhase, n: u64) -> Option<CyclotomicNumber> {
    match p {
        UnitPhase::Turns(t) => {
            let q = *t.denom() as u64;
            if !n.is_multiple_of(q) {
                return None;
            }
            Some(CyclotomicNumber::zeta_pow(n, *t.numer() * (n / q) as i64))
        }
        UnitPhase::Angle(phi) if *phi == 0.0 => Some(CyclotomicNumber::one(n)),
        UnitPhase::Angle(_) => None,
    }
}

/// A spectral parameter: rational, or an element of some ℚ(ζ_n).
#[derive(Clone, Debug, PartialEq)]
pub enum ExactScalar {
    Rational(BigRational),
    Cyclotomic(CyclotomicNumber),
}

impl ExactScalar {
    pub fn integer(k: i64) -> Self {
        ExactScalar::Rational(BigRational::from_integer(BigInt::from(k)))
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        ExactScalar::Rational(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    /// a + b√2, living in ℚ(ζ₈) where √2 = ζ₈ + ζ₈⁷.
    pub fn plus_sqrt2(a: BigRational, b: BigRational) -> Self {
        if b.is_zero() {
            return ExactScalar::Rational(a);
        }
        let sqrt2 = CyclotomicNumber::zeta_pow(8, 1).add(&CyclotomicNumber::zeta_pow(8, 7));
        ExactScalar::Cyclotomic(CyclotomicNumber::from_rational(8, &a).add(&sqrt2.scale(&b)))
    }

    /// Accepts `p`, `p/q`, and `a±b·sqrt2` forms such as `4-2sqrt2` or `1/2+sqrt(2)`.
    pub fn parse(s: &str) -> Result<Self, AlgebraicError> {
        let err = || AlgebraicError::Parse(s.to_string());
        let t: String = s.chars().filter(|c| !c.is_whitespace() && *c != '*').collect::<String>().replace("sqrt(2)", "sqrt2").replace('√', "sqrt");
        if t.replace("sqrt2", "").contains(['.', 'e']) {
            return Err(err());
        }
        let Some(pos) = t.find("sqrt2") else {
            return parse_rational(&t).map(ExactScalar::Rational).ok_or_else(err);
        };
        if pos + 5 != t.len() {
            return Err(err());
        }
        let head = &t[..pos];
        // Split the coefficient of √2 from the rational part at the last sign not in front.
        let split = head.char_indices().filter(|&(i, c)| i > 0 && (c == '+' || c == '-')).map(|(i, _)| i).next_back();
        let (a_str, b_str) = match split {
            Some(i) => (&head[..i], &head[i..]),
            None => ("0", head),
        };
        let a = parse_rational(a_str).ok_or_else(err)?;
        let b = match b_str {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            other => parse_rational(other).ok_or_else(err)?,
        };
        Ok(Self::plus_sqrt2(a, b))
    }

    /// Minimal cyclotomic modulus containing the value (1 for rationals).
    pub fn modulus(&self) -> u64 {
        match self {
            ExactScalar::Rational(_) => 1,
            ExactScalar::Cyclotomic(c) => c.modulus(),
        }
    }

    pub fn to_cyclotomic(&self, n: u64) -> CyclotomicNumber {
        match self {
            ExactScalar::Rational(q) => CyclotomicNumber::from_rational(n, q),
            ExactScalar::Cyclotomic(c) => c.lift(n),
        }
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        match self {
            ExactScalar::Rational(q) => Some(q.clone()),
            ExactScalar::Cyclotomic(c) => c.as_rational(),
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            ExactScalar::Rational(_) => true,
            ExactScalar::Cyclotomic(c) => c.conj() == *c,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExactScalar::Rational(q) => dd::Dd::from_ratio(q.numer(), q.denom()).to_f64(),
            ExactScalar::Cyclotomic(c) => c.to_f64_real(),
        }
    }

    /// Smallest positive integer b with b·λ integral in the power basis.
    pub fn denominator(&self) -> BigInt {
        match self {
            ExactScalar::Rational(q) => q.denom().clone(),
            ExactScalar::Cyclotomic(c) => c.denominator().clone(),
        }
    }
}

impl std::fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExactScalar::Rational(q) => write!(f, "{q}"),
            ExactScalar::Cyclotomic(c) => write!(f, "{}", format_cosine_form(c)),
        }
    }
}

fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.strip_prefix('+').unwrap_or(s);
    if s.is_empty() {
        return None;
    }
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.parse().ok()?;
            let q: BigInt = q.parse().ok()?;
            (!q.is_zero()).then(|| BigRational::new(p, q))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

/// Square matrix over ℚ(ζ_n), stored by rows with sorted columns.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactMatrix {
    dim: usize,
    modulus: u64,
    rows: Vec<Vec<(usize, CyclotomicNumber)>>,
}

impl ExactMatrix {
    /// Sums duplicate entries and drops zeros.
    pub fn from_triplets(dim: usize, modulus: u64, triplets: Vec<(usize, usize, CyclotomicNumber)>) -> Self {
        let mut rows: Vec<Vec<(usize, CyclotomicNumber)>> = vec![Vec::new(); dim];
        for (i, j, v) in triplets {
            assert_eq!(v.modulus(), modulus, "entry lives in the wrong field");
            rows[i].push((j, v));
        }
        for row in &mut rows {
            row.sort_by_key(|(j, _)| *j);
            let mut merged: Vec<(usize, CyclotomicNumber)> = Vec::with_capacity(row.len());
            for (j, v) in row.drain(..) {
                match merged.last_mut() {
                    Some((k, w)) if *k == j => *w = w.add(&v),
                    _ => merged.push((j, v)),
                }
            }
            merged.retain(|(_, v)| !v.is_zero());
            *row = merged;
        }
        ExactMatrix { dim, modulus, rows }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn rows(&self) -> &[Vec<(usize, CyclotomicNumber)>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> CyclotomicNumber {
        match self.rows[i].binary_search_by_key(&j, |(k, _)| *k) {
            Ok(p) => self.rows[i][p].1.clone(),
            Err(_) => CyclotomicNumber::zero(self.modulus),
        }
    }

    /// The same matrix over ℚ(ζ_m), m a multiple of the modulus.
    pub fn lift(&self, m: u64) -> Self {
        if m == self.modulus {
            return self.clone();
        }
        let rows = self.rows.iter().map(|r| r.iter().map(|(j, v)| (*j, v.lift(m))).collect()).collect();
        ExactMatrix { dim: self.dim, modulus: m, rows }
    }

    /// A − λI.
    pub fn shifted(&self, lambda: &CyclotomicNumber) -> Self {
        let mut t = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row {
                t.push((i, *j, v.clone()));
            }
            t.push((i, i, lambda.neg()));
        }
        Self::from_triplets(self.dim, self.modulus, t)
    }

    /// Exact test A = A*.
    pub fn is_hermitian(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, row)| row.iter().all(|(j, v)| self.get(*j, i).conj() == *v))
    }

    /// The identity embedding as a floating-point matrix.
    pub fn to_complex(&self) -> HermitianMatrix {
        let t: Vec<(usize, usize, Complex64)> = self
            .rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |(j, v)| (i, *j, v.identity_embedding().to_c64())))
            .collect();
        HermitianMatrix::from_triplets(self.dim, &t)
    }

    /// Least common denominator of all entries.
    pub fn denominator(&self) -> BigInt {
        self.rows.iter().flatten().fold(BigInt::one(), |acc, (_, v)| acc.lcm(v.denominator()))
    }

    /// Largest |e_j(entry)| over all entries and embeddings.
    pub fn max_conjugate_entry(&self) -> f64 {
        self.rows
            .iter()
            .flatten()
            .flat_map(|(_, v)| v.embeddings_with_error().into_iter().map(|(z, e)| z.abs().to_f64() + e))
            .fold(0.0, f64::max)
            .abs()
    }
}

pub(crate) fn big_abs_f64(x: &BigInt) -> f64 {
    num_traits::ToPrimitive::to_f64(&x.abs()).unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn zero_angle_is_exact() {
        assert_eq!(phase_to_cyclotomic(&UnitPhase::radians(0.0), 3), Some(CyclotomicNumber::one(3)));
        assert_eq!(phase_to_cyclotomic(&UnitPhase::radians(0.1), 3), None);
        assert_eq!(phase_to_cyclotomic(&UnitPhase::turns(1, 3), 6), Some(CyclotomicNumber::zeta_pow(6, 2)));
    }

    #[test]
    fn scalar_parsing() {
        assert_eq!(ExactScalar::parse("1/2").unwrap(), ExactScalar::ratio(1, 2));
        assert_eq!(ExactScalar::parse("-3").unwrap(), ExactScalar::integer(-3));
        assert!(ExactScalar::parse("0.5").is_err());
        let mu = ExactScalar::parse("4-2sqrt2").unwrap();
        assert_eq!(mu, ExactScalar::plus_sqrt2(rat(4, 1), rat(-2, 1)));
        assert!((mu.to_f64() - (4.0 - 2.0 * 2f64.sqrt())).abs() < 1e-15);
        assert!(mu.is_real());
        assert_eq!(ExactScalar::parse("sqrt(2)").unwrap(), ExactScalar::plus_sqrt2(rat(0, 1), rat(1, 1)));
        assert_eq!(ExactScalar::parse("1/2 - sqrt2").unwrap(), ExactScalar::plus_sqrt2(rat(1, 2), rat(-1, 1)));
        assert_eq!(ExactScalar::parse("3*sqrt2").unwrap(), ExactScalar::plus_sqrt2(rat(0, 1), rat(3, 1)));
        assert_eq!(ExactScalar::parse("-3sqrt2").unwrap(), ExactScalar::plus_sqrt2(rat(0, 1), rat(-3, 1)));
        assert!(ExactScalar::parse("sqrt2+1").is_err());
    }

    #[test]
    fn sqrt2_squares_to_two() {
        let s = ExactScalar::plus_sqrt2(rat(0, 1), rat(1, 1)).to_cyclotomic(8);
        assert_eq!(s.mul(&s), CyclotomicNumber::from_integer(8, 2));
    }

    #[test]
    fn phase_conversion() {
        let p = UnitPhase::turns(1, 4);
        assert_eq!(phase_to_cyclotomic(&p, 8).unwrap(), CyclotomicNumber::zeta_pow(8, 2));
        assert!(phase_to_cyclotomic(&p, 6).is_none());
        assert!(phase_to_cyclotomic(&UnitPhase::radians(0.3), 4).is_none());
    }

    #[test]
    fn exact_matrix_basics() {
        let i = CyclotomicNumber::zeta_pow(4, 1);
        let m = ExactMatrix::from_triplets(2, 4, vec![(0, 1, i.clone()), (1, 0, i.conj()), (0, 0, CyclotomicNumber::one(4))]);
        assert!(m.is_hermitian());
        assert_eq!(m.shifted(&CyclotomicNumber::one(4)).get(0, 0), CyclotomicNumber::zero(4));
        assert_eq!(m.to_complex().get(0, 1), Complex64::new(0.0, 1.0));
        assert_eq!(m.lift(8).get(0, 1), CyclotomicNumber::zeta_pow(8, 2));
    }
}
