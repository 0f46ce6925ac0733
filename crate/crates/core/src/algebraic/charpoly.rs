use num_integer::Integer;

use super::{AlgebraicError, CyclotomicNumber, ExactMatrix, ExactScalar};
use crate::par::{self, Execution};

/// det(t − A) by Faddeev–LeVerrier, lowest degree first, monic of degree N.
/// Only divisions by 1..N occur.
pub fn unshifted_charpoly(a: &ExactMatrix, exec: Execution) -> Vec<CyclotomicNumber> {
    let n = a.dim();
    let q = a.modulus();
    let zero = CyclotomicNumber::zero(q);
    let mut coeffs = vec![zero.clone(); n + 1];
    coeffs[n] = CyclotomicNumber::one(q);
    if n == 0 {
        return coeffs;
    }
    // M_1 = I, kept dense.
    let mut m: Vec<Vec<CyclotomicNumber>> = (0..n)
        .map(|i| {
            let mut row = vec![zero.clone(); n];
            row[i] = CyclotomicNumber::one(q);
            row
        })
        .collect();
    for k in 1..=n {
        // P = A·M_k, row i = Σ_j A(i, j)·M_k(j, ·).
        let p: Vec<Vec<CyclotomicNumber>> = par::map_range(exec, n, |i| {
            let mut row = vec![zero.clone(); n];
            for (j, aij) in &a.rows()[i] {
                for (c, mjc) in m[*j].iter().enumerate() {
                    if !mjc.is_zero() {
                        row[c] = row[c].add(&aij.mul(mjc));
                    }
                }
            }
            row
        });
        let trace = (0..n).fold(zero.clone(), |acc, i| acc.add(&p[i][i]));
        let c = trace.div_integer(-(k as i64));
        coeffs[n - k] = c.clone();
        if k < n {
            m = p;
            for (i, row) in m.iter_mut().enumerate() {
                row[i] = row[i].add(&c);
            }
        }
    }
    coeffs
}

/// Coefficients of P(t + λ) given those of P.
pub fn shift_polynomial(p: &[CyclotomicNumber], lambda: &CyclotomicNumber) -> Vec<CyclotomicNumber> {
    let deg = p.len().saturating_sub(1);
    let q = lambda.modulus();
    let mut powers = vec![CyclotomicNumber::one(q)];
    for _ in 0..deg {
        let next = powers.last().unwrap().mul(lambda);
        powers.push(next);
    }
    // Pascal rows built incrementally: binom[i][j] = C(i, j).
    let mut out = vec![CyclotomicNumber::zero(q); p.len()];
    let mut binom: Vec<num_bigint::BigInt> = vec![1.into()];
    for (i, pi) in p.iter().enumerate() {
        if i > 0 {
            let mut next = vec![num_bigint::BigInt::from(1); i + 1];
            for j in 1..i {
                next[j] = &binom[j - 1] + &binom[j];
            }
            binom = next;
        }
        if pi.is_zero() {
            continue;
        }
        for j in 0..=i {
            let c = num_rational::BigRational::from_integer(binom[j].clone());
            out[j] = out[j].add(&pi.mul(&powers[i - j]).scale(&c));
        }
    }
    out
}

/// det(t − (A − λ)), lowest degree first. Hermitian A with real λ must give
/// self-conjugate coefficients; anything else is reported.
pub fn exact_charpoly(a: &ExactMatrix, lambda: &ExactScalar, exec: Execution) -> Result<Vec<CyclotomicNumber>, AlgebraicError> {
    let n = (a.modulus()).lcm(&lambda.modulus());
    let a = a.lift(n);
    let p = unshifted_charpoly(&a, exec);
    let lam = lambda.to_cyclotomic(n);
    let shifted = if lam.is_zero() { p } else { shift_polynomial(&p, &lam) };
    if lambda.is_real() && a.is_hermitian() {
        if let Some(i) = shifted.iter().position(|c| c.conj() != *c) {
            return Err(AlgebraicError::NotSelfConjugate(i));
        }
    }
    Ok(shifted)
}

/// (k, q(0)) with p(t) = t^k q(t), q(0) ≠ 0.
pub fn lowest_nonzero_coefficient(p: &[CyclotomicNumber]) -> Result<(usize, CyclotomicNumber), AlgebraicError> {
    p.iter().enumerate().find(|(_, c)| !c.is_zero()).map(|(k, c)| (k, c.clone())).ok_or(AlgebraicError::ZeroPolynomial)
}
