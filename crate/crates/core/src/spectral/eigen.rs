//! Householder reduction to real tridiagonal form, then implicit QL with Wilkinson shifts.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::Serialize;

use super::SpectralError;
use crate::operator::{BoundaryCondition, HermitianMatrix};
use crate::par::{self, Execution};

pub(crate) trait Scalar: Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {
    const ZERO: Self;
    fn conj(self) -> Self;
    fn norm_sqr(self) -> f64;
    fn scale(self, s: f64) -> Self;
    fn re(self) -> f64;
    /// x/|x|, or 1 for x = 0.
    fn sign(self) -> Self;
    fn from_complex(z: Complex64) -> Self;
    fn to_complex(self) -> Complex64;
}

impl Scalar for f64 {
    const ZERO: f64 = 0.0;
    fn conj(self) -> f64 {
        self
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn scale(self, s: f64) -> f64 {
        self * s
    }
    fn re(self) -> f64 {
        self
    }
    fn sign(self) -> f64 {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
    fn from_complex(z: Complex64) -> f64 {
        z.re
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Scalar for Complex64 {
    const ZERO: Complex64 = Complex64::new(0.0, 0.0);
    fn conj(self) -> Complex64 {
        Complex64::conj(&self)
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    fn scale(self, s: f64) -> Complex64 {
        self * s
    }
    fn re(self) -> f64 {
        self.re
    }
    fn sign(self) -> Complex64 {
        let n = self.norm();
        if n == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            self / n
        }
    }
    fn from_complex(z: Complex64) -> Complex64 {
        z
    }
    fn to_complex(self) -> Complex64 {
        self
    }
}

/// Sorted eigenvalues of one restricted operator.
#[derive(Clone, Debug, Serialize)]
pub struct EigenSpectrum {
    pub values: Vec<f64>,
    pub label: String,
    pub bc: Option<BoundaryCondition>,
    pub flux: Option<String>,
    /// Number of group elements N_m (the normalization of F_m).
    pub n_cells: usize,
    pub tol: f64,
    /// max |λ|, the operator norm.
    pub norm: f64,
    /// Largest residual ‖Mx − λx‖ over the sampled eigenpairs.
    pub residual: f64,
}

impl EigenSpectrum {
    pub fn from_values(mut values: Vec<f64>, tol: f64) -> Self {
        values.sort_by(f64::total_cmp);
        let norm = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let n = values.len();
        EigenSpectrum { values, label: String::new(), bc: None, flux: None, n_cells: n, tol, norm, residual: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn eps_count(&self) -> f64 {
        (self.tol * self.norm).max(1e-9)
    }

    /// #{μ ≤ λ + ε_count}.
    pub fn count(&self, lambda: f64) -> usize {
        let t = lambda + self.eps_count();
        self.values.partition_point(|&x| x <= t)
    }

    pub fn with_source(mut self, label: &str, bc: Option<BoundaryCondition>, flux: Option<String>, n_cells: usize) -> Self {
        self.label = label.to_string();
        self.bc = bc;
        self.flux = flux;
        self.n_cells = n_cells;
        self
    }
}

pub fn counting_function(spec: &EigenSpectrum, lambda: f64) -> usize {
    spec.count(lambda)
}

/// Default relative tolerance of the solver.
pub const DEFAULT_TOL: f64 = 1e-10;

pub fn hermitian_eigenvalues(m: &HermitianMatrix, tol: f64) -> Result<EigenSpectrum, SpectralError> {
    hermitian_eigenvalues_with(m, tol, Execution::default())
}

/// All eigenvalues, each within tol·‖M‖ of a true one, checked by residuals of
/// sampled eigenvectors and by the trace.
pub fn hermitian_eigenvalues_with(m: &HermitianMatrix, tol: f64, exec: Execution) -> Result<EigenSpectrum, SpectralError> {
    let scale = m.max_entry().max(f64::MIN_POSITIVE);
    if !m.is_hermitian(1e-12) {
        return Err(SpectralError::NotHermitian(m.hermiticity_defect() / scale));
    }
    if m.is_real() {
        solve::<f64>(m, tol, exec)
    } else {
        solve::<Complex64>(m, tol, exec)
    }
}

fn solve<S: Scalar>(m: &HermitianMatrix, tol: f64, exec: Execution) -> Result<EigenSpectrum, SpectralError> {
    let n = m.dim();
    if n == 0 {
        return Ok(EigenSpectrum::from_values(Vec::new(), tol));
    }
    let mut a: Vec<S> = m.to_dense().into_iter().map(S::from_complex).collect();
    let red = tridiagonalize(&mut a, n, exec);
    let mut d = red.diag.clone();
    let mut e = red.off.clone();
    ql_implicit(&mut d, &mut e)?;
    let mut spec = EigenSpectrum::from_values(d, tol);
    let norm_bound = spec.norm.max(m.row_sum_norm().min(spec.norm * 2.0)).max(f64::MIN_POSITIVE);

    let trace_gap = (spec.values.iter().sum::<f64>() - m.trace()).abs();
    if trace_gap > tol * norm_bound * (n as f64).max(1.0) + 1e-12 {
        return Err(SpectralError::ResidualTooLarge(trace_gap));
    }
    let samples = sample_indices(n);
    let mut worst: f64 = 0.0;
    for &i in &samples {
        let lam = spec.values[i];
        let y = tridiagonal_eigenvector(&red.diag, &red.off, lam);
        let x = red.back_transform(&y);
        let mx = m.matvec(&x);
        let r: f64 = mx.iter().zip(&x).map(|(p, q)| (p - q * lam).norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(r);
    }
    spec.residual = worst;
    if worst > tol * norm_bound.max(1.0) * 100.0 {
        return Err(SpectralError::ResidualTooLarge(worst));
    }
    Ok(spec)
}

fn sample_indices(n: usize) -> Vec<usize> {
    let mut v: Vec<usize> = [0, n / 4, n / 2, (3 * n) / 4, n - 1].into_iter().collect();
    v.sort();
    v.dedup();
    v
}

struct Reduction<S> {
    n: usize,
    diag: Vec<f64>,
    off: Vec<f64>,
    /// Unit Householder vectors; reflector k acts on coordinates k+1..n.
    reflectors: Vec<Vec<S>>,
    /// Diagonal phases turning the complex tridiagonal into the real one.
    phases: Vec<S>,
}

impl<S: Scalar> Reduction<S> {
    /// Maps an eigenvector of the real tridiagonal back to one of the input matrix.
    fn back_transform(&self, y: &[f64]) -> Vec<Complex64> {
        let mut x: Vec<S> = y.iter().zip(&self.phases).map(|(v, p)| p.scale(*v)).collect();
        for (k, v) in self.reflectors.iter().enumerate().rev() {
            if v.is_empty() {
                continue;
            }
            let tail = &mut x[k + 1..];
            let mut dot = S::ZERO;
            for (vi, xi) in v.iter().zip(tail.iter()) {
                dot = dot + vi.conj() * *xi;
            }
            let two = dot.scale(2.0);
            for (vi, xi) in v.iter().zip(tail.iter_mut()) {
                *xi = *xi - *vi * two;
            }
        }
        let _ = self.n;
        x.into_iter().map(S::to_complex).collect()
    }
}

/// In-place reduction of the row-major Hermitian `a`. Only the trailing block is updated.
fn tridiagonalize<S: Scalar>(a: &mut [S], n: usize, exec: Execution) -> Reduction<S> {
    let mut reflectors: Vec<Vec<S>> = Vec::with_capacity(n.saturating_sub(1));
    let mut sub: Vec<S> = vec![S::ZERO; n.saturating_sub(1)];
    let big = n >= 96;
    for k in 0..n.saturating_sub(1) {
        // x = A[k+1.., k]
        let x: Vec<S> = (k + 1..n).map(|i| a[i * n + k]).collect();
        let xnorm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let tail_norm = x.iter().skip(1).map(|v| v.norm_sqr()).sum::<f64>();
        if xnorm == 0.0 || tail_norm == 0.0 {
            sub[k] = x[0];
            reflectors.push(Vec::new());
            continue;
        }
        let alpha = -(x[0].sign().scale(xnorm));
        let mut v = x;
        v[0] = v[0] - alpha;
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in v.iter_mut() {
            *z = z.scale(1.0 / vn);
        }
        sub[k] = alpha;
        let m = n - k - 1;
        let off = k + 1;
        // p = A22 v
        let p: Vec<S> = if big {
            par::map_range(exec, m, |i| row_dot(&a[(off + i) * n + off..(off + i) * n + n], &v))
        } else {
            (0..m).map(|i| row_dot(&a[(off + i) * n + off..(off + i) * n + n], &v)).collect()
        };
        // β = v*p (real), q = 2p − 2βv; A22 ← A22 − v q* − q v*.
        let beta: f64 = v.iter().zip(&p).map(|(vi, pi)| (vi.conj() * *pi).re()).sum();
        let q: Vec<S> = p.iter().zip(&v).map(|(pi, vi)| (*pi - vi.scale(beta)).scale(2.0)).collect();
        let update = |i: usize, row: &mut [S]| {
            let vi = v[i];
            let qi = q[i];
            for j in 0..m {
                row[off + j] = row[off + j] - vi * q[j].conj() - qi * v[j].conj();
            }
        };
        let block = &mut a[off * n..];
        if big {
            par::for_each_chunk_mut(exec, block, n, update);
        } else {
            for (i, row) in block.chunks_mut(n).enumerate() {
                update(i, row);
            }
        }
        reflectors.push(v);
    }
    let diag: Vec<f64> = (0..n).map(|i| a[i * n + i].re()).collect();
    let mut phases = vec![S::ZERO; n];
    phases[0] = S::from_complex(Complex64::new(1.0, 0.0));
    let mut off = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n.saturating_sub(1) {
        let e = sub[k];
        off.push(e.norm_sqr().sqrt());
        phases[k + 1] = phases[k] * e.sign();
    }
    Reduction { n, diag, off, reflectors, phases }
}

fn row_dot<S: Scalar>(row: &[S], v: &[S]) -> S {
    let mut acc = S::ZERO;
    for (a, b) in row.iter().zip(v) {
        acc = acc + *a * *b;
    }
    acc
}

/// Eigenvalues of the symmetric tridiagonal (d, e) into `d`, by implicit QL with
/// Wilkinson shifts.
pub(crate) fn ql_implicit(d: &mut [f64], e: &mut [f64]) -> Result<(), SpectralError> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    let mut e: Vec<f64> = e.iter().copied().chain(std::iter::once(0.0)).collect();
    let cap = 60 * n;
    let mut total = 0;
    // Off-diagonals below eps·‖T‖ perturb eigenvalues by no more than that.
    let floor = f64::EPSILON * d.iter().chain(e.iter()).fold(0.0f64, |m, x| m.max(x.abs()));
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            total += 1;
            if iter > 60 || total > cap {
                return Err(SpectralError::NoConvergence(total));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut early = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Unit eigenvector of the symmetric tridiagonal for an approximate eigenvalue, by
/// two steps of inverse iteration with a pivoted LU.
fn tridiagonal_eigenvector(d: &[f64], e: &[f64], lambda: f64) -> Vec<f64> {
    let n = d.len();
    if n == 1 {
        return vec![1.0];
    }
    let scale = d.iter().chain(e).fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    let shift = lambda + scale * 1e-13;
    let mut y: Vec<f64> = (0..n).map(|i| 1.0 + 0.37 * ((i * 7919) % 101) as f64 / 101.0).collect();
    for _ in 0..3 {
        y = solve_tridiagonal(d, e, shift, &y, scale);
        let nrm = y.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in y.iter_mut() {
            *x /= nrm;
        }
    }
    y
}

/// (T − σI) x = b with partial pivoting (rows i and i+1 may swap).
fn solve_tridiagonal(d: &[f64], e: &[f64], sigma: f64, b: &[f64], scale: f64) -> Vec<f64> {
    let n = d.len();
    // Upper factor has up to two superdiagonals.
    let mut u0: Vec<f64> = d.iter().map(|x| x - sigma).collect();
    let mut u1: Vec<f64> = e.iter().copied().chain(std::iter::once(0.0)).collect();
    let mut u2 = vec![0.0; n];
    let mut lower = e.to_vec();
    let mut rhs = b.to_vec();
    let tiny = scale * f64::EPSILON;
    for i in 0..n - 1 {
        if lower[i].abs() > u0[i].abs() {
            // Swap rows i and i+1, then eliminate from the new row i+1.
            let (a0, a1) = (u0[i], u1[i]);
            let (b1, b2) = (u0[i + 1], u1[i + 1]);
            u0[i] = lower[i];
            u1[i] = b1;
            u2[i] = b2;
            let factor = a0 / u0[i];
            u0[i + 1] = a1 - factor * b1;
            u1[i + 1] = -factor * b2;
            rhs.swap(i, i + 1);
            rhs[i + 1] -= factor * rhs[i];
            lower[i] = factor;
        } else {
            let pivot = if u0[i] == 0.0 { tiny } else { u0[i] };
            u0[i] = pivot;
            let factor = lower[i] / pivot;
            u0[i + 1] -= factor * u1[i];
            rhs[i + 1] -= factor * rhs[i];
            lower[i] = factor;
        }
    }
    if u0[n - 1] == 0.0 {
        u0[n - 1] = tiny;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        if i + 1 < n {
            s -= u1[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= u2[i] * x[i + 2];
        }
        x[i] = s / if u0[i] == 0.0 { tiny } else { u0[i] };
    }
    x
}
