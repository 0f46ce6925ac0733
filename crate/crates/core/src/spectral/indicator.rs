//! Certified polynomials squeezed between χ_{[0,λ]} and the piecewise-linear f_n.

use serde::Serialize;

use super::{EigenSpectrum, SpectralError};

/// Σ c_k T_k(t) with t the affine image of [lo, hi] on [−1, 1].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChebyshevPolynomial {
    pub lo: f64,
    pub hi: f64,
    pub coeffs: Vec<f64>,
}

impl ChebyshevPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn to_t(&self, x: f64) -> f64 {
        (2.0 * x - self.lo - self.hi) / (self.hi - self.lo)
    }

    /// Clenshaw recurrence.
    pub fn eval(&self, x: f64) -> f64 {
        let t = self.to_t(x);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.coeffs.first().copied().unwrap_or(0.0)
    }

    /// d/dx, on the same interval.
    pub fn derivative(&self) -> ChebyshevPolynomial {
        let n = self.coeffs.len();
        if n <= 1 {
            return ChebyshevPolynomial { lo: self.lo, hi: self.hi, coeffs: vec![0.0] };
        }
        let mut d = vec![0.0; n + 1];
        for k in (1..n).rev() {
            d[k - 1] = d[k + 1] + 2.0 * k as f64 * self.coeffs[k];
        }
        d[0] /= 2.0;
        d.truncate(n - 1);
        let s = 2.0 / (self.hi - self.lo);
        ChebyshevPolynomial { lo: self.lo, hi: self.hi, coeffs: d.into_iter().map(|c| c * s).collect() }
    }

    /// Interpolant of `f` at the D+1 Chebyshev points of the first kind.
    pub fn interpolate(lo: f64, hi: f64, degree: usize, f: impl Fn(f64) -> f64) -> Self {
        let m = degree + 1;
        let pi = std::f64::consts::PI;
        let vals: Vec<f64> = (0..m)
            .map(|j| {
                let t = (pi * (j as f64 + 0.5) / m as f64).cos();
                f(0.5 * (hi - lo) * t + 0.5 * (hi + lo))
            })
            .collect();
        let coeffs = (0..m)
            .map(|k| {
                let s: f64 = vals.iter().enumerate().map(|(j, v)| v * (pi * k as f64 * (j as f64 + 0.5) / m as f64).cos()).sum();
                let c = 2.0 * s / m as f64;
                if k == 0 {
                    c / 2.0
                } else {
                    c
                }
            })
            .collect();
        ChebyshevPolynomial { lo, hi, coeffs }
    }

    /// A bound for sup |p| on [lo, hi] from samples at 4(D+1) Chebyshev roots.
    pub fn sup_norm_bound(&self) -> f64 {
        let d = self.degree();
        if d == 0 {
            return self.coeffs[0].abs();
        }
        let m = 4 * (d + 1);
        let pi = std::f64::consts::PI;
        let max = (0..m)
            .map(|j| {
                let t = (pi * (j as f64 + 0.5) / m as f64).cos();
                self.eval(0.5 * (self.hi - self.lo) * t + 0.5 * (self.hi + self.lo)).abs()
            })
            .fold(0.0, f64::max);
        max / (pi * d as f64 / (2.0 * m as f64)).cos()
    }
}

/// f_n(μ): 1 + 1/n up to λ, linear down to 1/n at λ + 1/n, then 1/n.
pub fn f_n(lambda: f64, n: usize, mu: f64) -> f64 {
    let inv = 1.0 / n as f64;
    if mu <= lambda {
        1.0 + inv
    } else if mu >= lambda + inv {
        inv
    } else {
        1.0 + inv - (mu - lambda) * n as f64
    }
}

/// f_n − 1/(2n) with both corners rounded by parabolas of half-width 1/(8n²).
fn target(lambda: f64, n: usize, mu: f64) -> f64 {
    let nf = n as f64;
    let w = 1.0 / (8.0 * nf * nf);
    let base = f_n(lambda, n, mu) - 0.5 / nf;
    let corner = |c: f64, jump: f64| -> f64 {
        // Slope changes by `jump` at c; the parabola matches value and slope at c ± w.
        let d = mu - c;
        if d.abs() >= w {
            0.0
        } else {
            jump * (d + w) * (d + w) / (4.0 * w) - jump * d.max(0.0)
        }
    };
    base + corner(lambda, -nf) + corner(lambda + 1.0 / nf, nf)
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub grid_spacing: f64,
    /// Upper bound for sup |p′| on [0, K²].
    pub derivative_bound: f64,
    /// min over cells of (lower bound of p) − sup χ.
    pub lower_slack: f64,
    /// min over cells of inf f_n − (upper bound of p).
    pub upper_slack: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct IndicatorPolynomial {
    pub lambda: f64,
    pub n: usize,
    pub poly: ChebyshevPolynomial,
    pub certificate: Certificate,
}

impl IndicatorPolynomial {
    pub fn eval(&self, x: f64) -> f64 {
        self.poly.eval(x)
    }
}

pub const MAX_DEGREE: usize = 8192;

/// A polynomial p with χ_{[0,λ]} < p < f_n on all of [0, K²], with its certificate.
pub fn indicator_polynomial(lambda: f64, n: usize, k_sq: f64) -> Result<IndicatorPolynomial, SpectralError> {
    assert!(n >= 1 && k_sq > 0.0);
    assert!((0.0..=k_sq).contains(&lambda), "λ must lie in [0, K²]");
    let mut degree = 32;
    while degree <= MAX_DEGREE {
        let poly = ChebyshevPolynomial::interpolate(0.0, k_sq, degree, |x| target(lambda, n, x));
        for refine in 0..3 {
            let h = k_sq / 1e4 / 4f64.powi(refine);
            match certify(&poly, lambda, n, k_sq, h) {
                Ok(certificate) => return Ok(IndicatorPolynomial { lambda, n, poly, certificate }),
                Err(CertFailure::Shape) => break,
                Err(CertFailure::Resolution) => continue,
            }
        }
        degree *= 2;
    }
    Err(SpectralError::ConstructionFailed(MAX_DEGREE))
}

enum CertFailure {
    /// The polynomial itself violates the bounds at a grid point.
    Shape,
    /// The grid is too coarse for the derivative bound.
    Resolution,
}

fn certify(p: &ChebyshevPolynomial, lambda: f64, n: usize, k_sq: f64, h: f64) -> Result<Certificate, CertFailure> {
    let mut nodes: Vec<f64> = (0..=((k_sq / h).round() as usize)).map(|i| (i as f64 * h).min(k_sq)).collect();
    nodes.push(lambda);
    let knee = lambda + 1.0 / n as f64;
    if knee < k_sq {
        nodes.push(knee);
    }
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let vals: Vec<f64> = nodes.iter().map(|&x| p.eval(x)).collect();
    let chi = |x: f64| if x <= lambda { 1.0 } else { 0.0 };
    for (x, v) in nodes.iter().zip(&vals) {
        if *v <= chi(*x) || *v >= f_n(lambda, n, *x) {
            return Err(CertFailure::Shape);
        }
    }
    let m = p.derivative().sup_norm_bound();
    let mut lower_slack = f64::INFINITY;
    let mut upper_slack = f64::INFINITY;
    for i in 0..nodes.len() - 1 {
        let (a, b) = (nodes[i], nodes[i + 1]);
        let w = b - a;
        let lo = 0.5 * (vals[i] + vals[i + 1] - w * m);
        let hi = 0.5 * (vals[i] + vals[i + 1] + w * m);
        // χ is 1 on the closed cell iff a ≤ λ; f_n is nonincreasing.
        let sup_chi = chi(a);
        let inf_f = f_n(lambda, n, b);
        lower_slack = lower_slack.min(lo - sup_chi);
        upper_slack = upper_slack.min(inf_f - hi);
    }
    if lower_slack > 0.0 && upper_slack > 0.0 {
        Ok(Certificate { grid_spacing: h, derivative_bound: m, lower_slack, upper_slack })
    } else {
        Err(CertFailure::Resolution)
    }
}

/// (1/N_m)·Tr p(Δ^{(m)}) from the eigenvalues.
pub fn moment_density_estimate(spec: &EigenSpectrum, p: &IndicatorPolynomial) -> f64 {
    spec.values.iter().map(|&x| p.eval(x)).sum::<f64>() / spec.n_cells as f64
}
