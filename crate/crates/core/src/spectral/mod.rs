//! Eigenvalues of restricted operators, the counting functions F_m and their limits.

pub mod eigen;
pub mod indicator;

use serde::Serialize;
use thiserror::Error;

use crate::exhaustion::{restriction, FolnerSequence};
use crate::graph::GammaGraph;
use crate::magnetic::WeightFunction;
use crate::operator::{restrict_operator, BoundaryCondition, OperatorBounds, OperatorKind};
use crate::par::{self, Execution};

pub use eigen::{counting_function, hermitian_eigenvalues, hermitian_eigenvalues_with, EigenSpectrum, DEFAULT_TOL};
pub use indicator::{indicator_polynomial, moment_density_estimate, ChebyshevPolynomial};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("matrix is not Hermitian (relative defect {0:e})")]
    NotHermitian(f64),
    #[error("eigenvalue iteration did not converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("eigenvalue check failed, residual {0:e}")]
    ResidualTooLarge(f64),
    #[error("at least 3 columns are needed, got {0}")]
    InsufficientData(usize),
    #[error("no certified polynomial up to degree {0}")]
    ConstructionFailed(usize),
    #[error("λ grid must be sorted and nonempty")]
    BadGrid,
}

/// λ values lo, lo+step, …, up to hi (inclusive within rounding).
pub fn linear_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0 && hi >= lo);
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

/// One F_m column.
#[derive(Clone, Debug, Serialize)]
pub struct DensityColumn {
    pub label: String,
    pub n_cells: usize,
    pub vertices: usize,
    /// #∂₁X_m / N_m, the error heuristic for this column.
    pub boundary_ratio: f64,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityTable {
    pub grid: Vec<f64>,
    pub columns: Vec<DensityColumn>,
    /// Fundamental domain size, the value of every F_m above K².
    pub a: usize,
    pub k_sq: f64,
    /// Rational σ allows pointwise limits; otherwise only right limits are claimed.
    pub rational: bool,
    #[serde(skip)]
    pub spectra: Vec<EigenSpectrum>,
}

impl DensityTable {
    pub fn from_spectra(grid: Vec<f64>, spectra: Vec<EigenSpectrum>, boundary_ratios: Vec<f64>, a: usize, k_sq: f64, rational: bool) -> Self {
        let columns = spectra
            .iter()
            .zip(&boundary_ratios)
            .map(|(s, &r)| DensityColumn {
                label: s.label.clone(),
                n_cells: s.n_cells,
                vertices: s.len(),
                boundary_ratio: r,
                values: grid.iter().map(|&l| s.count(l) as f64 / s.n_cells as f64).collect(),
            })
            .collect();
        DensityTable { grid, columns, a, k_sq, rational, spectra }
    }

    /// F_m(λ) for column m at any λ.
    pub fn f_at(&self, m: usize, lambda: f64) -> f64 {
        let s = &self.spectra[m];
        s.count(lambda) as f64 / s.n_cells as f64
    }

    /// F̄ = max over stored m.
    pub fn fbar(&self) -> Vec<f64> {
        (0..self.grid.len()).map(|i| self.columns.iter().map(|c| c.values[i]).fold(f64::NEG_INFINITY, f64::max)).collect()
    }

    /// F̲ = min over stored m.
    pub fn funder(&self) -> Vec<f64> {
        (0..self.grid.len()).map(|i| self.columns.iter().map(|c| c.values[i]).fold(f64::INFINITY, f64::min)).collect()
    }

    /// F̄⁺(λ_i), read off at the next grid point.
    pub fn fbar_plus(&self) -> Vec<f64> {
        shift_right(&self.fbar())
    }

    pub fn funder_plus(&self) -> Vec<f64> {
        shift_right(&self.funder())
    }
}

fn shift_right(v: &[f64]) -> Vec<f64> {
    (0..v.len()).map(|i| v[(i + 1).min(v.len() - 1)]).collect()
}

/// Spectrum of one restricted operator.
pub fn restricted_spectrum(
    g: &GammaGraph,
    sigma: &WeightFunction,
    seq: &FolnerSequence,
    m: usize,
    bc: BoundaryCondition,
    kind: OperatorKind,
    tol: f64,
    exec: Execution,
) -> Result<EigenSpectrum, SpectralError> {
    let x = restriction(g, seq, m);
    let mat = restrict_operator(g, sigma, &x, bc, kind);
    let flux = sigma.flux().map(|f| f.to_string());
    Ok(hermitian_eigenvalues_with(&mat, tol, exec)?.with_source(x.label(), Some(bc), flux, x.n_cells()))
}

/// Assembles, diagonalizes and tabulates F_m = E_m/N_m for every set of the sequence.
pub fn density_sequence(
    g: &GammaGraph,
    sigma: &WeightFunction,
    seq: &FolnerSequence,
    bc: BoundaryCondition,
    grid: &[f64],
    tol: f64,
    exec: Execution,
) -> Result<DensityTable, SpectralError> {
    if grid.is_empty() || grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(SpectralError::BadGrid);
    }
    let idx: Vec<usize> = (0..seq.len()).collect();
    let results = par::map(exec, &idx, |&m| {
        let x = restriction(g, seq, m);
        let ratio = x.delta_boundary(g, 1).total() as f64 / x.n_cells() as f64;
        restricted_spectrum(g, sigma, seq, m, bc, OperatorKind::Dml, tol, exec).map(|s| (s, ratio))
    });
    let mut spectra = Vec::new();
    let mut ratios = Vec::new();
    for r in results {
        let (s, q) = r?;
        spectra.push(s);
        ratios.push(q);
    }
    Ok(DensityTable::from_spectra(grid.to_vec(), spectra, ratios, g.domain_size(), OperatorBounds::for_graph(g).norm_bound_sq, sigma.is_rational()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Converged,
    Oscillating,
    Insufficient,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitClaim {
    /// F(λ) = lim F_m(λ), available for rational σ.
    Pointwise,
    /// Only the right limits F̄⁺ = F̲⁺ are claimed.
    RightLimit,
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityEstimate {
    pub lambda: f64,
    pub estimate: f64,
    pub error_bar: f64,
    pub oscillation: f64,
    pub verdict: Verdict,
    pub claim: LimitClaim,
}

/// Last F_m(λ), with an error bar from the final boundary ratio and the spread of the
/// last three columns.
pub fn estimate_density(table: &DensityTable, lambda: f64) -> Result<DensityEstimate, SpectralError> {
    let n = table.spectra.len();
    if n < 3 {
        return Err(SpectralError::InsufficientData(n));
    }
    let tail: Vec<f64> = (n - 3..n).map(|m| table.f_at(m, lambda)).collect();
    let osc = tail.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - tail.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let ratio = table.columns[n - 1].boundary_ratio;
    let verdict = if ratio > 0.5 {
        Verdict::Insufficient
    } else if osc <= ratio {
        Verdict::Converged
    } else {
        Verdict::Oscillating
    };
    Ok(DensityEstimate {
        lambda,
        estimate: tail[2],
        error_bar: osc + ratio,
        oscillation: osc,
        verdict,
        claim: if table.rational { LimitClaim::Pointwise } else { LimitClaim::RightLimit },
    })
}

/// Sorted union of several spectra, points within `tol` merged (with multiplicities).
#[derive(Clone, Debug, Serialize)]
pub struct UnionSpectrum {
    pub points: Vec<(f64, usize)>,
}

impl UnionSpectrum {
    pub fn min(&self) -> Option<f64> {
        self.points.first().map(|p| p.0)
    }

    pub fn max(&self) -> Option<f64> {
        self.points.last().map(|p| p.0)
    }

    /// Distance from x to the nearest point.
    pub fn distance(&self, x: f64) -> f64 {
        let i = self.points.partition_point(|p| p.0 < x);
        let mut d = f64::INFINITY;
        if i < self.points.len() {
            d = d.min(self.points[i].0 - x);
        }
        if i > 0 {
            d = d.min(x - self.points[i - 1].0);
        }
        d
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }
}

pub const UNION_MERGE_TOL: f64 = 1e-8;

pub fn union_restricted_spectra(spectra: &[EigenSpectrum]) -> UnionSpectrum {
    let mut all: Vec<f64> = spectra.iter().flat_map(|s| s.values.iter().copied()).collect();
    all.sort_by(f64::total_cmp);
    let mut points: Vec<(f64, usize)> = Vec::new();
    for x in all {
        match points.last_mut() {
            Some((v, c)) if x - *v <= UNION_MERGE_TOL => *c += 1,
            _ => points.push((x, 1)),
        }
    }
    UnionSpectrum { points }
}
