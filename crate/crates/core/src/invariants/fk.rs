use serde::Serialize;

use super::{spectral_gap_scan, InvariantsError, DEFAULT_ETA_GAP};
use crate::algebraic::{exact_charpoly, qzero_lower_bound, AlgebraicBoundParams, ExactScalar};
use crate::exhaustion::{restriction, FolnerSequence};
use crate::graph::GammaGraph;
use crate::magnetic::WeightFunction;
use crate::operator::{restrict_dml_exact, BoundaryCondition, OperatorBounds};
use crate::par::Execution;
use crate::spectral::{density_sequence, linear_grid, union_restricted_spectra, EigenSpectrum, DEFAULT_TOL};

/// Log-spacing of the quadrature in u = log t.
const QUAD_STEP: f64 = 1e-3;

#[derive(Clone, Debug, Serialize)]
pub struct FkRow {
    pub label: String,
    pub n_cells: usize,
    /// (1/N_m)·log|det′(Δ^{(m)} − μ)|.
    pub logdet: f64,
    /// Eigenvalues of Δ^{(m)} − μ with |λ| < ε_count, left out of det′.
    pub excluded: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CutoffValue {
    pub cutoff: f64,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FkEstimate {
    pub mu: f64,
    pub upper: f64,
    /// Integration by parts against the last counting function, at the smallest cutoff.
    pub logdet_stieltjes: f64,
    /// Modified determinant of the last set.
    pub logdet_moddet: f64,
    /// Bound for the trapezoid error of the Stieltjes route.
    pub quadrature_error: f64,
    /// Stieltjes value as the lower cutoff shrinks.
    pub cutoffs: Vec<CutoffValue>,
    pub per_m: Vec<FkRow>,
    pub det: f64,
}

/// ∫_{0⁺<|λ|≤L} log|λ| dG(λ) for G the spectral distribution of Δ − μ, by two routes over
/// the given restricted spectra.
pub fn fk_determinant(spectra: &[EigenSpectrum], mu: f64, upper: f64) -> Result<FkEstimate, InvariantsError> {
    let last = spectra.last().ok_or(InvariantsError::InsufficientData(0))?;
    let per_m: Vec<FkRow> = spectra.iter().map(|s| moddet(s, mu)).collect();
    for s in spectra {
        let top = s.values.iter().fold(0.0f64, |m, x| m.max((x - mu).abs()));
        if top >= upper {
            return Err(InvariantsError::Precondition(format!("L = {upper} does not exceed ‖Δ − μ‖ ≥ {top}")));
        }
    }
    let v: Vec<f64> = per_m.iter().map(|r| r.logdet).collect();
    if v.len() >= 3 {
        let n = v.len();
        let (d1, d2) = (v[n - 3] - v[n - 2], v[n - 2] - v[n - 1]);
        if d1 > 0.0 && d2 >= d1 && d2 > 1e-2 {
            return Err(InvariantsError::DivergentEstimate(v));
        }
    }

    let eps = last.eps_count();
    let mut abs: Vec<f64> = last.values.iter().map(|x| (x - mu).abs()).filter(|&x| x >= eps).collect();
    abs.sort_by(f64::total_cmp);
    let n = last.n_cells as f64;
    let mass = |t: f64| abs.partition_point(|&x| x <= t) as f64 / n;
    let stieltjes = |a: f64| -> f64 {
        // (log b)·M(b) − (log a)·M(a) − ∫_a^b M(t)/t dt, with t = e^u.
        let (ua, ub) = (a.ln(), upper.ln());
        let steps = ((ub - ua) / QUAD_STEP).ceil().max(1.0) as usize;
        let du = (ub - ua) / steps as f64;
        let mut integral = 0.5 * (mass(a) + mass(upper));
        for k in 1..steps {
            integral += mass((ua + k as f64 * du).exp());
        }
        upper.ln() * mass(upper) - a.ln() * mass(a) - integral * du
    };
    let mut cutoffs = Vec::new();
    let mut c = 0.1;
    while c > eps {
        cutoffs.push(CutoffValue { cutoff: c, value: stieltjes(c) });
        c /= 10.0;
    }
    let logdet_stieltjes = stieltjes(eps);
    cutoffs.push(CutoffValue { cutoff: eps, value: logdet_stieltjes });
    let logdet_moddet = per_m.last().map(|r| r.logdet).unwrap_or(0.0);
    Ok(FkEstimate {
        mu,
        upper,
        logdet_stieltjes,
        logdet_moddet,
        quadrature_error: 0.5 * QUAD_STEP * mass(upper),
        cutoffs,
        per_m,
        det: logdet_moddet.exp(),
    })
}

fn moddet(s: &EigenSpectrum, mu: f64) -> FkRow {
    let eps = s.eps_count();
    let mut excluded = Vec::new();
    let mut sum = 0.0;
    for &x in &s.values {
        let y = x - mu;
        if y.abs() < eps {
            excluded.push(y);
        } else {
            sum += y.abs().ln();
        }
    }
    FkRow { label: s.label.clone(), n_cells: s.n_cells, logdet: sum / s.n_cells as f64, excluded }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PositivityCondition {
    /// μ outside the spectrum of Δ_σ.
    NotInSpectrum,
    Zero,
    /// μ algebraic and not an eigenvalue of any Δ^{(m)}.
    OutsideRestrictedSpectra,
}

#[derive(Clone, Debug, Serialize)]
pub struct PositivityReport {
    pub mu: String,
    pub condition: Option<PositivityCondition>,
    pub in_gap: bool,
    pub is_zero: bool,
    /// Per set, whether q_{m,μ}(0) ≠ 0; None past the exact size cap.
    pub exact_excluded: Vec<Option<bool>>,
    /// −h·a·log Q.
    pub lower_bound: f64,
    pub estimate: FkEstimate,
    pub respects_bound: bool,
    /// (1/N_m)·log|det′| ≥ −h·a·log Q − (h/N_m)·log(aN_m) for every set.
    pub per_m_bounds_hold: bool,
}

/// Exact charpolys are only formed up to this many vertices.
pub const EXACT_DIM_CAP: usize = 64;

/// Classifies μ against the sufficient conditions for det(Δ_σ − μ) > 0 and compares the
/// numerical log-determinant with the theoretical lower bound.
pub fn fk_positivity_probe(
    g: &GammaGraph,
    sigma: &WeightFunction,
    seq: &FolnerSequence,
    bc: BoundaryCondition,
    mu: &ExactScalar,
    exec: Execution,
) -> Result<PositivityReport, InvariantsError> {
    let order = sigma.rational_order().ok_or(InvariantsError::Algebraic(crate::algebraic::AlgebraicError::NotRational))? as u64;
    if !mu.is_real() {
        return Err(InvariantsError::Precondition("μ must be real".into()));
    }
    let bounds = OperatorBounds::for_graph(g);
    let k_sq = bounds.norm_bound_sq;
    let mu_f = mu.to_f64();
    let grid = linear_grid(0.0, k_sq, k_sq / 160.0);
    let table = density_sequence(g, sigma, seq, bc, &grid, DEFAULT_TOL, exec)?;
    let is_zero = mu.as_rational().is_some_and(|q| num_traits::Zero::is_zero(&q));
    let in_gap = if mu_f < 0.0 || mu_f > k_sq {
        true
    } else {
        seq.len() >= 3 && spectral_gap_scan(&table, DEFAULT_ETA_GAP)?.in_gap(mu_f)
    };
    let exact_excluded: Vec<Option<bool>> = (0..seq.len())
        .map(|m| {
            let x = restriction(g, seq, m);
            if x.len() > EXACT_DIM_CAP {
                return Ok(None);
            }
            let a = restrict_dml_exact(g, sigma, &x, bc).map_err(|e| InvariantsError::Precondition(e.to_string()))?;
            let p = exact_charpoly(&a, mu, Execution::Sequential)?;
            Ok(Some(!p[0].is_zero()))
        })
        .collect::<Result<_, InvariantsError>>()?;
    let exact_all = !exact_excluded.is_empty() && exact_excluded.iter().all(|e| *e == Some(true));
    let condition = if in_gap {
        Some(PositivityCondition::NotInSpectrum)
    } else if is_zero {
        Some(PositivityCondition::Zero)
    } else if exact_all {
        Some(PositivityCondition::OutsideRestrictedSpectra)
    } else {
        None
    };
    if condition.is_none() {
        let distance = union_restricted_spectra(&table.spectra).distance(mu_f);
        return Err(InvariantsError::Undecidable { mu: mu.to_string(), distance });
    }
    let estimate = fk_determinant(&table.spectra, mu_f, k_sq + mu_f.abs() + 1.0)?;
    let a = g.domain_size();
    let per_m_bounds_hold = estimate.per_m.iter().all(|r| {
        let p = AlgebraicBoundParams::new(order, mu, &bounds, a, r.n_cells);
        let log_bound = qzero_lower_bound(&p).log10_bound() * std::f64::consts::LN_10 / r.n_cells as f64;
        r.logdet >= log_bound
    });
    let p = AlgebraicBoundParams::new(order, mu, &bounds, a, 1);
    let qb = qzero_lower_bound(&p);
    let q = qb.rational.as_ref().map_or(qb.general.q, |r| r.q.min(qb.general.q));
    let lower_bound = -(p.h as f64) * a as f64 * q.ln();
    Ok(PositivityReport {
        mu: mu.to_string(),
        condition,
        in_gap,
        is_zero,
        exact_excluded,
        lower_bound,
        respects_bound: estimate.logdet_moddet >= lower_bound,
        estimate,
        per_m_bounds_hold,
    })
}
