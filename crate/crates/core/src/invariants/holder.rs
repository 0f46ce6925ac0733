use serde::Serialize;

use crate::algebraic::{qzero_lower_bound, AlgebraicBoundParams, ExactScalar};
use crate::operator::OperatorBounds;
use crate::spectral::DensityTable;

/// Ingredients of the explicit modulus, natural logarithms throughout.
#[derive(Clone, Debug, Serialize)]
pub struct HolderConstants {
    pub h: usize,
    pub a: usize,
    pub q: f64,
    pub k_sq: f64,
    /// h·a·log Q + a·log(K² + μ), the m → ∞ value of the per-m constant.
    pub limit: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HolderRow {
    pub label: String,
    pub n_cells: usize,
    pub epsilon: f64,
    pub increment: f64,
    /// (F_m(μ+ε) − F_m(μ))·(−log ε).
    pub product: f64,
    /// h(log aN_m + aN_m log Q)/N_m + a·log(K² + μ).
    pub constant: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HolderReport {
    pub mu: String,
    pub mu_value: f64,
    pub constants: HolderConstants,
    pub rows: Vec<HolderRow>,
    pub sup_product: f64,
    pub holds: bool,
}

/// Per-set constant for F_m(μ+ε) − F_m(μ) ≤ C_m/(−log ε), from the lower bound on |q(0)|
/// with the smaller valid Q.
pub fn holder_constant(sigma_order: u64, mu: &ExactScalar, bounds: &OperatorBounds, a: usize, n_m: usize) -> (f64, HolderConstants) {
    let params = AlgebraicBoundParams::new(sigma_order, mu, bounds, a, n_m);
    let qb = qzero_lower_bound(&params);
    let q = qb.rational.as_ref().map_or(qb.general.q, |r| r.q.min(qb.general.q));
    let (h, af, nm) = (params.h as f64, a as f64, n_m as f64);
    let tail = af * (bounds.norm_bound_sq + mu.to_f64()).ln();
    let c = h * ((af * nm).ln() + af * nm * q.ln()) / nm + tail;
    (c, HolderConstants { h: params.h, a, q, k_sq: bounds.norm_bound_sq, limit: h * af * q.ln() + tail })
}

/// Every ε must lie in (0, 1).
pub fn log_holder_check(table: &DensityTable, sigma_order: u64, mu: &ExactScalar, bounds: &OperatorBounds, epsilons: &[f64]) -> HolderReport {
    assert!(epsilons.iter().all(|&e| e > 0.0 && e < 1.0), "ε must lie in (0, 1)");
    let mu_value = mu.to_f64();
    let a = table.a;
    let mut rows = Vec::new();
    let mut constants = None;
    for (m, col) in table.columns.iter().enumerate() {
        let (c, k) = holder_constant(sigma_order, mu, bounds, a, col.n_cells);
        constants.get_or_insert(k);
        let base = table.f_at(m, mu_value);
        for &eps in epsilons {
            let increment = table.f_at(m, mu_value + eps) - base;
            rows.push(HolderRow {
                label: col.label.clone(),
                n_cells: col.n_cells,
                epsilon: eps,
                increment,
                product: increment * -eps.ln(),
                constant: c,
            });
        }
    }
    let sup_product = rows.iter().map(|r| r.product).fold(0.0, f64::max);
    let holds = rows.iter().all(|r| r.product <= r.constant);
    let constants = constants.unwrap_or_else(|| holder_constant(sigma_order, mu, bounds, a, 1).1);
    HolderReport { mu: mu.to_string(), mu_value, constants, rows, sup_product, holds }
}
