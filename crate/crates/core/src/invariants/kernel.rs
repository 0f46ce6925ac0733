use serde::Serialize;

use super::InvariantsError;
use crate::exhaustion::{restriction, FiniteRestriction, FolnerSequence};
use crate::graph::GammaGraph;
use crate::magnetic::WeightFunction;
use crate::operator::BoundaryCondition;
use crate::par::{self, Execution};
use crate::spectral::{restricted_spectrum, DEFAULT_TOL};

#[derive(Clone, Debug, Serialize)]
pub struct KernelRow {
    pub label: String,
    pub n_cells: usize,
    pub dim: usize,
    /// Eigenvalues below ε_count.
    pub kernel: usize,
    /// kernel / N_m.
    pub ratio: f64,
    pub components: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelReport {
    pub rows: Vec<KernelRow>,
    /// The ratio never increases from the second set on.
    pub decreasing: bool,
    /// For Neumann and trivial σ, whether the kernel equals the number of components.
    pub components_match: Option<bool>,
}

pub fn connected_components(x: &FiniteRestriction) -> usize {
    let mut parent: Vec<usize> = (0..x.len()).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for (i, j, _) in x.edges() {
        let (a, b) = (find(&mut parent, *i), find(&mut parent, *j));
        if a != b {
            parent[a] = b;
        }
    }
    (0..x.len()).filter(|&i| find(&mut parent, i) == i).count()
}

pub fn kernel_dimension_check(g: &GammaGraph, sigma: &WeightFunction, seq: &FolnerSequence, bc: BoundaryCondition, exec: Execution) -> Result<KernelReport, InvariantsError> {
    let idx: Vec<usize> = (0..seq.len()).collect();
    let rows = par::map(exec, &idx, |&m| -> Result<KernelRow, InvariantsError> {
        let x = restriction(g, seq, m);
        let s = restricted_spectrum(g, sigma, seq, m, bc, crate::operator::OperatorKind::Dml, DEFAULT_TOL, exec)?;
        let kernel = s.values.iter().filter(|v| v.abs() < s.eps_count()).count();
        Ok(KernelRow { label: x.label().to_string(), n_cells: x.n_cells(), dim: x.len(), kernel, ratio: kernel as f64 / x.n_cells() as f64, components: connected_components(&x) })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let decreasing = rows.windows(2).skip(1).all(|w| w[1].ratio <= w[0].ratio);
    let components_match = (bc == BoundaryCondition::Neumann && sigma.rational_order() == Some(1)).then(|| rows.iter().all(|r| r.kernel == r.components));
    Ok(KernelReport { rows, decreasing, components_match })
}
