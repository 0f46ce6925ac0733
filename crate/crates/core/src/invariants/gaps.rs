use serde::Serialize;

use super::InvariantsError;
use crate::spectral::DensityTable;

pub const DEFAULT_ETA_GAP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapVerdict {
    Gap,
    NoGap,
    Undecided,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    /// Nonincreasing over the last three sets, up to one eigenvalue.
    Decreasing,
    Increasing,
}

impl std::fmt::Display for GapVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GapVerdict::Gap => "gap",
            GapVerdict::NoGap => "no-gap",
            GapVerdict::Undecided => "undecided",
        })
    }
}

impl std::fmt::Display for Trend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Trend::Decreasing => "decreasing",
            Trend::Increasing => "increasing",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GapInterval {
    pub lambda1: f64,
    pub lambda2: f64,
    /// F_m(λ₂) − F_m(λ₁) for every set.
    pub masses: Vec<f64>,
    pub mass_last: f64,
    pub trend: Trend,
    pub verdict: GapVerdict,
    /// Neither endpoint touches the ends of the grid.
    pub interior: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub eta_gap: f64,
    /// δ = 1 boundary ratio of the last set, the scale below which a mass counts as boundary.
    pub boundary_ratio: f64,
    /// For rational σ the limit is pointwise, so a gap verdict concerns F itself.
    pub pointwise: bool,
    pub intervals: Vec<GapInterval>,
}

impl GapReport {
    pub fn gaps(&self) -> impl Iterator<Item = &GapInterval> {
        self.intervals.iter().filter(|g| g.verdict == GapVerdict::Gap)
    }

    pub fn interior_gaps(&self) -> impl Iterator<Item = &GapInterval> {
        self.gaps().filter(|g| g.interior)
    }

    /// Whether λ lies strictly inside an interval judged a gap.
    pub fn in_gap(&self, lambda: f64) -> bool {
        self.gaps().any(|g| g.lambda1 < lambda && lambda < g.lambda2)
    }
}

/// A cell [λ_i, λ_{i+1}] is quiet when its increment in the last column is at most η_gap
/// and the increments do not grow (beyond one eigenvalue) over the last three columns.
/// Maximal runs of quiet cells are the candidate intervals.
pub fn spectral_gap_scan(table: &DensityTable, eta_gap: f64) -> Result<GapReport, InvariantsError> {
    let cols = table.spectra.len();
    if cols < 3 {
        return Err(InvariantsError::InsufficientData(cols));
    }
    let grid: Vec<f64> = table.grid.iter().copied().filter(|&x| (0.0..=table.k_sq).contains(&x)).collect();
    let cells = grid.len().saturating_sub(1);
    if cells < 8 {
        return Err(InvariantsError::GridTooCoarse(cells));
    }
    let last3: Vec<usize> = (cols - 3..cols).collect();
    let unit = |m: usize| 1.0 / table.spectra[m].n_cells as f64;
    let f: Vec<Vec<f64>> = (0..cols).map(|m| grid.iter().map(|&x| table.f_at(m, x)).collect()).collect();
    let quiet: Vec<bool> = (0..cells)
        .map(|i| {
            let inc: Vec<f64> = last3.iter().map(|&m| f[m][i + 1] - f[m][i]).collect();
            inc[2] <= eta_gap && (0..2).all(|j| inc[j + 1] <= inc[j] + unit(last3[j + 1]) + 1e-15)
        })
        .collect();
    let ratio = table.columns[cols - 1].boundary_ratio;
    let mut intervals = Vec::new();
    let mut start = None;
    for i in 0..=cells {
        let q = i < cells && quiet[i];
        match (q, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                let (a, b) = (s, i);
                let masses: Vec<f64> = (0..cols).map(|m| f[m][b] - f[m][a]).collect();
                let t = &masses[cols - 3..];
                let trend = if (0..2).all(|j| t[j + 1] <= t[j] + unit(last3[j + 1]) + 1e-15) { Trend::Decreasing } else { Trend::Increasing };
                let mass_last = masses[cols - 1];
                let verdict = if mass_last >= ratio {
                    GapVerdict::NoGap
                } else if trend == Trend::Decreasing {
                    GapVerdict::Gap
                } else {
                    GapVerdict::Undecided
                };
                intervals.push(GapInterval { lambda1: grid[a], lambda2: grid[b], masses, mass_last, trend, verdict, interior: a > 0 && b < cells });
                start = None;
            }
            _ => {}
        }
    }
    Ok(GapReport { eta_gap, boundary_ratio: ratio, pointwise: table.rational, intervals })
}
