//! Run configuration: parsed once from the command line, hashed into every artifact.

use std::str::FromStr;

use harper_core::algebraic::ExactScalar;
use harper_core::exhaustion::{boxes_zd, cubes_zd, FolnerSequence};
use harper_core::graph::{GammaGraph, GraphDescriptor};
use harper_core::magnetic::{landau_periodic_weight, trivial_weight, WeightFunction};
use harper_core::operator::{BoundaryCondition, OperatorBounds, OperatorKind};
use harper_core::spectral::linear_grid;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoxKind {
    /// Cubes [0, s)ᵈ of side s.
    Cubes,
    /// Centered boxes [−r, r]ᵈ.
    Radii,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub kind: BoxKind,
    pub values: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum CommandParams {
    Density,
    Butterfly { q_max: i64 },
    Gaps { eta: f64 },
    Fkdet { mu: String, upper: Option<f64> },
    Moments { k: usize, operator: OperatorKind },
    VerifyAlgebraic { lambda: String },
    Report,
    ExportMatrix { operator: OperatorKind },
}

/// Everything that determines the outputs. Output paths and thread counts are left out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub graph: String,
    pub flux: String,
    pub bc: BoundaryCondition,
    pub boxes: Option<BoxSpec>,
    pub grid: Option<GridSpec>,
    pub tol: f64,
    pub exact: bool,
    pub params: CommandParams,
}

impl RunConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of the JSON form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn graph(&self) -> Result<GammaGraph, CliError> {
        GraphDescriptor::parse(&self.graph).and_then(|d| d.build()).map_err(|e| CliError::Config(format!("--graph: {e}")))
    }

    pub fn flux_ratio(&self) -> Result<Ratio<i64>, CliError> {
        parse_flux(&self.flux)
    }

    pub fn weight(&self, g: &GammaGraph) -> Result<WeightFunction, CliError> {
        weight_for(g, self.flux_ratio()?)
    }

    pub fn sequence(&self, g: &GammaGraph) -> Result<FolnerSequence, CliError> {
        let spec = self.boxes.as_ref().ok_or_else(|| CliError::Config("--boxes (or --radii) is required".into()))?;
        let seq = match spec.kind {
            BoxKind::Cubes => cubes_zd(g.dim(), &spec.values),
            BoxKind::Radii => boxes_zd(g.dim(), &spec.values),
        };
        seq.map_err(|e| CliError::Config(format!("boxes: {e}")))
    }

    pub fn grid_values(&self, g: &GammaGraph) -> Vec<f64> {
        match &self.grid {
            Some(s) => linear_grid(s.lo, s.hi, s.step),
            None => linear_grid(0.0, OperatorBounds::for_graph(g).norm_bound_sq, 0.05),
        }
    }

    pub fn exact_scalar(s: &str, what: &str) -> Result<ExactScalar, CliError> {
        ExactScalar::parse(s).map_err(|e| CliError::Config(format!("{what}: {e}")))
    }
}

pub fn weight_for(g: &GammaGraph, theta: Ratio<i64>) -> Result<WeightFunction, CliError> {
    if theta == Ratio::from_integer(0) {
        return Ok(trivial_weight(g));
    }
    landau_periodic_weight(g, theta).map_err(|e| CliError::Config(format!("--flux: {e}")))
}

/// Reduced fractions or integers only; decimals would lose the rationality of σ.
pub fn parse_flux(s: &str) -> Result<Ratio<i64>, CliError> {
    Ratio::<i64>::from_str(s.trim()).map_err(|_| CliError::Config(format!("--flux must be a fraction p/q, got {s:?}")))
}

/// `a..b` or `a..b..s`, inclusive of b.
pub fn parse_range(s: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::Config(format!("expected a..b[..s], got {s:?}"));
    let parts: Vec<&str> = s.trim().split("..").collect();
    let num = |x: &str| x.trim().parse::<u64>().map_err(|_| bad());
    let (a, b, step) = match parts.as_slice() {
        [a] => (num(a)?, num(a)?, 1),
        [a, b] => (num(a)?, num(b)?, 1),
        [a, b, c] => (num(a)?, num(b)?, num(c)?),
        _ => return Err(bad()),
    };
    if step == 0 || b < a {
        return Err(bad());
    }
    Ok((a..=b).step_by(step as usize).collect())
}

/// `lo:hi:step` with lo < hi and step > 0.
pub fn parse_grid(s: &str) -> Result<GridSpec, CliError> {
    let bad = || CliError::Config(format!("expected lo:hi:step, got {s:?}"));
    let v: Vec<f64> = s.split(':').map(|x| x.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?;
    match v.as_slice() {
        [lo, hi, step] if lo < hi && *step > 0.0 && v.iter().all(|x| x.is_finite()) => Ok(GridSpec { lo: *lo, hi: *hi, step: *step }),
        _ => Err(bad()),
    }
}
