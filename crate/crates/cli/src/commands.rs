use harper_core::algebraic::{verify_lemma_qmzero, ExactScalar};
use harper_core::exhaustion::{regularity_report, restriction};
use harper_core::invariants::{fk_determinant, fk_positivity_probe, holder_constant, kernel_dimension_check, spectral_gap_scan, InvariantsError};
use harper_core::operator::{exact_moments, export_matrix, restrict_operator, MatrixHeader, OperatorBounds, OperatorKind};
use harper_core::par::{self, Execution};
use harper_core::spectral::{density_sequence, estimate_density, restricted_spectrum, DensityTable};
use num_rational::Ratio;
use serde::Serialize;

use crate::config::{weight_for, CommandParams, RunConfig};
use crate::output::{json_report, Cell, Csv, Sink};
use crate::CliError;

pub fn dispatch(config: &RunConfig, exec: Execution, sink: &Sink) -> Result<(), CliError> {
    match &config.params {
        CommandParams::Density => density(config, exec, sink),
        CommandParams::Butterfly { q_max } => butterfly(config, *q_max, exec, sink),
        CommandParams::Gaps { eta } => gaps(config, *eta, exec, sink),
        CommandParams::Fkdet { mu, upper } => fkdet(config, mu, *upper, exec, sink),
        CommandParams::Moments { k, operator } => moments(config, *k, *operator, exec, sink),
        CommandParams::VerifyAlgebraic { lambda } => verify(config, lambda, exec, sink),
        CommandParams::Report => report(config, exec, sink),
        CommandParams::ExportMatrix { operator } => export(config, *operator, sink),
    }
}

fn solver<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Solver(e.to_string())
}

fn table(config: &RunConfig, grid: &[f64], exec: Execution) -> Result<DensityTable, CliError> {
    let g = config.graph()?;
    let sigma = config.weight(&g)?;
    let seq = config.sequence(&g)?;
    density_sequence(&g, &sigma, &seq, config.bc, grid, config.tol, exec).map_err(solver)
}

#[derive(Serialize)]
struct ColumnSummary<'a> {
    label: &'a str,
    n_cells: usize,
    vertices: usize,
    boundary_ratio: f64,
}

fn column_summaries(t: &DensityTable) -> Vec<ColumnSummary<'_>> {
    t.columns.iter().map(|c| ColumnSummary { label: &c.label, n_cells: c.n_cells, vertices: c.vertices, boundary_ratio: c.boundary_ratio }).collect()
}

fn density(config: &RunConfig, exec: Execution, sink: &Sink) -> Result<(), CliError> {
    let g = config.graph()?;
    let grid = config.grid_values(&g);
    let t = table(config, &grid, exec)?;
    let mut header = vec!["lambda".to_string()];
    header.extend(t.columns.iter().map(|c| format!("F[{}]", c.label)));
    let mut csv = Csv::new(config, &header);
    for (i, &x) in t.grid.iter().enumerate() {
        let mut row = vec![Cell::F(x)];
        row.extend(t.columns.iter().map(|c| Cell::F(c.values[i])));
        csv.row(&row);
    }
    sink.emit("density.csv", &csv.into_string())?;
    if sink.dir().is_some() {
        #[derive(Serialize)]
        struct Summary<'a> {
            columns: Vec<ColumnSummary<'a>>,
            estimates: Vec<harper_core::spectral::DensityEstimate>,
        }
        let estimates = if t.spectra.len() >= 3 { t.grid.iter().map(|&x| estimate_density(&t, x)).collect::<Result<_, _>>().map_err(solver)? } else { Vec::new() };
        sink.emit("density.json", &json_report(config, &Summary { columns: column_summaries(&t), estimates }))?;
    }
    Ok(())
}

/// 0 and every reduced p/q in (0, 1) with q ≤ q_max, increasing.
pub fn farey(q_max: i64) -> Vec<Ratio<i64>> {
    let mut v = vec![Ratio::from_integer(0)];
    for q in 2..=q_max {
        for p in 1..q {
            let r = Ratio::new(p, q);
            if *r.denom() == q {
                v.push(r);
            }
        }
    }
    v.sort();
    v
}

fn butterfly(config: &RunConfig, q_max: i64, exec: Execution, sink: &Sink) -> Result<(), CliError> {
    if q_max < 1 {
        return Err(CliError::Config("--q-max must be at least 1".into()));
    }
    let g = config.graph()?;
    if g.dim() < 2 {
        return Err(CliError::Config("butterfly needs a graph over ℤᵈ with d ≥ 2".into()));
    }
    let seq = config.sequence(&g)?;
    let m = seq.len() - 1;
    let grid = config.grid_values(&g);
    let fluxes = farey(q_max);
    let columns = par::map(exec, &fluxes, |&theta| -> Result<Vec<f64>, CliError> {
        let sigma = weight_for(&g, theta)?;
        let s = restricted_spectrum(&g, &sigma, &seq, m, config.bc, OperatorKind::Dml, config.tol, Execution::Sequential).map_err(solver)?;
        Ok(grid.iter().map(|&x| s.count(x) as f64 / s.n_cells as f64).collect())
    });
    let mut csv = Csv::new(config, &["theta".into(), "lambda".into(), "F".into()]);
    for (theta, col) in fluxes.iter().zip(columns) {
        let col = col?;
        for (&x, f) in grid.iter().zip(col) {
            csv.row(&[Cell::S(theta.to_string()), Cell::F(x), Cell::F(f)]);
        }
    }
    sink.emit("butterfly.csv", &csv.into_string())
}

fn invariants_error(e: InvariantsError) -> CliError {
    match e {
        InvariantsError::GridTooCoarse(_) | InvariantsError::InsufficientData(_) | InvariantsError::Precondition(_) => CliError::Config(e.to_string()),
        _ => CliError::Solver(e.to_string()),
    }
}

fn gaps(config: &RunConfig, eta: f64, exec: Execution, sink: &Sink) -> Result<(), CliError> {
    let g = config.graph()?;
    let t = table(config, &config.grid_values(&g), exec)?;
    let r = spectral_gap_scan(&t, eta).map_err(invariants_error)?;
    let mut csv = Csv::new(config, &["lambda1", "lambda2", "mass_last", "trend", "verdict"].map(String::from));
    for i in &r.intervals {
        csv.row(&[Cell::F(i.lambda1), Cell::F(i.lambda2), Cell::F(i.mass_last), Cell::S(i.trend.to_string()), Cell::S(i.verdict.to_string())]);
    }
    sink.emit("gaps.csv", &csv.into_string())?;
    if sink.dir().is_some() {
        sink.emit("gaps.json", &json_report(config, &r))?;
    }
    Ok(())
}

fn fkdet(config: &RunConfig, mu: &str, upper: Option<f64>, exec: Execution, sink: &Sink) -> Result<(), CliError> {
    let g = config.graph()?;
    let sigma = config.weight(&g)?;
    let exact_mu = ExactScalar::parse(mu).ok();
    let mu_f = match &exact_mu {
        Some(e) => e.to_f64(),
        None => mu.parse::<f64>().map_err(|_| CliError::Config(format!("--mu: cannot parse {mu:?}")))?,
    };
    let bounds = OperatorBounds::for_graph(&g);
    let upper = upper.unwrap_or(bounds.norm_bound_sq + mu_f.abs() + 1.0);
    let t = table(config, &[0.0], exec)?;
    let lower_bound = match (sigma.rational_order(), &exact_mu) {
        (Some(n), Some(e)) if e.is_real() => {
            let (_, k) = holder_constant(n as u64, e, &bounds, g.domain_size(), 1);
            Some(-(k.h as f64) * k.a as f64 * k.q.ln())
        }
        _ => None,
    };
    #[derive(Serialize)]
    struct FkReport {
        mu: f64,
        logdet_stieltjes: Option<f64>,
        logdet_moddet: Option<f64>,
        det: f64,
        divergent: bool,
        per_m: Vec<f64>,
        lower_bound: Option<f64>,
        estimate: Option<harper_core::invariants::FkEstimate>,
        positivity: Option<harper_core::invariants::PositivityReport>,
    }
    let report = match fk_determinant(&t.spectra, mu_f, upper) {
        Ok(e) => FkReport {
            mu: mu_f,
            logdet_stieltjes: Some(e.logdet_stieltjes),
            logdet_moddet: Some(e.logdet_moddet),
            det: e.det,
            divergent: false,
            per_m: e.per_m.iter().map(|r| r.logdet).collect(),
            lower_bound,
            estimate: Some(e),
            positivity: None,
        },
        // The determinant is zero by convention when the integral diverges.
        Err(InvariantsError::DivergentEstimate(v)) => FkReport {
            mu: mu_f,
            logdet_stieltjes: None,
            logdet_moddet: None,
            det: 0.0,
            divergent: true,
            per_m: v,
            lower_bound,
            estimate: None,
            positivity: None,
        },
        Err(e) => return Err(invariants_error(e)),
    };
    let report = if config.exact {
        let e = exact_mu.ok_or_else(|| CliError::Config("--exact needs an exact --mu (p/q or a+b sqrt2)".into()))?;
        let seq = config.sequence(&g)?;
        let p = fk_positivity_probe(&g, &sigma, &seq, config.bc, &e, exec).map_err(invariants_error)?;
        FkReport { positivity: Some(p), ..report }
    } else {
        report
    };
    sink.emit("fkdet.json", &json_report(config, &report))
}

fn moments(config: &RunConfig, k: usize, operator: OperatorKind, exec: Execution, sink: &Sink) -> Result<(), CliError> {
    let g = config.graph()?;
    let sigma = config.weight(&g)?;
    if config.exact && !sigma.is_rational() {
        return Err(CliError::Config("exact moments need a rational weight".into()));
    }
    let rows = exact_moments(&g, &sigma, operator, k, exec);
    let mut csv = Csv::new(config, &["k", "exact_value", "float_value"].map(String::from));
    for r in rows {
        csv.row(&[Cell::S(r.k.to_string()), Cell::S(r.exact.unwrap_or_default()), Cell::F(r.value)]);
    }
    sink.emit("moments.csv", &csv.into_string())
}

fn verify(config: &RunConfig, lambda: &str, exec: Execution, sink: &Sink) -> Result<(), CliError> {
    let g = config.graph()?;
    let sigma = config.weight(&g)?;
    let seq = config.sequence(&g)?;
    let lam = RunConfig::exact_scalar(lambda, "--lambda")?;
    let idx: Vec<usize> = (0..seq.len()).collect();
    let r = verify_lemma_qmzero(&g, &sigma, &seq, config.bc, &lam, &idx, exec).map_err(solver)?;
    if !r.all_hold() {
        eprintln!("harper: some rows violate the bound");
    }
    sink.emit("verify-algebraic.json", &json_report(config, &r))
}

fn report(config: &RunConfig, exec: Execution, sink: &Sink) -> Result<(), CliError> {
    let g = config.graph()?;
    let sigma = config.weight(&g)?;
    let seq = config.sequence(&g)?;
    #[derive(Serialize)]
    struct Report {
        bounds: OperatorBounds,
        domain_size: usize,
        regularity: harper_core::exhaustion::RegularityReport,
        kernel: harper_core::invariants::KernelReport,
    }
    let r = Report {
        bounds: OperatorBounds::for_graph(&g),
        domain_size: g.domain_size(),
        regularity: regularity_report(&g, &seq, &[1, 2]),
        kernel: kernel_dimension_check(&g, &sigma, &seq, config.bc, exec).map_err(invariants_error)?,
    };
    sink.emit("report.json", &json_report(config, &r))
}

fn export(config: &RunConfig, operator: OperatorKind, sink: &Sink) -> Result<(), CliError> {
    let dir = sink.dir().ok_or_else(|| CliError::Config("export-matrix needs --out".into()))?;
    let g = config.graph()?;
    let sigma = config.weight(&g)?;
    let seq = config.sequence(&g)?;
    for m in 0..seq.len() {
        let x = restriction(&g, &seq, m);
        let mat = restrict_operator(&g, &sigma, &x, config.bc, operator);
        let stem: String = x.label().chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
        let header = MatrixHeader { n: mat.dim(), bc: config.bc.to_string(), flux: config.flux.clone(), box_label: x.label().to_string() };
        export_matrix(&mat, &header, &dir.join(format!("{operator}_{stem}"))).map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(())
}
