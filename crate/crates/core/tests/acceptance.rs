//! The nine acceptance criteria, one PASS/FAIL line each with the measured numbers.
//! Runs without the libtest harness so the lines always reach the console.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use harper_core::algebraic::{verify_lemma_qmzero, CyclotomicNumber, ExactScalar};
use harper_core::exhaustion::{cubes_zd, restriction};
use harper_core::graph::{build_cayley_zd, build_from_templates, GammaGraph, GroupElement, VertexId};
use harper_core::invariants::{fk_determinant, log_holder_check, spectral_gap_scan, DEFAULT_ETA_GAP};
use harper_core::magnetic::{cocycle, column_polynomial_weight, landau_periodic_weight, landau_weight, normalized_cochain, sqrt_weight, trivial_weight, WeightFunction};
use harper_core::operator::{
    exact_moments, restrict_operator, trace_error_bound, twisted_coboundary_matrix, BoundaryCondition, OperatorBounds, OperatorKind,
};
use harper_core::par::Execution;
use harper_core::spectral::{density_sequence, hermitian_eigenvalues, linear_grid, DEFAULT_TOL};
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use BoundaryCondition::{Dirichlet, Neumann};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

const EXEC: Execution = Execution::Parallel;

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [(u32, &str, u64, fn() -> Outcome); 9] = [
        (1, "closed-form path spectra", 5, closed_form_spectra),
        (2, "exact moments", 1, exact_moments_criterion),
        (3, "trace error bound", 30, trace_bound_criterion),
        (4, "density convergence", 120, density_convergence),
        (5, "gap criterion", 120, gap_criterion),
        (6, "Fuglede-Kadison determinant", 300, fk_criterion),
        (7, "algebraic lower bound", 60, algebraic_criterion),
        (8, "log-Hölder modulus", 120, holder_criterion),
        (9, "structural invariants", 60, structural_criterion),
    ];
    let mut failed = 0;
    for (n, name, budget, f) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f));
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("panicked: {}", e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())),
        };
        let in_time = elapsed <= Duration::from_secs(budget);
        let ok = pass && in_time;
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {n} ({name}): {} [{:.2}s of {budget}s{}] {detail}",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", over budget" }
        );
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn spectrum_of(g: &GammaGraph, s: &WeightFunction, x: &harper_core::exhaustion::FiniteRestriction, bc: BoundaryCondition) -> Vec<f64> {
    hermitian_eigenvalues(&restrict_operator(g, s, x, bc, OperatorKind::Dml), DEFAULT_TOL).unwrap().values
}

fn closed_form_spectra() -> Outcome {
    let g = build_cayley_zd(1);
    let s = trivial_weight(&g);
    let sides: Vec<u64> = (1..=200).collect();
    let seq = cubes_zd(1, &sides).unwrap();
    let mut worst: f64 = 0.0;
    for m in 0..seq.len() {
        let x = restriction(&g, &seq, m);
        let n = x.len();
        for bc in [Dirichlet, Neumann] {
            let mut expect: Vec<f64> = match bc {
                Dirichlet => (1..=n).map(|k| 2.0 - 2.0 * (k as f64 * PI / (n + 1) as f64).cos()).collect(),
                Neumann => (0..n).map(|k| 2.0 - 2.0 * (k as f64 * PI / n as f64).cos()).collect(),
            };
            expect.sort_by(f64::total_cmp);
            for (a, b) in spectrum_of(&g, &s, &x, bc).iter().zip(&expect) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    outcome(worst <= 1e-9, format!("max |error| {worst:.2e} (limit 1e-9) over N = 1..200, Dirichlet and Neumann"))
}

/// Σ over closed walks of length k from the origin of the product of Landau phases.
fn walk_oracle(theta: f64, k: usize) -> Complex64 {
    let steps = [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)];
    let mut total = Complex64::new(0.0, 0.0);
    for code in 0..4usize.pow(k as u32) {
        let (mut x, mut y, mut c) = (0i64, 0i64, code);
        let mut phase = Complex64::new(1.0, 0.0);
        for _ in 0..k {
            let (dx, dy) = steps[c % 4];
            c /= 4;
            if dy != 0 {
                phase *= Complex64::from_polar(1.0, 2.0 * PI * theta * x as f64 * dy as f64);
            }
            x += dx;
            y += dy;
        }
        if x == 0 && y == 0 {
            total += phase;
        }
    }
    total
}

fn exact_moments_criterion() -> Outcome {
    let g = build_cayley_zd(2);
    let mut worst_float: f64 = 0.0;
    let mut exact_ok = true;
    for (p, q) in [(0i64, 1i64), (1, 4), (1, 3), (1, 2)] {
        let theta = p as f64 / q as f64;
        let s = landau_weight(&g, Ratio::new(p, q)).unwrap();
        let dml = exact_moments(&g, &s, OperatorKind::Dml, 1, EXEC);
        let c1 = dml[1].cyclotomic.clone().unwrap();
        exact_ok &= c1 == CyclotomicNumber::from_integer(c1.modulus(), 4);
        let h = exact_moments(&g, &s, OperatorKind::Harper, 4, EXEC);
        let c4 = h[4].cyclotomic.clone().unwrap();
        let n = c4.modulus();
        let zq = CyclotomicNumber::zeta_pow(n, (n as i64) / q);
        let expect = CyclotomicNumber::from_integer(n, 28).add(&zq.add(&zq.conj()).mul(&CyclotomicNumber::from_integer(n, 4)));
        exact_ok &= c4 == expect;
        let oracle = walk_oracle(theta, 4);
        let closed = 28.0 + 8.0 * (2.0 * PI * theta).cos();
        worst_float = worst_float.max((oracle.re - closed).abs()).max((h[4].value - oracle.re).abs()).max(h[4].imag.abs());
        // Float route: the same gauge given as a numeric column polynomial.
        let numeric = column_polynomial_weight(&g, vec![0.0, 2.0 * PI * theta]).unwrap();
        let fh = exact_moments(&g, &numeric, OperatorKind::Harper, 4, EXEC);
        let fd = exact_moments(&g, &numeric, OperatorKind::Dml, 1, EXEC);
        worst_float = worst_float.max((fh[4].value - oracle.re).abs()).max((fd[1].value - 4.0).abs());
    }
    outcome(
        exact_ok && worst_float <= 1e-10,
        format!("exact Tr(Δ) = 4 and Tr(H⁴) = 28 + 8cos(2πθ) for θ ∈ {{0, 1/4, 1/3, 1/2}}: {exact_ok}; float routes within {worst_float:.1e} (limit 1e-10)"),
    )
}

fn trace_bound_criterion() -> Outcome {
    let g = build_cayley_zd(2);
    let sides: Vec<u64> = (5..=40).collect();
    let seq = cubes_zd(2, &sides).unwrap();
    let (mut cases, mut within) = (0usize, 0usize);
    let mut decays = true;
    let mut worst_ratio: f64 = 0.0;
    for (p, q) in [(0i64, 1i64), (1, 3), (1, 2)] {
        let s = landau_weight(&g, Ratio::new(p, q)).unwrap();
        let exact: Vec<f64> = exact_moments(&g, &s, OperatorKind::Dml, 6, EXEC).iter().map(|m| m.value).collect();
        for bc in [Dirichlet, Neumann] {
            let mut disc = vec![Vec::new(); 7];
            for m in 0..seq.len() {
                let x = restriction(&g, &seq, m);
                let traces = restrict_operator(&g, &s, &x, bc, OperatorKind::Dml).power_traces(6);
                for k in 1..=6 {
                    let mut coeffs = vec![0.0; k + 1];
                    coeffs[k] = 1.0;
                    let d = (exact[k] - traces[k] / x.n_cells() as f64).abs();
                    let bound = trace_error_bound(&g, &coeffs, &x);
                    cases += 1;
                    if d <= bound {
                        within += 1;
                    }
                    worst_ratio = worst_ratio.max(d / bound);
                    disc[k].push(d);
                }
            }
            for d in &disc[1..] {
                decays &= d[d.len() - 1] <= (d[0] / 4.0).max(1e-12);
            }
        }
    }
    outcome(
        within == cases && decays,
        format!("{within}/{cases} cases within the bound (max discrepancy/bound {worst_ratio:.3}); discrepancy at side 40 ≤ 1/4 of side 5 for every (θ, bc, k): {decays}"),
    )
}

fn density_convergence() -> Outcome {
    let g1 = build_cayley_zd(1);
    let s1 = trivial_weight(&g1);
    let seq1 = cubes_zd(1, &[500]).unwrap();
    let t1 = density_sequence(&g1, &s1, &seq1, Neumann, &[2.0], DEFAULT_TOL, EXEC).unwrap();
    let f_line = t1.columns[0].values[0];

    let g2 = build_cayley_zd(2);
    let s2 = landau_weight(&g2, Ratio::new(1, 2)).unwrap();
    let seq2 = cubes_zd(2, &[30]).unwrap();
    let a = g2.domain_size() as f64;
    let d = density_sequence(&g2, &s2, &seq2, Dirichlet, &[1.0, 7.0], DEFAULT_TOL, EXEC).unwrap();
    let n = density_sequence(&g2, &s2, &seq2, Neumann, &[1.0, 7.0], DEFAULT_TOL, EXEC).unwrap();
    let (d1, d7) = (d.columns[0].values[0], d.columns[0].values[1]);
    let (n1, n7) = (n.columns[0].values[0], n.columns[0].values[1]);
    let pass = (f_line - 0.5).abs() <= 0.02 && d1 <= 0.02 && d7 >= a - 0.02;
    outcome(
        pass,
        format!("ℤ Neumann m=500: F(2) = {f_line:.4}; ℤ² θ=1/2 30×30 Dirichlet: F(1) = {d1:.4}, F(7) = {d7:.4} (Neumann boundary modes: F(1) = {n1:.4}, F(7) = {n7:.4})"),
    )
}

/// Band edges of the DML from the q×q magnetic Bloch matrices over a k-grid.
fn bloch_bands(p: i64, q: i64, grid: usize) -> Vec<(f64, f64)> {
    let q = q as usize;
    let theta = p as f64 / q as f64;
    let mut bands = vec![(f64::INFINITY, f64::NEG_INFINITY); q];
    for i in 0..grid {
        for j in 0..grid {
            let k2 = 2.0 * PI * i as f64 / grid as f64;
            let phi = 2.0 * PI * j as f64 / grid as f64;
            let mut h = DMatrix::<Complex64>::zeros(q, q);
            for x in 0..q {
                h[(x, x)] += Complex64::new(2.0 * (k2 + 2.0 * PI * theta * x as f64).cos(), 0.0);
                let y = (x + 1) % q;
                let ph = if x + 1 == q { Complex64::from_polar(1.0, phi) } else { Complex64::new(1.0, 0.0) };
                h[(y, x)] += ph;
                h[(x, y)] += ph.conj();
            }
            let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().map(|e| 4.0 - e).collect();
            ev.sort_by(f64::total_cmp);
            for (b, e) in bands.iter_mut().zip(ev) {
                b.0 = b.0.min(e);
                b.1 = b.1.max(e);
            }
        }
    }
    bands
}

fn gap_criterion() -> Outcome {
    let g = build_cayley_zd(2);
    let radii = harper_core::exhaustion::boxes_zd(2, &[15, 16, 17]).unwrap();
    let grid = linear_grid(0.0, 8.0, 0.05);
    let scan = |p: i64, q: i64| {
        let s = landau_weight(&g, Ratio::new(p, q)).unwrap();
        let t = density_sequence(&g, &s, &radii, Dirichlet, &grid, DEFAULT_TOL, EXEC).unwrap();
        spectral_gap_scan(&t, DEFAULT_ETA_GAP).unwrap()
    };
    let bands = bloch_bands(1, 3, 200);
    let oracle: Vec<(f64, f64)> = bands.windows(2).filter(|w| w[0].1 < w[1].0).map(|w| (w[0].1, w[1].0)).collect();
    let third = scan(1, 3);
    let found: Vec<(f64, f64)> = third.interior_gaps().map(|g| (g.lambda1, g.lambda2)).collect();
    let matches = found.len() == 2
        && oracle.len() == 2
        && found.iter().zip(&oracle).all(|(f, o)| (f.0 - o.0).abs() <= 0.1 && (f.1 - o.1).abs() <= 0.1);
    let zero = scan(0, 1);
    let zero_interior = zero.interior_gaps().count();
    let fmt = |v: &[(f64, f64)]| v.iter().map(|(a, b)| format!("({a:.3}, {b:.3})")).collect::<Vec<_>>().join(" ");
    outcome(
        matches && zero_interior == 0,
        format!("θ=1/3 interior gaps {} vs Bloch {}; θ=0 interior gaps: {zero_interior}", fmt(&found), fmt(&oracle)),
    )
}

/// Midpoint rule for ∫ log f over the d-torus, normalized.
fn torus_mean_log(d: usize, n: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
    let mut total = 0.0;
    let mut idx = vec![0usize; d];
    let count = n.pow(d as u32);
    for c in 0..count {
        let mut r = c;
        for i in idx.iter_mut() {
            *i = r % n;
            r /= n;
        }
        let t: Vec<f64> = idx.iter().map(|&i| 2.0 * PI * (i as f64 + 0.5) / n as f64).collect();
        total += f(&t).ln();
    }
    total / count as f64
}

fn fk_criterion() -> Outcome {
    let g1 = build_cayley_zd(1);
    let s1 = trivial_weight(&g1);
    let seq1 = cubes_zd(1, &[251, 501, 1001]).unwrap();
    let t1 = density_sequence(&g1, &s1, &seq1, Dirichlet, &[0.0], DEFAULT_TOL, EXEC).unwrap();
    let oracle0 = torus_mean_log(1, 200_000, |t| 2.0 - 2.0 * t[0].cos());
    let e0 = fk_determinant(&t1.spectra, 0.0, 5.0).unwrap();
    let oracle1 = torus_mean_log(1, 200_000, |t| 3.0 - 2.0 * t[0].cos()).exp();
    let e1 = fk_determinant(&t1.spectra, -1.0, 6.0).unwrap();

    let g2 = build_cayley_zd(2);
    let s2 = trivial_weight(&g2);
    let seq2 = cubes_zd(2, &[21, 26, 31]).unwrap();
    let t2 = density_sequence(&g2, &s2, &seq2, Dirichlet, &[0.0], DEFAULT_TOL, EXEC).unwrap();
    let oracle2 = torus_mean_log(2, 2000, |t| 4.0 - 2.0 * t[0].cos() - 2.0 * t[1].cos());
    let catalan = 0.915_965_594_177_219;
    let e2 = fk_determinant(&t2.spectra, 0.0, 9.0).unwrap();

    let line0 = e0.logdet_moddet.abs() <= 0.02 && e0.logdet_stieltjes.abs() <= 0.02;
    let shifted = ((e1.det / oracle1) - 1.0).abs() <= 0.02 && ((e1.logdet_stieltjes.exp() / oracle1) - 1.0).abs() <= 0.02;
    let plane = (e2.logdet_moddet - oracle2).abs() <= 0.05 && (e2.logdet_stieltjes - oracle2).abs() <= 0.05;
    outcome(
        line0 && shifted && plane,
        format!(
            "ℤ μ=0: logdet {:.4}/{:.4} (oracle {oracle0:.1e}); ℤ μ=−1: det {:.4} (oracle {oracle1:.4}); ℤ² 31×31: logdet {:.4}/{:.4} (oracle {oracle2:.5}, 4G/π = {:.5})",
            e0.logdet_moddet,
            e0.logdet_stieltjes,
            e1.det,
            e2.logdet_moddet,
            e2.logdet_stieltjes,
            4.0 * catalan / PI
        ),
    )
}

fn algebraic_criterion() -> Outcome {
    let g = build_cayley_zd(2);
    let seq = cubes_zd(2, &[1, 2, 3]).unwrap();
    let mut rows = 0;
    let mut holding = 0;
    let mut min_margin = f64::INFINITY;
    for (p, q) in [(1i64, 2i64), (1, 3), (1, 4)] {
        let s = landau_weight(&g, Ratio::new(p, q)).unwrap();
        for lambda in [ExactScalar::integer(0), ExactScalar::ratio(1, 2), ExactScalar::integer(2)] {
            for bc in [Neumann, Dirichlet] {
                let r = verify_lemma_qmzero(&g, &s, &seq, bc, &lambda, &[0, 1, 2], EXEC).unwrap();
                for row in &r.rows {
                    rows += 1;
                    if row.margin >= 0.0 && row.coefficient_check && row.integrality_check {
                        holding += 1;
                    }
                    min_margin = min_margin.min(row.margin);
                }
            }
        }
    }
    let cycle = |p: i64, q: i64| {
        let s = landau_weight(&g, Ratio::new(p, q)).unwrap();
        verify_lemma_qmzero(&g, &s, &seq, Neumann, &ExactScalar::integer(0), &[1], EXEC).unwrap().rows[0].q0_abs
    };
    let (c0, c2) = (cycle(0, 1), cycle(1, 2));
    outcome(
        rows == holding && c0 == 16.0 && c2 == 4.0,
        format!("{holding}/{rows} rows hold (min log10 margin {min_margin:.3}); 4-cycle |q(0)|: θ=0 → {c0}, θ=1/2 → {c2}"),
    )
}

fn holder_criterion() -> Outcome {
    let g = build_cayley_zd(2);
    let s = landau_weight(&g, Ratio::new(1, 2)).unwrap();
    let sides: Vec<u64> = (1..=30).collect();
    let seq = cubes_zd(2, &sides).unwrap();
    let bounds = OperatorBounds::for_graph(&g);
    let eps: Vec<f64> = (1..=6).map(|k| 10f64.powi(-k)).collect();
    let mus = [ExactScalar::parse("4-2sqrt2").unwrap(), ExactScalar::integer(2), ExactScalar::integer(4)];
    let mut all = true;
    let mut parts = Vec::new();
    for bc in [Dirichlet, Neumann] {
        let t = density_sequence(&g, &s, &seq, bc, &[0.0], DEFAULT_TOL, EXEC).unwrap();
        for mu in &mus {
            let r = log_holder_check(&t, 2, mu, &bounds, &eps);
            all &= r.holds;
            let c = r.rows.iter().map(|x| x.constant).fold(f64::INFINITY, f64::min);
            parts.push(format!("{bc} μ={}: sup {:.3}, smallest constant {c:.1}", r.mu, r.sup_product));
        }
    }
    outcome(all, parts.join("; "))
}

fn rand_weight(rng: &mut ChaCha8Rng, g: &GammaGraph) -> WeightFunction {
    if g.dim() < 2 || rng.gen_bool(0.2) {
        return trivial_weight(g);
    }
    let q = rng.gen_range(1..=7);
    let p = rng.gen_range(0..q);
    landau_periodic_weight(g, Ratio::new(p, q)).unwrap()
}

fn rand_group(rng: &mut ChaCha8Rng, d: usize) -> GroupElement {
    GroupElement::new(&(0..d).map(|_| rng.gen_range(-3..=3)).collect::<Vec<_>>())
}

fn structural_criterion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_2024);
    let cases = 240;
    let mut failures: Vec<String> = Vec::new();
    for case in 0..cases {
        let kind = rng.gen_range(0..4);
        let g = match kind {
            0 => build_cayley_zd(1),
            1 => build_cayley_zd(2),
            2 => build_from_templates(2, 2, vec![(0, vec![0, 0], 1), (1, vec![1, 0], 0), (0, vec![0, 1], 0)]).unwrap(),
            _ => build_cayley_zd(3),
        };
        let d = g.dim();
        let side = match d {
            1 => rng.gen_range(2..=30),
            2 => rng.gen_range(2..=7),
            _ => rng.gen_range(2..=4),
        };
        let seq = cubes_zd(d, &[side]).unwrap();
        let x = restriction(&g, &seq, 0);
        let sigma = rand_weight(&mut rng, &g);
        let bc = if rng.gen_bool(0.5) { Dirichlet } else { Neumann };
        let mut fail = |what: &str| failures.push(format!("case {case} ({what})"));

        // Edge involution.
        if !x.edges().iter().all(|(_, _, e)| {
            let r = e.reverse();
            r.reverse() == *e && r.origin == e.terminus && r.terminus == e.origin && r != *e
        }) {
            fail("edge involution");
        }
        // Action associativity on vertices and edges.
        let (g1, g2, g3) = (rand_group(&mut rng, d), rand_group(&mut rng, d), rand_group(&mut rng, d));
        let v: VertexId = x.vertices()[rng.gen_range(0..x.len())].clone();
        let e = x.edges()[rng.gen_range(0..x.edges().len())].2.clone();
        if g.act(&g1, &g.act(&g2, &v)) != g.act(&g1.compose(&g2), &v) || g.act(&g1, &g.act(&g2, &e)) != g.act(&g1.compose(&g2), &e) {
            fail("associativity");
        }
        // Weak invariance σ(γe) = σ(e)·s(te)·conj s(oe).
        let s1 = normalized_cochain(&g, &sigma, &g1).unwrap();
        if !x.edges().iter().all(|(_, _, e)| {
            let lhs = sigma.value(&g.act(&g1, e));
            let rhs = sigma.value(e) * s1.value(&e.terminus) * s1.value(&e.origin).conj();
            (lhs - rhs).norm() < 1e-12
        }) {
            fail("weak invariance");
        }
        // Magnetic translations compose projectively with a 2-cocycle.
        let th = |a: &GroupElement, b: &GroupElement| cocycle(&g, &sigma, a, b).map(|p| p.to_complex());
        match (th(&g1, &g2), th(&g1.compose(&g2), &g3), th(&g1, &g2.compose(&g3)), th(&g2, &g3)) {
            (Ok(a), Ok(b), Ok(c), Ok(dd)) if (a * b - c * dd).norm() < 1e-12 => {}
            _ => fail("cocycle"),
        }
        // d_τ* d_τ is the Neumann DML.
        let gram = twisted_coboundary_matrix(&g, &sqrt_weight(&sigma), &x).gram();
        let neumann = restrict_operator(&g, &sigma, &x, Neumann, OperatorKind::Dml);
        let (a, b) = (gram.to_dense(), neumann.to_dense());
        if a.iter().zip(&b).any(|(p, q)| (p - q).norm() > 1e-12) {
            fail("coboundary gram");
        }
        // Hermiticity, the norm bound and the counting function.
        let m = restrict_operator(&g, &sigma, &x, bc, OperatorKind::Dml);
        let h = restrict_operator(&g, &sigma, &x, bc, OperatorKind::Harper);
        if !m.is_hermitian(1e-12) || !h.is_hermitian(1e-12) {
            fail("hermiticity");
        }
        let k_sq = OperatorBounds::for_graph(&g).norm_bound_sq;
        let spec = hermitian_eigenvalues(&m, DEFAULT_TOL).unwrap();
        if spec.values.iter().any(|&v| v < -1e-9 || v > k_sq + 1e-9) {
            fail("norm bound");
        }
        let grid = linear_grid(0.0, k_sq, k_sq / 64.0);
        let f: Vec<f64> = grid.iter().map(|&l| spec.count(l) as f64 / x.n_cells() as f64).collect();
        if f.windows(2).any(|w| w[1] < w[0]) || (f[f.len() - 1] - g.domain_size() as f64).abs() > 1e-12 {
            fail("counting function");
        }
    }
    outcome(failures.is_empty(), format!("{} of {cases} randomized configurations green{}", cases - failures.len(), if failures.is_empty() { String::new() } else { format!("; failures: {}", failures.join(", ")) }))
}
