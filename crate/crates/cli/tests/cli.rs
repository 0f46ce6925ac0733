use std::process::{Command, Output};

fn harper(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_harper")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV artifact, metadata and column header dropped.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn moments_third_flux() {
    let o = harper(&["moments", "--graph", "zd:2", "--flux", "1/3", "--k", "4"]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    assert_eq!(r[4], vec!["4", "24", "24"]);
    let r = rows(&stdout(&harper(&["moments", "--graph", "zd:2", "--flux", "1/5", "--k", "4"])));
    assert_eq!(r[4][1], "28 + 8cos(2π·1/5)");
}

#[test]
fn header_carries_hash_and_version() {
    let s = stdout(&harper(&["moments", "--graph", "zd:1", "--k", "2"]));
    let first = s.lines().next().unwrap();
    assert!(first.starts_with(&format!("# harper {} config ", env!("CARGO_PKG_VERSION"))));
    assert_eq!(first.rsplit(' ').next().unwrap().len(), 16);
}

#[test]
fn line_density_tends_to_one_half() {
    let o = harper(&["density", "--graph", "zd:1", "--flux", "0", "--bc", "neumann", "--boxes", "10..200..10", "--grid", "0:4:0.01"]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    let at2 = r.iter().find(|row| row[0] == "2").unwrap();
    let last: f64 = at2.last().unwrap().parse().unwrap();
    assert!((last - 0.5).abs() <= 1.0 / 200.0 + 1e-12);
}

#[test]
fn half_flux_low_plateau() {
    let o = harper(&["density", "--graph", "zd:2", "--flux", "1/2", "--bc", "neumann", "--boxes", "4..30..2", "--grid", "0:8:0.02"]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    let below: Vec<&Vec<String>> = r.iter().filter(|row| row[0].parse::<f64>().unwrap() <= 1.0).collect();
    let first: f64 = below.last().unwrap()[1].parse().unwrap();
    let last: f64 = below.last().unwrap().last().unwrap().parse().unwrap();
    // Neumann boxes carry boundary modes below the band, of mass about 1/side.
    assert!(last < 0.03 && last < first / 4.0);
    let o = harper(&["density", "--graph", "zd:2", "--flux", "1/2", "--bc", "dirichlet", "--boxes", "20..30..10", "--grid", "0:8:0.02"]);
    for row in rows(&stdout(&o)).iter().filter(|row| row[0].parse::<f64>().unwrap() <= 1.0) {
        assert!(row[1..].iter().all(|v| v == "0"));
    }
}

#[test]
fn config_errors_exit_2() {
    assert_eq!(harper(&["density", "--boxes", ""]).status.code(), Some(2));
    assert_eq!(harper(&["density"]).status.code(), Some(2));
    assert_eq!(harper(&["density", "--flux", "0.5", "--boxes", "2..4"]).status.code(), Some(2));
    assert_eq!(harper(&["density", "--graph", "zd:0", "--boxes", "2..4"]).status.code(), Some(2));
    assert_eq!(harper(&["gaps", "--graph", "zd:1", "--boxes", "4..6", "--grid", "0:4:1"]).status.code(), Some(2));
    assert_eq!(harper(&["bogus"]).status.code(), Some(2));
}

#[test]
fn outputs_are_deterministic() {
    let a = harper(&["gaps", "--graph", "zd:2", "--flux", "1/2", "--bc", "dirichlet", "--boxes", "8..12..2"]);
    let b = harper(&["gaps", "--graph", "zd:2", "--flux", "1/2", "--bc", "dirichlet", "--boxes", "8..12..2", "--threads", "1"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let r = rows(&stdout(&a));
    assert!(r.iter().any(|row| row[0] == "0" && row[4] == "gap"));
}

#[test]
fn butterfly_fluxes_and_symmetry() {
    let o = harper(&["butterfly", "--q-max", "3", "--boxes", "6", "--bc", "dirichlet", "--grid", "0:8:0.5"]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    let mut thetas: Vec<String> = r.iter().map(|row| row[0].clone()).collect();
    thetas.dedup();
    assert_eq!(thetas, vec!["0", "1/3", "1/2", "2/3"]);
    // θ and 1 − θ give complex-conjugate matrices, hence the same counting function.
    let col = |t: &str| r.iter().filter(|row| row[0] == t).map(|row| row[2].clone()).collect::<Vec<_>>();
    assert_eq!(col("1/3"), col("2/3"));
}

#[test]
fn verify_algebraic_margins() {
    let o = harper(&["verify-algebraic", "--graph", "zd:2", "--flux", "1/2", "--lambda", "0", "--boxes", "1..3"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["report"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["margin"].as_f64().unwrap() >= 0.0));
    assert_eq!(rows[1]["q0"], "4");
}

#[test]
fn fkdet_line() {
    let o = harper(&["fkdet", "--graph", "zd:1", "--flux", "0", "--mu", "0", "--boxes", "50..400..50"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["report"]["logdet_moddet"].as_f64().unwrap().abs() < 0.02);
    assert!(v["report"]["logdet_stieltjes"].as_f64().unwrap().abs() < 0.02);
    let o = harper(&["fkdet", "--graph", "zd:1", "--mu", "-1", "--boxes", "20..40..10", "--exact", "--bc", "dirichlet"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["report"]["positivity"]["condition"], "not-in-spectrum");
}

#[test]
fn files_in_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = harper(&["density", "--graph", "zd:1", "--boxes", "5..7", "--grid", "0:4:0.5", "--out", out]);
    assert!(o.status.success());
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("density.json")).unwrap()).unwrap();
    assert_eq!(summary["report"]["columns"].as_array().unwrap().len(), 3);
    assert!(std::fs::read_to_string(dir.path().join("density.csv")).unwrap().contains(&summary["config_hash"].as_str().unwrap().to_string()));

    let o = harper(&["export-matrix", "--graph", "zd:2", "--flux", "1/2", "--boxes", "2", "--out", out]);
    assert!(o.status.success());
    let bin = std::fs::read(dir.path().join(find(dir.path(), ".bin"))).unwrap();
    assert_eq!(bin.len(), 16 * 16);
    assert_eq!(harper(&["export-matrix", "--boxes", "2"]).status.code(), Some(2));

    let o = harper(&["report", "--graph", "zd:1", "--boxes", "5..7", "--out", out]);
    assert!(o.status.success());
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(r["report"]["kernel"]["components_match"], true);
}

fn find(dir: &std::path::Path, ext: &str) -> String {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .find(|n| n.ends_with(ext))
        .unwrap()
}
