use std::fs;
use std::path::Path;
use std::process::Command;

use wg_core::cli::{cmd_mesh, cmd_moments, cmd_solve, cmd_study, RunConfig};
use wg_core::error_analysis::CSV_HEADER;
use wg_core::geometry::{read_mesh, write_mesh};
use wg_core::quadrature::element_moments_about;
use wg_core::testcases::{CaseKind, Variant};
use wg_core::Point2;

fn config(dir: &Path, body: &str) -> RunConfig {
    RunConfig::parse(&format!("{body}\noutput.dir = {}\n", dir.display())).unwrap()
}

#[test]
fn study_writes_table_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "case = curved_quad\norder = 2\nlevels = 4, 8");
    let a = cmd_study(&cfg).unwrap();
    let b = cmd_study(&cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(fs::read_to_string(dir.path().join("study.csv")).unwrap(), a);
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("4,2.50000e-1,"));
    let energy_rate: f64 = lines[2].split(',').nth(4).unwrap().parse().unwrap();
    assert!(energy_rate > 1.5, "{energy_rate}");
}

#[test]
fn solve_reports_errors_and_dumps_system() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "case = patch\nvariant = straight\norder = 2\nlevels = 2");
    let dump = dir.path().join("system.txt");
    let summary = cmd_solve(&cfg, Some(&dump)).unwrap();
    let energy: f64 = summary
        .lines()
        .find_map(|l| l.strip_prefix("energy = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(energy < 1e-9);

    let text = fs::read_to_string(&dump).unwrap();
    let (triplets, rhs) = text.split_once("\n\n").unwrap();
    let n = rhs.lines().count();
    assert!(n > 0);
    for line in triplets.lines().filter(|l| !l.starts_with('#')) {
        let mut it = line.split_whitespace();
        let i: usize = it.next().unwrap().parse().unwrap();
        let j: usize = it.next().unwrap().parse().unwrap();
        assert!(i < n && j < n);
    }

    let samples = fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    assert_eq!(samples.lines().next(), Some("x,y,u0"));
    // 25 samples on each of the 4 cells
    assert_eq!(samples.lines().count(), 1 + 100);
    // u = 1 + 2x - 3y is reproduced exactly
    for line in samples.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!((v[2] - (1.0 + 2.0 * v[0] - 3.0 * v[1])).abs() < 1e-9);
    }
}

#[test]
fn mesh_files_round_trip_and_feed_moments() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "case = annulus\norder = 1\nlevels = 1, 2");
    let table = cmd_mesh(&cfg).unwrap();
    assert_eq!(table.lines().count(), 3);
    let path = dir.path().join("annulus_curved_1.wgmesh");
    let mesh = read_mesh(&path).unwrap();
    let original = CaseKind::Annulus.mesh(1, Variant::Curved).unwrap();
    assert_eq!(mesh.elements.len(), original.elements.len());
    assert!((mesh.total_area() - original.total_area()).abs() < 1e-12);

    let csv = cmd_moments(&path, 2).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("element,a,b,value"));
    assert_eq!(csv.lines().count(), 1 + 6 * mesh.elements.len());
    let area: f64 = mesh
        .elements
        .iter()
        .map(|el| element_moments_about(el, &mesh, 0, Point2::default(), 1.0).get(0, 0))
        .sum();
    let from_csv: f64 = lines
        .filter(|l| l.split(',').nth(1) == Some("0") && l.split(',').nth(2) == Some("0"))
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((area - from_csv).abs() < 1e-12);
    assert!((area - std::f64::consts::PI * 0.84).abs() < 1e-10);
}

#[test]
fn binary_runs_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, format!("case = circle\norder = 1\nlevels = 1, 2\noutput.dir = {}\n", dir.path().display())).unwrap();
    let exe = env!("CARGO_BIN_EXE_wgfem");

    let out = Command::new(exe).arg("study").arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with(CSV_HEADER));

    let mesh = dir.path().join("m.wgmesh");
    write_mesh(&CaseKind::CurvedQuad.mesh(2, Variant::Curved).unwrap(), &mesh).unwrap();
    let out = Command::new(exe).args(["moments", "--degree", "1", "--mesh"]).arg(&mesh).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 1 + 3 * 4);

    fs::write(&cfg, "case = circle\norder = 7\nlevels = 1\n").unwrap();
    let out = Command::new(exe).arg("solve").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("order"));

    fs::write(&cfg, "case = curved_quad\norder = 3\nlevels = 8\nsolver.maxiter = 2\n").unwrap();
    let out = Command::new(exe).arg("solve").arg(&cfg).current_dir(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
