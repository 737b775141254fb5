mod common;

use common::V2;
use nssolver::basis::DiscretizationOrder;
use nssolver::harness::*;
use nssolver::mesh::{generate_structured_mesh, Rect};
use nssolver::solver::{project_initial_condition, Discretization};
use std::f64::consts::PI;

fn disc(n: usize, nu: f64) -> Discretization<f64> {
    let mesh = generate_structured_mesh(n, Rect::periodic_box()).unwrap();
    Discretization::new(mesh, DiscretizationOrder::new(2, 2).unwrap(), nu).unwrap()
}

#[test]
fn taylor_green_point_values() {
    let (v, p) = taylor_green_exact(V2::new(0.0, 0.0), 0.0, 0.1);
    assert_eq!((v.x, v.y, p), (0.0, 0.0, 0.5));
    let (v, p) = taylor_green_exact(V2::new(PI / 2.0, 0.0), 0.0, 0.1);
    assert!((v.x - 1.0).abs() < 1e-15 && v.y.abs() < 1e-15 && p.abs() < 1e-15);

    let x = V2::new(0.7, -1.9);
    let t = 0.37;
    let (v0, p0) = taylor_green_exact(x, 0.0, 0.1);
    let (v1, p1) = taylor_green_exact(x, t, 0.1);
    assert!((v1 - v0 * (-0.2 * t).exp()).norm() < 1e-15);
    assert!((p1 - p0 * (-0.4 * t).exp()).abs() < 1e-15);
}

#[test]
fn taylor_green_is_divergence_free_and_solves_momentum() {
    let (nu, h) = (0.1, 1e-5);
    for &(x, y, t) in &[(0.3, 1.1, 0.0), (-2.0, 0.4, 0.05), (2.9, -3.0, 0.1)] {
        let f = |x: f64, y: f64, t: f64| taylor_green_exact(V2::new(x, y), t, nu);
        let dx = |x: f64, y: f64| (f(x + h, y, t).0 - f(x - h, y, t).0) / (2.0 * h);
        let dy = |x: f64, y: f64| (f(x, y + h, t).0 - f(x, y - h, t).0) / (2.0 * h);
        let (gx, gy) = (dx(x, y), dy(x, y));
        assert!((gx.x + gy.y).abs() < 1e-9);

        let (v, _) = f(x, y, t);
        let dt = (f(x, y, t + h).0 - f(x, y, t - h).0) / (2.0 * h);
        let px = (f(x + h, y, t).1 - f(x - h, y, t).1) / (2.0 * h);
        let py = (f(x, y + h, t).1 - f(x, y - h, t).1) / (2.0 * h);
        let lap = (f(x + h, y, t).0 + f(x - h, y, t).0 + f(x, y + h, t).0 + f(x, y - h, t).0
            - v * 4.0)
            / (h * h);
        let conv = gx * v.x + gy * v.y;
        let residual = dt + conv + V2::new(px, py) - lap * nu;
        assert!(residual.norm() < 1e-4, "{residual:?}");
    }
}

#[test]
fn sigma_formula() {
    assert!((sigma(8.0e-3, 1.0e-3, 2.0, 1.0) - 3.0).abs() < 1e-12);
    assert!((sigma(1.0, 1.0, 2.0, 1.0)).abs() < 1e-12);
    // published pair 116 -> 380 elements, h ~ N^(-1/2)
    let s = sigma(
        1.69e-2,
        2.52e-3,
        (1.0 / 116.0f64).sqrt(),
        (1.0 / 380.0f64).sqrt(),
    );
    assert!((2.75..3.25).contains(&s), "{s}");
}

#[test]
fn injected_fields_have_zero_error() {
    let d = disc(4, 0.0);
    let f = |x: V2| (V2::new(1.0, -2.0), x.x * x.x - 0.5 * x.x * x.y + x.y + 3.0);
    let s = project_initial_condition(&d, f, 0.0);
    let (ep, ev) = compute_l2_errors(&d, &s, f, 0);
    assert!(ep < 1e-12 && ev < 1e-12, "{ep:e} {ev:e}");
    // a constant pressure offset is removed by the gauge
    let (ep, _) = compute_l2_errors(&d, &s, |x| (f(x).0, f(x).1 + 10.0), 0);
    assert!(ep < 1e-11);
}

#[test]
fn error_is_converged_in_quadrature_degree() {
    // study-class resolution; on very coarse meshes the integrand is under-resolved
    let d = disc(14, 0.0);
    let s = project_initial_condition(&d, |x| taylor_green_exact(x, 0.0, 0.0), 0.0);
    let exact = |x| taylor_green_exact(x, 0.05, 0.0);
    let (p0, v0) = compute_l2_errors(&d, &s, exact, 0);
    let (p2, v2) = compute_l2_errors(&d, &s, exact, 2);
    assert!(((p2 - p0) / p0).abs() < 1e-3);
    assert!(((v2 - v0) / v0).abs() < 1e-3);
}

fn section<'a>(lines: &[&'a str], head: &str) -> (usize, Vec<&'a str>) {
    let i = lines.iter().position(|l| l.starts_with(head)).unwrap();
    let n: usize = lines[i].split_whitespace().nth(1).unwrap().parse().unwrap();
    (n, lines[i + 1..].to_vec())
}

#[test]
fn vtk_round_trip() {
    let d = disc(3, 0.0);
    let s = project_initial_condition(&d, |_| (V2::new(1.5, -0.25), 2.0), 0.0);
    let text = format_vtk(&d, &s, "check");
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# vtk DataFile Version 3.0");
    assert_eq!(lines[1], "check");
    assert_eq!(lines[2], "ASCII");
    assert_eq!(lines[3], "DATASET UNSTRUCTURED_GRID");

    let (np, rest) = section(&lines, "POINTS");
    assert_eq!(np, d.mesh.n_vertices());
    for (l, x) in rest.iter().zip(d.mesh.vertices()) {
        let c: Vec<f64> = l.split_whitespace().map(|t| t.parse().unwrap()).collect();
        assert!((c[0] - x.x).abs() < 1e-12 && (c[1] - x.y).abs() < 1e-12 && c[2] == 0.0);
    }
    let (nc, rest) = section(&lines, "CELLS");
    assert_eq!(nc, d.mesh.n_triangles());
    for (l, t) in rest.iter().zip(d.mesh.triangles()) {
        let c: Vec<usize> = l.split_whitespace().map(|t| t.parse().unwrap()).collect();
        assert_eq!(c, vec![3, t[0], t[1], t[2]]);
    }
    let (nt, rest) = section(&lines, "CELL_TYPES");
    assert!(rest[..nt].iter().all(|l| *l == "5"));
    let (_, rest) = section(&lines, "CELL_DATA");
    assert_eq!(rest[0], "SCALARS pressure double 1");
    assert!(rest[2..2 + nc]
        .iter()
        .all(|l| (l.parse::<f64>().unwrap() - 2.0).abs() < 1e-12));
    let (_, rest) = section(&lines, "POINT_DATA");
    assert_eq!(rest[0], "VECTORS velocity double");
    for l in &rest[1..1 + np] {
        let c: Vec<f64> = l.split_whitespace().map(|t| t.parse().unwrap()).collect();
        assert!((c[0] - 1.5).abs() < 1e-12 && (c[1] + 0.25).abs() < 1e-12);
    }
}

#[test]
fn run_case_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("gen = 3\nt_end = 0.02\nout = {}\n", dir.path().display());
    let config = parse_config(
        &text,
        &[("p".into(), "1".into()), ("p_gamma".into(), "1".into())],
    )
    .unwrap();
    let outcome = run_case(&config).unwrap();
    assert_eq!(outcome.report.elements, 18);
    assert!(outcome.max_divergence() <= 1e-8);

    let json: serde_json::Value =
        serde_json::from_reader(std::fs::File::open(dir.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(json["program"], "nssolver");
    assert_eq!(json["config"]["p"], 1);
    assert_eq!(json["config"]["provenance"]["p"], "cli");
    assert_eq!(json["config"]["provenance"]["t_end"], "file");
    assert_eq!(json["mesh"]["triangles"], 18);
    assert_eq!(
        json["mesh"]["checksum"],
        format!("{:016x}", outcome.mesh_checksum)
    );
    assert_eq!(
        json["result"]["slabs"].as_array().unwrap().len(),
        outcome.slabs.len()
    );
    assert!(
        (json["result"]["errors"]["e2_v"].as_f64().unwrap() - outcome.report.e2_v).abs() < 1e-15
    );
    assert!(dir.path().join("fields_final.vtk").exists());
}

#[test]
fn convergence_study_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut base = parse_config("p = 1\np_gamma = 1\nt_end = 0.01\nvtk = false", &[]).unwrap();
    base.out = dir.path().to_path_buf();
    let reports = run_convergence_study(&[2, 3], &base).unwrap();
    assert!(reports[0].sigma_v.is_none() && reports[1].sigma_v.is_some());
    let csv = std::fs::read_to_string(dir.path().join("errors.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "elements,E2_p,E2_v,sigma_v,cpu_s,mem_mb");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("8,") && lines[2].starts_with("18,"));
    assert_eq!(lines[1].split(',').nth(3), Some(""));

    assert!(run_convergence_study(&[2], &base).is_err());
}
