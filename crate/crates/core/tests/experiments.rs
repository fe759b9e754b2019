use std::sync::Arc;

use perfhom::config::{parse_str, ExperimentId, RunConfig};
use perfhom::experiments::{
    build_experiment, edge_mean, error_metric, interior_segments, max_along, run_ladder, run_limit, Exclusion,
    RowStatus,
};
use perfhom::geometry::{build_square_mesh, BoundaryTag, DisplacementField};

fn config(id: &str, overrides: &[&str]) -> RunConfig {
    let mut all = vec![format!("experiment={id}")];
    all.extend(overrides.iter().map(|s| s.to_string()));
    parse_str("", &all).unwrap()
}

/// Minimizer of `a^p + c (0.2 - a)^p` over `[0, 0.2]`, by golden-section search.
fn edge_oracle(c: f64, p: f64) -> f64 {
    let f = |a: f64| a.powf(p) + c * (0.2 - a).powf(p);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (0.0, 0.2);
    for _ in 0..200 {
        let (x1, x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if f(x1) < f(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn bvp1_limit_is_a_homogeneous_stretch_short_of_the_line() {
    let exp = build_experiment(&config("bvp1", &["eps_ladder=0.25"])).unwrap();
    let row = run_limit(&exp);
    assert!(row.is_ok(), "{:?}", row.status);
    let u = row.field.as_ref().unwrap();

    let a = edge_oracle(1.602, 1.5);
    assert!((a - 0.14392).abs() < 2e-5, "oracle {a}");
    let mean = edge_mean(u, BoundaryTag::RIGHT, 0);
    assert!((mean - 0.14392).abs() < 0.02 * 0.14392, "edge mean {mean}");
    assert!(mean < 0.2);

    let mesh = u.mesh();
    let area = mesh.total_area();
    let grads: Vec<_> = (0..mesh.n_triangles())
        .map(|t| (mesh.triangle_area(t), u.gradient(t)))
        .collect();
    for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let mean = grads.iter().map(|(w, g)| w * g[i][j]).sum::<f64>() / area;
        let var = grads.iter().map(|(w, g)| w * (g[i][j] - mean).powi(2)).sum::<f64>() / area;
        assert!(var <= 1e-6, "variance of d{i}/d{j}: {var}");
    }
}

#[test]
fn bvp3_limit_leaves_the_plane_on_every_curve() {
    let exp = build_experiment(&config("bvp3", &["eps_ladder=0.2"])).unwrap();
    let row = run_limit(&exp);
    assert!(row.is_ok(), "{:?}", row.status);
    let u = row.field.as_ref().unwrap();
    assert_eq!(u.dim(), 3);
    for (a, b) in interior_segments(1.0) {
        let m = max_along(u, a, b, 2, 200);
        assert!(m > 0.05, "max |u3| = {m} on x1 = {}", a[0]);
    }
}

#[test]
fn error_metric_examples() {
    let coarse = Arc::new(build_square_mesh(1.0, 0.25, &[]).unwrap());
    let fine = Arc::new(build_square_mesh(1.0, 0.1, &[]).unwrap());
    let f = |x: [f64; 2]| [x[0] * x[1], x[0] - x[1], 0.0];
    let a = DisplacementField::from_fn(fine.clone(), 2, f);
    assert_eq!(error_metric(&a, &a, &[]).unwrap(), 0.0);

    let w = [0.3, -0.4];
    let b = DisplacementField::from_fn(fine.clone(), 2, |x| {
        let v = f(x);
        [v[0] + w[0], v[1] + w[1], 0.0]
    });
    let e = error_metric(&a, &b, &[]).unwrap();
    assert!((e - 0.5).abs() < 1e-12, "{e}");

    let all = Exclusion::ball([0.5, 0.5], 1.0);
    assert_eq!(error_metric(&a, &b, &[all]).unwrap(), 0.0);

    // affine fields interpolate exactly, so the mesh mismatch costs nothing
    let c = DisplacementField::from_fn(coarse, 2, |x| [2.0 * x[0], 1.0 - x[1], 0.0]);
    let d = DisplacementField::from_fn(fine, 2, |x| [x[0], 0.0, 0.0]);
    let (cd, dc) = (error_metric(&c, &d, &[]).unwrap(), error_metric(&d, &c, &[]).unwrap());
    assert_eq!(cd, dc);
    // |(x, 1 - y)|^2 integrates to 2/3
    assert!((cd - (2.0f64 / 3.0).sqrt()).abs() < 1e-12, "{cd}");

    let e3 = DisplacementField::zeros(a.mesh().clone(), 3);
    assert!(error_metric(&a, &e3, &[]).is_err());
}

#[test]
fn bulk_pin_with_zero_target_is_identically_zero() {
    let cfg = config("bulk_pin", &["target_amplitude=0", "eps_ladder=0.5,0.25"]);
    let report = run_ladder(&build_experiment(&cfg).unwrap());
    assert!(!report.partial());
    for r in report.rows.iter().chain(std::iter::once(&report.limit)) {
        assert_eq!(r.energy, 0.0);
        assert_eq!(r.l2_error, 0.0);
        assert!(r.field.as_ref().unwrap().values().iter().all(|&v| v == 0.0));
    }
}

#[test]
fn ladder_rows_are_reproducible() {
    let two = build_experiment(&config("bvp1", &["eps_ladder=0.5,0.25"])).unwrap();
    let (a, b) = (run_ladder(&two), run_ladder(&two));
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.to_csv().lines().count(), 1 + 2 + 1);

    let one = run_ladder(&build_experiment(&config("bvp1", &["eps_ladder=0.25"])).unwrap());
    let line = |csv: &str, eps: &str| {
        csv.lines()
            .find(|l| l.starts_with(&format!("bvp1,{eps},")))
            .unwrap()
            .to_string()
    };
    assert_eq!(line(&a.to_csv(), "0.25"), line(&one.to_csv(), "0.25"));
    assert_eq!(line(&a.to_csv(), "0"), line(&one.to_csv(), "0"));
}

#[test]
fn failed_solves_are_flagged_not_dropped() {
    let cfg = config("bvp1", &["eps_ladder=0.5,0.25", "max_iters=1", "tolerance=1e-14"]);
    let report = run_ladder(&build_experiment(&cfg).unwrap());
    assert!(report.partial());
    assert_eq!(report.rows.len(), 2);
    for r in &report.rows {
        assert!(matches!(r.status, RowStatus::Failed(_)));
    }
    let csv = report.to_csv();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().skip(1).take(2).all(|l| l.contains(",failed: ")), "{csv}");

    let dir = tempfile::tempdir().unwrap();
    let written = report.write(dir.path()).unwrap();
    assert!(written.iter().any(|p| p.ends_with("report.csv")));
    assert_eq!(std::fs::read_to_string(dir.path().join("report.csv")).unwrap(), csv);
}

#[test]
fn report_has_one_row_per_ladder_entry_and_a_limit_row() {
    let cfg = config("bvp1", &["eps_ladder=0.5,0.25"]);
    let exp = build_experiment(&cfg).unwrap();
    assert_eq!(exp.config.experiment.id, ExperimentId::Bvp1);
    let report = run_ladder(&exp);
    assert!(!report.partial());
    assert!(
        report.gaps_decrease() && report.errors_decrease(),
        "{}",
        report.to_csv()
    );
    let dir = tempfile::tempdir().unwrap();
    report.write(dir.path()).unwrap();
    for name in [
        "report.csv",
        "constants.csv",
        "field_eps1.vtk",
        "field_eps2.vtk",
        "field_limit.vtk",
    ] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}
