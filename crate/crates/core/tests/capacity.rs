use std::f64::consts::PI;

use perfhom::capacity::*;
use perfhom::constraints::ConstraintSet;
use perfhom::Error;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Radial p-harmonic capacity of the annulus `r < |x| < big_r` in the plane,
/// `2 pi (int_r^R s^(-1/(p-1)) ds)^(1-p)`, with the integral done by Simpson's
/// rule in `log s`.
fn annulus_capacity(p: f64, r: f64, big_r: f64) -> f64 {
    let n = 4000;
    let (a, b) = (r.ln(), big_r.ln());
    let h = (b - a) / n as f64;
    let g = |t: f64| (t * (1.0 - 1.0 / (p - 1.0))).exp();
    let mut s = g(a) + g(b);
    for i in 1..n {
        s += g(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    2.0 * PI * (s * h / 3.0).powf(1.0 - p)
}

fn disk(geometry: CellGeometry, radius: f64, p: f64, big_r: f64) -> CellProblem {
    CellProblem::scalar(geometry, CellShape::Disk { radius }, p, big_r)
}

#[test]
fn disk_cell_matches_radial_oracle() {
    for (p, r) in [(1.5, 1.0), (4.0 / 3.0, 0.5)] {
        let v = solve_cell(&disk(CellGeometry::FullBall, r, p, 8.0)).unwrap();
        let exact = annulus_capacity(p, r, 8.0);
        assert!(rel(v, exact) < 5e-3, "p = {p}: {v} vs {exact}");
    }
}

#[test]
fn interior_disk_reaches_closed_form() {
    let p = 4.0 / 3.0;
    let est = interior_disk_capacity(p, 64).unwrap();
    let formula = PI * 4.0_f64.powf(1.0 / 3.0);
    assert!(rel(est.phi_inf, formula) < 0.03);
    let radial = 2.0 * PI * ((2.0 - p) / (p - 1.0)).powf(p - 1.0) * 0.5_f64.powf(2.0 - p);
    assert!(rel(radial, formula) < 1e-12);
    assert!(rel(est.phi_inf, annulus_capacity(p, 0.5, 1e12)) < 0.01);
    assert!(est.beta.unwrap() > 0.0);
}

#[test]
fn radial_ladder_extrapolates_to_two_pi() {
    let problem = disk(CellGeometry::FullBall, 1.0, 1.5, 8.0);
    let est = capacity_ladder(&problem, &DEFAULT_RADII).unwrap();
    assert!(rel(est.phi_inf, 2.0 * PI) < 0.01, "{}", est.phi_inf);
    assert!(est.phi_inf <= est.values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min) + est.error);
}

#[test]
fn boundary_segment_constant() {
    let est = boundary_segment_capacity(1.5, 64).unwrap();
    assert!(rel(est.phi_inf, 1.602) < 0.03, "{}", est.phi_inf);
    assert!(est.to_csv().starts_with("R,phi_R,fitted_beta,phi_inf,err\n"));
    assert_eq!(est.to_csv().lines().count(), 4);
}

#[test]
fn capacity_is_p_homogeneous_in_the_datum() {
    for p in [4.0 / 3.0, 1.5] {
        let one = CellProblem::scalar(CellGeometry::HalfBall, CellShape::Segment, p, 8.0);
        let two = CellProblem {
            datum: [2.0, 0.0, 0.0],
            ..one.clone()
        };
        let (a, b) = (solve_cell(&one).unwrap(), solve_cell(&two).unwrap());
        assert!(rel(b / a, 2.0_f64.powf(p)) < 1e-6, "p = {p}");
    }
}

#[test]
fn full_segment_halves_to_half_ball() {
    let half = CellProblem::scalar(CellGeometry::HalfBall, CellShape::Segment, 1.5, 8.0);
    let full = CellProblem::scalar(CellGeometry::FullBall, CellShape::Segment, 1.5, 8.0);
    let (h, f) = (solve_cell(&half).unwrap(), solve_cell(&full).unwrap());
    assert!(rel(0.5 * f, h) < 0.01, "{h} vs {f}");
}

#[test]
fn reflected_mesh_gives_exact_half() {
    for p in [4.0 / 3.0, 1.5] {
        let half = disk(CellGeometry::HalfBall, 0.5, p, 8.0);
        let full = CellProblem {
            geometry: CellGeometry::FullBall,
            mesh: CellMesh::Reflected,
            ..half.clone()
        };
        let (h, f) = (solve_cell(&half).unwrap(), solve_cell(&full).unwrap());
        assert!((h / f - 0.5).abs() <= 1e-10, "p = {p}: {}", h / f);
    }
}

#[test]
fn half_space_factor() {
    for p in [4.0 / 3.0, 1.5] {
        let check = half_space_factor_check(p, 48).unwrap();
        assert!((check.ratio - 0.5).abs() < 0.015, "p = {p}: {}", check.ratio);
    }
}

#[test]
fn vector_datum_reduces_to_scalar() {
    let p = 1.5;
    let scalar = disk(CellGeometry::FullBall, 0.5, p, 8.0);
    let u = [0.6, -1.2, 0.0];
    let vector = CellProblem {
        datum: u,
        dim: 2,
        constraint: ConstraintSet::PointTarget { v: [0.0; 3] },
        ..scalar.clone()
    };
    let norm = u[0].hypot(u[1]);
    let (s, v) = (solve_cell(&scalar).unwrap(), solve_cell(&vector).unwrap());
    assert!(rel(v, norm.powf(p) * s) < 0.01);
}

#[test]
fn capacity_scales_with_disk_radius() {
    let p = 1.5;
    let at = |r: f64| capacity_ladder(&disk(CellGeometry::FullBall, r, p, 8.0), &DEFAULT_RADII).unwrap();
    let (small, unit) = (at(0.5), at(1.0));
    assert!(rel(small.phi_inf, 0.5_f64.powf(2.0 - p) * unit.phi_inf) < 0.01);
}

#[test]
fn circle_constraint_gives_dist_to_the_p() {
    let p = 1.5;
    let base = CellProblem {
        constraint: ConstraintSet::Circle {
            center: [0.0, 0.0],
            radius: 1.0,
        },
        dim: 2,
        ..disk(CellGeometry::FullBall, 0.5, p, 8.0)
    };
    let ratios: Vec<f64> = [0.2, 0.5, 1.0]
        .iter()
        .map(|&s| {
            let problem = CellProblem {
                datum: [1.0 + s, 0.0, 0.0],
                ..base.clone()
            };
            solve_cell(&problem).unwrap() / s.powf(p)
        })
        .collect();
    for r in &ratios {
        assert!(rel(*r, ratios[0]) < 0.02, "{ratios:?}");
    }
}

#[test]
fn values_do_not_increase_with_radius() {
    for problem in [
        disk(CellGeometry::FullBall, 0.5, 4.0 / 3.0, 4.0),
        CellProblem::scalar(CellGeometry::HalfBall, CellShape::Segment, 1.5, 4.0),
    ] {
        let v: Vec<f64> = [4.0, 8.0, 16.0, 32.0]
            .iter()
            .map(|&r| solve_cell(&problem.with_radius(r)).unwrap())
            .collect();
        for w in v.windows(2) {
            assert!(w[1] <= w[0] + 1e-10 * w[0], "{v:?}");
        }
    }
}

#[test]
fn datum_in_constraint_costs_nothing() {
    let problem = CellProblem {
        constraint: ConstraintSet::Circle {
            center: [0.0, 0.0],
            radius: 1.0,
        },
        dim: 2,
        datum: [0.6, 0.8, 0.0],
        ..disk(CellGeometry::FullBall, 0.5, 1.5, 8.0)
    };
    assert_eq!(solve_cell(&problem).unwrap(), 0.0);
}

#[test]
fn invalid_cells_are_rejected() {
    let bad = [
        disk(CellGeometry::FullBall, 0.5, 1.5, 2.0),
        disk(CellGeometry::FullBall, 1.5, 1.5, 8.0),
        disk(CellGeometry::FullBall, 0.5, 2.5, 8.0),
        CellProblem {
            mesh: CellMesh::Reflected,
            ..disk(CellGeometry::HalfBall, 0.5, 1.5, 8.0)
        },
    ];
    for problem in bad {
        assert!(
            matches!(solve_cell(&problem), Err(Error::InvalidArgument(_))),
            "{problem:?}"
        );
    }
}

#[test]
fn critical_case_annulus() {
    let ladder = [10.0, 100.0, 1000.0];
    let zero = ConstraintSet::PointTarget { v: [0.0; 3] };
    let one = critical_case_density(1.0, zero, [1.0, 0.0, 0.0], 1, &ladder, 64).unwrap();
    assert!(rel(one.phi, 2.0 * PI) < 0.03, "{}", one.phi);
    // T = 10: m_T = 2 pi / log T exactly for the continuous annulus
    let first = one.scaled.values[0].1;
    assert!(rel(first, 2.0 * PI) < 0.01);

    let scaled = critical_case_density(1.9, zero, [1.0, 0.0, 0.0], 1, &ladder, 64).unwrap();
    assert_eq!(scaled.phi, one.phi / 1.9);

    let three = critical_case_density(1.0, zero, [3.0, 0.0, 0.0], 1, &ladder, 64).unwrap();
    assert!(rel(three.phi, 9.0 * one.phi) < 1e-6);

    assert!(critical_case_density(1.0, zero, [1.0, 0.0, 0.0], 1, &[5.0, 50.0, 500.0], 64).is_err());
}
