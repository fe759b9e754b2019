use perfhom::capacity::{solve_cell, CellGeometry, CellProblem, CellShape};
use perfhom::constraints::{ConstraintSet, PenaltyDensity};
use perfhom::materials::{EnergyModel, Mat32};
use proptest::prelude::*;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn flat(m: &Mat32) -> Vec<f64> {
    m.iter().flat_map(|r| r.iter().copied()).collect()
}

/// Central differences of the density, entry by entry.
fn fd_gradient(model: &EnergyModel, xi: &Mat32, rows: usize) -> Mat32 {
    let h = 1e-5;
    let mut g = [[0.0; 2]; 3];
    for r in 0..rows {
        for c in 0..2 {
            let (mut a, mut b) = (*xi, *xi);
            a[r][c] += h;
            b[r][c] -= h;
            g[r][c] = (model.density(&a).unwrap() - model.density(&b).unwrap()) / (2.0 * h);
        }
    }
    g
}

fn assert_gradient(model: &EnergyModel, xi: &Mat32, rows: usize) -> Result<(), TestCaseError> {
    let g = flat(&model.density_gradient(xi).unwrap());
    let fd = flat(&fd_gradient(model, xi, rows));
    let diff: Vec<f64> = g.iter().zip(&fd).map(|(a, b)| a - b).collect();
    prop_assert!(norm(&diff) <= 1e-6 * norm(&g), "{g:?} vs {fd:?}");
    Ok(())
}

fn mat(rows: usize) -> impl Strategy<Value = Mat32> {
    prop::array::uniform6(-1.0..1.0f64).prop_map(move |a| {
        let mut m = [[a[0], a[1]], [a[2], a[3]], [a[4], a[5]]];
        for r in m.iter_mut().skip(rows) {
            *r = [0.0; 2];
        }
        m
    })
}

fn unit() -> impl Strategy<Value = [f64; 2]> {
    (0.0..std::f64::consts::TAU).prop_map(|t| [t.cos(), t.sin()])
}

fn point() -> impl Strategy<Value = [f64; 2]> {
    prop::array::uniform2(-2.0..2.0f64)
}

/// Constraint sets usable with three-component values.
fn any_set() -> impl Strategy<Value = ConstraintSet> {
    prop_oneof![
        prop::array::uniform3(-1.0..1.0f64).prop_map(|v| ConstraintSet::PointTarget { v }),
        (-2.0..2.0f64).prop_map(|x1c| ConstraintSet::VerticalLine { x1c }),
        (point(), 0.1..2.0f64).prop_map(|(center, radius)| ConstraintSet::Circle { center, radius }),
        (-1.0..1.0f64, 0.1..1.0f64).prop_map(|(x2a, radius)| ConstraintSet::Cylinder { x2a, radius }),
        (unit(), -1.0..1.0f64).prop_map(|(normal, offset)| ConstraintSet::HalfPlane { normal, offset }),
        (point(), unit(), 0.0..0.95f64).prop_map(|(apex, axis, aperture)| ConstraintSet::Cone { apex, axis, aperture }),
    ]
}

/// Cones with apex at the origin, so that `z -> phi(0, z)` is `p`-homogeneous.
fn conic_set() -> impl Strategy<Value = ConstraintSet> {
    prop_oneof![
        Just(ConstraintSet::PointTarget { v: [0.0; 3] }),
        Just(ConstraintSet::VerticalLine { x1c: 0.0 }),
        unit().prop_map(|normal| ConstraintSet::HalfPlane { normal, offset: 0.0 }),
        (unit(), 0.0..0.95f64).prop_map(|(axis, aperture)| ConstraintSet::Cone {
            apex: [0.0; 2],
            axis,
            aperture
        }),
    ]
}

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    norm(&[a[0] - b[0], a[1] - b[1], a[2] - b[2]])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn p_norm_gradient_matches_differences(p in 1.05..1.95f64, xi in mat(3)) {
        prop_assume!(norm(&flat(&xi)) > 0.1);
        assert_gradient(&EnergyModel::p_norm(p).unwrap(), &xi, 3)?;
    }

    #[test]
    fn neo_hookean_gradient_matches_differences(
        mu in 0.2..5.0f64,
        lambda in 0.0..5.0f64,
        d in mat(2).prop_map(|m| m.map(|r| r.map(|x| 0.4 * x))),
    ) {
        let f = [[1.0 + d[0][0], d[0][1]], [d[1][0], 1.0 + d[1][1]], [0.0; 2]];
        prop_assume!(f[0][0] * f[1][1] - f[0][1] * f[1][0] > 0.2);
        assert_gradient(&EnergyModel::neo_hookean(mu, lambda).unwrap(), &f, 2)?;
    }

    #[test]
    fn penalty_is_p_homogeneous(
        set in conic_set(),
        p in 1.05..1.95f64,
        c in 0.1..10.0f64,
        z in prop::array::uniform3(-2.0..2.0f64),
        t in 0.01..10.0f64,
    ) {
        let phi = PenaltyDensity::new(c, p, set).unwrap();
        let tz = z.map(|v| t * v);
        let (a, b) = (phi.eval([0.0; 2], &tz), t.powf(p) * phi.eval([0.0; 2], &z));
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0), "{a} vs {b}");
    }

    #[test]
    fn penalty_vanishes_on_the_set(
        set in any_set(),
        p in 1.05..1.95f64,
        x in point(),
        z in prop::array::uniform3(-2.0..2.0f64),
    ) {
        let phi = PenaltyDensity::new(1.0, p, set).unwrap();
        let on = set.project(x, &z).z;
        prop_assert!(phi.eval(x, &on) <= 1e-12);
    }

    #[test]
    fn projection_is_idempotent(
        set in any_set(),
        x in point(),
        z in prop::array::uniform3(-2.0..2.0f64),
    ) {
        let once = set.project(x, &z).z;
        let twice = set.project(x, &once).z;
        prop_assert!(dist(&once, &twice) <= 1e-12 * (1.0 + norm(&z)), "{once:?} {twice:?}");
    }

    #[test]
    fn convex_projection_is_non_expansive(
        set in any_set(),
        x in point(),
        a in prop::array::uniform3(-2.0..2.0f64),
        b in prop::array::uniform3(-2.0..2.0f64),
    ) {
        prop_assume!(set.is_convex());
        let (pa, pb) = (set.project(x, &a).z, set.project(x, &b).z);
        prop_assert!(dist(&pa, &pb) <= dist(&a, &b) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn capacity_does_not_increase_with_radius(
        p in 1.2..1.8f64,
        segment in any::<bool>(),
        r in prop::sample::select(vec![4.0, 8.0]),
    ) {
        let (geometry, shape) = if segment {
            (CellGeometry::HalfBall, CellShape::Segment)
        } else {
            (CellGeometry::FullBall, CellShape::Disk { radius: 0.5 })
        };
        let small = CellProblem { angular: 24, ..CellProblem::scalar(geometry, shape, p, r) };
        let (a, b) = (solve_cell(&small).unwrap(), solve_cell(&small.with_radius(2.0 * r)).unwrap());
        prop_assert!(b <= a * (1.0 + 1e-10), "R = {r}: {a} then {b}");
    }
}
