//! Sampling checks of the regularity conditions on a constraint family
//! `x -> F_x`: a bounded Lipschitz admissible selection, and a translation
//! map between sites moving points by at most `C |x1 - x2|`.

use super::{ConstraintSet, Vector};
use crate::error::{Error, Result};
use crate::geometry::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyReport {
    pub sites: usize,
    /// Largest `|s(x)|` of the selection: the target for point targets,
    /// `g - x` for a fixed deformed point `g` of the first set when it lies
    /// in `F_x`, and the nearest point to 0 otherwise.
    pub selection_bound: f64,
    /// Largest observed `|s(x1) - s(x2)| / |x1 - x2|`.
    pub selection_lipschitz: f64,
    /// Largest observed `|Phi(u) - u| / |x1 - x2|` over sampled `u in F_x1`.
    pub translation_constant: f64,
    pub violations: Vec<String>,
}

impl FamilyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn diff(a: &Vector, b: &Vector, m: usize) -> f64 {
    (0..m).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt()
}

/// Natural map from `F_x1` to `F_x2`: shift by the target difference for
/// point targets, by the site difference otherwise.
fn translate(f1: &ConstraintSet, f2: &ConstraintSet, x1: Point, x2: Point, u: &Vector, m: usize) -> Vector {
    let mut out = *u;
    match (f1, f2) {
        (ConstraintSet::PointTarget { v: v1 }, ConstraintSet::PointTarget { v: v2 }) => {
            for i in 0..m {
                out[i] += v2[i] - v1[i];
            }
        }
        _ => {
            out[0] += x1[0] - x2[0];
            if m > 1 {
                out[1] += x1[1] - x2[1];
            }
        }
    }
    out
}

/// Spot-checks a constraint family on the given sites with `m`-component
/// displacements. Pairs whose constants exceed `max_constant` or whose
/// translated points leave `F_x2` are listed as violations.
pub fn validate_family(
    family: &dyn Fn(Point) -> ConstraintSet,
    sites: &[Point],
    m: usize,
    max_constant: f64,
) -> Result<FamilyReport> {
    if sites.len() < 2 {
        return Err(Error::invalid("family validation needs at least two sample sites"));
    }
    let sets: Vec<ConstraintSet> = sites.iter().map(|&x| family(x)).collect();
    for s in &sets {
        s.check(m)?;
    }
    let zero = vec![0.0; m];
    // one deformed point g of the first set; s(x) = g - x stays in every
    // F_x = G - x of a fixed G, nearest points fill in elsewhere
    let first = sets[0].project(sites[0], &zero).z;
    let anchor = [first[0] + sites[0][0], first[1] + sites[0][1], first[2]];
    let selections: Vec<Vector> = sets
        .iter()
        .zip(sites)
        .map(|(f, &x)| {
            if !matches!(f, ConstraintSet::PointTarget { .. }) {
                let cand = [anchor[0] - x[0], anchor[1] - x[1], anchor[2]];
                if f.distance(x, &cand[..m]) <= 1e-12 * (1.0 + norm(&cand[..m])) {
                    return cand;
                }
            }
            f.project(x, &zero).z
        })
        .collect();

    let mut report = FamilyReport {
        sites: sites.len(),
        selection_bound: selections.iter().map(|s| norm(&s[..m])).fold(0.0, f64::max),
        selection_lipschitz: 0.0,
        translation_constant: 0.0,
        violations: Vec::new(),
    };
    if !report.selection_bound.is_finite() {
        report.violations.push("selection is unbounded".into());
    }

    // a few fixed probes per site; their projections give points of F_x1
    let probes: [Vector; 4] = [[0.0; 3], [0.3, -0.2, 0.1], [-0.5, 0.4, -0.3], [1.0, 1.0, 1.0]];
    for i in 0..sites.len() {
        for j in 0..sites.len() {
            if i == j {
                continue;
            }
            let dx = (sites[i][0] - sites[j][0]).hypot(sites[i][1] - sites[j][1]);
            if dx == 0.0 {
                continue;
            }
            let lip = diff(&selections[i], &selections[j], m) / dx;
            report.selection_lipschitz = report.selection_lipschitz.max(lip);
            for probe in &probes {
                let u = sets[i].project(sites[i], &probe[..m]).z;
                let mapped = translate(&sets[i], &sets[j], sites[i], sites[j], &u, m);
                let miss = sets[j].distance(sites[j], &mapped[..m]);
                if miss > 1e-9 * (1.0 + norm(&mapped[..m])) {
                    report.violations.push(format!(
                        "translated point misses F at site ({:.4}, {:.4}) by {miss:.3e}",
                        sites[j][0], sites[j][1]
                    ));
                }
                let c = diff(&mapped, &u, m) / dx;
                report.translation_constant = report.translation_constant.max(c);
            }
        }
    }
    if report.selection_lipschitz > max_constant {
        report.violations.push(format!(
            "selection Lipschitz constant {:.4} exceeds {max_constant}",
            report.selection_lipschitz
        ));
    }
    if report.translation_constant > max_constant {
        report.violations.push(format!(
            "translation constant {:.4} exceeds {max_constant}",
            report.translation_constant
        ));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boundary_sites(n: usize) -> Vec<Point> {
        let mut s = Vec::new();
        for k in 1..n {
            let t = k as f64 / n as f64;
            s.extend([[t, 0.0], [1.0, t], [t, 1.0], [0.0, t]]);
        }
        s
    }

    #[test]
    fn circle_family_selection_is_lipschitz() {
        let family = |_x: Point| ConstraintSet::Circle {
            center: [0.5, 0.5],
            radius: 1.0,
        };
        let r = validate_family(&family, &boundary_sites(8), 2, 2.0).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        assert!(r.selection_lipschitz <= 2.0);
        assert!((r.translation_constant - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_family_is_trivial() {
        let family = |_x: Point| ConstraintSet::PointTarget { v: [0.1, 0.2, 0.0] };
        let r = validate_family(&family, &boundary_sites(4), 2, 1e-12).unwrap();
        assert!(r.passed());
        assert_eq!(r.translation_constant, 0.0);
    }

    #[test]
    fn point_target_constant_is_lipschitz_of_v() {
        // v(x) = (2 x1, 0) has Lipschitz constant 2
        let family = |x: Point| ConstraintSet::PointTarget {
            v: [2.0 * x[0], 0.0, 0.0],
        };
        let sites: Vec<Point> = (0..5).map(|k| [0.2 * k as f64, 0.3]).collect();
        let r = validate_family(&family, &sites, 2, 2.0 + 1e-12).unwrap();
        assert!(r.passed());
        assert!((r.translation_constant - 2.0).abs() < 1e-12);
    }

    #[test]
    fn needs_two_sites() {
        let family = |_x: Point| ConstraintSet::VerticalLine { x1c: 1.0 };
        assert!(validate_family(&family, &[[0.0, 0.0]], 2, 1.0).is_err());
    }
}
