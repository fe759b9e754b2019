//! Boundary-value problems on the unit square with perforations along edges,
//! interior segments or the bulk, solved along an `eps` ladder and compared
//! with their relaxed limit.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;

use crate::capacity::{
    ball_capacity_formula, boundary_segment_capacity, capacity_ladder, critical_case_density, interior_disk_capacity,
    CapacityEstimate, CellGeometry, CellProblem, CellShape, CriticalEstimate,
};
use crate::config::{CapacitySource, CellShapeKind, DeltaPolicy, ExperimentId, RunConfig};
use crate::constraints::{ConstraintSet, PenaltyDensity, Vector};
use crate::error::{Error, Result};
use crate::geometry::layout::{boundary_perforation, bulk_perforation, interior_perforation_on_curve, Curve};
use crate::geometry::{
    build_square_mesh, conforming_refine_to_layout, BoundaryTag, DisplacementField, ElementShape, Locator, Mesh,
    PerforationLayout, Point, RefineOptions, Scaling, ScalingRule,
};
use crate::io::{trace_csv, vtk_string};
use crate::materials::EnergyModel;
use crate::minimize::{
    perforated_functional, solve, solve_limit, ConstraintFamily, DirichletData, LimitPenalty, LimitProblem,
    PenaltyRegion, TraceRow,
};

const ALL_SIDES: [BoundaryTag; 4] = [
    BoundaryTag::BOTTOM,
    BoundaryTag::RIGHT,
    BoundaryTag::TOP,
    BoundaryTag::LEFT,
];

/// Amplitude of the out-of-plane seed that leaves the flat critical point.
const OUT_OF_PLANE_SEED: f64 = 1e-3;

pub type Seed = Arc<dyn Fn(Point) -> Vector + Send + Sync>;

/// One ladder entry: the layout and the mesh resolving it.
#[derive(Debug, Clone)]
pub struct Level {
    pub epsilon: f64,
    /// Element size used, after any clamping.
    pub delta: f64,
    /// `delta(eps)` from the scaling rule.
    pub nominal_delta: f64,
    pub layout: PerforationLayout,
    pub mesh: Arc<Mesh>,
}

pub struct Experiment {
    pub config: RunConfig,
    pub model: EnergyModel,
    pub dim: usize,
    pub dirichlet: Vec<DirichletData>,
    pub family: ConstraintFamily,
    pub limit: LimitProblem,
    pub limit_mesh: Arc<Mesh>,
    pub levels: Vec<Level>,
    pub capacity: f64,
    pub capacity_note: String,
    /// Initial guess of every solve; zero when absent.
    pub seed: Option<Seed>,
}

impl Experiment {
    fn seed_field(&self, mesh: &Arc<Mesh>) -> Option<DisplacementField> {
        self.seed
            .as_ref()
            .map(|s| DisplacementField::from_fn(mesh.clone(), self.dim, |x| s(x)))
    }
}

fn scaling_rule(cfg: &RunConfig) -> ScalingRule {
    let e = &cfg.experiment;
    match e.id {
        ExperimentId::BulkPin => ScalingRule::bulk(e.p),
        ExperimentId::NeoHookean => ScalingRule::Exponential {
            kappa: e.kappa,
            exponent: 2.0,
        },
        _ => ScalingRule::surface(e.p),
    }
}

/// Constraint family `x -> F_x` of the experiment.
pub fn constraint_family(cfg: &RunConfig) -> Result<ConstraintFamily> {
    let e = cfg.experiment.clone();
    Ok(match e.id {
        ExperimentId::Bvp1 | ExperimentId::NeoHookean => {
            let c = ConstraintSet::VerticalLine { x1c: e.x1c };
            ConstraintFamily::new(move |_| c)
        }
        ExperimentId::Bvp2 => {
            let c = ConstraintSet::Circle {
                center: [e.x1c, e.x2c],
                radius: e.radius,
            };
            ConstraintFamily::new(move |_| c)
        }
        ExperimentId::Bvp3 => {
            let c = ConstraintSet::Cylinder {
                x2a: e.x2a,
                radius: e.radius,
            };
            ConstraintFamily::new(move |_| c)
        }
        ExperimentId::Bvp4 => {
            let c = ConstraintSet::half_plane([1.0, 1.0], e.halfplane_sum)?;
            ConstraintFamily::new(move |_| c)
        }
        ExperimentId::BulkPin => {
            let (a, ell) = (e.target_amplitude, e.ell);
            ConstraintFamily::new(move |x| ConstraintSet::PointTarget {
                v: [a * (PI * x[0] / ell).sin(), a * (PI * x[1] / ell).sin(), 0.0],
            })
        }
    })
}

/// Penalty constant and a note on where it came from.
pub fn resolve_capacity(cfg: &RunConfig) -> Result<(f64, String)> {
    let e = &cfg.experiment;
    let c = &cfg.capacity;
    let disks = matches!(e.id, ExperimentId::Bvp3 | ExperimentId::BulkPin);
    match (c.source, e.id) {
        (CapacitySource::Literal(v), _) => Ok((v, format!("literal {v}"))),
        (CapacitySource::Analytic, ExperimentId::NeoHookean) => {
            // half of the annulus constant 2 pi for the recession density mu/2 |xi|^2
            let v = 0.5 * e.mu * PI / e.kappa;
            Ok((v, "analytic critical half-space density mu pi / (2 kappa)".into()))
        }
        (CapacitySource::Analytic, _) if disks => Ok((
            ball_capacity_formula(e.p),
            format!("analytic disk capacity at p = {}", e.p),
        )),
        (CapacitySource::Analytic, _) => Err(Error::Config(
            "source: boundary segments have no closed-form capacity; use computed or literal".into(),
        )),
        (CapacitySource::Computed, ExperimentId::NeoHookean) => {
            let est = critical_case_density(
                e.kappa,
                ConstraintSet::PointTarget { v: [0.0; 3] },
                [1.0, 0.0, 0.0],
                1,
                &c.critical_ladder,
                c.angular,
            )?;
            let v = 0.25 * e.mu * est.phi;
            Ok((
                v,
                format!("computed critical density (log-scaled limit {:.6})", est.scaled.phi_inf),
            ))
        }
        (CapacitySource::Computed, _) => {
            let est = if disks {
                interior_disk_capacity(e.p, c.angular)?
            } else {
                boundary_segment_capacity(e.p, c.angular)?
            };
            Ok((
                est.phi_inf,
                format!("computed, beta {:?}, error {:.3e}", est.beta, est.error),
            ))
        }
    }
}

/// Result of a stand-alone capacity run.
#[derive(Debug, Clone)]
pub enum CapacityRun {
    Ladder(CapacityEstimate),
    Critical(CriticalEstimate),
}

impl CapacityRun {
    pub fn value(&self) -> f64 {
        match self {
            Self::Ladder(e) => e.phi_inf,
            Self::Critical(c) => c.phi,
        }
    }

    /// Ladder diagnostics as CSV (the log-scaled ladder for the critical case).
    pub fn to_csv(&self) -> String {
        match self {
            Self::Ladder(e) => e.to_csv(),
            Self::Critical(c) => c.scaled.to_csv(),
        }
    }
}

/// Cell problem selected by the `[capacity]` section, with exponent
/// `cell_p`, scalar datum `datum` and the constraint `{0}`.
pub fn run_capacity(cfg: &RunConfig) -> Result<CapacityRun> {
    let c = &cfg.capacity;
    let datum = [c.datum, 0.0, 0.0];
    let cell = |geometry, shape| CellProblem {
        angular: c.angular,
        datum,
        ..CellProblem::scalar(geometry, shape, c.cell_p, c.radii[0])
    };
    let half = CellShape::Disk { radius: 0.5 };
    Ok(match c.shape {
        CellShapeKind::BoundarySegment => CapacityRun::Ladder(capacity_ladder(
            &cell(CellGeometry::HalfBall, CellShape::Segment),
            &c.radii,
        )?),
        CellShapeKind::InteriorDisk => {
            CapacityRun::Ladder(capacity_ladder(&cell(CellGeometry::FullBall, half), &c.radii)?)
        }
        CellShapeKind::HalfDisk => CapacityRun::Ladder(capacity_ladder(&cell(CellGeometry::HalfBall, half), &c.radii)?),
        CellShapeKind::Critical => CapacityRun::Critical(critical_case_density(
            cfg.experiment.kappa,
            ConstraintSet::PointTarget { v: [0.0; 3] },
            datum,
            1,
            &c.critical_ladder,
            c.angular,
        )?),
    })
}

fn dirichlet(id: ExperimentId) -> Vec<DirichletData> {
    match id {
        ExperimentId::Bvp1 | ExperimentId::Bvp4 | ExperimentId::NeoHookean => {
            vec![DirichletData::zero(vec![BoundaryTag::LEFT])]
        }
        ExperimentId::Bvp2 => Vec::new(),
        ExperimentId::Bvp3 => vec![DirichletData::zero(vec![BoundaryTag::TOP, BoundaryTag::BOTTOM])],
        ExperimentId::BulkPin => vec![DirichletData::zero(ALL_SIDES.to_vec())],
    }
}

/// Interior segments `{x1} x (ell/10, 9 ell/10)` at `x1 in {ell/10, ell/2, 9 ell/10}`.
pub fn interior_segments(ell: f64) -> [(Point, Point); 3] {
    [0.1, 0.5, 0.9].map(|s| ([s * ell, 0.1 * ell], [s * ell, 0.9 * ell]))
}

fn layout_for(cfg: &RunConfig, mesh: &Mesh, scaling: &Scaling, fam: &ConstraintFamily) -> Result<PerforationLayout> {
    let f = |x: Point| fam.at(x);
    let e = &cfg.experiment;
    match e.id {
        ExperimentId::Bvp1 | ExperimentId::Bvp4 | ExperimentId::NeoHookean => {
            boundary_perforation(mesh, BoundaryTag::RIGHT, scaling, &f)
        }
        ExperimentId::Bvp2 => {
            let mut layout = PerforationLayout::empty(*scaling);
            for tag in ALL_SIDES {
                layout.merge(boundary_perforation(mesh, tag, scaling, &f)?)?;
            }
            Ok(layout)
        }
        ExperimentId::Bvp3 => {
            let mut layout = PerforationLayout::empty(*scaling);
            for (a, b) in interior_segments(e.ell) {
                let psi = move |t: f64| [a[0], t];
                let curve = Curve {
                    psi: &psi,
                    t0: a[1],
                    t1: b[1],
                };
                layout.merge(interior_perforation_on_curve(mesh, &curve, scaling, &f)?)?;
            }
            Ok(layout)
        }
        ExperimentId::BulkPin => bulk_perforation(mesh, &|y| y, None, scaling, &f),
    }
}

fn limit_penalties(cfg: &RunConfig, c: f64, fam: &ConstraintFamily) -> Result<Vec<LimitPenalty>> {
    let e = &cfg.experiment;
    let p = if e.id == ExperimentId::NeoHookean { 2.0 } else { e.p };
    let constraint = fam.at([0.5 * e.ell, 0.5 * e.ell]);
    let mut density = PenaltyDensity::new(c, p, constraint)?;
    let edge = |tags: Vec<BoundaryTag>, density: PenaltyDensity| LimitPenalty {
        region: PenaltyRegion::BoundaryEdges(tags),
        density,
        rho: 1.0,
        family: None,
    };
    Ok(match e.id {
        ExperimentId::Bvp1 | ExperimentId::NeoHookean => vec![edge(vec![BoundaryTag::RIGHT], density)],
        ExperimentId::Bvp2 => {
            density.boundary_flag = true;
            vec![edge(ALL_SIDES.to_vec(), density)]
        }
        ExperimentId::Bvp4 => vec![edge(vec![BoundaryTag::RIGHT], density.with_step(e.step_sharpness)?)],
        ExperimentId::Bvp3 => interior_segments(e.ell)
            .into_iter()
            .map(|(a, b)| LimitPenalty {
                region: PenaltyRegion::Segment { a, b },
                density,
                rho: 1.0,
                family: None,
            })
            .collect(),
        ExperimentId::BulkPin => vec![LimitPenalty {
            region: PenaltyRegion::Cells,
            density,
            rho: 1.0,
            family: Some(fam.clone()),
        }],
    })
}

fn seed(cfg: &RunConfig) -> Option<Seed> {
    let e = &cfg.experiment;
    let ell = e.ell;
    match e.id {
        ExperimentId::Bvp3 => Some(Arc::new(move |x: Point| {
            [0.0, 0.0, OUT_OF_PLANE_SEED * (PI * x[1] / ell).sin()]
        })),
        ExperimentId::NeoHookean => {
            // homogeneous stretch meeting the line constraint on the right edge
            let s = (e.x1c - ell) / ell;
            Some(Arc::new(move |x: Point| [s * x[0], 0.0, 0.0]))
        }
        _ => None,
    }
}

/// Element size at `eps`, clamped or rejected below the floor.
pub fn level_scaling(cfg: &RunConfig, epsilon: f64) -> Result<(Scaling, f64)> {
    let rule = scaling_rule(cfg);
    let nominal = rule.delta(epsilon).unwrap_or(0.0);
    let floor = cfg.mesh.delta_floor;
    if nominal >= floor {
        return Ok((Scaling::new(epsilon, nominal, rule)?, nominal));
    }
    match cfg.mesh.delta_policy {
        DeltaPolicy::Clamp => {
            warn!("eps = {epsilon}: delta = {nominal:.3e} is below the floor {floor:.3e}; clamped");
            Ok((Scaling::explicit(epsilon, floor)?, nominal))
        }
        DeltaPolicy::Error => Err(Error::Config(format!(
            "eps = {epsilon} gives delta = {nominal:.3e}, below the resolvable floor {floor:.3e}; \
             use a larger eps or lower delta_floor with a finer h"
        ))),
    }
}

/// Meshes, layouts and the limit problem of a configuration.
pub fn build_experiment(config: &RunConfig) -> Result<Experiment> {
    config.check()?;
    let e = &config.experiment;
    let model = match e.id {
        ExperimentId::NeoHookean => EnergyModel::neo_hookean(e.mu, e.lambda)?,
        _ => EnergyModel::p_norm(e.p)?,
    };
    let dim = if e.id == ExperimentId::Bvp3 { 3 } else { 2 };
    let fam = constraint_family(config)?;
    let (capacity, capacity_note) = resolve_capacity(config)?;
    info!("{}: penalty constant {capacity:.6} ({capacity_note})", e.id.name());
    let dirichlet = dirichlet(e.id);
    let limit = LimitProblem {
        model,
        dim,
        dirichlet: dirichlet.clone(),
        penalties: limit_penalties(config, capacity, &fam)?,
    };
    let limit_mesh = Arc::new(build_square_mesh(e.ell, config.mesh.limit_h, &[])?);
    let base = build_square_mesh(e.ell, config.mesh.h, &[])?;
    let refine = RefineOptions {
        resolve_factor: config.mesh.resolve_factor,
        grading: config.mesh.grading,
        max_vertices: config.mesh.max_vertices,
        snap: true,
    };
    let levels = e
        .eps_ladder
        .par_iter()
        .map(|&epsilon| {
            let (scaling, nominal_delta) = level_scaling(config, epsilon)?;
            let layout = layout_for(config, &base, &scaling, &fam)?;
            if layout.is_empty() {
                return Err(Error::Layout(format!("eps = {epsilon} places no perforation")));
            }
            let mesh = Arc::new(conforming_refine_to_layout(&base, &layout, &refine)?);
            Ok(Level {
                epsilon,
                delta: scaling.delta,
                nominal_delta,
                layout,
                mesh,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Experiment {
        config: config.clone(),
        model,
        dim,
        dirichlet,
        family: fam,
        limit,
        limit_mesh,
        levels,
        capacity,
        capacity_note,
        seed: seed(config),
    })
}

/// Points closer than `margin` to `shape` are left out of the error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exclusion {
    pub shape: ElementShape,
    pub margin: f64,
}

impl Exclusion {
    /// Open ball of the given radius.
    pub fn ball(center: Point, radius: f64) -> Self {
        Self {
            shape: ElementShape::Disk { center, radius: 0.0 },
            margin: radius,
        }
    }

    fn covers(&self, p: Point) -> bool {
        self.shape.distance(p) < self.margin
    }
}

/// `L^2` distance between two fields outside the exclusions, by the
/// edge-midpoint rule on the mesh with more triangles (the other field is
/// interpolated onto it).
pub fn error_metric(a: &DisplacementField, b: &DisplacementField, exclusions: &[Exclusion]) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::invalid("fields have different dimensions"));
    }
    let dim = a.dim();
    let (host, other) = if b.mesh().n_triangles() > a.mesh().n_triangles() {
        (b, a)
    } else {
        (a, b)
    };
    let mesh = host.mesh();
    let moved;
    let other = if Arc::ptr_eq(other.mesh(), mesh) {
        other
    } else {
        moved = other.interpolate_to(mesh.clone(), dim)?;
        &moved
    };
    let (hv, ov) = (host.values(), other.values());
    let mut sum = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let pts = mesh.triangle_points(t);
        let w = mesh.triangle_area(t) / 3.0;
        for (i, j) in [(0, 1), (1, 2), (2, 0)] {
            let m = [0.5 * (pts[i][0] + pts[j][0]), 0.5 * (pts[i][1] + pts[j][1])];
            if exclusions.iter().any(|x| x.covers(m)) {
                continue;
            }
            let mut d2 = 0.0;
            for k in 0..dim {
                let d = 0.5 * (hv[tri[i] * dim + k] + hv[tri[j] * dim + k])
                    - 0.5 * (ov[tri[i] * dim + k] + ov[tri[j] * dim + k]);
                d2 += d * d;
            }
            sum += w * d2;
        }
    }
    Ok(sum.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Ok,
    Failed(String),
}

/// One solve of a ladder; `epsilon` is `None` for the limit problem.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub epsilon: Option<f64>,
    pub delta: f64,
    pub energy: f64,
    pub energy_limit_gap: f64,
    pub l2_error: f64,
    pub iterations: usize,
    pub seconds: f64,
    pub status: RowStatus,
    pub elements: usize,
    pub dropped: usize,
    /// Smallest deformation Jacobian, for models that require `J > 0`.
    pub min_jacobian: Option<f64>,
    pub field: Option<DisplacementField>,
    pub trace: Vec<TraceRow>,
}

impl ReportRow {
    fn failed(epsilon: Option<f64>, delta: f64, elements: usize, seconds: f64, err: &Error) -> Self {
        Self {
            epsilon,
            delta,
            energy: f64::NAN,
            energy_limit_gap: f64::NAN,
            l2_error: f64::NAN,
            iterations: 0,
            seconds,
            status: RowStatus::Failed(err.to_string()),
            elements,
            dropped: 0,
            min_jacobian: None,
            field: None,
            trace: Vec::new(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == RowStatus::Ok
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub experiment: ExperimentId,
    pub capacity: f64,
    pub capacity_note: String,
    pub rows: Vec<ReportRow>,
    pub limit: ReportRow,
    pub record_timings: bool,
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[1] < w[0])
}

impl ConvergenceReport {
    pub fn partial(&self) -> bool {
        !self.limit.is_ok() || self.rows.iter().any(|r| !r.is_ok())
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.energy_limit_gap).collect()
    }

    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.l2_error).collect()
    }

    pub fn gaps_decrease(&self) -> bool {
        strictly_decreasing(&self.gaps())
    }

    pub fn errors_decrease(&self) -> bool {
        strictly_decreasing(&self.errors())
    }

    /// `experiment,eps,delta,energy,energy_limit_gap,l2_error,iters,seconds,status`,
    /// one row per ladder entry and a final limit row with `eps = 0`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("experiment,eps,delta,energy,energy_limit_gap,l2_error,iters,seconds,status\n");
        for r in self.rows.iter().chain(std::iter::once(&self.limit)) {
            let status = match &r.status {
                RowStatus::Ok if r.epsilon.is_none() => "limit".to_string(),
                RowStatus::Ok => "ok".to_string(),
                RowStatus::Failed(m) => format!("failed: {}", m.replace([',', '\n'], ";")),
            };
            let seconds = if self.record_timings {
                format!("{:.3}", r.seconds)
            } else {
                "0".to_string()
            };
            let _ = writeln!(
                s,
                "{},{},{:.10e},{:.12e},{:.6e},{:.6e},{},{},{}",
                self.experiment.name(),
                r.epsilon.unwrap_or(0.0),
                r.delta,
                r.energy,
                r.energy_limit_gap,
                r.l2_error,
                r.iterations,
                seconds,
                status
            );
        }
        s
    }

    /// One line per row for terminal output.
    pub fn summary_lines(&self) -> Vec<String> {
        self.rows
            .iter()
            .chain(std::iter::once(&self.limit))
            .map(|r| {
                let head = match r.epsilon {
                    Some(e) => format!("{} eps={e:<8.5} delta={:.3e}", self.experiment.name(), r.delta),
                    None => format!("{} limit", self.experiment.name()),
                };
                match &r.status {
                    RowStatus::Ok => format!(
                        "{head} energy={:.8e} gap={:.3e} l2={:.3e} iters={}",
                        r.energy, r.energy_limit_gap, r.l2_error, r.iterations
                    ),
                    RowStatus::Failed(m) => format!("{head} FAILED: {m}"),
                }
            })
            .collect()
    }

    /// Writes `report.csv`, `constants.csv`, and a VTK field (plus a trace
    /// CSV when recorded) per row. Returns the written paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut put = |name: String, text: String| -> Result<()> {
            let path = dir.join(name);
            fs::write(&path, text)?;
            written.push(path);
            Ok(())
        };
        put("report.csv".into(), self.to_csv())?;
        put(
            "constants.csv".into(),
            format!(
                "name,value,note\ncapacity,{:.12e},{}\n",
                self.capacity,
                self.capacity_note.replace(',', ";")
            ),
        )?;
        let named = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (format!("eps{}", i + 1), r))
            .chain(std::iter::once(("limit".to_string(), &self.limit)));
        for (tag, r) in named {
            if !r.trace.is_empty() {
                put(format!("trace_{tag}.csv"), trace_csv(&r.trace))?;
            }
            if let Some(u) = &r.field {
                put(format!("field_{tag}.vtk"), vtk_string(u.mesh(), Some(u))?)?;
            }
        }
        Ok(written)
    }
}

/// Solves the limit problem alone.
pub fn run_limit(exp: &Experiment) -> ReportRow {
    let opts = exp.config.solver.options();
    let start = Instant::now();
    let seed = exp.seed_field(&exp.limit_mesh);
    match solve_limit(exp.limit_mesh.clone(), &exp.limit, &opts, seed.as_ref()) {
        Ok((f, out)) => {
            let min_jacobian = if exp.model.uses_deformation_gradient() {
                f.min_jacobian(&out.field).ok()
            } else {
                None
            };
            ReportRow {
                epsilon: None,
                delta: 0.0,
                energy: out.energy,
                energy_limit_gap: 0.0,
                l2_error: 0.0,
                iterations: out.iterations,
                seconds: start.elapsed().as_secs_f64(),
                status: RowStatus::Ok,
                elements: 0,
                dropped: 0,
                min_jacobian,
                field: Some(out.field),
                trace: out.trace,
            }
        }
        Err(err) => {
            warn!("{} limit solve failed: {err}", exp.config.experiment.id.name());
            ReportRow::failed(None, 0.0, 0, start.elapsed().as_secs_f64(), &err)
        }
    }
}

/// Limit field plus, around each element, the planar capacitary profile
/// carrying it onto the element's set, cut off at half the spacing `R`:
/// `1 - acosh(rho / a) / acosh(R / a)` for a segment of half-length `a`
/// (with `rho` the mean distance to its endpoints) and
/// `1 - ln(r / a) / ln(R / a)` for a disk of radius `a`. `None` when the
/// result would fold an element.
fn warm_start(exp: &Experiment, level: &Level, limit: &DisplacementField) -> Result<Option<DisplacementField>> {
    let dim = exp.dim;
    let mut values = limit.interpolate_to(level.mesh.clone(), dim)?.into_values();
    let loc = Locator::new(&exp.limit_mesh);
    let big_r = 0.5 * level.epsilon;
    for e in &level.layout.elements {
        let (a, profile): (f64, Box<dyn Fn(Point) -> f64>) = match e.shape {
            ElementShape::Segment { a: p, b: q } => {
                let h = 0.5 * (q[0] - p[0]).hypot(q[1] - p[1]);
                let rho = move |x: Point| 0.5 * ((x[0] - p[0]).hypot(x[1] - p[1]) + (x[0] - q[0]).hypot(x[1] - q[1]));
                let top = (big_r / h).acosh();
                (h, Box::new(move |x| 1.0 - (rho(x) / h).max(1.0).acosh() / top))
            }
            ElementShape::Disk { center, radius } => {
                let top = (big_r / radius).ln();
                let r = move |x: Point| (x[0] - center[0]).hypot(x[1] - center[1]);
                (radius, Box::new(move |x| 1.0 - (r(x) / radius).max(1.0).ln() / top))
            }
        };
        if !(a < big_r) {
            continue;
        }
        let Some(z) = limit.eval_with(&loc, e.site) else {
            continue;
        };
        let target = e.constraint.project(e.site, &z[..dim]).z;
        for (v, &x) in level.mesh.vertices().iter().enumerate() {
            let phi = profile(x);
            if phi > 0.0 {
                for i in 0..dim {
                    values[v * dim + i] += phi * (target[i] - z[i]);
                }
            }
        }
    }
    let u = DisplacementField::from_values(level.mesh.clone(), dim, values)?;
    let folded = (0..level.mesh.n_triangles()).any(|t| {
        let g = u.gradient(t);
        (1.0 + g[0][0]) * (1.0 + g[1][1]) - g[0][1] * g[1][0] <= 0.0
    });
    Ok((!folded).then_some(u))
}

fn run_level(exp: &Experiment, level: &Level, limit: &ReportRow) -> ReportRow {
    let start = Instant::now();
    let elements = level.layout.len();
    let result = (|| -> Result<ReportRow> {
        let opts = exp.config.solver.options();
        let pf = perforated_functional(level.mesh.clone(), &level.layout, exp.model, exp.dim, &exp.dirichlet)?;
        let seed = match (&limit.field, exp.model.uses_deformation_gradient()) {
            (Some(lim), true) => warm_start(exp, level, lim)?.or_else(|| exp.seed_field(&level.mesh)),
            _ => exp.seed_field(&level.mesh),
        };
        let out = solve(&pf.functional, &opts, seed.as_ref())?;
        let field = pf.functional.to_displacement(&out.field)?;
        let min_jacobian = if exp.model.uses_deformation_gradient() {
            Some(pf.functional.min_jacobian(&out.field)?)
        } else {
            None
        };
        let (gap, l2) = match (&limit.field, limit.is_ok()) {
            (Some(lim), true) => {
                let lim = lim.interpolate_to(level.mesh.clone(), exp.dim)?;
                let exclusions: Vec<Exclusion> = level
                    .layout
                    .elements
                    .iter()
                    .map(|e| Exclusion::ball(e.site, level.delta))
                    .collect();
                (
                    (out.energy - limit.energy).abs(),
                    error_metric(&field, &lim, &exclusions)?,
                )
            }
            _ => (f64::NAN, f64::NAN),
        };
        Ok(ReportRow {
            epsilon: Some(level.epsilon),
            delta: level.delta,
            energy: out.energy,
            energy_limit_gap: gap,
            l2_error: l2,
            iterations: out.iterations,
            seconds: start.elapsed().as_secs_f64(),
            status: RowStatus::Ok,
            elements,
            dropped: pf.dropped,
            min_jacobian,
            field: Some(field),
            trace: out.trace,
        })
    })();
    result.unwrap_or_else(|err| {
        warn!("eps = {} failed: {err}", level.epsilon);
        ReportRow::failed(
            Some(level.epsilon),
            level.delta,
            elements,
            start.elapsed().as_secs_f64(),
            &err,
        )
    })
}

/// Solves the limit problem, then every ladder entry in parallel. Failed
/// solves become flagged rows.
pub fn run_ladder(exp: &Experiment) -> ConvergenceReport {
    let limit = run_limit(exp);
    let rows: Vec<ReportRow> = exp.levels.par_iter().map(|l| run_level(exp, l, &limit)).collect();
    ConvergenceReport {
        experiment: exp.config.experiment.id,
        capacity: exp.capacity,
        capacity_note: exp.capacity_note.clone(),
        rows,
        limit,
        record_timings: exp.config.experiment.record_timings,
    }
}

/// Mean of the first component over the boundary vertices of `tag`.
pub fn edge_mean(u: &DisplacementField, tag: BoundaryTag, component: usize) -> f64 {
    let verts = u.mesh().vertices_with_tags(&[tag]);
    verts.iter().map(|&v| u.at(v)[component]).sum::<f64>() / verts.len().max(1) as f64
}

/// Largest `|u_k|` along the segment `[a, b]`, sampled at `n` points.
pub fn max_along(u: &DisplacementField, a: Point, b: Point, component: usize, n: usize) -> f64 {
    let loc = Locator::new(u.mesh());
    (0..=n)
        .filter_map(|i| {
            let t = i as f64 / n as f64;
            u.eval_with(&loc, [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])])
        })
        .map(|v| v[component].abs())
        .fold(0.0, f64::max)
}
