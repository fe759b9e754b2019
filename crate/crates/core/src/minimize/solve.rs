use std::collections::VecDeque;
use std::sync::Arc;

use log::{debug, info, warn};

use super::chart::ChartMap;
use super::functional::{DiscreteFunctional, PenaltyRegion};
use super::precond::Preconditioner;
use crate::constraints::{ConstraintSet, PenaltyDensity, Vector};
use crate::error::{Error, IterateDiagnostics, Result};
use crate::geometry::primitives::point_segment_distance;
use crate::geometry::{element_vertices, BoundaryTag, DisplacementField, Mesh, PerforationLayout, Point};
use crate::materials::EnergyModel;

/// Energies below this are taken as evidence of an unbounded functional.
const UNBOUNDED: f64 = -1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub max_iters: usize,
    /// Stop once the preconditioned gradient norm `sqrt(g^T P^-1 g)` is below
    /// `tolerance * sqrt(max(|E|, energy_floor))`.
    pub tolerance: f64,
    pub energy_floor: f64,
    /// Number of stored correction pairs.
    pub memory: usize,
    /// Sufficient-decrease constant of the backtracking search.
    pub armijo: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
    /// Iterations between preconditioner rebuilds.
    pub precond_refresh: usize,
    pub record_trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            tolerance: 1e-6,
            energy_floor: 1e-20,
            memory: 12,
            armijo: 1e-4,
            backtrack: 0.5,
            max_backtracks: 60,
            precond_refresh: 8,
            record_trace: false,
        }
    }
}

impl SolveOptions {
    pub fn check(&self) -> Result<()> {
        if !(self.tolerance > 0.0) || !(self.energy_floor > 0.0) {
            return Err(Error::invalid("solver tolerances must be positive"));
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) || !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::invalid("line-search constants must lie in (0, 1)"));
        }
        if self.max_iters == 0 || self.memory == 0 || self.precond_refresh == 0 {
            return Err(Error::invalid("iteration counts must be positive"));
        }
        Ok(())
    }
}

/// One accepted iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub energy: f64,
    pub gradient_norm: f64,
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub field: DisplacementField,
    pub energy: f64,
    pub iterations: usize,
    /// Preconditioned gradient norm at the returned iterate.
    pub gradient_norm: f64,
    pub trace: Vec<TraceRow>,
}

/// Evaluation of the reduced problem.
struct Reduced<'a> {
    f: &'a DiscreteFunctional,
    charts: ChartMap,
    values: Vec<f64>,
    gz: Vec<f64>,
}

impl Reduced<'_> {
    fn eval(&mut self, q: &[f64], gq: &mut [f64]) -> Result<f64> {
        self.charts.lift(q, &mut self.values);
        let e = self.f.energy_and_gradient(&self.values, &mut self.gz)?;
        self.charts.pull_gradient(q, &self.gz, gq);
        Ok(e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes the functional from `initial` (zero when absent).
pub fn solve(
    f: &DiscreteFunctional,
    options: &SolveOptions,
    initial: Option<&DisplacementField>,
) -> Result<SolveOutcome> {
    options.check()?;
    f.check()?;
    let dim = f.dim();
    let charts = ChartMap::new(f)?;
    let start = match initial {
        Some(u) => {
            if u.dim() != dim || u.values().len() != f.mesh().n_vertices() * dim {
                return Err(Error::invalid("initial guess does not match the functional"));
            }
            u.values().to_vec()
        }
        None => {
            let zero = DisplacementField::zeros(f.mesh().clone(), dim);
            f.from_displacement(&zero)?.into_values()
        }
    };
    let mut q = charts.pull(&start);
    charts.project(&mut q);
    let n = charts.n;
    let mut prob = Reduced {
        f,
        values: start,
        gz: vec![0.0; f.mesh().n_vertices() * dim],
        charts,
    };
    let mut g = vec![0.0; n];
    let mut energy = prob.eval(&q, &mut g)?;
    let mut pre = Preconditioner::new(f, &prob.charts)?;
    pre.refresh(f, &prob.charts, &q, &prob.values)?;

    let mut trace = Vec::new();
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(options.memory);
    let mut gfree = vec![0.0; n];
    let mut pg = vec![0.0; n];
    let mut dir = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut gt = vec![0.0; n];
    let mut alphas = vec![0.0; options.memory];
    let mut since_refresh = 0;
    let mut iter = 0;

    let active = |q: &[f64], g: &[f64], i: usize| q[i] <= 0.0 && g[i] > 0.0;
    let mut last_step = 0.0;

    loop {
        // projected gradient and its preconditioned norm
        gfree.copy_from_slice(&g);
        for &i in &prob.charts.bounded {
            if active(&q, &g, i) {
                gfree[i] = 0.0;
            }
        }
        pre.apply(&gfree, &mut pg);
        let dec = dot(&gfree, &pg).max(0.0);
        let gnorm = dec.sqrt();
        if options.record_trace && trace.last().is_none_or(|r: &TraceRow| r.iteration < iter) {
            trace.push(TraceRow {
                iteration: iter,
                energy,
                gradient_norm: gnorm,
                step: last_step,
            });
        }
        if energy < UNBOUNDED {
            return Err(Error::IllPosed(format!("energy dropped to {energy:.3e}")));
        }
        let target = options.tolerance * energy.abs().max(options.energy_floor).sqrt();
        if gnorm <= target || n == 0 {
            let field = DisplacementField::from_values(f.mesh().clone(), dim, prob.values.clone())?;
            debug!("converged after {iter} iterations, energy {energy:.10e}");
            return Ok(SolveOutcome {
                field,
                energy,
                iterations: iter,
                gradient_norm: gnorm,
                trace,
            });
        }
        if iter >= options.max_iters {
            return Err(Error::Convergence(Box::new(IterateDiagnostics {
                iterations: iter,
                energy,
                gradient_norm: gnorm,
                last_values: prob.values.clone(),
            })));
        }

        // two-loop recursion with P^-1 as initial inverse Hessian
        dir.copy_from_slice(&gfree);
        for (k, (s, y, rho)) in history.iter().enumerate().rev() {
            alphas[k] = rho * dot(s, &dir);
            dir.iter_mut().zip(y).for_each(|(d, yi)| *d -= alphas[k] * yi);
        }
        let tmp = dir.clone();
        pre.apply(&tmp, &mut dir);
        for (k, (s, y, rho)) in history.iter().enumerate() {
            let beta = rho * dot(y, &dir);
            dir.iter_mut().zip(s).for_each(|(d, si)| *d += (alphas[k] - beta) * si);
        }
        dir.iter_mut().for_each(|d| *d = -*d);
        for &i in &prob.charts.bounded {
            if active(&q, &g, i) {
                dir[i] = 0.0;
            }
        }
        if dot(&g, &dir) >= 0.0 {
            history.clear();
            dir.iter_mut().zip(&pg).for_each(|(d, p)| *d = -p);
        }

        // projected backtracking search
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=options.max_backtracks {
            trial
                .iter_mut()
                .zip(q.iter().zip(&dir))
                .for_each(|(t, (qi, di))| *t = qi + step * di);
            prob.charts.project(&mut trial);
            let decrease: f64 = g
                .iter()
                .zip(trial.iter().zip(&q))
                .map(|(gi, (ti, qi))| gi * (ti - qi))
                .sum();
            match prob.eval(&trial, &mut gt) {
                Ok(e)
                    if e.is_finite()
                        && e <= energy + options.armijo * decrease.min(0.0)
                        && (decrease < 0.0 || e < energy) =>
                {
                    accepted = Some(e);
                    break;
                }
                Ok(_) => {}
                Err(Error::InadmissibleState(_)) => {}
                Err(err) => return Err(err),
            }
            step *= options.backtrack;
        }
        let Some(new_energy) = accepted else {
            if !history.is_empty() {
                // retry from a plain preconditioned gradient step
                history.clear();
                prob.charts.lift(&q, &mut prob.values);
                continue;
            }
            prob.charts.lift(&q, &mut prob.values);
            // the search cannot resolve further decrease in floating point
            if gnorm <= 1e3 * target {
                warn!("line search stalled at gradient norm {gnorm:.3e} (target {target:.3e}); accepting");
                let field = DisplacementField::from_values(f.mesh().clone(), dim, prob.values.clone())?;
                return Ok(SolveOutcome {
                    field,
                    energy,
                    iterations: iter,
                    gradient_norm: gnorm,
                    trace,
                });
            }
            return Err(Error::Convergence(Box::new(IterateDiagnostics {
                iterations: iter,
                energy,
                gradient_norm: gnorm,
                last_values: prob.values.clone(),
            })));
        };
        if new_energy > energy {
            return Err(Error::Solver(format!(
                "accepted step increased the energy from {energy:.12e} to {new_energy:.12e}"
            )));
        }

        let s: Vec<f64> = trial.iter().zip(&q).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gt.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            if history.len() == options.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        q.copy_from_slice(&trial);
        g.copy_from_slice(&gt);
        energy = new_energy;
        iter += 1;
        since_refresh += 1;
        if since_refresh >= options.precond_refresh {
            since_refresh = 0;
            pre.refresh(f, &prob.charts, &q, &prob.values)?;
        }
        last_step = step;
    }
}

/// Displacement prescribed on the boundary edges carrying one of `tags`.
#[derive(Clone)]
pub struct DirichletData {
    pub tags: Vec<BoundaryTag>,
    pub value: Arc<dyn Fn(Point) -> Vector + Send + Sync>,
}

impl std::fmt::Debug for DirichletData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DirichletData")
            .field("tags", &self.tags)
            .finish_non_exhaustive()
    }
}

impl DirichletData {
    pub fn new(tags: Vec<BoundaryTag>, value: impl Fn(Point) -> Vector + Send + Sync + 'static) -> Self {
        Self {
            tags,
            value: Arc::new(value),
        }
    }

    pub fn zero(tags: Vec<BoundaryTag>) -> Self {
        Self::new(tags, |_| [0.0; 3])
    }

    fn apply(&self, f: &mut DiscreteFunctional) -> Result<usize> {
        let value = self.value.clone();
        f.dirichlet_on_tags(&self.tags, move |x| value(x))
    }
}

/// Perforated functional together with its bookkeeping.
#[derive(Debug, Clone)]
pub struct PerforatedFunctional {
    pub functional: DiscreteFunctional,
    /// Elements dropped because their site lies within `eps` of Dirichlet data.
    pub dropped: usize,
    pub constrained_vertices: usize,
}

/// Builds the functional whose hard constraints are the mesh vertices inside
/// each perforation element, all tied to that element's set at its site.
///
/// Elements sited closer than `eps` to an edge carrying Dirichlet data are
/// dropped, so the constraint never competes with the boundary values.
pub fn perforated_functional(
    mesh: Arc<Mesh>,
    layout: &PerforationLayout,
    model: EnergyModel,
    dim: usize,
    dirichlet: &[DirichletData],
) -> Result<PerforatedFunctional> {
    let mut f = DiscreteFunctional::new(mesh.clone(), model, dim)?;
    for d in dirichlet {
        d.apply(&mut f)?;
    }
    let tags: Vec<BoundaryTag> = dirichlet.iter().flat_map(|d| d.tags.iter().copied()).collect();
    let fixed_edges: Vec<(Point, Point)> = mesh
        .boundary_edges()
        .iter()
        .filter(|e| tags.contains(&e.tag))
        .map(|e| (mesh.vertices()[e.vertices[0]], mesh.vertices()[e.vertices[1]]))
        .collect();
    let near_dirichlet = |site: Point| {
        fixed_edges
            .iter()
            .any(|&(a, b)| point_segment_distance(site, a, b) < layout.epsilon * (1.0 - 1e-9))
    };
    let mut dropped = 0;
    let mut constrained = 0;
    let members = element_vertices(&mesh, layout);
    for (e, verts) in layout.elements.iter().zip(&members) {
        if near_dirichlet(e.site) {
            dropped += 1;
            continue;
        }
        if verts.is_empty() {
            return Err(Error::Layout(format!(
                "perforation at ({:.6}, {:.6}) contains no mesh vertex; refine the mesh to the layout first",
                e.site[0], e.site[1]
            )));
        }
        for &v in verts {
            if f.dirichlet().contains_key(&v) {
                continue;
            }
            f.add_hard_constraint(v, e.constraint, e.site)?;
            constrained += 1;
        }
    }
    if dropped > 0 {
        info!("dropped {dropped} perforation elements within eps of Dirichlet data");
    }
    Ok(PerforatedFunctional {
        functional: f,
        dropped,
        constrained_vertices: constrained,
    })
}

/// Solves the perforated problem on a mesh that resolves `layout`.
pub fn solve_perforated(
    mesh: Arc<Mesh>,
    layout: &PerforationLayout,
    model: EnergyModel,
    dim: usize,
    dirichlet: &[DirichletData],
    options: &SolveOptions,
    initial: Option<&DisplacementField>,
) -> Result<(PerforatedFunctional, SolveOutcome)> {
    let pf = perforated_functional(mesh, layout, model, dim, dirichlet)?;
    let out = solve(&pf.functional, options, initial)?;
    Ok((pf, out))
}

/// Site-dependent constraint `x -> F_x`.
#[derive(Clone)]
pub struct ConstraintFamily(pub Arc<dyn Fn(Point) -> ConstraintSet + Send + Sync>);

impl ConstraintFamily {
    pub fn new(f: impl Fn(Point) -> ConstraintSet + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }

    pub fn at(&self, x: Point) -> ConstraintSet {
        (self.0)(x)
    }
}

impl std::fmt::Debug for ConstraintFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ConstraintFamily")
    }
}

/// Penalty of a relaxed problem with constant density weight `rho`. When
/// `family` is set it replaces the constraint of `density` pointwise.
#[derive(Debug, Clone)]
pub struct LimitPenalty {
    pub region: PenaltyRegion,
    pub density: PenaltyDensity,
    pub rho: f64,
    pub family: Option<ConstraintFamily>,
}

/// Relaxed problem: no hard constraints, penalty integrals instead.
#[derive(Debug, Clone)]
pub struct LimitProblem {
    pub model: EnergyModel,
    pub dim: usize,
    pub dirichlet: Vec<DirichletData>,
    pub penalties: Vec<LimitPenalty>,
}

pub fn limit_functional(mesh: Arc<Mesh>, problem: &LimitProblem) -> Result<DiscreteFunctional> {
    let mut f = DiscreteFunctional::new(mesh, problem.model, problem.dim)?;
    for d in &problem.dirichlet {
        d.apply(&mut f)?;
    }
    for p in &problem.penalties {
        let rho = p.rho;
        match &p.family {
            Some(fam) => f.add_penalty_family(p.region.clone(), p.density, |x| fam.at(x), move |_| rho)?,
            None => f.add_penalty(p.region.clone(), p.density, move |_| rho)?,
        }
    }
    Ok(f)
}

pub fn solve_limit(
    mesh: Arc<Mesh>,
    problem: &LimitProblem,
    options: &SolveOptions,
    initial: Option<&DisplacementField>,
) -> Result<(DiscreteFunctional, SolveOutcome)> {
    let f = limit_functional(mesh, problem)?;
    let out = solve(&f, options, initial)?;
    Ok((f, out))
}
