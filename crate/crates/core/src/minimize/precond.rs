//! Sparse SPD preconditioner `J^T K J` in the reduced coordinates, where `K`
//! is a weighted Laplacian (one component block per vertex pair) and `J` the
//! chart Jacobian. The sparsity pattern is fixed per problem, so the symbolic
//! Cholesky factorization is computed once and reused.

use std::collections::HashMap;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{Argsort, Pair, SparseColMat, SymbolicSparseColMat};
use faer::{MatMut, Side};

use super::chart::ChartMap;
use super::functional::DiscreteFunctional;
use crate::error::{Error, Result};

/// Relative diagonal shift keeping the factorization positive definite.
const TIKHONOV: f64 = 1e-10;

struct Entry {
    slot: usize,
    /// Coordinates of the first and second vertex of the slot.
    i: usize,
    j: usize,
}

pub(crate) struct Preconditioner {
    n: usize,
    slots: Vec<(usize, usize)>,
    tri_slots: Vec<[usize; 6]>,
    quad_slots: Vec<[usize; 6]>,
    entries: Vec<Entry>,
    symbolic_mat: SymbolicSparseColMat<usize>,
    argsort: Argsort<usize>,
    symbolic: SymbolicLlt<usize>,
    llt: Option<Llt<usize, f64>>,
    values: Vec<f64>,
    kvals: Vec<Block>,
}

/// Component coupling between the lower and higher vertex of a slot.
type Block = [[f64; 3]; 3];

fn add_identity(b: &mut Block, w: f64) {
    for (r, row) in b.iter_mut().enumerate() {
        row[r] += w;
    }
}

const LOCAL: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

impl Preconditioner {
    pub fn new(f: &DiscreteFunctional, charts: &ChartMap) -> Result<Self> {
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut slots = Vec::new();
        let mut slot_of = |a: usize, b: usize| -> usize {
            let key = (a.min(b), a.max(b));
            *index.entry(key).or_insert_with(|| {
                slots.push(key);
                slots.len() - 1
            })
        };
        let tri_slots: Vec<[usize; 6]> = f
            .mesh()
            .triangles()
            .iter()
            .map(|tri| LOCAL.map(|(k, l)| slot_of(tri[k], tri[l])))
            .collect();
        let quad_slots: Vec<[usize; 6]> = f
            .quad()
            .iter()
            .map(|q| LOCAL.map(|(k, l)| slot_of(q.verts[k], q.verts[l])))
            .collect();

        let n = charts.n;
        let mut entries = Vec::new();
        let mut pairs = Vec::new();
        for (s, &(a, b)) in slots.iter().enumerate() {
            let (ra, rb) = (charts.dofs(a), charts.dofs(b));
            for (i, qa) in ra.clone().enumerate() {
                for (j, qb) in rb.clone().enumerate() {
                    if a == b && qb > qa {
                        continue;
                    }
                    entries.push(Entry { slot: s, i, j });
                    pairs.push(Pair {
                        row: qa.max(qb),
                        col: qa.min(qb),
                    });
                }
            }
        }
        for r in 0..n {
            pairs.push(Pair { row: r, col: r });
        }
        let (symbolic_mat, argsort) = SymbolicSparseColMat::try_new_from_indices(n, n, &pairs)
            .map_err(|e| Error::Solver(format!("preconditioner pattern: {e:?}")))?;
        let symbolic = SymbolicLlt::try_new(symbolic_mat.as_ref(), Side::Lower)
            .map_err(|e| Error::Solver(format!("symbolic factorization: {e:?}")))?;
        let nslots = slots.len();
        Ok(Self {
            n,
            slots,
            tri_slots,
            quad_slots,
            values: Vec::with_capacity(pairs.len()),
            entries,
            symbolic_mat,
            argsort,
            symbolic,
            llt: None,
            kvals: vec![[[0.0; 3]; 3]; nslots],
        })
    }

    /// Rebuilds and refactors the matrix at the reduced point `q` whose
    /// nodal values are `values`.
    pub fn refresh(&mut self, f: &DiscreteFunctional, charts: &ChartMap, q: &[f64], values: &[f64]) -> Result<()> {
        if self.n == 0 {
            return Ok(());
        }
        let (tri_w, quad_w) = f.curvature_weights(values);
        let tangents = f.element_tangents(values);
        self.kvals.iter_mut().for_each(|k| *k = [[0.0; 3]; 3]);
        let tris = f.mesh().triangles();
        for (t, slots) in self.tri_slots.iter().enumerate() {
            let g = &f.shape()[t].0;
            for (s, &(k, l)) in slots.iter().zip(LOCAL.iter()) {
                let block = &mut self.kvals[*s];
                match &tangents {
                    Some(h) => {
                        // oriented from the lower to the higher vertex index
                        let (k, l) = if tris[t][k] <= tris[t][l] { (k, l) } else { (l, k) };
                        for r in 0..2 {
                            for c in 0..2 {
                                block[r][c] += (0..2)
                                    .flat_map(|a| (0..2).map(move |b| (a, b)))
                                    .map(|(a, b)| g[k][a] * h[t][2 * r + a][2 * c + b] * g[l][b])
                                    .sum::<f64>();
                            }
                        }
                    }
                    None => add_identity(block, tri_w[t] * (g[k][0] * g[l][0] + g[k][1] * g[l][1])),
                }
            }
        }
        for (qi, slots) in self.quad_slots.iter().enumerate() {
            let qp = &f.quad()[qi];
            for (s, &(k, l)) in slots.iter().zip(LOCAL.iter()) {
                // edge rules repeat a vertex with zero weight, so repeated
                // slots receive nothing
                add_identity(&mut self.kvals[*s], quad_w[qi] * qp.bary[k] * qp.bary[l]);
            }
        }
        let dim = charts.dim;
        self.values.clear();
        let jac: Vec<_> = (0..charts.charts.len()).map(|v| charts.jacobian(v, q)).collect();
        let mut max_diag: f64 = 0.0;
        for e in &self.entries {
            let (a, b) = self.slots[e.slot];
            let (ja, jb) = (&jac[a], &jac[b]);
            let k = &self.kvals[e.slot];
            let v: f64 = (0..dim)
                .flat_map(|r| (0..dim).map(move |c| (r, c)))
                .map(|(r, c)| ja[e.i][r] * k[r][c] * jb[e.j][c])
                .sum();
            if a == b && e.i == e.j {
                max_diag = max_diag.max(v);
            }
            self.values.push(v);
        }
        let shift = TIKHONOV * max_diag.max(f64::MIN_POSITIVE);
        self.values.extend(std::iter::repeat_n(shift, self.n));
        let mat = SparseColMat::new_from_argsort(self.symbolic_mat.clone(), &self.argsort, &self.values)
            .map_err(|e| Error::Solver(format!("preconditioner assembly: {e:?}")))?;
        let llt = Llt::try_new_with_symbolic(self.symbolic.clone(), mat.as_ref(), Side::Lower)
            .map_err(|e| Error::Solver(format!("preconditioner factorization: {e:?}")))?;
        self.llt = Some(llt);
        Ok(())
    }

    /// `out = P^{-1} r`.
    pub fn apply(&self, r: &[f64], out: &mut [f64]) {
        out.copy_from_slice(r);
        if let Some(llt) = &self.llt {
            llt.solve_in_place(MatMut::from_column_major_slice_mut(out, self.n, 1));
        }
    }
}
