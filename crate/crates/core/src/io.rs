//! Legacy VTK ASCII and CSV writers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{DisplacementField, Mesh};
use crate::minimize::TraceRow;

/// Unstructured grid with triangle cells and, if given, the field as point
/// vectors named `displacement` (padded to three components).
pub fn vtk_string(mesh: &Mesh, field: Option<&DisplacementField>) -> Result<String> {
    if let Some(u) = field {
        if u.values().len() != mesh.n_vertices() * u.dim() {
            return Err(Error::invalid("field does not match the mesh"));
        }
    }
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\nperfhom\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", mesh.n_vertices());
    for p in mesh.vertices() {
        let _ = writeln!(s, "{:.17e} {:.17e} 0", p[0], p[1]);
    }
    let nt = mesh.n_triangles();
    let _ = writeln!(s, "CELLS {} {}", nt, 4 * nt);
    for t in mesh.triangles() {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {nt}");
    for _ in 0..nt {
        s.push_str("5\n");
    }
    if let Some(u) = field {
        let _ = writeln!(s, "POINT_DATA {}\nVECTORS displacement double", mesh.n_vertices());
        for v in 0..mesh.n_vertices() {
            let a = u.at(v);
            let c = |i: usize| a.get(i).copied().unwrap_or(0.0);
            let _ = writeln!(s, "{:.17e} {:.17e} {:.17e}", c(0), c(1), c(2));
        }
    }
    Ok(s)
}

pub fn write_vtk(path: &Path, mesh: &Mesh, field: Option<&DisplacementField>) -> Result<()> {
    fs::write(path, vtk_string(mesh, field)?)?;
    Ok(())
}

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut s = String::from("iteration,energy,gradient_norm,step\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{:.17e},{:.6e},{:.6e}",
            r.iteration, r.energy, r.gradient_norm, r.step
        );
    }
    s
}
