//! Flat INI configuration: sections `[experiment]`, `[mesh]`, `[solver]` and
//! `[capacity]`, one `key = value` per line, `#` or `;` comments.
//!
//! Keys are unique across sections, so overrides may name them bare (`p=1.4`)
//! or qualified (`experiment.p=1.4`). `key+=value` appends to list keys.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::minimize::SolveOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentId {
    Bvp1,
    Bvp2,
    Bvp3,
    Bvp4,
    BulkPin,
    NeoHookean,
}

impl ExperimentId {
    pub const ALL: [Self; 6] = [
        Self::Bvp1,
        Self::Bvp2,
        Self::Bvp3,
        Self::Bvp4,
        Self::BulkPin,
        Self::NeoHookean,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Bvp1 => "bvp1",
            Self::Bvp2 => "bvp2",
            Self::Bvp3 => "bvp3",
            Self::Bvp4 => "bvp4",
            Self::BulkPin => "bulk_pin",
            Self::NeoHookean => "neo_hookean",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s)
    }
}

/// Where the penalty constant comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CapacitySource {
    /// Closed-form value (disks and the critical annulus only).
    Analytic,
    /// Cell problems solved and extrapolated at run time.
    Computed,
    Literal(f64),
}

/// What to do when `delta(eps)` falls below the resolvable floor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaPolicy {
    Error,
    /// Use the floor as the element size.
    Clamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellShapeKind {
    BoundarySegment,
    InteriorDisk,
    HalfDisk,
    Critical,
}

impl CellShapeKind {
    pub const ALL: [Self; 4] = [
        Self::BoundarySegment,
        Self::InteriorDisk,
        Self::HalfDisk,
        Self::Critical,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::BoundarySegment => "boundary_segment",
            Self::InteriorDisk => "interior_disk",
            Self::HalfDisk => "half_disk",
            Self::Critical => "critical",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub id: ExperimentId,
    pub p: f64,
    /// Side of the square domain.
    pub ell: f64,
    pub x1c: f64,
    pub x2c: f64,
    /// Circle or cylinder radius.
    pub radius: f64,
    pub x2a: f64,
    pub kappa: f64,
    pub mu: f64,
    pub lambda: f64,
    /// Sharpness `k` of the smoothed step in unilateral penalties.
    pub step_sharpness: f64,
    /// Right-hand side `b` of the half plane `w1 + w2 >= b`.
    pub halfplane_sum: f64,
    /// Amplitude `a` of the bulk target `a (sin pi x1, sin pi x2)`.
    pub target_amplitude: f64,
    pub eps_ladder: Vec<f64>,
    pub output: PathBuf,
    /// Write wall-clock seconds into the report; off keeps reports
    /// byte-identical between runs.
    pub record_timings: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshConfig {
    pub h: f64,
    pub limit_h: f64,
    pub resolve_factor: f64,
    pub grading: f64,
    pub delta_floor: f64,
    pub delta_policy: DeltaPolicy,
    pub max_vertices: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub tolerance: f64,
    pub max_iters: usize,
    pub memory: usize,
    /// Iterations between preconditioner rebuilds.
    pub precond_refresh: usize,
    pub record_trace: bool,
}

impl SolverConfig {
    pub fn options(&self) -> SolveOptions {
        SolveOptions {
            tolerance: self.tolerance,
            max_iters: self.max_iters,
            memory: self.memory,
            precond_refresh: self.precond_refresh,
            record_trace: self.record_trace,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityConfig {
    pub source: CapacitySource,
    pub shape: CellShapeKind,
    pub cell_p: f64,
    /// Sectors per half turn of cell meshes.
    pub angular: usize,
    pub radii: Vec<f64>,
    pub critical_ladder: Vec<f64>,
    /// Scalar far-field datum.
    pub datum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub mesh: MeshConfig,
    pub solver: SolverConfig,
    pub capacity: CapacityConfig,
}

impl RunConfig {
    /// Defaults of the given experiment.
    pub fn defaults(id: ExperimentId) -> Self {
        use ExperimentId::*;
        let p = match id {
            Bvp3 => 4.0 / 3.0,
            NeoHookean => 2.0,
            _ => 1.5,
        };
        let eps_ladder = match id {
            Bvp3 => vec![1.0 / 5.0, 1.0 / 10.0, 1.0 / 15.0, 1.0 / 20.0],
            BulkPin => vec![0.5, 0.25, 0.125],
            NeoHookean => vec![0.25, 1.0 / 6.0, 0.125],
            _ => vec![0.5, 0.25, 0.125, 0.0625],
        };
        let (x1c, radius) = match id {
            Bvp2 => (0.5, 1.0),
            Bvp3 => (1.2, 0.5),
            _ => (1.2, 1.0),
        };
        let source = match id {
            Bvp1 | Bvp2 | Bvp4 => CapacitySource::Literal(1.602),
            Bvp3 | BulkPin => CapacitySource::Analytic,
            NeoHookean => CapacitySource::Computed,
        };
        let shape = match id {
            Bvp3 | BulkPin => CellShapeKind::InteriorDisk,
            NeoHookean => CellShapeKind::Critical,
            _ => CellShapeKind::BoundarySegment,
        };
        let (delta_floor, delta_policy) = match id {
            NeoHookean => (1e-3, DeltaPolicy::Clamp),
            _ => (1e-6, DeltaPolicy::Error),
        };
        Self {
            experiment: ExperimentConfig {
                id,
                p,
                ell: 1.0,
                x1c,
                x2c: 0.5,
                radius,
                x2a: 0.5,
                kappa: 1.9,
                mu: 1.0,
                lambda: 1.0,
                step_sharpness: 1e4,
                halfplane_sum: 1.5,
                target_amplitude: 0.05,
                eps_ladder,
                output: PathBuf::from("out"),
                record_timings: false,
            },
            mesh: MeshConfig {
                h: 1.0 / 32.0,
                limit_h: 1.0 / 128.0,
                resolve_factor: 16.0,
                grading: 0.2,
                delta_floor,
                delta_policy,
                max_vertices: 2_000_000,
            },
            solver: SolverConfig {
                tolerance: 1e-6,
                max_iters: 5000,
                memory: 12,
                precond_refresh: 8,
                record_trace: false,
            },
            capacity: CapacityConfig {
                source,
                shape,
                cell_p: p,
                angular: 64,
                radii: vec![8.0, 16.0, 32.0],
                critical_ladder: vec![10.0, 100.0, 1000.0],
                datum: 1.0,
            },
        }
    }

    /// Checks value ranges and cross-key invariants.
    pub fn check(&self) -> Result<()> {
        let e = &self.experiment;
        let bad = |key: &str, msg: String| Err(Error::Config(format!("{key}: {msg}")));
        if e.id == ExperimentId::NeoHookean {
            if !(e.mu > 0.0 && e.lambda > 0.0) {
                return bad("mu", "neo-Hookean constants must be positive".into());
            }
        } else if !(e.p > 1.0 && e.p < 2.0) {
            return bad("p", format!("must lie in (1, 2), got {}", e.p));
        }
        if !(e.ell > 0.0) {
            return bad("ell", format!("must be positive, got {}", e.ell));
        }
        if e.eps_ladder.is_empty() {
            return bad("eps_ladder", "needs at least one entry".into());
        }
        if e.eps_ladder.iter().any(|&x| !(x > 0.0 && x < e.ell)) {
            return bad(
                "eps_ladder",
                format!("entries must lie in (0, ell), got {:?}", e.eps_ladder),
            );
        }
        if e.eps_ladder.windows(2).any(|w| !(w[1] < w[0])) {
            return bad(
                "eps_ladder",
                format!("must be strictly decreasing, got {:?}", e.eps_ladder),
            );
        }
        if !(e.radius > 0.0) {
            return bad("radius", format!("must be positive, got {}", e.radius));
        }
        if !(e.kappa > 0.0) {
            return bad("kappa", format!("must be positive, got {}", e.kappa));
        }
        if !(e.step_sharpness > 0.0) {
            return bad("step_sharpness", format!("must be positive, got {}", e.step_sharpness));
        }
        let m = &self.mesh;
        if !(m.h > 0.0 && m.h < e.ell) {
            return bad("h", format!("must lie in (0, ell), got {}", m.h));
        }
        if !(m.limit_h > 0.0 && m.limit_h < e.ell) {
            return bad("limit_h", format!("must lie in (0, ell), got {}", m.limit_h));
        }
        if !(m.resolve_factor >= 2.0) {
            return bad(
                "resolve_factor",
                format!("must be at least 2, got {}", m.resolve_factor),
            );
        }
        if !(m.grading > 0.0) {
            return bad("grading", format!("must be positive, got {}", m.grading));
        }
        if !(m.delta_floor > 0.0) {
            return bad("delta_floor", format!("must be positive, got {}", m.delta_floor));
        }
        let s = &self.solver;
        if !(s.tolerance > 0.0) || s.max_iters == 0 || s.memory == 0 || s.precond_refresh == 0 {
            return bad("tolerance", "solver tolerance and counts must be positive".into());
        }
        let c = &self.capacity;
        if let CapacitySource::Literal(v) = c.source {
            if !(v > 0.0) {
                return bad("value", format!("literal capacity must be positive, got {v}"));
            }
        }
        if c.radii.len() < 3 || c.radii.iter().any(|&r| !(r > 2.0)) {
            return bad("radii", "needs at least three radii above 2".into());
        }
        if c.critical_ladder.len() < 3 || c.critical_ladder.iter().any(|&t| !(t >= 10.0)) {
            return bad("critical_ladder", "needs at least three radii of at least 10".into());
        }
        if c.angular < 8 {
            return bad("angular", format!("must be at least 8, got {}", c.angular));
        }
        Ok(())
    }

    /// Serializes every key; `parse_str(to_ini())` reproduces `self`.
    pub fn to_ini(&self) -> String {
        let mut s = String::new();
        for section in SECTIONS {
            let _ = writeln!(s, "[{section}]");
            for key in KEYS.iter().filter(|k| k.section == section) {
                let _ = writeln!(s, "{} = {}", key.name, (key.get)(self));
            }
            s.push('\n');
        }
        s
    }
}

const SECTIONS: [&str; 4] = ["experiment", "mesh", "solver", "capacity"];

struct Key {
    section: &'static str,
    name: &'static str,
    list: bool,
    get: fn(&RunConfig) -> String,
    set: fn(&mut RunConfig, &str) -> std::result::Result<(), String>,
}

fn num(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("expected a number, got `{s}`"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("expected a number, got `{s}`"))?;
            a / b
        }
        None => s.parse().map_err(|_| format!("expected a number, got `{s}`"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("expected a finite number, got `{s}`"))
    }
}

fn count(s: &str) -> std::result::Result<usize, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("expected a nonnegative integer, got `{s}`"))
}

fn flag(s: &str) -> std::result::Result<bool, String> {
    match s.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("expected true or false, got `{other}`")),
    }
}

fn list(s: &str) -> std::result::Result<Vec<f64>, String> {
    let s = s.trim().trim_matches('"');
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(num).collect()
}

fn show_list(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

macro_rules! scalar {
    ($section:literal, $name:literal, $($field:ident).+, $parse:ident) => {
        Key {
            section: $section,
            name: $name,
            list: false,
            get: |c| c.$($field).+.to_string(),
            set: |c, s| {
                c.$($field).+ = $parse(s)?;
                Ok(())
            },
        }
    };
}

macro_rules! vector {
    ($section:literal, $name:literal, $($field:ident).+) => {
        Key {
            section: $section,
            name: $name,
            list: true,
            get: |c| show_list(&c.$($field).+),
            set: |c, s| {
                c.$($field).+ = list(s)?;
                Ok(())
            },
        }
    };
}

static KEYS: &[Key] = &[
    Key {
        section: "experiment",
        name: "experiment",
        list: false,
        get: |c| c.experiment.id.name().to_string(),
        set: |c, s| {
            let id = ExperimentId::from_name(s.trim()).ok_or_else(|| {
                let names: Vec<_> = ExperimentId::ALL.iter().map(|e| e.name()).collect();
                format!(
                    "unknown experiment `{}`; expected one of {}",
                    s.trim(),
                    names.join(", ")
                )
            })?;
            c.experiment.id = id;
            Ok(())
        },
    },
    scalar!("experiment", "p", experiment.p, num),
    scalar!("experiment", "ell", experiment.ell, num),
    scalar!("experiment", "x1c", experiment.x1c, num),
    scalar!("experiment", "x2c", experiment.x2c, num),
    scalar!("experiment", "radius", experiment.radius, num),
    scalar!("experiment", "x2a", experiment.x2a, num),
    scalar!("experiment", "kappa", experiment.kappa, num),
    scalar!("experiment", "mu", experiment.mu, num),
    scalar!("experiment", "lambda", experiment.lambda, num),
    scalar!("experiment", "step_sharpness", experiment.step_sharpness, num),
    scalar!("experiment", "halfplane_sum", experiment.halfplane_sum, num),
    scalar!("experiment", "target_amplitude", experiment.target_amplitude, num),
    vector!("experiment", "eps_ladder", experiment.eps_ladder),
    Key {
        section: "experiment",
        name: "output",
        list: false,
        get: |c| c.experiment.output.display().to_string(),
        set: |c, s| {
            c.experiment.output = PathBuf::from(s.trim());
            Ok(())
        },
    },
    scalar!("experiment", "record_timings", experiment.record_timings, flag),
    scalar!("mesh", "h", mesh.h, num),
    scalar!("mesh", "limit_h", mesh.limit_h, num),
    scalar!("mesh", "resolve_factor", mesh.resolve_factor, num),
    scalar!("mesh", "grading", mesh.grading, num),
    scalar!("mesh", "delta_floor", mesh.delta_floor, num),
    Key {
        section: "mesh",
        name: "delta_policy",
        list: false,
        get: |c| match c.mesh.delta_policy {
            DeltaPolicy::Error => "error".into(),
            DeltaPolicy::Clamp => "clamp".into(),
        },
        set: |c, s| {
            c.mesh.delta_policy = match s.trim() {
                "error" => DeltaPolicy::Error,
                "clamp" => DeltaPolicy::Clamp,
                other => return Err(format!("expected error or clamp, got `{other}`")),
            };
            Ok(())
        },
    },
    scalar!("mesh", "max_vertices", mesh.max_vertices, count),
    scalar!("solver", "tolerance", solver.tolerance, num),
    scalar!("solver", "max_iters", solver.max_iters, count),
    scalar!("solver", "memory", solver.memory, count),
    scalar!("solver", "precond_refresh", solver.precond_refresh, count),
    scalar!("solver", "record_trace", solver.record_trace, flag),
    Key {
        section: "capacity",
        name: "source",
        list: false,
        get: |c| match c.capacity.source {
            CapacitySource::Analytic => "analytic".into(),
            CapacitySource::Computed => "computed".into(),
            CapacitySource::Literal(_) => "literal".into(),
        },
        set: |c, s| {
            c.capacity.source = match s.trim() {
                "analytic" => CapacitySource::Analytic,
                "computed" => CapacitySource::Computed,
                "literal" => match c.capacity.source {
                    CapacitySource::Literal(v) => CapacitySource::Literal(v),
                    _ => CapacitySource::Literal(f64::NAN),
                },
                other => return Err(format!("expected analytic, computed or literal, got `{other}`")),
            };
            Ok(())
        },
    },
    Key {
        section: "capacity",
        name: "value",
        list: false,
        get: |c| match c.capacity.source {
            CapacitySource::Literal(v) => v.to_string(),
            _ => String::new(),
        },
        set: |c, s| {
            if s.trim().is_empty() {
                return Ok(());
            }
            c.capacity.source = CapacitySource::Literal(num(s)?);
            Ok(())
        },
    },
    Key {
        section: "capacity",
        name: "shape",
        list: false,
        get: |c| c.capacity.shape.name().to_string(),
        set: |c, s| {
            c.capacity.shape = CellShapeKind::from_name(s.trim()).ok_or_else(|| {
                let names: Vec<_> = CellShapeKind::ALL.iter().map(|e| e.name()).collect();
                format!("unknown shape `{}`; expected one of {}", s.trim(), names.join(", "))
            })?;
            Ok(())
        },
    },
    scalar!("capacity", "cell_p", capacity.cell_p, num),
    scalar!("capacity", "angular", capacity.angular, count),
    vector!("capacity", "radii", capacity.radii),
    vector!("capacity", "critical_ladder", capacity.critical_ladder),
    scalar!("capacity", "datum", capacity.datum, num),
];

/// Keys whose empty value is allowed.
const OPTIONAL_EMPTY: [&str; 1] = ["value"];

fn find_key(section: Option<&str>, name: &str) -> Option<&'static Key> {
    KEYS.iter()
        .find(|k| k.name == name && section.is_none_or(|s| s == k.section))
}

/// One `key = value` (or `key += value`) assignment with its origin.
#[derive(Clone)]
struct Assignment {
    line: usize,
    key: &'static Key,
    append: bool,
    value: String,
}

fn parse_error(line: usize, key: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

fn split_assignment(text: &str) -> Option<(&str, bool, &str)> {
    let (k, v) = text.split_once('=')?;
    match k.strip_suffix('+') {
        Some(k) => Some((k.trim(), true, v.trim())),
        None => Some((k.trim(), false, v.trim())),
    }
}

fn read_file(text: &str) -> Result<Vec<Assignment>> {
    let mut out = Vec::new();
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with(';') {
            continue;
        }
        if let Some(rest) = t.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| parse_error(line, t, "unterminated section header"))?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(parse_error(
                    line,
                    name,
                    format!("unknown section; expected one of {SECTIONS:?}"),
                ));
            }
            section = Some(name.to_string());
            continue;
        }
        let (name, append, value) =
            split_assignment(t).ok_or_else(|| parse_error(line, t, "expected `key = value`"))?;
        let sec = section
            .as_deref()
            .ok_or_else(|| parse_error(line, name, "assignment outside any section"))?;
        let key = find_key(Some(sec), name)
            .ok_or_else(|| parse_error(line, name, format!("unknown key in section [{sec}]")))?;
        out.push(Assignment {
            line,
            key,
            append,
            value: value.to_string(),
        });
    }
    Ok(out)
}

/// Overrides are numbered from 1 in the reported line field.
fn read_overrides(overrides: &[String]) -> Result<Vec<Assignment>> {
    let mut out = Vec::new();
    for (i, o) in overrides.iter().enumerate() {
        let line = i + 1;
        let (name, append, value) =
            split_assignment(o).ok_or_else(|| parse_error(line, o, "override must read `key=value`"))?;
        let key = match name.split_once('.') {
            Some((sec, k)) => find_key(Some(sec), k),
            None => find_key(None, name),
        }
        .ok_or_else(|| parse_error(line, name, "unknown override key"))?;
        out.push(Assignment {
            line,
            key,
            append,
            value: value.to_string(),
        });
    }
    Ok(out)
}

fn apply(cfg: &mut RunConfig, a: &Assignment) -> Result<()> {
    if a.value.is_empty() && !OPTIONAL_EMPTY.contains(&a.key.name) {
        return Err(parse_error(a.line, a.key.name, "missing value"));
    }
    let value = if a.append {
        if !a.key.list {
            return Err(parse_error(a.line, a.key.name, "`+=` only applies to list keys"));
        }
        let current = (a.key.get)(cfg);
        if current.is_empty() {
            a.value.clone()
        } else {
            format!("{current},{}", a.value)
        }
    } else {
        a.value.clone()
    };
    (a.key.set)(cfg, &value).map_err(|m| parse_error(a.line, a.key.name, m))
}

/// Parses configuration text with overrides applied after the file. The
/// experiment id (default `bvp1`) selects the defaults of unspecified keys.
pub fn parse_str(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let file = read_file(text)?;
    let over = read_overrides(overrides)?;
    let mut probe = RunConfig::defaults(ExperimentId::Bvp1);
    for a in file.iter().chain(&over).filter(|a| a.key.name == "experiment") {
        apply(&mut probe, a)?;
    }
    let mut cfg = RunConfig::defaults(probe.experiment.id);
    for a in file.iter().chain(&over) {
        apply(&mut cfg, a)?;
    }
    if let CapacitySource::Literal(v) = cfg.capacity.source {
        if v.is_nan() {
            return Err(parse_error(0, "value", "a literal capacity source needs a value"));
        }
    }
    cfg.check()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path, overrides: &[String]) -> Result<RunConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_str(&text, overrides)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        for id in ExperimentId::ALL {
            let c = RunConfig::defaults(id);
            c.check().unwrap();
            assert_eq!(parse_str(&c.to_ini(), &[]).unwrap(), c, "{}", id.name());
        }
    }

    #[test]
    fn keys_are_unique() {
        for (i, a) in KEYS.iter().enumerate() {
            assert!(KEYS[i + 1..].iter().all(|b| b.name != a.name), "{}", a.name);
        }
    }

    #[test]
    fn errors_name_key_and_line() {
        let text = "[experiment]\nexperiment = bvp1\n\np = abc\n";
        match parse_str(text, &[]) {
            Err(Error::Parse { line, key, .. }) => assert_eq!((line, key.as_str()), (4, "p")),
            other => panic!("{other:?}"),
        }
        match parse_str("[mesh]\nfoo = 1\n", &[]) {
            Err(Error::Parse { line, key, .. }) => assert_eq!((line, key.as_str()), (2, "foo")),
            other => panic!("{other:?}"),
        }
        match parse_str("[experiment]\nx1c =\n", &[]) {
            Err(Error::Parse { line, key, .. }) => assert_eq!((line, key.as_str()), (2, "x1c")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_str("p = 1.5\n", &[]), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            parse_str("", &["nope=1".into()]),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn fractions_and_appends() {
        let c = parse_str(
            "[experiment]\neps_ladder = \"1/2, 0.25\"\n",
            &["eps_ladder+=0.125".into()],
        )
        .unwrap();
        assert_eq!(c.experiment.eps_ladder, vec![0.5, 0.25, 0.125]);
    }
}
