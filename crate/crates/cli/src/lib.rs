//! Driver behind the `perfhom` binary: resolves the configuration, runs one
//! command and writes its artifacts and a run log under the output directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::{error, info};
use perfhom::config::{parse_config, parse_str, ExperimentId, RunConfig};
use perfhom::constraints::validate_family;
use perfhom::experiments::{
    build_experiment, constraint_family, interior_segments, run_capacity, run_ladder, ConvergenceReport,
};
use perfhom::geometry::Point;
use perfhom::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    /// Cell problem of the `[capacity]` section.
    Capacity {
        p: Option<f64>,
        shape: Option<String>,
    },
    /// Limit problem and one perforated problem (the first ladder entry
    /// unless `eps` is given).
    Solve {
        eps: Option<f64>,
    },
    Ladder,
    /// Spot-check of the experiment's constraint family on random sites.
    Validate {
        samples: usize,
        max_constant: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: Command,
    pub config: Option<PathBuf>,
    /// `key=value` pairs applied after the file.
    pub overrides: Vec<String>,
    /// Replaces the configured output directory.
    pub out: Option<PathBuf>,
    /// Worker threads; all cores when absent.
    pub threads: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    /// Some solves or checks failed; artifacts were still written.
    Partial,
    ConfigError,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Self::Success => 0,
            Self::ConfigError => 1,
            Self::Partial => 2,
        }
    }
}

fn status_of(err: &Error) -> Status {
    match err {
        Error::Config(_) | Error::Parse { .. } | Error::InvalidArgument(_) | Error::Io(_) => Status::ConfigError,
        _ => Status::Partial,
    }
}

/// Configuration the manifest resolves to.
pub fn resolve(manifest: &RunManifest) -> perfhom::Result<RunConfig> {
    let mut overrides = manifest.overrides.clone();
    match &manifest.command {
        Command::Capacity { p, shape } => {
            if let Some(p) = p {
                overrides.push(format!("cell_p={p}"));
            }
            if let Some(s) = shape {
                overrides.push(format!("shape={s}"));
            }
        }
        Command::Solve { eps: Some(e) } => overrides.push(format!("eps_ladder={e}")),
        Command::Solve { eps: None } => {}
        Command::Ladder | Command::Validate { .. } => {}
    }
    if let Some(out) = &manifest.out {
        overrides.push(format!("output={}", out.display()));
    }
    let mut cfg = match &manifest.config {
        Some(path) => parse_config(path, &overrides)?,
        None => parse_str("", &overrides)?,
    };
    if matches!(manifest.command, Command::Solve { eps: None }) {
        cfg.experiment.eps_ladder.truncate(1);
    }
    Ok(cfg)
}

/// Runs the manifest, printing one line per result to `out`.
pub fn run(manifest: &RunManifest, out: &mut dyn std::io::Write) -> Status {
    let cfg = match resolve(manifest) {
        Ok(c) => c,
        Err(err) => {
            let _ = writeln!(out, "error: {err}");
            error!("{err}");
            if let Some(dir) = &manifest.out {
                let _ = fs::create_dir_all(dir);
                let _ = fs::write(dir.join("run.log"), format!("error: {err}\nexit: 1\n"));
            }
            return Status::ConfigError;
        }
    };
    let dir = cfg.experiment.output.clone();
    if let Err(err) = fs::create_dir_all(&dir) {
        let _ = writeln!(out, "error: cannot create {}: {err}", dir.display());
        return Status::ConfigError;
    }
    let mut log = String::new();
    let _ = writeln!(log, "command: {:?}", manifest.command);
    let _ = writeln!(log, "seed: {}", manifest.seed);
    let _ = writeln!(log, "threads: {}", rayon::current_num_threads());
    let result = match &manifest.command {
        Command::Capacity { .. } => capacity(&cfg, &dir, out, &mut log),
        Command::Solve { .. } | Command::Ladder => ladder(&cfg, &dir, out, &mut log),
        Command::Validate { samples, max_constant } => {
            validate(&cfg, *samples, *max_constant, manifest.seed, &dir, out, &mut log)
        }
    };
    let status = result.unwrap_or_else(|err| {
        let _ = writeln!(out, "error: {err}");
        let _ = writeln!(log, "error: {err}");
        error!("{err}");
        status_of(&err)
    });
    let _ = writeln!(log, "exit: {}", status.code());
    let _ = fs::write(dir.join("run.log"), log);
    status
}

fn capacity(cfg: &RunConfig, dir: &Path, out: &mut dyn std::io::Write, log: &mut String) -> perfhom::Result<Status> {
    let c = &cfg.capacity;
    info!("capacity: shape {}, p = {}", c.shape.name(), c.cell_p);
    let result = run_capacity(cfg)?;
    let csv = result.to_csv();
    fs::write(dir.join("capacity.csv"), &csv)?;
    let _ = writeln!(out, "shape={} p={} c={:.6}", c.shape.name(), c.cell_p, result.value());
    for line in csv.lines() {
        let _ = writeln!(out, "  {line}");
    }
    let _ = writeln!(log, "capacity {:.12e}", result.value());
    Ok(Status::Success)
}

fn ladder(cfg: &RunConfig, dir: &Path, out: &mut dyn std::io::Write, log: &mut String) -> perfhom::Result<Status> {
    let exp = build_experiment(cfg)?;
    let report: ConvergenceReport = run_ladder(&exp);
    let written = report.write(dir)?;
    fs::write(dir.join("config.cfg"), cfg.to_ini())?;
    for line in report.summary_lines() {
        let _ = writeln!(out, "{line}");
        let _ = writeln!(log, "{line}");
    }
    for row in report.rows.iter().chain(std::iter::once(&report.limit)) {
        if let Some(j) = row.min_jacobian {
            let _ = writeln!(log, "eps {:?}: min J {j:.6e}", row.epsilon);
        }
        if row.dropped > 0 {
            let _ = writeln!(
                log,
                "eps {:?}: {} elements dropped near Dirichlet data",
                row.epsilon, row.dropped
            );
        }
    }
    let _ = writeln!(log, "wrote {} files", written.len() + 1);
    Ok(if report.partial() {
        Status::Partial
    } else {
        Status::Success
    })
}

/// Uniform point on the support of the experiment's perforations.
fn sample_site(id: ExperimentId, ell: f64, rng: &mut ChaCha8Rng) -> Point {
    let t = rng.random::<f64>() * ell;
    match id {
        ExperimentId::Bvp1 | ExperimentId::Bvp4 | ExperimentId::NeoHookean => [ell, t],
        ExperimentId::Bvp2 => match rng.random_range(0..4) {
            0 => [t, 0.0],
            1 => [ell, t],
            2 => [t, ell],
            _ => [0.0, t],
        },
        ExperimentId::Bvp3 => {
            let (a, b) = interior_segments(ell)[rng.random_range(0..3)];
            let s = t / ell;
            [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
        }
        ExperimentId::BulkPin => [t, rng.random::<f64>() * ell],
    }
}

fn validate(
    cfg: &RunConfig,
    samples: usize,
    max_constant: f64,
    seed: u64,
    dir: &Path,
    out: &mut dyn std::io::Write,
    log: &mut String,
) -> perfhom::Result<Status> {
    let family = constraint_family(cfg)?;
    let ell = cfg.experiment.ell;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sites: Vec<Point> = (0..samples)
        .map(|_| sample_site(cfg.experiment.id, ell, &mut rng))
        .collect();
    let m = if cfg.experiment.id == ExperimentId::Bvp3 { 3 } else { 2 };
    let report = validate_family(&|x| family.at(x), &sites, m, max_constant)?;
    let mut csv = String::from("name,value\n");
    let _ = writeln!(csv, "sites,{}", report.sites);
    let _ = writeln!(csv, "selection_bound,{:.12e}", report.selection_bound);
    let _ = writeln!(csv, "selection_lipschitz,{:.12e}", report.selection_lipschitz);
    let _ = writeln!(csv, "translation_constant,{:.12e}", report.translation_constant);
    let _ = writeln!(csv, "violations,{}", report.violations.len());
    fs::write(dir.join("validation.csv"), &csv)?;
    let _ = writeln!(
        out,
        "{}: {} sites, selection bound {:.4}, selection Lipschitz {:.4}, translation constant {:.4}, {}",
        cfg.experiment.id.name(),
        report.sites,
        report.selection_bound,
        report.selection_lipschitz,
        report.translation_constant,
        if report.passed() { "passed" } else { "FAILED" }
    );
    for v in &report.violations {
        let _ = writeln!(out, "  {v}");
        let _ = writeln!(log, "violation: {v}");
    }
    Ok(if report.passed() {
        Status::Success
    } else {
        Status::Partial
    })
}
