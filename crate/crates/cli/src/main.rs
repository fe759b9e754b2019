use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use perfhom_cli::{run, Command, RunManifest};

/// Perforated-domain energies: capacity cell problems, single solves and
/// eps ladders against the relaxed limit.
#[derive(Parser, Debug)]
#[command(name = "perfhom", version)]
struct Cli {
    /// Configuration file; built-in bvp1 defaults when absent.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides `output` in the file).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads; all cores by default.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Override a configuration key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Extrapolated cell-problem capacity.
    Capacity {
        /// Growth exponent of the cell problem.
        #[arg(long)]
        p: Option<f64>,
        /// boundary_segment, interior_disk, half_disk or critical.
        #[arg(long)]
        shape: Option<String>,
    },
    /// Limit solve plus one perforated solve.
    Solve {
        /// Period of the perforated solve; first ladder entry by default.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Every ladder entry plus the limit, with a convergence report.
    Ladder,
    /// Sampled regularity check of the constraint family.
    Validate {
        #[arg(long, default_value_t = 64)]
        samples: usize,
        /// Largest acceptable Lipschitz or translation constant.
        #[arg(long, default_value_t = 10.0)]
        max_constant: f64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let command = match cli.command {
        Cmd::Capacity { p, shape } => Command::Capacity { p, shape },
        Cmd::Solve { eps } => Command::Solve { eps },
        Cmd::Ladder => Command::Ladder,
        Cmd::Validate { samples, max_constant } => Command::Validate { samples, max_constant },
    };
    let manifest = RunManifest {
        command,
        config: cli.config,
        overrides: cli.set,
        out: cli.out,
        threads: cli.threads,
        seed: cli.seed,
    };
    let status = run(&manifest, &mut std::io::stdout());
    ExitCode::from(status.code() as u8)
}
