//! Batch front-end: argument parsing, subcommand dispatch and artifact emission.
//!
//! Exit codes: 0 success, 1 validation error, 2 solver error, 3 audit failure.

mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use config::RunConfig;

use crate::error::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_AUDIT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fractal-crack", version, about = "Quasistatic growth of fractal cracks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the configuration).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized probes (overrides the configuration).
    #[arg(long)]
    seed: Option<u64>,
    /// Cap on worker threads.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pre-fractal vertices and Hölder constants.
    Curve(Common),
    /// One static solve with field and mask output.
    Solve(Common),
    /// Full quasistatic evolution with trace and manifest.
    Evolve(Common),
    /// Re-check a trace for irreversibility, stability and energy balance.
    Audit {
        #[command(flatten)]
        common: Common,
        /// Trace to audit; defaults to `<out>/trace.csv`.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Minimizer convergence along crack depths.
    Converge(Common),
    /// Box counting, dimension fit and covering contents.
    Dimension(Common),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Curve(_) => "curve",
            Command::Solve(_) => "solve",
            Command::Evolve(_) => "evolve",
            Command::Audit { .. } => "audit",
            Command::Converge(_) => "converge",
            Command::Dimension(_) => "dimension",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Curve(c)
            | Command::Solve(c)
            | Command::Evolve(c)
            | Command::Converge(c)
            | Command::Dimension(c) => c,
            Command::Audit { common, .. } => common,
        }
    }
}

/// What a subcommand produced.
pub(crate) struct Outcome {
    /// File name and contents, written in order.
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: serde_json::Value,
    pub audit_failed: bool,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config_sha256: String,
    seed: u64,
    threads: Option<usize>,
    elapsed_seconds: f64,
    outputs: Vec<&'a str>,
    summary: &'a serde_json::Value,
    config: &'a RunConfig,
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(outcome) if outcome.audit_failed => {
            eprintln!("audit failed: {}", outcome.summary);
            EXIT_AUDIT
        }
        Ok(_) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            if e.is_solver_failure() {
                EXIT_SOLVER
            } else {
                EXIT_VALIDATION
            }
        }
    }
}

fn execute(command: &Command) -> Result<Outcome> {
    let common = command.common();
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = Some(out.clone());
    }
    let out_dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(Error::Validation("--threads must be positive".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::Validation(format!("cannot start thread pool: {e}")))?;
    let start = Instant::now();
    let outcome = pool.install(|| match command {
        Command::Curve(_) => commands::curve(&cfg),
        Command::Solve(_) => commands::solve(&cfg),
        Command::Evolve(_) => commands::evolve(&cfg),
        Command::Audit { trace, .. } => {
            let path = trace.clone().unwrap_or_else(|| out_dir.join("trace.csv"));
            commands::audit(&cfg, &path)
        }
        Command::Converge(_) => commands::converge(&cfg),
        Command::Dimension(_) => commands::dimension(&cfg),
    })?;
    write_outputs(&out_dir, command.name(), &cfg, common.threads, start, &outcome)?;
    println!("{}", outcome.summary);
    Ok(outcome)
}

fn write_outputs(
    dir: &Path,
    command: &str,
    cfg: &RunConfig,
    threads: Option<usize>,
    start: Instant,
    outcome: &Outcome,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, bytes) in &outcome.files {
        std::fs::write(dir.join(name), bytes)?;
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        config_sha256: cfg.hash(),
        seed: cfg.seed,
        threads,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        outputs: outcome.files.iter().map(|(n, _)| n.as_str()).collect(),
        summary: &outcome.summary,
        config: cfg,
    };
    let name = format!("{command}_manifest.json");
    std::fs::write(dir.join(name), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}
