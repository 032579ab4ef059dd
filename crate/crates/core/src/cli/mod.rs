//! Command-line front end: configuration, pipelines and artifact emission.

mod commands;
pub mod config;
pub mod output;

use crate::borel_lab::Precision;
use crate::error::Error;
use clap::{Parser, Subcommand, ValueEnum};
use config::RunConfig;
use output::{sha256_hex, ArtifactDir};
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "varactor", version, about = "Perturbation series, resummation and verification for forced dissipative oscillators")]
pub struct Args {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, default_value = "varactor.toml")]
    pub config: PathBuf,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[arg(long, global = true, value_enum, default_value_t = PrecisionArg::Double)]
    pub precision: PrecisionArg,
    /// Seed for the randomized property driver.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Formal orders, constants, growth fit and support check.
    Formal,
    /// Tree enumeration checked against the recursions.
    Trees,
    /// Resummed orders, residual and domain check.
    Resum,
    /// Borel transform, Padé, Laplace and asymptoticity.
    Borel,
    /// Direct integration and periodic orbit.
    Oracle,
    /// Scales, counterterms, quasi-periodic orders and bound audits.
    Qp,
    /// Resummed, Borel and integrator solutions side by side.
    Compare,
    /// Randomized property checks.
    Props,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Formal => "formal",
            Command::Trees => "trees",
            Command::Resum => "resum",
            Command::Borel => "borel",
            Command::Oracle => "oracle",
            Command::Qp => "qp",
            Command::Compare => "compare",
            Command::Props => "props",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecisionArg {
    Double,
    Extended,
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::Double => Precision::Double,
            PrecisionArg::Extended => Precision::Extended,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Domain(Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Domain(_) => 3,
        }
    }

    /// Human-readable text for config and IO errors, JSON for domain errors.
    pub fn render(&self) -> String {
        match self {
            CliError::Config(m) => format!("config error: {m}"),
            CliError::Io(m) => format!("io error: {m}"),
            CliError::Domain(e) => serde_json::to_string(e).unwrap_or_else(|_| e.to_string()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Options that do not live in the config file.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RunFlags {
    pub threads: usize,
    pub precision: PrecisionArg,
    pub seed: u64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    flags: RunFlags,
    config_sha256: String,
    rerun: String,
    artifacts: &'a [output::ArtifactEntry],
}

/// Parses the config file and runs `command`, writing artifacts into `out`.
pub fn run(command: Command, config_path: &Path, out: &Path, flags: RunFlags) -> Result<(), CliError> {
    let text = std::fs::read_to_string(config_path).map_err(|e| CliError::Io(format!("{}: {e}", config_path.display())))?;
    let cfg = RunConfig::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", config_path.display())))?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    run_config(command, &cfg, base, out, flags)
}

/// Runs a parsed config; relative paths inside it resolve against `base`.
pub fn run_config(command: Command, cfg: &RunConfig, base: &Path, out: &Path, flags: RunFlags) -> Result<(), CliError> {
    let spec = cfg.problem(base)?;
    let mut dir = ArtifactDir::create(out)?;

    // echo the config so the directory is self-contained
    let mut echo_cfg = cfg.clone();
    if echo_cfg.problem.forcing_file.is_some() {
        echo_cfg.problem.forcing_file = Some(PathBuf::from("forcing.txt"));
    }
    let echo = echo_cfg.echo();
    dir.write("config.echo.toml", echo.as_bytes())?;
    dir.write("forcing.txt", crate::fourier_core::text::to_text(spec.forcing()).as_bytes())?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(flags.threads)
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    let ctx = commands::Context { cfg, spec: &spec, flags };
    let outcome = pool.install(|| commands::dispatch(command, &ctx, &mut dir));

    let manifest = Manifest {
        tool: "varactor",
        version: env!("CARGO_PKG_VERSION"),
        command: command.name(),
        flags,
        config_sha256: sha256_hex(echo.as_bytes()),
        rerun: format!(
            "varactor {} --config config.echo.toml --precision {} --seed {}",
            command.name(),
            match flags.precision {
                PrecisionArg::Double => "double",
                PrecisionArg::Extended => "extended",
            },
            flags.seed
        ),
        artifacts: dir.entries(),
    };
    let manifest_json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))? + "\n";
    let mut tmp = tempfile::NamedTempFile::new_in(dir.path())?;
    std::io::Write::write_all(&mut tmp, manifest_json.as_bytes())?;
    tmp.persist(dir.path().join("manifest.json")).map_err(|e| CliError::Io(e.error.to_string()))?;
    outcome
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with(args: Args) -> i32 {
    let flags = RunFlags { threads: args.threads, precision: args.precision, seed: args.seed };
    match run(args.command, &args.config, &args.out, flags) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.render());
            e.exit_code()
        }
    }
}
