//! `lcoal`: classify Λ-coalescents, simulate them and report on the
//! compactness of their measure trees.

mod commands;
mod config;
mod error;
mod manifest;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coalescent_core::sim::Scheme;

use crate::commands::execute;
use crate::config::{CommandKind, FileConfig, Format, OneOrMany, RunConfig};
use crate::error::CliError;
use crate::manifest::{now, OutputDir, RunManifest};

#[derive(Parser)]
#[command(name = "lcoal", version, about = "Lambda-coalescents and the compactness of their trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the coalescent comes down from infinity and has dust.
    Classify(RunArgs),
    /// Simulate coalescent histories.
    Simulate(RunArgs),
    /// Geometric statistics of simulated trees or of a saved history.
    Analyze(RunArgs),
    /// Full compactness report: classification plus finite-n diagnostics.
    Report(RunArgs),
    /// Re-run a command from its manifest and compare the outputs.
    Reproduce {
        /// Path to a manifest.json.
        manifest: PathBuf,
        /// Also write the reproduced outputs here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Measure spec, e.g. `kingman`, `beta:0.5,1.5`, `0.5*kingman+uniform:0,1`.
    #[arg(long)]
    measure: Option<String>,
    /// Sample size; a comma-separated grid for analyze and report.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    scheme: Option<Scheme>,
    /// Poisson cutoff: jumps below it are not simulated.
    #[arg(long)]
    x_min: Option<f64>,
    /// Largest block count in the series test.
    #[arg(long)]
    bmax: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    eps_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    delta_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    eta_grid: Option<Vec<f64>>,
    /// Mass levels for thin points and the moduli of mass distribution.
    #[arg(long, value_delimiter = ',')]
    thin_delta_grid: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// History file to analyze instead of simulating.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output directory; a manifest is written next to the outputs.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// TOML file with any of the above keys; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl RunArgs {
    fn flags(&self) -> FileConfig {
        FileConfig {
            measure: self.measure.clone(),
            n: self.n.clone().map(OneOrMany::Many),
            horizon: self.horizon,
            replicates: self.replicates,
            seed: self.seed,
            scheme: self.scheme,
            x_min: self.x_min,
            bmax: self.bmax,
            eps_grid: self.eps_grid.clone(),
            delta_grid: self.delta_grid.clone(),
            eta_grid: self.eta_grid.clone(),
            thin_delta_grid: self.thin_delta_grid.clone(),
            format: self.format,
            input: self.input.clone(),
            jobs: self.jobs,
            thresholds: None,
        }
    }
}

fn set_jobs(jobs: Option<usize>) -> Result<(), CliError> {
    match jobs {
        Some(0) => Err(CliError::Validation("--jobs must be at least 1".into())),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::Validation(format!("cannot set up {j} workers: {e}"))),
        None => Ok(()),
    }
}

fn print(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes());
    let _ = out.flush();
}

fn run_command(kind: CommandKind, args: &RunArgs) -> Result<(), CliError> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let cfg = RunConfig::resolve(kind, args.flags(), file)?;
    set_jobs(cfg.jobs)?;
    let started = now();
    let products = execute(kind, &cfg)?;
    match &args.out {
        Some(dir) => {
            let mut out = OutputDir::create(dir)?;
            for (name, bytes) in &products.files {
                out.write(name, bytes)?;
            }
            let manifest = RunManifest {
                version: env!("CARGO_PKG_VERSION").to_string(),
                command: kind,
                seed: cfg.seed,
                config: cfg.clone(),
                started,
                finished: now(),
                inputs: products.inputs.clone(),
                outputs: Vec::new(),
                notes: products.notes.clone(),
            };
            out.finish(manifest)?;
            print(&products.summary);
            if cfg.format == Format::Json && kind == CommandKind::Classify {
                print(&products.stdout(Format::Json)?);
            }
        }
        None => print(&products.stdout(cfg.format)?),
    }
    for note in &products.notes {
        eprintln!("note: {note}");
    }
    products.failure.map_or(Ok(()), Err)
}

fn reproduce(path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let manifest = RunManifest::load(path)?;
    let version = env!("CARGO_PKG_VERSION");
    if manifest.version != version {
        return Err(CliError::Validation(format!(
            "manifest was written by version {}, this is {version}",
            manifest.version
        )));
    }
    for input in &manifest.inputs {
        let now = manifest::digest_file(Path::new(&input.path))?;
        if now != input.sha256 {
            return Err(CliError::Inconsistent(format!("input {} changed since the run", input.path)));
        }
    }
    set_jobs(manifest.config.jobs)?;
    let started = now();
    let products = execute(manifest.command, &manifest.config)?;
    let mut mismatches = Vec::new();
    for expected in &manifest.outputs {
        let got = products.files.iter().find(|(name, _)| *name == expected.path);
        let status = match got {
            Some((_, bytes)) if manifest::sha256_hex(bytes) == expected.sha256 => "identical",
            Some(_) => "DIFFERENT",
            None => "MISSING",
        };
        if status != "identical" {
            mismatches.push(expected.path.clone());
        }
        print(&format!("{status} {}\n", expected.path));
    }
    for (name, _) in &products.files {
        if !manifest.outputs.iter().any(|o| o.path == *name) {
            print(&format!("EXTRA {name}\n"));
            mismatches.push(name.clone());
        }
    }
    if let Some(dir) = out {
        let mut od = OutputDir::create(dir)?;
        for (name, bytes) in &products.files {
            od.write(name, bytes)?;
        }
        od.finish(RunManifest { started, finished: now(), notes: products.notes.clone(), ..manifest.clone() })?;
    }
    if mismatches.is_empty() {
        Ok(())
    } else {
        Err(CliError::Inconsistent(format!("outputs differ from the manifest: {}", mismatches.join(", "))))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Classify(a) => run_command(CommandKind::Classify, a),
        Command::Simulate(a) => run_command(CommandKind::Simulate, a),
        Command::Analyze(a) => run_command(CommandKind::Analyze, a),
        Command::Report(a) => run_command(CommandKind::Report, a),
        Command::Reproduce { manifest, out } => reproduce(manifest, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lcoal: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
