//! `synthphase` command-line driver.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver or pipeline
//! failure, 4 I/O error. Failures also print one JSON object to stderr.

mod config;
mod plot;
mod run;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::{ConfigError, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "synthphase", version, about = "Phase retrieval for intensity-only synthetic apertures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate, retrieve phases, and write every artifact.
    Run(RunArgs),
    /// Check a configuration and print the effective settings.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write the simulated intensities only.
    Simulate(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed, overriding `seed` and `scenario.noise.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Skip the SVG figures.
    #[arg(long)]
    no_svg: bool,
}

enum Failure {
    Config(ConfigError),
    Pipeline(synthphase::Error),
    Io(io::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Pipeline(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn report(&self) -> serde_json::Value {
        let (category, message) = match self {
            Failure::Config(e) => ("config", e.to_string()),
            Failure::Pipeline(e) => ("solver", e.to_string()),
            Failure::Io(e) => ("io", e.to_string()),
        };
        let mut v = json!({ "status": "error", "category": category, "message": message });
        if let Failure::Config(ConfigError::Invalid(list)) = self {
            v["violations"] = list
                .iter()
                .map(|x| json!({ "field": x.field, "message": x.message }))
                .collect();
        }
        v
    }
}

impl From<synthphase::Error> for Failure {
    fn from(e: synthphase::Error) -> Self {
        Failure::Pipeline(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

/// Write into a sibling staging directory, then move into place, so a
/// failure never leaves a partial set behind.
fn commit(dir: &Path, files: &[(String, Vec<u8>)]) -> io::Result<()> {
    let parent = match dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent)?;
    let staging = tempfile::Builder::new().prefix(".synthphase-").tempdir_in(&parent)?;
    for (name, bytes) in files {
        fs::write(staging.path().join(name), bytes)?;
    }
    if !dir.exists() {
        let kept = staging.keep();
        return fs::rename(&kept, dir).inspect_err(|_| {
            let _ = fs::remove_dir_all(&kept);
        });
    }
    for (name, _) in files {
        fs::rename(staging.path().join(name), dir.join(name))?;
    }
    Ok(())
}

fn load(args: &RunArgs) -> Result<RunConfig, Failure> {
    let overrides = Overrides {
        seed: args.seed,
        out: args.out.clone(),
        no_svg: args.no_svg,
    };
    config::load(&args.config, &overrides).map_err(|e| match e {
        ConfigError::Io(_, err) if err.kind() != io::ErrorKind::NotFound => Failure::Io(err),
        other => Failure::Config(other),
    })
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate { config } => {
            let cfg = config::load(&config, &Overrides::default()).map_err(Failure::Config)?;
            println!("ok");
            for w in cfg.warnings() {
                println!("warning: {w}");
            }
            print!("{}", cfg.to_toml());
            Ok(())
        }
        Command::Simulate(args) => {
            let cfg = load(&args)?;
            let out = run::simulate(&cfg)?;
            commit(&cfg.output.dir, &out.files)?;
            println!("{}: {}", cfg.output.dir.display(), out.summary);
            Ok(())
        }
        Command::Run(args) => {
            let cfg = load(&args)?;
            for w in cfg.warnings() {
                eprintln!("warning: {w}");
            }
            let out = run::run(&cfg, &args.config.display().to_string())?;
            commit(&cfg.output.dir, &out.files)?;
            println!("{}: {}", cfg.output.dir.display(), out.summary);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if let Failure::Config(ConfigError::Invalid(list)) = &f {
                for v in list {
                    eprintln!("violation: {v}");
                }
            }
            eprintln!("{}", f.report());
            ExitCode::from(f.code())
        }
    }
}
