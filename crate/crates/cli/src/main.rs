use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use morphreg_cli::bundle::Bundle;
use morphreg_cli::commands;
use morphreg_cli::config::RunConfig;
use morphreg_cli::{CliError, Result};

/// Multi-objective deformable registration of 3D volumes.
///
/// `MORPHREG_THREADS` caps the worker thread count.
#[derive(Parser)]
#[command(name = "morphreg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic sphere-in-cube problem.
    Synth {
        #[arg(long)]
        out: PathBuf,
        /// Reduced 32³ preset.
        #[arg(long)]
        smoke: bool,
        /// Voxels per axis; shapes scale along.
        #[arg(long)]
        size: Option<usize>,
        #[arg(long)]
        guidance_points: Option<usize>,
    },
    /// Optimize and write a bundle.
    Register {
        /// TOML run configuration; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Problem directory; overrides the config's `problem`.
        #[arg(long)]
        problem: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        quiet: bool,
    },
    /// Write the warped volumes and DVF of one solution.
    Render {
        id: String,
        #[arg(long)]
        bundle: PathBuf,
        /// Defaults to <bundle>/render/<id>.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print objectives, guidance error and Dice of one solution.
    Metrics {
        id: String,
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Serve a bundle over HTTP.
    Serve {
        bundle: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
    },
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("MORPHREG_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Config(format!("MORPHREG_THREADS={v} is not a positive integer"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<()> {
    init_threads()?;
    match cli.command {
        Command::Synth {
            out,
            smoke,
            size,
            guidance_points,
        } => {
            let p = commands::synth(&out, smoke, size, guidance_points)?;
            let d = p.dims();
            println!("wrote {}³ problem to {}", d[0], out.display());
        }
        Command::Register {
            config,
            problem,
            out,
            seed,
            quiet,
        } => {
            let mut cfg = match &config {
                Some(path) => RunConfig::load(path)?,
                None => RunConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let dir = commands::problem_dir(&cfg, problem.as_deref())?;
            let m = commands::register(&cfg, &dir, &out, quiet)?;
            for s in &m.stages {
                println!(
                    "stage {}: {:?} grid, {} front members",
                    s.stage, s.grid_resolution, s.front_size
                );
            }
            println!("bundle written to {}", out.display());
        }
        Command::Render { id, bundle, out } => {
            let b = Bundle::open(&bundle)?;
            let dir = commands::render(&b, &id, out.as_deref())?;
            println!("{}", dir.display());
        }
        Command::Metrics { id, bundle, json } => {
            let m = commands::metrics(&Bundle::open(&bundle)?, &id)?;
            if json {
                let text = serde_json::to_string_pretty(&m).map_err(|source| CliError::Json {
                    path: bundle.clone(),
                    source,
                })?;
                println!("{text}");
            } else {
                print!("{}", m.report());
            }
        }
        Command::Serve { bundle, port, host } => {
            let b = Bundle::open(&bundle)?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::io(&bundle, e))?;
            rt.block_on(morphreg_cli::server::serve(b, SocketAddr::new(host, port)))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
