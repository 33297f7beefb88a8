use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;
use metasurf::io::{self, DesignConfig};
use metasurf::{Error, Result};

/// Thread count override for the solver and the ray tracer.
const THREADS_ENV: &str = "METASURF_THREADS";

#[derive(Parser)]
#[command(name = "metasurf", version, about = "Metasurface phase design and ray-traced verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the phase and write phase/potential/residual grids and report.json.
    Solve {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Trace rays through a phase grid; writes histogram.tsv and verify.json.
    Verify {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long)]
        phase: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Print residual statistics of a phase grid against the equation.
    Residual {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long)]
        phase: PathBuf,
        /// Also write the residual field as a grid file.
        #[arg(long)]
        grid_out: Option<PathBuf>,
    },
    /// Write a preset config, then solve and verify it.
    Demo {
        /// uniform-disk or gaussian-to-ring
        name: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Only write config.json.
        #[arg(long)]
        config_only: bool,
    },
}

fn load(path: &Path) -> Result<(DesignConfig, PathBuf)> {
    let text = std::fs::read_to_string(path)?;
    let cfg = io::parse_config(&text)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((cfg, base))
}

fn print_json<T: serde::Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("report serializes"));
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve { config, out } => {
            let (cfg, base) = load(&config)?;
            let report = io::run_solve(&cfg, &base, &out)?;
            print_json(&report);
        }
        Command::Verify { config, phase, out } => {
            let (cfg, base) = load(&config)?;
            let report = io::run_verify(&cfg, &base, &phase, &out)?;
            print_json(&report);
        }
        Command::Residual {
            config,
            phase,
            grid_out,
        } => {
            let (cfg, base) = load(&config)?;
            let (summary, field) = io::run_residual(&cfg, &base, &phase)?;
            if let Some(p) = grid_out {
                io::GridFile::new("residual", field).write(&p)?;
            }
            print_json(&summary);
        }
        Command::Demo { name, out, config_only } => {
            let cfg = io::demo_config(&name).ok_or_else(|| {
                Error::Validation {
                    path: "name".into(),
                    message: format!("unknown demo `{name}`; available: {}", io::DEMO_NAMES.join(", ")),
                }
            })?;
            let out = out.unwrap_or_else(|| PathBuf::from(&name));
            std::fs::create_dir_all(&out)?;
            let config_path = out.join("config.json");
            std::fs::write(&config_path, cfg.to_json() + "\n")?;
            info!("wrote {}", config_path.display());
            if config_only {
                return Ok(());
            }
            let solved = io::run_solve(&cfg, &out, &out)?;
            let verified = io::run_verify(&cfg, &out, &out.join(io::PHASE_FILE), &out)?;
            print_json(&serde_json::json!({ "solve": solved, "verify": verified }));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("warning: could not set thread count: {e}");
                }
            }
            _ => eprintln!("warning: ignoring {THREADS_ENV}={v}: expected a positive integer"),
        }
    }
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
