//! `mipt`: command-line driver for the monitored Ising chain toolkit.

mod commands;
mod config;
mod error;
mod fit;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::Parser;
use serde_json::json;

use config::{parse_config, Overrides, RunConfig};
use error::CliError;

/// Simulates and analyses the continuously monitored transverse-field Ising
/// chain. Settings come from a flat TOML file (`--config`) and/or flags;
/// flags take precedence.
#[derive(Parser, Debug)]
#[command(name = "mipt", version)]
struct Args {
    /// noclick-scan | noclick-point | trajectory | ensemble | fit | correlators
    #[arg(value_name = "COMMAND")]
    positional: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    command: Option<String>,
    #[arg(long = "L", allow_hyphen_values = true)]
    l: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    h: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    dt: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    tmax: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    sample_every: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    trajectories: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    seed: Option<i64>,
    /// Output file; a `<out>.meta.json` sidecar is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    /// Worker threads (fallback: MIPT_THREADS, then all cores).
    #[arg(long, allow_hyphen_values = true)]
    threads: Option<i64>,
    /// Entropy block length (sites 0..ell).
    #[arg(long, allow_hyphen_values = true)]
    ell: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    anneal_restarts: Option<i64>,
    /// Input file of the fit command.
    #[arg(long)]
    input: Option<PathBuf>,
}

impl Args {
    fn overrides(self) -> Result<(Option<PathBuf>, Overrides), CliError> {
        let command = match (self.positional, self.command) {
            (Some(a), Some(b)) if a != b => {
                return Err(CliError::key("command", format!("conflicting commands '{a}' and '{b}'")))
            }
            (a, b) => a.or(b),
        };
        Ok((
            self.config,
            Overrides {
                command,
                l: self.l,
                h: self.h,
                gamma: self.gamma,
                dt: self.dt,
                tmax: self.tmax,
                sample_every: self.sample_every,
                trajectories: self.trajectories,
                seed: self.seed,
                out: self.out,
                format: self.format,
                threads: self.threads,
                ell: self.ell,
                anneal_restarts: self.anneal_restarts,
                input: self.input,
            },
        ))
    }
}

fn sidecar_path(out: &std::path::Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn execute(args: Args) -> Result<(), CliError> {
    let (file, overrides) = args.overrides()?;
    let config: RunConfig = parse_config(file.as_deref(), overrides, std::env::var("MIPT_THREADS").ok())?;
    if let Some(n) = config.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::key("threads", format!("cannot start {n} worker threads: {e}")))?;
    }
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    let output = commands::run(&config)?;
    let meta = json!({
        "schema": "mipt.metadata.v1",
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "threads": rayon::current_num_threads(),
        "started_unix": started,
        "wall_time_s": clock.elapsed().as_secs_f64(),
        "run": output.meta,
    });
    let meta_text = serde_json::to_string_pretty(&meta).map_err(mipt_core::Error::from)? + "\n";
    match &config.out {
        Some(path) => {
            std::fs::write(path, &output.body).map_err(CliError::io(format!("cannot write {}", path.display())))?;
            let side = sidecar_path(path);
            std::fs::write(&side, &meta_text).map_err(CliError::io(format!("cannot write {}", side.display())))?;
            println!("{}", serde_json::to_string(&config).map_err(mipt_core::Error::from)?);
        }
        None => {
            std::io::stdout().write_all(&output.body).map_err(CliError::io("cannot write to stdout"))?;
            eprint!("{meta_text}");
        }
    }
    Ok(())
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => return fail(&CliError::Usage(e.render().to_string().trim().to_owned())),
    };
    match execute(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
