use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use shgsim::{parse_config, run, Command, Grid, Invocation};

/// Steady-state simulator for a resonant second-harmonic generator.
#[derive(Parser, Debug)]
#[command(name = "shgsim", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output table (CSV); the summary goes next to it as <stem>.summary.json.
    #[arg(long)]
    out: PathBuf,
    /// Input power for simulate and scan, W.
    #[arg(long = "power-W")]
    power_w: Option<f64>,
    /// start:stop:n, power for sweep and match, detuning (rad) for scan.
    #[arg(long)]
    grid: Option<Grid>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = match parse_config(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("shgsim: {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    if let Some(p) = args.power_w {
        if !(p.is_finite() && p >= 0.0) {
            eprintln!("shgsim: --power-W must be a non-negative number, got {p}");
            return ExitCode::from(2);
        }
    }
    let base_dir = args
        .config
        .parent()
        .map(PathBuf::from)
        .unwrap_or_default();
    let inv = Invocation {
        command: args.command,
        config,
        base_dir,
        out: args.out,
        power_w: args.power_w,
        grid: args.grid,
    };
    match run(&inv) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("shgsim: {e}");
            ExitCode::FAILURE
        }
    }
}
