//! `stirsap` command-line front end: one campaign per invocation, written as
//! `<out>/<name>.csv` plus `<out>/<name>.json`.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stirsap::io::parse_config;
use stirsap::Protocol;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "STIRSAP_OUT";

#[derive(Parser, Debug)]
#[command(name = "stirsap", version, about = "STIRAP and STIRSAP pulse synthesis and dynamics campaigns")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct Global {
    /// Config file (`key = value [unit]` lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Extra config entry, e.g. `--set "detuning = 2 GHz"`; repeatable.
    #[arg(long = "set", global = true, value_name = "ENTRY")]
    pub overrides: Vec<String>,
    /// Operation time with unit, e.g. `0.4ms`.
    #[arg(long, global = true, value_parser = parse_total_time)]
    pub total_time: Option<String>,
    /// Output directory.
    #[arg(long, global = true, env = OUT_ENV, default_value = "results")]
    pub out: PathBuf,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Only report errors.
    #[arg(long, short, global = true, conflicts_with = "verbose")]
    pub quiet: bool,
    /// More diagnostics; repeat for debug output.
    #[arg(long, short, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Populations and spin polarization of one run from |1⟩.
    Dynamics {
        #[arg(long, default_value = "stirsap", value_parser = parse_protocol)]
        protocol: Protocol,
        /// Propagate the full Λ system instead of the effective two-level one.
        #[arg(long)]
        three_level: bool,
    },
    /// Efficiency against operation time (in units of T₀).
    SweepTime {
        #[arg(long = "protocol", value_parser = parse_protocol)]
        protocols: Vec<Protocol>,
        #[command(flatten)]
        range: Range,
    },
    /// Efficiency against the amplitude factor ε.
    SweepAmplitude {
        #[arg(long = "protocol", value_parser = parse_protocol)]
        protocols: Vec<Protocol>,
        #[command(flatten)]
        range: Range,
    },
    /// STIRSAP efficiency against the delay ratio Δτ′/Δτ.
    SweepDelay {
        /// Recompute the shortcut shapes for every delay.
        #[arg(long)]
        adapt: bool,
        #[command(flatten)]
        range: Range,
    },
    /// Efficiency against a detuning offset (range in MHz).
    SweepDetuning {
        #[arg(long = "protocol", value_parser = parse_protocol)]
        protocols: Vec<Protocol>,
        #[command(flatten)]
        range: Range,
    },
    /// Peak Rabi frequency (in Ω₀) needed to reach the fidelity target, against T (in T₀).
    Peaks {
        #[command(flatten)]
        range: Range,
    },
    /// Operation times T_AP and T_SA against the peak Rabi frequency.
    Speedup,
    /// Repeated STIRSAP passes.
    Cycles {
        /// Number of passes; defaults to the config's `cycles`.
        #[arg(long)]
        cycles: Option<usize>,
        /// Initial |1⟩ population.
        #[arg(long, default_value_t = 1.0)]
        p1: f64,
    },
    /// Spin polarizations under H₀, H and H̃ with the field directions.
    Bloch,
    /// Original and modified pulse shapes.
    Pulses {
        #[arg(long, default_value = "stirsap", value_parser = parse_protocol)]
        protocol: Protocol,
    },
    /// Check the configuration and report every invariant.
    Validate,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct Range {
    #[arg(long)]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
}

fn parse_protocol(s: &str) -> Result<Protocol, String> {
    s.parse().map_err(|e: stirsap::Error| e.to_string())
}

fn parse_total_time(s: &str) -> Result<String, String> {
    parse_config(&format!("total_time = {s}")).map_err(|e| e.to_string())?;
    Ok(s.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let level = match (cli.global.quiet, cli.global.verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Warn,
        (false, 1) => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();

    if let Some(n) = cli.global.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }

    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
