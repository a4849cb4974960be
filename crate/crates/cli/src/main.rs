//! `airbridge` command-line front end.
//!
//! Results go to stdout (JSON or CSV); diagnostics go to stderr as one JSON
//! object per line. Exit codes: 0 success, 1 data or validation error,
//! 2 usage error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "airbridge",
    version,
    about = "Airbridge circuit design and analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Derive qubit frequencies, anharmonicities and couplings from a design.
    Quantize {
        /// Design JSON: netlist plus SQUIDs.
        #[arg(long)]
        design: PathBuf,
        /// Smallest accepted E_J/E_C.
        #[arg(long, default_value_t = 10.0)]
        min_ratio: f64,
    },
    /// Scaffold profile simulation and plateau analysis.
    #[command(subcommand)]
    Scaffold(ScaffoldCommand),
    /// Least-squares fits of measurement data.
    #[command(subcommand)]
    Fit(FitCommand),
    /// Place airbridges along every path of a layout.
    Place {
        #[arg(long)]
        layout: PathBuf,
        /// Rule JSON: spacing_um, end_margin_um and per-role overrides.
        #[arg(long)]
        rule: Option<PathBuf>,
    },
    /// Check placements for clearance and off-path violations.
    Check {
        #[arg(long)]
        layout: PathBuf,
        #[arg(long)]
        placements: PathBuf,
        /// Minimum edge-to-edge distance between footprints (um).
        #[arg(long, default_value_t = 0.0)]
        clearance: f64,
    },
}

#[derive(Debug, Args)]
struct PlateauArgs {
    /// Largest |slope| counted as flat (um/um).
    #[arg(long, default_value_t = airbridge_core::scaffold::DEFAULT_SLOPE_TOL)]
    slope_tol: f64,
    /// Shortest flat run reported as a plateau (um).
    #[arg(long, default_value_t = airbridge_core::scaffold::DEFAULT_MIN_SPAN)]
    min_span: f64,
}

#[derive(Debug, Subcommand)]
enum ScaffoldCommand {
    /// Simulated scaffold profile for one length (CSV x_um,h_um).
    Sim {
        /// Edge profile CSV (x_um,h_um).
        #[arg(long)]
        edge: PathBuf,
        #[arg(long)]
        length: f64,
    },
    /// Apex height and plateau flag over a range of lengths.
    Sweep {
        #[arg(long)]
        edge: PathBuf,
        /// start:stop:step in um, stop inclusive.
        #[arg(long, value_parser = commands::parse_lengths)]
        lengths: commands::Lengths,
        #[command(flatten)]
        plateau: PlateauArgs,
    },
    /// Parabolic grayscale profile (CSV x_um,h_um).
    Grayscale {
        #[arg(long)]
        height: f64,
        #[arg(long)]
        length: f64,
        /// Sample count; defaults to a 0.1 um pitch.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Longest scaffold length without a plateau.
    Maxlen {
        #[arg(long)]
        edge: PathBuf,
        /// lo:hi search range in um.
        #[arg(long, value_parser = commands::parse_range, default_value = "20:200")]
        range: (f64, f64),
        #[command(flatten)]
        plateau: PlateauArgs,
    },
}

#[derive(Debug, Subcommand)]
enum FitCommand {
    /// Chain resistance against bridge count (CSV n_bridges,resistance_ohm).
    Resistance {
        #[arg(long)]
        data: PathBuf,
    },
    /// Resistivity across unit geometries.
    Resistivity {
        #[arg(long)]
        data: PathBuf,
    },
    /// Loss tangent against bridge count (CSV n_bridges,inv_qi).
    Loss {
        #[arg(long)]
        data: PathBuf,
        /// Weight points by 1/y² (constant relative uncertainty).
        #[arg(long)]
        weighted: bool,
    },
    /// Notch resonator transmission (CSV f_GHz,re,im).
    S21 {
        #[arg(long)]
        data: PathBuf,
        /// Feedline power; adds the mean photon number to the result.
        #[arg(long, allow_hyphen_values = true)]
        power_dbm: Option<f64>,
    },
    /// TLS saturation of the loss (CSV n_photon,inv_qi).
    Tls {
        #[arg(long)]
        data: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.render().to_string();
            let message: Vec<&str> = text
                .lines()
                .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more information"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            let err = commands::CliError::usage(
                message.join(" ").trim_start_matches("error: ").to_string(),
            );
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code());
        }
    };
    match commands::run(&cli.command) {
        Ok(out) => {
            for d in &out.diagnostics {
                eprintln!("{d}");
            }
            print!("{}", out.stdout);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
